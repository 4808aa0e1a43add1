#pragma once

// Glue between the dataset, text embedding and cue scoring modules: turns
// questions into training pairs and per-cue candidate scores.

#include <map>
#include <string>
#include <vector>

#include "mcqa/cca.hpp"
#include "mcqa/cues.hpp"
#include "mcqa/dataset.hpp"
#include "mcqa/fusion.hpp"
#include "mcqa/text_embed.hpp"

namespace mcqa {

enum class CueMode { FullImage, Region };

struct CueConfig {
    std::string name;
    CueMode mode = CueMode::FullImage;
    SelectionMode selection = SelectionMode::PerQuestion;
    RegionPolicy policy;
};

CueMode parse_cue_mode(const std::string& name);
std::string cue_mode_name(CueMode mode);
SelectionMode parse_selection_mode(const std::string& name);
std::string selection_mode_name(SelectionMode mode);

/// Looks up the configuration for `cue`; unknown cues score as full-image.
CueConfig find_cue_config(const std::vector<CueConfig>& configs, const std::string& cue);

/// Models keyed by cue. `per_type` models take precedence over `shared`.
struct ModelSet {
    std::map<std::string, std::map<std::string, CcaModel>> per_type;  ///< qtype -> cue -> model
    std::map<std::string, CcaModel> shared;                           ///< cue -> model

    /// UnknownQtype when neither a per-type nor a shared model exists.
    const CcaModel& get(const std::string& qtype, const std::string& cue) const;
};

struct TrainingPairs {
    Eigen::MatrixXd X;  ///< visual rows
    Eigen::MatrixXd Y;  ///< gold-answer text rows
    std::size_t skipped = 0;  ///< questions whose gold answer has no embedding
};

/// One row per labelled question: the cue's visual vector (the single row
/// for full-image cues, the mean over regions for region cues) paired with
/// the embedding of the gold answer.
TrainingPairs training_pairs(const FeatureStore& store, const WordVectorTable& table,
                             const std::vector<QuestionInstance>& questions, const CueConfig& cue);

/// Embeds every candidate, leaving nullopt for candidates without known tokens.
std::vector<CandidateEmbedding> embed_candidates(const WordVectorTable& table, const QuestionInstance& q,
                                                 std::vector<std::string>& warnings);

/// Scores all candidates of a question under one cue channel.
CueScores score_question_cue(const CcaModel& model, const FeatureStore& store, const WordVectorTable& table,
                             const QuestionInstance& q, const std::vector<CandidateEmbedding>& candidates,
                             const CueConfig& cue, std::vector<std::string>& warnings);

struct QuestionScores {
    std::vector<CueScores> per_cue;
    std::vector<std::string> warnings;
};

QuestionScores score_question(const ModelSet& models, const FeatureStore& store, const WordVectorTable& table,
                              const QuestionInstance& q, const std::vector<std::string>& cues,
                              const std::vector<CueConfig>& configs);

/// Score tensor for the given cue order; rows follow `questions`.
CueScoreTensor build_score_tensor(const ModelSet& models, const FeatureStore& store, const WordVectorTable& table,
                                  const std::vector<QuestionInstance>& questions,
                                  const std::vector<std::string>& cues, const std::vector<CueConfig>& configs,
                                  std::size_t threads = 1);

/// Groups questions by qtype, preserving file order inside each group.
std::map<std::string, std::vector<QuestionInstance>> group_by_qtype(const std::vector<QuestionInstance>& questions);

} // namespace mcqa
