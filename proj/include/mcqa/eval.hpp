#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mcqa/fusion.hpp"
#include "mcqa/pipeline.hpp"

namespace mcqa {

struct Tally {
    std::size_t n = 0;
    std::size_t correct = 0;
    double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n); }
    bool operator==(const Tally&) const = default;
};

struct EvalReport {
    std::map<std::string, Tally> per_qtype;
    Tally overall;
    /// cue -> qtype -> single-cue tally; empty unless requested.
    std::map<std::string, std::map<std::string, Tally>> per_cue;
    /// Sorted, so the report does not depend on question order.
    std::vector<std::string> warnings;
    bool operator==(const EvalReport&) const = default;
};

struct EvalOptions {
    std::vector<CueConfig> cues;
    ScoreNormalization normalization = ScoreNormalization::Off;
    /// Used for question types absent from the weight map.
    std::optional<FusionWeights> default_weights;
    bool per_cue_accuracy = true;
    std::size_t threads = 0;  ///< 0 = default_thread_count()
};

/// Scores every question with the cues named by its type's fusion weights,
/// fuses, decides and tallies correct answers.
EvalReport evaluate(const ModelSet& models, const std::map<std::string, FusionWeights>& weights,
                    const FeatureStore& store, const WordVectorTable& table,
                    const std::vector<QuestionInstance>& questions, const EvalOptions& options);

/// Convenience overload: one model per cue shared by all question types.
EvalReport evaluate(const std::map<std::string, CcaModel>& models,
                    const std::map<std::string, FusionWeights>& weights, const FeatureStore& store,
                    const WordVectorTable& table, const std::vector<QuestionInstance>& questions,
                    const EvalOptions& options);

struct LexiconCount {
    std::size_t answers_total = 0;
    std::size_t answers_matching = 0;
    double fraction() const
    {
        return answers_total == 0 ? 0.0 : static_cast<double>(answers_matching) / static_cast<double>(answers_total);
    }
    bool operator==(const LexiconCount&) const = default;
};

/// (qtype, lexicon name) -> counts.
using LexiconStats = std::map<std::pair<std::string, std::string>, LexiconCount>;
using Lexicons = std::map<std::string, std::set<std::string>>;

enum class AnswerScope { GoldOnly, AllCandidates };

/// An answer matches a lexicon if any of its tokens is in the word set.
LexiconStats cue_word_statistics(const std::vector<QuestionInstance>& questions, const Lexicons& lexicons,
                                 AnswerScope scope = AnswerScope::GoldOnly);

/// JSON object mapping lexicon name -> array of words; words are lowercased.
Lexicons load_lexicons(const std::string& path);

/// Concatenates the training rows of every type (in key order) and fits one model.
CcaModel train_shared_embedding(const std::map<std::string, std::pair<Eigen::MatrixXd, Eigen::MatrixXd>>& per_type,
                                const CcaParams& params);

struct TransferCellError {
    std::string train_type;
    std::string test_type;
    std::string message;
};

struct TransferReport {
    std::string cue;
    std::vector<std::string> train_types;  ///< rows, sorted
    std::vector<std::string> test_types;   ///< columns, sorted
    std::vector<std::vector<double>> accuracy;  ///< NaN where the cell failed
    std::vector<TransferCellError> errors;
};

/// Entry (i, j): single-cue full-image accuracy on test type j using the
/// model trained on type i.
TransferReport transfer_matrix(const std::map<std::string, CcaModel>& models,
                               const std::map<std::string, std::vector<QuestionInstance>>& datasets,
                               const FeatureStore& store, const WordVectorTable& table, const std::string& cue,
                               std::size_t threads = 0);

nlohmann::json report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);
nlohmann::json stats_to_json(const LexiconStats& stats);
std::string stats_to_text(const LexiconStats& stats);
nlohmann::json transfer_to_json(const TransferReport& report);
std::string transfer_to_text(const TransferReport& report);
std::string transfer_to_csv(const TransferReport& report);

} // namespace mcqa
