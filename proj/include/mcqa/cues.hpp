#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcqa/cca.hpp"
#include "mcqa/dataset.hpp"

namespace mcqa {

/// A candidate's text embedding, or nullopt when its text could not be embedded.
using CandidateEmbedding = std::optional<Eigen::VectorXd>;

struct CueScores {
    std::string question_id;
    std::string cue;
    std::vector<double> scores;  ///< one per candidate, each in [-1, 1]
    std::optional<std::size_t> chosen_region;
    /// Per-candidate region choice, filled only in per-candidate selection mode.
    std::vector<std::size_t> candidate_regions;
    /// Candidates that scored 0 because they had no embedding or projected to zero.
    std::vector<std::size_t> degenerate_candidates;
};

enum class SelectionMode {
    PerQuestion,   ///< one region per question, chosen by the prompt embedding
    PerCandidate,  ///< each candidate selects its own region
};

/// top_m == 1 scores against the single best region; larger values score
/// against the mean vector of the top_m regions (clipped to the region count).
struct RegionPolicy {
    std::size_t top_m = 1;
};

struct RegionChoice {
    std::size_t index = 0;
    double score = 0.0;
};

CueScores score_cue_fullimage(const CcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& image_vec,
                              std::span<const CandidateEmbedding> candidates);
CueScores score_cue_fullimage(const CcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& image_vec,
                              std::span<const Eigen::VectorXd> candidates);

/// Arg-max region under similarity against the query; ties go to the lowest
/// index. Regions whose projection is degenerate are never selected.
RegionChoice select_region(const CcaModel& model, std::span<const RegionFeature> regions,
                           const Eigen::Ref<const Eigen::VectorXd>& query);

/// Similarity of every region against the query (NaN for degenerate regions).
std::vector<double> region_scores(const CcaModel& model, std::span<const RegionFeature> regions,
                                  const Eigen::Ref<const Eigen::VectorXd>& query);

/// Region indices ordered by descending score, ties by index, degenerate regions dropped.
std::vector<std::size_t> rank_regions(const std::vector<double>& scores);

CueScores score_cue_region(const CcaModel& model, std::span<const RegionFeature> regions,
                           const Eigen::Ref<const Eigen::VectorXd>& query,
                           std::span<const CandidateEmbedding> candidates,
                           const RegionPolicy& policy = {});
CueScores score_cue_region(const CcaModel& model, std::span<const RegionFeature> regions,
                           const Eigen::Ref<const Eigen::VectorXd>& query,
                           std::span<const Eigen::VectorXd> candidates,
                           const RegionPolicy& policy = {});

/// Each candidate acts as its own region query; chosen_region stays empty
/// and candidate_regions records each candidate's top region.
CueScores score_cue_region_per_candidate(const CcaModel& model, std::span<const RegionFeature> regions,
                                         std::span<const CandidateEmbedding> candidates,
                                         const RegionPolicy& policy = {});

} // namespace mcqa
