#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace mcqa {

/// Per-question, per-cue, per-candidate scores plus optional gold labels.
struct CueScoreTensor {
    std::vector<std::string> questions;
    std::vector<std::string> qtypes;  ///< parallel to `questions`; may be empty
    std::vector<std::string> cues;
    /// scores[q][c][j]: question q, cue c, candidate j.
    std::vector<std::vector<std::vector<double>>> scores;
    std::vector<std::optional<std::size_t>> gold;

    /// Throws DimMismatch / NonFiniteInput / BadGoldIndex on inconsistent contents.
    void check() const;
};

/// Simplex weights over an ordered cue list for one question type.
struct FusionWeights {
    std::string qtype;
    std::vector<std::string> cues;
    std::vector<double> w;

    /// Throws InvalidArgument unless entries are >= 0 and sum to 1 within 1e-9.
    void check() const;
};

enum class ScoreNormalization {
    Off,     ///< raw cosines
    ZScore,  ///< per question and cue, across candidates; constant rows become 0
};

ScoreNormalization parse_normalization(const std::string& name);
std::string normalization_name(ScoreNormalization mode);

/// Applies the normalization to one cue's candidate row.
std::vector<double> normalize_row(const std::vector<double>& row, ScoreNormalization mode);

/// fused[j] = sum_c w[c] * normalize(per_cue[c])[j]. `cues` names the rows
/// of `per_cue` and must equal weights.cues (CueOrderMismatch otherwise).
std::vector<double> fuse_scores(const FusionWeights& weights, const std::vector<std::string>& cues,
                                const std::vector<std::vector<double>>& per_cue,
                                ScoreNormalization mode = ScoreNormalization::Off);

/// Index of the maximum; ties go to the lowest index.
std::size_t decide(const std::vector<double>& fused);

struct LearnedWeights {
    FusionWeights weights;
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

/// Enumerated simplex grid for `cue_count` cues at `grid_step`, each point
/// given as integer multiples of the step. When the step divides 1 every
/// coordinate is a multiple; otherwise the last coordinate absorbs the
/// remainder 1 - sum(others).
std::vector<std::vector<std::size_t>> simplex_grid(std::size_t cue_count, double grid_step);

/// Converts an integer grid point to weights.
std::vector<double> grid_weights(const std::vector<std::size_t>& point, double grid_step);

/// Exhaustive search over simplex_grid for the weights maximizing accuracy
/// of decide(fuse_scores(...)) on the rows of `tensor` whose qtype matches
/// (all rows when tensor.qtypes is empty). Ties prefer the lexicographically
/// largest weight vector, i.e. more weight on earlier cues. The result does
/// not depend on `threads`.
LearnedWeights learn_weights(const CueScoreTensor& tensor, const std::string& qtype, double grid_step,
                             ScoreNormalization mode = ScoreNormalization::Off, std::size_t threads = 1);

nlohmann::json weights_to_json(const FusionWeights& w);
FusionWeights weights_from_json(const nlohmann::json& j);

void save_weights(const std::vector<FusionWeights>& weights, const std::string& path);
std::vector<FusionWeights> load_weights(const std::string& path);

} // namespace mcqa
