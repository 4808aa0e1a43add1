#include "mcqa/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "mcqa/byte_io.hpp"
#include "mcqa/error.hpp"
#include "mcqa/parallel.hpp"

namespace mcqa {

using nlohmann::json;

namespace {

constexpr double kSimplexTol = 1e-9;

struct GridSpec {
    std::size_t units = 0;   // floor(1 / step)
    bool divides = false;    // step * units == 1 within tolerance
};

GridSpec grid_spec(double step)
{
    if (!std::isfinite(step) || !(step > 0.0) || step > 1.0)
        throw Error(ErrorCode::BadGridStep, "grid_step must lie in (0, 1], got " + std::to_string(step));
    GridSpec g;
    g.units = static_cast<std::size_t>(std::floor(1.0 / step + kSimplexTol));
    g.divides = std::abs(static_cast<double>(g.units) * step - 1.0) <= kSimplexTol;
    return g;
}

std::vector<double> fuse_normalized(const std::vector<double>& w,
                                    const std::vector<std::vector<double>>& rows)
{
    std::vector<double> fused(rows.front().size(), 0.0);
    for (std::size_t c = 0; c < rows.size(); ++c)
        for (std::size_t j = 0; j < fused.size(); ++j)
            fused[j] += w[c] * rows[c][j];
    return fused;
}

void check_rows(const std::vector<std::vector<double>>& rows, std::size_t cue_count)
{
    if (rows.size() != cue_count)
        throw Error(ErrorCode::DimMismatch, "expected " + std::to_string(cue_count) + " cue rows, got " +
                                                std::to_string(rows.size()));
    if (rows.empty() || rows.front().empty())
        throw Error(ErrorCode::EmptyCandidates, "no candidate scores");
    for (const auto& r : rows) {
        if (r.size() != rows.front().size())
            throw Error(ErrorCode::DimMismatch, "cue rows differ in candidate count");
        for (double v : r)
            if (!std::isfinite(v))
                throw Error(ErrorCode::NonFiniteInput, "non-finite cue score");
    }
}

} // namespace

void CueScoreTensor::check() const
{
    if (scores.size() != questions.size() || gold.size() != questions.size() ||
        (!qtypes.empty() && qtypes.size() != questions.size()))
        throw Error(ErrorCode::DimMismatch, "tensor fields disagree on question count");
    for (std::size_t q = 0; q < scores.size(); ++q) {
        check_rows(scores[q], cues.size());
        if (gold[q] && *gold[q] >= scores[q].front().size())
            throw Error(ErrorCode::BadGoldIndex, "gold index out of range for question " + questions[q]);
    }
}

void FusionWeights::check() const
{
    if (cues.empty() || cues.size() != w.size())
        throw Error(ErrorCode::InvalidArgument, "fusion weights need one weight per cue");
    double sum = 0.0;
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw Error(ErrorCode::InvalidArgument, "fusion weights must be finite and nonnegative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTol)
        throw Error(ErrorCode::InvalidArgument, "fusion weights must sum to 1");
}

ScoreNormalization parse_normalization(const std::string& name)
{
    if (name == "off")
        return ScoreNormalization::Off;
    if (name == "zscore")
        return ScoreNormalization::ZScore;
    throw Error(ErrorCode::InvalidArgument, "unknown normalization '" + name + "' (off | zscore)");
}

std::string normalization_name(ScoreNormalization mode)
{
    return mode == ScoreNormalization::ZScore ? "zscore" : "off";
}

std::vector<double> normalize_row(const std::vector<double>& row, ScoreNormalization mode)
{
    if (mode == ScoreNormalization::Off || row.empty())
        return row;
    const double n = static_cast<double>(row.size());
    double mean = 0.0;
    double scale = 1.0;
    for (double v : row) {
        mean += v;
        scale = std::max(scale, std::abs(v));
    }
    mean /= n;
    double var = 0.0;
    for (double v : row)
        var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    std::vector<double> out(row.size(), 0.0);
    if (sd <= 1e-12 * scale)
        return out;
    for (std::size_t j = 0; j < row.size(); ++j)
        out[j] = (row[j] - mean) / sd;
    return out;
}

std::vector<double> fuse_scores(const FusionWeights& weights, const std::vector<std::string>& cues,
                                const std::vector<std::vector<double>>& per_cue, ScoreNormalization mode)
{
    weights.check();
    if (cues != weights.cues)
        throw Error(ErrorCode::CueOrderMismatch, "score rows are not in the weights' cue order");
    check_rows(per_cue, weights.cues.size());
    std::vector<std::vector<double>> rows;
    rows.reserve(per_cue.size());
    for (const auto& r : per_cue)
        rows.push_back(normalize_row(r, mode));
    return fuse_normalized(weights.w, rows);
}

std::size_t decide(const std::vector<double>& fused)
{
    if (fused.empty())
        throw Error(ErrorCode::EmptyCandidates, "no candidates to decide between");
    std::size_t best = 0;
    for (std::size_t j = 0; j < fused.size(); ++j) {
        if (!std::isfinite(fused[j]))
            throw Error(ErrorCode::NonFiniteInput, "non-finite fused score");
        if (fused[j] > fused[best])
            best = j;
    }
    return best;
}

std::vector<std::vector<std::size_t>> simplex_grid(std::size_t cue_count, double grid_step)
{
    const GridSpec spec = grid_spec(grid_step);
    if (cue_count == 0)
        throw Error(ErrorCode::InvalidArgument, "need at least one cue");

    // Lexicographically descending over the free coordinates a_0..a_{C-2};
    // the last coordinate holds the remaining units.
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> point(cue_count, 0);
    auto recurse = [&](auto&& self, std::size_t pos, std::size_t left) -> void {
        if (pos + 1 == cue_count) {
            point[pos] = left;
            out.push_back(point);
            return;
        }
        for (std::size_t a = left + 1; a-- > 0;) {
            point[pos] = a;
            self(self, pos + 1, left - a);
        }
    };
    recurse(recurse, 0, spec.units);
    return out;
}

std::vector<double> grid_weights(const std::vector<std::size_t>& point, double grid_step)
{
    const GridSpec spec = grid_spec(grid_step);
    std::vector<double> w(point.size(), 0.0);
    if (spec.divides) {
        for (std::size_t i = 0; i < point.size(); ++i)
            w[i] = static_cast<double>(point[i]) / static_cast<double>(spec.units);
        return w;
    }
    double used = 0.0;
    for (std::size_t i = 0; i + 1 < point.size(); ++i) {
        w[i] = static_cast<double>(point[i]) * grid_step;
        used += w[i];
    }
    w.back() = std::max(0.0, 1.0 - used);
    return w;
}

LearnedWeights learn_weights(const CueScoreTensor& tensor, const std::string& qtype, double grid_step,
                             ScoreNormalization mode, std::size_t threads)
{
    tensor.check();
    if (tensor.cues.empty())
        throw Error(ErrorCode::InvalidArgument, "tensor has no cues");
    const auto grid = simplex_grid(tensor.cues.size(), grid_step);

    std::vector<std::vector<std::vector<double>>> rows;
    std::vector<std::size_t> gold;
    for (std::size_t q = 0; q < tensor.questions.size(); ++q) {
        if (!tensor.qtypes.empty() && tensor.qtypes[q] != qtype)
            continue;
        if (!tensor.gold[q])
            throw Error(ErrorCode::MissingGold, "question " + tensor.questions[q] + " has no gold index");
        std::vector<std::vector<double>> normalized;
        for (const auto& r : tensor.scores[q])
            normalized.push_back(normalize_row(r, mode));
        rows.push_back(std::move(normalized));
        gold.push_back(*tensor.gold[q]);
    }
    if (rows.empty())
        throw Error(ErrorCode::MissingGold, "no labelled validation rows for qtype '" + qtype + "'");

    std::vector<std::size_t> correct(grid.size(), 0);
    parallel_for(grid.size(), threads, [&](std::size_t g) {
        const auto w = grid_weights(grid[g], grid_step);
        std::size_t hits = 0;
        for (std::size_t q = 0; q < rows.size(); ++q)
            hits += decide(fuse_normalized(w, rows[q])) == gold[q] ? 1 : 0;
        correct[g] = hits;
    });

    // Grid is in descending lexicographic order, so the first strict maximum
    // carries the tie-break preference.
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g)
        if (correct[g] > correct[best])
            best = g;

    LearnedWeights out;
    out.weights = FusionWeights{qtype, tensor.cues, grid_weights(grid[best], grid_step)};
    out.correct = correct[best];
    out.total = rows.size();
    return out;
}

json weights_to_json(const FusionWeights& w)
{
    return json{{"qtype", w.qtype}, {"cues", w.cues}, {"w", w.w}};
}

FusionWeights weights_from_json(const json& j)
{
    FusionWeights w;
    try {
        w.qtype = j.at("qtype").get<std::string>();
        w.cues = j.at("cues").get<std::vector<std::string>>();
        w.w = j.at("w").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("fusion weights: ") + e.what());
    }
    w.check();
    return w;
}

void save_weights(const std::vector<FusionWeights>& weights, const std::string& path)
{
    json arr = json::array();
    for (const auto& w : weights)
        arr.push_back(weights_to_json(w));
    byte_io::write_text_file(path, arr.dump(2) + "\n");
}

std::vector<FusionWeights> load_weights(const std::string& path)
{
    json j;
    try {
        j = json::parse(byte_io::read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    std::vector<FusionWeights> out;
    if (j.is_array()) {
        for (const auto& item : j)
            out.push_back(weights_from_json(item));
    } else {
        out.push_back(weights_from_json(j));
    }
    return out;
}

} // namespace mcqa
