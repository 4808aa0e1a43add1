#include "mcqa/cues.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mcqa/error.hpp"

namespace mcqa {

namespace {

std::vector<CandidateEmbedding> wrap(std::span<const Eigen::VectorXd> candidates)
{
    return {candidates.begin(), candidates.end()};
}

void require_candidates(std::span<const CandidateEmbedding> candidates)
{
    if (candidates.empty())
        throw Error(ErrorCode::EmptyCandidates, "no candidates to score");
}

void require_regions(std::span<const RegionFeature> regions)
{
    if (regions.empty())
        throw Error(ErrorCode::EmptyRegionList, "no regions to select from");
}

// Scores every candidate against one fixed projected visual vector.
CueScores score_against(const CcaModel& model, const Eigen::VectorXd& projected_visual,
                        std::span<const CandidateEmbedding> candidates)
{
    CueScores out;
    out.scores.assign(candidates.size(), 0.0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!candidates[i]) {
            out.degenerate_candidates.push_back(i);
            continue;
        }
        const Eigen::VectorXd py = project_y(model, *candidates[i]);
        try {
            out.scores[i] = projected_cosine(projected_visual, py);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroProjection)
                throw;
            out.degenerate_candidates.push_back(i);
        }
    }
    return out;
}

Eigen::VectorXd require_nonzero(Eigen::VectorXd v, const char* what)
{
    if (v.norm() < 1e-12)
        throw Error(ErrorCode::ZeroProjection, std::string(what) + " projects to zero");
    return v;
}

// Visual vector a candidate set is scored against: the best region, or the
// mean of the top-m regions.
Eigen::VectorXd pooled_visual(std::span<const RegionFeature> regions, const std::vector<double>& scores,
                              const RegionPolicy& policy)
{
    const auto ranked = rank_regions(scores);
    if (ranked.empty())
        throw Error(ErrorCode::ZeroProjection, "every region projects to zero");
    const std::size_t m = std::clamp<std::size_t>(policy.top_m, 1, ranked.size());
    Eigen::VectorXd sum = regions[ranked[0]].vec;
    for (std::size_t i = 1; i < m; ++i)
        sum += regions[ranked[i]].vec;
    if (m > 1)
        sum /= static_cast<double>(m);
    return sum;
}

} // namespace

CueScores score_cue_fullimage(const CcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& image_vec,
                              std::span<const CandidateEmbedding> candidates)
{
    require_candidates(candidates);
    const Eigen::VectorXd px = require_nonzero(project_x(model, image_vec), "image vector");
    return score_against(model, px, candidates);
}

CueScores score_cue_fullimage(const CcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& image_vec,
                              std::span<const Eigen::VectorXd> candidates)
{
    const auto wrapped = wrap(candidates);
    return score_cue_fullimage(model, image_vec, std::span<const CandidateEmbedding>(wrapped));
}

std::vector<double> region_scores(const CcaModel& model, std::span<const RegionFeature> regions,
                                  const Eigen::Ref<const Eigen::VectorXd>& query)
{
    require_regions(regions);
    const Eigen::VectorXd py = require_nonzero(project_y(model, query), "region query");
    std::vector<double> scores(regions.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const Eigen::VectorXd px = project_x(model, regions[i].vec);
        if (px.norm() < 1e-12)
            continue;
        scores[i] = projected_cosine(px, py);
    }
    return scores;
}

std::vector<std::size_t> rank_regions(const std::vector<double>& scores)
{
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (!std::isnan(scores[i]))
            order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

RegionChoice select_region(const CcaModel& model, std::span<const RegionFeature> regions,
                           const Eigen::Ref<const Eigen::VectorXd>& query)
{
    const auto scores = region_scores(model, regions, query);
    std::optional<RegionChoice> best;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (std::isnan(scores[i]))
            continue;
        if (!best || scores[i] > best->score)
            best = RegionChoice{i, scores[i]};
    }
    if (!best)
        throw Error(ErrorCode::ZeroProjection, "every region projects to zero");
    return *best;
}

CueScores score_cue_region(const CcaModel& model, std::span<const RegionFeature> regions,
                           const Eigen::Ref<const Eigen::VectorXd>& query,
                           std::span<const CandidateEmbedding> candidates, const RegionPolicy& policy)
{
    require_candidates(candidates);
    const auto scores = region_scores(model, regions, query);
    const auto ranked = rank_regions(scores);
    if (ranked.empty())
        throw Error(ErrorCode::ZeroProjection, "every region projects to zero");
    const Eigen::VectorXd visual = pooled_visual(regions, scores, policy);
    CueScores out = score_against(model, require_nonzero(project_x(model, visual), "pooled region"),
                                  candidates);
    out.chosen_region = ranked.front();
    return out;
}

CueScores score_cue_region(const CcaModel& model, std::span<const RegionFeature> regions,
                           const Eigen::Ref<const Eigen::VectorXd>& query,
                           std::span<const Eigen::VectorXd> candidates, const RegionPolicy& policy)
{
    const auto wrapped = wrap(candidates);
    return score_cue_region(model, regions, query, std::span<const CandidateEmbedding>(wrapped), policy);
}

CueScores score_cue_region_per_candidate(const CcaModel& model, std::span<const RegionFeature> regions,
                                         std::span<const CandidateEmbedding> candidates,
                                         const RegionPolicy& policy)
{
    require_candidates(candidates);
    require_regions(regions);
    CueScores out;
    out.scores.assign(candidates.size(), 0.0);
    out.candidate_regions.assign(candidates.size(), 0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!candidates[i]) {
            out.degenerate_candidates.push_back(i);
            continue;
        }
        try {
            const auto scores = region_scores(model, regions, *candidates[i]);
            const auto ranked = rank_regions(scores);
            if (ranked.empty())
                throw Error(ErrorCode::ZeroProjection, "every region projects to zero");
            out.candidate_regions[i] = ranked.front();
            const Eigen::VectorXd visual = pooled_visual(regions, scores, policy);
            out.scores[i] = similarity(model, visual, *candidates[i]);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroProjection)
                throw;
            out.degenerate_candidates.push_back(i);
        }
    }
    return out;
}

} // namespace mcqa
