#include <gtest/gtest.h>

#include <functional>

#include "mcqa/cues.hpp"
#include "mcqa/error.hpp"
#include "test_support.hpp"

using namespace mcqa;
using mcqa::testing::naive_similarity;
using mcqa::testing::random_model;

namespace {

ErrorCode code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected mcqa::Error";
    return ErrorCode::InvalidArgument;
}

std::vector<RegionFeature> random_regions(Rng& rng, std::size_t n, Eigen::Index dim)
{
    std::vector<RegionFeature> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(RegionFeature{BBox{double(i), 0, 5, 5}, rng.normal_vector(dim)});
    return out;
}

std::vector<Eigen::VectorXd> random_candidates(Rng& rng, std::size_t n, Eigen::Index dim)
{
    std::vector<Eigen::VectorXd> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(rng.normal_vector(dim));
    return out;
}

// Written separately from select_region: a plain scan keeping the first maximum.
std::size_t linear_scan(const CcaModel& m, const std::vector<RegionFeature>& regions, const Eigen::VectorXd& q)
{
    std::size_t best = 0;
    double best_score = similarity(m, regions[0].vec, q);
    for (std::size_t i = 1; i < regions.size(); ++i) {
        const double s = similarity(m, regions[i].vec, q);
        if (s > best_score) {
            best_score = s;
            best = i;
        }
    }
    return best;
}

// Two-dimensional identity model: projections are the vectors themselves.
CcaModel identity_model()
{
    CcaModel m;
    m.k = 2;
    m.power = 1.0;
    m.reg = 0.0;
    m.mean_x = Eigen::Vector2d::Zero();
    m.mean_y = Eigen::Vector2d::Zero();
    m.basis_x = Eigen::Matrix2d::Identity();
    m.basis_y = Eigen::Matrix2d::Identity();
    m.corr = Eigen::Vector2d(1.0, 1.0);
    return m;
}

} // namespace

TEST(ScoreFullImage, IdenticalCandidatesScoreIdentically)
{
    const auto m = random_model(1, 6, 5, 3);
    Rng rng(2);
    const Eigen::VectorXd image = rng.normal_vector(6);
    const Eigen::VectorXd c = rng.normal_vector(5);
    const std::vector<Eigen::VectorXd> cands = {c, c, c};
    const auto s = score_cue_fullimage(m, image, cands);
    ASSERT_EQ(s.scores.size(), 3u);
    EXPECT_EQ(s.scores[0], s.scores[1]);
    EXPECT_EQ(s.scores[1], s.scores[2]);
    EXPECT_FALSE(s.chosen_region.has_value());
}

TEST(ScoreFullImage, MatchingProjectionScoresOne)
{
    // With k = dim_y the text projection is invertible, so a candidate can be
    // built whose projection equals the image projection.
    const auto m = random_model(3, 6, 4, 4);
    Rng rng(4);
    const Eigen::VectorXd image = rng.normal_vector(6);
    const Eigen::VectorXd target = project_x(m, image);
    const Eigen::VectorXd w = m.coordinate_weights();
    const Eigen::VectorXd coords = target.cwiseQuotient(w);
    const Eigen::VectorXd gold = m.mean_y + m.basis_y.transpose().fullPivLu().solve(coords);
    ASSERT_LT((project_y(m, gold) - target).norm(), 1e-9 * target.norm());

    std::vector<Eigen::VectorXd> cands = random_candidates(rng, 3, 4);
    cands.insert(cands.begin() + 1, gold);
    const auto s = score_cue_fullimage(m, image, cands);
    EXPECT_NEAR(s.scores[1], 1.0, 1e-12);
    for (std::size_t i = 0; i < s.scores.size(); ++i)
        EXPECT_LE(s.scores[i], s.scores[1]);
}

TEST(ScoreFullImage, MatchesNaiveLoop)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = random_model(seed, 7, 5, 3);
        Rng rng(100 + seed);
        const Eigen::VectorXd image = rng.normal_vector(7);
        const auto cands = random_candidates(rng, 4, 5);
        const auto s = score_cue_fullimage(m, image, cands);
        ASSERT_EQ(s.scores.size(), 4u);
        for (std::size_t i = 0; i < 4; ++i) {
            EXPECT_NEAR(s.scores[i], naive_similarity(m, image, cands[i]), 1e-12);
            EXPECT_GE(s.scores[i], -1.0);
            EXPECT_LE(s.scores[i], 1.0);
        }
    }
}

TEST(ScoreFullImage, DegenerateCandidateScoresZero)
{
    const auto m = identity_model();
    std::vector<CandidateEmbedding> cands = {Eigen::VectorXd(Eigen::Vector2d(1, 0)), std::nullopt,
                                             Eigen::VectorXd(Eigen::Vector2d(0, 0))};
    const auto s = score_cue_fullimage(m, Eigen::Vector2d(1, 0), cands);
    EXPECT_EQ(s.scores, (std::vector<double>{1.0, 0.0, 0.0}));
    EXPECT_EQ(s.degenerate_candidates, (std::vector<std::size_t>{1, 2}));
}

TEST(ScoreFullImage, Errors)
{
    const auto m = identity_model();
    const std::vector<Eigen::VectorXd> good = {Eigen::Vector2d(1, 0)};
    const std::vector<Eigen::VectorXd> bad = {Eigen::Vector3d(1, 0, 0)};
    EXPECT_EQ(code_of([&] { score_cue_fullimage(m, Eigen::Vector3d(1, 0, 0), good); }), ErrorCode::DimMismatch);
    EXPECT_EQ(code_of([&] { score_cue_fullimage(m, Eigen::Vector2d(1, 0), bad); }), ErrorCode::DimMismatch);
    EXPECT_EQ(code_of([&] { score_cue_fullimage(m, Eigen::Vector2d(0, 0), good); }), ErrorCode::ZeroProjection);
    EXPECT_EQ(code_of([&] { score_cue_fullimage(m, Eigen::Vector2d(1, 0), std::vector<Eigen::VectorXd>{}); }),
              ErrorCode::EmptyCandidates);
}

TEST(SelectRegion, SingleRegion)
{
    const auto m = random_model(5, 6, 5, 3);
    Rng rng(6);
    const auto regions = random_regions(rng, 1, 6);
    const Eigen::VectorXd q = rng.normal_vector(5);
    const auto choice = select_region(m, regions, q);
    EXPECT_EQ(choice.index, 0u);
    EXPECT_EQ(choice.score, similarity(m, regions[0].vec, q));
}

TEST(SelectRegion, TiesGoToLowestIndex)
{
    const auto m = identity_model();
    const std::vector<RegionFeature> regions = {{BBox{}, Eigen::Vector2d(0, 1)},
                                                {BBox{}, Eigen::Vector2d(1, 1)},
                                                {BBox{}, Eigen::Vector2d(2, 2)}};
    EXPECT_EQ(select_region(m, regions, Eigen::Vector2d(1, 1)).index, 1u);
    const std::vector<RegionFeature> equal = {{BBox{}, Eigen::Vector2d(3, 1)}, {BBox{}, Eigen::Vector2d(3, 1)}};
    EXPECT_EQ(select_region(m, equal, Eigen::Vector2d(0, 1)).index, 0u);
}

TEST(SelectRegion, MatchesLinearScan)
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto m = random_model(seed, 8, 6, 4);
        Rng rng(1000 + seed);
        const auto regions = random_regions(rng, 10, 8);
        const Eigen::VectorXd q = rng.normal_vector(6);
        const auto choice = select_region(m, regions, q);
        const std::size_t expected = linear_scan(m, regions, q);
        EXPECT_EQ(choice.index, expected);
        EXPECT_EQ(choice.score, similarity(m, regions[expected].vec, q));
    }
}

TEST(SelectRegion, SkipsDegenerateRegionsAndRejectsBadInput)
{
    const auto m = identity_model();
    const std::vector<RegionFeature> regions = {{BBox{}, Eigen::Vector2d(0, 0)}, {BBox{}, Eigen::Vector2d(-1, 0)}};
    const auto choice = select_region(m, regions, Eigen::Vector2d(1, 0));
    EXPECT_EQ(choice.index, 1u);
    EXPECT_EQ(choice.score, -1.0);
    EXPECT_EQ(code_of([&] { select_region(m, {}, Eigen::Vector2d(1, 0)); }), ErrorCode::EmptyRegionList);
    EXPECT_EQ(code_of([&] { select_region(m, regions, Eigen::Vector2d(0, 0)); }), ErrorCode::ZeroProjection);
    const std::vector<RegionFeature> zeros = {{BBox{}, Eigen::Vector2d(0, 0)}};
    EXPECT_EQ(code_of([&] { select_region(m, zeros, Eigen::Vector2d(1, 0)); }), ErrorCode::ZeroProjection);
}

TEST(SelectRegion, PermutationInvariant)
{
    const auto m = random_model(9, 6, 5, 3);
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const auto regions = random_regions(rng, 8, 6);
        const Eigen::VectorXd q = rng.normal_vector(5);
        const auto base = select_region(m, regions, q);
        for (int p = 0; p < 5; ++p) {
            const auto perm = rng.permutation(regions.size());
            std::vector<RegionFeature> shuffled;
            for (auto i : perm)
                shuffled.push_back(regions[i]);
            const auto c = select_region(m, shuffled, q);
            EXPECT_EQ(perm[c.index], base.index);
            EXPECT_EQ(c.score, base.score);
            EXPECT_EQ(shuffled[c.index].bbox, regions[base.index].bbox);
            EXPECT_EQ(shuffled[c.index].vec, regions[base.index].vec);
        }
    }
}

TEST(ScoreRegion, SingleRegionEqualsFullImage)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = random_model(seed, 6, 5, 3);
        Rng rng(20 + seed);
        const auto regions = random_regions(rng, 1, 6);
        const auto cands = random_candidates(rng, 4, 5);
        const auto r = score_cue_region(m, regions, rng.normal_vector(5), cands);
        const auto f = score_cue_fullimage(m, regions[0].vec, cands);
        EXPECT_EQ(r.scores, f.scores);
        EXPECT_EQ(r.chosen_region, std::optional<std::size_t>(0));
    }
}

TEST(ScoreRegion, PlantedRegionIsChosen)
{
    const auto m = identity_model();
    std::vector<RegionFeature> regions;
    for (int i = 0; i < 6; ++i)
        regions.push_back({BBox{double(i), 0, 1, 1}, Eigen::Vector2d(0, 1.0 + i)});
    regions[4].vec = Eigen::Vector2d(3, 0);
    const std::vector<Eigen::VectorXd> cands = {Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 0)};
    const auto s = score_cue_region(m, regions, Eigen::Vector2d(2, 0), cands);
    EXPECT_EQ(s.chosen_region, std::optional<std::size_t>(4));
    EXPECT_EQ(s.scores, (std::vector<double>{0.0, 1.0}));
}

TEST(ScoreRegion, MatchesCompositionOracle)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto m = random_model(seed, 8, 6, 4);
        Rng rng(500 + seed);
        const auto regions = random_regions(rng, 7, 8);
        const Eigen::VectorXd q = rng.normal_vector(6);
        const auto cands = random_candidates(rng, 4, 6);
        const auto s = score_cue_region(m, regions, q, cands);

        std::size_t best = 0;
        for (std::size_t i = 1; i < regions.size(); ++i)
            if (naive_similarity(m, regions[i].vec, q) > naive_similarity(m, regions[best].vec, q))
                best = i;
        ASSERT_EQ(s.chosen_region, std::optional<std::size_t>(best));
        for (std::size_t j = 0; j < cands.size(); ++j)
            EXPECT_NEAR(s.scores[j], naive_similarity(m, regions[best].vec, cands[j]), 1e-12);
    }
}

TEST(ScoreRegion, TopMPoolsRegionVectors)
{
    const auto m = random_model(31, 6, 5, 3);
    Rng rng(32);
    const auto regions = random_regions(rng, 5, 6);
    const Eigen::VectorXd q = rng.normal_vector(5);
    const auto cands = random_candidates(rng, 3, 5);
    const auto order = rank_regions(region_scores(m, regions, q));
    ASSERT_EQ(order.size(), 5u);
    for (std::size_t i = 1; i < order.size(); ++i)
        EXPECT_GE(similarity(m, regions[order[i - 1]].vec, q), similarity(m, regions[order[i]].vec, q));

    const Eigen::VectorXd pooled = (regions[order[0]].vec + regions[order[1]].vec) / 2.0;
    const auto s = score_cue_region(m, regions, q, cands, RegionPolicy{2});
    EXPECT_EQ(s.chosen_region, std::optional<std::size_t>(order[0]));
    for (std::size_t j = 0; j < cands.size(); ++j)
        EXPECT_NEAR(s.scores[j], naive_similarity(m, pooled, cands[j]), 1e-12);

    // m larger than the region count pools every region.
    Eigen::VectorXd all = Eigen::VectorXd::Zero(6);
    for (const auto& r : regions)
        all += r.vec;
    all /= 5.0;
    const auto s_all = score_cue_region(m, regions, q, cands, RegionPolicy{50});
    for (std::size_t j = 0; j < cands.size(); ++j)
        EXPECT_NEAR(s_all.scores[j], naive_similarity(m, all, cands[j]), 1e-12);
}

TEST(ScoreRegion, PerCandidateSelection)
{
    const auto m = random_model(41, 6, 5, 3);
    Rng rng(42);
    const auto regions = random_regions(rng, 6, 6);
    const auto cands = random_candidates(rng, 4, 5);
    std::vector<CandidateEmbedding> wrapped(cands.begin(), cands.end());
    const auto s = score_cue_region_per_candidate(m, regions, wrapped);
    EXPECT_FALSE(s.chosen_region.has_value());
    ASSERT_EQ(s.candidate_regions.size(), 4u);
    for (std::size_t j = 0; j < cands.size(); ++j) {
        const std::size_t r = linear_scan(m, regions, cands[j]);
        EXPECT_EQ(s.candidate_regions[j], r);
        EXPECT_EQ(s.scores[j], similarity(m, regions[r].vec, cands[j]));
    }
}
