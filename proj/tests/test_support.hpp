#pragma once

// Shared helpers for the test binaries: data generators and independent
// reference computations that do not reuse the library's numeric paths.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "mcqa/cca.hpp"
#include "mcqa/dataset.hpp"
#include "mcqa/pipeline.hpp"
#include "mcqa/synthetic.hpp"

namespace mcqa::testing {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("mcqa_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Plain-loop Pearson correlation.
inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        ma += a(i);
        mb += b(i);
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        sab += (a(i) - ma) * (b(i) - mb);
        saa += (a(i) - ma) * (a(i) - ma);
        sbb += (b(i) - mb) * (b(i) - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

/// Maximum correlation of X u and Y v over unit directions u, v in 2-D,
/// searched on a 0.5 degree angle grid over [0, 180) for each side.
inline double angle_grid_max_correlation(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y)
{
    // Sufficient statistics accumulated by hand.
    const double n = static_cast<double>(X.rows());
    double mx[2] = {0, 0}, my[2] = {0, 0};
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (int d = 0; d < 2; ++d) {
            mx[d] += X(i, d) / n;
            my[d] += Y(i, d) / n;
        }
    double sxx[2][2] = {}, syy[2][2] = {}, sxy[2][2] = {};
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                sxx[a][b] += (X(i, a) - mx[a]) * (X(i, b) - mx[b]);
                syy[a][b] += (Y(i, a) - my[a]) * (Y(i, b) - my[b]);
                sxy[a][b] += (X(i, a) - mx[a]) * (Y(i, b) - my[b]);
            }
    double best = -2.0;
    for (int ia = 0; ia < 360; ++ia) {
        const double ta = ia * 0.5 * std::numbers::pi / 180.0;
        const double u[2] = {std::cos(ta), std::sin(ta)};
        double vu = 0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                vu += u[a] * sxx[a][b] * u[b];
        for (int ib = 0; ib < 360; ++ib) {
            const double tb = ib * 0.5 * std::numbers::pi / 180.0;
            const double v[2] = {std::cos(tb), std::sin(tb)};
            double vv = 0, cov = 0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    vv += v[a] * syy[a][b] * v[b];
                    cov += u[a] * sxy[a][b] * v[b];
                }
            // Flipping v covers the other half circle.
            best = std::max(best, std::abs(cov) / std::sqrt(vu * vv));
        }
    }
    return best;
}

/// X = (z, e1), Y = (z, e2) with independent standard normals.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> latent_pair_2d(std::uint64_t seed, Eigen::Index n)
{
    Rng rng(seed);
    Eigen::MatrixXd X(n, 2), Y(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double z = rng.normal();
        X(i, 0) = z;
        X(i, 1) = rng.normal();
        Y(i, 0) = z;
        Y(i, 1) = rng.normal();
    }
    return {X, Y};
}

/// X = A z + noise * e, Y = B z + noise * e' with latent z ~ N(0, I).
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> latent_views(Rng& rng, const Eigen::MatrixXd& A,
                                                                 const Eigen::MatrixXd& B, Eigen::Index n,
                                                                 double noise)
{
    const Eigen::MatrixXd Z = rng.normal_matrix(n, A.cols());
    Eigen::MatrixXd X = Z * A.transpose() + noise * rng.normal_matrix(n, A.rows());
    Eigen::MatrixXd Y = Z * B.transpose() + noise * rng.normal_matrix(n, B.rows());
    return {X, Y};
}

/// Population covariance of the columns of M, computed with plain loops.
inline Eigen::MatrixXd covariance(const Eigen::MatrixXd& M)
{
    const Eigen::Index n = M.rows();
    const Eigen::Index d = M.cols();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            mean(j) += M(i, j);
    mean /= static_cast<double>(n);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index a = 0; a < d; ++a)
            for (Eigen::Index b = 0; b < d; ++b)
                c(a, b) += (M(i, a) - mean(a)) * (M(i, b) - mean(b));
    return c / static_cast<double>(n);
}

/// Similarity recomputed with plain loops from the stored model fields.
inline double naive_similarity(const CcaModel& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
    double dot = 0, nx = 0, ny = 0;
    for (Eigen::Index c = 0; c < m.basis_x.cols(); ++c) {
        const double w = std::pow(m.corr(c), m.power);
        double px = 0, py = 0;
        for (Eigen::Index d = 0; d < m.basis_x.rows(); ++d)
            px += m.basis_x(d, c) * (x(d) - m.mean_x(d));
        for (Eigen::Index d = 0; d < m.basis_y.rows(); ++d)
            py += m.basis_y(d, c) * (y(d) - m.mean_y(d));
        px *= w;
        py *= w;
        dot += px * py;
        nx += px * px;
        ny += py * py;
    }
    return dot / std::sqrt(nx * ny);
}

/// Model fitted on a random latent pair, used where the exact values do not matter.
inline CcaModel random_model(std::uint64_t seed, Eigen::Index dx, Eigen::Index dy, std::uint32_t k,
                             Eigen::Index latent = 4)
{
    Rng rng(seed);
    const Eigen::MatrixXd A = rng.normal_matrix(dx, latent);
    const Eigen::MatrixXd B = rng.normal_matrix(dy, latent);
    auto [X, Y] = latent_views(rng, A, B, 400, 0.5);
    CcaParams p;
    p.k = k;
    return fit_cca(X, Y, p);
}

/// A region-selection instance: `regions` visual vectors of which index
/// `planted` shares the query's latent, the rest use fresh latents.
struct PlantedInstance {
    std::vector<RegionFeature> regions;
    Eigen::VectorXd query;
    std::size_t planted = 0;
};

struct PlantedGenerator {
    Eigen::MatrixXd A;  ///< visual loading
    Eigen::MatrixXd B;  ///< text loading
    double noise = 0.2; ///< relative to the loading rms

    PlantedGenerator(Rng& rng, Eigen::Index dx, Eigen::Index dy, Eigen::Index latent, double sigma)
        : A(rng.normal_matrix(dx, latent)), B(rng.normal_matrix(dy, latent)), noise(sigma)
    {
    }

    Eigen::VectorXd visual(Rng& rng, const Eigen::VectorXd& z) const
    {
        return A * z + noise * loading_rms(A) * rng.normal_vector(A.rows());
    }
    Eigen::VectorXd text(Rng& rng, const Eigen::VectorXd& z) const
    {
        return B * z + noise * loading_rms(B) * rng.normal_vector(B.rows());
    }

    /// Paired training rows for fitting the embedding.
    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> training(Rng& rng, Eigen::Index n) const
    {
        Eigen::MatrixXd X(n, A.rows()), Y(n, B.rows());
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::VectorXd z = rng.normal_vector(A.cols());
            X.row(i) = visual(rng, z).transpose();
            Y.row(i) = text(rng, z).transpose();
        }
        return {X, Y};
    }

    PlantedInstance instance(Rng& rng, std::size_t regions) const
    {
        PlantedInstance out;
        const Eigen::VectorXd z = rng.normal_vector(A.cols());
        out.query = text(rng, z);
        out.planted = rng.index(regions);
        for (std::size_t r = 0; r < regions; ++r) {
            const Eigen::VectorXd zr = r == out.planted ? z : Eigen::VectorXd(rng.normal_vector(A.cols()));
            out.regions.push_back(RegionFeature{BBox{double(10 * r), 0, 10, 10}, visual(rng, zr)});
        }
        return out;
    }
};

/// One question type whose text and every visual cue load on the latent
/// columns [first, first + count); other columns carry no signal.
inline SyntheticType latent_type(Rng& rng, const std::string& qtype, Eigen::Index text_dim, Eigen::Index latent,
                                 const std::vector<SyntheticCue>& cues, Eigen::Index first, Eigen::Index count)
{
    auto masked = [&](Eigen::Index rows) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, latent);
        m.middleCols(first, count) = rng.normal_matrix(rows, count);
        return m;
    };
    SyntheticType t;
    t.qtype = qtype;
    t.text_loading = masked(text_dim);
    for (const auto& cue : cues)
        t.visual_loading[cue.name] = masked(static_cast<Eigen::Index>(cue.dim));
    return t;
}

/// Question types over a latent of width * names.size() coordinates. Every
/// type loads on all coordinates in both views, but only its own block
/// [t * width, (t + 1) * width) is shared between image and text; the other
/// blocks are redrawn per view, so they carry variance without signal.
inline std::vector<SyntheticType> disjoint_types(Rng& rng, const std::vector<std::string>& names,
                                                 Eigen::Index text_dim, const std::vector<SyntheticCue>& cues,
                                                 Eigen::Index width)
{
    const Eigen::Index latent = width * static_cast<Eigen::Index>(names.size());
    const Eigen::MatrixXd B = rng.normal_matrix(text_dim, latent);
    std::map<std::string, Eigen::MatrixXd> A;
    for (const auto& cue : cues)
        A[cue.name] = rng.normal_matrix(static_cast<Eigen::Index>(cue.dim), latent);
    std::vector<SyntheticType> out;
    for (std::size_t t = 0; t < names.size(); ++t) {
        SyntheticType type;
        type.qtype = names[t];
        type.text_loading = B;
        type.visual_loading = A;
        for (Eigen::Index c = 0; c < latent; ++c)
            if (c / width != static_cast<Eigen::Index>(t))
                type.unpaired_latent.push_back(c);
        out.push_back(std::move(type));
    }
    return out;
}

/// Fits one model per cue on the given questions (all types pooled).
inline std::map<std::string, CcaModel> fit_cue_models(const SyntheticDataset& ds,
                                                      const std::vector<QuestionInstance>& questions,
                                                      const std::vector<CueConfig>& cues, const CcaParams& params)
{
    std::map<std::string, CcaModel> out;
    for (const auto& cue : cues) {
        const auto pairs = training_pairs(ds.store, ds.table, questions, cue);
        out.emplace(cue.name, fit_cca(pairs.X, pairs.Y, params));
    }
    return out;
}

inline CcaParams cca_params(std::uint32_t k, double reg = kDefaultCcaReg, double power = kDefaultCcaPower)
{
    CcaParams p;
    p.k = k;
    p.reg = reg;
    p.power = power;
    return p;
}

/// Chance-level band: |acc - p| <= 3 * sqrt(p (1 - p) / n).
inline bool within_chance_band(double acc, double p, std::size_t n)
{
    return std::abs(acc - p) <= 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

} // namespace mcqa::testing
