#pragma once

// Regularized two-view canonical correlation analysis and the
// correlation-weighted cosine similarity used to compare an image-side
// vector against a text-side vector in the shared embedding.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mcqa {

inline constexpr double kDefaultCcaPower = 4.0;
inline constexpr double kDefaultCcaReg = 1e-4;

/// Trained two-view embedding. Immutable once fitted or loaded.
///
/// Covariances are population covariances (divided by n), so duplicating
/// every training row leaves the fitted model unchanged.
struct CcaModel {
    std::uint32_t k = 0;
    double power = kDefaultCcaPower;  ///< exponent applied to `corr` when weighting coordinates
    double reg = kDefaultCcaReg;      ///< relative ridge: reg * trace(C) / dim added per view
    Eigen::VectorXd mean_x;
    Eigen::VectorXd mean_y;
    Eigen::MatrixXd basis_x;  ///< dim_x x k
    Eigen::MatrixXd basis_y;  ///< dim_y x k
    Eigen::VectorXd corr;     ///< k canonical correlations, non-increasing, in [0, 1]

    std::uint32_t dim_x() const noexcept { return static_cast<std::uint32_t>(mean_x.size()); }
    std::uint32_t dim_y() const noexcept { return static_cast<std::uint32_t>(mean_y.size()); }

    /// Throws DimMismatch / InvalidArgument if the fields are inconsistent.
    void check_invariants() const;

    /// corr^power, the per-coordinate weights used by the projections.
    Eigen::VectorXd coordinate_weights() const;
};

struct CcaParams {
    std::uint32_t k = 1;
    double reg = kDefaultCcaReg;
    double power = kDefaultCcaPower;
};

/// Fits CCA on paired rows of X (n x dim_x) and Y (n x dim_y).
///
/// Each regularized covariance is whitened by its symmetric inverse square
/// root and the whitened cross-covariance is decomposed by SVD. Canonical
/// direction pairs are sign-normalized so that the largest-magnitude entry
/// (lowest index on ties) of each X-side column is positive.
CcaModel fit_cca(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const CcaParams& params);

/// diag(corr^power) * basis_x^T * (x - mean_x)
Eigen::VectorXd project_x(const CcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
/// diag(corr^power) * basis_y^T * (y - mean_y)
Eigen::VectorXd project_y(const CcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Cosine of two already-projected vectors, clamped to [-1, 1]. Throws
/// ZeroProjection when either norm is below 1e-12.
double projected_cosine(const Eigen::Ref<const Eigen::VectorXd>& px,
                        const Eigen::Ref<const Eigen::VectorXd>& py);

/// Normalized CCA similarity: projected_cosine(project_x(x), project_y(y)).
double similarity(const CcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y);

inline const Eigen::VectorXd& canonical_correlations(const CcaModel& model) { return model.corr; }

// Binary model file: "MCCA", u32 version=1, u32 dim_x, u32 dim_y, u32 k,
// f64 power, f64 reg, then f64 arrays mean_x, mean_y, basis_x (column-major),
// basis_y (column-major), corr. All little-endian.
std::vector<char> serialize_model(const CcaModel& model);
CcaModel deserialize_model(const std::vector<char>& bytes, const std::string& context = "model");

void save_model(const CcaModel& model, const std::string& path);
CcaModel load_model(const std::string& path);

} // namespace mcqa
