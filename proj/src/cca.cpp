#include "mcqa/cca.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "mcqa/byte_io.hpp"
#include "mcqa/error.hpp"

namespace mcqa {

namespace {

constexpr char kModelMagic[] = "MCCA";
constexpr std::uint32_t kModelVersion = 1;
constexpr double kEigenFloor = 1e-12;
constexpr double kZeroNorm = 1e-12;

void require_finite(const Eigen::MatrixXd& m, const char* what)
{
    if (!m.allFinite())
        throw Error(ErrorCode::NonFiniteInput, std::string(what) + " contains non-finite entries");
}

// Symmetric inverse square root of a covariance, eigenvalues clamped at the floor.
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& cov)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorCode::RankDeficient, "eigendecomposition of covariance failed");
    const Eigen::VectorXd scale =
        eig.eigenvalues().unaryExpr([](double v) { return 1.0 / std::sqrt(std::max(v, kEigenFloor)); });
    return eig.eigenvectors() * scale.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::MatrixXd regularized(const Eigen::MatrixXd& cov, double reg, const char* view)
{
    const double dim = static_cast<double>(cov.rows());
    const double trace = cov.trace();
    if (!(trace > 0.0))
        throw Error(ErrorCode::RankDeficient, std::string(view) + " view has zero variance");

    if (reg == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        if (lo <= kEigenFloor * hi)
            throw Error(ErrorCode::RankDeficient,
                        std::string(view) + " covariance is singular; supply reg > 0");
        return cov;
    }
    Eigen::MatrixXd out = cov;
    out.diagonal().array() += reg * trace / dim;
    return out;
}

// Flip each direction pair so the X-side column's largest |entry| is positive.
void fix_signs(Eigen::MatrixXd& bx, Eigen::MatrixXd& by)
{
    for (Eigen::Index c = 0; c < bx.cols(); ++c) {
        Eigen::Index best = 0;
        for (Eigen::Index r = 1; r < bx.rows(); ++r)
            if (std::abs(bx(r, c)) > std::abs(bx(best, c)))
                best = r;
        if (bx(best, c) < 0.0) {
            bx.col(c) = -bx.col(c);
            by.col(c) = -by.col(c);
        }
    }
}

Eigen::VectorXd project(const Eigen::VectorXd& weights, const Eigen::MatrixXd& basis,
                        const Eigen::VectorXd& mean, const Eigen::Ref<const Eigen::VectorXd>& v,
                        const char* side)
{
    if (v.size() != mean.size())
        throw Error(ErrorCode::DimMismatch, std::string(side) + " vector has length " +
                                                std::to_string(v.size()) + ", model expects " +
                                                std::to_string(mean.size()));
    if (!v.allFinite())
        throw Error(ErrorCode::NonFiniteInput, std::string(side) + " vector is not finite");
    return weights.cwiseProduct(basis.transpose() * (v - mean));
}

} // namespace

void CcaModel::check_invariants() const
{
    if (k == 0 || mean_x.size() == 0 || mean_y.size() == 0)
        throw Error(ErrorCode::InvalidArgument, "model has empty dimensions");
    if (k > std::min(dim_x(), dim_y()))
        throw Error(ErrorCode::BadK, "k exceeds min(dim_x, dim_y)");
    if (basis_x.rows() != dim_x() || basis_x.cols() != k || basis_y.rows() != dim_y() ||
        basis_y.cols() != k || corr.size() != k)
        throw Error(ErrorCode::DimMismatch, "model arrays disagree with header dimensions");
    if (!(power >= 0.0) || !(reg >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "power and reg must be nonnegative");
}

Eigen::VectorXd CcaModel::coordinate_weights() const
{
    return corr.unaryExpr([p = power](double c) { return std::pow(c, p); });
}

CcaModel fit_cca(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const CcaParams& params)
{
    if (X.rows() != Y.rows())
        throw Error(ErrorCode::RowCountMismatch, "X has " + std::to_string(X.rows()) +
                                                     " rows, Y has " + std::to_string(Y.rows()));
    if (X.rows() < 2)
        throw Error(ErrorCode::InsufficientSamples, "need at least 2 samples");
    if (X.cols() == 0 || Y.cols() == 0)
        throw Error(ErrorCode::DimMismatch, "views must have at least one column");
    const auto max_k = static_cast<std::uint32_t>(std::min(X.cols(), Y.cols()));
    if (params.k == 0 || params.k > max_k)
        throw Error(ErrorCode::BadK, "k=" + std::to_string(params.k) + " outside [1, " +
                                         std::to_string(max_k) + "]");
    if (!(params.reg >= 0.0) || !std::isfinite(params.reg))
        throw Error(ErrorCode::InvalidArgument, "reg must be finite and nonnegative");
    if (!(params.power >= 0.0) || !std::isfinite(params.power))
        throw Error(ErrorCode::InvalidArgument, "power must be finite and nonnegative");
    require_finite(X, "X");
    require_finite(Y, "Y");

    const double n = static_cast<double>(X.rows());
    CcaModel model;
    model.k = params.k;
    model.power = params.power;
    model.reg = params.reg;
    model.mean_x = X.colwise().mean().transpose();
    model.mean_y = Y.colwise().mean().transpose();

    const Eigen::MatrixXd xc = X.rowwise() - model.mean_x.transpose();
    const Eigen::MatrixXd yc = Y.rowwise() - model.mean_y.transpose();
    // Symmetrize to remove rounding asymmetry before the eigensolver.
    Eigen::MatrixXd cxx = (xc.transpose() * xc) / n;
    Eigen::MatrixXd cyy = (yc.transpose() * yc) / n;
    cxx = 0.5 * (cxx + cxx.transpose()).eval();
    cyy = 0.5 * (cyy + cyy.transpose()).eval();
    const Eigen::MatrixXd cxy = (xc.transpose() * yc) / n;

    const Eigen::MatrixXd wx = inverse_sqrt(regularized(cxx, params.reg, "X"));
    const Eigen::MatrixXd wy = inverse_sqrt(regularized(cyy, params.reg, "Y"));

    const Eigen::MatrixXd whitened = wx * cxy * wy;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(whitened, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw Error(ErrorCode::RankDeficient, "SVD of whitened cross-covariance failed");

    model.basis_x = wx * svd.matrixU().leftCols(params.k);
    model.basis_y = wy * svd.matrixV().leftCols(params.k);
    model.corr = svd.singularValues().head(params.k).cwiseMax(0.0).cwiseMin(1.0);
    fix_signs(model.basis_x, model.basis_y);
    return model;
}

Eigen::VectorXd project_x(const CcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    return project(model.coordinate_weights(), model.basis_x, model.mean_x, x, "x");
}

Eigen::VectorXd project_y(const CcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& y)
{
    return project(model.coordinate_weights(), model.basis_y, model.mean_y, y, "y");
}

double projected_cosine(const Eigen::Ref<const Eigen::VectorXd>& px,
                        const Eigen::Ref<const Eigen::VectorXd>& py)
{
    if (px.size() != py.size())
        throw Error(ErrorCode::DimMismatch, "projected vectors differ in length");
    const double nx = px.norm();
    const double ny = py.norm();
    if (nx < kZeroNorm || ny < kZeroNorm)
        throw Error(ErrorCode::ZeroProjection, "projection norm below 1e-12");
    return std::clamp(px.dot(py) / (nx * ny), -1.0, 1.0);
}

double similarity(const CcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y)
{
    return projected_cosine(project_x(model, x), project_y(model, y));
}

std::vector<char> serialize_model(const CcaModel& model)
{
    model.check_invariants();
    byte_io::Writer w;
    w.magic(kModelMagic);
    w.u32(kModelVersion);
    w.u32(model.dim_x());
    w.u32(model.dim_y());
    w.u32(model.k);
    w.f64(model.power);
    w.f64(model.reg);
    auto put = [&w](const auto& arr) {
        // Eigen default storage is column-major, matching the file layout.
        for (Eigen::Index i = 0; i < arr.size(); ++i)
            w.f64(arr.data()[i]);
    };
    put(model.mean_x);
    put(model.mean_y);
    put(model.basis_x);
    put(model.basis_y);
    put(model.corr);
    return w.bytes();
}

CcaModel deserialize_model(const std::vector<char>& bytes, const std::string& context)
{
    byte_io::Reader r(std::string_view(bytes.data(), bytes.size()), context);
    r.expect_magic(kModelMagic);
    if (const auto version = r.u32(); version != kModelVersion)
        throw Error(ErrorCode::UnsupportedVersion,
                    context + ": model version " + std::to_string(version));
    const std::uint32_t dx = r.u32();
    const std::uint32_t dy = r.u32();
    CcaModel m;
    m.k = r.u32();
    m.power = r.f64();
    m.reg = r.f64();
    if (dx == 0 || dy == 0 || m.k == 0 || m.k > std::min(dx, dy))
        throw Error(ErrorCode::ParseError, context + ": invalid header dimensions");

    const std::uint64_t doubles = std::uint64_t{dx} + dy + std::uint64_t{dx} * m.k +
                                  std::uint64_t{dy} * m.k + m.k;
    r.need(doubles * 8);
    auto fill = [&r](auto& arr) {
        for (Eigen::Index i = 0; i < arr.size(); ++i)
            arr.data()[i] = r.f64();
    };
    m.mean_x.resize(dx);
    m.mean_y.resize(dy);
    m.basis_x.resize(dx, m.k);
    m.basis_y.resize(dy, m.k);
    m.corr.resize(m.k);
    fill(m.mean_x);
    fill(m.mean_y);
    fill(m.basis_x);
    fill(m.basis_y);
    fill(m.corr);
    if (r.remaining() != 0)
        throw Error(ErrorCode::ParseError, context + ": trailing bytes after model payload");
    m.check_invariants();
    return m;
}

void save_model(const CcaModel& model, const std::string& path)
{
    byte_io::write_file(path, serialize_model(model));
}

CcaModel load_model(const std::string& path)
{
    const std::string raw = byte_io::read_file(path);
    return deserialize_model(std::vector<char>(raw.begin(), raw.end()), path);
}

} // namespace mcqa
