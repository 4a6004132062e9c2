#include "coja/model.hpp"

#include <cmath>
#include <string>

#include "coja/error.hpp"

namespace coja {

namespace {

constexpr int kMaxRedraws = 100;
constexpr double kMinDrawNorm = 1e-12;
constexpr double kReorthonormalizeThreshold = kUnitTolerance;

Vector standard_normal(int d, Rng& rng) {
  std::normal_distribution<double> normal{0.0, 1.0};
  Vector z(d);
  for (int i = 0; i < d; ++i) z[i] = normal(rng);
  return z;
}

void require_dim(int d) {
  if (d < 2) throw InvalidArgument("dimension must be at least 2, got " + std::to_string(d));
}

void require_same_dim(int a, int b) {
  if (a != b) {
    throw DimensionMismatch("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

void require_orthogonal(const UnitVector& u, const UnitVector& b) {
  require_same_dim(u.dim(), b.dim());
  if (std::abs(u.dot(b)) > kOrthogonalTolerance) {
    throw InvalidArgument("probe is not orthogonal to the estimate");
  }
}

// Modified Gram-Schmidt over the columns, in place.
void orthonormalize_columns(Matrix& q) {
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (Eigen::Index k = 0; k < j; ++k) {
      q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    }
    q.col(j).normalize();
  }
}

Matrix haar_orthogonal(int d, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal{0.0, 1.0};
  Matrix g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  // Sign correction makes the distribution exactly Haar.
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

UnitVector UnitVector::from_unit(Vector coords) {
  require_dim(static_cast<int>(coords.size()));
  if (std::abs(coords.norm() - 1.0) > kUnitTolerance) {
    throw InvalidArgument("vector does not have unit norm");
  }
  return UnitVector(std::move(coords));
}

UnitVector UnitVector::basis(int d, int i) {
  require_dim(d);
  if (i < 0 || i >= d) throw InvalidArgument("basis index out of range");
  return UnitVector(Vector::Unit(d, i));
}

SpectralCovariance::SpectralCovariance(Vector eigenvalues, Matrix basis)
    : eigenvalues_(std::move(eigenvalues)), basis_(std::move(basis)) {
  const auto d = eigenvalues_.size();
  require_dim(static_cast<int>(d));
  if (basis_.rows() != d || basis_.cols() != d) {
    throw DimensionMismatch("basis must be d x d");
  }
  if (!(eigenvalues_[0] > eigenvalues_[1])) {
    throw InvalidArgument("eigengap must be positive");
  }
  for (Eigen::Index i = 1; i < d; ++i) {
    if (eigenvalues_[i] > eigenvalues_[i - 1]) throw InvalidArgument("eigenvalues must be sorted descending");
  }
  if (eigenvalues_[d - 1] < 0.0) throw InvalidArgument("eigenvalues must be non-negative");
  if (orthonormality_error() > kUnitTolerance) throw InvalidArgument("basis is not orthonormal");
}

UnitVector SpectralCovariance::leading_eigenvector() const {
  return UnitVector::from_unit(basis_.col(0));
}

Matrix SpectralCovariance::dense() const {
  return basis_ * eigenvalues_.asDiagonal() * basis_.transpose();
}

double SpectralCovariance::orthonormality_error() const {
  const Matrix gram = basis_.transpose() * basis_;
  return (gram - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

void DriftParams::validate() const {
  if (!(velocity >= 0.0 && velocity < 1.0)) {
    throw InvalidArgument("velocity must lie in [0, 1)");
  }
}

UnitVector normalize(const Vector& v) {
  require_dim(static_cast<int>(v.size()));
  const double n = v.norm();
  if (!(n > kMinDrawNorm)) throw DegenerateInput("cannot normalize a (near-)zero vector");
  return UnitVector(v / n);
}

Alignment alignment(const UnitVector& u, const UnitVector& ref) {
  require_same_dim(u.dim(), ref.dim());
  const double c = ref.dot(u);
  const double cos2 = std::min(1.0, c * c);
  return {cos2, 1.0 - cos2};
}

SpectralCovariance make_covariance(int d, double lambda1, double lambda2,
                                   std::span<const double> tail,
                                   std::optional<std::uint64_t> orientation_seed) {
  require_dim(d);
  if (!(lambda1 > lambda2)) throw InvalidArgument("eigengap must be positive");
  if (lambda2 < 0.0) throw InvalidArgument("eigenvalues must be non-negative");
  if (!tail.empty() && static_cast<int>(tail.size()) != d - 2) {
    throw InvalidArgument("tail must supply exactly d-2 eigenvalues");
  }

  Vector eig(d);
  eig[0] = lambda1;
  eig[1] = lambda2;
  for (int i = 2; i < d; ++i) {
    const double lam = tail.empty() ? lambda2 : tail[i - 2];
    if (lam > eig[i - 1]) throw InvalidArgument("tail eigenvalues must not exceed lambda2 and must be descending");
    if (lam < 0.0) throw InvalidArgument("tail eigenvalues must be non-negative");
    eig[i] = lam;
  }

  Matrix basis = orientation_seed ? haar_orthogonal(d, *orientation_seed) : Matrix::Identity(d, d);
  return SpectralCovariance(std::move(eig), std::move(basis));
}

Vector sample_data(const SpectralCovariance& cov, Rng& rng) {
  Vector z = standard_normal(cov.dim(), rng);
  z.array() *= cov.eigenvalues().array().sqrt();
  return cov.basis() * z;
}

UnitVector sample_sphere(int d, Rng& rng) {
  require_dim(d);
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Vector z = standard_normal(d, rng);
    if (z.norm() > kMinDrawNorm) return normalize(z);
  }
  throw DegenerateInput("sample_sphere: exhausted redraws");
}

UnitVector sample_orthogonal(const UnitVector& u, Rng& rng) {
  const int d = u.dim();
  const Vector& uc = u.coords();
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Vector z = standard_normal(d, rng);
    z -= uc.dot(z) * uc;
    const double n = z.norm();
    if (!(n > kMinDrawNorm)) continue;
    z /= n;
    // One re-projection keeps |b.u| at rounding level even for large d.
    z -= uc.dot(z) * uc;
    z.normalize();
    return UnitVector::from_unit(std::move(z));
  }
  throw DegenerateInput("sample_orthogonal: exhausted redraws");
}

Measurement compress(const UnitVector& u, const UnitVector& b, const Vector& v) {
  require_orthogonal(u, b);
  require_same_dim(u.dim(), static_cast<int>(v.size()));
  return {u.dot(v), b.dot(v), b};
}

ImputedSample impute(const UnitVector& u, const UnitVector& b, const Vector& v) {
  require_orthogonal(u, b);
  require_same_dim(u.dim(), static_cast<int>(v.size()));

  // Two-row measurement operator A = [u^T; b^T].
  Eigen::Matrix<double, 2, Eigen::Dynamic> a(2, u.dim());
  a.row(0) = u.coords().transpose();
  a.row(1) = b.coords().transpose();

  const Eigen::Vector2d x = a * v;
  const Eigen::Vector2d au = a * u.coords();
  // Pseudoinverse of the 2x1 column A u is (A u)^T / |A u|^2.
  const double weight = au.dot(x) / au.squaredNorm();

  ImputedSample out;
  out.weight = weight;
  out.projection = u.coords() * weight;
  out.residual = a.transpose() * (x - au * weight);
  out.imputed = out.projection + out.residual;
  return out;
}

SpectralCovariance drift_step(const SpectralCovariance& cov, const DriftParams& drift, Rng& rng) {
  drift.validate();
  if (drift.velocity == 0.0) return cov;

  const UnitVector lead = cov.leading_eigenvector();
  const UnitVector q = sample_orthogonal(lead, rng);
  const double cos_t = std::sqrt(1.0 - drift.velocity);
  const double sin_t = std::sqrt(drift.velocity);

  // Plane rotation R = I + (cos-1)(uu^T + qq^T) + sin(qu^T - uq^T), applied column-wise.
  const Vector& uc = lead.coords();
  const Vector& qc = q.coords();
  Matrix basis = cov.basis();
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    const double a = uc.dot(basis.col(j));
    const double b = qc.dot(basis.col(j));
    basis.col(j) += (cos_t - 1.0) * (a * uc + b * qc) + sin_t * (a * qc - b * uc);
  }
  // Column 0 is set exactly so the displacement is cos_t^2 to rounding.
  basis.col(0) = cos_t * uc + sin_t * qc;

  const Matrix gram = basis.transpose() * basis;
  const double err = (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
  if (err > kReorthonormalizeThreshold) orthonormalize_columns(basis);

  return SpectralCovariance(cov.eigenvalues(), std::move(basis));
}

}  // namespace coja
