#pragma once

// Data model for streaming leading-eigenvector estimation: unit directions,
// covariances held in spectral form, Gaussian sampling, the two-row adaptive
// measurement (estimate + random orthogonal probe), imputation of the full
// sample from that measurement, and drift of the leading eigenvector.

#include <cstdint>
#include <optional>
#include <random>
#include <span>

#include <Eigen/Dense>

namespace coja {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Repo-wide random stream. Every stochastic operation takes one explicitly.
using Rng = std::mt19937_64;

/// splitmix64 finalizer applied to (base, index); used for per-trial seeds.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index);

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

inline constexpr double kUnitTolerance = 1e-9;
inline constexpr double kOrthogonalTolerance = 1e-9;

/// A direction in R^d, d >= 2, with unit Euclidean norm.
class UnitVector {
 public:
  /// Wraps `coords`, which must already have unit norm (within 1e-9).
  static UnitVector from_unit(Vector coords);
  /// Standard basis vector e_i.
  static UnitVector basis(int d, int i);

  const Vector& coords() const { return coords_; }
  int dim() const { return static_cast<int>(coords_.size()); }
  double operator[](int i) const { return coords_[i]; }
  double dot(const UnitVector& other) const { return coords_.dot(other.coords_); }
  double dot(const Vector& v) const { return coords_.dot(v); }

  bool operator==(const UnitVector& other) const { return coords_ == other.coords_; }

 private:
  explicit UnitVector(Vector coords) : coords_(std::move(coords)) {}
  friend UnitVector normalize(const Vector& v);

  Vector coords_;
};

/// Covariance stored as eigenvalues (descending) plus an orthonormal basis.
class SpectralCovariance {
 public:
  SpectralCovariance(Vector eigenvalues, Matrix basis);

  int dim() const { return static_cast<int>(eigenvalues_.size()); }
  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& basis() const { return basis_; }
  double lambda1() const { return eigenvalues_[0]; }
  double lambda2() const { return eigenvalues_[1]; }
  double gap() const { return eigenvalues_[0] - eigenvalues_[1]; }

  /// Column 0 of the basis.
  UnitVector leading_eigenvector() const;

  /// Dense Q diag(lambda) Q^T. Test and diagnostic use only.
  Matrix dense() const;

  /// max_ij |(Q^T Q - I)_ij|
  double orthonormality_error() const;

  bool operator==(const SpectralCovariance& other) const {
    return eigenvalues_ == other.eigenvalues_ && basis_ == other.basis_;
  }

 private:
  Vector eigenvalues_;
  Matrix basis_;
};

/// The two compressive readings g = u.v and h = b.v, with the probe b used.
struct Measurement {
  double g;
  double h;
  UnitVector probe;
};

/// Surrogate full-dimensional sample rebuilt from a two-row measurement.
struct ImputedSample {
  double weight;      // w_t
  Vector projection;  // p_t = u w_t
  Vector residual;    // r_t, orthogonal to u
  Vector imputed;     // projection + residual
};

struct DriftParams {
  double velocity = 0.0;  // per-step 1 - (u_bar_t . u_bar_{t+1})^2, in [0, 1)

  void validate() const;
};

struct Alignment {
  double cos2;
  double sin2;
};

UnitVector normalize(const Vector& v);

Alignment alignment(const UnitVector& u, const UnitVector& ref);

/// `tail` supplies lambda_3..lambda_d; empty means flat at lambda2. Without an
/// orientation seed the basis is the identity, otherwise it is Haar-random.
SpectralCovariance make_covariance(int d, double lambda1, double lambda2,
                                   std::span<const double> tail = {},
                                   std::optional<std::uint64_t> orientation_seed = {});

/// One draw from N(0, Sigma).
Vector sample_data(const SpectralCovariance& cov, Rng& rng);

/// Uniform on S^{d-1}.
UnitVector sample_sphere(int d, Rng& rng);

/// Uniform on the unit sphere of the orthogonal complement of u.
UnitVector sample_orthogonal(const UnitVector& u, Rng& rng);

Measurement compress(const UnitVector& u, const UnitVector& b, const Vector& v);

ImputedSample impute(const UnitVector& u, const UnitVector& b, const Vector& v);

/// Moves the leading eigenvector by exactly `drift.velocity` in squared sine,
/// rotating the whole basis in the plane (u_bar, q) for a random q orthogonal
/// to u_bar. Eigenvalues are untouched.
SpectralCovariance drift_step(const SpectralCovariance& cov, const DriftParams& drift, Rng& rng);

}  // namespace coja
