#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace geomphase {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr Complex kI{0.0, 1.0};

/// Largest entrywise |A - A^dagger|.
double hermiticity_defect(const CMatrix& m);

/// Largest entrywise |A - B|; dimensions must agree.
double max_abs_difference(const CMatrix& a, const CMatrix& b);

/// A square complex matrix equal to its conjugate transpose within 1e-12.
class HermitianMatrix {
 public:
  static constexpr double kTolerance = 1e-12;

  /// Throws NonHermitianInput when the defect exceeds `tolerance`, and
  /// DimensionMismatch for non-square or smaller-than-2 input.
  explicit HermitianMatrix(CMatrix entries, double tolerance = kTolerance);

  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  const CMatrix& matrix() const { return entries_; }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return entries_(r, c); }

 private:
  CMatrix entries_;
};

/// Unit-norm state of an N-level system.
class StateVector {
 public:
  static constexpr double kNormTolerance = 1e-10;

  /// Throws InvalidArgument unless | |v| - 1 | <= kNormTolerance.
  explicit StateVector(CVector amplitudes);

  /// Scales `v` to unit norm; throws InvalidArgument for the zero vector.
  static StateVector normalized(const CVector& v);

  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
  const CVector& amplitudes() const { return amplitudes_; }
  Complex operator[](Eigen::Index i) const { return amplitudes_(i); }

 private:
  CVector amplitudes_;
};

/// <a|b> with the first argument conjugated.
inline Complex inner(const CVector& a, const CVector& b) { return a.dot(b); }

/// Principal argument in (-pi, pi].
inline double principal_arg(Complex z) { return std::arg(z); }

}  // namespace geomphase
