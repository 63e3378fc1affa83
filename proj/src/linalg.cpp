#include "geomphase/linalg.hpp"

#include <cmath>
#include <string>

#include "geomphase/error.hpp"

namespace geomphase {

double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  }
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double max_abs_difference(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix shapes differ");
  }
  return (a - b).cwiseAbs().maxCoeff();
}

HermitianMatrix::HermitianMatrix(CMatrix entries, double tolerance) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 2) {
    throw Error(ErrorCode::DimensionMismatch,
                "Hermitian matrix must be square with dimension >= 2");
  }
  const double defect = hermiticity_defect(entries_);
  if (!(defect <= tolerance)) {
    throw Error(ErrorCode::NonHermitianInput,
                "Hermiticity defect " + std::to_string(defect) + " exceeds tolerance");
  }
}

StateVector::StateVector(CVector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "empty state vector");
  }
  const double norm = amplitudes_.norm();
  if (!std::isfinite(norm)) {
    throw Error(ErrorCode::NonFinite, "state vector has non-finite amplitudes");
  }
  if (std::abs(norm - 1.0) > kNormTolerance) {
    throw Error(ErrorCode::InvalidArgument,
                "state vector norm " + std::to_string(norm) + " is not 1");
  }
}

StateVector StateVector::normalized(const CVector& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::InvalidArgument, "cannot normalize a zero or non-finite vector");
  }
  return StateVector(v / norm);
}

}  // namespace geomphase
