#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "geomphase/linalg.hpp"

namespace geomphase {

/// Spin-half in a field of fixed magnitude rotating once about z.
/// `omega0` is in rad/us; time is measured in microseconds throughout.
struct SpinHalfParams {
  double theta = kPi / 2.0;
  double omega0 = 5000.0;

  /// Throws InvalidArgument unless theta in [0, pi] and omega0 > 0.
  void validate() const;
};

/// A closed loop of Hamiltonians H(s), s in [0, 1].
///
/// The evaluator writes H(s) into a preallocated dim x dim matrix; this is
/// the hot path used by the integrator and performs no checking. `at()`
/// is the checked accessor.
class HamiltonianFamily {
 public:
  using Evaluator = std::function<void(double s, Eigen::Ref<CMatrix> out)>;

  HamiltonianFamily(std::size_t dim, Evaluator evaluator, std::string label);

  std::size_t dim() const { return dim_; }
  const std::string& label() const { return label_; }

  /// Throws InvalidArgument for s outside [0, 1] and NonHermitianInput when
  /// the evaluated matrix fails the 1e-12 Hermiticity check.
  HermitianMatrix at(double s) const;

  void fill(double s, Eigen::Ref<CMatrix> out) const { evaluator_(s, out); }

 private:
  std::size_t dim_;
  Evaluator evaluator_;
  std::string label_;
};

HermitianMatrix spin_half_hamiltonian(const SpinHalfParams& params, double s);

struct SpinHalfEigensystem {
  double ground_energy;
  CVector ground;
  double excited_energy;
  CVector excited;
};

/// Closed-form eigenpairs in the gauge e^{i 2 pi s} on the lower component,
/// which is cyclic in s.
SpinHalfEigensystem spin_half_eigensystem(const SpinHalfParams& params, double s);

HamiltonianFamily spin_half_family(const SpinHalfParams& params);

/// H(s) = H0 + H1 cos(2 pi s) + H2 sin(2 pi s) with H0 having eigenvalues
/// scale * (n + 0.4 u_n), u_n uniform in [0, 1), in a random eigenbasis,
/// and H1, H2 random Hermitian with spectral norm coupling * scale.
/// Deterministic for a fixed seed on a given standard library.
HamiltonianFamily random_analytic_family(std::size_t dim, std::uint64_t seed, double scale = 1.0,
                                         double coupling = 0.15);

/// Piecewise-linear (entrywise) interpolation of sampled matrices. The grid
/// must start at 0, end at 1 and be strictly increasing.
HamiltonianFamily sampled_family(std::vector<double> grid, std::vector<CMatrix> matrices,
                                 std::string label);

/// Reads the plain-text sampled-family format:
///   N M
///   s_0
///   re,im re,im ...   (N lines of N entries)
///   s_1
///   ...
HamiltonianFamily read_sampled_family(std::istream& in, std::string label = "sampled");
HamiltonianFamily load_sampled_family(const std::string& path);

/// Writes `samples` uniformly spaced evaluations of `family` in the format
/// read by read_sampled_family, with 17 significant digits.
void write_sampled_family(std::ostream& out, const HamiltonianFamily& family, std::size_t samples);

struct ValidationReport {
  double cyclicity_defect = 0.0;    ///< max |H(0) - H(1)|
  double hermiticity_defect = 0.0;  ///< worst over the grid
  double min_gap = 0.0;             ///< min over grid and level pairs
  double min_gap_at = 0.0;          ///< s where the minimum gap occurs
  double gap_tol = 0.0;
  double max_abs_energy = 0.0;
  bool cyclic = false;
  bool gapped = false;

  bool passed() const { return cyclic && gapped; }
};

inline constexpr double kCyclicityTolerance = 1e-12;
inline constexpr double kValidationHermiticityTolerance = 1e-10;

/// Samples the family on a uniform grid of `grid_size` points. A negative
/// `gap_tol` selects the default 1e-6 * max|eps|. Throws NonHermitianInput
/// when any sample's Hermiticity defect exceeds 1e-10.
ValidationReport validate_family(const HamiltonianFamily& family, std::size_t grid_size = 2001,
                                 double gap_tol = -1.0);

/// Instantaneous eigensystem on a grid, with eigenvector phases fixed so the
/// frame is smooth in s and returns to itself at s = 1.
class EigenFrame {
 public:
  std::size_t dim() const { return static_cast<std::size_t>(energies_.cols()); }
  std::size_t samples() const { return grid_.size(); }
  const std::vector<double>& grid() const { return grid_; }

  double energy(std::size_t k, std::size_t n) const { return energies_(k, n); }
  const Eigen::MatrixXd& energies() const { return energies_; }
  /// Columns are the eigenvectors at grid point k, ascending energy.
  const CMatrix& vectors(std::size_t k) const { return vectors_[k]; }
  CVector vector(std::size_t k, std::size_t n) const { return vectors_[k].col(n); }
  const std::vector<CMatrix>& all_vectors() const { return vectors_; }

  /// Unwrapped gamma_n(s_k); gamma_n(0) == 0.
  double berry(std::size_t k, std::size_t n) const { return berry_(k, n); }

  double min_gap() const { return min_gap_; }
  /// max_n | |eps_n(1)> - |eps_n(0)> |
  double gauge_defect() const { return gauge_defect_; }
  /// max over samples of |H v - eps v|; zero when built from raw vectors.
  double max_residual() const { return max_residual_; }

 private:
  friend EigenFrame continue_gauge(std::vector<double> grid, Eigen::MatrixXd energies,
                                   std::vector<CMatrix> vectors);
  friend EigenFrame smooth_eigenframe(const HamiltonianFamily& family, std::size_t grid_size);

  std::vector<double> grid_;
  Eigen::MatrixXd energies_;
  std::vector<CMatrix> vectors_;
  Eigen::MatrixXd berry_;
  double min_gap_ = 0.0;
  double gauge_defect_ = 0.0;
  double max_residual_ = 0.0;
};

/// Overlap below which gauge continuation gives up.
inline constexpr double kContinuationOverlap = 0.5;

/// Fixes eigenvector phases on an already-sampled frame: each vector is made
/// to have a real positive overlap with its predecessor, then the holonomy
/// picked up around the loop is spread linearly in s so the last sample
/// coincides with the first. Fills the Berry accumulator. Throws GapTooSmall
/// when a continuation overlap drops below 0.5.
EigenFrame continue_gauge(std::vector<double> grid, Eigen::MatrixXd energies,
                          std::vector<CMatrix> vectors);

/// Eigendecomposes the family on a uniform grid and applies continue_gauge.
EigenFrame smooth_eigenframe(const HamiltonianFamily& family, std::size_t grid_size = 2001);

/// gamma(s_k) = -sum_{j<=k} arg<v_{j-1}|v_j>, with a pairwise Richardson
/// correction that removes the O(h^2) bias of the overlap form. Gauge
/// covariant sample by sample, so the value at the last sample is gauge
/// invariant whenever v_last == v_0.
std::vector<double> berry_accumulator(std::span<const double> grid,
                                      std::span<const CVector> vectors);

/// gamma_n(1). Throws IndexOutOfRange for n >= dim.
double berry_phase(const EigenFrame& frame, std::size_t n);

}  // namespace geomphase
