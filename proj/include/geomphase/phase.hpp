#pragma once

#include <string_view>

#include "geomphase/hamiltonian.hpp"
#include "geomphase/linalg.hpp"
#include "geomphase/propagator.hpp"

namespace geomphase {

/// x - 2 pi floor(x / 2 pi), in [0, 2 pi). Throws NonFinite for inf/nan.
double wrap_phase(double x);

/// Distance between two phases on the circle, in [0, pi].
double phase_distance(double a, double b);

enum class PhaseMethod { ContinuousLineIntegral, PancharatnamDiscrete, ExactClosedForm, Approximation };

std::string_view to_string(PhaseMethod method);

/// Geometric phase split into the arg of the end-to-end overlap and the
/// line-integral (dynamical) term; geometric = total + dynamical.
struct PhaseReport {
  double total_phase = 0.0;       ///< arg <psi_0|psi_last>, in (-pi, pi]
  double dynamical_term = 0.0;    ///< i int <psi|d psi>, unwrapped
  double geometric_phase_raw = 0.0;
  double geometric_phase_wrapped = 0.0;
  PhaseMethod method = PhaseMethod::ContinuousLineIntegral;
  bool ill_conditioned_arg = false;  ///< |<psi_0|psi_last>| < 1e-12; total set to 0
};

inline constexpr double kIllConditionedOverlap = 1e-12;

/// Continuous functional for a path produced by Schrodinger evolution under
/// `family`: the line integral is T * int <psi|H|psi> ds by the trapezoid
/// rule on the path grid. Throws GridTooCoarse when <psi|H|psi> jumps by
/// more than 0.1 of the family's energy scale between neighbours.
PhaseReport geometric_phase_continuous(const SampledPath& path, const HamiltonianFamily& family);

enum class DiscreteCorrection { None, Richardson };

/// Discrete gauge-invariant form: arg <psi_0|psi_last> - sum arg <psi_k|psi_k+1>.
/// The plain sum is O(h^2). With Richardson (the default) each pair of
/// intervals is also measured as one coarse step and extrapolated; the
/// correction is built from Bargmann invariants, so gauge invariance is
/// kept. Throws OrthogonalNeighbors if any |<psi_k|psi_k+1>| <= 0.1.
PhaseReport geometric_phase_pancharatnam(const SampledPath& path,
                                         DiscreteCorrection correction = DiscreteCorrection::Richardson);

/// Integrates from psi0 and evaluates the continuous functional on every
/// integration node without storing the path. `options.output_points` is
/// ignored.
PhaseReport numeric_geometric_phase(const HamiltonianFamily& family, double T,
                                    const StateVector& psi0, IntegratorOptions options = {});

struct NumericRun {
  PhaseReport phase;
  /// min over the run of |<eps_n(s)|psi(s)>| against the reference frame;
  /// 1 when no frame was given.
  double min_fidelity = 1.0;
  EvolutionStats stats;
};

/// numeric_geometric_phase plus, when `reference` is set, the worst overlap
/// modulus with level `level` of that frame (frame vectors interpolated
/// linearly between samples), checked on at most ~4000 nodes.
NumericRun numeric_pipeline(const HamiltonianFamily& family, double T, const StateVector& psi0,
                            IntegratorOptions options = {}, const EigenFrame* reference = nullptr,
                            std::size_t level = 0);

/// Accumulated energies int_0^s eps_n on an eigenframe grid (trapezoid).
class EnergyProfile {
 public:
  /// `energies` is samples x N.
  EnergyProfile(std::vector<double> grid, Eigen::MatrixXd energies);
  explicit EnergyProfile(const EigenFrame& frame);

  std::size_t dim() const { return static_cast<std::size_t>(energies_.cols()); }
  std::size_t samples() const { return grid_.size(); }
  const std::vector<double>& grid() const { return grid_; }
  double energy(std::size_t k, std::size_t n) const { return energies_(k, n); }
  double accumulated(std::size_t k, std::size_t n) const { return accumulated_(k, n); }
  /// Delta_mn(s_k) = int_0^{s_k} (eps_m - eps_n).
  double delta(std::size_t m, std::size_t n, std::size_t k) const {
    return accumulated_(k, m) - accumulated_(k, n);
  }
  double delta_total(std::size_t m, std::size_t n) const { return delta(m, n, samples() - 1); }

 private:
  std::vector<double> grid_;
  Eigen::MatrixXd energies_;
  Eigen::MatrixXd accumulated_;
};

struct KeyFormulaPrediction {
  double correction = 0.0;  ///< sum_{n != 0} |a_n|^2 T Delta_n0(1)
  double unwrapped = 0.0;
  double wrapped = 0.0;
  bool weak_ground_weight = false;  ///< |a_0|^2 < 0.9: outside the small-imperfection regime
};

/// Berry phase of the ground level plus the imperfection correction.
KeyFormulaPrediction key_formula_prediction(const EnergyProfile& profile,
                                            const ImperfectionSpec& amplitudes, double berry0,
                                            double T);

/// Spin-half geometric phase in the perfect setting, closed form, wrapped.
double exact_gp_perfect(const SpinHalfParams& params, double T);

/// Spin-half geometric phase for a0|eps_0> + a1|eps_1>, closed form, wrapped.
/// Throws InvalidAmplitudes when |a0|^2 + |a1|^2 differs from 1 by > 1e-10.
double exact_gp_imperfect(const SpinHalfParams& params, double T, Complex a0, Complex a1);

struct PhaseValue {
  double unwrapped = 0.0;
  double wrapped = 0.0;
};

/// -pi (1 - cos theta).
PhaseValue approx_gp_perfect(const SpinHalfParams& params);

/// -pi (1 - cos theta) + |a1|^2 T omega0. Throws InvalidArgument unless
/// a1mag2 in [0, 1].
PhaseValue approx_gp_imperfect(const SpinHalfParams& params, double T, double a1mag2);

/// T -> infinity limit under a1 = sqrt(Gamma / T): wrap(-pi (1 - cos theta) + Gamma omega0).
double gamma_limit(const SpinHalfParams& params, double gamma);

/// sum_{m != n} a_m^* a_n int_0^1 e^{i T Delta_mn} e^{i (gamma_n - gamma_m)} <eps_m|d_s eps_n> ds,
/// the cross term dropped by the key formula. Each interval is integrated
/// with the phase taken linear across it. Throws GridTooCoarse if
/// T * Delta_mn advances by more than 0.3 rad over any frame interval.
Complex oscillatory_remainder(const EigenFrame& frame, const ImperfectionSpec& amplitudes, double T);

inline constexpr double kMaxRemainderPhasePerInterval = 0.3;

/// int_0^1 |<eps_m|d_s eps_n>| ds on the frame grid.
double coupling_integral(const EigenFrame& frame, std::size_t m, std::size_t n);

/// 2 sum_{n != 0} |a_0 a_n| int |<eps_n|d_s eps_0>| ds + sum_{n != 0} |a_n|^2.
/// Size of the T-independent offset between the exact geometric phase and
/// the key formula: first-order non-adiabatic admixture interferes with the
/// imperfection amplitudes and survives the T -> infinity limit.
double key_formula_offset_bound(const EigenFrame& frame, const ImperfectionSpec& amplitudes);

}  // namespace geomphase
