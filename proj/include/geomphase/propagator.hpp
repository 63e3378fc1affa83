#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "geomphase/hamiltonian.hpp"
#include "geomphase/linalg.hpp"

namespace geomphase {

/// Initial-state amplitudes a_n on the eigenbasis of H(0).
class ImperfectionSpec {
 public:
  static constexpr double kNormTolerance = 1e-12;

  /// Throws InvalidAmplitudes unless sum |a_n|^2 == 1 within 1e-12.
  explicit ImperfectionSpec(std::vector<Complex> amplitudes);

  /// (a0, a1, 0, ...) padded to `dim` levels.
  static ImperfectionSpec two_level(Complex a0, Complex a1, std::size_t dim = 2);

  std::size_t size() const { return amplitudes_.size(); }
  Complex operator[](std::size_t n) const { return amplitudes_[n]; }
  const std::vector<Complex>& amplitudes() const { return amplitudes_; }
  double weight(std::size_t n) const { return std::norm(amplitudes_[n]); }

 private:
  std::vector<Complex> amplitudes_;
};

/// a0 = sqrt(1 - Gamma/T), a1 = sqrt(Gamma/T). Throws InvalidGamma unless
/// Gamma >= 0, T > 0 and Gamma/T <= 1.
ImperfectionSpec gamma_scaled_amplitudes(double gamma, double T, std::size_t dim = 2);

/// States psi_k sampled at s_k along an evolution of total time T.
/// Stored column-wise: states().col(k) is psi(s_k).
class SampledPath {
 public:
  static constexpr double kNormTolerance = 1e-9;

  /// Throws InvalidArgument unless the grid runs strictly upward from 0 to 1
  /// and every column has unit norm within 1e-9.
  SampledPath(double T, std::vector<double> grid, CMatrix states, std::string label);

  double T() const { return T_; }
  std::size_t size() const { return grid_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(states_.rows()); }
  const std::vector<double>& grid() const { return grid_; }
  const CMatrix& states() const { return states_; }
  CVector state(std::size_t k) const { return states_.col(static_cast<Eigen::Index>(k)); }
  const std::string& label() const { return label_; }

 private:
  double T_;
  std::vector<double> grid_;
  CMatrix states_;
  std::string label_;
};

/// CSV: header "s,re_0,im_0,...", one row per sample, 17 significant digits.
void write_path_csv(std::ostream& out, const SampledPath& path);
SampledPath read_path_csv(std::istream& in, double T, std::string label = "csv");

/// e^{-i pi s sigma_z} e^{i (wbar T s / 2)(n_x sigma_x + n_z sigma_z)}.
Eigen::Matrix2cd exact_spin_half_propagator(const SpinHalfParams& params, double T, double s);

/// U_T(s) applied to the ground eigenvector at s = 0, in closed form.
StateVector exact_perfect_state(const SpinHalfParams& params, double T, double s);

/// U_T(s) applied to a0 |eps_0(0)> + a1 |eps_1(0)>, in closed form.
/// Throws InvalidAmplitudes if |a0|^2 + |a1|^2 differs from 1 by > 1e-10.
StateVector exact_imperfect_state(const SpinHalfParams& params, double T, Complex a0, Complex a1,
                                  double s);

struct IntegratorOptions {
  /// Number of recorded samples including both ends; 0 records every step.
  std::size_t output_points = 2001;
  /// Upper bound on T * |H| * h, the phase advanced per step.
  double max_phase_step = 0.005;
  double min_steps_per_oscillation = 20.0;
  /// Exact step count; 0 derives it from the two bounds above.
  std::size_t steps = 0;
};

/// Largest T * |H| * h allowed before integration refuses to run.
inline constexpr double kMaxPhasePerStep = 0.3;

struct StepPlan {
  std::size_t steps = 0;
  double phase_rate = 0.0;      ///< T * max_s |H(s)|
  double phase_per_step = 0.0;  ///< phase_rate / steps
};

/// Chooses the RK4 step count for a run on [0, 1]. Throws StepTooLarge if the
/// resulting phase advance per step exceeds 0.3 rad.
StepPlan plan_steps(const HamiltonianFamily& family, double T, const IntegratorOptions& options);

/// Called at every integration node, including s = 0, with the normalized
/// state and H(s) at that node.
using EvolutionObserver =
    std::function<void(std::size_t step, double s, Eigen::Ref<const CVector> psi,
                       Eigen::Ref<const CMatrix> h)>;

struct EvolutionStats {
  std::size_t steps = 0;
  double max_norm_drift = 0.0;  ///< worst | |psi| - 1 | before renormalization
};

/// Classical RK4 on i d/ds psi = T H(s) psi over [s_begin, s_end] with a
/// fixed number of steps and renormalization after each step. Returns the
/// final state; `observer` may be empty.
CVector propagate(const HamiltonianFamily& family, double T, const CVector& psi0, double s_begin,
                  double s_end, std::size_t steps, const EvolutionObserver& observer = {},
                  EvolutionStats* stats = nullptr);

/// Integrates over [0, 1] with the plan from `options` and records
/// `options.output_points` evenly spaced samples.
SampledPath integrate_schrodinger(const HamiltonianFamily& family, double T, const StateVector& psi0,
                                  const IntegratorOptions& options = {},
                                  EvolutionStats* stats = nullptr);

/// e^{-i T int_0^s eps_n} e^{i gamma_n(s)} |eps_n(s)>, linear interpolation
/// between frame samples. Throws IndexOutOfRange for n >= dim.
StateVector adiabatic_reference_state(const EigenFrame& frame, double T, std::size_t n, double s);

/// sum_n a_n * adiabatic_reference_state(frame, T, n, s).
StateVector adiabatic_superposition(const EigenFrame& frame, double T,
                                    const ImperfectionSpec& amplitudes, double s);

}  // namespace geomphase
