#include "geomphase/phase.hpp"

#include <algorithm>
#include <cmath>

#include "geomphase/error.hpp"

namespace geomphase {

namespace {

// Neumaier summation; the dynamical term sums millions of O(omega0) values.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

PhaseReport finish(Complex end_overlap, double dynamical, PhaseMethod method) {
  PhaseReport r;
  r.method = method;
  r.dynamical_term = dynamical;
  if (std::abs(end_overlap) < kIllConditionedOverlap) {
    r.ill_conditioned_arg = true;
    r.total_phase = 0.0;
  } else {
    r.total_phase = principal_arg(end_overlap);
  }
  r.geometric_phase_raw = r.total_phase + r.dynamical_term;
  r.geometric_phase_wrapped = wrap_phase(r.geometric_phase_raw);
  return r;
}

double energy_scale(const HamiltonianFamily& family) {
  const auto n = static_cast<Eigen::Index>(family.dim());
  CMatrix h(n, n);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(n);
  constexpr int kProbes = 17;
  double scale = 0.0;
  for (int k = 0; k < kProbes; ++k) {
    family.fill(static_cast<double>(k) / (kProbes - 1), h);
    solver.compute(h, Eigen::EigenvaluesOnly);
    scale = std::max(scale, solver.eigenvalues().cwiseAbs().maxCoeff());
  }
  return scale;
}

void check_time(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw Error(ErrorCode::InvalidArgument, "evolution time T must be positive");
  }
}

struct SpinHalfTerms {
  double w;
  double wbar;
  double sin_wt;   // sin(wbar T)
  double half;     // wbar T / 2
  double shape;    // 1 - w^2 sin^2 theta / wbar^2 (1 - sin(wbar T)/(wbar T))
};

SpinHalfTerms spin_half_terms(const SpinHalfParams& params, double T) {
  params.validate();
  check_time(T);
  const double w = kTwoPi / T;
  const double w0 = params.omega0;
  const double wbar = std::sqrt(w0 * w0 + 2.0 * w0 * w * std::cos(params.theta) + w * w);
  const double st = std::sin(params.theta);
  const double x = wbar * T;
  const double shape = 1.0 - (w * w * st * st) / (wbar * wbar) * (1.0 - std::sin(x) / x);
  return {w, wbar, std::sin(x), x / 2.0, shape};
}

}  // namespace

double wrap_phase(double x) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::NonFinite, "cannot wrap a non-finite phase");
  }
  double r = x - kTwoPi * std::floor(x / kTwoPi);
  // floor can round so that r lands exactly on 2 pi
  if (r >= kTwoPi) r -= kTwoPi;
  if (r < 0.0) r = 0.0;
  return r;
}

double phase_distance(double a, double b) {
  const double d = wrap_phase(a - b);
  return std::min(d, kTwoPi - d);
}

std::string_view to_string(PhaseMethod method) {
  switch (method) {
    case PhaseMethod::ContinuousLineIntegral: return "continuous";
    case PhaseMethod::PancharatnamDiscrete: return "pancharatnam";
    case PhaseMethod::ExactClosedForm: return "exact";
    case PhaseMethod::Approximation: return "approximation";
  }
  return "unknown";
}

PhaseReport geometric_phase_continuous(const SampledPath& path, const HamiltonianFamily& family) {
  if (path.dim() != family.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "path and family dimensions differ");
  }
  const auto n = static_cast<Eigen::Index>(family.dim());
  const double limit = 0.1 * energy_scale(family);
  const auto& grid = path.grid();
  CMatrix h(n, n);
  std::vector<double> e(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    family.fill(grid[k], h);
    const auto psi = path.states().col(static_cast<Eigen::Index>(k));
    e[k] = psi.dot(h * psi).real();
    if (!std::isfinite(e[k])) {
      throw Error(ErrorCode::NonFinite, "non-finite energy along the path");
    }
    if (k > 0 && std::abs(e[k] - e[k - 1]) > limit) {
      throw Error(ErrorCode::GridTooCoarse,
                  "<psi|H|psi> jumps by " + std::to_string(std::abs(e[k] - e[k - 1])) +
                      " near s = " + std::to_string(grid[k]));
    }
  }
  CompensatedSum integral;
  for (std::size_t k = 1; k < e.size(); ++k) {
    integral.add(0.5 * (grid[k] - grid[k - 1]) * (e[k] + e[k - 1]));
  }
  const Complex overlap = inner(path.state(0), path.state(path.size() - 1));
  return finish(overlap, path.T() * integral.value(), PhaseMethod::ContinuousLineIntegral);
}

PhaseReport geometric_phase_pancharatnam(const SampledPath& path, DiscreteCorrection correction) {
  const auto& states = path.states();
  const auto& grid = path.grid();
  const Eigen::Index last = states.cols() - 1;
  std::vector<double> step(static_cast<std::size_t>(last));
  for (Eigen::Index k = 0; k < last; ++k) {
    const Complex ov = states.col(k).dot(states.col(k + 1));
    if (std::abs(ov) <= 0.1) {
      throw Error(ErrorCode::OrthogonalNeighbors,
                  "|<psi_k|psi_k+1>| = " + std::to_string(std::abs(ov)) + " at k = " + std::to_string(k));
    }
    step[static_cast<std::size_t>(k)] = principal_arg(ov);
  }
  CompensatedSum sum;
  for (double a : step) sum.add(a);
  if (correction == DiscreteCorrection::Richardson) {
    for (Eigen::Index k = 0; k + 2 <= last; k += 2) {
      const Complex coarse_ov = states.col(k).dot(states.col(k + 2));
      if (std::abs(coarse_ov) <= 0.1) continue;  // too coarse to extrapolate this pair
      const auto i = static_cast<std::size_t>(k);
      const Complex bargmann = states.col(k).dot(states.col(k + 1)) * states.col(k + 1).dot(states.col(k + 2)) *
                               std::conj(coarse_ov);
      const double l1 = grid[i + 1] - grid[i];
      const double l2 = grid[i + 2] - grid[i + 1];
      const double cubes = l1 * l1 * l1 + l2 * l2 * l2;
      const double span = l1 + l2;
      sum.add(principal_arg(bargmann) * cubes / (span * span * span - cubes));
    }
  }
  const Complex overlap = states.col(0).dot(states.col(last));
  return finish(overlap, -sum.value(), PhaseMethod::PancharatnamDiscrete);
}

NumericRun numeric_pipeline(const HamiltonianFamily& family, double T, const StateVector& psi0,
                            IntegratorOptions options, const EigenFrame* reference, std::size_t level) {
  if (reference && (reference->dim() != family.dim() || level >= reference->dim())) {
    throw Error(ErrorCode::IndexOutOfRange, "reference frame does not match the family");
  }
  options.output_points = 0;
  const StepPlan plan = plan_steps(family, T, options);
  const double h = 1.0 / static_cast<double>(plan.steps);
  const std::size_t probe_stride = std::max<std::size_t>(1, plan.steps / 4000);
  NumericRun run;
  CompensatedSum energy;
  double first = 0.0;
  double last = 0.0;
  auto observe = [&](std::size_t step, double s, Eigen::Ref<const CVector> psi,
                     Eigen::Ref<const CMatrix> ham) {
    const double e = psi.dot(ham * psi).real();
    if (step == 0) first = e;
    last = e;
    energy.add(e);
    if (reference && (step % probe_stride == 0 || step == plan.steps)) {
      const auto& grid = reference->grid();
      auto hi = std::upper_bound(grid.begin(), grid.end(), s);
      if (hi == grid.end()) --hi;
      const auto k = static_cast<std::size_t>(std::distance(grid.begin(), hi)) - 1;
      const double w = (s - grid[k]) / (grid[k + 1] - grid[k]);
      const CVector v = ((1.0 - w) * reference->vector(k, level) + w * reference->vector(k + 1, level)).normalized();
      run.min_fidelity = std::min(run.min_fidelity, std::abs(v.dot(psi)));
    }
  };
  const CVector end =
      propagate(family, T, psi0.amplitudes(), 0.0, 1.0, plan.steps, observe, &run.stats);
  const double trapezoid = h * (energy.value() - 0.5 * (first + last));
  run.phase = finish(inner(psi0.amplitudes(), end), T * trapezoid, PhaseMethod::ContinuousLineIntegral);
  return run;
}

PhaseReport numeric_geometric_phase(const HamiltonianFamily& family, double T, const StateVector& psi0,
                                    IntegratorOptions options) {
  return numeric_pipeline(family, T, psi0, options).phase;
}

EnergyProfile::EnergyProfile(std::vector<double> grid, Eigen::MatrixXd energies)
    : grid_(std::move(grid)), energies_(std::move(energies)) {
  if (grid_.size() < 2 || static_cast<std::size_t>(energies_.rows()) != grid_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "energy table does not match its grid");
  }
  accumulated_ = Eigen::MatrixXd::Zero(energies_.rows(), energies_.cols());
  for (Eigen::Index n = 0; n < energies_.cols(); ++n) {
    CompensatedSum sum;
    for (std::size_t k = 1; k < grid_.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(k);
      sum.add(0.5 * (grid_[k] - grid_[k - 1]) * (energies_(r, n) + energies_(r - 1, n)));
      accumulated_(r, n) = sum.value();
    }
  }
}

EnergyProfile::EnergyProfile(const EigenFrame& frame) : EnergyProfile(frame.grid(), frame.energies()) {}

KeyFormulaPrediction key_formula_prediction(const EnergyProfile& profile,
                                            const ImperfectionSpec& amplitudes, double berry0,
                                            double T) {
  check_time(T);
  if (amplitudes.size() != profile.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "amplitude count differs from the number of levels");
  }
  KeyFormulaPrediction p;
  for (std::size_t n = 1; n < amplitudes.size(); ++n) {
    p.correction += amplitudes.weight(n) * T * profile.delta_total(n, 0);
  }
  p.unwrapped = berry0 + p.correction;
  p.wrapped = wrap_phase(p.unwrapped);
  p.weak_ground_weight = amplitudes.weight(0) < 0.9;
  return p;
}

double exact_gp_perfect(const SpinHalfParams& params, double T) {
  return exact_gp_imperfect(params, T, 1.0, 0.0);
}

double exact_gp_imperfect(const SpinHalfParams& params, double T, Complex a0, Complex a1) {
  if (std::abs(std::norm(a0) + std::norm(a1) - 1.0) > 1e-10) {
    throw Error(ErrorCode::InvalidAmplitudes, "|a0|^2 + |a1|^2 must equal 1");
  }
  const auto t = spin_half_terms(params, T);
  const double w0 = params.omega0;
  const double st = std::sin(params.theta);
  const double ct = std::cos(params.theta);
  const Complex x = std::conj(a0) * a1;
  const double d = std::norm(a0) - std::norm(a1);
  const double sh = std::sin(t.half);

  const Complex overlap(-std::cos(t.half),
                        -(2.0 * x.real() * t.w * st + d * (w0 + t.w * ct)) / t.wbar * sh);
  const double dynamical = -w0 * T / 2.0 * d * t.shape;
  const double x_T = t.wbar * T;
  const double cross = -kTwoPi * w0 * st / t.wbar *
                       (x.real() * (w0 + t.w * ct) / t.wbar * (1.0 - t.sin_wt / x_T) -
                        x.imag() * (1.0 - std::cos(x_T)) / x_T);
  return wrap_phase(principal_arg(overlap) + dynamical + cross);
}

PhaseValue approx_gp_perfect(const SpinHalfParams& params) {
  params.validate();
  const double v = -kPi * (1.0 - std::cos(params.theta));
  return {v, wrap_phase(v)};
}

PhaseValue approx_gp_imperfect(const SpinHalfParams& params, double T, double a1mag2) {
  check_time(T);
  if (!(a1mag2 >= 0.0 && a1mag2 <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "|a1|^2 must lie in [0, 1]");
  }
  const double v = approx_gp_perfect(params).unwrapped + a1mag2 * T * params.omega0;
  return {v, wrap_phase(v)};
}

double gamma_limit(const SpinHalfParams& params, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::InvalidGamma, "Gamma must be finite and non-negative");
  }
  return wrap_phase(approx_gp_perfect(params).unwrapped + gamma * params.omega0);
}

Complex oscillatory_remainder(const EigenFrame& frame, const ImperfectionSpec& amplitudes, double T) {
  // T = 0 is allowed here: the integral is then purely geometric
  if (!(T >= 0.0) || !std::isfinite(T)) {
    throw Error(ErrorCode::InvalidArgument, "evolution time T must be non-negative");
  }
  if (amplitudes.size() != frame.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "amplitude count differs from frame dimension");
  }
  const EnergyProfile profile(frame);
  const auto& grid = frame.grid();
  Complex total(0.0, 0.0);
  for (std::size_t m = 0; m < frame.dim(); ++m) {
    for (std::size_t n = 0; n < frame.dim(); ++n) {
      const Complex weight = std::conj(amplitudes[m]) * amplitudes[n];
      if (m == n || weight == Complex(0.0, 0.0)) continue;
      auto phase = [&](std::size_t k) {
        return T * profile.delta(m, n, k) + frame.berry(k, n) - frame.berry(k, m);
      };
      Complex sum(0.0, 0.0);
      double prev = phase(0);
      for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double next = phase(k + 1);
        const double advance = next - prev;
        if (std::abs(advance) > kMaxRemainderPhasePerInterval) {
          throw Error(ErrorCode::GridTooCoarse,
                      "remainder phase advances " + std::to_string(advance) +
                          " rad over one frame interval; use a finer frame");
        }
        const CVector vm = 0.5 * (frame.vector(k, m) + frame.vector(k + 1, m));
        const CVector dv = frame.vector(k + 1, n) - frame.vector(k, n);
        const Complex coupling = vm.dot(dv);
        // exact integral of e^{i phi} with phi linear across the interval
        const double half = 0.5 * advance;
        const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
        sum += coupling * std::polar(sinc, 0.5 * (prev + next));
        prev = next;
      }
      total += weight * sum;
    }
  }
  return total;
}

double coupling_integral(const EigenFrame& frame, std::size_t m, std::size_t n) {
  if (m >= frame.dim() || n >= frame.dim()) {
    throw Error(ErrorCode::IndexOutOfRange, "level index out of range");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < frame.samples(); ++k) {
    const CVector vm = 0.5 * (frame.vector(k, m) + frame.vector(k + 1, m));
    const CVector dv = frame.vector(k + 1, n) - frame.vector(k, n);
    sum += std::abs(vm.dot(dv));
  }
  return sum;
}

double key_formula_offset_bound(const EigenFrame& frame, const ImperfectionSpec& amplitudes) {
  if (amplitudes.size() != frame.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "amplitude count differs from frame dimension");
  }
  double bound = 0.0;
  for (std::size_t n = 1; n < frame.dim(); ++n) {
    bound += 2.0 * std::abs(amplitudes[0]) * std::abs(amplitudes[n]) * coupling_integral(frame, n, 0) +
             amplitudes.weight(n);
  }
  return bound;
}

}  // namespace geomphase
