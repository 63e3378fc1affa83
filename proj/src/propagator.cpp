#include "geomphase/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "geomphase/error.hpp"

namespace geomphase {

namespace {

struct SpinHalfKinematics {
  double omega;  // 2 pi / T
  double omega_bar;
  double c;      // cos(theta/2)
  double sn;     // sin(theta/2)
};

SpinHalfKinematics kinematics(const SpinHalfParams& params, double T) {
  params.validate();
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw Error(ErrorCode::InvalidArgument, "evolution time T must be positive");
  }
  const double w = kTwoPi / T;
  const double w0 = params.omega0;
  const double wbar = std::sqrt(w0 * w0 + 2.0 * w0 * w * std::cos(params.theta) + w * w);
  return {w, wbar, std::cos(params.theta / 2.0), std::sin(params.theta / 2.0)};
}

double grid_point(std::size_t k, std::size_t count) {
  return k + 1 == count ? 1.0 : static_cast<double>(k) / static_cast<double>(count - 1);
}

template <int N>
CVector propagate_impl(const HamiltonianFamily& family, double T, const CVector& psi0,
                       double s_begin, double s_end, std::size_t steps,
                       const EvolutionObserver& observer, EvolutionStats* stats) {
  using Mat = Eigen::Matrix<Complex, N, N>;
  using Vec = Eigen::Matrix<Complex, N, 1>;
  const Eigen::Index n = psi0.size();
  Mat h_begin(n, n);
  Mat h_mid(n, n);
  Mat h_end(n, n);
  Vec psi = psi0;
  Vec k1(n), k2(n), k3(n), k4(n), tmp(n);

  const Complex minus_i_t = -kI * T;
  const double span = s_end - s_begin;
  const double h = span / static_cast<double>(steps);
  double drift = 0.0;

  family.fill(std::clamp(s_begin, 0.0, 1.0), h_begin);
  if (observer) observer(0, s_begin, psi, h_begin);
  for (std::size_t j = 0; j < steps; ++j) {
    const double s_mid = s_begin + span * (static_cast<double>(j) + 0.5) / static_cast<double>(steps);
    const double s_next =
        j + 1 == steps ? s_end : s_begin + span * static_cast<double>(j + 1) / static_cast<double>(steps);
    family.fill(std::clamp(s_mid, 0.0, 1.0), h_mid);
    family.fill(std::clamp(s_next, 0.0, 1.0), h_end);

    k1.noalias() = h_begin * psi;
    k1 *= minus_i_t;
    tmp = psi + (0.5 * h) * k1;
    k2.noalias() = h_mid * tmp;
    k2 *= minus_i_t;
    tmp = psi + (0.5 * h) * k2;
    k3.noalias() = h_mid * tmp;
    k3 *= minus_i_t;
    tmp = psi + h * k3;
    k4.noalias() = h_end * tmp;
    k4 *= minus_i_t;
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double norm = psi.norm();
    drift = std::max(drift, std::abs(norm - 1.0));
    psi /= norm;
    h_begin.swap(h_end);
    if (observer) observer(j + 1, s_next, psi, h_begin);
  }
  if (stats) {
    stats->steps = steps;
    stats->max_norm_drift = drift;
  }
  return CVector(psi);
}

}  // namespace

ImperfectionSpec::ImperfectionSpec(std::vector<Complex> amplitudes)
    : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.empty()) {
    throw Error(ErrorCode::InvalidAmplitudes, "no amplitudes given");
  }
  double total = 0.0;
  for (const auto& a : amplitudes_) total += std::norm(a);
  if (!(std::abs(total - 1.0) <= kNormTolerance)) {
    throw Error(ErrorCode::InvalidAmplitudes,
                "sum |a_n|^2 = " + std::to_string(total) + " is not 1");
  }
}

ImperfectionSpec ImperfectionSpec::two_level(Complex a0, Complex a1, std::size_t dim) {
  if (dim < 2) {
    throw Error(ErrorCode::DimensionMismatch, "two_level needs dim >= 2");
  }
  std::vector<Complex> a(dim, Complex(0.0, 0.0));
  a[0] = a0;
  a[1] = a1;
  return ImperfectionSpec(std::move(a));
}

ImperfectionSpec gamma_scaled_amplitudes(double gamma, double T, std::size_t dim) {
  if (!(gamma >= 0.0) || !(T > 0.0) || gamma > T) {
    throw Error(ErrorCode::InvalidGamma, "Gamma = " + std::to_string(gamma) +
                                             " is not in [0, T] for T = " + std::to_string(T));
  }
  const double ratio = gamma / T;
  return ImperfectionSpec::two_level(std::sqrt(1.0 - ratio), std::sqrt(ratio), dim);
}

SampledPath::SampledPath(double T, std::vector<double> grid, CMatrix states, std::string label)
    : T_(T), grid_(std::move(grid)), states_(std::move(states)), label_(std::move(label)) {
  if (grid_.size() < 2 || static_cast<std::size_t>(states_.cols()) != grid_.size()) {
    throw Error(ErrorCode::InvalidArgument, "path needs >= 2 samples matching its grid");
  }
  if (grid_.front() != 0.0 || grid_.back() != 1.0) {
    throw Error(ErrorCode::InvalidArgument, "path grid must start at 0 and end at 1");
  }
  for (std::size_t k = 1; k < grid_.size(); ++k) {
    if (!(grid_[k] > grid_[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "path grid must be strictly increasing");
    }
  }
  for (Eigen::Index k = 0; k < states_.cols(); ++k) {
    const double norm = states_.col(k).norm();
    if (!(std::abs(norm - 1.0) <= kNormTolerance)) {
      throw Error(ErrorCode::InvalidArgument,
                  "path sample " + std::to_string(k) + " has norm " + std::to_string(norm));
    }
  }
}

void write_path_csv(std::ostream& out, const SampledPath& path) {
  out << "s";
  for (std::size_t n = 0; n < path.dim(); ++n) out << ",re_" << n << ",im_" << n;
  out << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < path.size(); ++k) {
    out << path.grid()[k];
    for (std::size_t n = 0; n < path.dim(); ++n) {
      const Complex z = path.states()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
      out << ',' << z.real() << ',' << z.imag();
    }
    out << '\n';
  }
}

SampledPath read_path_csv(std::istream& in, double T, std::string label) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::Io, "path CSV is empty");
  }
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 3 || (columns - 1) % 2 != 0) {
    throw Error(ErrorCode::Io, "path CSV header must be s,re_0,im_0,...");
  }
  const std::size_t dim = (columns - 1) / 2;
  std::vector<double> grid;
  std::vector<std::vector<Complex>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::Io, "cannot parse CSV cell '" + cell + "'");
      }
    }
    if (values.size() != columns) {
      throw Error(ErrorCode::Io, "CSV row has " + std::to_string(values.size()) + " cells");
    }
    grid.push_back(values[0]);
    std::vector<Complex> amps(dim);
    for (std::size_t n = 0; n < dim; ++n) amps[n] = Complex(values[1 + 2 * n], values[2 + 2 * n]);
    rows.push_back(std::move(amps));
  }
  CMatrix states(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t n = 0; n < dim; ++n) {
      states(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) = rows[k][n];
    }
  }
  return SampledPath(T, std::move(grid), std::move(states), std::move(label));
}

Eigen::Matrix2cd exact_spin_half_propagator(const SpinHalfParams& params, double T, double s) {
  const auto kin = kinematics(params, T);
  const double nx = params.omega0 * std::sin(params.theta) / kin.omega_bar;
  const double nz = (params.omega0 * std::cos(params.theta) + kin.omega) / kin.omega_bar;
  const double alpha = kin.omega_bar * T * s / 2.0;
  const double ca = std::cos(alpha);
  const double sa = std::sin(alpha);
  Eigen::Matrix2cd rotation;
  rotation << Complex(ca, sa * nz), Complex(0.0, sa * nx), Complex(0.0, sa * nx), Complex(ca, -sa * nz);
  Eigen::Matrix2cd frame = Eigen::Matrix2cd::Zero();
  frame(0, 0) = std::polar(1.0, -kPi * s);
  frame(1, 1) = std::polar(1.0, kPi * s);
  return frame * rotation;
}

StateVector exact_perfect_state(const SpinHalfParams& params, double T, double s) {
  return exact_imperfect_state(params, T, 1.0, 0.0, s);
}

StateVector exact_imperfect_state(const SpinHalfParams& params, double T, Complex a0, Complex a1,
                                  double s) {
  if (std::abs(std::norm(a0) + std::norm(a1) - 1.0) > 1e-10) {
    throw Error(ErrorCode::InvalidAmplitudes, "|a0|^2 + |a1|^2 must equal 1");
  }
  const auto kin = kinematics(params, T);
  const double w0 = params.omega0;
  const double alpha = kin.omega_bar * T * s / 2.0;
  const double ca = std::cos(alpha);
  const double sa = std::sin(alpha);
  const Complex down = std::polar(1.0, -kPi * s);
  const Complex up = std::polar(1.0, kPi * s);
  const double plus = (w0 + kin.omega) / kin.omega_bar;
  const double minus = (w0 - kin.omega) / kin.omega_bar;

  CVector psi(2);
  psi(0) = a0 * Complex(ca, plus * sa) * kin.c * down + a1 * Complex(ca, -minus * sa) * kin.sn * down;
  psi(1) = a0 * Complex(ca, minus * sa) * kin.sn * up - a1 * Complex(ca, -plus * sa) * kin.c * up;
  return StateVector(std::move(psi));
}

StepPlan plan_steps(const HamiltonianFamily& family, double T, const IntegratorOptions& options) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw Error(ErrorCode::InvalidArgument, "evolution time T must be positive");
  }
  if (options.output_points == 1) {
    throw Error(ErrorCode::InvalidArgument, "output_points must be 0 or >= 2");
  }
  const auto n = static_cast<Eigen::Index>(family.dim());
  CMatrix h(n, n);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(n);
  constexpr std::size_t kProbes = 129;
  double norm = 0.0;
  for (std::size_t k = 0; k < kProbes; ++k) {
    family.fill(grid_point(k, kProbes), h);
    solver.compute(h, Eigen::EigenvaluesOnly);
    norm = std::max(norm, solver.eigenvalues().cwiseAbs().maxCoeff());
  }
  StepPlan plan;
  plan.phase_rate = T * norm;
  std::size_t steps = options.steps;
  if (steps == 0) {
    if (!(options.max_phase_step > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "max_phase_step must be positive");
    }
    const double by_accuracy = std::ceil(plan.phase_rate / options.max_phase_step);
    const double by_oscillation =
        std::ceil(options.min_steps_per_oscillation * plan.phase_rate / kTwoPi);
    steps = static_cast<std::size_t>(std::max({by_accuracy, by_oscillation, 1.0}));
  }
  if (options.output_points >= 2) {
    const std::size_t intervals = options.output_points - 1;
    steps = ((steps + intervals - 1) / intervals) * intervals;
  }
  plan.steps = steps;
  plan.phase_per_step = plan.phase_rate / static_cast<double>(steps);
  if (plan.phase_per_step > kMaxPhasePerStep) {
    throw Error(ErrorCode::StepTooLarge, "phase advance per step " +
                                             std::to_string(plan.phase_per_step) + " exceeds 0.3 rad");
  }
  return plan;
}

CVector propagate(const HamiltonianFamily& family, double T, const CVector& psi0, double s_begin,
                  double s_end, std::size_t steps, const EvolutionObserver& observer,
                  EvolutionStats* stats) {
  if (static_cast<std::size_t>(psi0.size()) != family.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "initial state and family dimensions differ");
  }
  if (steps == 0) {
    throw Error(ErrorCode::InvalidArgument, "propagate needs at least one step");
  }
  if (!(s_begin >= 0.0 && s_end <= 1.0 && s_begin <= s_end)) {
    throw Error(ErrorCode::InvalidArgument, "propagation interval must lie in [0, 1]");
  }
  if (family.dim() == 2) {
    return propagate_impl<2>(family, T, psi0, s_begin, s_end, steps, observer, stats);
  }
  return propagate_impl<Eigen::Dynamic>(family, T, psi0, s_begin, s_end, steps, observer, stats);
}

SampledPath integrate_schrodinger(const HamiltonianFamily& family, double T, const StateVector& psi0,
                                  const IntegratorOptions& options, EvolutionStats* stats) {
  const StepPlan plan = plan_steps(family, T, options);
  const std::size_t samples = options.output_points == 0 ? plan.steps + 1 : options.output_points;
  const std::size_t stride = plan.steps / (samples - 1);
  CMatrix states(static_cast<Eigen::Index>(family.dim()), static_cast<Eigen::Index>(samples));
  auto record = [&](std::size_t step, double, Eigen::Ref<const CVector> psi, Eigen::Ref<const CMatrix>) {
    if (step % stride == 0) states.col(static_cast<Eigen::Index>(step / stride)) = psi;
  };
  propagate(family, T, psi0.amplitudes(), 0.0, 1.0, plan.steps, record, stats);
  std::vector<double> grid(samples);
  for (std::size_t k = 0; k < samples; ++k) grid[k] = grid_point(k, samples);
  return SampledPath(T, std::move(grid), std::move(states), family.label());
}

StateVector adiabatic_reference_state(const EigenFrame& frame, double T, std::size_t n, double s) {
  if (n >= frame.dim()) {
    throw Error(ErrorCode::IndexOutOfRange, "level " + std::to_string(n) + " out of range");
  }
  if (!(s >= 0.0 && s <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "s must lie in [0, 1]");
  }
  const auto& grid = frame.grid();
  auto hi = std::upper_bound(grid.begin(), grid.end(), s);
  if (hi == grid.end()) --hi;
  const auto k = static_cast<std::size_t>(std::distance(grid.begin(), hi)) - 1;
  const double width = grid[k + 1] - grid[k];
  const double w = (s - grid[k]) / width;

  double integral = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    integral += 0.5 * (grid[j + 1] - grid[j]) * (frame.energy(j, n) + frame.energy(j + 1, n));
  }
  const double eps_s = (1.0 - w) * frame.energy(k, n) + w * frame.energy(k + 1, n);
  integral += 0.5 * (s - grid[k]) * (frame.energy(k, n) + eps_s);
  const double gamma = (1.0 - w) * frame.berry(k, n) + w * frame.berry(k + 1, n);

  CVector v = (1.0 - w) * frame.vector(k, n) + w * frame.vector(k + 1, n);
  v.normalize();
  return StateVector(std::polar(1.0, gamma - T * integral) * v);
}

StateVector adiabatic_superposition(const EigenFrame& frame, double T,
                                    const ImperfectionSpec& amplitudes, double s) {
  if (amplitudes.size() != frame.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "amplitude count differs from frame dimension");
  }
  CVector sum = CVector::Zero(static_cast<Eigen::Index>(frame.dim()));
  for (std::size_t n = 0; n < frame.dim(); ++n) {
    if (amplitudes[n] == Complex(0.0, 0.0)) continue;
    sum += amplitudes[n] * adiabatic_reference_state(frame, T, n, s).amplitudes();
  }
  return StateVector::normalized(sum);
}

}  // namespace geomphase
