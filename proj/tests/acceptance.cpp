// One line per acceptance criterion. Tolerances are fixed here and not
// taken from any config; a failing line makes the process exit non-zero.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "geomphase/bloch.hpp"
#include "geomphase/experiments.hpp"
#include "geomphase/phase.hpp"

using namespace geomphase;

namespace {

constexpr double kTolPropagator = 1e-8;
constexpr double kTolClosedForm = 1e-6;
constexpr double kTolNearPi = 0.05;
constexpr double kTolCoverageGap = 0.5;
constexpr double kTolFidelity = 1e-9;
constexpr double kTolKeySpinHalf = 0.15;
constexpr double kKeyMargin = 0.02;  // added to the offset bound for N = 3
constexpr double kTolGammaLimit = 0.1;
constexpr double kMinAdiabaticFidelity = 1.0 - 1e-3;
constexpr double kTolLatitude = 1e-6;
constexpr double kTolSolidPerfect = 0.05;
constexpr double kTolSolidImperfect = 0.15;
constexpr double kRemainderRatio = 1.0 / 3.0;
constexpr double kTolGauge = 1e-12;
constexpr double kTolReparam = 1e-6;
constexpr double kTolUnitary = 1e-12;

const SpinHalfParams kFig{kPi / 2.0, 5000.0};
const Complex kA0{std::sqrt(399.0 / 400.0), 0.0};
const Complex kA1{std::sqrt(1.0 / 400.0), 0.0};

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail, double seconds) {
  std::printf("[%s] %d %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string num(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

struct Outcome {
  bool pass;
  std::string detail;
};

void run(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(id, name, o.pass, o.detail, secs);
}

double path_error(const SampledPath& path, const std::function<StateVector(double)>& exact) {
  double worst = 0.0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    worst = std::max(worst, (path.state(k) - exact(path.grid()[k]).amplitudes()).norm());
  }
  return worst;
}

Outcome propagator_exactness() {
  const auto family = spin_half_family(kFig);
  const double T = 0.04;
  const auto p = integrate_schrodinger(family, T, exact_perfect_state(kFig, T, 0.0));
  const auto q = integrate_schrodinger(family, T, exact_imperfect_state(kFig, T, kA0, kA1, 0.0));
  const double ep = path_error(p, [&](double s) { return exact_perfect_state(kFig, T, s); });
  const double eq = path_error(q, [&](double s) { return exact_imperfect_state(kFig, T, kA0, kA1, s); });
  return {ep <= kTolPropagator && eq <= kTolPropagator,
          "max error perfect " + num(ep) + ", imperfect " + num(eq) + " over " + std::to_string(p.size()) +
              " points (tol " + num(kTolPropagator) + ")"};
}

Outcome closed_form_agreement() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> th(0.1, kPi - 0.1), w(1000.0, 10000.0), t(0.01, 1.0), ph(-kPi, kPi),
      u(0.0, 1.0);
  double worst_p = 0.0, worst_i = 0.0;
  for (int i = 0; i < 100; ++i) {
    const SpinHalfParams p{th(rng), w(rng)};
    const double T = t(rng);
    const double r = std::sqrt(u(rng));
    const Complex a0 = std::polar(std::sqrt(1.0 - r * r), ph(rng));
    const Complex a1 = std::polar(r, ph(rng));
    const auto family = spin_half_family(p);
    const auto gp = numeric_geometric_phase(family, T, exact_perfect_state(p, T, 0.0));
    const auto gi = numeric_geometric_phase(family, T, exact_imperfect_state(p, T, a0, a1, 0.0));
    worst_p = std::max(worst_p, phase_distance(gp.geometric_phase_wrapped, exact_gp_perfect(p, T)));
    worst_i = std::max(worst_i, phase_distance(gi.geometric_phase_wrapped, exact_gp_imperfect(p, T, a0, a1)));
  }
  return {worst_p <= kTolClosedForm && worst_i <= kTolClosedForm,
          "100 random sets, worst gap perfect " + num(worst_p) + ", imperfect " + num(worst_i) + " (tol " +
              num(kTolClosedForm) + ")"};
}

Outcome dichotomy() {
  auto config = default_config(Experiment::Fig1);
  config.numeric = false;  // the closed forms are checked against the integrator in criterion 2
  const auto rows = run_fig1(config);
  double worst = 0.0;
  std::vector<double> attained;
  for (const auto& r : rows) {
    if (kFig.omega0 * r.T >= 2000.0 - 1e-9) worst = std::max(worst, phase_distance(r.gp_perfect_exact, kPi));
    attained.push_back(r.gp_imperfect_exact);
  }
  std::sort(attained.begin(), attained.end());
  double gap = attained.front() + kTwoPi - attained.back();  // around the circle
  for (std::size_t i = 1; i < attained.size(); ++i) gap = std::max(gap, attained[i] - attained[i - 1]);
  return {worst <= kTolNearPi && gap <= kTolCoverageGap,
          std::to_string(rows.size()) + " rows; perfect max |gp - pi| " + num(worst) + " (tol " + num(kTolNearPi) +
              "), imperfect max coverage gap " + num(gap) + " (tol " + num(kTolCoverageGap) + ")"};
}

Outcome fidelity_constancy() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> t(0.04, 0.5);
  const auto family = spin_half_family(kFig);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double T = t(rng);
    const auto p = integrate_schrodinger(family, T, exact_perfect_state(kFig, T, 0.0));
    const auto q = integrate_schrodinger(family, T, exact_imperfect_state(kFig, T, kA0, kA1, 0.0));
    for (std::size_t k = 0; k < p.size(); ++k) {
      worst = std::max(worst, std::abs(std::abs(inner(p.state(k), q.state(k))) - std::sqrt(399.0 / 400.0)));
    }
  }
  return {worst <= kTolFidelity, "10 random T in [0.04, 0.5], max | |<psi|psi'>| - 0.998749 | " + num(worst) +
                                     " (tol " + num(kTolFidelity) + ")"};
}

Outcome key_formula() {
  // spin half at omega0 T = 1e4
  const double T = 1e4 / kFig.omega0;
  const EigenFrame frame = smooth_eigenframe(spin_half_family(kFig), 2001);
  const auto amps = ImperfectionSpec::two_level(kA0, kA1);
  const double key = key_formula_prediction(EnergyProfile(frame), amps, berry_phase(frame, 0), T).wrapped;
  const double spin = phase_distance(exact_gp_imperfect(kFig, T, kA0, kA1), key);

  // seeded three-level family, tolerance = offset bound + margin
  auto config = default_config(Experiment::Verify);
  config.model.kind = ModelKind::RandomAnalytic;
  config.model.dim = 3;
  const auto family = make_family(config.model);
  const EigenFrame f3 = smooth_eigenframe(family, 2001);
  const auto a3 = battery_amplitudes(config, 3);
  const double tol3 = key_formula_offset_bound(f3, a3) + kKeyMargin;
  const double t0 = battery_time_scale(f3);
  CVector mixed = CVector::Zero(3);
  for (Eigen::Index n = 0; n < 3; ++n) mixed += a3[static_cast<std::size_t>(n)] * f3.vectors(0).col(n);
  const EnergyProfile profile(f3);
  const double berry0 = berry_phase(f3, 0);
  std::string trend;
  double worst3 = 0.0;
  for (double f : {10.0, 25.0, 50.0}) {
    const double gp = numeric_geometric_phase(family, f * t0, StateVector::normalized(mixed)).geometric_phase_wrapped;
    const double d = phase_distance(gp, key_formula_prediction(profile, a3, berry0, f * t0).wrapped);
    worst3 = std::max(worst3, d);
    trend += (trend.empty() ? "" : "/") + num(d);
  }
  return {spin <= kTolKeySpinHalf && worst3 <= tol3,
          "spin-half deviation " + num(spin) + " at omega0 T = 1e4 (tol " + num(kTolKeySpinHalf) +
              "); N=3 deviation " + trend + " at 10/25/50 t0 (tol " + num(tol3) + ")"};
}

Outcome gamma_limits() {
  const auto family = spin_half_family(kFig);
  const double T = default_config(Experiment::Fig2).sweep.t_max;
  auto probe = default_config(Experiment::Fig1);
  const EigenFrame frame = smooth_eigenframe(family, 2001);
  bool pass = true;
  std::string detail = "T = " + num(T);
  std::vector<double> limits;
  for (double g : {kPi / 2.0, kPi, 1.5 * kPi}) {
    const double gamma = g / kFig.omega0;
    const auto amps = gamma_scaled_amplitudes(gamma, T);
    const auto eig = spin_half_eigensystem(kFig, 0.0);
    const StateVector psi0 = StateVector::normalized(amps[0] * eig.ground + amps[1] * eig.excited);
    const auto run = numeric_pipeline(family, T, psi0, probe.integrator, &frame, 0);
    const double limit = gamma_limit(kFig, gamma);
    const double d = phase_distance(run.phase.geometric_phase_wrapped, limit);
    pass = pass && d <= kTolGammaLimit && run.min_fidelity > kMinAdiabaticFidelity;
    limits.push_back(limit);
    detail += "; Gw0 = " + num(g) + ": |gp - limit| " + num(d) + ", fidelity " + num(run.min_fidelity);
  }
  double separation = kPi;
  for (std::size_t i = 0; i < limits.size(); ++i) {
    for (std::size_t j = i + 1; j < limits.size(); ++j) separation = std::min(separation, phase_distance(limits[i], limits[j]));
  }
  pass = pass && separation > 2.0 * kTolGammaLimit;
  return {pass, detail + " (tol " + num(kTolGammaLimit) + ", fidelity > " + num(kMinAdiabaticFidelity) +
                    "); limits at least " + num(separation) + " apart"};
}

Outcome solid_angles() {
  double worst_lat = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double theta = 0.05 + (kPi - 0.1) * i / 19.0;
    std::vector<BlochPoint> pts;
    std::vector<double> s;
    for (int k = 0; k <= 10000; ++k) {
      const double u = k / 10000.0;
      pts.push_back({std::sin(theta) * std::cos(kTwoPi * u), std::sin(theta) * std::sin(kTwoPi * u), std::cos(theta)});
      s.push_back(u);
    }
    const double omega = solid_angle(BlochPath(pts, s), Closure::AlreadyClosed).omega;
    worst_lat = std::max(worst_lat, std::abs(omega - kTwoPi * (1.0 - std::cos(theta))));
  }

  const auto family = spin_half_family(kFig);
  double worst_perfect = 0.0;
  for (double T : {0.4, 1.0, 4.0}) {
    const auto path = integrate_schrodinger(family, T, exact_perfect_state(kFig, T, 0.0));
    const double gp = gp_from_solid_angle(solid_angle(bloch_path(path), Closure::GeodesicClose).omega);
    worst_perfect = std::max(worst_perfect, phase_distance(gp, exact_gp_perfect(kFig, T)));
  }

  const auto fig3 = run_fig3(default_config(Experiment::Fig3));
  const double prime = phase_distance(fig3.gp_from_omega_prime, fig3.gp_imperfect_exact);
  const double measured = phase_distance(fig3.imperfect_report.gp_corrected, fig3.gp_imperfect_exact);
  return {worst_lat <= kTolLatitude && worst_perfect <= kTolSolidPerfect && prime <= kTolSolidImperfect,
          "latitude max error " + num(worst_lat) + " (tol " + num(kTolLatitude) + "); perfect path " +
              num(worst_perfect) + " at omega0 T = 2000..20000 (tol " + num(kTolSolidPerfect) + "); fig3 Omega' " +
              num(prime) + " (tol " + num(kTolSolidImperfect) + ", from the imperfect curve's own Omega: " +
              num(measured) + ")"};
}

Outcome remainder_decay() {
  const std::vector<double> factors{1.0, 1.37, 1.81, 2.33, 2.9};
  double base = 0.0, later = 0.0, worst = 0.0;
  auto config = default_config(Experiment::Verify);
  config.model.kind = ModelKind::RandomAnalytic;
  config.model.dim = 3;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    config.model.seed = seed;
    const auto family = make_family(config.model);
    const EigenFrame probe = smooth_eigenframe(family, 2001);
    const double t0 = battery_time_scale(probe);
    const EigenFrame frame =
        smooth_eigenframe(family, remainder_frame_size(probe, 32.0 * factors.back() * t0, 2001));
    const auto amps = battery_amplitudes(config, 3);
    double b = 0.0, l = 0.0;
    for (double f : factors) {
      b += std::abs(oscillatory_remainder(frame, amps, f * t0));
      l += std::abs(oscillatory_remainder(frame, amps, 32.0 * f * t0));
    }
    base += b;
    later += l;
    worst = std::max(worst, l / b);
  }
  const double ratio = later / base;
  return {ratio <= kRemainderRatio, "mean |R(32T)| / mean |R(T)| over 5 families " + num(ratio) +
                                        " (tol " + num(kRemainderRatio) + "; worst family " + num(worst) + ")"};
}

Outcome properties() {
  std::vector<std::string> failed;
  std::string detail;

  // gauge invariance of the discrete functional
  {
    const auto path = integrate_schrodinger(spin_half_family(kFig), 0.04, exact_imperfect_state(kFig, 0.04, kA0, kA1, 0.0));
    std::mt19937_64 rng(91);
    std::uniform_real_distribution<double> chi(-kPi, kPi);
    double worst = 0.0;
    const double ref = geometric_phase_pancharatnam(path).geometric_phase_wrapped;
    for (int trial = 0; trial < 10; ++trial) {
      CMatrix g = path.states();
      const double c0 = chi(rng);
      for (Eigen::Index k = 0; k < g.cols(); ++k) g.col(k) *= std::polar(1.0, (k == 0 || k + 1 == g.cols()) ? c0 : chi(rng));
      worst = std::max(worst, phase_distance(geometric_phase_pancharatnam(SampledPath(0.04, path.grid(), g, "g"))
                                                 .geometric_phase_wrapped,
                                             ref));
    }
    if (worst > kTolGauge) failed.push_back("gauge");
    detail += "gauge " + num(worst);
  }
  // reparameterization
  {
    std::vector<double> grid(4001), warped(4001);
    CMatrix a(2, 4001), b(2, 4001);
    for (int k = 0; k <= 4000; ++k) {
      grid[k] = k / 4000.0;
      warped[k] = grid[k] + 0.12 * std::sin(kTwoPi * grid[k]) / kTwoPi;
    }
    warped.back() = 1.0;
    for (int k = 0; k <= 4000; ++k) {
      a.col(k) = exact_imperfect_state(kFig, 0.04, kA0, kA1, grid[k]).amplitudes();
      b.col(k) = exact_imperfect_state(kFig, 0.04, kA0, kA1, warped[k]).amplitudes();
    }
    const double d = phase_distance(geometric_phase_pancharatnam(SampledPath(0.04, grid, a, "a")).geometric_phase_wrapped,
                                    geometric_phase_pancharatnam(SampledPath(0.04, grid, b, "b")).geometric_phase_wrapped);
    if (d > kTolReparam) failed.push_back("reparameterization");
    detail += ", reparameterization " + num(d);
  }
  // unitarity
  {
    std::mt19937_64 rng(92);
    std::uniform_real_distribution<double> th(0.0, kPi), w(100.0, 10000.0), t(0.01, 1.0), s(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Eigen::Matrix2cd u = exact_spin_half_propagator({th(rng), w(rng)}, t(rng), s(rng));
      worst = std::max(worst, (u.adjoint() * u - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff());
    }
    if (worst > kTolUnitary) failed.push_back("unitarity");
    detail += ", unitarity " + num(worst);
  }
  // fourth order over a decade of step sizes
  {
    const auto family = spin_half_family(kFig);
    const CVector psi0 = exact_perfect_state(kFig, 0.04, 0.0).amplitudes();
    const CVector exact = exact_perfect_state(kFig, 0.04, 1.0).amplitudes();
    std::vector<double> e;
    for (std::size_t steps : {400, 800, 1600, 3200}) e.push_back((propagate(family, 0.04, psi0, 0.0, 1.0, steps) - exact).norm());
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 0; i + 1 < e.size(); ++i) {
      lo = std::min(lo, e[i] / e[i + 1]);
      hi = std::max(hi, e[i] / e[i + 1]);
    }
    if (lo < 13.0 || hi > 19.0) failed.push_back("convergence order");
    detail += ", halving ratios " + num(lo) + ".." + num(hi);
  }
  // determinism of sweeps across worker counts
  {
    auto config = default_config(Experiment::Fig1);
    config.sweep = {0.4, 0.6, 6, Spacing::Linear};
    auto csv = [&](std::size_t jobs) {
      config.jobs = jobs;
      std::ostringstream out;
      write_sweep_header(out);
      run_fig1(config, [&](const SweepRow& r) { write_sweep_row(out, r); });
      return out.str();
    };
    const bool same = csv(1) == csv(2) && csv(1) == csv(3);
    if (!same) failed.push_back("determinism");
    detail += same ? ", sweeps byte-identical" : ", sweeps differ";
  }
  std::string failing;
  for (const auto& f : failed) failing += " " + f;
  return {failed.empty(), detail + (failed.empty() ? "" : "; failing:" + failing)};
}

}  // namespace

int main() {
  run(1, "propagator exactness", propagator_exactness);
  run(2, "closed-form agreement", closed_form_agreement);
  run(3, "fig1 dichotomy", dichotomy);
  run(4, "pointwise closeness", fidelity_constancy);
  run(5, "key formula", key_formula);
  run(6, "Gamma limits", gamma_limits);
  run(7, "solid-angle laws", solid_angles);
  run(8, "remainder decay", remainder_decay);
  run(9, "property suites", properties);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
