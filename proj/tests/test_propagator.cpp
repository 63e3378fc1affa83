#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "geomphase/error.hpp"
#include "geomphase/propagator.hpp"

using namespace geomphase;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

const SpinHalfParams kFig{kPi / 2.0, 5000.0};
const Complex kA0{std::sqrt(399.0 / 400.0), 0.0};
const Complex kA1{std::sqrt(1.0 / 400.0), 0.0};

double max_path_error(const SampledPath& path, const std::function<StateVector(double)>& exact) {
  double worst = 0.0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    worst = std::max(worst, (path.state(k) - exact(path.grid()[k]).amplitudes()).norm());
  }
  return worst;
}

CVector random_state(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g;
  CVector v(static_cast<Eigen::Index>(dim));
  for (auto& c : v) c = {g(rng), g(rng)};
  return v.normalized();
}

}  // namespace

TEST_CASE("closed-form propagator is unitary and starts at the identity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> th(0.0, kPi), w(100.0, 10000.0), t(0.01, 1.0), s(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const SpinHalfParams p{th(rng), w(rng)};
    const Eigen::Matrix2cd u = exact_spin_half_propagator(p, t(rng), s(rng));
    CHECK((u.adjoint() * u - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const Eigen::Matrix2cd id = exact_spin_half_propagator(kFig, 0.04, 0.0);
  CHECK((id - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("pole propagator is diagonal") {
  const SpinHalfParams p{0.0, 300.0};
  const double T = 0.07, s = 0.43;
  const double wbar = p.omega0 + kTwoPi / T;
  const double phase = kPi * s - wbar * T * s / 2.0;
  const Eigen::Matrix2cd u = exact_spin_half_propagator(p, T, s);
  CHECK(std::abs(u(0, 1)) < 1e-14);
  CHECK(std::abs(u(1, 0)) < 1e-14);
  CHECK(std::abs(u(0, 0) - std::polar(1.0, -phase)) < 1e-12);
  CHECK(std::abs(u(1, 1) - std::polar(1.0, phase)) < 1e-12);
}

TEST_CASE("closed-form states") {
  const auto start = exact_perfect_state({1.1, 5000.0}, 0.04, 0.0);
  CHECK(std::abs(start[0] - std::cos(0.55)) < 1e-15);
  CHECK(std::abs(start[1] - std::sin(0.55)) < 1e-15);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> s(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double si = s(rng);
    const auto perfect = exact_perfect_state(kFig, 0.04, si);
    const auto reduced = exact_imperfect_state(kFig, 0.04, 1.0, 0.0, si);
    CHECK((perfect.amplitudes() - reduced.amplitudes()).norm() < 1e-14);
    const auto orthogonal = exact_imperfect_state(kFig, 0.04, 0.0, 1.0, si);
    CHECK(std::abs(inner(perfect.amplitudes(), orthogonal.amplitudes())) < 1e-14);
    const auto imperfect = exact_imperfect_state(kFig, 0.04, kA0, kA1, si);
    CHECK(std::abs(std::abs(inner(perfect.amplitudes(), imperfect.amplitudes())) - std::abs(kA0)) < 1e-14);
  }
  CHECK(code_of([] { exact_imperfect_state(kFig, 0.04, 1.0, 0.1, 0.5); }) == ErrorCode::InvalidAmplitudes);
}

TEST_CASE("integrator reproduces the closed-form paths") {
  const auto family = spin_half_family(kFig);
  const double T = 0.04;
  EvolutionStats stats;
  const auto perfect = integrate_schrodinger(family, T, exact_perfect_state(kFig, T, 0.0), {}, &stats);
  CHECK(perfect.size() == 2001);
  CHECK(max_path_error(perfect, [&](double s) { return exact_perfect_state(kFig, T, s); }) <= 1e-8);
  CHECK(stats.max_norm_drift <= 1e-10);

  const auto imperfect = integrate_schrodinger(family, T, exact_imperfect_state(kFig, T, kA0, kA1, 0.0));
  CHECK(max_path_error(imperfect, [&](double s) { return exact_imperfect_state(kFig, T, kA0, kA1, s); }) <= 1e-8);
}

TEST_CASE("constant diagonal Hamiltonian gives a pure phase") {
  const double w0 = 5000.0;
  const HamiltonianFamily family(
      2,
      [w0](double, Eigen::Ref<CMatrix> out) {
        out.setZero();
        out(0, 0) = -w0 / 2.0;
        out(1, 1) = w0 / 2.0;
      },
      "diag");
  for (double T : {0.01, 0.04, 0.3}) {
    const auto path = integrate_schrodinger(family, T, StateVector(Eigen::Vector2cd(1.0, 0.0)));
    double worst = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k) {
      const Complex expected = std::polar(1.0, T * w0 * path.grid()[k] / 2.0);
      worst = std::max(worst, std::abs(path.state(k)(0) - expected) + std::abs(path.state(k)(1)));
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("fourth-order convergence") {
  const auto family = spin_half_family(kFig);
  const double T = 0.04;
  const CVector psi0 = exact_perfect_state(kFig, T, 0.0).amplitudes();
  const CVector exact = exact_perfect_state(kFig, T, 1.0).amplitudes();
  // one decade of step sizes: 400 .. 3200 steps, about 0.26 .. 0.03 rad per step
  std::vector<double> errors;
  for (std::size_t steps : {400, 800, 1600, 3200}) {
    errors.push_back((propagate(family, T, psi0, 0.0, 1.0, steps) - exact).norm());
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double ratio = errors[i] / errors[i + 1];
    CHECK(ratio > 13.0);
    CHECK(ratio < 19.0);
  }
}

TEST_CASE("restarting mid-way changes nothing") {
  const auto family = random_analytic_family(3, 21, 50.0);
  std::mt19937_64 rng(13);
  const CVector psi0 = random_state(rng, 3);
  const double T = 2.0;
  const CVector whole = propagate(family, T, psi0, 0.0, 1.0, 20000);
  const CVector half = propagate(family, T, psi0, 0.0, 0.3, 6000);
  const CVector joined = propagate(family, T, half, 0.3, 1.0, 14000);
  CHECK((whole - joined).norm() <= 1e-9);
}

TEST_CASE("overlaps are conserved along integrated paths") {
  std::mt19937_64 rng(14);
  const auto family = random_analytic_family(3, 22, 40.0);
  for (int trial = 0; trial < 3; ++trial) {
    const StateVector a(random_state(rng, 3));
    const StateVector b(random_state(rng, 3));
    const auto pa = integrate_schrodinger(family, 1.5, a);
    const auto pb = integrate_schrodinger(family, 1.5, b);
    const double first = std::abs(inner(pa.state(0), pb.state(0)));
    double worst = 0.0;
    for (std::size_t k = 0; k < pa.size(); ++k) {
      worst = std::max(worst, std::abs(std::abs(inner(pa.state(k), pb.state(k))) - first));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("integration is deterministic") {
  const auto family = random_analytic_family(3, 23);
  std::mt19937_64 rng(15);
  const StateVector psi0(random_state(rng, 3));
  const auto a = integrate_schrodinger(family, 30.0, psi0);
  const auto b = integrate_schrodinger(family, 30.0, psi0);
  CHECK((a.states() - b.states()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adiabatic reference states") {
  const EigenFrame frame = smooth_eigenframe(spin_half_family(kFig), 2001);
  const auto ground0 = adiabatic_reference_state(frame, 0.04, 0, 0.0);
  CHECK((ground0.amplitudes() - frame.vector(0, 0)).norm() < 1e-15);

  // adiabatic theorem: 1 - |<ref|psi>| is second order in 1/(omega0 T);
  // the measured coefficient is 2 pi^2 (sin theta = 1), frozen here at 25
  const auto amps = ImperfectionSpec::two_level(kA0, kA1);
  double previous = 1.0;
  for (double T : {0.04, 0.2, 1.0}) {
    const double wt = kFig.omega0 * T;
    double loss = 0.0, miss = 0.0;
    for (int k = 0; k <= 200; ++k) {
      const double s = k / 200.0;
      const auto ref = adiabatic_reference_state(frame, T, 0, s);
      loss = std::max(loss, 1.0 - std::abs(inner(ref.amplitudes(), exact_perfect_state(kFig, T, s).amplitudes())));
      const auto sup = adiabatic_superposition(frame, T, amps, s);
      miss = std::max(miss, (sup.amplitudes() - exact_imperfect_state(kFig, T, kA0, kA1, s).amplitudes()).norm());
    }
    CHECK(loss <= 25.0 / (wt * wt));
    CHECK(miss <= 20.0 / wt);
    CHECK(miss < previous);
    previous = miss;
  }
  CHECK(code_of([&] { adiabatic_reference_state(frame, 0.04, 2, 0.5); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("amplitude specifications") {
  CHECK(code_of([] { ImperfectionSpec({0.5, 0.5}); }) == ErrorCode::InvalidAmplitudes);
  const auto padded = ImperfectionSpec::two_level(kA0, kA1, 3);
  CHECK(padded.size() == 3);
  CHECK(padded[2] == Complex(0.0, 0.0));

  const auto g = gamma_scaled_amplitudes(0.1, 0.4);
  CHECK(g.weight(1) == doctest::Approx(0.25));
  CHECK(g.weight(0) == doctest::Approx(0.75));
  CHECK(code_of([] { gamma_scaled_amplitudes(0.5, 0.4); }) == ErrorCode::InvalidGamma);
  CHECK(code_of([] { gamma_scaled_amplitudes(-0.1, 0.4); }) == ErrorCode::InvalidGamma);
  CHECK(gamma_scaled_amplitudes(0.0, 0.4).weight(0) == 1.0);
}

TEST_CASE("step planning") {
  const auto family = spin_half_family(kFig);
  IntegratorOptions coarse;
  coarse.steps = 10;
  coarse.output_points = 0;
  CHECK(code_of([&] { plan_steps(family, 0.04, coarse); }) == ErrorCode::StepTooLarge);

  const StepPlan plan = plan_steps(family, 0.04, {});
  CHECK(plan.phase_per_step <= 0.005);
  CHECK(plan.steps % 2000 == 0);
  CHECK(code_of([&] { plan_steps(family, -1.0, {}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("path CSV round trip") {
  const auto family = spin_half_family(kFig);
  IntegratorOptions options;
  options.output_points = 51;
  const auto path = integrate_schrodinger(family, 0.04, exact_perfect_state(kFig, 0.04, 0.0), options);
  std::stringstream text;
  write_path_csv(text, path);
  const auto back = read_path_csv(text, 0.04);
  CHECK(back.size() == path.size());
  CHECK((back.states() - path.states()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(back.grid() == path.grid());

  std::istringstream junk("s,re_0,im_0\n0,abc,1\n");
  CHECK(code_of([&] { read_path_csv(junk, 1.0); }) == ErrorCode::Io);
}
