#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "geomphase/error.hpp"
#include "geomphase/hamiltonian.hpp"
#include "geomphase/phase.hpp"

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

HamiltonianFamily diagonal_family(std::function<double(double)> f, std::string label) {
  return HamiltonianFamily(
      2,
      [f](double s, Eigen::Ref<CMatrix> out) {
        out.setZero();
        out(0, 0) = f(s);
        out(1, 1) = -f(s);
      },
      std::move(label));
}

}  // namespace

TEST_CASE("spin-half Hamiltonian special cases") {
  const auto pole = spin_half_hamiltonian({0.0, 2.0}, 0.37).matrix();
  CHECK(max_abs_difference(pole, Eigen::Vector2cd(-1.0, 1.0).asDiagonal().toDenseMatrix()) < 1e-15);

  const auto equator = spin_half_hamiltonian({kPi / 2.0, 2.0}, 0.0).matrix();
  CHECK(std::abs(equator(0, 1) - Complex(-1.0, 0.0)) < 1e-15);
  CHECK(std::abs(equator(1, 0) - Complex(-1.0, 0.0)) < 1e-15);
  CHECK(std::abs(equator(0, 0)) < 1e-15);

  // -2500 sigma_y written out by hand
  CMatrix expected(2, 2);
  expected << 0.0, Complex(0.0, 2500.0), Complex(0.0, -2500.0), 0.0;
  CHECK(max_abs_difference(spin_half_hamiltonian({kPi / 2.0, 5000.0}, 0.25).matrix(), expected) < 1e-9);
}

TEST_CASE("trace and spectrum over random parameters") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> th(0.0, kPi), w(1.0, 10000.0), s(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const SpinHalfParams p{th(rng), w(rng)};
    const CMatrix h = spin_half_hamiltonian(p, s(rng)).matrix();
    CHECK(hermiticity_defect(h) == 0.0);
    CHECK(std::abs(h.trace()) < 1e-12 * p.omega0);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    CHECK(std::abs(es.eigenvalues()(0) + p.omega0 / 2.0) < 1e-12 * p.omega0);
    CHECK(std::abs(es.eigenvalues()(1) - p.omega0 / 2.0) < 1e-12 * p.omega0);
  }
}

TEST_CASE("closed-form eigenpairs") {
  const auto pole = spin_half_eigensystem({0.0, 7.0}, 0.61);
  CHECK(std::abs(pole.ground(0) - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(pole.ground(1)) < 1e-15);
  CHECK(pole.ground_energy == -3.5);

  const auto eq = spin_half_eigensystem({kPi / 2.0, 5000.0}, 0.0);
  CHECK(eq.ground_energy == -2500.0);
  CHECK(std::abs(eq.ground(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(eq.ground(1) - 1.0 / std::sqrt(2.0)) < 1e-15);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> th(0.0, kPi), s(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const SpinHalfParams p{th(rng), 5000.0};
    const double si = s(rng);
    const auto e = spin_half_eigensystem(p, si);
    const CMatrix h = spin_half_hamiltonian(p, si).matrix();
    // rounding in H itself is ~1e-16 * omega0
    CHECK((h * e.ground - e.ground_energy * e.ground).norm() <= 1e-12 * p.omega0);
    CHECK((h * e.excited - e.excited_energy * e.excited).norm() <= 1e-12 * p.omega0);
    CHECK(std::abs(inner(e.ground, e.excited)) < 1e-15);
    CHECK(std::abs(e.ground.norm() - 1.0) < 1e-15);
  }
}

TEST_CASE("parameter and input validation") {
  CHECK(code_of([] { SpinHalfParams{-0.1, 1.0}.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { SpinHalfParams{1.0, 0.0}.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { spin_half_family({kPi / 2, 1.0}).at(1.5); }) == ErrorCode::InvalidArgument);

  CMatrix bad(2, 2);
  bad << 1.0, 2.0, 3.0, 1.0;
  CHECK(code_of([&] { HermitianMatrix{bad}; }) == ErrorCode::NonHermitianInput);
  CHECK(code_of([] { HermitianMatrix{CMatrix::Zero(2, 3)}; }) == ErrorCode::DimensionMismatch);

  const HamiltonianFamily skew(
      2, [](double, Eigen::Ref<CMatrix> out) { out << 0.0, 1.0, 0.5, 0.0; }, "skew");
  CHECK(code_of([&] { validate_family(skew, 11); }) == ErrorCode::NonHermitianInput);
}

TEST_CASE("validate_family") {
  const auto ok = validate_family(spin_half_family({kPi / 2.0, 5000.0}));
  CHECK(ok.passed());
  CHECK(ok.min_gap == doctest::Approx(5000.0).epsilon(1e-12));

  const auto degenerate = validate_family(diagonal_family([](double s) { return std::cos(kTwoPi * s); }, "cos"));
  CHECK_FALSE(degenerate.gapped);
  CHECK(degenerate.cyclic);
  CHECK(degenerate.min_gap < 1e-9);
  CHECK(std::min(std::abs(degenerate.min_gap_at - 0.25), std::abs(degenerate.min_gap_at - 0.75)) < 1e-12);

  const auto open = validate_family(diagonal_family([](double s) { return 1.0 + s; }, "ramp"));
  CHECK_FALSE(open.cyclic);
  CHECK(open.gapped);
  CHECK(open.cyclicity_defect == doctest::Approx(1.0));
}

TEST_CASE("Berry phases of the spin-half frame") {
  for (double theta : {0.0, 0.4, kPi / 3.0, kPi / 2.0, 2.5}) {
    const EigenFrame frame = smooth_eigenframe(spin_half_family({theta, 5000.0}), 2001);
    CHECK(phase_distance(berry_phase(frame, 0), -kPi * (1.0 - std::cos(theta))) < 1e-9);
    CHECK(phase_distance(berry_phase(frame, 1), -kPi * (1.0 + std::cos(theta))) < 1e-9);
    // both levels wind once with opposite weights
    CHECK(phase_distance(berry_phase(frame, 0) + berry_phase(frame, 1), 0.0) < 1e-9);
    CHECK(frame.gauge_defect() < 1e-12);
  }
  const EigenFrame eq = smooth_eigenframe(spin_half_family({kPi / 2.0, 5000.0}), 2001);
  CHECK(phase_distance(berry_phase(eq, 0), kPi) < 1e-9);
  CHECK(code_of([&] { berry_phase(eq, 2); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("Berry phase is grid independent") {
  const auto family = spin_half_family({kPi / 3.0, 5000.0});
  const double coarse = berry_phase(smooth_eigenframe(family, 501), 0);
  const double fine = berry_phase(smooth_eigenframe(family, 2001), 0);
  CHECK(std::abs(coarse - fine) <= 1e-6);
}

TEST_CASE("constant eigenvectors carry no Berry phase") {
  const EigenFrame frame = smooth_eigenframe(
      diagonal_family([](double s) { return 2.0 + std::sin(kTwoPi * s); }, "breathing"), 301);
  CHECK(std::abs(berry_phase(frame, 0)) < 1e-14);
  CHECK(std::abs(berry_phase(frame, 1)) < 1e-14);
}

TEST_CASE("gauge continuation is idempotent") {
  const EigenFrame frame = smooth_eigenframe(random_analytic_family(3, 5), 1001);
  const EigenFrame again = continue_gauge(frame.grid(), frame.energies(), frame.all_vectors());
  double worst = 0.0;
  for (std::size_t k = 0; k < frame.samples(); ++k) {
    worst = std::max(worst, max_abs_difference(frame.vectors(k), again.vectors(k)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("Berry phase is gauge invariant") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> amp(-2.0, 2.0);
  const EigenFrame frame = smooth_eigenframe(random_analytic_family(3, 9), 2001);
  for (int trial = 0; trial < 5; ++trial) {
    const double c1 = amp(rng), c2 = amp(rng), c3 = amp(rng);
    // smooth and periodic, so chi(0) == chi(1)
    auto chi = [&](double s) {
      return c1 * std::sin(kTwoPi * s) + c2 * (1.0 - std::cos(2.0 * kTwoPi * s)) + c3 * std::sin(3.0 * kTwoPi * s);
    };
    for (std::size_t n = 0; n < 3; ++n) {
      std::vector<CVector> v;
      for (std::size_t k = 0; k < frame.samples(); ++k) {
        v.push_back(std::polar(1.0, chi(frame.grid()[k])) * frame.vector(k, n));
      }
      const auto gamma = berry_accumulator(frame.grid(), v);
      CHECK(std::abs(gamma.back() - berry_phase(frame, n)) < 1e-9);
    }
  }
}

TEST_CASE("random analytic family") {
  const auto a = random_analytic_family(4, 42);
  const auto b = random_analytic_family(4, 42);
  const auto c = random_analytic_family(4, 43);
  CHECK(max_abs_difference(a.at(0.3).matrix(), b.at(0.3).matrix()) == 0.0);
  CHECK(max_abs_difference(a.at(0.3).matrix(), c.at(0.3).matrix()) > 1e-3);
  CHECK(max_abs_difference(a.at(0.0).matrix(), a.at(1.0).matrix()) < 1e-12);
  CHECK(validate_family(a).passed());
}

TEST_CASE("sampled family file round trip") {
  const auto family = random_analytic_family(3, 8);
  std::stringstream text;
  write_sampled_family(text, family, 101);
  const auto loaded = read_sampled_family(text);
  CHECK(loaded.dim() == 3);
  for (int k = 0; k <= 100; k += 7) {
    const double s = k / 100.0;
    CHECK(max_abs_difference(loaded.at(s).matrix(), family.at(s).matrix()) < 1e-14);
  }
  // halfway between samples the interpolant is the entrywise mean
  const CMatrix mid = 0.5 * (family.at(0.3).matrix() + family.at(0.31).matrix());
  CHECK(max_abs_difference(loaded.at(0.305).matrix(), mid) < 1e-12);

  std::istringstream truncated("2 3\n0\n1,0 0,0\n0,0 -1,0\n");
  CHECK(code_of([&] { read_sampled_family(truncated); }) == ErrorCode::Io);
  CHECK(code_of([] { load_sampled_family("/nonexistent/family.txt"); }) == ErrorCode::Io);
}
