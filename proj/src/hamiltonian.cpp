#include "geomphase/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "geomphase/error.hpp"

namespace geomphase {

namespace {

void check_unit_interval(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "s = " + std::to_string(s) + " is outside [0, 1]");
  }
}

// Rotates v so its first non-negligible component is real and positive.
void canonicalize_phase(Eigen::Ref<CVector> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > 1e-6) {
      v *= std::conj(v(i)) / mag;
      return;
    }
  }
}

CMatrix random_hermitian(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(dim);
  CMatrix g(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      g(r, c) = Complex(normal(rng), normal(rng));
    }
  }
  return 0.5 * (g + g.adjoint());
}

CMatrix scaled_to_norm(const CMatrix& h, double norm) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  const double current = es.eigenvalues().cwiseAbs().maxCoeff();
  return current > 0.0 ? CMatrix(h * (norm / current)) : h;
}

}  // namespace

void SpinHalfParams::validate() const {
  if (!(theta >= 0.0 && theta <= kPi)) {
    throw Error(ErrorCode::InvalidArgument, "theta must lie in [0, pi]");
  }
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) {
    throw Error(ErrorCode::InvalidArgument, "omega0 must be positive and finite");
  }
}

HamiltonianFamily::HamiltonianFamily(std::size_t dim, Evaluator evaluator, std::string label)
    : dim_(dim), evaluator_(std::move(evaluator)), label_(std::move(label)) {
  if (dim_ < 2) {
    throw Error(ErrorCode::DimensionMismatch, "Hamiltonian family needs dimension >= 2");
  }
  if (!evaluator_) {
    throw Error(ErrorCode::InvalidArgument, "Hamiltonian family needs an evaluator");
  }
}

HermitianMatrix HamiltonianFamily::at(double s) const {
  check_unit_interval(s);
  const auto n = static_cast<Eigen::Index>(dim_);
  CMatrix m(n, n);
  evaluator_(s, m);
  return HermitianMatrix(std::move(m));
}

HermitianMatrix spin_half_hamiltonian(const SpinHalfParams& params, double s) {
  params.validate();
  return spin_half_family(params).at(s);
}

SpinHalfEigensystem spin_half_eigensystem(const SpinHalfParams& params, double s) {
  params.validate();
  const double c = std::cos(params.theta / 2.0);
  const double sn = std::sin(params.theta / 2.0);
  const Complex winding = std::polar(1.0, kTwoPi * s);
  SpinHalfEigensystem out{-params.omega0 / 2.0, CVector(2), params.omega0 / 2.0, CVector(2)};
  out.ground << c, sn * winding;
  out.excited << sn, -c * winding;
  return out;
}

HamiltonianFamily spin_half_family(const SpinHalfParams& params) {
  params.validate();
  const double half = params.omega0 / 2.0;
  const double st = std::sin(params.theta);
  const double ct = std::cos(params.theta);
  auto eval = [half, st, ct](double s, Eigen::Ref<CMatrix> out) {
    const Complex off = -half * st * std::polar(1.0, -kTwoPi * s);
    out(0, 0) = -half * ct;
    out(1, 1) = half * ct;
    out(0, 1) = off;
    out(1, 0) = std::conj(off);
  };
  std::ostringstream label;
  label << std::setprecision(17) << "spin_half(theta=" << params.theta
        << ",omega0=" << params.omega0 << ")";
  return HamiltonianFamily(2, eval, label.str());
}

HamiltonianFamily random_analytic_family(std::size_t dim, std::uint64_t seed, double scale,
                                         double coupling) {
  if (dim < 2) {
    throw Error(ErrorCode::DimensionMismatch, "random family needs dimension >= 2");
  }
  if (!(scale > 0.0) || !(coupling >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "random family needs scale > 0, coupling >= 0");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(dim);

  Eigen::VectorXd levels(n);
  for (Eigen::Index i = 0; i < n; ++i) levels(i) = scale * (static_cast<double>(i) + 0.4 * uniform(rng));

  // Haar-like basis from the QR factor of a complex Gaussian matrix.
  Eigen::HouseholderQR<CMatrix> qr(random_hermitian(dim, rng) + kI * random_hermitian(dim, rng));
  const CMatrix basis = qr.householderQ();
  const CMatrix h0 = basis * levels.cast<Complex>().asDiagonal() * basis.adjoint();
  const CMatrix h1 = scaled_to_norm(random_hermitian(dim, rng), coupling * scale);
  const CMatrix h2 = scaled_to_norm(random_hermitian(dim, rng), coupling * scale);

  auto eval = [h0, h1, h2](double s, Eigen::Ref<CMatrix> out) {
    const double c = std::cos(kTwoPi * s);
    const double sn = std::sin(kTwoPi * s);
    out = h0 + c * h1 + sn * h2;
    // Keep the sample exactly Hermitian despite rounding in the sum.
    out = 0.5 * (out + out.adjoint()).eval();
  };
  return HamiltonianFamily(dim, eval,
                           "random_analytic(dim=" + std::to_string(dim) +
                               ",seed=" + std::to_string(seed) + ")");
}

HamiltonianFamily sampled_family(std::vector<double> grid, std::vector<CMatrix> matrices,
                                 std::string label) {
  if (grid.size() < 2 || grid.size() != matrices.size()) {
    throw Error(ErrorCode::InvalidArgument, "sampled family needs >= 2 matching samples");
  }
  if (grid.front() != 0.0 || grid.back() != 1.0) {
    throw Error(ErrorCode::InvalidArgument, "sampled family grid must start at 0 and end at 1");
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "sampled family grid must be strictly increasing");
    }
  }
  const auto dim = static_cast<std::size_t>(matrices.front().rows());
  for (const auto& m : matrices) {
    if (static_cast<std::size_t>(m.rows()) != dim || static_cast<std::size_t>(m.cols()) != dim) {
      throw Error(ErrorCode::DimensionMismatch, "sampled matrices differ in shape");
    }
  }
  auto eval = [grid = std::move(grid), matrices = std::move(matrices)](double s,
                                                                       Eigen::Ref<CMatrix> out) {
    const double t = std::clamp(s, 0.0, 1.0);
    auto hi = std::upper_bound(grid.begin(), grid.end(), t);
    if (hi == grid.end()) --hi;
    const auto k = static_cast<std::size_t>(std::distance(grid.begin(), hi));
    const double w = (t - grid[k - 1]) / (grid[k] - grid[k - 1]);
    out = (1.0 - w) * matrices[k - 1] + w * matrices[k];
  };
  return HamiltonianFamily(dim, std::move(eval), std::move(label));
}

HamiltonianFamily read_sampled_family(std::istream& in, std::string label) {
  std::size_t dim = 0;
  std::size_t count = 0;
  if (!(in >> dim >> count) || dim < 2 || count < 2) {
    throw Error(ErrorCode::Io, "sampled family header must be 'N M' with N >= 2, M >= 2");
  }
  std::vector<double> grid;
  std::vector<CMatrix> matrices;
  grid.reserve(count);
  matrices.reserve(count);
  const auto n = static_cast<Eigen::Index>(dim);
  for (std::size_t k = 0; k < count; ++k) {
    double s = 0.0;
    if (!(in >> s)) {
      throw Error(ErrorCode::Io, "missing s value for block " + std::to_string(k));
    }
    CMatrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        std::string token;
        if (!(in >> token)) {
          throw Error(ErrorCode::Io, "truncated matrix in block " + std::to_string(k));
        }
        const auto comma = token.find(',');
        if (comma == std::string::npos) {
          throw Error(ErrorCode::Io, "entry '" + token + "' is not a re,im pair");
        }
        try {
          std::size_t used_re = 0;
          std::size_t used_im = 0;
          const std::string re_text = token.substr(0, comma);
          const std::string im_text = token.substr(comma + 1);
          const double re = std::stod(re_text, &used_re);
          const double im = std::stod(im_text, &used_im);
          if (used_re != re_text.size() || used_im != im_text.size()) throw std::invalid_argument(token);
          m(r, c) = Complex(re, im);
        } catch (const std::logic_error&) {
          throw Error(ErrorCode::Io, "cannot parse entry '" + token + "'");
        }
      }
    }
    grid.push_back(s);
    matrices.push_back(std::move(m));
  }
  return sampled_family(std::move(grid), std::move(matrices), std::move(label));
}

HamiltonianFamily load_sampled_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open sampled family file '" + path + "'");
  }
  return read_sampled_family(in, "sampled(" + path + ")");
}

void write_sampled_family(std::ostream& out, const HamiltonianFamily& family, std::size_t samples) {
  if (samples < 2) {
    throw Error(ErrorCode::InvalidArgument, "need at least 2 samples");
  }
  const auto n = static_cast<Eigen::Index>(family.dim());
  CMatrix m(n, n);
  out << family.dim() << ' ' << samples << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < samples; ++k) {
    const double s = k + 1 == samples ? 1.0 : static_cast<double>(k) / static_cast<double>(samples - 1);
    family.fill(s, m);
    out << s << '\n';
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        out << (c ? " " : "") << m(r, c).real() << ',' << m(r, c).imag();
      }
      out << '\n';
    }
  }
}

ValidationReport validate_family(const HamiltonianFamily& family, std::size_t grid_size,
                                 double gap_tol) {
  if (grid_size < 2) {
    throw Error(ErrorCode::InvalidArgument, "grid_size must be >= 2");
  }
  const auto n = static_cast<Eigen::Index>(family.dim());
  ValidationReport report;
  CMatrix h(n, n);
  CMatrix h_first(n, n);
  CMatrix h_last(n, n);
  family.fill(0.0, h_first);
  family.fill(1.0, h_last);
  report.cyclicity_defect = (h_first - h_last).cwiseAbs().maxCoeff();

  report.min_gap = std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(n);
  for (std::size_t k = 0; k < grid_size; ++k) {
    const double s = k + 1 == grid_size ? 1.0 : static_cast<double>(k) / static_cast<double>(grid_size - 1);
    family.fill(s, h);
    report.hermiticity_defect = std::max(report.hermiticity_defect, hermiticity_defect(h));
    solver.compute(h, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& eps = solver.eigenvalues();
    report.max_abs_energy = std::max(report.max_abs_energy, eps.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 1; i < n; ++i) {
      const double gap = eps(i) - eps(i - 1);
      if (gap < report.min_gap) {
        report.min_gap = gap;
        report.min_gap_at = s;
      }
    }
  }
  if (report.hermiticity_defect > kValidationHermiticityTolerance) {
    throw Error(ErrorCode::NonHermitianInput,
                "family '" + family.label() + "' has Hermiticity defect " +
                    std::to_string(report.hermiticity_defect));
  }
  report.gap_tol = gap_tol >= 0.0 ? gap_tol : 1e-6 * report.max_abs_energy;
  report.cyclic = report.cyclicity_defect <= kCyclicityTolerance;
  report.gapped = report.min_gap > report.gap_tol;
  return report;
}

std::vector<double> berry_accumulator(std::span<const double> grid,
                                      std::span<const CVector> vectors) {
  const std::size_t m = grid.size();
  if (m < 2 || vectors.size() != m) {
    throw Error(ErrorCode::InvalidArgument, "berry_accumulator needs matching grid and vectors");
  }
  std::vector<double> increment(m - 1);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    increment[k] = -principal_arg(inner(vectors[k], vectors[k + 1]));
  }
  // The overlap form is exact up to a local error e(s) h^3. Comparing each
  // pair of intervals with the single overlap spanning both estimates e and
  // removes it.
  for (std::size_t k = 0; k + 2 < m; k += 2) {
    const double h1 = grid[k + 1] - grid[k];
    const double h2 = grid[k + 2] - grid[k + 1];
    // fine minus coarse is the arg of a Bargmann invariant; taking it as one
    // principal value keeps the correction free of 2 pi slips in any gauge
    const Complex bargmann = inner(vectors[k], vectors[k + 1]) * inner(vectors[k + 1], vectors[k + 2]) *
                             inner(vectors[k + 2], vectors[k]);
    const double cubes = h1 * h1 * h1 + h2 * h2 * h2;
    const double span = h1 + h2;
    const double weight = cubes / (span * span * span - cubes);
    const double correction = -principal_arg(bargmann) * weight;
    increment[k] += correction * (h1 * h1 * h1 / cubes);
    increment[k + 1] += correction * (h2 * h2 * h2 / cubes);
  }
  std::vector<double> gamma(m, 0.0);
  for (std::size_t k = 1; k < m; ++k) gamma[k] = gamma[k - 1] + increment[k - 1];
  return gamma;
}

EigenFrame continue_gauge(std::vector<double> grid, Eigen::MatrixXd energies,
                          std::vector<CMatrix> vectors) {
  const std::size_t samples = grid.size();
  if (samples < 3 || vectors.size() != samples ||
      static_cast<std::size_t>(energies.rows()) != samples) {
    throw Error(ErrorCode::InvalidArgument, "eigenframe needs >= 3 consistent samples");
  }
  const Eigen::Index dim = energies.cols();
  for (const auto& v : vectors) {
    if (v.rows() != dim || v.cols() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "eigenvector block has the wrong shape");
    }
  }
  const double span = grid.back() - grid.front();

  EigenFrame frame;
  frame.berry_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(samples), dim);
  for (Eigen::Index n = 0; n < dim; ++n) {
    canonicalize_phase(vectors[0].col(n));

    // Berry phase in the "first component real" gauge. It only picks which
    // 2 pi representative the smooth gauge below reports.
    double canonical = 0.0;
    CVector prev = vectors[0].col(n);
    for (std::size_t k = 1; k < samples; ++k) {
      CVector cur = vectors[k].col(n);
      canonicalize_phase(cur);
      canonical -= principal_arg(inner(prev, cur));
      prev = std::move(cur);
    }

    for (std::size_t k = 1; k < samples; ++k) {
      const Complex ov = inner(vectors[k - 1].col(n), vectors[k].col(n));
      const double mag = std::abs(ov);
      if (mag < kContinuationOverlap) {
        throw Error(ErrorCode::GapTooSmall,
                    "continuation overlap " + std::to_string(mag) + " at s = " +
                        std::to_string(grid[k]) + " for level " + std::to_string(n));
      }
      vectors[k].col(n) *= std::conj(ov) / mag;
    }
    const Complex closure = inner(vectors[0].col(n), vectors[samples - 1].col(n));
    if (std::abs(closure) < kContinuationOverlap) {
      throw Error(ErrorCode::InvalidArgument, "eigenvector of level " + std::to_string(n) +
                                                  " does not return to itself at s = 1");
    }
    const double holonomy = principal_arg(closure);
    const double twist = holonomy + kTwoPi * std::round((canonical - holonomy) / kTwoPi);
    for (std::size_t k = 0; k < samples; ++k) {
      vectors[k].col(n) *= std::polar(1.0, -twist * (grid[k] - grid.front()) / span);
    }

    std::vector<CVector> level(samples);
    for (std::size_t k = 0; k < samples; ++k) level[k] = vectors[k].col(n);
    const auto gamma = berry_accumulator(grid, level);
    for (std::size_t k = 0; k < samples; ++k) frame.berry_(static_cast<Eigen::Index>(k), n) = gamma[k];
    frame.gauge_defect_ =
        std::max(frame.gauge_defect_, (level.back() - level.front()).norm());
  }

  frame.min_gap_ = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < energies.rows(); ++k) {
    for (Eigen::Index n = 1; n < dim; ++n) {
      frame.min_gap_ = std::min(frame.min_gap_, energies(k, n) - energies(k, n - 1));
    }
  }
  frame.grid_ = std::move(grid);
  frame.energies_ = std::move(energies);
  frame.vectors_ = std::move(vectors);
  return frame;
}

EigenFrame smooth_eigenframe(const HamiltonianFamily& family, std::size_t grid_size) {
  if (grid_size < 3) {
    throw Error(ErrorCode::InvalidArgument, "eigenframe grid_size must be >= 3");
  }
  const auto n = static_cast<Eigen::Index>(family.dim());
  std::vector<double> grid(grid_size);
  Eigen::MatrixXd energies(static_cast<Eigen::Index>(grid_size), n);
  std::vector<CMatrix> vectors(grid_size);
  CMatrix h(n, n);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(n);
  double residual = 0.0;
  for (std::size_t k = 0; k < grid_size; ++k) {
    const double s = k + 1 == grid_size ? 1.0 : static_cast<double>(k) / static_cast<double>(grid_size - 1);
    grid[k] = s;
    family.fill(s, h);
    solver.compute(h);
    energies.row(static_cast<Eigen::Index>(k)) = solver.eigenvalues().transpose();
    vectors[k] = solver.eigenvectors();
    const CMatrix r = h * vectors[k] - vectors[k] * solver.eigenvalues().cast<Complex>().asDiagonal();
    residual = std::max(residual, r.colwise().norm().maxCoeff());
  }
  EigenFrame frame = continue_gauge(std::move(grid), std::move(energies), std::move(vectors));
  frame.max_residual_ = residual;
  return frame;
}

double berry_phase(const EigenFrame& frame, std::size_t n) {
  if (n >= frame.dim()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "level " + std::to_string(n) + " out of range for dimension " + std::to_string(frame.dim()));
  }
  return frame.berry(frame.samples() - 1, n);
}

}  // namespace geomphase
