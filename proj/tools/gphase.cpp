// gphase: command-line driver for the geometric-phase experiments.
//
// Exit codes: 0 ok, 1 family validation failed, 2 a numerical check failed,
// 3 I/O or configuration problem.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geomphase/error.hpp"
#include "geomphase/experiments.hpp"
#include "geomphase/plot.hpp"

namespace {

using namespace geomphase;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitBattery = 2;
constexpr int kExitIo = 3;

// Largest gap between circularly adjacent values in [0, 2 pi).
double coverage_gap(std::vector<double> v) {
  if (v.empty()) return kTwoPi;
  std::sort(v.begin(), v.end());
  double gap = v.front() + kTwoPi - v.back();
  for (std::size_t i = 1; i < v.size(); ++i) gap = std::max(gap, v[i] - v[i - 1]);
  return gap;
}

struct CommonFlags {
  std::string config;
  std::string out;
  std::size_t grid_size = 0;
  std::size_t jobs = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool plot = false;
  bool no_numeric = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "JSON config file");
  app->add_option("--out", f.out, "output path prefix");
  app->add_option("--grid-size", f.grid_size, "samples per path / frame");
  app->add_option("--jobs", f.jobs, "worker threads for sweeps");
  app->add_option("--seed", f.seed, "seed for randomized batteries")->each([&f](const std::string&) {
    f.seed_set = true;
  });
  app->add_flag("--plot", f.plot, "also write SVG figures");
}

ExperimentConfig resolve(Experiment kind, const CommonFlags& f) {
  ExperimentConfig c = default_config(kind);
  if (!f.config.empty()) apply_config_file(c, f.config);
  if (!f.out.empty()) c.output = f.out;
  if (f.grid_size) c.grid_size = f.grid_size;
  if (f.jobs) c.jobs = f.jobs;
  if (f.seed_set) c.seed = f.seed;
  if (f.plot) c.plot = true;
  if (f.no_numeric) c.numeric = false;
  c.validate(kind);
  return c;
}

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + parent.string() + "'");
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  return out;
}

void save_config(const ExperimentConfig& c) { open_out(c.output + "_config.json") << config_to_json(c) << '\n'; }

int run_fig1_cmd(const CommonFlags& flags) {
  const auto c = resolve(Experiment::Fig1, flags);
  save_config(c);
  auto csv = open_out(c.output + ".csv");
  write_sweep_header(csv);
  const auto rows = run_fig1(c, [&](const SweepRow& r) {
    write_sweep_row(csv, r);
    csv.flush();
  });

  double numeric_gap = 0.0;
  double perfect_dev = 0.0;
  std::vector<double> imperfect;
  for (const auto& r : rows) {
    if (c.numeric) {
      numeric_gap = std::max({numeric_gap, phase_distance(r.gp_perfect_numeric, r.gp_perfect_exact),
                              phase_distance(r.gp_imperfect_numeric, r.gp_imperfect_exact)});
    }
    if (c.model.spin_half.omega0 * r.T >= 2000.0) {
      perfect_dev = std::max(perfect_dev, phase_distance(r.gp_perfect_exact, kPi));
    }
    imperfect.push_back(r.gp_imperfect_exact);
  }
  std::cout << "fig1: " << rows.size() << " rows -> " << c.output << ".csv\n"
            << "  perfect GP max |. - pi| (omega0 T >= 2000): " << perfect_dev << '\n'
            << "  imperfect GP widest uncovered arc: " << coverage_gap(imperfect) << '\n';
  if (c.plot) {
    ScatterSeries red{"perfect (exact)", "#d62728", false, {}, {}};
    ScatterSeries blue{"imperfect (exact)", "#1f77b4", true, {}, {}};
    for (const auto& r : rows) {
      red.x.push_back(r.T);
      red.y.push_back(r.gp_perfect_exact);
      blue.x.push_back(r.T);
      blue.y.push_back(r.gp_imperfect_exact);
    }
    auto svg = open_out(c.output + ".svg");
    write_phase_svg(svg, "geometric phase vs T", "T (us)", {red, blue});
  }
  if (c.numeric) {
    std::cout << "  numeric vs closed form, max wrapped gap: " << numeric_gap << " (limit 1e-6)\n";
    if (!(numeric_gap <= 1e-6)) return kExitBattery;
  }
  return kExitOk;
}

int run_fig2_cmd(const CommonFlags& flags) {
  const auto c = resolve(Experiment::Fig2, flags);
  save_config(c);
  std::vector<std::ofstream> files;
  for (std::size_t g = 0; g < c.amplitudes.gammas.size(); ++g) {
    files.push_back(open_out(c.output + "_gamma" + std::to_string(g) + ".csv"));
    write_sweep_header(files.back());
  }
  const auto sweeps = run_fig2(c, [&](std::size_t g, const SweepRow& r) {
    write_sweep_row(files[g], r);
    files[g].flush();
  });

  auto limits = open_out(c.output + "_limits.csv");
  limits << "gamma,gamma_omega0,limit,T_last,gp_last_exact,gp_last_numeric,distance,adiabatic_fidelity\n"
         << std::setprecision(17);
  std::cout << "fig2: " << sweeps.size() << " Gamma sweeps -> " << c.output << "_gamma*.csv\n";
  for (const auto& s : sweeps) {
    const auto& last = s.rows.back();
    const double d = phase_distance(last.gp_imperfect_exact, s.limit);
    limits << s.gamma << ',' << s.gamma * c.model.spin_half.omega0 << ',' << s.limit << ',' << last.T << ','
           << last.gp_imperfect_exact << ',' << last.gp_imperfect_numeric << ',' << d << ','
           << s.adiabatic_fidelity.back() << '\n';
    std::cout << "  Gamma omega0 = " << s.gamma * c.model.spin_half.omega0 << ": limit " << s.limit
              << ", GP at T = " << last.T << " is " << last.gp_imperfect_exact << " (distance " << d
              << "), fidelity to adiabatic path " << s.adiabatic_fidelity.back() << '\n';
  }
  if (c.plot) {
    const char* colors[] = {"#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::vector<ScatterSeries> series;
    for (std::size_t g = 0; g < sweeps.size(); ++g) {
      std::ostringstream label;
      label << "Gamma omega0 = " << std::setprecision(4) << sweeps[g].gamma * c.model.spin_half.omega0;
      ScatterSeries s{label.str(), colors[g % 5], g % 2 == 1, {}, {}};
      for (const auto& r : sweeps[g].rows) {
        s.x.push_back(std::log10(r.T));
        s.y.push_back(r.gp_imperfect_exact);
      }
      series.push_back(std::move(s));
    }
    auto svg = open_out(c.output + ".svg");
    write_phase_svg(svg, "Gamma-scaled imperfection", "log10 T (us)", series);
  }
  return kExitOk;
}

int run_fig3_cmd(const CommonFlags& flags) {
  const auto c = resolve(Experiment::Fig3, flags);
  save_config(c);
  const auto r = run_fig3(c);
  auto emit = [&](const std::string& suffix, const BlochPath& p) {
    auto out = open_out(c.output + suffix);
    write_bloch_csv(out, p);
  };
  emit("_perfect.csv", r.perfect);
  emit("_imperfect.csv", r.imperfect);
  emit("_adiabatic.csv", r.adiabatic);

  auto report = [](const SolidAngleReport& s) {
    return nlohmann::json{{"omega", s.omega},
                          {"crossings", s.crossings},
                          {"omega_corrected", s.omega_corrected},
                          {"gp_predicted", s.gp_predicted},
                          {"gp_corrected", s.gp_corrected},
                          {"reference_pole", s.reference == ReferencePole::North ? "north" : "south"},
                          {"pole_proximity", s.pole_proximity}};
  };
  nlohmann::json summary{{"T", c.fig3_T},
                         {"perfect", report(r.perfect_report)},
                         {"imperfect", report(r.imperfect_report)},
                         {"omega_adiabatic", r.omega_adiabatic},
                         {"omega_prime", r.omega_prime},
                         {"gp_from_omega_prime", r.gp_from_omega_prime},
                         {"gp_perfect_exact", r.gp_perfect_exact},
                         {"gp_imperfect_exact", r.gp_imperfect_exact},
                         {"loop_estimate", r.loop_estimate}};
  open_out(c.output + "_summary.json") << std::setprecision(17) << summary.dump(2) << '\n';

  std::cout << "fig3 at T = " << c.fig3_T << " us\n"
            << "  perfect:   crossings " << r.perfect_report.crossings << ", Omega " << r.perfect_report.omega
            << ", -Omega/2 " << r.perfect_report.gp_predicted << " vs exact " << r.gp_perfect_exact << '\n'
            << "  imperfect: crossings " << r.imperfect_report.crossings << " (omega0 T / 2 pi = "
            << r.loop_estimate << "), Omega " << r.imperfect_report.omega << ", -Omega/2 "
            << r.imperfect_report.gp_predicted << " vs exact " << r.gp_imperfect_exact << '\n'
            << "  Omega' = " << r.omega_prime << " from the adiabatic circle, -Omega'/2 = "
            << r.gp_from_omega_prime << " (distance " << phase_distance(r.gp_from_omega_prime, r.gp_imperfect_exact)
            << ")\n";
  if (c.plot) {
    auto svg = open_out(c.output + ".svg");
    write_bloch_svg(svg, "Bloch curves", {{"adiabatic", "#7f7f7f", &r.adiabatic},
                                          {"perfect", "#d62728", &r.perfect},
                                          {"imperfect", "#1f77b4", &r.imperfect}});
  }
  return kExitOk;
}

void print_validation(const ValidationReport& v) {
  std::cout << "  cyclicity defect   " << v.cyclicity_defect << (v.cyclic ? "  ok" : "  FAIL") << '\n'
            << "  hermiticity defect " << v.hermiticity_defect << '\n'
            << "  min gap            " << v.min_gap << " at s = " << v.min_gap_at << " (tol " << v.gap_tol << ")"
            << (v.gapped ? "  ok" : "  FAIL") << '\n';
}

int run_verify_cmd(const CommonFlags& flags) {
  const auto c = resolve(Experiment::Verify, flags);
  const auto r = run_verify(c);
  std::cout << "family validation\n";
  print_validation(r.validation);
  nlohmann::json j{{"validated", r.validated}, {"passed", r.passed()}, {"checks", nlohmann::json::array()}};
  if (!r.validated) {
    std::cout << "validation failed; battery not run\n";
    open_out(c.output + ".json") << j.dump(2) << '\n';
    return kExitValidation;
  }
  std::cout << "battery\n";
  for (const auto& k : r.checks) {
    std::cout << "  [" << (k.passed ? "PASS" : "FAIL") << "] " << std::left << std::setw(28) << k.name
              << std::right << " measured " << std::setprecision(4) << k.measured << " limit " << k.threshold
              << "  " << k.detail << '\n';
    j["checks"].push_back({{"name", k.name},
                           {"passed", k.passed},
                           {"measured", k.measured},
                           {"threshold", k.threshold},
                           {"detail", k.detail}});
  }
  open_out(c.output + ".json") << j.dump(2) << '\n';
  return r.passed() ? kExitOk : kExitBattery;
}

int run_validate_cmd(const CommonFlags& flags, const std::string& family_file, double gap_tol) {
  auto c = resolve(Experiment::ValidateFamily, flags);
  if (!family_file.empty()) {
    c.model.kind = ModelKind::SampledFamily;
    c.model.file = family_file;
  }
  const auto family = make_family(c.model);
  const auto v = validate_family(family, c.grid_size, gap_tol);
  std::cout << "family '" << family.label() << "' (N = " << family.dim() << ")\n";
  print_validation(v);
  std::cout << (v.passed() ? "valid\n" : "invalid\n");
  return v.passed() ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric phases of adiabatic evolutions with imperfect initial states"};
  app.require_subcommand(1);

  CommonFlags f1, f2, f3, fv, fval;
  auto* fig1 = app.add_subcommand("fig1", "T-sweep of perfect and imperfect geometric phases");
  add_common(fig1, f1);
  fig1->add_flag("--no-numeric", f1.no_numeric, "closed forms only (skip the integrator)");
  auto* fig2 = app.add_subcommand("fig2", "Gamma-scaled imperfection sweeps and their limits");
  add_common(fig2, f2);
  fig2->add_flag("--no-numeric", f2.no_numeric, "closed forms only (skip the integrator)");
  auto* fig3 = app.add_subcommand("fig3", "Bloch curves, crossings and solid angles");
  add_common(fig3, f3);
  auto* verify = app.add_subcommand("verify", "property battery on a family");
  add_common(verify, fv);
  auto* validate = app.add_subcommand("validate-family", "check cyclicity, Hermiticity and gaps");
  add_common(validate, fval);
  std::string family_file;
  double gap_tol = -1.0;
  validate->add_option("--family", family_file, "sampled family file (overrides the config model)");
  validate->add_option("--gap-tol", gap_tol, "minimum allowed gap; default 1e-6 max|eps|");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitIo;
  }

  try {
    if (*fig1) return run_fig1_cmd(f1);
    if (*fig2) return run_fig2_cmd(f2);
    if (*fig3) return run_fig3_cmd(f3);
    if (*verify) return run_verify_cmd(fv);
    if (*validate) return run_validate_cmd(fval, family_file, gap_tol);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::Io:
      case ErrorCode::Config: return kExitIo;
      case ErrorCode::NonHermitianInput:
      case ErrorCode::GapTooSmall:
      case ErrorCode::DimensionMismatch: return kExitValidation;
      default: return kExitBattery;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
