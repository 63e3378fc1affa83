#include "geomphase/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "geomphase/error.hpp"

namespace geomphase {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs compute(i) for i in [0, count) on `jobs` threads and hands results to
// emit(i, result) strictly in index order. On failure the completed prefix
// has already been emitted; the first exception is rethrown.
template <class Result, class Compute, class Emit>
std::vector<Result> ordered_parallel(std::size_t count, std::size_t jobs, Compute compute, Emit emit) {
  std::vector<std::optional<Result>> slots(count);
  std::mutex mutex;
  std::size_t next_emit = 0;
  std::atomic<std::size_t> next_index{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next_index.fetch_add(1);
      if (i >= count) return;
      try {
        Result r = compute(i);
        std::lock_guard lock(mutex);
        slots[i] = std::move(r);
        while (next_emit < count && slots[next_emit]) {
          emit(next_emit, *slots[next_emit]);
          ++next_emit;
        }
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Result> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::Config, what); }

Complex parse_complex(const json& j, const std::string& key) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  config_error(key + " must be a number or [re, im]");
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      config_error("unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::vector<double> gamma_defaults(double omega0) {
  return {0.5 * kPi / omega0, kPi / omega0, 1.5 * kPi / omega0};
}

// The spin-half state a0|eps_0(0)> + a1|eps_1(0)> in the closed-form gauge.
StateVector spin_half_initial(const SpinHalfParams& params, Complex a0, Complex a1) {
  const auto eig = spin_half_eigensystem(params, 0.0);
  return StateVector::normalized(a0 * eig.ground + a1 * eig.excited);
}

struct SpinHalfContext {
  SpinHalfParams params;
  HamiltonianFamily family;
  EigenFrame frame;
  EnergyProfile profile;
  double berry0;
};

SpinHalfContext make_spin_half_context(const ExperimentConfig& config, double t_max) {
  const SpinHalfParams params = config.model.spin_half;
  HamiltonianFamily family = spin_half_family(params);
  const EigenFrame probe = smooth_eigenframe(family, config.grid_size);
  EigenFrame frame = smooth_eigenframe(family, remainder_frame_size(probe, t_max, config.grid_size));
  EnergyProfile profile(frame);
  const double berry0 = berry_phase(frame, 0);
  return {params, std::move(family), std::move(frame), std::move(profile), berry0};
}

struct RowResult {
  SweepRow row;
  double adiabatic_fidelity = kNaN;
};

RowResult compute_row(const SpinHalfContext& ctx, const ExperimentConfig& config, double T,
                      const ImperfectionSpec& amps) {
  RowResult out;
  SweepRow& row = out.row;
  row.T = T;
  row.gp_perfect_exact = exact_gp_perfect(ctx.params, T);
  row.gp_imperfect_exact = exact_gp_imperfect(ctx.params, T, amps[0], amps[1]);
  if (config.numeric) {
    const auto perfect = numeric_geometric_phase(ctx.family, T, spin_half_initial(ctx.params, 1.0, 0.0),
                                                 config.integrator);
    const auto imperfect = numeric_pipeline(ctx.family, T, spin_half_initial(ctx.params, amps[0], amps[1]),
                                            config.integrator, &ctx.frame, 0);
    row.gp_perfect_numeric = perfect.geometric_phase_wrapped;
    row.gp_imperfect_numeric = imperfect.phase.geometric_phase_wrapped;
    out.adiabatic_fidelity = imperfect.min_fidelity;
  } else {
    row.gp_perfect_numeric = kNaN;
    row.gp_imperfect_numeric = kNaN;
  }
  row.gp_key_formula = key_formula_prediction(ctx.profile, amps, ctx.berry0, T).wrapped;
  row.gp_approx22 = approx_gp_perfect(ctx.params).wrapped;
  row.gp_approx23 = approx_gp_imperfect(ctx.params, T, amps.weight(1)).wrapped;
  row.fidelity = std::abs(amps[0]);
  row.remainder_mag = std::abs(oscillatory_remainder(ctx.frame, amps, T));
  return out;
}

double max_spread(const EigenFrame& frame) {
  double spread = 0.0;
  for (std::size_t k = 0; k < frame.samples(); ++k) {
    spread = std::max(spread, frame.energy(k, frame.dim() - 1) - frame.energy(k, 0));
  }
  return spread;
}

Check make_check(std::string name, double measured, double threshold, std::string detail = {}) {
  Check c;
  c.name = std::move(name);
  c.measured = measured;
  c.threshold = threshold;
  c.passed = std::isfinite(measured) && measured <= threshold;
  c.detail = std::move(detail);
  return c;
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

}  // namespace

HamiltonianFamily make_family(const ModelSpec& model) {
  switch (model.kind) {
    case ModelKind::SpinHalf: return spin_half_family(model.spin_half);
    case ModelKind::SampledFamily: return load_sampled_family(model.file);
    case ModelKind::RandomAnalytic:
      return random_analytic_family(model.dim, model.seed, model.scale, model.coupling);
  }
  throw Error(ErrorCode::Config, "unknown model kind");
}

void SweepSpec::validate() const {
  if (!(t_min > 0.0) || !(t_max > t_min) || !std::isfinite(t_max)) {
    config_error("sweep needs 0 < min < max");
  }
  if (count < 2) config_error("sweep count must be >= 2");
}

std::vector<double> SweepSpec::values() const {
  validate();
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(count - 1);
    t[i] = spacing == Spacing::Linear ? t_min + (t_max - t_min) * u
                                      : t_min * std::pow(t_max / t_min, u);
  }
  t.back() = t_max;
  return t;
}

void ExperimentConfig::validate(Experiment experiment) const {
  if (grid_size < 3) config_error("grid_size must be >= 3");
  if (jobs < 1) config_error("jobs must be >= 1");
  if (!(integrator.max_phase_step > 0.0)) config_error("integrator.max_phase_step must be positive");
  try {
    model.spin_half.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  const bool figure = experiment == Experiment::Fig1 || experiment == Experiment::Fig2 ||
                      experiment == Experiment::Fig3;
  if (figure && model.kind != ModelKind::SpinHalf) {
    config_error("figure runs need the spin_half model");
  }
  if (experiment == Experiment::Fig1 || experiment == Experiment::Fig2) sweep.validate();
  if ((experiment == Experiment::Fig1 || experiment == Experiment::Fig3 ||
       experiment == Experiment::Verify) &&
      amplitudes.kind != AmplitudeKind::Fixed) {
    config_error("this run needs fixed amplitudes");
  }
  if (amplitudes.kind == AmplitudeKind::Fixed &&
      std::abs(std::norm(amplitudes.a0) + std::norm(amplitudes.a1) - 1.0) > 1e-12) {
    config_error("|a0|^2 + |a1|^2 must equal 1");
  }
  if (experiment == Experiment::Fig2) {
    if (amplitudes.kind != AmplitudeKind::GammaScaled || amplitudes.gammas.empty()) {
      config_error("fig2 needs gamma_scaled amplitudes with at least one Gamma");
    }
  }
  if (experiment == Experiment::Fig3 && !(fig3_T > 0.0)) config_error("fig3.T must be positive");
}

ExperimentConfig default_config(Experiment experiment) {
  ExperimentConfig c;
  switch (experiment) {
    case Experiment::Fig1: c.output = "out/fig1"; break;
    case Experiment::Fig2:
      c.output = "out/fig2";
      c.sweep = {0.04, 4.0, 61, Spacing::Log};
      c.amplitudes.kind = AmplitudeKind::GammaScaled;
      c.amplitudes.gammas = gamma_defaults(c.model.spin_half.omega0);
      break;
    case Experiment::Fig3: c.output = "out/fig3"; break;
    case Experiment::Verify: c.output = "out/verify"; break;
    case Experiment::ValidateFamily: c.output = "out/validate"; break;
  }
  return c;
}

void apply_config_json(ExperimentConfig& config, std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) config_error("config must be a JSON object");
  reject_unknown(doc, {"model", "sweep", "amplitudes", "grid_size", "output", "seed", "jobs", "plot",
                       "numeric", "integrator", "fig3", "$schema"},
                 "config");

  if (doc.contains("model")) {
    const json& m = doc["model"];
    reject_unknown(m, {"type", "theta", "omega0", "file", "dim", "seed", "scale", "coupling"}, "model");
    if (m.contains("type")) {
      const auto type = get<std::string>(m, "type");
      if (type == "spin_half") config.model.kind = ModelKind::SpinHalf;
      else if (type == "sampled_family") config.model.kind = ModelKind::SampledFamily;
      else if (type == "random_analytic") config.model.kind = ModelKind::RandomAnalytic;
      else config_error("unknown model type '" + type + "'");
    }
    if (m.contains("theta")) config.model.spin_half.theta = get<double>(m, "theta");
    if (m.contains("omega0")) config.model.spin_half.omega0 = get<double>(m, "omega0");
    if (m.contains("file")) config.model.file = get<std::string>(m, "file");
    if (m.contains("dim")) config.model.dim = get<std::size_t>(m, "dim");
    if (m.contains("seed")) config.model.seed = get<std::uint64_t>(m, "seed");
    if (m.contains("scale")) config.model.scale = get<double>(m, "scale");
    if (m.contains("coupling")) config.model.coupling = get<double>(m, "coupling");
    if (config.model.kind == ModelKind::SampledFamily && config.model.file.empty()) {
      config_error("sampled_family model needs 'file'");
    }
  }

  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    reject_unknown(s, {"min", "max", "count", "spacing"}, "sweep");
    if (s.contains("min")) config.sweep.t_min = get<double>(s, "min");
    if (s.contains("max")) config.sweep.t_max = get<double>(s, "max");
    if (s.contains("count")) config.sweep.count = get<std::size_t>(s, "count");
    if (s.contains("spacing")) {
      const auto spacing = get<std::string>(s, "spacing");
      if (spacing == "linear") config.sweep.spacing = Spacing::Linear;
      else if (spacing == "log") config.sweep.spacing = Spacing::Log;
      else config_error("spacing must be 'linear' or 'log'");
    }
  }

  if (doc.contains("amplitudes")) {
    const json& a = doc["amplitudes"];
    reject_unknown(a, {"type", "a0", "a1", "a1mag2", "gamma", "gamma_omega0"}, "amplitudes");
    auto& amp = config.amplitudes;
    if (a.contains("type")) {
      const auto type = get<std::string>(a, "type");
      if (type == "fixed") amp.kind = AmplitudeKind::Fixed;
      else if (type == "gamma_scaled") amp.kind = AmplitudeKind::GammaScaled;
      else config_error("amplitudes.type must be 'fixed' or 'gamma_scaled'");
    }
    if (a.contains("a1mag2")) {
      const double w = get<double>(a, "a1mag2");
      if (!(w >= 0.0 && w <= 1.0)) config_error("a1mag2 must lie in [0, 1]");
      amp.a0 = std::sqrt(1.0 - w);
      amp.a1 = std::sqrt(w);
    }
    if (a.contains("a0") || a.contains("a1")) {
      if (!(a.contains("a0") && a.contains("a1"))) config_error("give both a0 and a1");
      Complex a0 = parse_complex(a["a0"], "a0");
      Complex a1 = parse_complex(a["a1"], "a1");
      // decimal input rarely normalises to 1e-12; accept and rescale small slips
      const double norm = std::sqrt(std::norm(a0) + std::norm(a1));
      if (!(std::abs(norm - 1.0) <= 1e-6)) config_error("|a0|^2 + |a1|^2 must equal 1 (within 1e-6)");
      amp.a0 = a0 / norm;
      amp.a1 = a1 / norm;
    }
    if (a.contains("gamma")) amp.gammas = get<std::vector<double>>(a, "gamma");
    if (a.contains("gamma_omega0")) {
      amp.gammas.clear();
      for (double g : get<std::vector<double>>(a, "gamma_omega0")) {
        amp.gammas.push_back(g / config.model.spin_half.omega0);
      }
    }
    for (double g : amp.gammas) {
      if (!(g >= 0.0) || !std::isfinite(g)) config_error("Gamma values must be finite and >= 0");
    }
  }

  if (doc.contains("grid_size")) config.grid_size = get<std::size_t>(doc, "grid_size");
  if (doc.contains("output")) config.output = get<std::string>(doc, "output");
  if (doc.contains("seed")) config.seed = get<std::uint64_t>(doc, "seed");
  if (doc.contains("jobs")) config.jobs = get<std::size_t>(doc, "jobs");
  if (doc.contains("plot")) config.plot = get<bool>(doc, "plot");
  if (doc.contains("numeric")) config.numeric = get<bool>(doc, "numeric");
  if (doc.contains("integrator")) {
    const json& i = doc["integrator"];
    reject_unknown(i, {"max_phase_step", "min_steps_per_oscillation"}, "integrator");
    if (i.contains("max_phase_step")) config.integrator.max_phase_step = get<double>(i, "max_phase_step");
    if (i.contains("min_steps_per_oscillation")) {
      config.integrator.min_steps_per_oscillation = get<double>(i, "min_steps_per_oscillation");
    }
  }
  if (doc.contains("fig3")) {
    const json& f = doc["fig3"];
    reject_unknown(f, {"T"}, "fig3");
    if (f.contains("T")) config.fig3_T = get<double>(f, "T");
  }
}

void apply_config_file(ExperimentConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const std::string before = config.model.file;
  apply_config_json(config, text.str());
  // family files named in a config are relative to that config
  const std::filesystem::path file(config.model.file);
  if (config.model.file != before && file.is_relative()) {
    config.model.file = (std::filesystem::path(path).parent_path() / file).string();
  }
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  json model;
  switch (c.model.kind) {
    case ModelKind::SpinHalf:
      model = {{"type", "spin_half"}, {"theta", c.model.spin_half.theta}, {"omega0", c.model.spin_half.omega0}};
      break;
    case ModelKind::SampledFamily: model = {{"type", "sampled_family"}, {"file", c.model.file}}; break;
    case ModelKind::RandomAnalytic:
      model = {{"type", "random_analytic"}, {"dim", c.model.dim}, {"seed", c.model.seed},
               {"scale", c.model.scale}, {"coupling", c.model.coupling}};
      break;
  }
  j["model"] = model;
  j["sweep"] = {{"min", c.sweep.t_min}, {"max", c.sweep.t_max}, {"count", c.sweep.count},
                {"spacing", c.sweep.spacing == Spacing::Linear ? "linear" : "log"}};
  if (c.amplitudes.kind == AmplitudeKind::Fixed) {
    j["amplitudes"] = {{"type", "fixed"},
                       {"a0", {c.amplitudes.a0.real(), c.amplitudes.a0.imag()}},
                       {"a1", {c.amplitudes.a1.real(), c.amplitudes.a1.imag()}}};
  } else {
    j["amplitudes"] = {{"type", "gamma_scaled"}, {"gamma", c.amplitudes.gammas}};
  }
  j["grid_size"] = c.grid_size;
  j["output"] = c.output;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["plot"] = c.plot;
  j["numeric"] = c.numeric;
  j["integrator"] = {{"max_phase_step", c.integrator.max_phase_step},
                     {"min_steps_per_oscillation", c.integrator.min_steps_per_oscillation}};
  j["fig3"] = {{"T", c.fig3_T}};
  return j.dump(2);
}

void write_sweep_header(std::ostream& out) { out << kSweepHeader << '\n'; }

void write_sweep_row(std::ostream& out, const SweepRow& r) {
  out << std::setprecision(17) << r.T << ',' << r.gp_perfect_exact << ',' << r.gp_imperfect_exact << ','
      << r.gp_perfect_numeric << ',' << r.gp_imperfect_numeric << ',' << r.gp_key_formula << ','
      << r.gp_approx22 << ',' << r.gp_approx23 << ',' << r.fidelity << ',' << r.remainder_mag << '\n';
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) {
    throw Error(ErrorCode::Io, "sweep CSV header mismatch");
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::Io, "cannot parse sweep cell '" + cell + "'");
      }
    }
    if (v.size() != 10) throw Error(ErrorCode::Io, "sweep row needs 10 cells");
    rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]});
  }
  return rows;
}

std::vector<SweepRow> run_fig1(const ExperimentConfig& config, const RowSink& sink) {
  config.validate(Experiment::Fig1);
  const auto times = config.sweep.values();
  const auto ctx = make_spin_half_context(config, times.back());
  const ImperfectionSpec amps = ImperfectionSpec::two_level(config.amplitudes.a0, config.amplitudes.a1);
  return ordered_parallel<SweepRow>(
      times.size(), config.jobs,
      [&](std::size_t i) { return compute_row(ctx, config, times[i], amps).row; },
      [&](std::size_t, const SweepRow& row) {
        if (sink) sink(row);
      });
}

std::vector<GammaSweep> run_fig2(const ExperimentConfig& config,
                                 const std::function<void(std::size_t, const SweepRow&)>& sink) {
  config.validate(Experiment::Fig2);
  const auto times = config.sweep.values();
  for (double g : config.amplitudes.gammas) {
    if (g > times.front()) {
      throw Error(ErrorCode::InvalidGamma, "Gamma = " + fmt(g) + " exceeds the smallest T " +
                                               fmt(times.front()));
    }
  }
  const auto ctx = make_spin_half_context(config, times.back());
  const std::size_t per = times.size();
  const auto results = ordered_parallel<RowResult>(
      per * config.amplitudes.gammas.size(), config.jobs,
      [&](std::size_t i) {
        const double T = times[i % per];
        const auto amps = gamma_scaled_amplitudes(config.amplitudes.gammas[i / per], T);
        return compute_row(ctx, config, T, amps);
      },
      [&](std::size_t i, const RowResult& r) {
        if (sink) sink(i / per, r.row);
      });

  std::vector<GammaSweep> out;
  for (std::size_t g = 0; g < config.amplitudes.gammas.size(); ++g) {
    GammaSweep sweep;
    sweep.gamma = config.amplitudes.gammas[g];
    sweep.limit = gamma_limit(ctx.params, sweep.gamma);
    for (std::size_t k = 0; k < per; ++k) {
      sweep.rows.push_back(results[g * per + k].row);
      sweep.adiabatic_fidelity.push_back(results[g * per + k].adiabatic_fidelity);
    }
    out.push_back(std::move(sweep));
  }
  return out;
}

Fig3Result run_fig3(const ExperimentConfig& config) {
  config.validate(Experiment::Fig3);
  const SpinHalfParams params = config.model.spin_half;
  const double T = config.fig3_T;
  const Complex a0 = config.amplitudes.a0;
  const Complex a1 = config.amplitudes.a1;
  const HamiltonianFamily family = spin_half_family(params);
  IntegratorOptions options = config.integrator;
  options.output_points = config.grid_size;

  const auto perfect_path = integrate_schrodinger(family, T, spin_half_initial(params, 1.0, 0.0), options);
  const auto imperfect_path = integrate_schrodinger(family, T, spin_half_initial(params, a0, a1), options);
  const EigenFrame frame = smooth_eigenframe(family, config.grid_size);
  std::vector<BlochPoint> circle;
  for (std::size_t k = 0; k < frame.samples(); ++k) circle.push_back(to_bloch(frame.vector(k, 0)));

  Fig3Result r{bloch_path(perfect_path), bloch_path(imperfect_path),
               BlochPath(std::move(circle), frame.grid()), {}, {}, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  const double w = std::norm(a1);
  r.perfect_report = analyze_bloch_path(r.perfect, Closure::GeodesicClose, 0.0, params.omega0, T);
  r.imperfect_report = analyze_bloch_path(r.imperfect, Closure::GeodesicClose, w, params.omega0, T);
  r.omega_adiabatic = solid_angle(r.adiabatic, Closure::AlreadyClosed).omega;
  r.omega_prime = corrected_solid_angle(r.omega_adiabatic, w, params.omega0, T);
  r.gp_from_omega_prime = gp_from_solid_angle(r.omega_prime);
  r.gp_perfect_exact = exact_gp_perfect(params, T);
  r.gp_imperfect_exact = exact_gp_imperfect(params, T, a0, a1);
  r.loop_estimate = params.omega0 * T / kTwoPi;
  return r;
}

bool VerifyReport::passed() const {
  return validated && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

ImperfectionSpec battery_amplitudes(const ExperimentConfig& config, std::size_t dim) {
  const double a0 = std::abs(config.amplitudes.a0);
  const double rest = std::sqrt(std::max(0.0, 1.0 - a0 * a0));
  std::vector<Complex> a(dim, Complex(0.0, 0.0));
  a[0] = a0;
  if (dim == 2) {
    a[1] = std::abs(config.amplitudes.a1);
    return ImperfectionSpec(std::move(a));
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector u(static_cast<Eigen::Index>(dim - 1));
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = Complex(normal(rng), normal(rng));
  u.normalize();
  for (std::size_t n = 1; n < dim; ++n) a[n] = rest * u(static_cast<Eigen::Index>(n - 1));
  // absorb rounding so the weights sum to 1 to within 1e-12
  double tail = 0.0;
  for (std::size_t n = 1; n < dim; ++n) tail += std::norm(a[n]);
  a[0] = std::sqrt(1.0 - tail);
  return ImperfectionSpec(std::move(a));
}

double battery_time_scale(const EigenFrame& frame) { return 200.0 / max_spread(frame); }

std::size_t remainder_frame_size(const EigenFrame& probe, double t_max, std::size_t floor) {
  const double intervals = std::ceil(t_max * max_spread(probe) / 0.25);
  return std::max(floor, static_cast<std::size_t>(intervals) + 1);
}

VerifyReport run_verify(const ExperimentConfig& config) {
  config.validate(Experiment::Verify);
  VerifyReport report;
  const HamiltonianFamily family = make_family(config.model);
  report.validation = validate_family(family, config.grid_size);
  if (!report.validation.passed()) return report;
  report.validated = true;

  const EigenFrame frame = smooth_eigenframe(family, std::max<std::size_t>(config.grid_size, 2001));
  const std::size_t dim = family.dim();
  const ImperfectionSpec amps = battery_amplitudes(config, dim);
  const double t0 = battery_time_scale(frame);
  const bool spin_half = config.model.kind == ModelKind::SpinHalf;
  const CVector& v0 = frame.vectors(0).col(0);
  CVector mixed = CVector::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t n = 0; n < dim; ++n) mixed += amps[n] * frame.vectors(0).col(static_cast<Eigen::Index>(n));
  const StateVector perfect0 = StateVector::normalized(v0);
  const StateVector imperfect0 = StateVector::normalized(mixed);

  IntegratorOptions paths = config.integrator;
  paths.output_points = config.grid_size;

  // overlap modulus stays |a0| along both integrated paths
  {
    double worst = 0.0;
    for (double f : {1.0, 3.7, 10.0}) {
      const auto p = integrate_schrodinger(family, f * t0, perfect0, paths);
      const auto q = integrate_schrodinger(family, f * t0, imperfect0, paths);
      for (std::size_t k = 0; k < p.size(); ++k) {
        worst = std::max(worst, std::abs(std::abs(inner(p.state(k), q.state(k))) - std::abs(amps[0])));
      }
    }
    report.checks.push_back(make_check("pointwise closeness", worst, 1e-9,
                                       "max | |<psi|psi'>| - |a0| | over T = t0, 3.7 t0, 10 t0"));
  }

  // the sampled path, its discrete form and the streamed pipeline agree
  {
    const auto p = integrate_schrodinger(family, t0, imperfect0, paths);
    const double cont = geometric_phase_continuous(p, family).geometric_phase_wrapped;
    const double panch = geometric_phase_pancharatnam(p).geometric_phase_wrapped;
    const double stream = numeric_geometric_phase(family, t0, imperfect0, config.integrator).geometric_phase_wrapped;
    report.checks.push_back(make_check("continuous vs pancharatnam", phase_distance(cont, panch), 1e-5,
                                       "T = " + fmt(t0) + ", " + std::to_string(p.size()) + " samples"));
    report.checks.push_back(make_check("sampled vs streamed", phase_distance(cont, stream), 1e-5,
                                       "T = " + fmt(t0)));
  }

  if (spin_half) {
    const auto& params = config.model.spin_half;
    double worst = 0.0;
    for (double f : {1.0, 10.0, 50.0}) {
      const double T = f * t0;
      const auto gp0 = numeric_geometric_phase(family, T, spin_half_initial(params, 1.0, 0.0), config.integrator);
      const auto gp1 = numeric_geometric_phase(
          family, T, spin_half_initial(params, config.amplitudes.a0, config.amplitudes.a1), config.integrator);
      worst = std::max(worst, phase_distance(gp0.geometric_phase_wrapped, exact_gp_perfect(params, T)));
      worst = std::max(worst, phase_distance(gp1.geometric_phase_wrapped,
                                             exact_gp_imperfect(params, T, config.amplitudes.a0,
                                                                config.amplitudes.a1)));
    }
    report.checks.push_back(make_check("closed-form agreement", worst, 1e-6, "T = t0, 10 t0, 50 t0"));
  }

  // key formula: the offset is bounded by the first-order admixture term
  {
    const EnergyProfile profile(frame);
    const double berry0 = berry_phase(frame, 0);
    const double tol = key_formula_offset_bound(frame, amps) + 0.02;
    double worst = 0.0;
    std::string detail;
    for (double f : {10.0, 25.0, 50.0}) {
      const double T = f * t0;
      const double gp = numeric_geometric_phase(family, T, imperfect0, config.integrator).geometric_phase_wrapped;
      const double d = phase_distance(gp, key_formula_prediction(profile, amps, berry0, T).wrapped);
      worst = std::max(worst, d);
      detail += (detail.empty() ? "" : ", ") + fmt(d);
    }
    report.checks.push_back(make_check("key formula offset", worst, tol, "deviation at 10/25/50 t0: " + detail));
  }

  // the neglected oscillatory term shrinks as T grows
  {
    const std::vector<double> factors{1.0, 1.37, 1.81, 2.33, 2.9};
    const double t_max = 32.0 * factors.back() * t0;
    const EigenFrame fine = smooth_eigenframe(family, remainder_frame_size(frame, t_max, frame.samples()));
    double base = 0.0;
    double later = 0.0;
    for (double f : factors) {
      base += std::abs(oscillatory_remainder(fine, amps, f * t0));
      later += std::abs(oscillatory_remainder(fine, amps, 32.0 * f * t0));
    }
    report.checks.push_back(make_check("remainder decay", later / base, 1.0 / 3.0,
                                       "mean |R(32T)| / mean |R(T)|, T in [t0, 2.9 t0]"));
  }
  return report;
}

}  // namespace geomphase
