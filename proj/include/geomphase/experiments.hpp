#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "geomphase/bloch.hpp"
#include "geomphase/hamiltonian.hpp"
#include "geomphase/phase.hpp"
#include "geomphase/propagator.hpp"

namespace geomphase {

enum class ModelKind { SpinHalf, SampledFamily, RandomAnalytic };

struct ModelSpec {
  ModelKind kind = ModelKind::SpinHalf;
  SpinHalfParams spin_half;
  std::string file;  // sampled family
  std::size_t dim = 3;  // random analytic
  std::uint64_t seed = 7;
  double scale = 1.0;
  double coupling = 0.15;
};

HamiltonianFamily make_family(const ModelSpec& model);

enum class Spacing { Linear, Log };

struct SweepSpec {
  double t_min = 0.4;
  double t_max = 4.0;
  std::size_t count = 400;
  Spacing spacing = Spacing::Linear;

  /// Throws Config unless 0 < t_min < t_max and count >= 2.
  void validate() const;
  std::vector<double> values() const;
};

enum class AmplitudeKind { Fixed, GammaScaled };

struct AmplitudeSpec {
  AmplitudeKind kind = AmplitudeKind::Fixed;
  Complex a0{std::sqrt(399.0 / 400.0), 0.0};
  Complex a1{std::sqrt(1.0 / 400.0), 0.0};
  std::vector<double> gammas;  // us
};

enum class Experiment { Fig1, Fig2, Fig3, Verify, ValidateFamily };

struct ExperimentConfig {
  ModelSpec model;
  SweepSpec sweep;
  AmplitudeSpec amplitudes;
  std::size_t grid_size = 2001;
  std::string output;
  std::uint64_t seed = 20240611;
  std::size_t jobs = 1;
  bool plot = false;
  bool numeric = true;  // run the integrator alongside the closed forms
  IntegratorOptions integrator;
  double fig3_T = 0.04;

  /// Throws Config for anything the runners cannot honour.
  void validate(Experiment experiment) const;
};

/// Defaults per subcommand: Fig. 1 sweeps 400 linear points over
/// T in [0.4, 4] us; Fig. 2 sweeps 61 log points over [0.04, 4] us with
/// Gamma omega0 in {pi/2, pi, 3 pi/2}.
ExperimentConfig default_config(Experiment experiment);

/// Overlays a JSON document (see docs/config.schema.json). Throws Config.
void apply_config_json(ExperimentConfig& config, std::string_view json_text);
void apply_config_file(ExperimentConfig& config, const std::string& path);

/// Effective configuration as pretty-printed JSON.
std::string config_to_json(const ExperimentConfig& config);

struct SweepRow {
  double T = 0.0;
  double gp_perfect_exact = 0.0;
  double gp_imperfect_exact = 0.0;
  double gp_perfect_numeric = 0.0;
  double gp_imperfect_numeric = 0.0;
  double gp_key_formula = 0.0;
  double gp_approx22 = 0.0;
  double gp_approx23 = 0.0;
  double fidelity = 1.0;  // |a0|
  double remainder_mag = 0.0;
};

inline constexpr std::string_view kSweepHeader =
    "T,gp_perfect_exact,gp_imperfect_exact,gp_perfect_numeric,gp_imperfect_numeric,"
    "gp_key_formula,gp_approx22,gp_approx23,fidelity,remainder_mag";

void write_sweep_header(std::ostream& out);
void write_sweep_row(std::ostream& out, const SweepRow& row);
std::vector<SweepRow> read_sweep_csv(std::istream& in);

/// Receives rows in T order as soon as every earlier row is done, so a
/// failing sweep still delivers its completed prefix.
using RowSink = std::function<void(const SweepRow&)>;

/// Spin-half T-sweep with fixed amplitudes. Numeric columns are NaN when
/// config.numeric is false.
std::vector<SweepRow> run_fig1(const ExperimentConfig& config, const RowSink& sink = {});

struct GammaSweep {
  double gamma = 0.0;  // us
  double limit = 0.0;  // wrap(-pi (1 - cos theta) + Gamma omega0)
  std::vector<SweepRow> rows;
  /// min_s |<eps_0(s)|psi'(s)>| per row; NaN without numerics.
  std::vector<double> adiabatic_fidelity;
};

/// One sweep per Gamma with a0 = sqrt(1 - Gamma/T), a1 = sqrt(Gamma/T).
/// Throws InvalidGamma if some Gamma exceeds the smallest T.
std::vector<GammaSweep> run_fig2(const ExperimentConfig& config,
                                 const std::function<void(std::size_t, const SweepRow&)>& sink = {});

struct Fig3Result {
  BlochPath perfect;
  BlochPath imperfect;
  BlochPath adiabatic;
  SolidAngleReport perfect_report;
  SolidAngleReport imperfect_report;
  double omega_adiabatic = 0.0;
  double omega_prime = 0.0;        // corrected from the adiabatic circle
  double gp_from_omega_prime = 0.0;
  double gp_perfect_exact = 0.0;
  double gp_imperfect_exact = 0.0;
  double loop_estimate = 0.0;      // omega0 T / 2 pi
};

/// Bloch curves at config.fig3_T sampled on config.grid_size points.
Fig3Result run_fig3(const ExperimentConfig& config);

struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyReport {
  ValidationReport validation;
  bool validated = false;  // false: the battery did not run
  std::vector<Check> checks;

  bool passed() const;
};

/// Amplitudes used by the battery: a0 from the config, the weight |a1|^2
/// spread over the excited levels with seeded random complex phases.
ImperfectionSpec battery_amplitudes(const ExperimentConfig& config, std::size_t dim);

/// Characteristic time 200 / max_s (eps_max - eps_min): long enough that
/// the dynamics is adiabatic at ten times this value.
double battery_time_scale(const EigenFrame& frame);

/// Frame size for which oscillatory_remainder stays below its per-interval
/// phase limit (with margin) for every T <= t_max.
std::size_t remainder_frame_size(const EigenFrame& probe, double t_max, std::size_t floor);

VerifyReport run_verify(const ExperimentConfig& config);

}  // namespace geomphase
