#include "lpw/app/experiments.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numbers>
#include <sstream>

#include <openssl/evp.h>

#include "lpw/app/svg.hpp"
#include "lpw/io.hpp"

#ifndef LPW_VERSION
#define LPW_VERSION "0.0.0"
#endif

namespace lpw::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<PairIndex, 4> kCorners{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
constexpr double kPhiModeAmplitude = 1e-3;

std::string dump(const json& j) { return j.dump(2) + "\n"; }

template <class Fn>
std::string to_text(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

std::array<CorrelatorEstimate, 4> corner_estimates(const RunLedger& ledger, std::size_t run_limit) {
  std::array<std::vector<OutcomePair>, 4> by_corner;
  for (const auto& r : ledger.records) {
    if (r.flagged || r.run_id >= run_limit) continue;
    by_corner[static_cast<std::size_t>(2 * r.pair.a_index + r.pair.b_index)].push_back(r.outcome);
  }
  std::array<CorrelatorEstimate, 4> out;
  for (std::size_t k = 0; k < 4; ++k) out[k] = estimate_correlator(by_corner[k]);
  return out;
}

json corners_json(const RunLedger& ledger, const ChshQuad& quad) {
  const auto est = corner_estimates(ledger, ledger.records.size());
  json out = json::array();
  for (std::size_t k = 0; k < 4; ++k) {
    if (est[k].count == 0) continue;
    const Angle theta = quad.pair(kCorners[k]).relative();
    out.push_back({{"a_index", kCorners[k].a_index},
                   {"b_index", kCorners[k].b_index},
                   {"theta", theta.radians()},
                   {"E_hat", est[k].value},
                   {"stderr", est[k].std_error},
                   {"count", est[k].count},
                   {"E_quantum", quantum_correlation(theta)}});
  }
  return out;
}

std::size_t flagged_count(const RunLedger& ledger) {
  std::size_t n = 0;
  for (const auto& r : ledger.records) n += r.flagged ? 1 : 0;
  return n;
}

std::string e_vs_theta_svg(const RunLedger& ledger, const ChshQuad& quad) {
  Plot plot{"Correlator versus relative angle", "theta (rad)", "E", false, {}, {}};
  PlotSeries curve{"-cos theta", {}, "#444444", false, {}};
  for (int i = 0; i <= 200; ++i) {
    const double t = kTwoPi * i / 200.0;
    curve.points.emplace_back(t, -std::cos(t));
  }
  PlotSeries measured{"estimate", {}, "#d62728", true, {}};
  const auto est = corner_estimates(ledger, ledger.records.size());
  for (std::size_t k = 0; k < 4; ++k) {
    if (est[k].count == 0) continue;
    measured.points.emplace_back(quad.pair(kCorners[k]).relative().radians(), est[k].value);
    measured.errors.push_back(est[k].std_error);
  }
  plot.series = {curve, measured};
  return render_svg(plot);
}

/// S recomputed on growing prefixes of the ledger.
std::string chsh_s_svg(const RunLedger& ledger) {
  Plot plot{"CHSH S versus number of runs", "runs", "S", false, {}, {}};
  PlotSeries s{"S estimate", {}, "#1f77b4", true, {}};
  const std::size_t n = ledger.records.size();
  for (int k = 1; k <= 10; ++k) {
    const std::size_t limit = n * static_cast<std::size_t>(k) / 10;
    const auto est = corner_estimates(ledger, limit);
    if (std::any_of(est.begin(), est.end(), [](const auto& e) { return e.count < 2; })) continue;
    const Correlators c{est[0].value, est[1].value, est[2].value, est[3].value};
    double var = 0.0;
    for (const auto& e : est) var += e.std_error * e.std_error;
    s.points.emplace_back(static_cast<double>(limit), chsh_value(c));
    s.errors.push_back(std::sqrt(var));
  }
  plot.series = {s};
  plot.hlines = {{2.0, "local bound 2", "#2ca02c"}, {2.0 * std::numbers::sqrt2, "quantum 2sqrt2", "#9467bd"}};
  return render_svg(plot);
}

ExperimentResult run_chsh(const RunConfig& c, ModelKind kind) {
  ModelSpec model{kind, kind == ModelKind::QuantumOracle ? EngineParams{} : c.engine(), std::nullopt};
  const RunLedger ledger = run_bell_ensemble(model, c.quad, c.policy, c.n_runs, c.master_seed);

  ExperimentResult r;
  r.flagged_runs = flagged_count(ledger);
  r.report = {{"experiment", to_string(c.experiment)},
              {"model", to_string(kind)},
              {"policy", ledger.policy},
              {"master_seed", c.master_seed},
              {"n_runs", c.n_runs},
              {"quad", io::to_json(c.quad)},
              {"corners", corners_json(ledger, c.quad)},
              {"flagged_runs", r.flagged_runs}};
  try {
    r.report["chsh"] = io::to_json(chsh_report(ledger));
  } catch (const std::invalid_argument& e) {
    r.report["chsh"] = nullptr;
    r.report["chsh_unavailable"] = e.what();
  }
  if (kind == ModelKind::QuantumOracle) {
    const Correlators exact = quantum_correlators(c.quad);
    r.report["exact"] = {{"E_ab", exact.ab},
                         {"E_abp", exact.abp},
                         {"E_apb", exact.apb},
                         {"E_apbp", exact.apbp},
                         {"S", chsh_value(exact, ChshForm::SplitAbsolute)},
                         {"S_single_absolute", chsh_value(exact, ChshForm::SingleAbsolute)},
                         {"quantum_value", 2.0 * std::numbers::sqrt2}};
  }
  r.artifacts.push_back({"ledger.csv", to_text([&](std::ostream& o) { io::write_ledger_csv(o, ledger); })});
  r.artifacts.push_back({"report.json", dump(r.report)});
  if (c.plots) {
    r.artifacts.push_back({"e_vs_theta.svg", e_vs_theta_svg(ledger, c.quad)});
    r.artifacts.push_back({"chsh_s.svg", chsh_s_svg(ledger)});
  }
  return r;
}

ExperimentResult run_equivalence(const RunConfig& c) {
  const GridSpec grid = c.grid();
  const RingSpec ring = c.ring();
  const MeasurementDynamics dyn{c.constants, c.quad.pair({0, 0}), c.measurement_schedule()};
  SpinorField phi = prepare_singlet_state(grid, c.schedule.packet_width);
  RngStream rng(c.master_seed, 0, StreamPurpose::Initializer);
  const ParticleConfig z = born_sample(phi, rng);
  const LatticeState lattice0 = init_homogeneous({phi, z}, ring);

  PilotWaveSystem reference(phi, {z});
  TrajectoryTrace ref_trace{{0.0, z}};
  for (std::size_t k = 0; k < c.steps; ++k) {
    reference.step(dyn, c.dt);
    ref_trace.push_back({reference.time(), reference.configs()[0]});
  }

  std::vector<DensitySample> trace{{0.0, mass_density(lattice0)}};
  std::vector<std::vector<ParticleConfig>> faithful_configs;
  double drift = 0.0;
  const LatticeState faithful = evolve_lattice(
      lattice0, dyn, c.dt, EvolutionMode::Faithful, c.steps,
      [&](double t, std::span<const ParticleConfig> cells) {
        const ParticleConfig& ref = ref_trace[trace.size()].config;
        trace.push_back({t, mass_density(ring, cells)});
        faithful_configs.emplace_back(cells.begin(), cells.end());
        for (const auto& w : cells) {
          drift = std::max({drift, std::abs(periodic_delta(ref.x1, w.x1, grid.length())),
                            std::abs(periodic_delta(ref.x2, w.x2, grid.length()))});
        }
      });

  std::vector<std::vector<ParticleConfig>> fast_configs;
  const LatticeState fast = evolve_lattice(lattice0, dyn, c.dt, EvolutionMode::Fast, c.steps,
                                           [&](double, std::span<const ParticleConfig> cells) {
                                             fast_configs.emplace_back(cells.begin(), cells.end());
                                           });
  const bool identical = fast.cells == faithful.cells && fast.t == faithful.t && fast_configs == faithful_configs;

  ExperimentResult r;
  r.report = {{"experiment", to_string(c.experiment)},
              {"cells", ring.cells()},
              {"steps", c.steps},
              {"dt", c.dt},
              {"t_final", faithful.t},
              {"max_deviation", compare_to_reference(trace, ref_trace, ring)},
              {"position_drift", drift},
              {"fast_faithful_identical", identical}};
  r.artifacts.push_back(
      {"density_trace.csv", to_text([&](std::ostream& o) { io::write_density_trace_csv(o, trace); })});
  r.artifacts.push_back(
      {"reference_trace.csv", to_text([&](std::ostream& o) { io::write_traces_csv(o, {ref_trace}); })});
  r.artifacts.push_back({"lattice_final.bin", to_text([&](std::ostream& o) { io::write_lattice_snapshot(o, faithful); })});
  r.artifacts.push_back({"report.json", dump(r.report)});
  return r;
}

/// Lowest-mode initial data: a homogeneous base cell plus cos(2πx/M)
/// perturbations of the field (along an orthogonal direction) and of Z.
LatticeState lowest_mode_lattice(const RunConfig& c) {
  const RingSpec ring = c.ring();
  const GridSpec grid = c.grid();
  RngStream rng(c.master_seed, 0, StreamPurpose::Initializer);
  const LatticeState random = init_generic(ring, grid, rng);
  const SpinorField& base = random.cells[0].phi;
  SpinorField direction = random.cells[1].phi;
  Complex overlap = 0.0;
  for (std::size_t i = 0; i < base.data().size(); ++i) overlap += std::conj(base.data()[i]) * direction.data()[i];
  overlap *= grid.spacing() * grid.spacing();
  for (std::size_t i = 0; i < base.data().size(); ++i) direction.data()[i] -= overlap * base.data()[i];
  direction.normalize();

  LatticeState lattice{ring, {}, 0.0};
  for (std::size_t x = 0; x < ring.cells(); ++x) {
    const double mode = std::cos(kTwoPi * static_cast<double>(x) / static_cast<double>(ring.cells()));
    SpinorField phi = base;
    for (std::size_t i = 0; i < phi.data().size(); ++i) phi.data()[i] += kPhiModeAmplitude * mode * direction.data()[i];
    phi.normalize();
    const ParticleConfig z{grid.wrap(random.cells[0].z.x1 + c.relax.mode_amplitude * mode),
                           grid.wrap(random.cells[0].z.x2 + c.relax.mode_amplitude * mode)};
    lattice.cells.push_back({std::move(phi), z});
  }
  lattice.validate();
  return lattice;
}

ExperimentResult run_relax(const RunConfig& c) {
  const RelaxationParams params = c.relaxation_params();
  const RingSpec ring = c.ring();
  params.validate(ring);
  const MeasurementDynamics dyn{c.constants, c.quad.pair({0, 0}), c.measurement_schedule()};

  LatticeState lattice = lowest_mode_lattice(c);
  GradientDiagnostics diag;
  diag.record(lattice.t, gradient_norms(lattice));
  for (std::size_t k = 0; k < c.relax.steps; ++k) {
    lattice = relax_step(std::move(lattice), params, dyn);
    diag.record(lattice.t, gradient_norms(lattice));
  }

  const double k2 = std::pow(kTwoPi / ring.circumference(), 2);
  const double continuum_z = 2.0 * c.relax.kappa * k2;
  const double continuum_phi = continuum_z / c.constants.hbar;
  const double s2 = std::pow(std::sin(std::numbers::pi / static_cast<double>(ring.cells())), 2);
  auto discrete = [&](double coefficient) {
    const double r = coefficient * c.relax.dt / (ring.spacing() * ring.spacing());
    return -2.0 * std::log(1.0 - 4.0 * r * s2) / c.relax.dt;
  };
  const double t_end = lattice.t;
  auto fit = [&](GradientSeries series) -> json {
    try {
      return decay_rate_fit(diag, 0.0, t_end, series);
    } catch (const std::invalid_argument& e) {
      return nullptr;
    }
  };
  const json fit_phi = fit(GradientSeries::Phi);
  const json fit_z = fit(GradientSeries::Z);
  auto rel = [](const json& fitted, double predicted) -> json {
    if (fitted.is_null() || predicted == 0.0) return nullptr;
    return std::abs(fitted.get<double>() - predicted) / predicted;
  };

  ExperimentResult r;
  r.report = {{"experiment", to_string(c.experiment)},
              {"cells", ring.cells()},
              {"kappa", c.relax.kappa},
              {"dt", c.relax.dt},
              {"steps", c.relax.steps},
              {"diffusion_number", params.diffusion_number(ring)},
              {"internal_dynamics", c.relax.internal_dynamics},
              {"t_final", t_end},
              {"phi", {{"fitted_rate", fit_phi},
                       {"continuum_rate", continuum_phi},
                       {"discrete_rate", discrete(c.relax.kappa / c.constants.hbar)},
                       {"relative_error", rel(fit_phi, continuum_phi)}}},
              {"z", {{"fitted_rate", fit_z},
                     {"continuum_rate", continuum_z},
                     {"discrete_rate", discrete(c.relax.kappa)},
                     {"relative_error", rel(fit_z, continuum_z)}}}};
  r.artifacts.push_back({"diagnostics.csv", to_text([&](std::ostream& o) { io::write_diagnostics_csv(o, diag); })});
  r.artifacts.push_back({"report.json", dump(r.report)});
  if (c.plots) {
    Plot plot{"Gradient decay", "t", "G", true, {}, {}};
    PlotSeries gphi{"G_phi", {}, "#1f77b4", false, {}}, gz{"G_z", {}, "#d62728", false, {}};
    PlotSeries pphi{"G_phi(0) exp(-rate t)", {}, "#aec7e8", false, {}}, pz{"G_z(0) exp(-rate t)", {}, "#ff9896", false, {}};
    const auto& s = diag.samples();
    for (const auto& p : s) {
      gphi.points.emplace_back(p.t, p.g_phi);
      gz.points.emplace_back(p.t, p.g_z);
      pphi.points.emplace_back(p.t, s.front().g_phi * std::exp(-continuum_phi * p.t));
      pz.points.emplace_back(p.t, s.front().g_z * std::exp(-continuum_z * p.t));
    }
    plot.series = {gphi, pphi, gz, pz};
    r.artifacts.push_back({"gradient_decay.svg", render_svg(plot)});
  }
  return r;
}

ExperimentResult run_si(const RunConfig& c) {
  const RunLedger ledger = run_bell_ensemble({ModelKind::QuantumOracle, {}, std::nullopt}, c.quad, c.policy,
                                             c.n_runs, c.master_seed);
  ExperimentResult r;
  r.flagged_runs = flagged_count(ledger);
  r.report = {{"experiment", to_string(c.experiment)},
              {"policy", ledger.policy},
              {"master_seed", c.master_seed},
              {"n_runs", c.n_runs},
              {"si_test", io::to_json(si_test(ledger, c.n_bins))}};
  r.artifacts.push_back({"ledger.csv", to_text([&](std::ostream& o) { io::write_ledger_csv(o, ledger); })});
  r.artifacts.push_back({"report.json", dump(r.report)});
  return r;
}

ExperimentResult run_lhv(const RunConfig& c) {
  const LhvOptimum split = brute_force_lhv_max(ChshForm::SplitAbsolute);
  const LhvOptimum single = brute_force_lhv_max(ChshForm::SingleAbsolute);

  double max_mixture = 0.0;
  std::size_t violations = 0;
  for (std::size_t m = 0; m < c.n_mixtures; ++m) {
    RngStream rng(c.master_seed, m, StreamPurpose::Strategy);
    std::vector<StrategyMixture::Entry> entries;
    double total = 0.0;
    for (int k = 0; k < 16; ++k) {
      const double w = -std::log1p(-rng.uniform());
      entries.emplace_back(DeterministicStrategy::from_index(k), w);
      total += w;
    }
    for (auto& e : entries) e.second /= total;
    const double s = chsh_value(strategy_correlators(StrategyMixture(std::move(entries)), c.quad));
    max_mixture = std::max(max_mixture, s);
    violations += s > 2.0 + 1e-12 ? 1 : 0;
  }

  ExperimentResult r;
  r.report = {{"experiment", to_string(c.experiment)},
              {"max_split_absolute", split.value},
              {"argmax_split_absolute", split.strategy.index()},
              {"max_single_absolute", single.value},
              {"argmax_single_absolute", single.strategy.index()},
              {"mixtures_checked", c.n_mixtures},
              {"max_mixture_S", max_mixture},
              {"mixture_violations", violations},
              {"local_bound", 2.0}};
  r.artifacts.push_back({"report.json", dump(r.report)});
  if (c.plots) {
    Plot plot{"CHSH S per deterministic strategy", "strategy index", "S", false, {}, {}};
    PlotSeries s{"S", {}, "#1f77b4", true, {}};
    for (int k = 0; k < 16; ++k) {
      s.points.emplace_back(k, chsh_value(strategy_correlators(
                                   StrategyMixture::single(DeterministicStrategy::from_index(k)), c.quad)));
    }
    plot.series = {s};
    plot.hlines = {{2.0, "local bound 2", "#2ca02c"}, {2.0 * std::numbers::sqrt2, "quantum 2sqrt2", "#9467bd"}};
    r.artifacts.push_back({"chsh_s.svg", render_svg(plot)});
  }
  return r;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& c) {
  validate(c);
  switch (c.experiment) {
    case ExperimentKind::Oracle: return run_chsh(c, ModelKind::QuantumOracle);
    case ExperimentKind::PwChsh: return run_chsh(c, ModelKind::PilotWave);
    case ExperimentKind::LpwChsh: return run_chsh(c, ModelKind::Lpw);
    case ExperimentKind::LpwEquivalence: return run_equivalence(c);
    case ExperimentKind::Relax: return run_relax(c);
    case ExperimentKind::SiTest: return run_si(c);
    case ExperimentKind::LhvBruteforce: return run_lhv(c);
  }
  throw std::logic_error("unhandled experiment");
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

ExecutionSummary execute(const RunConfig& c) {
  const std::string started = utc_now();
  ExperimentResult result;
  try {
    result = run_experiment(c);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(to_string(c.experiment) + ": " + e.what());
  }

  ExecutionSummary summary;
  summary.output_dir = c.output_dir;
  fs::create_directories(summary.output_dir);
  json outputs = json::array();
  for (const auto& a : result.artifacts) {
    const fs::path path = summary.output_dir / a.name;
    write_file_atomic(path, a.content);
    summary.written.push_back(path);
    outputs.push_back({{"file", a.name}, {"bytes", a.content.size()}, {"sha256", sha256_hex(a.content)}});
  }
  summary.manifest = {{"artifact_version", 1},
                      {"tool", "lpwlab"},
                      {"version", LPW_VERSION},
                      {"experiment", to_string(c.experiment)},
                      {"config", echo(c)},
                      {"started_at", started},
                      {"finished_at", utc_now()},
                      {"outputs", outputs},
                      {"flagged_runs", result.flagged_runs}};
  const fs::path manifest = summary.output_dir / "manifest.json";
  write_file_atomic(manifest, dump(summary.manifest));
  summary.written.push_back(manifest);
  return summary;
}

std::string describe(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Oracle:
      return "Closed-form singlet correlator E(theta) = -cos(theta) and the CHSH value 2*sqrt(2) at the "
             "standard angles, plus a ledger sampled from the joint outcome probabilities.";
    case ExperimentKind::PwChsh:
      return "Pilot-wave Stern-Gerlach measurement of the singlet. The Schroedinger evolution carries "
             "Born-sampled trajectories to readout; reports E(theta) per setting pair and CHSH S.";
    case ExperimentKind::LpwChsh:
      return "Local lattice pilot-wave model on a ring with a homogeneous field. Outcomes are read from the "
             "lattice mass density and combined into CHSH S.";
    case ExperimentKind::LpwEquivalence:
      return "Homogeneous lattice against the single-universe reference: mass-density support versus the "
             "cell-mapped reference trajectory, and fast versus faithful evolution.";
    case ExperimentKind::Relax:
      return "Diffusive coupling between neighbouring cells. Fits the decay rate of the gradient norms of a "
             "lowest-mode perturbation against the heat-kernel rate 2*kappa*(2*pi/C)^2.";
    case ExperimentKind::SiTest:
      return "Settings-independence check rho(lambda|a,b) = rho(lambda): chi-square test between binned "
             "lambda and the chosen setting pair.";
    case ExperimentKind::LhvBruteforce:
      return "Every local deterministic strategy and random mixtures of them against the CHSH bound S <= 2.";
  }
  return {};
}

}  // namespace lpw::app
