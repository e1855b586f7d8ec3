#include "lpw/bell_harness.hpp"

#include <mpfr.h>

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace lpw {

// ---- policies --------------------------------------------------------------

std::string pi_digits(std::size_t count) {
  static std::mutex mutex;
  static std::string cache;
  std::lock_guard lock(mutex);
  if (cache.size() < count) {
    const std::size_t want = std::max<std::size_t>(count, 2 * cache.size()) + 16;
    const auto bits = static_cast<mpfr_prec_t>(static_cast<double>(want) * 3.3219280948873623 + 64);
    mpfr_t pi;
    mpfr_init2(pi, bits);
    mpfr_const_pi(pi, MPFR_RNDN);
    mpfr_exp_t exponent = 0;
    char* text = mpfr_get_str(nullptr, &exponent, 10, want + 1, pi, MPFR_RNDZ);
    // text is "31415926..." with exponent 1; the guard digits absorb rounding
    cache.assign(text + 1, want - 8);
    mpfr_free_str(text);
    mpfr_clear(pi);
  }
  return cache.substr(0, count);
}

std::string describe(const SettingPolicy& policy) {
  std::ostringstream out;
  std::visit(
      [&out](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IndependentUniform>) {
          out << "independent-uniform(seed=" << p.seed << ")";
        } else if constexpr (std::is_same_v<T, PiDigits>) {
          out << "pi-digits(offset=" << p.offset << ", odd->" << (p.odd_selects_unprimed ? "unprimed" : "primed")
              << ")";
        } else if constexpr (std::is_same_v<T, FixedList>) {
          out << "fixed-list(";
          for (std::size_t i = 0; i < p.pairs.size(); ++i) {
            out << (i ? " " : "") << p.pairs[i].a_index << p.pairs[i].b_index;
          }
          out << ")";
        } else {
          out << "lattice-derived(wing1_cell=" << p.wing1_cell << ", wing2_cell=" << p.wing2_cell << ")";
        }
      },
      policy);
  return out.str();
}

PairIndex settings_from_digests(std::uint64_t wing1_digest, std::uint64_t wing2_digest) {
  return {static_cast<int>(wing1_digest & 1u), static_cast<int>((wing2_digest >> 1) & 1u)};
}

PairIndex choose_settings(const SettingPolicy& policy, std::size_t run_index, const LatticeState* context) {
  return std::visit(
      [&](const auto& p) -> PairIndex {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IndependentUniform>) {
          RngStream rng(p.seed, run_index, StreamPurpose::Settings);
          const std::uint64_t bits = rng.bits();
          return {static_cast<int>(bits >> 63), static_cast<int>((bits >> 62) & 1u)};
        } else if constexpr (std::is_same_v<T, PiDigits>) {
          const std::size_t first = p.offset + 2 * run_index;
          const std::string digits = pi_digits(first + 2);
          auto pick = [&p](char d) {
            const bool odd = ((d - '0') % 2) == 1;
            return odd == p.odd_selects_unprimed ? 0 : 1;
          };
          return {pick(digits[first]), pick(digits[first + 1])};
        } else if constexpr (std::is_same_v<T, FixedList>) {
          if (p.pairs.empty()) throw std::invalid_argument("fixed-list policy is empty");
          return p.pairs[run_index % p.pairs.size()];
        } else {
          if (context == nullptr) throw std::invalid_argument("lattice-derived policy needs a lattice context");
          if (p.wing1_cell >= context->cells.size() || p.wing2_cell >= context->cells.size()) {
            throw std::invalid_argument("lattice-derived apparatus cell outside the ring");
          }
          return settings_from_digests(cell_digest(context->cells[p.wing1_cell]),
                                       cell_digest(context->cells[p.wing2_cell]));
        }
      },
      policy);
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::QuantumOracle: return "quantum-oracle";
    case ModelKind::PilotWave: return "pilot-wave";
    case ModelKind::Lpw: return "lpw";
    case ModelKind::Lhv: return "lhv";
  }
  return "unknown";
}

// ---- ensembles -------------------------------------------------------------

std::optional<int> lattice_readout(const MassDensity& density, const RingSpec& ring, int particle) {
  int above = 0;
  int below = 0;
  const double mid = 0.5 * ring.circumference();
  for (std::size_t x = 0; x < density.occupancy.size(); ++x) {
    const auto& occ = density.occupancy[x];
    if (std::find(occ.begin(), occ.end(), particle) == occ.end()) continue;
    (ring.cell_center(x) > mid ? above : below)++;
  }
  if (above > 0 && below == 0) return 1;
  if (below > 0 && above == 0) return -1;
  return std::nullopt;
}

namespace {

void validate_model(const ModelSpec& model, const SettingPolicy& policy, std::size_t n_runs) {
  if (n_runs == 0) throw std::invalid_argument("n_runs must be at least 1");
  if (model.kind == ModelKind::Lhv && !model.mixture) {
    throw std::invalid_argument("lhv model needs a strategy mixture");
  }
  if (const auto* fixed = std::get_if<FixedList>(&policy)) {
    if (fixed->pairs.empty()) throw std::invalid_argument("fixed-list policy is empty");
    for (const auto& p : fixed->pairs) {
      if (p.a_index < 0 || p.a_index > 1 || p.b_index < 0 || p.b_index > 1) {
        throw std::invalid_argument("fixed-list entries must be quad corners (0/1, 0/1)");
      }
    }
  }
  if (const auto* derived = std::get_if<LatticeDerived>(&policy)) {
    if (model.kind != ModelKind::Lpw) {
      throw std::invalid_argument("lattice-derived settings need the lpw model, got " + to_string(model.kind));
    }
    if (derived->wing1_cell >= model.engine.lattice_cells || derived->wing2_cell >= model.engine.lattice_cells) {
      throw std::invalid_argument("lattice-derived apparatus cell outside the ring");
    }
  }
  if (model.kind == ModelKind::PilotWave || model.kind == ModelKind::Lpw) {
    model.engine.constants.validate();
    if (!(model.engine.dt > 0.0) ||
        0.5 * model.engine.dt > stability_limit(model.engine.grid, model.engine.constants)) {
      throw std::invalid_argument("engine dt outside the stability limit");
    }
  }
  if (model.kind == ModelKind::Lpw) {
    RingSpec(model.engine.lattice_cells, model.engine.grid.length() / static_cast<double>(model.engine.lattice_cells));
  }
}

int pair_key(PairIndex p) { return 2 * p.a_index + p.b_index; }

}  // namespace

RunLedger run_bell_ensemble(const ModelSpec& model, const ChshQuad& quad, const SettingPolicy& policy,
                            std::size_t n_runs, std::uint64_t master_seed) {
  validate_model(model, policy, n_runs);
  const EngineParams& engine = model.engine;
  const GridSpec& grid = engine.grid;

  RunLedger ledger;
  ledger.model = model.kind;
  ledger.quad = quad;
  ledger.policy = describe(policy);
  ledger.master_seed = master_seed;
  ledger.domain_length = grid.length();
  ledger.records.resize(n_runs);

  std::optional<SpinorField> template_field;
  std::optional<BornSampler> sampler;
  if (model.kind == ModelKind::PilotWave || model.kind == ModelKind::Lpw) {
    template_field = prepare_singlet_state(grid, engine.schedule.packet_width());
    sampler.emplace(*template_field);
  }
  const RingSpec ring(std::max<std::size_t>(engine.lattice_cells, 2),
                      grid.length() / static_cast<double>(std::max<std::size_t>(engine.lattice_cells, 2)));

  // the field part of every lattice cell is the template, so its digest is shared
  std::optional<CellDigest> field_digest;
  if (std::holds_alternative<LatticeDerived>(policy)) {
    field_digest.emplace();
    field_digest->add_field(*template_field);
  }

  for (std::size_t r = 0; r < n_runs; ++r) {
    EnsembleRecord& rec = ledger.records[r];
    rec.run_id = r;
    RngStream lambda_rng(master_seed, r, StreamPurpose::Lambda);
    rec.seed = lambda_rng.seed();
    switch (model.kind) {
      case ModelKind::PilotWave:
      case ModelKind::Lpw:
        rec.lambda = sampler->sample(lambda_rng);
        break;
      case ModelKind::QuantumOracle: {
        const double sigma = engine.schedule.packet_width();
        rec.lambda = {grid.wrap(grid.midpoint() + sigma * lambda_rng.normal()),
                      grid.wrap(grid.midpoint() + sigma * lambda_rng.normal())};
        break;
      }
      case ModelKind::Lhv: {
        const auto k = model.mixture->draw(lambda_rng.uniform());
        rec.lambda = {static_cast<double>(model.mixture->entries()[k].first.index()), 0.0};
        break;
      }
    }

    if (const auto* derived = std::get_if<LatticeDerived>(&policy)) {
      CellDigest d = *field_digest;
      d.add_config(rec.lambda);
      (void)derived;
      rec.pair = settings_from_digests(d.value(), d.value());
    } else {
      rec.pair = choose_settings(policy, r);
    }
    const SettingPair setting = quad.pair(rec.pair);
    rec.alpha = setting.alpha.radians();
    rec.beta = setting.beta.radians();

    if (model.kind == ModelKind::QuantumOracle) {
      RngStream outcome_rng(master_seed, r, StreamPurpose::Outcome);
      rec.outcome = sample_quantum_outcomes(setting.relative(), outcome_rng);
    } else if (model.kind == ModelKind::Lhv) {
      const auto s = DeterministicStrategy::from_index(static_cast<int>(rec.lambda.x1));
      rec.outcome = {s.wing1(rec.pair.a_index), s.wing2(rec.pair.b_index)};
    }
  }

  if (model.kind == ModelKind::PilotWave || model.kind == ModelKind::Lpw) {
    std::map<int, std::vector<std::size_t>> batches;
    for (const auto& rec : ledger.records) batches[pair_key(rec.pair)].push_back(rec.run_id);

    const double t_read = engine.schedule.readout_time();
    const double band = engine.schedule.packet_width_at(t_read, engine.constants);
    for (const auto& [key, runs] : batches) {
      const PairIndex idx{key / 2, key % 2};
      const MeasurementDynamics dynamics{engine.constants, quad.pair(idx), engine.schedule};
      std::vector<ParticleConfig> configs;
      configs.reserve(runs.size());
      for (std::size_t r : runs) configs.push_back(ledger.records[r].lambda);

      if (model.kind == ModelKind::PilotWave) {
        const MeasurementRun result = run_measurement(*template_field, dynamics, configs, engine.dt);
        for (std::size_t i = 0; i < runs.size(); ++i) {
          ledger.records[runs[i]].outcome = result.outcomes[i].outcome;
          ledger.records[runs[i]].flagged = result.outcomes[i].flagged;
        }
        continue;
      }

      auto ensemble = SharedFieldEnsemble::homogeneous(ring, *template_field, configs);
      const auto full_steps = static_cast<std::size_t>(std::floor(t_read / engine.dt + 1e-9));
      const double remainder = t_read - static_cast<double>(full_steps) * engine.dt;
      for (std::size_t s = 0; s < full_steps; ++s) ensemble.step(dynamics, engine.dt);
      if (remainder > 1e-12 * t_read) ensemble.step(dynamics, remainder);

      for (std::size_t i = 0; i < runs.size(); ++i) {
        EnsembleRecord& rec = ledger.records[runs[i]];
        const auto cells = ensemble.cells(i);
        const MassDensity rho = mass_density(ring, cells, {engine.constants.mass, engine.constants.mass});
        const auto a = lattice_readout(rho, ring, 1);
        const auto b = lattice_readout(rho, ring, 2);
        rec.outcome = {a.value_or(readout_sign(cells[0].x1, grid)), b.value_or(readout_sign(cells[0].x2, grid))};
        bool guarded = false;
        for (const auto& z : cells) {
          guarded = guarded || in_guard_band(z.x1, grid, band) || in_guard_band(z.x2, grid, band);
        }
        rec.flagged = !a || !b || guarded || ensemble.stalled(i);
      }
    }
  }
  return ledger;
}

// ---- statistics ------------------------------------------------------------

namespace {
std::string pair_label(PairIndex p) {
  return std::string("(") + (p.a_index == 0 ? "a" : "a'") + "," + (p.b_index == 0 ? "b" : "b'") + ")";
}
}  // namespace

ChshReport chsh_report(const RunLedger& ledger) {
  std::array<std::vector<OutcomePair>, 4> buckets;
  ChshReport report;
  for (const auto& rec : ledger.records) {
    if (rec.flagged) {
      ++report.flagged;
      continue;
    }
    buckets[pair_key(rec.pair)].push_back(rec.outcome);
  }
  Correlators e;
  double var = 0.0;
  for (int key = 0; key < 4; ++key) {
    const PairIndex idx{key / 2, key % 2};
    if (buckets[key].size() < 30) {
      throw std::invalid_argument("pair " + pair_label(idx) + " has only " + std::to_string(buckets[key].size()) +
                                  " unflagged runs (need 30)");
    }
    const auto est = estimate_correlator(buckets[key]);
    report.pairs[key] = {idx, est};
    e[idx] = est.value;
    var += est.std_error * est.std_error;
  }
  report.s = chsh_value(e, ChshForm::SplitAbsolute);
  report.s_std_error = std::sqrt(var);
  report.verdict = report.s - 3.0 * report.s_std_error > report.local_bound ? Verdict::ViolatesBound
                                                                             : Verdict::BelowBound;
  return report;
}

SiTestReport si_test(const RunLedger& ledger, std::size_t n_bins) {
  if (n_bins < 2) throw std::invalid_argument("si_test needs at least 2 bins per coordinate");
  if (ledger.records.size() < 2) throw std::invalid_argument("si_test needs at least 2 runs");
  if (!(ledger.domain_length > 0.0)) throw std::invalid_argument("ledger has no domain length");

  const double l = ledger.domain_length;
  auto bin_of = [&](double x) {
    const double w = std::clamp(x / l, 0.0, 1.0);
    return std::min(static_cast<std::size_t>(w * static_cast<double>(n_bins)), n_bins - 1);
  };
  const std::size_t flat = n_bins * n_bins;
  std::vector<std::array<double, 4>> table(flat, {0, 0, 0, 0});
  std::array<double, 4> col{0, 0, 0, 0};
  for (const auto& rec : ledger.records) {
    const std::size_t b = bin_of(rec.lambda.x1) * n_bins + bin_of(rec.lambda.x2);
    const int key = pair_key(rec.pair);
    table[b][key] += 1.0;
    col[key] += 1.0;
  }
  std::vector<int> columns;
  for (int k = 0; k < 4; ++k) {
    if (col[k] > 0.0) columns.push_back(k);
  }
  if (columns.size() < 2) throw std::invalid_argument("si_test: fewer than two setting pairs occur (degenerate table)");
  const double total = static_cast<double>(ledger.records.size());
  double min_col = total;
  for (int k : columns) min_col = std::min(min_col, col[k]);
  const double row_needed = 5.0 * total / min_col;

  std::vector<std::array<double, 4>> rows;
  std::array<double, 4> pending{0, 0, 0, 0};
  double pending_total = 0.0;
  for (const auto& row : table) {
    double row_total = row[0] + row[1] + row[2] + row[3];
    if (row_total == 0.0) continue;
    for (int k = 0; k < 4; ++k) pending[k] += row[k];
    pending_total += row_total;
    if (pending_total >= row_needed) {
      rows.push_back(pending);
      pending = {0, 0, 0, 0};
      pending_total = 0.0;
    }
  }
  if (pending_total > 0.0) {
    if (rows.empty()) {
      rows.push_back(pending);
    } else {
      for (int k = 0; k < 4; ++k) rows.back()[k] += pending[k];
    }
  }
  if (rows.size() < 2) throw std::invalid_argument("si_test: too few runs for two merged bins (degenerate table)");

  double chi2 = 0.0;
  for (const auto& row : rows) {
    const double row_total = row[0] + row[1] + row[2] + row[3];
    for (int k : columns) {
      const double expected = row_total * col[k] / total;
      const double d = row[k] - expected;
      chi2 += d * d / expected;
    }
  }
  SiTestReport report;
  report.statistic = chi2;
  report.dof = (rows.size() - 1) * (columns.size() - 1);
  report.p_value = boost::math::gamma_q(0.5 * static_cast<double>(report.dof), 0.5 * chi2);
  report.n_bins = n_bins;
  report.rows = rows.size();
  report.columns = columns.size();
  std::ostringstream desc;
  desc << n_bins << "x" << n_bins << " equal-width bins on [0, " << l << ")^2, merged to " << rows.size()
       << " rows with expected counts >= 5";
  report.binning = desc.str();
  return report;
}

}  // namespace lpw
