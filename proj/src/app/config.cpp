#include "lpw/app/config.hpp"

#include <sstream>

namespace lpw::app {

using nlohmann::json;

namespace {

struct Entry {
  ExperimentKind kind;
  const char* name;
};
constexpr Entry kExperiments[] = {
    {ExperimentKind::Oracle, "oracle"},
    {ExperimentKind::PwChsh, "pw-chsh"},
    {ExperimentKind::LpwChsh, "lpw-chsh"},
    {ExperimentKind::LpwEquivalence, "lpw-equivalence"},
    {ExperimentKind::Relax, "relax"},
    {ExperimentKind::SiTest, "si-test"},
    {ExperimentKind::LhvBruteforce, "lhv-bruteforce"},
};

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

/// Reads typed fields out of one JSON object, remembering which keys were
/// consumed so the rest can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path, std::vector<std::string>& problems)
      : object_(object), path_(std::move(path)), problems_(problems) {
    if (!object_.is_object()) problems_.push_back(path_ + ": expected an object");
  }

  ~ObjectReader() {
    if (!object_.is_object()) return;
    for (const auto& [key, value] : object_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        problems_.push_back("unknown key \"" + qualified(key) + "\"");
      }
    }
  }

  template <class T>
  void read(const char* key, T& target) {
    seen_.emplace_back(key);
    if (!object_.is_object() || !object_.contains(key)) return;
    try {
      target = object_.at(key).get<T>();
    } catch (const json::exception&) {
      problems_.push_back(qualified(key) + ": wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.emplace_back(key);
    if (!object_.is_object() || !object_.contains(key)) return nullptr;
    return &object_.at(key);
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& object_;
  std::string path_;
  std::vector<std::string>& problems_;
  std::vector<std::string> seen_;
};

void read_window(ObjectReader& r, const char* key, CouplingWindow& w, std::vector<std::string>& problems) {
  if (const json* v = r.child(key)) {
    if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number()) {
      w = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    } else {
      problems.push_back(r.qualified(key) + ": expected [t_on, t_off]");
    }
  }
}

SettingPolicy read_policy(const json& v, std::vector<std::string>& problems, std::uint64_t seed) {
  ObjectReader r(v, "policy", problems);
  std::string kind = "fixed-list";
  r.read("kind", kind);
  if (kind == "independent-uniform") {
    IndependentUniform p{seed};
    r.read("seed", p.seed);
    return p;
  }
  if (kind == "pi-digits") {
    PiDigits p;
    r.read("offset", p.offset);
    r.read("odd_selects_unprimed", p.odd_selects_unprimed);
    return p;
  }
  if (kind == "lattice-derived") {
    LatticeDerived p;
    r.read("wing1_cell", p.wing1_cell);
    r.read("wing2_cell", p.wing2_cell);
    return p;
  }
  if (kind == "fixed-list") {
    FixedList p{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
    if (const json* pairs = r.child("pairs")) {
      p.pairs.clear();
      bool ok = pairs->is_array() && !pairs->empty();
      if (ok) {
        for (const auto& e : *pairs) {
          if (!(e.is_array() && e.size() == 2 && e[0].is_number_integer() && e[1].is_number_integer())) {
            ok = false;
            break;
          }
          PairIndex idx{e[0].get<int>(), e[1].get<int>()};
          if (idx.a_index < 0 || idx.a_index > 1 || idx.b_index < 0 || idx.b_index > 1) {
            ok = false;
            break;
          }
          p.pairs.push_back(idx);
        }
      }
      if (!ok) problems.push_back("policy.pairs: expected a nonempty list of [0|1, 0|1]");
    }
    return p;
  }
  problems.push_back("policy.kind: unknown policy \"" + kind + "\"");
  return FixedList{{{0, 0}}};
}

json policy_json(const SettingPolicy& policy) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IndependentUniform>) {
          return {{"kind", "independent-uniform"}, {"seed", p.seed}};
        } else if constexpr (std::is_same_v<T, PiDigits>) {
          return {{"kind", "pi-digits"}, {"offset", p.offset}, {"odd_selects_unprimed", p.odd_selects_unprimed}};
        } else if constexpr (std::is_same_v<T, FixedList>) {
          json pairs = json::array();
          for (const auto& e : p.pairs) pairs.push_back({e.a_index, e.b_index});
          return {{"kind", "fixed-list"}, {"pairs", pairs}};
        } else {
          return {{"kind", "lattice-derived"}, {"wing1_cell", p.wing1_cell}, {"wing2_cell", p.wing2_cell}};
        }
      },
      policy);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& e : kExperiments) {
    if (e.kind == kind) return e.name;
  }
  return "unknown";
}

ExperimentKind experiment_from_string(const std::string& name) {
  for (const auto& e : kExperiments) {
    if (name == e.name) return e.kind;
  }
  throw std::invalid_argument("unknown experiment \"" + name + "\"");
}

const std::vector<ExperimentKind>& all_experiments() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> v;
    for (const auto& e : kExperiments) v.push_back(e.kind);
    return v;
  }();
  return kinds;
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument("invalid configuration: " + join(problems)), problems_(std::move(problems)) {}

MeasurementSchedule RunConfig::measurement_schedule() const {
  return MeasurementSchedule::create(schedule.coupling_strength, schedule.wing1, schedule.wing2, schedule.t_read,
                                     schedule.packet_width, constants);
}

EngineParams RunConfig::engine() const {
  return {grid(), constants, measurement_schedule(), dt, cell_count};
}

RelaxationParams RunConfig::relaxation_params() const {
  return {relax.kappa, relax.dt, relax.internal_dynamics, relax.renormalize_cells};
}

RunConfig default_config(ExperimentKind kind) {
  RunConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::Oracle:
    case ExperimentKind::PwChsh:
      c.n_runs = 16384;
      break;
    case ExperimentKind::LpwChsh:
      c.n_runs = 4096;
      c.cell_count = 16;
      break;
    case ExperimentKind::LpwEquivalence:
      c.steps = 100;
      break;
    case ExperimentKind::Relax:
      c.grid_points = 32;
      c.cell_count = 32;
      break;
    case ExperimentKind::SiTest:
      c.n_runs = 10000;
      c.policy = IndependentUniform{c.master_seed};
      break;
    case ExperimentKind::LhvBruteforce:
      break;
  }
  return c;
}

void validate(const RunConfig& c) {
  std::vector<std::string> problems;
  auto check = [&problems](auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      problems.emplace_back(e.what());
    }
  };
  bool constants_ok = true;
  std::optional<GridSpec> grid;
  std::optional<RingSpec> ring;
  check([&] {
    constants_ok = false;
    c.constants.validate();
    constants_ok = true;
  });
  check([&] { grid.emplace(c.grid()); });
  check([&] { ring.emplace(c.ring()); });
  if (constants_ok) check([&] { (void)c.measurement_schedule(); });

  if (grid && constants_ok) {
    const bool uses_singlet = c.experiment == ExperimentKind::PwChsh || c.experiment == ExperimentKind::LpwChsh ||
                              c.experiment == ExperimentKind::LpwEquivalence;
    const double sigma = c.schedule.packet_width;
    if (uses_singlet && (sigma < 4.0 * grid->spacing() || sigma > grid->length() / 16.0)) {
      problems.push_back("schedule.packet_width must lie in [4 dx, L/16]");
    }
    const double limit = stability_limit(*grid, c.constants);
    if (!(c.dt > 0.0) || 0.5 * c.dt > limit) {
      std::ostringstream msg;
      msg << "dt = " << c.dt << " exceeds the engine limit 2 x " << limit;
      problems.push_back(msg.str());
    }
    if (c.relax.internal_dynamics && 0.25 * c.relax.dt > limit) {
      problems.push_back("relaxation.dt too large for internal dynamics");
    }
  }
  if (!(c.relax.kappa >= 0.0)) problems.push_back("relaxation.kappa must be nonnegative");
  if (!(c.relax.dt > 0.0)) problems.push_back("relaxation.dt must be positive");
  if (ring) {
    const double r = c.relax.kappa * c.relax.dt / (ring->spacing() * ring->spacing());
    if (r > 0.25) {
      std::ostringstream msg;
      msg << "relaxation kappa*dt/spacing^2 = " << r << " violates the explicit stability bound 1/4";
      problems.push_back(msg.str());
    }
  }
  if (c.n_runs == 0) problems.push_back("n_runs must be at least 1");
  if (c.steps == 0) problems.push_back("steps must be at least 1");
  if (c.n_bins < 2) problems.push_back("n_bins must be at least 2");
  if (const auto* d = std::get_if<LatticeDerived>(&c.policy)) {
    if (d->wing1_cell >= c.cell_count || d->wing2_cell >= c.cell_count) {
      problems.push_back("policy apparatus cells must lie inside the ring");
    }
    if (c.experiment != ExperimentKind::LpwChsh) problems.push_back("lattice-derived policy needs the lpw-chsh experiment");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

RunConfig parse_config(const std::string& text, ExperimentKind kind) {
  RunConfig c = default_config(kind);
  std::vector<std::string> problems;
  json doc;
  try {
    doc = text.empty() ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("malformed JSON: ") + e.what()});
  }
  {
    ObjectReader r(doc, "", problems);
    std::string experiment = to_string(kind);
    r.read("experiment", experiment);
    if (experiment != to_string(kind)) {
      problems.push_back("config is for experiment \"" + experiment + "\" but \"" + to_string(kind) + "\" was requested");
    }
    r.read("master_seed", c.master_seed);
    if (std::holds_alternative<IndependentUniform>(c.policy)) c.policy = IndependentUniform{c.master_seed};
    r.read("output_dir", c.output_dir);
    r.read("plots", c.plots);
    r.read("dt", c.dt);
    r.read("n_runs", c.n_runs);
    r.read("steps", c.steps);
    r.read("n_bins", c.n_bins);
    r.read("n_mixtures", c.n_mixtures);
    if (const json* g = r.child("grid")) {
      ObjectReader gr(*g, "grid", problems);
      gr.read("points_per_axis", c.grid_points);
      gr.read("domain_length", c.domain_length);
    }
    if (const json* k = r.child("constants")) {
      ObjectReader kr(*k, "constants", problems);
      kr.read("hbar", c.constants.hbar);
      kr.read("mass", c.constants.mass);
    }
    if (const json* s = r.child("schedule")) {
      ObjectReader sr(*s, "schedule", problems);
      sr.read("coupling_strength", c.schedule.coupling_strength);
      read_window(sr, "wing1_window", c.schedule.wing1, problems);
      read_window(sr, "wing2_window", c.schedule.wing2, problems);
      sr.read("t_read", c.schedule.t_read);
      sr.read("packet_width", c.schedule.packet_width);
    }
    if (const json* ring = r.child("ring")) {
      ObjectReader rr(*ring, "ring", problems);
      rr.read("cell_count", c.cell_count);
    }
    if (const json* q = r.child("quad")) {
      ObjectReader qr(*q, "quad", problems);
      double a = c.quad.a.radians(), ap = c.quad.a_prime.radians(), b = c.quad.b.radians(),
             bp = c.quad.b_prime.radians();
      qr.read("a", a);
      qr.read("a_prime", ap);
      qr.read("b", b);
      qr.read("b_prime", bp);
      c.quad = {Angle(a), Angle(ap), Angle(b), Angle(bp)};
    }
    if (const json* p = r.child("policy")) c.policy = read_policy(*p, problems, c.master_seed);
    if (const json* x = r.child("relaxation")) {
      ObjectReader xr(*x, "relaxation", problems);
      xr.read("kappa", c.relax.kappa);
      xr.read("dt", c.relax.dt);
      xr.read("internal_dynamics", c.relax.internal_dynamics);
      xr.read("renormalize_cells", c.relax.renormalize_cells);
      xr.read("steps", c.relax.steps);
      xr.read("mode_amplitude", c.relax.mode_amplitude);
    }
  }
  try {
    validate(c);
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems().begin(), e.problems().end());
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

json echo(const RunConfig& c) {
  return {{"experiment", to_string(c.experiment)},
          {"master_seed", c.master_seed},
          {"output_dir", c.output_dir},
          {"plots", c.plots},
          {"grid", {{"points_per_axis", c.grid_points}, {"domain_length", c.domain_length}}},
          {"constants", {{"hbar", c.constants.hbar}, {"mass", c.constants.mass}}},
          {"schedule",
           {{"coupling_strength", c.schedule.coupling_strength},
            {"wing1_window", {c.schedule.wing1.on, c.schedule.wing1.off}},
            {"wing2_window", {c.schedule.wing2.on, c.schedule.wing2.off}},
            {"t_read", c.schedule.t_read},
            {"packet_width", c.schedule.packet_width}}},
          {"dt", c.dt},
          {"ring", {{"cell_count", c.cell_count}}},
          {"quad",
           {{"a", c.quad.a.radians()},
            {"a_prime", c.quad.a_prime.radians()},
            {"b", c.quad.b.radians()},
            {"b_prime", c.quad.b_prime.radians()}}},
          {"policy", policy_json(c.policy)},
          {"n_runs", c.n_runs},
          {"steps", c.steps},
          {"n_bins", c.n_bins},
          {"n_mixtures", c.n_mixtures},
          {"relaxation",
           {{"kappa", c.relax.kappa},
            {"dt", c.relax.dt},
            {"internal_dynamics", c.relax.internal_dynamics},
            {"renormalize_cells", c.relax.renormalize_cells},
            {"steps", c.relax.steps},
            {"mode_amplitude", c.relax.mode_amplitude}}}};
}

}  // namespace lpw::app
