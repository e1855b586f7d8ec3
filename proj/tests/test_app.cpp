#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lpw/app/config.hpp"
#include "lpw/app/experiments.hpp"
#include "lpw/app/svg.hpp"

using namespace lpw;
using namespace lpw::app;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lpwlab-test-" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<std::string> problems_of(const std::string& text, ExperimentKind kind) {
  try {
    (void)parse_config(text, kind);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

}  // namespace

TEST_SUITE("cli-io") {
  TEST_CASE("minimal config gets defaults") {
    const RunConfig c = parse_config("{}", ExperimentKind::Oracle);
    CHECK(c.experiment == ExperimentKind::Oracle);
    CHECK(c.grid_points == 256);
    CHECK(c.domain_length == 64.0);
    const auto e = echo(c);
    CHECK(e.at("experiment") == "oracle");
    CHECK(e.at("schedule").at("coupling_strength") == 3.2);
    // the echo parses back to the same config
    CHECK(echo(parse_config(e.dump(), ExperimentKind::Oracle)) == e);
  }

  TEST_CASE("config errors are aggregated") {
    auto p = problems_of(R"({"kapa": 1})", ExperimentKind::Relax);
    REQUIRE(p.size() == 1);
    CHECK(p[0].find("\"kapa\"") != std::string::npos);

    p = problems_of(R"({"relaxation": {"kappa": 2.0, "dt": 1.0}})", ExperimentKind::Relax);
    REQUIRE(p.size() == 1);
    CHECK(p[0].find("1/4") != std::string::npos);

    p = problems_of(R"({"grid": {"points_per_axis": 100, "extra": 1}, "n_runs": "many", "relaxation": {"kappa": 2.0, "dt": 1.0}})",
                    ExperimentKind::Relax);
    CHECK(p.size() == 4);

    p = problems_of(R"({"experiment": "relax"})", ExperimentKind::Oracle);
    CHECK(p.size() == 1);
    p = problems_of(R"({"policy": {"kind": "lattice-derived"}})", ExperimentKind::PwChsh);
    CHECK(p.size() == 1);
    p = problems_of(R"({"policy": {"kind": "fixed-list", "pairs": [[0, 3]]}})", ExperimentKind::Oracle);
    CHECK(p.size() == 1);
    p = problems_of(R"({"dt": 1.0})", ExperimentKind::PwChsh);
    CHECK(p.size() == 1);
    p = problems_of("{not json", ExperimentKind::Oracle);
    CHECK(p.size() == 1);
  }

  TEST_CASE("seed flows into the default independent policy") {
    const RunConfig c = parse_config(R"({"master_seed": 99})", ExperimentKind::SiTest);
    REQUIRE(std::holds_alternative<IndependentUniform>(c.policy));
    CHECK(std::get<IndependentUniform>(c.policy).seed == 99);
  }

  TEST_CASE("oracle experiment writes exact S and a verifiable manifest") {
    RunConfig c = parse_config(R"({"n_runs": 2000, "plots": true})", ExperimentKind::Oracle);
    c.output_dir = scratch("oracle").string();
    const auto summary = execute(c);
    const auto report = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "report.json"));
    CHECK(std::abs(report.at("exact").at("S").get<double>() - 2.0 * std::numbers::sqrt2) < 1e-12);
    const auto manifest = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "manifest.json"));
    CHECK(manifest.at("config") == echo(c));
    CHECK(manifest.at("outputs").size() == 4);
    for (const auto& o : manifest.at("outputs")) {
      CHECK(sha256_hex(slurp(fs::path(c.output_dir) / o.at("file").get<std::string>())) == o.at("sha256"));
    }
    CHECK_FALSE(fs::exists(fs::path(c.output_dir) / "manifest.json.tmp"));
    const std::string svg = slurp(fs::path(c.output_dir) / "chsh_s.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("local bound 2") != std::string::npos);
  }

  TEST_CASE("same config and seed give byte-identical artifacts") {
    RunConfig c = parse_config(R"({"n_runs": 3000, "master_seed": 12})", ExperimentKind::SiTest);
    c.output_dir = scratch("det-a").string();
    const auto a = execute(c);
    c.output_dir = scratch("det-b").string();
    const auto b = execute(c);
    CHECK(slurp(a.output_dir / "ledger.csv") == slurp(b.output_dir / "ledger.csv"));
    CHECK(a.manifest.at("outputs") == b.manifest.at("outputs"));
    c.master_seed = 13;
    c.policy = IndependentUniform{13};
    CHECK(run_experiment(c).artifacts[0].content != slurp(a.output_dir / "ledger.csv"));
  }

  TEST_CASE("relax and lhv experiments report their checks") {
    RunConfig relax = parse_config(R"({"relaxation": {"steps": 100}})", ExperimentKind::Relax);
    const auto r = run_experiment(relax).report;
    CHECK(r.at("z").at("fitted_rate").get<double>() ==
          doctest::Approx(r.at("z").at("discrete_rate").get<double>()).epsilon(1e-6));
    CHECK(r.at("phi").at("relative_error").get<double>() < 0.01);

    const auto l = run_experiment(parse_config("{}", ExperimentKind::LhvBruteforce)).report;
    CHECK(l.at("max_split_absolute") == 2.0);
    CHECK(l.at("mixture_violations") == 0);
  }

  TEST_CASE("module errors carry the experiment name") {
    RunConfig c = parse_config("{}", ExperimentKind::Oracle);
    c.policy = FixedList{};
    c.output_dir = scratch("fail").string();
    CHECK_THROWS_WITH_AS(execute(c), doctest::Contains("oracle: "), std::runtime_error);
    CHECK_FALSE(fs::exists(fs::path(c.output_dir) / "manifest.json"));
  }

  TEST_CASE("sha256") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("svg plots") {
    Plot p{"t", "x", "y", true, {{"s", {{0, 1}, {1, 0.1}, {2, 0.0}}, "#000", false, {}}}, {{0.5, "h", "#111"}}};
    const std::string svg = render_svg(p);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("1e-1") != std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);
  }

  TEST_CASE("every experiment has help text") {
    for (auto kind : all_experiments()) {
      CHECK_FALSE(describe(kind).empty());
      CHECK(experiment_from_string(to_string(kind)) == kind);
    }
    CHECK_THROWS(experiment_from_string("nope"));
  }
}
