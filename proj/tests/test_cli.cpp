#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "vpchain/cli/commands.hpp"
#include "vpchain/cli/config.hpp"
#include "vpchain/cli/output.hpp"
#include "vpchain/errors.hpp"
#include "vpchain/rng.hpp"

using namespace vpchain;
using namespace vpchain::cli;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string usage_message(const std::string& text) {
  try {
    validate(parse(text));
  } catch (const UsageError& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("vpchain_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small(const std::string& name) {
  ExperimentConfig c;
  c.seed = 7;
  c.out_dir = scratch(name);
  return c;
}

}  // namespace

TEST_CASE("config file sets every section") {
  const auto c = parse(R"(
; comment
[space]
dim = 3
norm = linf
tau = 1/2
[body]
kind = cube
half_width = 0.75
[run]
seed = 99
replicas = 40
[chain-run]
steps = 12
force_origin = true
[lln]
ns = 10,100
[theorem2]
xs = 0.25,4
ss = -2,3
)");
  CHECK(c.dim == 3);
  CHECK(c.norm == NormKind::Linf);
  CHECK(c.tau == 0.5);
  CHECK(c.body.kind == BodySpec::Kind::Cube);
  CHECK(c.body.half_width == 0.75);
  CHECK(c.require_seed() == 99);
  CHECK(c.replicas_or(5) == 40);
  CHECK(c.steps == 12);
  CHECK(c.force_origin);
  CHECK(c.lln_ns == std::vector<std::uint64_t>{10, 100});
  CHECK(c.xs == std::vector<double>{0.25, 4.0});
  CHECK(c.ss == std::vector<int>{-2, 3});
}

TEST_CASE("tau written as a fraction is exact") {
  CHECK(parse("[space]\ntau = 4/7\n").tau == 4.0 / 7.0);
}

TEST_CASE("usage errors name the offending field") {
  CHECK(usage_message("[space]\nnorm = l3\n").starts_with("space.norm:"));
  CHECK(usage_message("[space]\ntau = 1.5\n").starts_with("space.tau:"));
  CHECK(usage_message("[space]\ndim = 0\n").starts_with("space.dim:"));
  CHECK(usage_message("[space]\ndim = 2.5\n").starts_with("space.dim:"));
  CHECK(usage_message("[body]\nkind = sphere\n").starts_with("body.kind:"));
  CHECK(usage_message("[body]\nkind = cube\nhalf_width = -1\n").starts_with("body.half_width:"));
  CHECK(usage_message("[lln]\nns = 100,10\n").starts_with("lln.ns:"));
  CHECK(usage_message("[duality]\nalpha = 2\n").starts_with("duality.alpha:"));
  CHECK(usage_message("[space]\ncolour = red\n").starts_with("space.colour:"));
  CHECK(usage_message("[chain-run]\nforce_origin = maybe\n").starts_with("chain-run.force_origin:"));
}

TEST_CASE("a missing seed is a usage error") {
  ExperimentConfig c;
  c.out_dir = scratch("noseed");
  CHECK_THROWS_AS(c.require_seed(), UsageError);
  CHECK_THROWS_AS(run_command("chain-run", c), UsageError);
  CHECK_FALSE(fs::exists(c.out_dir));
}

TEST_CASE("unknown subcommand is a usage error") {
  CHECK_THROWS_AS(run_command("plot", small("unknown")), UsageError);
}

TEST_CASE("format_double round-trips") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.uniform(-60.0, 60.0)));
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(4.0 / 7.0) == "0.5714285714285714");
  CHECK(format_double(std::numeric_limits<double>::denorm_min()) == "5e-324");
}

TEST_CASE("csv header records command, seed and config") {
  auto c = small("csv");
  fs::create_directories(c.out_dir);
  {
    CsvWriter w(c.out_dir / "t.csv", "demo", c, {"a", "b"});
    w.row({cell(1), cell(0.25)});
    CHECK_THROWS_AS(w.row({"only one"}), std::logic_error);
  }
  const auto text = slurp(c.out_dir / "t.csv");
  CHECK(text.starts_with("# vpchain demo\n# seed = 7\n"));
  CHECK(text.find("# space.tau = 0.5714285714285714\n") != std::string::npos);
  CHECK(text.find("# theorem2.xs = 0.5,1,2\n") != std::string::npos);
  CHECK(text.ends_with("\na,b\n1,0.25\n"));
}

TEST_CASE("chain-run outputs are byte-identical on rerun") {
  auto c = small("rerun");
  c.steps = 15;
  const auto first = run_command("chain-run", c);
  REQUIRE(first.passed());
  REQUIRE(first.outputs.size() == 3);
  std::vector<std::string> before;
  for (const auto& p : first.outputs) before.push_back(slurp(p));
  const auto second = run_command("chain-run", c);
  for (std::size_t i = 0; i < second.outputs.size(); ++i) CHECK(slurp(second.outputs[i]) == before[i]);

  // A different seed changes the trajectory.
  c.seed = 8;
  run_command("chain-run", c);
  CHECK(slurp(c.out_dir / "chain_run.jsonl") != before[0]);
}

TEST_CASE("chain-run jsonl has one record per step with fixed field order") {
  auto c = small("jsonl");
  c.steps = 6;
  run_command("chain-run", c);
  std::istringstream in(slurp(c.out_dir / "chain_run.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::ordered_json::parse(line);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"step", "u", "balls", "box", "regen"});
    CHECK(j["step"] == n);
    CHECK(j["u"].is_null() == (n == 0));
    CHECK(!j["balls"].empty());
    ++n;
  }
  CHECK(n == 6);
}

TEST_CASE("forced origin renders the same panel every step") {
  auto c = small("forced");
  c.steps = 4;
  c.force_origin = true;
  const auto s = run_command("chain-run", c);
  CHECK(s.passed());
  const auto svg = slurp(c.out_dir / "chain_run.svg");
  // Every panel is a regeneration panel and shows a single circle of radius 80 px.
  std::size_t frames = 0;
  for (auto p = svg.find("(B1)"); p != std::string::npos; p = svg.find("(B1)", p + 1)) ++frames;
  CHECK(frames == 4);
  std::size_t outlines = 0;
  for (auto p = svg.find("r=\"80.000\" fill=\"none\""); p != std::string::npos;
       p = svg.find("r=\"80.000\" fill=\"none\"", p + 1))
    ++outlines;
  CHECK(outlines == 4);
}

TEST_CASE("svg is written only in two dimensions") {
  auto c = small("svg3d");
  c.dim = 3;
  c.steps = 3;
  const auto s = run_command("chain-run", c);
  CHECK(s.outputs.size() == 2);
  CHECK_FALSE(fs::exists(c.out_dir / "chain_run.svg"));
}

TEST_CASE("summary json has the fixed schema") {
  auto c = small("schema");
  c.steps = 3;
  const auto j = run_command("chain-run", c).to_json();
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"experiment", "seed", "wall_time_s", "outputs", "headline", "checks",
                                         "passed", "failures"});
  CHECK(j["experiment"] == "chain-run");
  CHECK(j["seed"] == 7);
  CHECK(j["failures"].empty());
  for (const auto& ch : j["checks"]) {
    CHECK(ch.contains("name"));
    CHECK(ch["passed"].is_boolean());
  }
}

TEST_CASE("failed checks are listed in failures") {
  RunSummary s;
  s.checks = {{"a", true, ""}, {"b", false, "why"}};
  CHECK_FALSE(s.passed());
  CHECK(s.to_json()["failures"] == nlohmann::ordered_json::array({"b"}));
}

TEST_CASE("small runs of every command") {
  auto c = small("all");
  c.replicas = 20;
  c.blocks = 40;
  c.lln_ns = {10, 40};
  c.duality_n = 30;
  c.nn_points = 300;
  c.nn_queries = 50;
  c.height_ns = {10, 50};
  c.theorem2_n = 3;
  for (auto name : kCommands) {
    CAPTURE(name);
    const auto s = run_command(name, c);
    CHECK(s.experiment == name);
    CHECK(!s.outputs.empty());
    for (const auto& p : s.outputs) CHECK(fs::file_size(p) > 0);
    CHECK(!s.checks.empty());
  }
  // Deterministic checks hold even at this size.
  CHECK(run_command("nn-bench", c).passed());
  CHECK(run_command("height-ratio", c).passed());
}

TEST_CASE("regen-stats rejects a cube start") {
  auto c = small("regencube");
  c.body.kind = BodySpec::Kind::Cube;
  CHECK_THROWS_AS(run_command("regen-stats", c), UsageError);
}
