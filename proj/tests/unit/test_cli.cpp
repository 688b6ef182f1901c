#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"

using namespace hfq;
using namespace hfq::cli;
using nlohmann::json;

namespace {

std::string config_dir() {
  const char* env = std::getenv("HFQ_CONFIG_DIR");
  return env ? env : HFQ_SOURCE_CONFIG_DIR;
}

std::string cfg(const std::string& name) { return config_dir() + "/" + name; }

struct Run {
  int code;
  std::string out, err;
  json doc() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_config(const std::string& name, const json& doc) {
  auto path = std::filesystem::temp_directory_path() / ("hfq_test_" + name + ".json");
  std::ofstream(path) << doc.dump();
  return path.string();
}

json find_check(const json& report, const std::string& suffix) {
  for (const auto& c : report["checks"]) {
    const std::string n = c["name"];
    if (n.size() >= suffix.size() && n.compare(n.size() - suffix.size(), suffix.size(), suffix) == 0) return c;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("inspect on the flat generator") {
  Run r = run({"inspect", "--config", cfg("flat.json")});
  REQUIRE(r.code == kExitPass);
  json d = r.doc();
  CHECK(d["tool"] == "hfq");
  CHECK(d["version"] == kToolVersion);
  CHECK(d["command"] == "inspect");
  CHECK(d["config"]["schema_version"] == kSchemaVersion);
  CHECK(d["points"].size() == 4);
  for (const auto& p : d["points"]) {
    for (const auto& row : p["N"])
      for (double v : row) CHECK(v == 0.0);
    CHECK(p["fundamental_tensor"]["upper"][0][0] == 1.0);
  }
  CHECK_FALSE(d.contains("timing"));
  // byte-identical on a second run
  CHECK(run({"inspect", "--config", cfg("flat.json")}).out == r.out);
}

TEST_CASE("point and truncation overrides") {
  Run r = run({"inspect", "--config", cfg("oscillator.json"), "--point", "x=0.1,p=0.2"});
  REQUIRE(r.code == kExitPass);
  json d = r.doc();
  REQUIRE(d["points"].size() == 1);
  CHECK(d["points"][0]["H"].get<double>() == doctest::Approx(0.5 * (0.04 + 2.25 * 0.01)));
  Run s = run({"star", "--config", cfg("flat.json"), "--vmax", "1", "--dmax", "3"});
  REQUIRE(s.code == kExitPass);
  CHECK(s.doc()["config"]["dmax"] == 3);
  Run t = run({"inspect", "--config", cfg("flat.json"), "--timing"});
  CHECK(t.doc()["timing"]["wall_seconds"].get<double>() >= 0.0);
}

TEST_CASE("check passes on the shipped configurations") {
  for (const char* name : {"flat.json", "oscillator.json"}) {
    INFO(name);
    Run r = run({"check", "--config", cfg(name)});
    CHECK(r.code == kExitPass);
    json d = r.doc();
    CHECK(d["summary"]["pass"] == true);
    CHECK(d["summary"]["failed"] == 0);
    CHECK(d["summary"]["checks"].get<int>() == static_cast<int>(d["checks"].size()));
  }
  json c = find_check(run({"check", "--config", cfg("oscillator.json")}).doc(), "closed_form");
  REQUIRE_FALSE(c.is_null());
  CHECK(c["pass"] == true);
}

TEST_CASE("flow output") {
  Run r = run({"flow", "--config", cfg("oscillator.json"), "--format", "csv"});
  REQUIRE(r.code == kExitPass);
  CHECK(r.out.rfind("t,x1,p1,H\n0,", 0) == 0);
  Run m = run({"flow", "--config", cfg("flat.json"), "--format", "csv"});
  CHECK(m.out.rfind("# point 0\n", 0) == 0);
  CHECK(m.out.find("# point 3\n") != std::string::npos);
  json d = run({"flow", "--config", cfg("oscillator.json")}).doc();
  CHECK(d["points"][0]["hamilton"]["final"]["t"] == 5.0);
  CHECK(d["points"][0]["flow_distance"].get<double>() < 1e-5);
}

TEST_CASE("star output") {
  json d = run({"star", "--config", cfg("flat.json")}).doc();
  json p = d["points"][0];
  // x1 * p1 at x = (-0.5, -0.5), p = (-0.5, -0.5)
  CHECK(p["C_fg"][0][0] == 0.25);
  CHECK(p["C_fg"][0][1] == 0.0);
  CHECK(p["C_fg"][1][1].get<double>() == doctest::Approx(-0.5));
  CHECK(p["C_gf"][1][1].get<double>() == doctest::Approx(0.5));
  CHECK(p["poisson_bracket"] == -1.0);
}

TEST_CASE("error exit codes") {
  Run bad = run({"check", "--config", temp_config("bad", {{"schema_version", 1},
                                                          {"n", 1},
                                                          {"generator", "x1*+p1"},
                                                          {"points", {{{"x", {0.1}}, {"p", {0.2}}}}}})});
  CHECK(bad.code == kExitConfig);
  CHECK(bad.err.find("offset 3") != std::string::npos);

  Run unknown = run({"inspect", "--config", temp_config("unknown", {{"schema_version", 1},
                                                                   {"n", 1},
                                                                   {"generator", "p1^2 + q"},
                                                                   {"points", {{{"x", {0.1}}, {"p", {0.2}}}}}})});
  CHECK(unknown.code == kExitConfig);

  CHECK(run({"inspect", "--config", temp_config("version", {{"schema_version", 2}, {"n", 1}, {"generator", "p1^2"}})})
            .code == kExitConfig);
  CHECK(run({"inspect", "--config", cfg("oscillator.json"), "--point", "x=0.1"}).code == kExitConfig);
  CHECK(run({"inspect", "--config", cfg("oscillator.json"), "--point", "x=0.1,0.2,p=0.3,0.4"}).code == kExitConfig);
  CHECK(run({"inspect", "--config", config_dir() + "/missing.json"}).code == kExitConfig);
  CHECK(run({"inspect"}).code == kExitConfig);
  CHECK(run({}).code == kExitConfig);
  CHECK(run({"inspect", "--config", cfg("flat.json"), "--format", "xml"}).code == kExitConfig);

  Run deg = run({"check", "--config", cfg("degenerate.json")});
  CHECK(deg.code == kExitMath);
  json d = deg.doc();
  CHECK(d["summary"]["pass"] == false);
  bool named = false;
  for (const auto& e : d["summary"]["errors"]) named |= e.get<std::string>().find("DegenerateHessian") != std::string::npos;
  CHECK(named);
  CHECK(run({"inspect", "--config", cfg("degenerate.json")}).code == kExitMath);
}

TEST_CASE("tangent-bundle jobs and file output") {
  json doc = {{"schema_version", 1},
              {"n", 1},
              {"bundle", "tangent"},
              {"generator", "0.5*(1 + x1^2)*y1^2"},
              {"points", {{{"x", {0.4}}, {"y", {0.3}}}}}};
  auto out = (std::filesystem::temp_directory_path() / "hfq_test_out.json").string();
  std::filesystem::remove(out);
  Run r = run({"inspect", "--config", temp_config("tangent", doc), "--out", out});
  REQUIRE(r.code == kExitPass);
  CHECK(r.out.empty());
  std::ifstream is(out);
  json d = json::parse(is);
  CHECK(d["config"]["bundle"] == "tangent");
  CHECK(d["points"][0]["N"][0][0].get<double>() == doctest::Approx(0.4 * 0.3 / 1.16));
}

TEST_CASE("config parsing") {
  JobConfig c = parse_config(json{{"schema_version", 1},
                                  {"n", 2},
                                  {"generator", {{"family", "anharmonic"}}},
                                  {"points", {{"random", {{"count", 3}, {"seed", 5}}}}},
                                  {"dmax", 6}});
  CHECK(c.points.size() == 3);
  CHECK(c.family == "anharmonic");
  CHECK(c.quantize_jet_order() == 9);
  CHECK(c.geometry_jet_order() >= 6);
  CHECK_FALSE(c.dual_generator().has_value());
  JobConfig g = parse_config(json{{"schema_version", 1},
                                  {"n", 1},
                                  {"generator", "p1^2"},
                                  {"points", {{"grid", {{"lower", {-1, -1}}, {"upper", {1, 1}}, {"counts", {3, 2}}}}}}});
  CHECK(g.points.size() == 6);
  CHECK_THROWS_AS(parse_config(json{{"n", 1}, {"generator", "p1^2"}}), InputError);
  PhasePoint p = parse_point("x=0.1,0.2,p=0.3,-0.4", 2, Bundle::Cotangent);
  CHECK(p.fiber[1] == -0.4);
  CHECK_THROWS_AS(parse_point("x=0.1,y=0.2", 1, Bundle::Cotangent), InputError);
}
