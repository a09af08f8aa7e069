#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "conic_lmcf/cli.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = conic_lmcf::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("conic_lmcf_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

const json& schema() {
  static const json s = load(CONIC_LMCF_SCHEMA);
  return s;
}

void check_report(const fs::path& dir, const std::string& command) {
  const json r = load(dir / "report.json");
  const std::string problem = oracle::validate(schema(), r);
  CHECK_MESSAGE(problem.empty(), problem);
  CHECK(r["command"] == command);
  for (const auto& a : r["artifacts"]) CHECK(fs::exists(dir / a.get<std::string>()));
}

}  // namespace

TEST_CASE("stability prints index 0 and the harmonic counts") {
  const fs::path d = scratch("stability");
  const Result r = invoke({"stability", "--cone", "hl-torus-3", "--out", d.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("index 0\n", 0) == 0);
  CHECK(r.out.find(" 1 (order 0)") != std::string::npos);
  CHECK(r.out.find(" 6 (order 1)") != std::string::npos);
  CHECK(r.out.find(" 6 (order 2)") != std::string::npos);
  check_report(d, "stability");
  CHECK(load(d / "stability.json")["index"] == 0);
}

TEST_CASE("fredholm prints -13") {
  const fs::path d = scratch("fredholm");
  const Result r = invoke({"fredholm", "--cone", "hl-torus-3", "--gamma", "2.1", "--out", d.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out == "-13\n");
  check_report(d, "fredholm");
  const Result a = invoke({"fredholm", "--cone", "hl-torus-3", "--gamma", "2.1", "--asymptotics", "--out", d.string()});
  CHECK(a.out == "0\n");
}

TEST_CASE("spectrum of the 2-sphere") {
  const fs::path d = scratch("spectrum");
  const Result r = invoke({"spectrum", "--link", "sphere", "--dim", "2", "--lmax", "6", "--out", d.string()});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(d / "spectrum.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<double, int>> rows;
  while (std::getline(in, line)) {
    const auto c = line.find(',');
    rows.emplace_back(std::stod(line.substr(0, c)), std::stoi(line.substr(c + 1)));
  }
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::make_pair(0.0, 1));
  CHECK(rows[1].first == doctest::Approx(2.0));
  CHECK(rows[1].second == 3);
  CHECK(rows[2].first == doctest::Approx(6.0));
  CHECK(rows[2].second == 5);
  check_report(d, "spectrum");
}

TEST_CASE("every subcommand emits a valid report") {
  const std::vector<std::vector<std::string>> runs = {
      {"exponents", "--link", "torus", "--dim", "2", "--metric", "0.6667,0.3333,0.6667", "--window-lo", "-1",
       "--window-hi", "3"},
      {"heat", "--m", "3", "--cells", "100", "--T", "0.05", "--dt", "0.01", "--forcing", "t*r^3"},
      {"asymptotics", "--m", "3", "--cells", "200", "--T", "0.1", "--dt", "0.01", "--gamma", "2.4"},
      {"flow", "--m", "2", "--N", "16", "--T", "0.05", "--catalog", "two-mode"},
      {"defect", "--m", "1", "--N", "32", "--T", "0.05", "--init", "sin(x1)"},
  };
  for (const auto& args : runs) {
    const fs::path d = scratch("report_" + args[0]);
    auto full = args;
    full.push_back("--out");
    full.push_back(d.string());
    const Result r = invoke(full);
    INFO(args[0] << ": " << r.err);
    REQUIRE(r.code == 0);
    check_report(d, args[0]);
  }
}

TEST_CASE("exit codes") {
  const fs::path d = scratch("codes");
  Result r = invoke({"frobnicate"});
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown subcommand 'frobnicate'") != std::string::npos);
  CHECK(r.err.find("usage:") != std::string::npos);
  r = invoke({"spectrum", "--bogus", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("usage:") != std::string::npos);
  r = invoke({});
  CHECK(r.code == 2);
  // validation errors
  CHECK(invoke({"spectrum", "--link", "sphere", "--dim", "0", "--out", d.string()}).code == 2);
  CHECK(invoke({"fredholm", "--gamma", "2", "--out", d.string()}).code == 2);
  CHECK(invoke({"heat", "--R", "-1", "--out", d.string()}).code == 2);
  CHECK(invoke({"flow", "--init", "sin(", "--out", d.string()}).code == 2);
  CHECK(invoke({"flow", "--N", "abc", "--out", d.string()}).code == 2);
  // graph condition lost: 1 + u'' = 0 at x1 = pi / 2 on the 16-point grid
  r = invoke({"flow", "--m", "1", "--N", "16", "--init", "sin(x1)*(pi/8)^2/(2 - 2*cos(pi/8))", "--T", "0.01",
              "--out", d.string()});
  CHECK(r.code == 1);
  CHECK(invoke({"stability", "--help"}).code == 0);
}

TEST_CASE("config file and flag precedence") {
  const fs::path d = scratch("config");
  {
    std::ofstream cfg(d / "cfg.json");
    cfg << R"({"link": "sphere", "dim": 2, "lmax": 12})";
  }
  Result r = invoke({"spectrum", "--config", (d / "cfg.json").string(), "--lmax", "6", "--out", (d / "a").string()});
  REQUIRE(r.code == 0);
  json rep = load(d / "a" / "report.json");
  CHECK(rep["inputs"]["link"] == "sphere");
  CHECK(load(d / "a" / "spectrum.json")["entries"].size() == 3);

  r = invoke({"spectrum", "--config", (d / "cfg.json").string(), "--out", (d / "b").string()});
  REQUIRE(r.code == 0);
  CHECK(load(d / "b" / "spectrum.json")["entries"].size() == 4);

  {
    std::ofstream cfg(d / "bad.json");
    cfg << R"({"gamma": 1.5})";
  }
  CHECK(invoke({"spectrum", "--config", (d / "bad.json").string(), "--out", d.string()}).code == 2);
  CHECK(invoke({"spectrum", "--config", (d / "missing.json").string(), "--out", d.string()}).code == 2);
}

TEST_CASE("identical inputs give byte-identical outputs") {
  const std::vector<std::vector<std::string>> runs = {
      {"flow", "--m", "2", "--N", "16", "--T", "0.05", "--catalog", "mixed-scale", "--snapshots", "0.02"},
      {"stability", "--cone", "plane-3"},
      {"asymptotics", "--m", "3", "--cells", "200", "--T", "0.1", "--dt", "0.01", "--gamma", "2.5"},
  };
  for (const auto& args : runs) {
    // same output directory, so the recorded inputs agree too
    const fs::path dir = scratch("determinism_" + args[0]);
    auto full = args;
    full.push_back("--out");
    full.push_back(dir.string());
    std::map<std::string, std::string> first;
    REQUIRE(invoke(full).code == 0);
    for (const auto& entry : fs::directory_iterator(dir)) first[entry.path().filename().string()] = slurp(entry.path());
    REQUIRE(invoke(full).code == 0);
    for (const auto& [name, bytes] : first) {
      INFO(args[0] << " " << name);
      if (name == "report.json") {
        json a = json::parse(bytes), b = load(dir / name);
        a.erase("wall_time_seconds");
        b.erase("wall_time_seconds");
        CHECK(a.dump() == b.dump());
      } else {
        CHECK(bytes == slurp(dir / name));
      }
    }
  }
}
