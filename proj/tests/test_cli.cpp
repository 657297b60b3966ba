#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "cli.hpp"
#include "config.hpp"
#include "doctest.h"
#include "report.hpp"

using namespace ppcalc::app;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ppcalc_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(std::vector<std::string> args) {
  std::ostringstream sink, errs;
  auto* o = std::cout.rdbuf(sink.rdbuf());
  auto* e = std::cerr.rdbuf(errs.rdbuf());
  int code = run_cli(args);
  std::cout.rdbuf(o);
  std::cerr.rdbuf(e);
  return code;
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

nlohmann::json load(const std::string& p) { return nlohmann::json::parse(slurp(p)); }

// Data rows (header skipped), split into fields.
std::vector<std::vector<std::string>> rows_of(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> f;
    std::string cur;
    bool q = false;
    for (char c : line) {
      if (c == '"') q = !q;
      else if (c == ',' && !q) {
        f.push_back(cur);
        cur.clear();
      } else cur += c;
    }
    f.push_back(cur);
    out.push_back(f);
  }
  return out;
}

}  // namespace

TEST_CASE("eppf table for PD(0.5, 0.5) with n = 4") {
  TempDir d;
  REQUIRE(run({"eppf", "--family", "pd", "--alpha", "0.5", "--theta", "0.5", "--n", "4", "--out", d.path.string()}) == 0);
  auto rows = rows_of(slurp(d / "eppf.csv"));
  CHECK(rows.size() == 15);
  double s = 0.0;
  for (const auto& r : rows) s += std::stod(r.back());
  CHECK(std::fabs(s - 1.0) < 1e-10);
  auto rep = load(d / "eppf.json");
  CHECK(rep["schema"] == 1);
  CHECK(rep["seed"] == 1);
  CHECK(rep["module_version"].is_string());
  CHECK(rep["run_info"].contains("timestamp"));
  CHECK(std::fabs(rep["results"]["sum"].get<double>() - 1.0) < 1e-10);
}

TEST_CASE("fit-survival under a Dirichlet prior matches the conjugate update") {
  TempDir d;
  spit(d / "toy.csv", "time,event\n0.5,1\n1.2,1\n2.0,1\n");
  REQUIRE(run({"fit-survival", "--prior", "beta", "--c", "1.0", "--data", d / "toy.csv", "--dirichlet", "--theta", "2",
               "--out", d.path.string()}) == 0);
  auto rows = rows_of(slurp(d / "survival.csv"));
  REQUIRE(rows.size() == 20);
  for (const auto& r : rows) {
    double t = std::stod(r[0]);
    int above = (0.5 > t) + (1.2 > t) + (2.0 > t);
    CHECK(std::fabs(std::stod(r[1]) - (2.0 * std::exp(-t) + above) / 5.0) < 1e-6);
  }
}

TEST_CASE("reports are byte-identical for the same seed across thread counts") {
  TempDir d;
  spit(d / "s.csv", "time,event\n0.4,1\n0.9,0\n1.3,1\n2.2,1\n");
  std::vector<std::string> base = {"fit-survival", "--data", d / "s.csv", "--c", "1.5", "--draws", "300", "--seed", "42"};
  auto a = base, b = base, c = base;
  a.insert(a.end(), {"--threads", "1", "--out", d / "a"});
  b.insert(b.end(), {"--threads", "3", "--out", d / "b"});
  c.insert(c.end(), {"--threads", "1", "--out", d / "c"});
  c[8] = "43";
  REQUIRE(run(a) == 0);
  REQUIRE(run(b) == 0);
  REQUIRE(run(c) == 0);
  auto ra = load(d / "a/fit-survival.json"), rb = load(d / "b/fit-survival.json"), rc = load(d / "c/fit-survival.json");
  CHECK(deterministic_dump(ra) == deterministic_dump(rb));
  CHECK(deterministic_dump(ra) != deterministic_dump(rc));
  CHECK(slurp(d / "a/survival.csv") == slurp(d / "b/survival.csv"));
  // every Monte Carlo figure carries its error bar
  auto mc = ra["results"]["curve"][0]["monte_carlo"];
  CHECK(mc["draws"] == 300);
  CHECK(mc.contains("std_error"));
  CHECK(mc.contains("truncation_bound"));

  REQUIRE(run({"verify", "--only", "2,5", "--seed", "7", "--out", d / "v1"}) == 0);
  REQUIRE(run({"verify", "--only", "2,5", "--seed", "7", "--threads", "2", "--out", d / "v2"}) == 0);
  CHECK(deterministic_dump(load(d / "v1/verify.json")) == deterministic_dump(load(d / "v2/verify.json")));
}

TEST_CASE("config file with flag overrides") {
  TempDir d;
  spit(d / "run.json", R"({"command": "eppf", "seed": 9, "n": 3, "model": {"family": "ewens", "theta": 1.0}})");
  REQUIRE(run({"--config", d / "run.json", "--out", d / "a"}) == 0);
  auto ra = load(d / "a/eppf.json");
  CHECK(ra["seed"] == 9);
  CHECK(ra["results"]["partitions"] == 5);
  REQUIRE(run({"eppf", "--config", d / "run.json", "--n", "4", "--theta", "2", "--out", d / "b"}) == 0);
  auto rb = load(d / "b/eppf.json");
  CHECK(rb["results"]["partitions"] == 15);
  CHECK(rb["inputs"]["model"]["theta"] == 2);
  CHECK(rb["inputs"]["model"]["family"] == "ewens");
  // config written for a different command
  CHECK(run({"pk", "--config", d / "run.json", "--out", d / "c"}) == kExitConfig);
}

TEST_CASE("exit codes") {
  TempDir d;
  CHECK(run({"eppf", "--family", "pd", "--alpha", "1.5", "--theta", "1", "--n", "3", "--out", d / "x"}) == kExitConfig);
  CHECK(run({"eppf", "--nonsense"}) == kExitConfig);
  CHECK(run({"moments", "--family", "stable", "--alpha", "0.5", "--order", "2", "--out", d / "x"}) == kExitNumeric);
  CHECK(run({"fit-survival", "--data", d / "missing.csv", "--out", d / "x"}) == kExitIo);
  spit(d / "bad.csv", "t,e\n1,1\n");
  CHECK(run({"fit-survival", "--data", d / "bad.csv", "--out", d / "x"}) == kExitConfig);
  spit(d / "bad2.csv", "time,event\n1,2\n");
  CHECK(run({"fit-survival", "--data", d / "bad2.csv", "--out", d / "x"}) == kExitConfig);
  spit(d / "file", "");
  CHECK(run({"eppf", "--theta", "1", "--n", "3", "--out", d / "file/sub"}) == kExitIo);
}

TEST_CASE("CSV quoting and number format") {
  CHECK(CsvWriter::quote("plain") == "plain");
  CHECK(CsvWriter::quote("a,b") == "\"a,b\"");
  CHECK(CsvWriter::quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(CsvWriter::quote("two\nlines") == "\"two\nlines\"");
  CHECK(CsvWriter::num(0.1) == "0.1");
  CHECK(std::stod(CsvWriter::num(1.0 / 3.0)) == 1.0 / 3.0);
  CsvWriter w({"x", "label"});
  w.row({"1", "{{1,2}}"});
  CHECK(w.str() == "x,label\r\n1,\"{{1,2}}\"\r\n");
  CHECK_THROWS(w.row({"1"}));
}

TEST_CASE("survival data with marks and events data") {
  TempDir d;
  spit(d / "m.csv", "time,event,mark\n1.0,1,2\n\"2.5\",0,\n3.0,1,1\n");
  auto ds = read_survival_csv(d / "m.csv");
  REQUIRE(ds.records().size() == 3);
  CHECK(ds.records()[0].mark == 2.0);
  CHECK(!ds.records()[1].mark);
  CHECK(ds.events() == 2);
  spit(d / "e.csv", "time\r\n0.5\r\n1.5\r\n");
  CHECK(read_events_csv(d / "e.csv") == std::vector<double>{0.5, 1.5});
  CHECK(parse_base_spec("piecewise 0 0.5 1 0.25 3")["edges"].size() == 3);
  CHECK_THROWS(parse_base_spec("triangle 0 1"));
}
