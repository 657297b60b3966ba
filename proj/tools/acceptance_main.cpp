// Runs the numeric criteria through `ppcalc verify`, then reruns verify with
// the same seed on a different thread count and compares the JSON reports
// byte for byte outside run_info. One line per criterion.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cli.hpp"
#include "json.hpp"
#include "ppcalc/parallel.hpp"
#include "report.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ppcalc::app;

namespace {

int quiet_verify(std::uint64_t seed, int threads, const fs::path& out) {
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  int code = run_cli({"verify", "--seed", std::to_string(seed), "--threads", std::to_string(threads), "--out", out.string()});
  std::cout.rdbuf(old);
  return code;
}

json load(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out = "acceptance_out";
  app.add_option("--seed", seed, "seed for every Monte Carlo check");
  app.add_option("--threads", threads, "threads for the first run");
  app.add_option("--out", out, "directory for the two verify reports");
  CLI11_PARSE(app, argc, argv);
  threads = ppcalc::resolve_threads(threads);
  const int other = threads > 1 ? 1 : 2;

  const fs::path a = fs::path(out) / "run1", b = fs::path(out) / "run2";
  int code_a = quiet_verify(seed, threads, a);
  if (code_a > kExitVerifyFailed) {
    std::cerr << "verify failed to run (exit " << code_a << ")\n";
    return code_a;
  }
  json ra = load(a / "verify.json");
  bool all = true;
  const auto& crit = ra["results"]["criteria"];
  const auto& timing = ra["run_info"]["criteria"];
  for (std::size_t i = 0; i < crit.size(); ++i) {
    bool pass = timing[i]["passed"].get<bool>();
    std::string summary = crit[i]["summary"].get<std::string>();
    char t[48];
    std::snprintf(t, sizeof t, " (%.1f s of %.0f s)", timing[i]["seconds"].get<double>(),
                  crit[i]["runtime_budget_seconds"].get<double>());
    std::cout << outcome_line(crit[i]["id"].get<int>(), crit[i]["name"].get<std::string>(), pass, summary + t) << "\n";
    all = all && pass;
  }

  int code_b = quiet_verify(seed, other, b);
  bool same = code_b <= kExitVerifyFailed && deterministic_dump(ra) == deterministic_dump(load(b / "verify.json"));
  std::cout << outcome_line(10, "reproducibility", same,
                            "verify rerun, seed " + std::to_string(seed) + ", threads " + std::to_string(threads) +
                                " vs " + std::to_string(other) + ": " + (same ? "byte-identical" : "reports differ"))
            << "\n";
  all = all && same;
  std::cout << (all ? "all criteria passed" : "some criteria failed") << "\n";
  return all ? 0 : 1;
}
