#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "amcmc/bench.hpp"
#include "amcmc/cli.hpp"
#include "doctest.h"

using namespace amcmc;
namespace fs = std::filesystem;

namespace {

struct Cli {
  fs::path dir;
  std::string out;
  std::string err;

  Cli() {
    dir = fs::temp_directory_path() / ("amcmc_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::ofstream(dir / "fig1.plp") << fig1_program_text();
  }
  ~Cli() { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "amcmc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o;
    std::ostringstream e;
    int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
    out = o.str();
    err = e.str();
    return code;
  }

  static std::string read(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

// Drop the trailing elapsed_us column of every line.
std::string without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::string out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

std::string value_of(const std::string& text, const std::string& key) {
  auto pos = text.find(key + "=");
  if (pos == std::string::npos) return "";
  auto end = text.find('\n', pos);
  return text.substr(pos + key.size() + 1, end - pos - key.size() - 1);
}

}  // namespace

TEST_CASE_FIXTURE(Cli, "exact prints the evidence probability") {
  CHECK(run({"exact", "--program", path("fig1.plp"), "--query", "reach(a,e)"}) == kExitOk);
  CHECK(value_of(out, "p_query") == "0.02882");
  CHECK(run({"exact", "--program", path("fig1.plp"), "--query", "reach(a,d)", "--evidence",
             "reach(a,e)", "--cross-check", "--csv", path("exact.csv")}) == kExitOk);
  CHECK(std::stod(value_of(out, "p_conditional")) == doctest::Approx(0.8883691881).epsilon(1e-9));
  CHECK(std::stod(value_of(out, "oracle_max_difference")) <= 1e-12);
  CHECK(read(path("exact.csv")).rfind("p_query,p_evidence,p_joint,p_conditional,leaf_count\n", 0) == 0);
}

TEST_CASE_FIXTURE(Cli, "run writes a CSV and a summary") {
  CHECK(run({"run", "--program", path("fig1.plp"), "--query", "reach(a,d)", "--evidence",
             "reach(a,e)", "--samples", "50000", "--resample", "single", "--adapt", "on", "--seed",
             "7", "--csv", path("run.csv")}) == kExitOk);
  double est = std::stod(value_of(out, "estimate"));
  CHECK(std::abs(est - 0.8883691881) <= 0.02);
  CHECK(!value_of(out, "rejection_rate").empty());
  CHECK(err.find("# query=reach(a,d)") != std::string::npos);
  std::string csv = read(path("run.csv"));
  CHECK(csv.rfind("iter,estimate,accepted,evidence_ok,cum_evidence_rejections,elapsed_us\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 50'001);
}

TEST_CASE_FIXTURE(Cli, "same manifest and seed give the same CSV") {
  for (const char* adapt : {"off", "on"}) {
    for (const char* kind : {"single", "multi"}) {
      std::vector<std::string> args = {"run", "--program", path("fig1.plp"), "--query",
                                       "reach(a,d)", "--evidence", "reach(a,e)", "--samples",
                                       "3000", "--resample", kind, "--adapt", adapt, "--seed", "3"};
      auto a = args;
      a.insert(a.end(), {"--csv", path("a.csv")});
      auto b = args;
      b.insert(b.end(), {"--csv", path("b.csv")});
      REQUIRE(run(a) == kExitOk);
      std::string first = value_of(out, "estimate");
      REQUIRE(run(b) == kExitOk);
      CHECK(value_of(out, "estimate") == first);
      CHECK(without_timing(read(path("a.csv"))) == without_timing(read(path("b.csv"))));
    }
  }
}

TEST_CASE_FIXTURE(Cli, "several chains") {
  CHECK(run({"run", "--program", path("fig1.plp"), "--query", "reach(a,d)", "--evidence",
             "reach(a,e)", "--samples", "5000", "--chains", "3", "--seed", "1", "--csv",
             path("multi.csv")}) == kExitOk);
  CHECK(!value_of(out, "pooled_mean").empty());
  CHECK(!value_of(out, "r_hat").empty());
  for (int k = 0; k < 3; ++k) {
    CHECK(fs::exists(path("multi.chain" + std::to_string(k) + ".csv")));
  }
}

TEST_CASE_FIXTURE(Cli, "independent sampler mode") {
  CHECK(run({"run", "--program", path("fig1.plp"), "--query", "reach(a,d)", "--samples", "20000",
             "--markovian", "on", "--seed", "2"}) == kExitOk);
  CHECK(std::abs(std::stod(value_of(out, "estimate")) - 0.7592) <= 0.02);
  CHECK(!value_of(out, "reward_monotonicity_violations").empty());
}

TEST_CASE_FIXTURE(Cli, "qdump writes Q-values") {
  CHECK(run({"qdump", "--program", path("fig1.plp"), "--query", "reach(a,d)", "--evidence",
             "reach(a,e)", "--samples", "2000", "--seed", "1", "--out", path("q.csv")}) == kExitOk);
  std::string csv = read(path("q.csv"));
  CHECK(csv.rfind("switch,instance,outcome,q,count,total\n", 0) == 0);
  CHECK(csv.find("\"r(a,b)\",0,t,") != std::string::npos);
}

TEST_CASE_FIXTURE(Cli, "genbench writes a program and a manifest") {
  CHECK(run({"genbench", "--family", "bn", "--rows", "2", "--cols", "2", "--evidence-count", "1",
             "--seed", "4", "--out", path("bn.plp")}) == kExitOk);
  CHECK(read(path("bn.plp")) == gen_bn(2, 2, 1, 4).text);
  std::string manifest = read(path("bn.plp.manifest"));
  CHECK(value_of(manifest, "family") == "bn");
  CHECK(value_of(manifest, "seed") == "4");
  CHECK(run({"exact", "--program", path("bn.plp"), "--query", value_of(manifest, "query"),
             "--evidence", value_of(manifest, "evidence")}) == kExitOk);
  CHECK(run({"genbench", "--family", "fig1", "--out", path("f.plp")}) == kExitOk);
  CHECK(read(path("f.plp")) == fig1_program_text());
}

TEST_CASE_FIXTURE(Cli, "usage errors") {
  std::vector<std::string> base = {"run", "--program", path("fig1.plp"), "--query", "reach(a,d)"};
  auto with = [&](std::vector<std::string> extra) {
    auto a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return run(a);
  };
  CHECK(with({"--samples", "0"}) == kExitUsage);
  CHECK(with({"--bogus"}) == kExitUsage);
  CHECK(with({"--resample", "triple"}) == kExitUsage);
  CHECK(with({"--markovian", "on", "--resample", "single"}) == kExitUsage);
  CHECK(with({"--multi-prob", "2"}) == kExitUsage);
  CHECK(run({}) == kExitUsage);
  CHECK(run({"frobnicate"}) == kExitUsage);
  CHECK(run({"run", "--query", "reach(a,d)"}) == kExitUsage);
  CHECK(!err.empty());
  CHECK(run({"--help"}) == kExitOk);
}

TEST_CASE_FIXTURE(Cli, "parse and runtime errors") {
  CHECK(run({"exact", "--program", path("fig1.plp"), "--query", "reach(a,"}) == kExitParse);
  CHECK(run({"exact", "--program", path("fig1.plp"), "--query", "reach(a,X)"}) == kExitParse);
  std::ofstream(path("bad.plp")) << "values(c,[a,b]). :- set_sw(c,[0.5,0.6]).";
  CHECK(run({"exact", "--program", path("bad.plp"), "--query", "true"}) == kExitParse);
  CHECK(err.find("bad.plp") != std::string::npos);
  CHECK(run({"exact", "--program", path("missing.plp"), "--query", "true"}) == kExitRuntime);
  CHECK(run({"exact", "--program", path("fig1.plp"), "--query", "reach(a,d)", "--evidence",
             "reach(d,a)"}) == kExitRuntime);
  CHECK(run({"run", "--program", path("fig1.plp"), "--query", "nope(1)", "--samples", "10"}) ==
        kExitRuntime);
  CHECK(std::count(err.begin(), err.end(), '\n') >= 1);
}
