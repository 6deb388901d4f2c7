#include "amcmc/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "amcmc/adapt.hpp"
#include "amcmc/bench.hpp"
#include "amcmc/errors.hpp"
#include "amcmc/mcmc.hpp"
#include "amcmc/oracle.hpp"
#include "amcmc/parse.hpp"

namespace amcmc {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program load_program(const std::string& path) {
  std::string text = read_file(path);
  try {
    return parse_program(text);
  } catch (const ParseError& e) {
    throw ParseError(path, e);
  } catch (const ProgramError& e) {
    throw ProgramError(path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

bool on_off(const std::string& v) { return v == "on"; }

/// `base.ext` -> `base.chainK.ext`
std::string chain_path(const std::string& path, std::size_t k) {
  std::filesystem::path p(path);
  std::string name = p.stem().string() + ".chain" + std::to_string(k) + p.extension().string();
  return (p.parent_path() / name).string();
}

void write_rows_csv(std::ostream& os, const std::vector<ChainRow>& rows) {
  os << "iter,estimate,accepted,evidence_ok,cum_evidence_rejections,elapsed_us\n";
  for (const auto& r : rows) {
    os << r.iter << ',' << fmt(r.estimate) << ',' << int(r.accepted) << ',' << int(r.evidence_ok)
       << ',' << r.cum_evidence_rejections << ',' << r.elapsed_us << '\n';
  }
}

void write_rows_file(const std::string& path, const std::vector<ChainRow>& rows) {
  std::ostringstream os;
  write_rows_csv(os, rows);
  write_file(path, os.str());
}

struct RunOptions {
  std::string program;
  std::string query;
  std::string evidence = "true";
  std::size_t samples = 10'000;
  std::size_t burn_in = 0;
  std::string resample = "single";
  double multi_prob = 0.5;
  std::string adapt = "off";
  std::string markovian = "off";
  std::uint64_t seed = 0;
  std::size_t chains = 1;
  std::string csv;
  std::size_t step_limit = 1'000'000;
  std::string trace_dedup = "off";
  std::string qdump_out;
};

void add_run_flags(CLI::App* cmd, RunOptions& o, bool with_csv) {
  cmd->add_option("--program", o.program, "program file")->required();
  cmd->add_option("--query", o.query, "ground query goal")->required();
  cmd->add_option("--evidence", o.evidence, "ground evidence goal (default: true)");
  cmd->add_option("--samples", o.samples, "iterations N > 0")->check(CLI::PositiveNumber);
  cmd->add_option("--burnin", o.burn_in, "discarded leading iterations");
  cmd->add_option("--resample", o.resample, "proposal kind")
      ->check(CLI::IsMember({"single", "multi"}));
  cmd->add_option("--multi-prob", o.multi_prob, "forget probability for multi")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--adapt", o.adapt, "adaptive proposals")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--markovian", o.markovian, "independent last-reward sampler")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--step-limit", o.step_limit, "resolution steps per evaluation")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--trace-dedup", o.trace_dedup, "trace first accesses only")
      ->check(CLI::IsMember({"on", "off"}));
  if (with_csv) {
    cmd->add_option("--chains", o.chains, "independent chains")->check(CLI::PositiveNumber);
    cmd->add_option("--csv", o.csv, "per-iteration CSV output");
  }
}

void validate(const RunOptions& o, const CLI::App* cmd) {
  if (on_off(o.markovian) && cmd->count("--resample") > 0) {
    throw UsageError("--markovian on cannot be combined with --resample");
  }
  if (on_off(o.markovian) && cmd->count("--chains") > 0 && o.chains > 1) {
    throw UsageError("--markovian on runs a single sampler; --chains must be 1");
  }
  if (o.resample == "multi" && !(o.multi_prob > 0.0)) {
    throw UsageError("--multi-prob must be in (0,1]");
  }
}

ChainConfig chain_config(const RunOptions& o) {
  ChainConfig cfg;
  cfg.samples = o.samples;
  cfg.burn_in = o.burn_in;
  cfg.strategy = o.resample == "multi" ? ResampleStrategy::multi(o.multi_prob)
                                       : ResampleStrategy::single();
  cfg.adaptive = on_off(o.adapt);
  cfg.seed = o.seed;
  cfg.eval.step_limit = o.step_limit;
  cfg.eval.trace_dedup = on_off(o.trace_dedup);
  return cfg;
}

void echo_manifest(std::ostream& err, const std::string& mode, const RunOptions& o) {
  err << "# mode=" << mode << "\n"
      << "# program=" << o.program << "\n"
      << "# query=" << o.query << "\n"
      << "# evidence=" << o.evidence << "\n"
      << "# samples=" << o.samples << "\n"
      << "# burnin=" << o.burn_in << "\n"
      << "# resample=" << o.resample << "\n"
      << "# multi_prob=" << fmt(o.multi_prob) << "\n"
      << "# adapt=" << o.adapt << "\n"
      << "# markovian=" << o.markovian << "\n"
      << "# seed=" << o.seed << "\n"
      << "# chains=" << o.chains << "\n"
      << "# step_limit=" << o.step_limit << "\n"
      << "# trace_dedup=" << o.trace_dedup << "\n"
      << "# csv=" << o.csv << "\n";
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  Program prog = load_program(o.program);
  Term q = parse_goal(o.query);
  Term e = parse_goal(o.evidence);

  if (on_off(o.markovian)) {
    echo_manifest(err, "independent", o);
    IndependentConfig cfg;
    cfg.samples = o.samples;
    cfg.seed = o.seed;
    cfg.eval.step_limit = o.step_limit;
    cfg.eval.trace_dedup = on_off(o.trace_dedup);
    cfg.record_rows = !o.csv.empty();
    RewardMonitor monitor;
    IndependentResult r = independent_sampler(prog, q, e, cfg, monitor.hook());
    if (!o.csv.empty()) write_rows_file(o.csv, r.rows);
    out << "estimate=" << fmt(r.estimate) << "\n"
        << "samples=" << r.samples << "\n"
        << "consistent=" << r.consistent << "\n"
        << "evidence_rejections=" << r.samples - r.consistent << "\n"
        << "rejection_rate="
        << fmt(static_cast<double>(r.samples - r.consistent) / static_cast<double>(r.samples))
        << "\n"
        << "reward_monotonicity_violations=" << monitor.violations() << "\n"
        << "elapsed_s=" << fmt(r.elapsed_seconds) << "\n";
    return kExitOk;
  }

  echo_manifest(err, "mcmc", o);
  ChainConfig cfg = chain_config(o);
  cfg.record_rows = !o.csv.empty() || o.chains > 1;
  if (o.chains == 1) {
    ChainResult r = run_chain(prog, q, e, cfg);
    if (!o.csv.empty()) write_rows_file(o.csv, r.rows);
    out << "estimate=" << fmt(r.estimate) << "\n"
        << "samples=" << r.samples << "\n"
        << "accepted=" << r.accepted << "\n"
        << "evidence_rejections=" << r.evidence_rejections << "\n"
        << "rejection_rate=" << fmt(r.rejection_rate()) << "\n"
        << "elapsed_s=" << fmt(r.elapsed_seconds) << "\n";
    return kExitOk;
  }

  MultiChainResult m = run_chains(prog, q, e, cfg, o.chains);
  for (std::size_t k = 0; k < m.chains.size(); ++k) {
    const auto& c = m.chains[k];
    if (!o.csv.empty()) write_rows_file(chain_path(o.csv, k), c.rows);
    out << "chain" << k << ".seed=" << chain_seed(o.seed, k) << "\n"
        << "chain" << k << ".estimate=" << fmt(c.estimate) << "\n"
        << "chain" << k << ".rejection_rate=" << fmt(c.rejection_rate()) << "\n";
  }
  out << "pooled_mean=" << fmt(m.pooled_mean) << "\n"
      << "spread=" << fmt(m.spread) << "\n"
      << "r_hat=" << (m.r_hat ? fmt(*m.r_hat) : std::string("nan")) << "\n";
  return kExitOk;
}

int cmd_qdump(const RunOptions& o, std::ostream& out, std::ostream& err) {
  Program prog = load_program(o.program);
  Term q = parse_goal(o.query);
  Term e = parse_goal(o.evidence);
  std::ostringstream csv;
  if (on_off(o.markovian)) {
    echo_manifest(err, "qdump-independent", o);
    IndependentConfig cfg;
    cfg.samples = o.samples;
    cfg.seed = o.seed;
    cfg.eval.step_limit = o.step_limit;
    cfg.eval.trace_dedup = on_off(o.trace_dedup);
    cfg.record_rows = false;
    write_qstore_csv(csv, independent_sampler(prog, q, e, cfg).q_store, prog);
  } else {
    echo_manifest(err, "qdump-mcmc", o);
    ChainConfig cfg = chain_config(o);
    cfg.adaptive = true;
    cfg.record_rows = false;
    write_qstore_csv(csv, run_chain(prog, q, e, cfg).q_store, prog);
  }
  if (o.qdump_out.empty()) {
    out << csv.str();
  } else {
    write_file(o.qdump_out, csv.str());
  }
  return kExitOk;
}

struct ExactOptions {
  std::string program;
  std::string query;
  std::string evidence = "true";
  std::size_t branch_limit = kDefaultBranchLimit;
  std::string csv;
  bool cross_check = false;
};

int cmd_exact(const ExactOptions& o, std::ostream& out, std::ostream& err) {
  Program prog = load_program(o.program);
  Term q = parse_goal(o.query);
  Term e = parse_goal(o.evidence);
  err << "# mode=exact\n# program=" << o.program << "\n# query=" << o.query
      << "\n# evidence=" << o.evidence << "\n";
  ExactResult r = exact_conditional(prog, q, e, o.branch_limit);
  auto old = out.precision(10);
  out << "p_query=" << r.p_query << "\n"
      << "p_evidence=" << r.p_evidence << "\n"
      << "p_joint=" << r.p_joint << "\n"
      << "p_conditional=" << r.p_conditional << "\n"
      << "leaf_count=" << r.leaf_count << "\n";
  out.precision(old);
  if (o.cross_check) {
    ExactResult w = world_conditional(prog, q, e);
    double diff = std::max({std::abs(w.p_query - r.p_query), std::abs(w.p_evidence - r.p_evidence),
                            std::abs(w.p_joint - r.p_joint)});
    out << "world_p_conditional=" << fmt(w.p_conditional) << "\n"
        << "oracle_max_difference=" << fmt(diff) << "\n";
  }
  if (!o.csv.empty()) {
    write_file(o.csv, "p_query,p_evidence,p_joint,p_conditional,leaf_count\n" + fmt(r.p_query) +
                          "," + fmt(r.p_evidence) + "," + fmt(r.p_joint) + "," +
                          fmt(r.p_conditional) + "," + std::to_string(r.leaf_count) + "\n");
  }
  return kExitOk;
}

struct GenOptions {
  std::string family;
  int rows = 3;
  int cols = 3;
  int evidence_count = 2;
  int bits = 4;
  int length = 8;
  int level = 2;
  int vertices = 10;
  int edges = 12;
  std::uint64_t seed = 0;
  std::string out;
  std::string manifest;
};

int cmd_genbench(const GenOptions& o, std::ostream& out, std::ostream& err) {
  BenchInstance b;
  if (o.family == "bn") {
    b = gen_bn(o.rows, o.cols, o.evidence_count, o.seed);
  } else if (o.family == "hamming") {
    b = gen_hamming(o.bits, o.evidence_count, o.seed);
  } else if (o.family == "grammar") {
    b = gen_grammar(o.length, o.level);
  } else if (o.family == "fig1") {
    b = gen_reach(fig1_reach_spec(), o.seed);
  } else {
    b = gen_reach(random_dag_spec(o.vertices, o.edges, o.seed), o.seed);
  }
  write_file(o.out, b.text);
  std::string manifest_path = o.manifest.empty() ? o.out + ".manifest" : o.manifest;
  std::string manifest = bench_manifest(b, o.out);
  write_file(manifest_path, manifest);
  err << "# wrote " << o.out << " and " << manifest_path << "\n";
  out << manifest;
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive MCMC inference for probabilistic logic programs", "amcmc"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "estimate P(query | evidence) by sampling");
  add_run_flags(run, run_opts, true);

  RunOptions qd_opts;
  auto* qdump = app.add_subcommand("qdump", "run an adaptive sampler and dump its Q-values as CSV");
  add_run_flags(qdump, qd_opts, false);
  qdump->add_option("--out", qd_opts.qdump_out, "CSV output (default: stdout)");

  ExactOptions ex_opts;
  auto* exact = app.add_subcommand("exact", "exact inference by evaluation-tree enumeration");
  exact->add_option("--program", ex_opts.program, "program file")->required();
  exact->add_option("--query", ex_opts.query, "ground query goal")->required();
  exact->add_option("--evidence", ex_opts.evidence, "ground evidence goal (default: true)");
  exact->add_option("--branch-limit", ex_opts.branch_limit, "maximum evaluations")
      ->check(CLI::PositiveNumber);
  exact->add_option("--csv", ex_opts.csv, "also write the result as CSV");
  exact->add_flag("--cross-check", ex_opts.cross_check,
                  "compare with complete-world enumeration");

  GenOptions gen_opts;
  auto* gen = app.add_subcommand("genbench", "write a benchmark program and manifest");
  gen->add_option("--family", gen_opts.family, "benchmark family")
      ->required()
      ->check(CLI::IsMember({"bn", "hamming", "grammar", "reach", "fig1"}));
  gen->add_option("--rows", gen_opts.rows, "bn grid rows")->check(CLI::PositiveNumber);
  gen->add_option("--cols", gen_opts.cols, "bn grid columns")->check(CLI::PositiveNumber);
  gen->add_option("--evidence-count", gen_opts.evidence_count, "bn/hamming evidence size")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--bits", gen_opts.bits, "hamming data bits")->check(CLI::PositiveNumber);
  gen->add_option("--length", gen_opts.length, "grammar string length")
      ->check(CLI::PositiveNumber);
  gen->add_option("--level", gen_opts.level, "grammar nesting level");
  gen->add_option("--vertices", gen_opts.vertices, "reach vertex count")->check(CLI::Range(2, 1000));
  gen->add_option("--edges", gen_opts.edges, "reach maximum edge count")
      ->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_opts.seed, "structure seed");
  gen->add_option("--out", gen_opts.out, "program output path")->required();
  gen->add_option("--manifest", gen_opts.manifest, "manifest path (default: OUT.manifest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) {
      validate(run_opts, run);
      return cmd_run(run_opts, out, err);
    }
    if (qdump->parsed()) {
      validate(qd_opts, qdump);
      return cmd_qdump(qd_opts, out, err);
    }
    if (exact->parsed()) return cmd_exact(ex_opts, out, err);
    if (gen->parsed()) return cmd_genbench(gen_opts, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ProgramError& e) {
    err << "program error: " << e.what() << "\n";
    return kExitParse;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace amcmc
