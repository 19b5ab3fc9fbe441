// freqbench: benchmark and experiment harness for the freq engine.
//
//   freqbench generate  write a zipf stream file
//   freqbench run       accuracy / throughput / latency / consistency runs
//   freqbench space     counter-count and memory table for a config
//
// Run records are JSON (schema 1) on stdout or --json-out; exit codes:
// 0 success, 1 acceptance violation detected, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "freq/consistency.hpp"
#include "freq/engine.hpp"
#include "freq/metrics.hpp"
#include "freq/oracle.hpp"
#include "freq/runner.hpp"
#include "freq/sim.hpp"
#include "freq/workload.hpp"

namespace {

using nlohmann::json;
using namespace freq;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

StreamFormat parse_format(const std::string& name) {
  return name == "text" ? StreamFormat::kText : StreamFormat::kBinary;
}

struct GenerateArgs {
  double a = 1.0;
  std::uint64_t universe = 0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "bin";
  bool shuffle = false;
};

struct RunArgs {
  std::string input;
  std::string input_format = "bin";
  double a = 1.0;
  std::uint64_t universe = 100000;
  std::uint64_t n = 1000000;
  std::uint64_t seed = 1;
  double phi = 1e-3;
  double epsilon = 1e-4;
  std::uint32_t threads = 1;
  std::uint32_t d = 16;
  std::uint64_t e = 1000;
  std::string sizing = "general";
  std::uint64_t query_rate = 0;  // queries per million updates
  std::string mode = "accuracy";
  double duration_seconds = 2.0;
  std::uint64_t owner_seed = 0;
  std::uint32_t queries = 8;  // consistency mode: mid-stream queries
  std::string json_out;
};

struct SpaceArgs {
  double phi = 1e-3;
  double epsilon = 1e-4;
  std::uint32_t threads = 1;
  double a = 0.0;
  std::uint32_t d = 16;
  bool csv = false;
};

json config_json(const RunArgs& args) {
  json cfg{{"phi", args.phi},
           {"epsilon", args.epsilon},
           {"threads", args.threads},
           {"d", args.d},
           {"e", args.e},
           {"sizing", args.sizing},
           {"owner_seed", args.owner_seed},
           {"mode", args.mode},
           {"query_rate", args.query_rate}};
  if (!args.input.empty()) {
    cfg["stream"] = {{"source", "file"}, {"path", args.input}, {"format", args.input_format}};
  } else {
    cfg["stream"] = {{"source", "zipf"},
                     {"a", args.a},
                     {"universe", args.universe},
                     {"n", args.n},
                     {"seed", args.seed}};
  }
  return cfg;
}

EngineConfig engine_config(const RunArgs& args) {
  EngineConfig cfg;
  cfg.epsilon = args.epsilon;
  cfg.phi = args.phi;
  cfg.threads = args.threads;
  cfg.filter_slots = args.d;
  cfg.handover_bound = args.e;
  cfg.owner_seed = args.owner_seed;
  if (args.sizing == "zipf") {
    cfg.sizing = Sizing::kZipf;
    cfg.zipf_skew = args.a;
  }
  return cfg;
}

std::vector<ElementId> load_stream(const RunArgs& args) {
  if (!args.input.empty()) {
    std::vector<ElementId> stream = read_stream(args.input, parse_format(args.input_format));
    for (ElementId e : stream)
      if (e == kNoElement) throw std::runtime_error(args.input + ": contains the reserved maximum id");
    return stream;
  }
  ZipfGenerator gen({{args.a, args.universe}, args.n, args.seed, false});
  return gen.all();
}

void emit(const json& record, const std::string& json_out) {
  if (json_out.empty()) {
    std::cout << record.dump(2) << "\n";
  } else {
    std::ofstream out(json_out);
    out << record.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write " + json_out);
  }
}

int cmd_generate(const GenerateArgs& args) {
  ZipfGenerator gen({{args.a, args.universe}, args.n, args.seed, args.shuffle});
  StreamWriter writer(args.out, parse_format(args.format));
  for (std::uint64_t i = 0; i < args.n; ++i) writer.append(gen.next());
  writer.close();
  return kExitOk;
}

int run_accuracy(const RunArgs& args, const std::vector<ElementId>& stream, json& record) {
  Engine eng(engine_config(args));
  RunOptions opts;
  opts.query_interval = args.query_rate == 0 ? 0 : 1'000'000 / args.query_rate;
  RunStats stats = run_threaded(eng, stream, opts);
  eng.flush();
  QueryReport report = eng.query(0);

  ExactCounts truth = exact_count(stream);
  AccuracyResult acc = accuracy(report.entries, truth, args.phi);
  Definition1Result def = check_definition1(report.entries, truth, args.phi, args.epsilon);
  for (ElementId e : acc.unknown_reported)
    std::cerr << "note: reported element " << e << " does not occur in the stream\n";

  record["results"] = {{"n", truth.n},
                       {"precision", acc.precision},
                       {"recall", acc.recall},
                       {"are", acc.are},
                       {"reported", acc.reported},
                       {"true_frequent", acc.true_frequent},
                       {"violations", def.violations.size()},
                       {"updates", stats.updates},
                       {"elapsed_s", stats.elapsed_s}};
  return (!def.violations.empty() || acc.recall < 1.0) ? kExitViolation : kExitOk;
}

int run_throughput(const RunArgs& args, const std::vector<ElementId>& stream, json& record) {
  RunOptions opts;
  opts.duration_s = args.duration_seconds;
  opts.query_interval = args.query_rate == 0 ? 0 : 1'000'000 / args.query_rate;

  Engine eng(engine_config(args));
  RunStats stats = run_threaded(eng, stream, opts);
  const double mops = static_cast<double>(stats.updates + stats.queries) / stats.elapsed_s / 1e6;

  double speedup_ref = 1.0;
  if (args.threads > 1) {
    RunArgs single = args;
    single.threads = 1;
    Engine ref(engine_config(single));
    RunStats ref_stats = run_threaded(ref, stream, opts);
    const double ref_mops =
        static_cast<double>(ref_stats.updates + ref_stats.queries) / ref_stats.elapsed_s / 1e6;
    speedup_ref = mops / ref_mops;
  }

  record["results"] = {{"mops", mops},
                       {"speedup_ref", speedup_ref},
                       {"updates", stats.updates},
                       {"queries", stats.queries},
                       {"elapsed_s", stats.elapsed_s}};
  return kExitOk;
}

int run_latency(const RunArgs& args, const std::vector<ElementId>& stream, json& record) {
  RunOptions opts;
  opts.duration_s = args.duration_seconds;
  opts.query_interval = args.query_rate == 0 ? 10000 : 1'000'000 / args.query_rate;
  opts.record_latency = true;

  Engine eng(engine_config(args));
  RunStats stats = run_threaded(eng, stream, opts);

  PerfRecorder rec;
  rec.add_updates(stats.updates);
  for (double us : stats.query_us) rec.record_query_ns(us * 1000.0);
  PerfRecorder::Summary s = rec.summarize(stats.elapsed_s);

  record["results"] = {{"mean_us", s.mean_us},
                       {"p99_us", s.p99_us},
                       {"samples", stats.query_us.size()},
                       {"mops", s.mops},
                       {"elapsed_s", stats.elapsed_s}};
  return kExitOk;
}

int run_consistency(const RunArgs& args, const std::vector<ElementId>& stream, json& record) {
  Engine eng(engine_config(args));
  const std::uint32_t t = args.threads;

  std::vector<std::vector<ElementId>> streams(t);
  for (std::size_t i = 0; i < stream.size(); ++i) streams[i % t].push_back(stream[i]);

  const std::uint64_t steps = stream.size() * 2 + 512;
  std::vector<SimOp> script = random_interleaving_script(t, steps, args.queries, args.seed ^ 0xc0de);

  const std::uint64_t buffer_cap = static_cast<std::uint64_t>(t) * args.e;
  std::uint64_t buffer_violations = 0;
  SimTrace trace = run_deterministic(eng, script, streams, [&](const Engine& engine, std::uint64_t) {
    for (const auto& [element, buffered] : engine.buffered_counts()) {
      (void)element;
      if (buffered > buffer_cap) ++buffer_violations;
    }
  });

  ConsistencyResult res = check_consistency(trace, args.phi, args.epsilon);
  record["results"] = {{"queries", res.queries_checked},
                       {"entries", res.entries_checked},
                       {"violations", res.violations + buffer_violations},
                       {"buffer_violations", buffer_violations},
                       {"max_window_slack", res.max_window_slack},
                       {"processed", trace.processed.size()}};
  return (res.violations + buffer_violations) > 0 ? kExitViolation : kExitOk;
}

int cmd_run(const RunArgs& args) {
  json record{{"schema", 1}, {"command", "run"}, {"mode", args.mode}, {"config", config_json(args)}};
  const std::vector<ElementId> stream = load_stream(args);

  int rc;
  if (args.mode == "accuracy")
    rc = run_accuracy(args, stream, record);
  else if (args.mode == "throughput")
    rc = run_throughput(args, stream, record);
  else if (args.mode == "latency")
    rc = run_latency(args, stream, record);
  else
    rc = run_consistency(args, stream, record);

  emit(record, args.json_out);
  return rc;
}

int cmd_space(const SpaceArgs& args) {
  EngineConfig cfg;
  cfg.epsilon = args.epsilon;
  cfg.phi = args.phi;
  cfg.threads = args.threads;
  cfg.filter_slots = args.d;
  cfg.handover_bound = std::max<std::uint64_t>(args.d, 1000);

  struct Row {
    std::string sizing;
    std::uint64_t per_instance, padded, total_counters, bytes;
  };
  std::vector<Row> rows;
  {
    Row general{"general", cfg.counters_per_thread(), padded_capacity(cfg.counters_per_thread()), 0, 0};
    general.total_counters = static_cast<std::uint64_t>(args.threads) * general.padded +
                             static_cast<std::uint64_t>(args.threads) * args.threads * args.d;
    general.bytes = memory_model(cfg);
    rows.push_back(general);
  }
  if (args.a > 1.0) {
    EngineConfig z = cfg;
    z.sizing = Sizing::kZipf;
    z.zipf_skew = args.a;
    Row zipf{"zipf", z.counters_per_thread(), padded_capacity(z.counters_per_thread()), 0, 0};
    zipf.total_counters = static_cast<std::uint64_t>(args.threads) * zipf.padded +
                          static_cast<std::uint64_t>(args.threads) * args.threads * args.d;
    zipf.bytes = memory_model(z);
    rows.push_back(zipf);
  }

  if (args.csv) {
    std::cout << "sizing,counters_per_instance,padded_per_instance,total_counters,bytes\n";
    for (const Row& r : rows)
      std::cout << r.sizing << "," << r.per_instance << "," << r.padded << "," << r.total_counters << ","
                << r.bytes << "\n";
    if (args.a > 1.0) std::cout << "rank_threshold," << rank_threshold(args.a, args.phi) << ",,,\n";
  } else {
    std::cout << std::left << std::setw(9) << "sizing" << std::right << std::setw(13) << "per-instance"
              << std::setw(9) << "padded" << std::setw(16) << "total-counters" << std::setw(12) << "bytes"
              << "\n";
    for (const Row& r : rows)
      std::cout << std::left << std::setw(9) << r.sizing << std::right << std::setw(13) << r.per_instance
                << std::setw(9) << r.padded << std::setw(16) << r.total_counters << std::setw(12) << r.bytes
                << "\n";
    if (args.a > 1.0)
      std::cout << "frequent ranks at phi (zipf a=" << args.a << "): " << rank_threshold(args.a, args.phi)
                << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"freq benchmark harness"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "write a zipf stream file");
  generate->add_option("--a", gen.a, "zipf skew (> 0)")->required()->check(CLI::PositiveNumber);
  generate->add_option("--universe", gen.universe, "universe size")->required()->check(CLI::PositiveNumber);
  generate->add_option("--n", gen.n, "stream length")->required()->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "generator seed")->required();
  generate->add_option("--out", gen.out, "output path")->required();
  generate->add_option("--format", gen.format, "text|bin")->check(CLI::IsMember({"text", "bin"}));
  generate->add_flag("--shuffle", gen.shuffle, "map ranks onto a seeded id permutation");

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "process a stream and report metrics");
  run_cmd->add_option("--input", run.input, "stream file (otherwise zipf flags apply)");
  run_cmd->add_option("--format", run.input_format, "input format text|bin")
      ->check(CLI::IsMember({"text", "bin"}));
  run_cmd->add_option("--a", run.a, "zipf skew");
  run_cmd->add_option("--universe", run.universe, "zipf universe");
  run_cmd->add_option("--n", run.n, "stream length")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run.seed, "stream seed");
  run_cmd->add_option("--phi", run.phi, "support threshold")->required();
  run_cmd->add_option("--epsilon", run.epsilon, "approximation factor")->required();
  run_cmd->add_option("--threads", run.threads, "worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--d", run.d, "filter slots")->check(CLI::PositiveNumber);
  run_cmd->add_option("--e", run.e, "handover bound")->check(CLI::PositiveNumber);
  run_cmd->add_option("--sizing", run.sizing, "general|zipf")->check(CLI::IsMember({"general", "zipf"}));
  run_cmd->add_option("--query-rate", run.query_rate, "queries per million updates");
  run_cmd->add_option("--mode", run.mode, "accuracy|throughput|latency|consistency")
      ->check(CLI::IsMember({"accuracy", "throughput", "latency", "consistency"}));
  run_cmd->add_option("--duration-seconds", run.duration_seconds, "throughput/latency loop duration");
  run_cmd->add_option("--owner-seed", run.owner_seed, "domain-splitting hash seed");
  run_cmd->add_option("--queries", run.queries, "consistency mode: mid-stream queries");
  run_cmd->add_option("--json-out", run.json_out, "write the run record here instead of stdout");

  SpaceArgs space;
  CLI::App* space_cmd = app.add_subcommand("space", "print counter and memory requirements");
  space_cmd->add_option("--phi", space.phi, "support threshold")->required();
  space_cmd->add_option("--epsilon", space.epsilon, "approximation factor")->required();
  space_cmd->add_option("--threads", space.threads, "worker threads")->check(CLI::PositiveNumber);
  space_cmd->add_option("--a", space.a, "zipf skew for the zipf-sized row");
  space_cmd->add_option("--d", space.d, "filter slots")->check(CLI::PositiveNumber);
  space_cmd->add_flag("--csv", space.csv, "emit CSV instead of the text table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (space_cmd->parsed()) return cmd_space(space);

    if (run.epsilon > run.phi) {
      std::cerr << "error: --epsilon must not exceed --phi\n";
      return kExitUsage;
    }
    if (run.sizing == "zipf" && run.a <= 1.0) {
      std::cerr << "error: --sizing zipf requires --a > 1\n";
      return kExitUsage;
    }
    return cmd_run(run);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
