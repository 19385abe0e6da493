// Command line front end for the simulator: run single experiments, sweep
// measurement grids, validate and replay recorded traces, and deal keys.
//
// Exit codes: 0 success, 2 property violation in a trace, 3 bad
// configuration or input, 4 replay digest mismatch.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "abft/harness.hpp"
#include "abft/simnet.hpp"

using namespace abft;

namespace {

struct RunOptions {
  std::uint32_t n = 4;
  std::uint32_t f = 0;  // 0 means (n-1)/3
  std::uint32_t batch_size = 2;
  std::uint32_t tx_size = 32;
  std::string scheduler = "fair-random";
  std::vector<std::string> faults;
  std::uint64_t seed = 1;
  std::uint64_t key_seed = 42;
  std::uint64_t steps = 500000;
  std::uint64_t adversary_delay = 0;
  std::string workload = "full-load";
  std::uint32_t batches = 2;
  std::uint64_t rate_total = 24;
  std::uint64_t rate_interval = 40;
  std::uint64_t workload_seed = 0;  // 0 means derive from seed
  std::string out;
};

int fail_config(const std::string& why) {
  std::cerr << "error: " << why << "\n";
  return 3;
}

/// "replica:kind[:param]", e.g. "3:crash:400" or "2:byzantine-fuzzer".
bool parse_fault(const std::string& text, sim::FaultAssignment& out) {
  std::stringstream ss(text);
  std::string replica, kind, param;
  if (!std::getline(ss, replica, ':') || !std::getline(ss, kind, ':')) return false;
  std::getline(ss, param, ':');
  try {
    out.replica = static_cast<ReplicaId>(std::stoul(replica));
    out.param = param.empty() ? 0 : std::stoull(param);
  } catch (const std::exception&) {
    return false;
  }
  auto k = sim::fault_from_name(kind);
  if (!k) return false;
  out.kind = *k;
  return true;
}

bool build_sim_config(const RunOptions& opt, sim::SimConfig& sc) {
  std::uint32_t f = opt.f ? opt.f : (opt.n - 1) / 3;
  sc.cfg = Config{opt.n, f, opt.batch_size, opt.tx_size};
  if (!sc.cfg.valid()) return false;
  auto sched = sim::scheduler_from_name(opt.scheduler);
  if (!sched) return false;
  sc.scheduler = *sched;
  for (const auto& text : opt.faults) {
    sim::FaultAssignment fa;
    if (!parse_fault(text, fa) || fa.replica >= opt.n) return false;
    sc.faults.push_back(fa);
  }
  sc.seed = opt.seed;
  sc.key_seed = opt.key_seed;
  sc.max_steps = opt.steps;
  sc.adversary_delay = opt.adversary_delay;
  return true;
}

std::vector<sim::Injection> build_workload(const RunOptions& opt, const sim::SimConfig& sc) {
  std::uint64_t wseed = opt.workload_seed ? opt.workload_seed : opt.seed * 1000003 + 17;
  if (opt.workload == "full-load")
    return harness::full_load_workload(sc.cfg, opt.batches, wseed);
  if (opt.workload == "single-shot") return harness::single_shot_workload(sc.cfg, 0, wseed);
  if (opt.workload == "fixed-rate")
    return harness::fixed_rate_workload(sc.cfg, static_cast<std::uint32_t>(opt.rate_total),
                                        opt.rate_interval, wseed);
  return {};
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

int report(const sim::Trace& trace) {
  auto sigma = harness::measure_sigma(trace);
  auto latency = harness::measure_latency(trace);
  std::printf("steps            %llu\n", static_cast<unsigned long long>(trace.steps));
  std::printf("goal reached     %s\n", trace.goal_reached ? "yes" : "no");
  std::printf("messages sent    %llu\n",
              static_cast<unsigned long long>(trace.messages_sent));
  std::printf("bytes sent       %llu\n", static_cast<unsigned long long>(trace.bytes_sent));
  std::printf("batches ordered  %llu\n",
              static_cast<unsigned long long>(harness::batches_delivered(trace)));
  std::printf("msgs/replica/batch  %.2f\n", harness::messages_per_replica_per_batch(trace));
  std::printf("rounds per slot  %.4f over %llu slots\n", sigma.overall,
              static_cast<unsigned long long>(sigma.slots));
  for (const auto& [q, s] : sigma.per_queue) std::printf("  queue %u  %.4f\n", q, s);
  std::printf("latency steps    %.1f over %llu payloads\n", latency.mean_steps,
              static_cast<unsigned long long>(latency.measured));
  std::printf("trace digest     %s\n", trace.trace_digest.hex().c_str());
  for (const auto& [name, count] : trace.violations)
    std::printf("violation %s x%llu\n", name.c_str(),
                static_cast<unsigned long long>(count));

  auto check = harness::check_trace(trace);
  for (const auto& failure : check.failures) std::printf("FAIL %s\n", failure.c_str());
  if (!check.ok() || !trace.violations.empty()) return 2;
  return 0;
}

int cmd_run(const RunOptions& opt) {
  sim::SimConfig sc;
  if (!build_sim_config(opt, sc)) return fail_config("invalid run configuration");
  auto work = build_workload(opt, sc);
  if (work.empty()) return fail_config("unknown workload '" + opt.workload + "'");
  sim::Simulator simulator(sc, work);
  sim::Trace trace = simulator.run();
  if (!opt.out.empty() && !write_file(opt.out, trace.to_json()))
    return fail_config("cannot write " + opt.out);
  return report(trace);
}

struct SweepOptions {
  std::vector<std::uint32_t> ns{4, 7, 10, 13};
  std::uint64_t seeds = 10;
  std::uint32_t batches = 4;
  std::string scheduler = "fair-random";
  std::uint64_t adversary_delay = 0;
  std::uint64_t steps = 2000000;
  std::string format = "csv";
  std::string out;
};

int cmd_sweep(const SweepOptions& opt) {
  auto sched = sim::scheduler_from_name(opt.scheduler);
  if (!sched) return fail_config("unknown scheduler '" + opt.scheduler + "'");
  std::ostringstream csv, json;
  csv << "n,seed,steps,messages,batches,msgs_per_replica_per_batch,rounds_per_slot,"
         "latency_steps\n";
  json << "[";
  bool first = true;
  for (std::uint32_t n : opt.ns) {
    for (std::uint64_t seed = 1; seed <= opt.seeds; ++seed) {
      sim::SimConfig sc;
      sc.cfg = Config{n, (n - 1) / 3, 2, 32};
      if (!sc.cfg.valid()) return fail_config("invalid n " + std::to_string(n));
      sc.scheduler = *sched;
      sc.seed = seed;
      sc.max_steps = opt.steps;
      sc.adversary_delay = opt.adversary_delay;
      auto work = harness::full_load_workload(sc.cfg, opt.batches, seed * 131 + n);
      sim::Simulator simulator(sc, work);
      sim::Trace trace = simulator.run();
      if (!trace.goal_reached) return fail_config("run did not converge; raise --steps");
      auto check = harness::check_trace(trace);
      for (const auto& failure : check.failures)
        std::fprintf(stderr, "FAIL n=%u seed=%llu %s\n", n,
                     static_cast<unsigned long long>(seed), failure.c_str());
      if (!check.ok()) return 2;
      auto sigma = harness::measure_sigma(trace);
      auto latency = harness::measure_latency(trace);
      double mprb = harness::messages_per_replica_per_batch(trace);
      csv << n << ',' << seed << ',' << trace.steps << ',' << trace.messages_sent << ','
          << harness::batches_delivered(trace) << ',' << mprb << ',' << sigma.overall << ','
          << latency.mean_steps << "\n";
      json << (first ? "" : ",") << "\n  {\"n\": " << n << ", \"seed\": " << seed
           << ", \"steps\": " << trace.steps << ", \"messages\": " << trace.messages_sent
           << ", \"batches\": " << harness::batches_delivered(trace)
           << ", \"msgs_per_replica_per_batch\": " << mprb
           << ", \"rounds_per_slot\": " << sigma.overall
           << ", \"latency_steps\": " << latency.mean_steps << "}";
      first = false;
    }
  }
  json << "\n]\n";
  const std::string& text = opt.format == "json" ? json.str() : csv.str();
  if (opt.out.empty()) {
    std::cout << text;
  } else if (!write_file(opt.out, text)) {
    return fail_config("cannot write " + opt.out);
  }
  return 0;
}

std::optional<sim::Trace> load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return sim::Trace::from_json(buf.str());
  } catch (const std::exception& e) {
    std::cerr << "error: " << path << ": " << e.what() << "\n";
    return std::nullopt;
  }
}

int cmd_check_trace(const std::string& path) {
  auto trace = load_trace(path);
  if (!trace) return 3;
  auto check = harness::check_trace(*trace);
  for (const auto& failure : check.failures) std::printf("FAIL %s\n", failure.c_str());
  if (!check.ok()) return 2;
  std::printf("ok: %zu round entries, %zu outputs, digest %s\n", trace->rounds.size(),
              trace->outputs.size(), trace->trace_digest.hex().c_str());
  return 0;
}

int cmd_replay(const std::string& path) {
  auto trace = load_trace(path);
  if (!trace) return 3;
  sim::Simulator simulator(trace->sim, trace->injections);
  sim::Trace replayed = simulator.run();
  if (replayed.trace_digest != trace->trace_digest || replayed.steps != trace->steps) {
    std::printf("MISMATCH recorded %s steps %llu, replayed %s steps %llu\n",
                trace->trace_digest.hex().c_str(),
                static_cast<unsigned long long>(trace->steps),
                replayed.trace_digest.hex().c_str(),
                static_cast<unsigned long long>(replayed.steps));
    return 4;
  }
  std::printf("replay ok: digest %s, %llu steps\n", replayed.trace_digest.hex().c_str(),
              static_cast<unsigned long long>(replayed.steps));
  return 0;
}

int cmd_dealer(std::uint32_t n, std::uint64_t seed, const std::string& out) {
  Config cfg{n, (n - 1) / 3, 1, 32};
  if (!cfg.valid()) return fail_config("invalid n " + std::to_string(n));
  KeyMaterial keys = KeyMaterial::generate(cfg, seed);
  Bytes enc = keys.encode();
  std::ofstream file(out, std::ios::binary);
  file.write(reinterpret_cast<const char*>(enc.data()), static_cast<long>(enc.size()));
  if (!file) return fail_config("cannot write " + out);
  std::printf("wrote %zu bytes of key material for n=%u to %s\n", enc.size(), n,
              out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous atomic broadcast simulator"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "run one seeded simulation");
  run_cmd->add_option("--n", run.n, "replica count");
  run_cmd->add_option("--f", run.f, "fault bound (default (n-1)/3)");
  run_cmd->add_option("--batch-size", run.batch_size, "payloads per batch");
  run_cmd->add_option("--tx-size", run.tx_size, "payload bytes");
  run_cmd->add_option("--scheduler", run.scheduler,
                      "fair-random | fifo-per-link | adversarial-vcbc-delay");
  run_cmd->add_option("--fault", run.faults,
                      "replica:kind[:param], e.g. 3:crash:400 (repeatable)");
  run_cmd->add_option("--seed", run.seed, "scheduler seed");
  run_cmd->add_option("--key-seed", run.key_seed, "dealer seed");
  run_cmd->add_option("--steps", run.steps, "delivery budget");
  run_cmd->add_option("--adversary-delay", run.adversary_delay,
                      "withholding window for the adversarial scheduler");
  run_cmd->add_option("--workload", run.workload, "full-load | single-shot | fixed-rate");
  run_cmd->add_option("--batches", run.batches, "full-load: batches per replica");
  run_cmd->add_option("--rate-total", run.rate_total, "fixed-rate: total payloads");
  run_cmd->add_option("--rate-interval", run.rate_interval, "fixed-rate: steps per payload");
  run_cmd->add_option("--workload-seed", run.workload_seed, "payload generator seed");
  run_cmd->add_option("--out", run.out, "write the trace as json");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "measure scaling across replica counts");
  sweep_cmd->add_option("--n", sweep.ns, "replica counts (repeatable)");
  sweep_cmd->add_option("--seeds", sweep.seeds, "seeds per configuration");
  sweep_cmd->add_option("--batches", sweep.batches, "batches per replica");
  sweep_cmd->add_option("--scheduler", sweep.scheduler, "scheduler");
  sweep_cmd->add_option("--adversary-delay", sweep.adversary_delay, "withholding window");
  sweep_cmd->add_option("--steps", sweep.steps, "delivery budget per run");
  sweep_cmd->add_option("--format", sweep.format, "csv | json");
  sweep_cmd->add_option("--out", sweep.out, "output file (default stdout)");

  std::string trace_path;
  auto* check_cmd = app.add_subcommand("check-trace", "validate a recorded trace");
  check_cmd->add_option("trace", trace_path, "trace json file")->required();
  auto* replay_cmd =
      app.add_subcommand("replay", "re-run a trace and compare digests");
  replay_cmd->add_option("trace", trace_path, "trace json file")->required();

  std::uint32_t dealer_n = 4;
  std::uint64_t dealer_seed = 42;
  std::string dealer_out = "keys.bin";
  auto* dealer_cmd = app.add_subcommand("dealer", "generate threshold key material");
  dealer_cmd->add_option("--n", dealer_n, "replica count");
  dealer_cmd->add_option("--seed", dealer_seed, "dealer seed");
  dealer_cmd->add_option("--out", dealer_out, "output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep);
    if (check_cmd->parsed()) return cmd_check_trace(trace_path);
    if (replay_cmd->parsed()) return cmd_replay(trace_path);
    if (dealer_cmd->parsed()) return cmd_dealer(dealer_n, dealer_seed, dealer_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
