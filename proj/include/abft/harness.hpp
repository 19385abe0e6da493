#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "abft/trace.hpp"

namespace abft::harness {

// Workload generators. Payload bytes are drawn from a generator seeded
// independently of the scheduler so workloads replay exactly.

/// Every replica receives batch_size * batches_per_replica payloads at step 0.
std::vector<sim::Injection> full_load_workload(const Config& cfg,
                                               std::uint32_t batches_per_replica,
                                               std::uint64_t seed);

/// One replica receives exactly one batch worth of payloads at step 0.
std::vector<sim::Injection> single_shot_workload(const Config& cfg, ReplicaId target,
                                                 std::uint64_t seed);

/// `total` payloads spread round-robin over replicas, one every `interval` steps.
std::vector<sim::Injection> fixed_rate_workload(const Config& cfg, std::uint32_t total,
                                                std::uint64_t interval, std::uint64_t seed);

/// Replicas whose fault assignment is absent or `none`.
std::set<ReplicaId> correct_replicas(const sim::Trace& trace);

// Metrics. All are pure functions of the recorded trace.

struct SigmaStats {
  double overall = 0.0;                    // mean over every delivered slot
  std::map<ReplicaId, double> per_queue;   // mean per queue with >= 1 delivery
  std::uint64_t slots = 0;
};

/// Rounds-per-slot estimator: for each queue, partitions that queue's
/// executed rounds among its deliveries in slot order; 1.0 means every slot
/// was consumed by the first round that targeted its queue.
SigmaStats measure_sigma(const sim::Trace& trace);

/// Distinct (queue, priority) pairs delivered by correct replicas.
std::uint64_t batches_delivered(const sim::Trace& trace);

/// Protocol messages sent by correct replicas, per replica, per delivered batch.
double messages_per_replica_per_batch(const sim::Trace& trace);

struct LatencyStats {
  double mean_steps = 0.0;
  std::uint64_t measured = 0;  // payloads whose (n-f)-th output was observed
};

/// Injection step to the step the (n-f)-th correct replica output the payload.
LatencyStats measure_latency(const sim::Trace& trace);

struct GoodputStats {
  std::uint64_t valid_outputs = 0;    // per correct replica (deduplicated)
  std::uint64_t total_outputs = 0;
  double valid_per_kstep = 0.0;
  double total_per_kstep = 0.0;
};

GoodputStats measure_goodput(const sim::Trace& trace);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Trace checking: every safety property the protocol promises, evaluated
// over the records of correct replicas. An empty failure list means the
// trace is consistent with all of them.

struct CheckResult {
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

CheckResult check_trace(const sim::Trace& trace);

}  // namespace abft::harness
