#include "abft/harness.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "abft/simnet.hpp"

namespace abft::harness {

namespace {

Bytes random_payload(std::mt19937_64& rng, std::uint32_t tx_size) {
  Bytes payload(std::max<std::uint32_t>(tx_size, 8));
  for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
  return payload;
}

}  // namespace

std::vector<sim::Injection> full_load_workload(const Config& cfg,
                                               std::uint32_t batches_per_replica,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<sim::Injection> out;
  for (ReplicaId r = 0; r < cfg.n; ++r) {
    for (std::uint32_t i = 0; i < batches_per_replica * cfg.batch_size; ++i) {
      out.push_back({r, 0, random_payload(rng, cfg.tx_size)});
    }
  }
  return out;
}

std::vector<sim::Injection> single_shot_workload(const Config& cfg, ReplicaId target,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<sim::Injection> out;
  for (std::uint32_t i = 0; i < cfg.batch_size; ++i) {
    out.push_back({target, 0, random_payload(rng, cfg.tx_size)});
  }
  return out;
}

std::vector<sim::Injection> fixed_rate_workload(const Config& cfg, std::uint32_t total,
                                                std::uint64_t interval, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<sim::Injection> out;
  for (std::uint32_t i = 0; i < total; ++i) {
    out.push_back({static_cast<ReplicaId>(i % cfg.n), i * interval,
                   random_payload(rng, cfg.tx_size)});
  }
  return out;
}

std::set<ReplicaId> correct_replicas(const sim::Trace& trace) {
  std::set<ReplicaId> out;
  for (ReplicaId r = 0; r < trace.sim.cfg.n; ++r) out.insert(r);
  for (const auto& fa : trace.sim.faults) {
    if (fa.kind != sim::FaultKind::None) out.erase(fa.replica);
  }
  return out;
}

SigmaStats measure_sigma(const sim::Trace& trace) {
  auto correct = correct_replicas(trace);
  std::uint32_t n = trace.sim.cfg.n;

  // First delivery round per slot, over correct replicas.
  std::map<std::pair<ReplicaId, std::uint64_t>, std::uint64_t> slot_round;
  for (const auto& d : trace.deliveries) {
    if (!correct.contains(d.replica)) continue;
    auto key = std::make_pair(d.queue, d.priority);
    auto it = slot_round.find(key);
    if (it == slot_round.end() || d.round < it->second) slot_round[key] = d.round;
  }

  // Rounds targeting queue q up to and including x.
  auto q_rounds_upto = [&](ReplicaId q, std::int64_t x) -> std::int64_t {
    if (x < static_cast<std::int64_t>(q)) return 0;
    return (x - static_cast<std::int64_t>(q)) / n + 1;
  };

  std::map<ReplicaId, std::vector<std::pair<std::uint64_t, std::uint64_t>>> per_queue;
  for (const auto& [key, round] : slot_round) per_queue[key.first].push_back({key.second, round});

  SigmaStats stats;
  double total = 0.0;
  for (auto& [q, slots] : per_queue) {
    std::sort(slots.begin(), slots.end());
    double queue_total = 0.0;
    std::int64_t prev = -1;
    for (const auto& [priority, round] : slots) {
      auto cur = static_cast<std::int64_t>(round);
      double sigma =
          static_cast<double>(q_rounds_upto(q, cur) - q_rounds_upto(q, prev));
      queue_total += sigma;
      total += sigma;
      ++stats.slots;
      prev = cur;
    }
    stats.per_queue[q] = queue_total / static_cast<double>(slots.size());
  }
  if (stats.slots > 0) stats.overall = total / static_cast<double>(stats.slots);
  return stats;
}

std::uint64_t batches_delivered(const sim::Trace& trace) {
  auto correct = correct_replicas(trace);
  std::set<std::pair<ReplicaId, std::uint64_t>> slots;
  for (const auto& d : trace.deliveries) {
    if (correct.contains(d.replica)) slots.insert({d.queue, d.priority});
  }
  return slots.size();
}

double messages_per_replica_per_batch(const sim::Trace& trace) {
  auto correct = correct_replicas(trace);
  std::uint64_t batches = batches_delivered(trace);
  if (correct.empty() || batches == 0) return 0.0;
  std::uint64_t sent = 0;
  for (ReplicaId r : correct) sent += trace.sent_by_replica[r];
  return static_cast<double>(sent) / static_cast<double>(correct.size()) /
         static_cast<double>(batches);
}

LatencyStats measure_latency(const sim::Trace& trace) {
  auto correct = correct_replicas(trace);
  std::map<ReplicaId, sim::FaultKind> fault;
  for (const auto& fa : trace.sim.faults) fault[fa.replica] = fa.kind;

  // Injection payloads are stored pre-marking; re-derive the on-wire digest.
  std::map<Digest, std::uint64_t> injected_at;
  for (const auto& inj : trace.injections) {
    Bytes payload = inj.payload;
    auto it = fault.find(inj.replica);
    if (it != fault.end() && it->second == sim::FaultKind::ByzantineInvalidProposer) {
      payload = sim::mark_payload_invalid(std::move(payload));
    }
    Digest d = sha256(payload);
    if (!injected_at.contains(d)) injected_at[d] = inj.step;
  }

  std::map<Digest, std::vector<std::uint64_t>> output_steps;
  for (const auto& o : trace.outputs) {
    if (correct.contains(o.replica) && injected_at.contains(o.message)) {
      output_steps[o.message].push_back(o.step);
    }
  }

  std::uint32_t quorum = trace.sim.cfg.n - trace.sim.cfg.f;
  LatencyStats stats;
  double total = 0.0;
  for (auto& [digest, steps] : output_steps) {
    if (steps.size() < quorum) continue;
    std::sort(steps.begin(), steps.end());
    total += static_cast<double>(steps[quorum - 1] - injected_at[digest]);
    ++stats.measured;
  }
  if (stats.measured > 0) stats.mean_steps = total / static_cast<double>(stats.measured);
  return stats;
}

GoodputStats measure_goodput(const sim::Trace& trace) {
  auto correct = correct_replicas(trace);
  if (correct.empty()) return {};
  std::uint64_t valid = 0;
  std::uint64_t total = 0;
  for (const auto& o : trace.outputs) {
    if (!correct.contains(o.replica)) continue;
    ++total;
    if (o.valid) ++valid;
  }
  GoodputStats stats;
  stats.valid_outputs = valid / correct.size();
  stats.total_outputs = total / correct.size();
  if (trace.steps > 0) {
    double ksteps = static_cast<double>(trace.steps) / 1000.0;
    stats.valid_per_kstep = static_cast<double>(valid) / correct.size() / ksteps;
    stats.total_per_kstep = static_cast<double>(total) / correct.size() / ksteps;
  }
  return stats;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  auto m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]);
    double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

namespace {

void fail(CheckResult& res, std::string msg) { res.failures.push_back(std::move(msg)); }

}  // namespace

CheckResult check_trace(const sim::Trace& trace) {
  CheckResult res;
  auto correct = correct_replicas(trace);
  std::uint32_t n = trace.sim.cfg.n;
  std::uint32_t f = trace.sim.cfg.f;

  // Output integrity and pairwise order compatibility.
  std::map<ReplicaId, std::vector<Digest>> outputs;
  for (const auto& o : trace.outputs) {
    if (correct.contains(o.replica)) outputs[o.replica].push_back(o.message);
  }
  for (const auto& [r, seq] : outputs) {
    std::set<Digest> seen;
    for (const Digest& d : seq) {
      if (!seen.insert(d).second) {
        fail(res, "integrity: replica " + std::to_string(r) + " output " + d.hex() + " twice");
      }
    }
  }
  for (auto a = outputs.begin(); a != outputs.end(); ++a) {
    for (auto b = std::next(a); b != outputs.end(); ++b) {
      std::size_t m = std::min(a->second.size(), b->second.size());
      for (std::size_t i = 0; i < m; ++i) {
        if (a->second[i] != b->second[i]) {
          fail(res, "total order: replicas " + std::to_string(a->first) + " and " +
                        std::to_string(b->first) + " diverge at output " + std::to_string(i));
          break;
        }
      }
    }
  }

  // Broadcast consistency: one digest per instance, across every replica.
  std::map<std::pair<ReplicaId, std::uint64_t>, Digest> instance_digest;
  for (const auto& v : trace.vcbc_delivers) {
    auto key = std::make_pair(v.origin, v.priority);
    auto [it, fresh] = instance_digest.emplace(key, v.batch);
    if (!fresh && it->second != v.batch) {
      fail(res, "broadcast consistency: instance (" + std::to_string(v.origin) + "," +
                    std::to_string(v.priority) + ") delivered two digests");
    }
  }

  // Per-round records of correct replicas.
  struct RoundView {
    std::vector<const sim::RoundEntryRecord*> entries;
    std::vector<const sim::AbaDecisionRecord*> decisions;
    std::vector<const sim::DeliveryRecord*> deliveries;
  };
  std::map<std::uint64_t, RoundView> rounds;
  std::set<std::pair<ReplicaId, std::uint64_t>> entry_seen;
  for (const auto& e : trace.rounds) {
    if (!correct.contains(e.replica)) continue;
    if (!entry_seen.insert({e.replica, e.round}).second) {
      fail(res, "round " + std::to_string(e.round) + ": replica " + std::to_string(e.replica) +
                    " entered twice");
    }
    rounds[e.round].entries.push_back(&e);
  }
  for (const auto& d : trace.aba_decisions) {
    if (correct.contains(d.replica)) rounds[d.round].decisions.push_back(&d);
  }
  for (const auto& d : trace.deliveries) {
    if (correct.contains(d.replica)) rounds[d.round].deliveries.push_back(&d);
  }

  for (const auto& [round, view] : rounds) {
    std::string tag = "round " + std::to_string(round) + ": ";

    // Equal delivered sets at round entry.
    for (const auto* e : view.entries) {
      if (e->delivered_digest != view.entries.front()->delivered_digest) {
        fail(res, tag + "correct replicas entered with different delivered sets");
        break;
      }
    }

    // Agreement on the decision, and validity against recorded proposals.
    std::optional<std::uint8_t> decision;
    for (const auto* d : view.decisions) {
      if (!decision) {
        decision = d->value;
      } else if (*decision != d->value) {
        fail(res, tag + "correct replicas decided differently");
      }
    }
    if (decision) {
      bool proposed = false;
      for (const auto* e : view.entries) proposed = proposed || e->proposal == *decision;
      if (!proposed && !view.entries.empty()) {
        fail(res, tag + "decided a value no correct replica proposed");
      }
    }

    // Deliveries only on a 1-decision, one value, on the round's queue.
    if (!view.deliveries.empty()) {
      if (decision && *decision == 0) fail(res, tag + "delivery despite a 0-decision");
      const auto* first = view.deliveries.front();
      if (first->queue != queue_map(round, n)) fail(res, tag + "delivery off the round's queue");
      for (const auto* d : view.deliveries) {
        if (d->batch != first->batch || d->queue != first->queue ||
            d->priority != first->priority) {
          fail(res, tag + "correct replicas delivered different values");
          break;
        }
      }
    }

    // A strong quorum proposing the same head must win the round.
    std::map<Digest, std::uint32_t> head_support;
    for (const auto* e : view.entries) {
      if (e->proposal == 1 && e->has_head) ++head_support[e->head_digest];
    }
    for (const auto& [digest, count] : head_support) {
      if (count < 2 * f + 1) continue;
      if (decision && *decision != 1) {
        fail(res, tag + "0-decision against a strong quorum proposing 1");
      }
      if (!view.deliveries.empty() && view.deliveries.front()->batch != digest) {
        fail(res, tag + "delivered value differs from the quorum-supported head");
      }
    }
  }

  return res;
}

}  // namespace abft::harness
