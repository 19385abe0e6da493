// Acceptance gate: nine end-to-end criteria, one PASS/FAIL line each.
// Exit status is zero only when every criterion holds. Tolerances are pinned
// here, next to the check that uses them.
//
// Usage: acceptance [traces-dir]   (default "traces", for the replay check)
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "abft/aba.hpp"
#include "abft/harness.hpp"
#include "abft/pqueue.hpp"
#include "abft/simnet.hpp"

using namespace abft;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what) {
  std::printf("criterion %d %s: %s\n", criterion, pass ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

sim::Trace run_sim(const sim::SimConfig& sc, const std::vector<sim::Injection>& work) {
  sim::Simulator s(sc, work);
  return s.run();
}

// Criteria 1 and 2: safety and liveness over the full scheduler x fault
// matrix at n in {4, 7, 10}, >= 200 seeded runs in total.
void check_safety_liveness() {
  const std::vector<std::uint32_t> ns{4, 7, 10};
  const std::vector<sim::SchedulerKind> schedulers{
      sim::SchedulerKind::FairRandom, sim::SchedulerKind::FifoPerLink,
      sim::SchedulerKind::AdversarialVcbcDelay};
  const std::vector<sim::FaultKind> faults{
      sim::FaultKind::None,          sim::FaultKind::Crash,
      sim::FaultKind::ByzantineSilent, sim::FaultKind::ByzantineInvalidProposer,
      sim::FaultKind::ByzantineEquivocator, sim::FaultKind::ByzantineFuzzer};

  int runs = 0, safe = 0, live = 0;
  std::string first_failure;
  for (std::uint32_t n : ns) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      for (auto sched : schedulers) {
        for (auto fault : faults) {
          sim::SimConfig sc;
          sc.cfg = Config{n, (n - 1) / 3, 2, 32};
          sc.scheduler = sched;
          sc.seed = seed * 7919 + n;
          sc.max_steps = 4000000;
          ReplicaId faulty = n - 1;
          if (fault != sim::FaultKind::None) sc.faults = {{faulty, fault, 0}};
          auto work = harness::full_load_workload(sc.cfg, 2, sc.seed * 31 + 1);
          if (fault == sim::FaultKind::Crash || fault == sim::FaultKind::ByzantineSilent) {
            std::erase_if(work,
                          [&](const sim::Injection& i) { return i.replica == faulty; });
          }
          sim::Trace t = run_sim(sc, work);
          ++runs;
          auto check = harness::check_trace(t);
          // Detection counters fire by design under Byzantine senders; a
          // fault-free run must not trip any.
          bool is_safe = check.ok() &&
                         (fault != sim::FaultKind::None || t.violations.empty());
          safe += is_safe;
          live += t.goal_reached;
          if ((!is_safe || !t.goal_reached) && first_failure.empty()) {
            std::ostringstream os;
            os << " (first failure: n=" << n << " seed=" << seed << " "
               << sim::scheduler_name(sched) << " " << sim::fault_name(fault);
            if (!check.ok()) os << " " << check.failures[0];
            os << ")";
            first_failure = os.str();
          }
        }
      }
    }
  }
  {
    std::ostringstream os;
    os << "no safety property violated in " << safe << "/" << runs
       << " runs across schedulers and fault models" << first_failure;
    report(1, safe == runs && runs >= 200, os.str());
  }
  {
    std::ostringstream os;
    os << "every submitted payload ordered everywhere in " << live << "/" << runs
       << " runs";
    report(2, live == runs, os.str());
  }
}

// Criteria 3 and 4: rounds-per-slot near 1 under fair scheduling, and
// message cost growing linearly in n (including the exact 3n broadcast count).
void check_sigma_and_scaling() {
  const std::vector<std::uint32_t> ns{4, 7, 10, 13};
  std::vector<double> xs, ys;
  bool sigma_ok = true, vcbc_ok = true;
  std::ostringstream sigma_note, slope_note;
  for (std::uint32_t n : ns) {
    double sigma_sum = 0, mprb_sum = 0;
    const int seeds = 20;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
      sim::SimConfig sc;
      sc.cfg = Config{n, (n - 1) / 3, 2, 32};
      sc.seed = seed;
      sc.max_steps = 4000000;
      auto work = harness::full_load_workload(sc.cfg, 4, seed * 131 + n);
      sim::Simulator simulator(sc, work);
      sim::Trace t = simulator.run();
      sigma_sum += harness::measure_sigma(t).overall;
      mprb_sum += harness::messages_per_replica_per_batch(t);
      if (seed == 1) {
        // Complete broadcast of one batch costs exactly 3n messages:
        // n SENDs, n echo shares, n FINALs, self-delivery included.
        for (const auto& [id, count] : simulator.vcbc_messages_per_instance()) {
          if (count != 3ull * n) vcbc_ok = false;
        }
      }
    }
    double sigma = sigma_sum / seeds, mprb = mprb_sum / seeds;
    if (sigma < 1.0 || sigma > 1.2) sigma_ok = false;  // pinned: [1.0, 1.2]
    sigma_note << " n=" << n << ":" << std::round(sigma * 1000) / 1000;
    slope_note << " n=" << n << ":" << std::round(mprb * 10) / 10;
    xs.push_back(n);
    ys.push_back(mprb);
  }
  report(3, sigma_ok, "mean rounds per delivered slot within [1.0, 1.2] under fair "
                      "scheduling:" + sigma_note.str());
  double slope = harness::loglog_slope(xs, ys);
  std::ostringstream os;
  os << "messages per replica per batch scales linearly (log-log slope "
     << std::round(slope * 100) / 100 << " in [0.8, 1.3]; " << slope_note.str()
     << ") and complete broadcasts cost exactly 3n messages";
  report(4, slope >= 0.8 && slope <= 1.3 && vcbc_ok, os.str());
}

// Criterion 5: a scheduler that withholds one queue's broadcast traffic
// inflates that queue's rounds-per-slot well past the fair baseline while
// safety and liveness hold.
void check_adversarial_sigma() {
  double q0_sum = 0;
  int runs = 0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    sim::SimConfig sc;
    sc.cfg = Config{4, 1, 2, 32};
    sc.scheduler = sim::SchedulerKind::AdversarialVcbcDelay;
    sc.adversary_delay = 2048;
    sc.fairness_debt_cap = 4096;
    sc.seed = seed;
    sc.max_steps = 4000000;
    auto work = harness::fixed_rate_workload(sc.cfg, 24, 40, seed * 13 + 7);
    sim::Trace t = run_sim(sc, work);
    auto sigma = harness::measure_sigma(t);
    auto it = sigma.per_queue.find(0);
    if (it != sigma.per_queue.end()) {
      q0_sum += it->second;
      ++runs;
    }
    ok = ok && t.goal_reached && harness::check_trace(t).ok() && t.violations.empty();
  }
  double q0 = runs ? q0_sum / runs : 0;
  std::ostringstream os;
  os << "withholding one queue's broadcasts drives its rounds per slot to "
     << std::round(q0 * 100) / 100 << " (> 1.5) with safety and liveness intact";
  report(5, ok && runs == 10 && q0 > 1.5, os.str());
}

// Small fair-random network of binary agreement instances, for criterion 6.
struct AbaNet {
  Config cfg{4, 1, 1, 32};
  tcrypto::DealerOutput keys;
  std::vector<std::unique_ptr<AbaInstance>> inst;
  ViolationCounters violations;
  std::mt19937_64 rng;
  struct Wire {
    ReplicaId src, dst;
    MessageBody body;
  };
  std::vector<Wire> pending;

  explicit AbaNet(std::uint64_t seed) : keys(tcrypto::deal(4, 2, 77)), rng(seed) {
    for (ReplicaId r = 0; r < cfg.n; ++r) {
      inst.push_back(
          std::make_unique<AbaInstance>(0, r, cfg, keys.public_key, keys.shares[r]));
    }
  }

  void send(ReplicaId src, const std::vector<Outbound>& outs) {
    for (const auto& o : outs) {
      for (ReplicaId dst = 0; dst < cfg.n; ++dst) {
        if (!o.dst || *o.dst == dst) pending.push_back({src, dst, o.msg.body});
      }
    }
  }

  bool run(const std::vector<std::uint8_t>& proposals) {
    for (ReplicaId r = 0; r < cfg.n; ++r) send(r, inst[r]->propose(proposals[r], violations));
    std::size_t delivered = 0;
    while (!pending.empty() && delivered < 200000) {
      std::size_t i = std::uniform_int_distribution<std::size_t>(0, pending.size() - 1)(rng);
      Wire w = std::move(pending[i]);
      pending[i] = std::move(pending.back());
      pending.pop_back();
      send(w.dst, inst[w.dst]->handle(w.src, w.body, violations));
      ++delivered;
    }
    for (ReplicaId r = 0; r < cfg.n; ++r) {
      if (!inst[r]->decision()) return false;
      if (inst[r]->decision()->value != inst[0]->decision()->value) return false;
    }
    return true;
  }
};

void check_aba() {
  bool unanimous_ok = true;
  for (std::uint8_t bit : {std::uint8_t{0}, std::uint8_t{1}}) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      AbaNet net(seed * 2 + bit);
      if (!net.run({bit, bit, bit, bit})) unanimous_ok = false;
      for (auto& i : net.inst) {
        if (i->decision()->value != bit) unanimous_ok = false;
      }
    }
  }

  std::uint32_t worst = 0;
  std::uint64_t total_rounds = 0, counted = 0;
  bool mixed_ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (std::uint32_t mix = 1; mix < 15; ++mix) {  // every non-unanimous pattern
      std::vector<std::uint8_t> prop;
      for (int i = 0; i < 4; ++i) prop.push_back((mix >> i) & 1);
      AbaNet net(seed * 64 + mix);
      if (!net.run(prop)) mixed_ok = false;
      for (auto& i : net.inst) {
        std::uint32_t rounds = i->decision() ? i->decision()->decided_round + 1 : 999;
        worst = std::max(worst, rounds);
        total_rounds += rounds;
        ++counted;
      }
    }
  }
  double mean = static_cast<double>(total_rounds) / counted;
  // pinned: worst case <= 40 internal rounds, mean <= 4.
  mixed_ok = mixed_ok && worst <= 40 && mean <= 4.0;

  auto keys = tcrypto::deal(4, 2, 99);
  int ones = 0;
  const int coins = 10000;
  for (int i = 0; i < coins; ++i) {
    Bytes name = tcrypto::coin_name(static_cast<std::uint64_t>(i), 0);
    std::vector<tcrypto::SignatureShare> shares{
        tcrypto::sign_share(keys.shares[0], name),
        tcrypto::sign_share(keys.shares[1], name)};
    ones += tcrypto::coin_bit(tcrypto::combine(keys.public_key, name, shares));
  }
  double mean_bit = static_cast<double>(ones) / coins;
  bool coin_ok = mean_bit >= 0.45 && mean_bit <= 0.55;  // pinned

  std::ostringstream os;
  os << "binary agreement decides the unanimous bit always; mixed proposals decide in <= "
     << worst << " internal rounds (mean " << std::round(mean * 100) / 100
     << "); coin bias " << mean_bit << " in [0.45, 0.55]";
  report(6, unanimous_ok && mixed_ok && coin_ok, os.str());
}

// Criterion 7: shipped reference traces replay to byte-identical digests.
void check_replay(const std::string& dir) {
  int checked = 0, matched = 0;
  std::string note;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    sim::Trace recorded = sim::Trace::from_json(buf.str());
    sim::Trace replayed = run_sim(recorded.sim, recorded.injections);
    ++checked;
    if (replayed.trace_digest == recorded.trace_digest &&
        replayed.steps == recorded.steps) {
      ++matched;
    } else if (note.empty()) {
      note = " (mismatch: " + entry.path().filename().string() + ")";
    }
  }
  std::ostringstream os;
  os << matched << "/" << checked
     << " reference traces replay to byte-identical digests" << note;
  report(7, checked >= 3 && matched == checked, os.str());
}

// Criterion 8: the priority queue matches a from-scratch model over random
// operation sequences.
void check_pqueue_model() {
  struct Model {
    std::map<std::uint64_t, std::optional<Batch>> slots;  // nullopt = used
    std::uint64_t head() const {
      std::uint64_t h = 0;
      while (true) {
        auto it = slots.find(h);
        if (it == slots.end() || it->second.has_value()) return h;
        ++h;
      }
    }
  };
  std::mt19937_64 rng(20240817);
  PriorityQueue q(0);
  Model model;
  std::vector<Batch> pool;
  for (int i = 0; i < 8; ++i) {
    Bytes payload{static_cast<std::uint8_t>(i), 0x5A};
    pool.push_back(Batch({ClientMessage::from_payload(payload)}));
  }
  bool ok = true;
  for (int op = 0; op < 10000 && ok; ++op) {
    std::uint64_t slot = rng() % 12;
    const Batch& b = pool[rng() % pool.size()];
    switch (rng() % 3) {
      case 0:
        q.enqueue(slot, b);
        if (auto it = model.slots.find(slot);
            it == model.slots.end()) {
          model.slots[slot] = b;
        }
        break;
      case 1:
        q.dequeue(b);
        for (auto& [p, v] : model.slots) {
          if (v && v->digest() == b.digest()) v = std::nullopt;
        }
        break;
      case 2: {
        auto head_it = model.slots.find(model.head());
        bool filled = head_it != model.slots.end() && head_it->second.has_value();
        if (filled) {
          q.mark_head_used();
          head_it->second = std::nullopt;
        }
        break;
      }
    }
    ok = ok && q.head() == model.head();
    auto it = model.slots.find(model.head());
    std::optional<Batch> expect =
        it != model.slots.end() ? it->second : std::nullopt;
    ok = ok && q.peek() == expect;
  }
  report(8, ok, "queue behavior matches an executable model over 10000 random operations");
}

// Criterion 9: a proposer injecting garbage lowers useful goodput but does
// not slow down ordering for everyone else.
void check_invalid_proposer_goodput() {
  double base_total = 0, bad_total = 0, bad_valid = 0;
  bool ok = true;
  const int seeds = 5;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    sim::SimConfig base;
    base.cfg = Config{4, 1, 2, 32};
    base.seed = seed;
    base.max_steps = 4000000;
    auto work = harness::full_load_workload(base.cfg, 3, seed * 977);
    sim::Trace clean = run_sim(base, work);

    sim::SimConfig faulted = base;
    faulted.faults = {{3, sim::FaultKind::ByzantineInvalidProposer, 0}};
    sim::Trace dirty = run_sim(faulted, work);

    ok = ok && clean.goal_reached && dirty.goal_reached &&
         harness::check_trace(dirty).ok();
    auto g0 = harness::measure_goodput(clean);
    auto g1 = harness::measure_goodput(dirty);
    base_total += g0.total_per_kstep;
    bad_total += g1.total_per_kstep;
    bad_valid += g1.valid_per_kstep;
  }
  base_total /= seeds;
  bad_total /= seeds;
  bad_valid /= seeds;
  bool goodput_drops = bad_valid < bad_total;  // marked payloads ordered but useless
  bool throughput_holds =
      std::fabs(bad_total - base_total) <= 0.10 * base_total;  // pinned: 10%
  std::ostringstream os;
  os << "garbage proposals cut useful goodput ("
     << std::round(bad_valid * 100) / 100 << " of " << std::round(bad_total * 100) / 100
     << " outputs/kstep) while ordering throughput stays within 10% of the clean "
     << std::round(base_total * 100) / 100;
  report(9, ok && goodput_drops && throughput_holds, os.str());
}

}  // namespace

int main(int argc, char** argv) {
  std::string traces_dir = argc > 1 ? argv[1] : "traces";
  check_safety_liveness();
  check_sigma_and_scaling();
  check_adversarial_sigma();
  check_aba();
  check_replay(traces_dir);
  check_pqueue_model();
  check_invalid_proposer_goodput();
  return failures == 0 ? 0 : 1;
}
