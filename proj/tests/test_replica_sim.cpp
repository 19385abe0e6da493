#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <deque>
#include <memory>

#include "abft/harness.hpp"
#include "abft/simnet.hpp"

using namespace abft;

namespace {

sim::Trace run_once(sim::SimConfig sc, std::vector<sim::Injection> work) {
  sim::Simulator s(std::move(sc), std::move(work));
  return s.run();
}

sim::SimConfig base_config(std::uint32_t n, std::uint64_t seed) {
  sim::SimConfig sc;
  sc.cfg = Config{n, (n - 1) / 3, 2, 32};
  sc.seed = seed;
  sc.max_steps = 2000000;
  return sc;
}

}  // namespace

TEST_CASE("key material matches the configuration or is rejected") {
  Config cfg{4, 1, 2, 32};
  KeyMaterial keys = KeyMaterial::generate(cfg, 1);
  CHECK_NOTHROW(Replica(0, cfg, keys));
  CHECK_THROWS_AS(Replica(4, cfg, keys), std::invalid_argument);
  Config other{7, 2, 2, 32};
  CHECK_THROWS_AS(Replica(0, other, keys), std::invalid_argument);

  Bytes enc = keys.encode();
  KeyMaterial back = KeyMaterial::decode(enc);
  CHECK(back.vcbc_pk.key == keys.vcbc_pk.key);
  CHECK(back.coin_shares[2].secret == keys.coin_shares[2].secret);
  enc.pop_back();
  CHECK_THROWS_AS(KeyMaterial::decode(enc), ParseError);
}

TEST_CASE("the replica api rejects empty payloads and unstarted use") {
  Config cfg{4, 1, 2, 32};
  KeyMaterial keys = KeyMaterial::generate(cfg, 1);
  Replica r(0, cfg, keys);
  CHECK_THROWS_AS(r.handle(HarnessFlush{}), ProtocolViolation);
  r.start();
  CHECK_THROWS_AS(r.broadcast_api({}), std::invalid_argument);
  auto out = r.broadcast_api({1, 2, 3});
  CHECK(out.outbound.empty());  // below batch size, nothing sent yet
  out = r.broadcast_api({4, 5, 6});
  REQUIRE(out.outbound.size() == 1);
  CHECK(out.outbound[0].msg.kind == MessageKind::VcbcSend);
}

TEST_CASE("malformed wire input is counted and ignored") {
  Config cfg{4, 1, 2, 32};
  KeyMaterial keys = KeyMaterial::generate(cfg, 1);
  Replica r(0, cfg, keys);
  r.start();
  r.handle(Receive{1, Bytes{0xFF, 0x01, 0x02}});
  CHECK(r.violations().at("wire_parse_error") == 1);

  ProtocolMessage spoofed;
  spoofed.kind = MessageKind::AbaFinish;
  spoofed.sender = 2;  // channel says 1
  spoofed.body = AbaFinishBody{1};
  r.handle(Receive{1, encode(spoofed)});
  CHECK(r.violations().at("wire_sender_mismatch") == 1);
}

TEST_CASE("identical seeds reproduce byte-identical traces") {
  auto work = harness::full_load_workload(Config{4, 1, 2, 32}, 3, 11);
  sim::Trace a = run_once(base_config(4, 5), work);
  sim::Trace b = run_once(base_config(4, 5), work);
  CHECK(a.trace_digest == b.trace_digest);
  CHECK(a.steps == b.steps);
  CHECK(a.messages_sent == b.messages_sent);

  sim::Trace c = run_once(base_config(4, 6), work);
  CHECK(a.trace_digest != c.trace_digest);
}

TEST_CASE("trace files round-trip through json") {
  auto work = harness::full_load_workload(Config{4, 1, 2, 32}, 2, 21);
  auto sc = base_config(4, 9);
  sc.faults = {{3, sim::FaultKind::Crash, 0}};
  sim::Trace t = run_once(sc, work);
  sim::Trace back = sim::Trace::from_json(t.to_json());
  CHECK(back.trace_digest == t.trace_digest);
  CHECK(back.steps == t.steps);
  CHECK(back.rounds.size() == t.rounds.size());
  CHECK(back.outputs.size() == t.outputs.size());
  CHECK(back.sim.faults.size() == 1);
  CHECK(back.injections.size() == work.size());

  // A replay from the stored manifest reproduces the digest.
  sim::Simulator replay(back.sim, back.injections);
  CHECK(replay.run().trace_digest == t.trace_digest);
}

TEST_CASE("every scheduler and fault model reaches the goal safely at n=4") {
  using sim::FaultKind;
  using sim::SchedulerKind;
  for (std::uint64_t seed : {1ull, 2ull}) {
    for (auto fault : {FaultKind::None, FaultKind::Crash, FaultKind::ByzantineSilent,
                       FaultKind::ByzantineInvalidProposer, FaultKind::ByzantineEquivocator,
                       FaultKind::ByzantineFuzzer}) {
      for (auto sched : {SchedulerKind::FairRandom, SchedulerKind::FifoPerLink,
                         SchedulerKind::AdversarialVcbcDelay}) {
        auto sc = base_config(4, seed);
        sc.scheduler = sched;
        if (fault != FaultKind::None) sc.faults = {{3, fault, 0}};
        auto work = harness::full_load_workload(sc.cfg, 2, seed * 31);
        if (fault == FaultKind::Crash || fault == FaultKind::ByzantineSilent) {
          std::erase_if(work, [](const sim::Injection& i) { return i.replica == 3; });
        }
        sim::Trace t = run_once(sc, work);
        INFO("fault " << sim::fault_name(fault) << " scheduler "
                      << sim::scheduler_name(sched) << " seed " << seed);
        CHECK(t.goal_reached);
        auto res = harness::check_trace(t);
        for (const auto& f : res.failures) FAIL_CHECK(f);
      }
    }
  }
}

TEST_CASE("a crash after startup still converges") {
  auto sc = base_config(4, 17);
  sc.faults = {{2, sim::FaultKind::Crash, 400}};
  auto work = harness::full_load_workload(sc.cfg, 2, 23);
  std::erase_if(work, [](const sim::Injection& i) { return i.replica == 2; });
  sim::Trace t = run_once(sc, work);
  CHECK(t.goal_reached);
  CHECK(harness::check_trace(t).ok());
}

TEST_CASE("withholding broadcasts forces gap recovery, not divergence") {
  // Replica 3 never sees origin 0's broadcast; it must still deliver the
  // batch, via FILL-GAP / FILLER, once the round decides 1 without it.
  Config cfg{4, 1, 1, 32};
  KeyMaterial keys = KeyMaterial::generate(cfg, 2);
  std::vector<std::unique_ptr<Replica>> reps;
  for (ReplicaId r = 0; r < 4; ++r) reps.push_back(std::make_unique<Replica>(r, cfg, keys));

  std::deque<std::pair<ReplicaId, Outbound>> wire;
  std::uint64_t fillers = 0;
  auto push = [&](ReplicaId src, std::vector<Outbound>&& outs) {
    for (auto& o : outs) {
      if (o.msg.kind == MessageKind::Filler) ++fillers;
      wire.push_back({src, std::move(o)});
    }
  };

  for (ReplicaId r = 0; r < 4; ++r) push(r, std::move(reps[r]->start().outbound));
  Bytes payload{9, 9, 9};
  push(0, std::move(reps[0]->broadcast_api(payload).outbound));

  Digest want = sha256(payload);
  auto replica3_done = [&] {
    const auto& out = reps[3]->output_stream();
    return std::any_of(out.begin(), out.end(),
                       [&](const ClientMessage& m) { return m.id == want; });
  };

  int delivered = 0;
  while (!replica3_done() && !wire.empty() && delivered < 100000) {
    auto [src, o] = std::move(wire.front());
    wire.pop_front();
    for (ReplicaId dst = 0; dst < 4; ++dst) {
      if (o.dst && *o.dst != dst) continue;
      bool withheld = dst == 3 && o.msg.origin == 0 &&
                      (o.msg.kind == MessageKind::VcbcSend ||
                       o.msg.kind == MessageKind::VcbcFinal);
      if (withheld) continue;
      push(dst, std::move(reps[dst]->handle(Receive{src, encode(o.msg)}).outbound));
      ++delivered;
    }
  }

  CHECK(replica3_done());
  CHECK(fillers > 0);
  // No divergence: replica 3 ordered the same batch as everyone else.
  for (ReplicaId r = 0; r < 4; ++r) {
    REQUIRE(!reps[r]->output_stream().empty());
    CHECK(reps[r]->output_stream()[0].id == want);
  }
}

TEST_CASE("the trace checker actually rejects broken traces") {
  auto work = harness::full_load_workload(Config{4, 1, 2, 32}, 2, 3);
  sim::Trace t = run_once(base_config(4, 3), work);
  REQUIRE(harness::check_trace(t).ok());

  sim::Trace reordered = t;
  // Swap two outputs of one replica: breaks pairwise order compatibility.
  std::vector<std::size_t> of_zero;
  for (std::size_t i = 0; i < reordered.outputs.size(); ++i) {
    if (reordered.outputs[i].replica == 0) of_zero.push_back(i);
  }
  REQUIRE(of_zero.size() >= 2);
  std::swap(reordered.outputs[of_zero[0]].message, reordered.outputs[of_zero[1]].message);
  CHECK_FALSE(harness::check_trace(reordered).ok());

  sim::Trace dup = t;
  dup.outputs.push_back(dup.outputs[of_zero[0]]);
  CHECK_FALSE(harness::check_trace(dup).ok());

  sim::Trace conflicted = t;
  REQUIRE(!conflicted.vcbc_delivers.empty());
  conflicted.vcbc_delivers.push_back(conflicted.vcbc_delivers[0]);
  conflicted.vcbc_delivers.back().batch.bytes[0] ^= 1;
  CHECK_FALSE(harness::check_trace(conflicted).ok());
}
