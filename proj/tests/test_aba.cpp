#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <random>
#include <vector>

#include "abft/aba.hpp"

using namespace abft;

namespace {

/// Four agreement instances joined by a fair random network. Returns the
/// common decision; requires every instance to decide and agree.
struct MiniNet {
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

  MiniNet(std::uint64_t seed, std::uint64_t round = 0)
      : keys(tcrypto::deal(4, 2, 77)), rng(seed) {
    for (ReplicaId r = 0; r < cfg.n; ++r) {
      inst.push_back(std::make_unique<AbaInstance>(round, r, cfg, keys.public_key,
                                                   keys.shares[r]));
    }
  }

  void send(ReplicaId src, const std::vector<Outbound>& outs) {
    for (const auto& o : outs) {
      for (ReplicaId dst = 0; dst < cfg.n; ++dst) {
        if (!o.dst || *o.dst == dst) pending.push_back({src, dst, o.msg.body});
      }
    }
  }

  /// Runs to quiescence; true when all four decided the same value.
  bool run(const std::vector<std::uint8_t>& proposals, std::size_t max_deliveries = 200000) {
    for (ReplicaId r = 0; r < cfg.n; ++r) {
      send(r, inst[r]->propose(proposals[r], violations));
    }
    std::size_t delivered = 0;
    while (!pending.empty() && delivered < max_deliveries) {
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

}  // namespace

TEST_CASE("unanimous proposals decide that value in the first internal round") {
  for (std::uint8_t bit : {std::uint8_t{0}, std::uint8_t{1}}) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      MiniNet net(seed);
      REQUIRE(net.run({bit, bit, bit, bit}));
      for (auto& inst : net.inst) {
        CHECK(inst->decision()->value == bit);
        // Decides as soon as the coin matches the lone candidate.
        CHECK(inst->decision()->decided_round <= 20);
      }
      CHECK(net.violations.empty());
    }
  }
}

TEST_CASE("mixed proposals always agree, terminate quickly, and stay valid") {
  std::uint32_t worst = 0;
  std::uint64_t total_rounds = 0;
  int runs = 0;
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    for (std::uint32_t mix = 1; mix < 15; ++mix) {  // every non-unanimous pattern
      std::vector<std::uint8_t> prop;
      for (int i = 0; i < 4; ++i) prop.push_back((mix >> i) & 1);
      if (seed > 40 && mix != 5) continue;  // full sweep on early seeds, then one pattern
      MiniNet net(seed * 16 + mix);
      REQUIRE(net.run(prop));
      std::uint8_t value = net.inst[0]->decision()->value;
      bool proposed = false;
      for (int i = 0; i < 4; ++i) proposed = proposed || prop[i] == value;
      CHECK(proposed);
      for (auto& inst : net.inst) {
        std::uint32_t rounds = inst->decision()->decided_round + 1;
        worst = std::max(worst, rounds);
        total_rounds += rounds;
        ++runs;
      }
    }
  }
  CHECK(worst <= 40);
  CHECK(static_cast<double>(total_rounds) / runs <= 4.0);
}

TEST_CASE("laggards are rescued by finish amplification") {
  // Three instances run to a decision while the fourth hears nothing.
  MiniNet net(9);
  net.send(0, net.inst[0]->propose(1, net.violations));
  net.send(1, net.inst[1]->propose(1, net.violations));
  net.send(2, net.inst[2]->propose(1, net.violations));
  std::size_t delivered = 0;
  auto all_decided = [&] {
    return net.inst[0]->decision() && net.inst[1]->decision() && net.inst[2]->decision();
  };
  while (!all_decided() && delivered < 100000) {
    // Deliver to everyone except replica 3.
    std::size_t i = 0;
    for (; i < net.pending.size() && net.pending[i].dst == 3; ++i) {}
    if (i == net.pending.size()) break;
    MiniNet::Wire w = net.pending[i];
    net.pending.erase(net.pending.begin() + static_cast<long>(i));
    net.send(w.dst, net.inst[w.dst]->handle(w.src, w.body, net.violations));
    ++delivered;
  }
  REQUIRE(net.inst[0]->decision());
  REQUIRE(net.inst[1]->decision());
  REQUIRE(net.inst[2]->decision());
  CHECK_FALSE(net.inst[3]->decision());

  // Replica 3 now proposes and the withheld traffic drains.
  net.send(3, net.inst[3]->propose(0, net.violations));
  delivered = 0;
  while (!net.inst[3]->decision() && !net.pending.empty() && delivered < 100000) {
    MiniNet::Wire w = net.pending.front();
    net.pending.erase(net.pending.begin());
    net.send(w.dst, net.inst[w.dst]->handle(w.src, w.body, net.violations));
    ++delivered;
  }
  REQUIRE(net.inst[3]->decision());
  CHECK(net.inst[3]->decision()->value == 1);
}

TEST_CASE("messages far ahead of the lookahead window are counted and dropped") {
  MiniNet net(3);
  net.inst[0]->propose(0, net.violations);
  auto out = net.inst[0]->handle(1, AbaBvalBody{50, 1}, net.violations);
  CHECK(out.empty());
  CHECK(net.violations["aba_lookahead_overflow"] == 1);
  // Within the window: buffered silently.
  out = net.inst[0]->handle(1, AbaBvalBody{3, 1}, net.violations);
  CHECK(out.empty());
  CHECK(net.violations.size() == 1);
}

TEST_CASE("malformed bodies are counted, never fatal") {
  MiniNet net(4);
  net.inst[0]->propose(0, net.violations);
  net.inst[0]->handle(1, AbaBvalBody{0, 9}, net.violations);
  CHECK(net.violations["aba_bval_domain"] == 1);
  net.inst[0]->handle(1, AbaConfBody{0, 0}, net.violations);
  CHECK(net.violations["aba_conf_malformed"] == 1);
  net.inst[0]->handle(1, AbaCoinShareBody{0, {1, 123}}, net.violations);
  CHECK(net.violations["aba_invalid_coin_share"] == 1);
  net.inst[0]->handle(1, VcbcSendBody{}, net.violations);
  CHECK(net.violations["aba_foreign_body"] == 1);
  CHECK_FALSE(net.inst[0]->decision());
}

TEST_CASE("double proposal and out-of-domain proposal are local errors") {
  MiniNet net(5);
  CHECK_THROWS_AS(net.inst[0]->propose(2, net.violations), ProtocolViolation);
  net.inst[0]->propose(1, net.violations);
  CHECK_THROWS_AS(net.inst[0]->propose(1, net.violations), ProtocolViolation);
}
