#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>
#include <vector>

#include "abft/message.hpp"
#include "abft/vcbc.hpp"

using namespace abft;

namespace {

struct Net {
  Config cfg{4, 1, 2, 32};
  tcrypto::DealerOutput keys;
  std::vector<VcbcInstance> inst;
  ViolationCounters violations;
  std::uint64_t messages = 0;

  explicit Net(VcbcId id = {0, 0}) : keys(tcrypto::deal(4, 3, 5)) {
    for (ReplicaId r = 0; r < cfg.n; ++r) {
      inst.emplace_back(id, r, cfg, keys.public_key, keys.shares[r]);
    }
  }

  // Runs the full exchange in-order; returns the number of unicasts.
  void pump(std::vector<Outbound> initial, ReplicaId from) {
    std::deque<std::pair<ReplicaId, Outbound>> wire;
    for (auto& o : initial) wire.push_back({from, o});
    while (!wire.empty()) {
      auto [src, o] = wire.front();
      wire.pop_front();
      std::vector<ReplicaId> dsts;
      if (o.dst) {
        dsts.push_back(*o.dst);
      } else {
        for (ReplicaId r = 0; r < cfg.n; ++r) dsts.push_back(r);
      }
      for (ReplicaId dst : dsts) {
        ++messages;
        std::vector<Outbound> replies;
        const ProtocolMessage& m = o.msg;
        if (m.kind == MessageKind::VcbcSend) {
          replies = inst[dst].on_send(src, std::get<VcbcSendBody>(m.body).batch, violations);
        } else if (m.kind == MessageKind::VcbcEchoShare) {
          replies =
              inst[dst].on_echo_share(src, std::get<VcbcEchoShareBody>(m.body).share, violations);
        } else if (m.kind == MessageKind::VcbcFinal) {
          inst[dst].on_final(std::get<VcbcFinalBody>(m.body), violations);
        }
        for (auto& r : replies) wire.push_back({dst, r});
      }
    }
  }
};

Batch make_batch(const char* a, const char* b) {
  auto bytes = [](const char* s) {
    Bytes out;
    while (*s) out.push_back(static_cast<std::uint8_t>(*s++));
    return out;
  };
  return Batch({ClientMessage::from_payload(bytes(a)), ClientMessage::from_payload(bytes(b))});
}

}  // namespace

TEST_CASE("a complete broadcast delivers everywhere in exactly 3n messages") {
  Net net;
  Batch payload = make_batch("tx-a", "tx-b");
  net.pump(net.inst[0].broadcast(payload), 0);
  for (ReplicaId r = 0; r < 4; ++r) {
    CHECK(net.inst[r].delivered());
    CHECK(net.inst[r].payload() == payload);
  }
  // n SEND + n ECHO_SHARE + n FINAL, self-loops included.
  CHECK(net.messages == 3 * 4);
  CHECK(net.violations.empty());
}

TEST_CASE("broadcast misuse is rejected locally") {
  Net net;
  CHECK_THROWS_AS(net.inst[1].broadcast(make_batch("x", "y")), ProtocolViolation);  // not origin
  CHECK_THROWS_AS(net.inst[0].broadcast(Batch{}), ProtocolViolation);
  net.inst[0].broadcast(make_batch("x", "y"));
  CHECK_THROWS_AS(net.inst[0].broadcast(make_batch("x", "y")), ProtocolViolation);  // reuse
}

TEST_CASE("equivocating and non-origin sends are counted, not echoed") {
  Net net;
  Batch a = make_batch("a", "b"), b = make_batch("c", "d");
  auto first = net.inst[1].on_send(0, a, net.violations);
  CHECK(first.size() == 1);
  CHECK(first[0].dst == ReplicaId{0});
  CHECK(net.inst[1].on_send(0, b, net.violations).empty());
  CHECK(net.violations["vcbc_equivocating_send"] == 1);
  CHECK(net.inst[1].on_send(2, b, net.violations).empty());
  CHECK(net.violations["vcbc_send_non_origin"] == 1);
  // Duplicate matching send: no second echo.
  CHECK(net.inst[1].on_send(0, a, net.violations).empty());
}

TEST_CASE("final with a bad proof is rejected; a good one delivers cold") {
  Net net;
  Batch payload = make_batch("p", "q");
  net.pump(net.inst[0].broadcast(payload), 0);
  VcbcFinalBody m = net.inst[0].make_verifiable_message();

  // A replica that saw none of the protocol can deliver from M alone.
  Net fresh;
  CHECK(fresh.inst[3].on_final(m, fresh.violations));
  CHECK(fresh.inst[3].payload() == payload);

  Net cold;
  VcbcFinalBody bad = m;
  bad.proof.value ^= 1;
  CHECK_FALSE(cold.inst[3].on_final(bad, cold.violations));
  CHECK(cold.violations["vcbc_invalid_proof"] == 1);
  VcbcFinalBody wrong_payload = m;
  wrong_payload.batch = make_batch("r", "s");
  CHECK_FALSE(cold.inst[3].on_final(wrong_payload, cold.violations));
}

TEST_CASE("the verifiable message survives the wire and stays succinct") {
  std::vector<std::size_t> overheads;
  for (std::size_t len : {4u, 64u, 4096u}) {
    tcrypto::DealerOutput keys = tcrypto::deal(4, 3, 5);
    Config cfg{4, 1, 2, 32};
    std::vector<VcbcInstance> inst;
    for (ReplicaId r = 0; r < 4; ++r) inst.emplace_back(VcbcId{0, 0}, r, cfg, keys.public_key, keys.shares[r]);
    ViolationCounters v;
    Batch payload({ClientMessage::from_payload(Bytes(len, 0x7A))});
    inst[0].broadcast(payload);
    auto echo1 = inst[1].on_send(0, payload, v);
    auto echo2 = inst[2].on_send(0, payload, v);
    inst[0].on_echo_share(1, std::get<VcbcEchoShareBody>(echo1[0].msg.body).share, v);
    auto fin = inst[0].on_echo_share(2, std::get<VcbcEchoShareBody>(echo2[0].msg.body).share, v);
    // Third share comes from the origin echoing its own send.
    if (fin.empty()) {
      auto echo0 = inst[0].on_send(0, payload, v);
      fin = inst[0].on_echo_share(0, std::get<VcbcEchoShareBody>(echo0[0].msg.body).share, v);
    }
    REQUIRE(fin.size() == 1);
    REQUIRE(fin[0].msg.kind == MessageKind::VcbcFinal);

    Bytes wire = encode(fin[0].msg);
    ProtocolMessage back = decode(wire);
    ViolationCounters v2;
    VcbcInstance observer({0, 0}, 3, cfg, keys.public_key, keys.shares[3]);
    CHECK(observer.on_final(std::get<VcbcFinalBody>(back.body), v2));
    overheads.push_back(wire.size() - payload.encode().size());
  }
  // Proof plus envelope cost is independent of the payload size.
  CHECK(overheads[0] == overheads[1]);
  CHECK(overheads[1] == overheads[2]);
}
