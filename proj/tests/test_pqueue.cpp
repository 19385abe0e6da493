#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <optional>
#include <random>

#include "abft/pqueue.hpp"

using namespace abft;

namespace {

Batch make_batch(std::uint64_t tag) {
  Bytes payload{static_cast<std::uint8_t>(tag), static_cast<std::uint8_t>(tag >> 8),
                static_cast<std::uint8_t>(tag >> 16)};
  return Batch({ClientMessage::from_payload(payload)});
}

}  // namespace

TEST_CASE("head starts at zero and peek over an empty slot is empty") {
  PriorityQueue q(0);
  CHECK(q.head() == 0);
  CHECK_FALSE(q.peek().has_value());
  q.enqueue(2, make_batch(2));
  // Head still points at the empty slot 0.
  CHECK(q.head() == 0);
  CHECK_FALSE(q.peek().has_value());
  q.enqueue(0, make_batch(0));
  CHECK(q.peek().value() == make_batch(0));
}

TEST_CASE("dequeue removes every slot holding the digest and advances the head") {
  PriorityQueue q(1);
  Batch a = make_batch(1), b = make_batch(2);
  q.enqueue(0, a);
  q.enqueue(1, a);  // the same batch can sit at several priorities
  q.enqueue(2, b);
  q.dequeue(a);
  CHECK(q.slot_state(0) == PriorityQueue::SlotState::Used);
  CHECK(q.slot_state(1) == PriorityQueue::SlotState::Used);
  CHECK(q.head() == 2);
  CHECK(q.peek().value() == b);
  // Unknown digests change nothing.
  q.dequeue(make_batch(77));
  CHECK(q.head() == 2);
}

TEST_CASE("slots are write-once") {
  PriorityQueue q(0);
  Batch a = make_batch(1), b = make_batch(2);
  q.enqueue(0, a);
  q.enqueue(0, b);  // ignored, slot already filled
  CHECK(q.peek().value() == a);
  q.dequeue(a);
  q.enqueue(0, b);  // ignored, slot used forever
  CHECK(q.slot_state(0) == PriorityQueue::SlotState::Used);
  CHECK(q.head() == 1);
}

TEST_CASE("mark_head_used requires a filled head") {
  PriorityQueue q(0);
  CHECK_THROWS_AS(q.mark_head_used(), ProtocolViolation);
  q.enqueue(0, make_batch(1));
  q.enqueue(1, make_batch(1));
  q.mark_head_used();
  CHECK(q.head() == 1);
  q.mark_head_used();
  CHECK(q.head() == 2);
}

namespace {

/// Straight-line reference model: a map of slot states with the head
/// recomputed from scratch on every query.
struct ModelQueue {
  enum class S { Empty, Filled, Used };
  std::map<std::uint64_t, std::pair<S, std::optional<Batch>>> slots;

  std::uint64_t head() const {
    std::uint64_t h = 0;
    while (true) {
      auto it = slots.find(h);
      if (it == slots.end() || it->second.first != S::Used) return h;
      ++h;
    }
  }
  void enqueue(std::uint64_t p, const Batch& v) {
    auto& slot = slots[p];
    if (slot.first != S::Empty) return;
    slot = {S::Filled, v};
  }
  void dequeue(const Batch& v) {
    for (auto& [p, slot] : slots) {
      if (slot.first == S::Filled && slot.second->digest() == v.digest()) {
        slot = {S::Used, std::nullopt};
      }
    }
  }
  std::optional<Batch> peek() const {
    auto it = slots.find(head());
    if (it == slots.end() || it->second.first != S::Filled) return std::nullopt;
    return it->second.second;
  }
  void mark_head_used() { slots[head()] = {S::Used, std::nullopt}; }
};

}  // namespace

TEST_CASE("random operation sequences agree with the reference model") {
  std::mt19937_64 rng(424242);
  PriorityQueue q(0);
  ModelQueue model;
  std::vector<Batch> pool;
  for (std::uint64_t i = 0; i < 16; ++i) pool.push_back(make_batch(i));

  for (int op = 0; op < 10000; ++op) {
    switch (rng() % 4) {
      case 0: {
        std::uint64_t p = rng() % 24;
        const Batch& v = pool[rng() % pool.size()];
        q.enqueue(p, v);
        model.enqueue(p, v);
        break;
      }
      case 1: {
        const Batch& v = pool[rng() % pool.size()];
        q.dequeue(v);
        model.dequeue(v);
        break;
      }
      case 2: {
        if (model.peek()) {
          q.mark_head_used();
          model.mark_head_used();
        }
        break;
      }
      default:
        break;  // query-only step below
    }
    REQUIRE(q.head() == model.head());
    REQUIRE(q.peek() == model.peek());
    std::uint64_t probe = rng() % 24;
    auto model_state = model.slots.count(probe) == 0
                           ? ModelQueue::S::Empty
                           : model.slots[probe].first;
    REQUIRE(static_cast<int>(q.slot_state(probe)) == static_cast<int>(model_state));
  }
}
