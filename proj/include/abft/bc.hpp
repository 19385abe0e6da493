#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "abft/core.hpp"
#include "abft/pqueue.hpp"

namespace abft {

/// Digests of client messages already delivered in total order.
using DeliveredSet = std::set<Digest>;

namespace bc {

/// Batching state: pending client messages plus the next local priority.
struct State {
  std::vector<ClientMessage> buf;
  std::uint64_t next_priority = 0;
};

/// Appends m to the buffer unless already delivered or pending. When the
/// buffer reaches B, returns the (priority, batch) to hand to a fresh
/// broadcast instance and resets the buffer.
std::optional<std::pair<std::uint64_t, Batch>> on_client_message(State& state, const Config& cfg,
                                                                 const ClientMessage& m,
                                                                 const DeliveredSet& delivered);

/// Harness-level drain of a partial buffer; not part of the protocol.
std::optional<std::pair<std::uint64_t, Batch>> flush(State& state);

/// Broadcast delivery of batch m for (origin j, priority): enqueue into the
/// origin's queue, and tombstone immediately when every entry was already
/// delivered.
void on_vcbc_output(PriorityQueue& queue, std::uint64_t priority, const Batch& m,
                    const DeliveredSet& delivered);

bool all_entries_delivered(const Batch& m, const DeliveredSet& delivered);

}  // namespace bc
}  // namespace abft
