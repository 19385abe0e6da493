#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "abft/bc.hpp"
#include "abft/core.hpp"
#include "abft/message.hpp"
#include "abft/pqueue.hpp"

namespace abft::ac {

/// Round loop state. Blocking "wait until" lines of the agreement loop are
/// encoded as phases driven by the replica event loop.
enum class Phase { Proposing, AwaitingAba, AwaitingValue };

struct State {
  std::uint64_t round = 0;
  Phase phase = Phase::Proposing;
};

/// Tombstones head batches whose entries were all delivered through other
/// queues, then peeks. All correct replicas entering a round with equal
/// delivered sets see the same effective head this way.
std::optional<Batch> purged_peek(PriorityQueue& queue, const DeliveredSet& delivered);

/// Selects the round's queue and computes the ABA proposal bit.
/// Transitions Proposing -> AwaitingAba.
std::uint8_t begin_round(State& state, std::vector<PriorityQueue>& queues,
                         const DeliveredSet& delivered);

struct Advance {};                          // decision 0: next round
struct Deliver { Batch value; };            // decision 1 with a head value
struct RequestFill { ReplicaId queue; std::uint64_t slot; };  // decision 1, head missing
using DecisionAction = std::variant<Advance, Deliver, RequestFill>;

/// Processes the ABA decision for the current round. Deliver/RequestFill
/// transition per the action; the caller performs ac_deliver / FILL-GAP.
DecisionAction on_aba_decision(State& state, std::vector<PriorityQueue>& queues,
                               const DeliveredSet& delivered, std::uint8_t decision);

/// While AwaitingValue: re-peek after any queue mutation; a value releases
/// the wait and should be delivered.
std::optional<Batch> recheck_awaited_value(State& state, std::vector<PriorityQueue>& queues,
                                           const DeliveredSet& delivered);

/// FILL-GAP responder: if our head for queue q is at least s, return a
/// FILLER with the verifiable message of every delivered instance in
/// [s, head]. Slots we hold only as tombstones are skipped.
std::optional<FillerBody> on_fill_gap(
    const std::vector<PriorityQueue>& queues, ReplicaId q, std::uint64_t s,
    const std::function<std::optional<VcbcFinalBody>(VcbcId)>& proof_lookup);

/// Total-order delivery: tombstone the batch in every queue, then output
/// entries not yet in the delivered set, in canonical batch order.
std::vector<ClientMessage> deliver(std::vector<PriorityQueue>& queues, DeliveredSet& delivered,
                                   const Batch& value);

/// Completes the round after delivery: advances to the next round.
void finish_round(State& state);

}  // namespace abft::ac
