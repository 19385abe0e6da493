#include "abft/ac.hpp"

namespace abft::ac {

std::optional<Batch> purged_peek(PriorityQueue& queue, const DeliveredSet& delivered) {
  while (true) {
    auto head = queue.peek();
    if (!head) return std::nullopt;
    if (!bc::all_entries_delivered(*head, delivered)) return head;
    queue.mark_head_used();
  }
}

std::uint8_t begin_round(State& state, std::vector<PriorityQueue>& queues,
                         const DeliveredSet& delivered) {
  if (state.phase != Phase::Proposing) throw ProtocolViolation("begin_round outside Proposing");
  auto n = static_cast<std::uint32_t>(queues.size());
  PriorityQueue& queue = queues[queue_map(state.round, n)];
  state.phase = Phase::AwaitingAba;
  return purged_peek(queue, delivered) ? 1 : 0;
}

DecisionAction on_aba_decision(State& state, std::vector<PriorityQueue>& queues,
                               const DeliveredSet& delivered, std::uint8_t decision) {
  if (state.phase != Phase::AwaitingAba) throw ProtocolViolation("decision outside AwaitingAba");
  auto n = static_cast<std::uint32_t>(queues.size());
  PriorityQueue& queue = queues[queue_map(state.round, n)];
  if (decision == 0) {
    finish_round(state);
    return Advance{};
  }
  auto value = purged_peek(queue, delivered);
  if (!value) {
    state.phase = Phase::AwaitingValue;
    return RequestFill{queue.id(), queue.head()};
  }
  return Deliver{std::move(*value)};
}

std::optional<Batch> recheck_awaited_value(State& state, std::vector<PriorityQueue>& queues,
                                           const DeliveredSet& delivered) {
  if (state.phase != Phase::AwaitingValue) return std::nullopt;
  auto n = static_cast<std::uint32_t>(queues.size());
  return purged_peek(queues[queue_map(state.round, n)], delivered);
}

std::optional<FillerBody> on_fill_gap(
    const std::vector<PriorityQueue>& queues, ReplicaId q, std::uint64_t s,
    const std::function<std::optional<VcbcFinalBody>(VcbcId)>& proof_lookup) {
  if (q >= queues.size()) return std::nullopt;
  const PriorityQueue& queue = queues[q];
  if (queue.head() < s) return std::nullopt;
  FillerBody filler;
  for (std::uint64_t slot = s; slot <= queue.head(); ++slot) {
    VcbcId id{q, slot};
    if (auto proof = proof_lookup(id)) filler.entries.push_back({id, std::move(*proof)});
  }
  if (filler.entries.empty()) return std::nullopt;
  return filler;
}

std::vector<ClientMessage> deliver(std::vector<PriorityQueue>& queues, DeliveredSet& delivered,
                                   const Batch& value) {
  for (auto& queue : queues) queue.dequeue(value);
  std::vector<ClientMessage> outputs;
  for (const ClientMessage& m : value.entries()) {
    if (delivered.contains(m.id)) continue;
    delivered.insert(m.id);
    outputs.push_back(m);
  }
  return outputs;
}

void finish_round(State& state) {
  ++state.round;
  state.phase = Phase::Proposing;
}

}  // namespace abft::ac
