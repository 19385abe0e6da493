#include "abft/bc.hpp"

#include <algorithm>

namespace abft::bc {

bool all_entries_delivered(const Batch& m, const DeliveredSet& delivered) {
  return std::ranges::all_of(m.entries(),
                             [&](const ClientMessage& e) { return delivered.contains(e.id); });
}

std::optional<std::pair<std::uint64_t, Batch>> on_client_message(State& state, const Config& cfg,
                                                                 const ClientMessage& m,
                                                                 const DeliveredSet& delivered) {
  if (delivered.contains(m.id)) return std::nullopt;
  if (std::ranges::any_of(state.buf, [&](const ClientMessage& b) { return b.id == m.id; })) {
    return std::nullopt;
  }
  state.buf.push_back(m);
  if (state.buf.size() < cfg.batch_size) return std::nullopt;
  Batch batch(std::move(state.buf));
  state.buf.clear();
  return std::make_pair(state.next_priority++, std::move(batch));
}

std::optional<std::pair<std::uint64_t, Batch>> flush(State& state) {
  if (state.buf.empty()) return std::nullopt;
  Batch batch(std::move(state.buf));
  state.buf.clear();
  return std::make_pair(state.next_priority++, std::move(batch));
}

void on_vcbc_output(PriorityQueue& queue, std::uint64_t priority, const Batch& m,
                    const DeliveredSet& delivered) {
  queue.enqueue(priority, m);
  if (all_entries_delivered(m, delivered)) queue.dequeue(m);
}

}  // namespace abft::bc
