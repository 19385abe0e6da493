#include "abft/pqueue.hpp"

namespace abft {

void PriorityQueue::enqueue(std::uint64_t priority, const Batch& value) {
  Slot& slot = slots_[priority];
  if (slot.state != SlotState::Empty) return;
  slot.state = SlotState::Filled;
  slot.value = value;
}

void PriorityQueue::dequeue(const Batch& value) {
  for (auto& [priority, slot] : slots_) {
    if (slot.state == SlotState::Filled && slot.value->digest() == value.digest()) {
      slot.state = SlotState::Used;
      slot.value.reset();
    }
  }
  advance_head();
}

std::optional<Batch> PriorityQueue::peek() const {
  auto it = slots_.find(head_);
  if (it == slots_.end() || it->second.state != SlotState::Filled) return std::nullopt;
  return it->second.value;
}

PriorityQueue::SlotState PriorityQueue::slot_state(std::uint64_t priority) const {
  auto it = slots_.find(priority);
  return it == slots_.end() ? SlotState::Empty : it->second.state;
}

std::optional<Batch> PriorityQueue::slot_value(std::uint64_t priority) const {
  auto it = slots_.find(priority);
  if (it == slots_.end() || it->second.state != SlotState::Filled) return std::nullopt;
  return it->second.value;
}

void PriorityQueue::mark_head_used() {
  auto it = slots_.find(head_);
  if (it == slots_.end() || it->second.state != SlotState::Filled) {
    throw ProtocolViolation("mark_head_used on a non-filled head slot");
  }
  it->second.state = SlotState::Used;
  it->second.value.reset();
  advance_head();
}

void PriorityQueue::advance_head() {
  while (slot_state(head_) == SlotState::Used) ++head_;
}

}  // namespace abft
