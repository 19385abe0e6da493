#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "abft/core.hpp"

namespace abft {

/// Slot-based priority queue mediating between the broadcast and agreement
/// components. Slots are write-once: a removed slot is permanently marked
/// used and can never hold another value. The head points at the smallest
/// priority whose slot is not used, even if that slot is still empty.
class PriorityQueue {
 public:
  enum class SlotState { Empty, Filled, Used };

  explicit PriorityQueue(ReplicaId id) : id_(id) {}

  ReplicaId id() const { return id_; }
  std::uint64_t head() const { return head_; }

  /// Ignored if the slot already holds a value or is used.
  void enqueue(std::uint64_t priority, const Batch& value);

  /// Marks every slot holding a batch with this digest as used; the head
  /// then advances to the smallest non-used priority.
  void dequeue(const Batch& value);

  /// Value at the head slot, or nullopt while the head slot is empty.
  std::optional<Batch> peek() const;

  SlotState slot_state(std::uint64_t priority) const;
  std::optional<Batch> slot_value(std::uint64_t priority) const;

  /// Marks the head slot used and advances. Only legal while the head slot
  /// is filled; used by the agreement component's lazy purge of batches
  /// whose entries were all delivered through other queues.
  void mark_head_used();

 private:
  void advance_head();

  struct Slot {
    SlotState state = SlotState::Empty;
    std::optional<Batch> value;
  };

  ReplicaId id_;
  std::map<std::uint64_t, Slot> slots_;
  std::uint64_t head_ = 0;
};

}  // namespace abft
