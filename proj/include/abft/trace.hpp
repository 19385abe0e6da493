#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abft/core.hpp"
#include "abft/digest.hpp"
#include "abft/message.hpp"

namespace abft::sim {

enum class SchedulerKind { FairRandom, FifoPerLink, AdversarialVcbcDelay };
enum class FaultKind {
  None,
  Crash,
  ByzantineSilent,
  ByzantineInvalidProposer,
  ByzantineEquivocator,
  ByzantineFuzzer,
};

const char* scheduler_name(SchedulerKind k);
const char* fault_name(FaultKind k);
std::optional<SchedulerKind> scheduler_from_name(const std::string& s);
std::optional<FaultKind> fault_from_name(const std::string& s);

struct FaultAssignment {
  ReplicaId replica = 0;
  FaultKind kind = FaultKind::None;
  std::uint64_t param = 0;  // Crash: step at which the replica stops
};

/// One client payload handed to one replica at one step.
struct Injection {
  ReplicaId replica = 0;
  std::uint64_t step = 0;
  Bytes payload;
};

struct SimConfig {
  Config cfg;
  SchedulerKind scheduler = SchedulerKind::FairRandom;
  std::vector<FaultAssignment> faults;
  std::uint64_t seed = 1;
  std::uint64_t key_seed = 42;
  std::uint64_t max_steps = 500000;
  /// AdversarialVcbcDelay: queue-0 broadcast traffic is ineligible for
  /// delivery until it has waited this many steps (0 picks 64n).
  std::uint64_t adversary_delay = 0;
  /// Fairness backstop: any message older than this is delivered first
  /// (0 picks 64n^2).
  std::uint64_t fairness_debt_cap = 0;
  bool flush_partial_batches = true;
};

// Trace records. `step` is the global delivery counter when the event fired.

struct RoundEntryRecord {
  ReplicaId replica;
  std::uint64_t round;
  ReplicaId queue;
  std::uint64_t head_priority;
  std::uint8_t proposal;
  bool has_head;
  Digest head_digest;       // zero when !has_head
  Digest delivered_digest;  // digest of the replica's delivered set
  std::uint64_t step;
};

struct AbaDecisionRecord {
  ReplicaId replica;
  std::uint64_t round;
  std::uint8_t value;
  std::uint32_t internal_rounds;
  std::uint64_t step;
};

struct VcbcDeliverRecord {
  ReplicaId replica;
  ReplicaId origin;
  std::uint64_t priority;
  Digest batch;
  std::uint64_t step;
};

struct DeliveryRecord {
  ReplicaId replica;
  std::uint64_t round;
  ReplicaId queue;
  std::uint64_t priority;
  Digest batch;
  std::uint64_t step;
};

struct OutputRecord {
  ReplicaId replica;
  Digest message;
  bool valid;  // false for payloads carrying the invalid-proposal marker
  std::uint64_t step;
};

struct Trace {
  SimConfig sim;
  std::vector<Injection> injections;  // full workload, for byte-exact replay

  std::vector<RoundEntryRecord> rounds;
  std::vector<AbaDecisionRecord> aba_decisions;
  std::vector<VcbcDeliverRecord> vcbc_delivers;
  std::vector<DeliveryRecord> deliveries;
  std::vector<OutputRecord> outputs;

  std::uint64_t steps = 0;
  bool goal_reached = false;  // every tracked payload output at every correct replica
  std::uint64_t messages_sent = 0;
  std::uint64_t bytes_sent = 0;
  std::array<std::uint64_t, 10> sent_by_kind{};  // indexed by MessageKind
  std::vector<std::uint64_t> sent_by_replica;
  std::map<std::string, std::uint64_t> violations;  // summed over replicas
  Digest trace_digest;  // running hash of every delivered (step, src, dst, wire)

  std::string to_json() const;
  static Trace from_json(const std::string& text);  // throws std::runtime_error
};

/// Payloads beginning with this marker count against goodput, not against
/// ordering throughput.
inline constexpr std::array<std::uint8_t, 4> kInvalidPayloadMarker = {0xBA, 0xDB, 0xAD, 0x00};

bool payload_is_invalid_marked(const Bytes& payload);
Bytes mark_payload_invalid(Bytes payload);

}  // namespace abft::sim
