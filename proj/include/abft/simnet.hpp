#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include "abft/replica.hpp"
#include "abft/trace.hpp"

namespace abft::sim {

/// Single-threaded discrete-event network. One step = one message delivery.
/// Every run is a pure function of (SimConfig, injections): the scheduler,
/// the fault behaviors, and the replicas draw no entropy outside the seeded
/// generator, so equal inputs give byte-equal traces.
class Simulator : private ReplicaObserver {
 public:
  Simulator(SimConfig sim, std::vector<Injection> injections);

  /// Runs until the goal is reached, the network quiesces, or max_steps.
  Trace run();

  /// Messages of each VCBC kind observed per instance; complexity checks
  /// read this after run(). Not serialized into the trace.
  const std::map<VcbcId, std::uint64_t>& vcbc_messages_per_instance() const {
    return vcbc_per_instance_;
  }

 private:
  void on_round_entry(ReplicaId replica, std::uint64_t round, ReplicaId queue,
                      std::uint64_t head, std::uint8_t proposal,
                      const std::optional<Digest>& head_digest,
                      const Digest& delivered_digest) override;
  void on_aba_decided(ReplicaId replica, std::uint64_t round, std::uint8_t value,
                      std::uint32_t internal_rounds) override;
  void on_vcbc_delivered(ReplicaId replica, const VcbcId& id, const Digest& batch) override;
  void on_batch_delivered(ReplicaId replica, std::uint64_t round, ReplicaId queue,
                          std::uint64_t priority, const Digest& batch) override;

  struct Pending {
    std::uint64_t seq;       // enqueue order, tie-break and FIFO key
    std::uint64_t enqueued;  // step at enqueue, for ages and debt
    ReplicaId src;
    ReplicaId dst;
    MessageKind kind;
    ReplicaId origin;  // VCBC / recovery tag, valid per kind
    Bytes wire;
  };

  FaultKind fault_of(ReplicaId r) const;
  bool is_correct(ReplicaId r) const;
  bool is_receiving(ReplicaId r) const;  // crashed replicas stop receiving
  void enqueue_outbound(ReplicaId src, const std::vector<Outbound>& outbound);
  void enqueue_wire(ReplicaId src, ReplicaId dst, const ProtocolMessage& msg);
  void push_pending(ReplicaId src, ReplicaId dst, MessageKind kind, ReplicaId origin,
                    Bytes wire);
  void deliver(std::size_t index);
  std::size_t pick_next();
  void inject_due();
  void apply_outputs(ReplicaId r, ReplicaOutput&& out);
  bool goal_reached() const;
  ProtocolMessage equivocate(const ProtocolMessage& msg, ReplicaId dst);
  Bytes fuzz_wire(const ProtocolMessage& msg);

  SimConfig sim_;
  std::vector<Injection> injections_;
  std::vector<FaultKind> fault_kind_;
  std::vector<std::uint64_t> fault_param_;
  std::mt19937_64 rng_;

  KeyMaterial keys_;
  std::vector<std::unique_ptr<Replica>> replicas_;
  std::vector<Pending> pending_;  // unordered bag, seq recovers FIFO per link
  std::uint64_t next_seq_ = 0;
  std::uint64_t step_ = 0;
  std::size_t next_injection_ = 0;
  bool flushed_ = false;

  std::set<Digest> goal_payloads_;
  std::vector<std::set<Digest>> output_seen_;  // per replica, tracked payloads output

  Trace trace_;
  Sha256 digest_;
  std::map<VcbcId, std::uint64_t> vcbc_per_instance_;
};

}  // namespace abft::sim
