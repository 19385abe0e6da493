#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "abft/aba.hpp"
#include "abft/ac.hpp"
#include "abft/bc.hpp"
#include "abft/core.hpp"
#include "abft/message.hpp"
#include "abft/pqueue.hpp"
#include "abft/tcrypto.hpp"
#include "abft/vcbc.hpp"

namespace abft {

/// Trusted-dealer key material for one replica group: a 2f+1 scheme for
/// broadcast proofs and an f+1 scheme for the common coin.
struct KeyMaterial {
  tcrypto::PublicKey vcbc_pk;
  std::vector<tcrypto::KeyShare> vcbc_shares;
  tcrypto::PublicKey coin_pk;
  std::vector<tcrypto::KeyShare> coin_shares;

  static KeyMaterial generate(const Config& cfg, std::uint64_t seed);

  Bytes encode() const;
  static KeyMaterial decode(std::span<const std::uint8_t> bytes);
};

struct ClientSubmit {
  ClientMessage message;
};
struct Receive {
  ReplicaId from = 0;
  Bytes wire;
};
struct HarnessFlush {};

using ReplicaEvent = std::variant<ClientSubmit, Receive, HarnessFlush>;

struct ReplicaOutput {
  std::vector<Outbound> outbound;
  std::vector<ClientMessage> delivered;
};

/// Trace hooks; the simulator records these, the protocol never reads them.
class ReplicaObserver {
 public:
  virtual ~ReplicaObserver() = default;
  virtual void on_round_entry(ReplicaId /*replica*/, std::uint64_t /*round*/,
                              ReplicaId /*queue*/, std::uint64_t /*head*/,
                              std::uint8_t /*proposal*/,
                              const std::optional<Digest>& /*head_digest*/,
                              const Digest& /*delivered_digest*/) {}
  virtual void on_aba_decided(ReplicaId /*replica*/, std::uint64_t /*round*/,
                              std::uint8_t /*value*/, std::uint32_t /*internal_rounds*/) {}
  virtual void on_vcbc_delivered(ReplicaId /*replica*/, const VcbcId& /*id*/,
                                 const Digest& /*batch*/) {}
  virtual void on_batch_delivered(ReplicaId /*replica*/, std::uint64_t /*round*/,
                                  ReplicaId /*queue*/, std::uint64_t /*priority*/,
                                  const Digest& /*batch*/) {}
};

/// One deterministic replica state machine: batching, per-origin queues,
/// one broadcast instance per proposal, one agreement instance per round,
/// gap recovery, total-order delivery. All mutation flows through handle().
class Replica {
 public:
  Replica(ReplicaId id, const Config& cfg, const KeyMaterial& keys,
          ReplicaObserver* observer = nullptr);

  /// Begins round 0 (a quiet system proposes 0 immediately).
  ReplicaOutput start();

  ReplicaOutput handle(const ReplicaEvent& event);

  /// Atomic-broadcast API: submit a payload for total ordering.
  ReplicaOutput broadcast_api(Bytes payload);

  ReplicaId id() const { return id_; }
  const Config& config() const { return cfg_; }
  std::uint64_t current_round() const { return ac_.round; }
  const ViolationCounters& violations() const { return violations_; }
  const std::vector<ClientMessage>& output_stream() const { return output_stream_; }
  const std::vector<PriorityQueue>& queues() const { return queues_; }
  const DeliveredSet& delivered_set() const { return delivered_; }

 private:
  VcbcInstance& vcbc_instance(const VcbcId& id);
  void handle_receive(const Receive& event, ReplicaOutput& out);
  void handle_vcbc_delivery(const VcbcId& id, ReplicaOutput& out);
  void start_broadcast(std::uint64_t priority, Batch batch, ReplicaOutput& out);
  void apply_filler(const FillerBody& filler, ReplicaOutput& out);
  void do_deliver(const Batch& value, ReplicaOutput& out);
  void pump(ReplicaOutput& out);
  bool try_fill(ReplicaId requester, ReplicaId queue, std::uint64_t slot, ReplicaOutput& out);
  void retry_fill_requests(ReplicaOutput& out);
  Digest delivered_set_digest() const;

  ReplicaId id_;
  Config cfg_;
  KeyMaterial keys_;
  ReplicaObserver* observer_;

  DeliveredSet delivered_;
  std::vector<ClientMessage> output_stream_;
  std::vector<PriorityQueue> queues_;
  bc::State bc_;
  ac::State ac_;
  std::map<VcbcId, VcbcInstance> vcbc_;
  std::map<std::uint64_t, AbaInstance> aba_;
  std::map<std::uint64_t, std::vector<std::pair<ReplicaId, MessageBody>>> future_aba_;
  // Gap requests we could not satisfy yet; retried after local progress.
  std::map<ReplicaId, std::pair<ReplicaId, std::uint64_t>> fill_requests_;
  bool started_ = false;
  ViolationCounters violations_;
};

}  // namespace abft
