#pragma once

#include <map>
#include <optional>
#include <vector>

#include "abft/core.hpp"
#include "abft/message.hpp"
#include "abft/tcrypto.hpp"

namespace abft {

/// Verifiable consistent broadcast: echo broadcast where receivers return
/// signature shares over the payload digest to the origin, which combines
/// 2f+1 of them into a transferable proof. A completed instance can emit a
/// single verifiable message M that lets any replica deliver off-band.
class VcbcInstance {
 public:
  VcbcInstance(VcbcId id, ReplicaId self, const Config& cfg, const tcrypto::PublicKey& pk,
               const tcrypto::KeyShare& key);

  bool is_sender() const { return self_ == id_.origin; }
  bool delivered() const { return delivered_; }
  const VcbcId& id() const { return id_; }
  const Batch& payload() const;

  /// Sender only; emits SEND to all n. Throws ProtocolViolation on reuse.
  std::vector<Outbound> broadcast(const Batch& payload);

  /// First SEND from the origin fixes the payload and returns one echo
  /// share addressed to the origin. Equivocating or non-origin SENDs are
  /// counted and ignored.
  std::vector<Outbound> on_send(ReplicaId from, const Batch& payload, ViolationCounters& violations);

  /// Sender side: collects shares; at 2f+1 combines once and emits FINAL.
  std::vector<Outbound> on_echo_share(ReplicaId from, const tcrypto::SignatureShare& share,
                                      ViolationCounters& violations);

  /// Verifies M and delivers (once). Returns true when this call delivered.
  bool on_final(const VcbcFinalBody& m, ViolationCounters& violations);

  /// The verifiable message M; requires delivered().
  VcbcFinalBody make_verifiable_message() const;

 private:
  VcbcId id_;
  ReplicaId self_;
  Config cfg_;
  const tcrypto::PublicKey* pk_;
  const tcrypto::KeyShare* key_;

  std::optional<Batch> payload_;
  bool sent_echo_ = false;
  bool sent_final_ = false;
  bool broadcast_called_ = false;
  std::map<ReplicaId, tcrypto::SignatureShare> echo_shares_;
  std::optional<tcrypto::ThresholdSignature> proof_;
  bool delivered_ = false;
};

}  // namespace abft
