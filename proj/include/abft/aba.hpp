#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "abft/core.hpp"
#include "abft/message.hpp"
#include "abft/tcrypto.hpp"

namespace abft {

struct AbaDecision {
  std::uint8_t value = 0;
  std::uint32_t decided_round = 0;
};

/// Asynchronous binary agreement: per internal round BVAL/AUX/CONF phases
/// followed by a threshold-signature common coin, plus a FINISH gadget so
/// deciders can eventually stop serving the instance.
///
/// Thresholds at n = 3f+1: f+1 to relay a BVAL, 2f+1 to admit a bit into
/// bin_values, n-f for the AUX and CONF quorums, f+1 coin shares.
class AbaInstance {
 public:
  AbaInstance(std::uint64_t round, ReplicaId self, const Config& cfg,
              const tcrypto::PublicKey& coin_pk, const tcrypto::KeyShare& coin_key);

  std::uint64_t round() const { return round_; }
  std::uint32_t internal_round() const { return current_; }
  const std::optional<AbaDecision>& decision() const { return decision_; }
  bool halted() const { return halted_; }

  /// Sets the initial estimate and broadcasts the first BVAL.
  std::vector<Outbound> propose(std::uint8_t bit, ViolationCounters& violations);

  /// Routes an ABA message body. Future internal rounds are buffered (up to
  /// a lookahead cap), past rounds are ignored, FINISH is round-free.
  std::vector<Outbound> handle(ReplicaId from, const MessageBody& body,
                               ViolationCounters& violations);

 private:
  struct RoundState {
    std::set<ReplicaId> bval_senders[2];
    bool sent_bval[2] = {false, false};
    std::uint8_t bin_values = 0;  // mask
    bool sent_aux = false;
    std::map<ReplicaId, std::uint8_t> aux;   // sender -> bit
    std::map<ReplicaId, std::uint8_t> conf;  // sender -> mask
    bool sent_conf = false;
    bool sent_coin_share = false;
    std::uint8_t conf_union = 0;  // V, frozen when the coin share is released
    std::map<ReplicaId, tcrypto::SignatureShare> coin_shares;
    std::optional<int> coin;
    bool resolved = false;
  };

  static constexpr std::uint32_t kLookaheadRounds = 8;

  ProtocolMessage make(MessageKind kind, MessageBody body) const;
  RoundState& rs() { return rounds_[current_]; }

  void on_bval(ReplicaId from, std::uint8_t bit, std::vector<Outbound>& out,
               ViolationCounters& violations);
  void on_aux(ReplicaId from, std::uint8_t bit, std::vector<Outbound>& out,
              ViolationCounters& violations);
  void on_conf(ReplicaId from, std::uint8_t mask, std::vector<Outbound>& out,
               ViolationCounters& violations);
  void on_coin_share(ReplicaId from, const tcrypto::SignatureShare& share,
                     std::vector<Outbound>& out, ViolationCounters& violations);
  void on_finish(ReplicaId from, std::uint8_t bit, std::vector<Outbound>& out,
                 ViolationCounters& violations);

  void run_gates(std::vector<Outbound>& out, ViolationCounters& violations);
  void maybe_resolve(std::vector<Outbound>& out, ViolationCounters& violations);
  void decide(std::uint8_t bit, std::vector<Outbound>& out);
  void advance_round(std::vector<Outbound>& out, ViolationCounters& violations);
  void replay_buffered(std::vector<Outbound>& out, ViolationCounters& violations);

  std::uint64_t round_;
  ReplicaId self_;
  Config cfg_;
  const tcrypto::PublicKey* coin_pk_;
  const tcrypto::KeyShare* coin_key_;

  bool proposed_ = false;
  std::uint8_t estimate_ = 0;
  std::uint32_t current_ = 0;
  std::map<std::uint32_t, RoundState> rounds_;
  std::map<std::uint32_t, std::vector<std::pair<ReplicaId, MessageBody>>> buffered_;

  std::set<ReplicaId> finish_senders_[2];
  bool sent_finish_ = false;
  std::optional<AbaDecision> decision_;
  bool halted_ = false;
};

}  // namespace abft
