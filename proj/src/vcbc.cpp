#include "abft/vcbc.hpp"

namespace abft {

namespace {

void bump(ViolationCounters& v, const char* key) { ++v[key]; }

}  // namespace

VcbcInstance::VcbcInstance(VcbcId id, ReplicaId self, const Config& cfg,
                           const tcrypto::PublicKey& pk, const tcrypto::KeyShare& key)
    : id_(id), self_(self), cfg_(cfg), pk_(&pk), key_(&key) {}

const Batch& VcbcInstance::payload() const {
  if (!payload_) throw ProtocolViolation("VCBC payload not set");
  return *payload_;
}

std::vector<Outbound> VcbcInstance::broadcast(const Batch& payload) {
  if (!is_sender()) throw ProtocolViolation("VCBC broadcast from non-origin");
  if (broadcast_called_) throw ProtocolViolation("VCBC double broadcast");
  if (payload.empty()) throw ProtocolViolation("VCBC broadcast of empty batch");
  broadcast_called_ = true;
  // Fix the payload now: echoes may race ahead of our own SEND self-loop.
  payload_ = payload;

  ProtocolMessage msg;
  msg.kind = MessageKind::VcbcSend;
  msg.sender = self_;
  msg.origin = id_.origin;
  msg.priority = id_.priority;
  msg.body = VcbcSendBody{payload};
  return {{std::nullopt, std::move(msg)}};
}

std::vector<Outbound> VcbcInstance::on_send(ReplicaId from, const Batch& payload,
                                            ViolationCounters& violations) {
  if (from != id_.origin) {
    bump(violations, "vcbc_send_non_origin");
    return {};
  }
  if (payload.empty()) {
    bump(violations, "vcbc_send_empty_batch");
    return {};
  }
  if (payload_) {
    if (payload_->digest() != payload.digest()) {
      bump(violations, "vcbc_equivocating_send");
      return {};
    }
  } else {
    payload_ = payload;
  }
  if (sent_echo_) return {};
  sent_echo_ = true;

  Bytes tag = vcbc_signing_tag(id_, payload.digest());
  ProtocolMessage msg;
  msg.kind = MessageKind::VcbcEchoShare;
  msg.sender = self_;
  msg.origin = id_.origin;
  msg.priority = id_.priority;
  msg.body = VcbcEchoShareBody{tcrypto::sign_share(*key_, tag)};
  return {{id_.origin, std::move(msg)}};
}

std::vector<Outbound> VcbcInstance::on_echo_share(ReplicaId from,
                                                  const tcrypto::SignatureShare& share,
                                                  ViolationCounters& violations) {
  if (!is_sender() || !payload_) {
    bump(violations, "vcbc_unexpected_echo");
    return {};
  }
  Bytes tag = vcbc_signing_tag(id_, payload_->digest());
  if (!tcrypto::verify_share(*pk_, from, tag, share)) {
    bump(violations, "vcbc_invalid_echo_share");
    return {};
  }
  echo_shares_.emplace(from, share);
  if (sent_final_ || echo_shares_.size() < 2 * cfg_.f + 1) return {};
  sent_final_ = true;

  std::vector<tcrypto::SignatureShare> shares;
  shares.reserve(echo_shares_.size());
  for (const auto& [signer, s] : echo_shares_) shares.push_back(s);
  tcrypto::ThresholdSignature proof = tcrypto::combine(*pk_, tag, shares);

  ProtocolMessage msg;
  msg.kind = MessageKind::VcbcFinal;
  msg.sender = self_;
  msg.origin = id_.origin;
  msg.priority = id_.priority;
  msg.body = VcbcFinalBody{*payload_, proof};
  return {{std::nullopt, std::move(msg)}};
}

bool VcbcInstance::on_final(const VcbcFinalBody& m, ViolationCounters& violations) {
  if (delivered_) return false;
  Bytes tag = vcbc_signing_tag(id_, m.batch.digest());
  if (!tcrypto::verify(*pk_, tag, m.proof)) {
    bump(violations, "vcbc_invalid_proof");
    return false;
  }
  // A valid proof for a conflicting payload would need 2f+1 shares over
  // that digest; two such quorums intersect in a correct replica, so this
  // cannot happen unless the crypto broke.
  payload_ = m.batch;
  proof_ = m.proof;
  delivered_ = true;
  return true;
}

VcbcFinalBody VcbcInstance::make_verifiable_message() const {
  if (!delivered_) throw ProtocolViolation("verifiable message requested before delivery");
  return {*payload_, *proof_};
}

}  // namespace abft
