#include "abft/aba.hpp"

namespace abft {

AbaInstance::AbaInstance(std::uint64_t round, ReplicaId self, const Config& cfg,
                         const tcrypto::PublicKey& coin_pk, const tcrypto::KeyShare& coin_key)
    : round_(round), self_(self), cfg_(cfg), coin_pk_(&coin_pk), coin_key_(&coin_key) {}

ProtocolMessage AbaInstance::make(MessageKind kind, MessageBody body) const {
  ProtocolMessage msg;
  msg.kind = kind;
  msg.sender = self_;
  msg.round = round_;
  msg.body = std::move(body);
  return msg;
}

std::vector<Outbound> AbaInstance::propose(std::uint8_t bit, ViolationCounters& violations) {
  if (bit > 1) throw ProtocolViolation("ABA proposal outside {0,1}");
  if (proposed_ || decision_) throw ProtocolViolation("ABA double propose");
  proposed_ = true;
  estimate_ = bit;
  std::vector<Outbound> out;
  rs().sent_bval[bit] = true;
  out.push_back({std::nullopt, make(MessageKind::AbaBval, AbaBvalBody{0, bit})});
  replay_buffered(out, violations);
  return out;
}

std::vector<Outbound> AbaInstance::handle(ReplicaId from, const MessageBody& body,
                                          ViolationCounters& violations) {
  std::vector<Outbound> out;
  if (halted_) return out;

  if (const auto* finish = std::get_if<AbaFinishBody>(&body)) {
    on_finish(from, finish->bit, out, violations);
    return out;
  }

  std::uint32_t msg_round = std::visit(
      [](const auto& b) -> std::uint32_t {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, AbaBvalBody> || std::is_same_v<T, AbaAuxBody> ||
                      std::is_same_v<T, AbaConfBody> || std::is_same_v<T, AbaCoinShareBody>) {
          return b.internal_round;
        } else {
          return 0;
        }
      },
      body);

  if (!proposed_ || msg_round > current_) {
    if (msg_round > current_ + kLookaheadRounds) {
      ++violations["aba_lookahead_overflow"];
    } else {
      buffered_[msg_round].push_back({from, body});
    }
    return out;
  }
  if (msg_round < current_) return out;  // round already resolved locally

  if (const auto* bval = std::get_if<AbaBvalBody>(&body)) {
    on_bval(from, bval->bit, out, violations);
  } else if (const auto* aux = std::get_if<AbaAuxBody>(&body)) {
    on_aux(from, aux->bit, out, violations);
  } else if (const auto* conf = std::get_if<AbaConfBody>(&body)) {
    on_conf(from, conf->bits, out, violations);
  } else if (const auto* coin = std::get_if<AbaCoinShareBody>(&body)) {
    on_coin_share(from, coin->share, out, violations);
  } else {
    ++violations["aba_foreign_body"];
  }
  return out;
}

void AbaInstance::on_bval(ReplicaId from, std::uint8_t bit, std::vector<Outbound>& out,
                          ViolationCounters& violations) {
  if (bit > 1) {
    ++violations["aba_bval_domain"];
    return;
  }
  rs().bval_senders[bit].insert(from);
  run_gates(out, violations);
}

void AbaInstance::on_aux(ReplicaId from, std::uint8_t bit, std::vector<Outbound>& out,
                         ViolationCounters& violations) {
  if (bit > 1) {
    ++violations["aba_aux_domain"];
    return;
  }
  rs().aux.emplace(from, bit);  // first value per sender wins
  run_gates(out, violations);
}

void AbaInstance::on_conf(ReplicaId from, std::uint8_t mask, std::vector<Outbound>& out,
                          ViolationCounters& violations) {
  if (mask == 0 || mask > 3) {
    ++violations["aba_conf_malformed"];
    return;
  }
  rs().conf.emplace(from, mask);
  run_gates(out, violations);
}

void AbaInstance::on_coin_share(ReplicaId from, const tcrypto::SignatureShare& share,
                                std::vector<Outbound>& out, ViolationCounters& violations) {
  RoundState& r = rs();
  Bytes name = tcrypto::coin_name(round_, current_);
  if (!tcrypto::verify_share(*coin_pk_, from, name, share)) {
    ++violations["aba_invalid_coin_share"];
    return;
  }
  r.coin_shares.emplace(from, share);
  if (!r.coin && r.coin_shares.size() >= cfg_.f + 1) {
    std::vector<tcrypto::SignatureShare> shares;
    for (const auto& [signer, s] : r.coin_shares) shares.push_back(s);
    r.coin = tcrypto::coin_bit(tcrypto::combine(*coin_pk_, name, shares));
  }
  maybe_resolve(out, violations);
}

void AbaInstance::on_finish(ReplicaId from, std::uint8_t bit, std::vector<Outbound>& out,
                            ViolationCounters& violations) {
  if (bit > 1) {
    ++violations["aba_finish_domain"];
    return;
  }
  if (finish_senders_[1 - bit].contains(from)) {
    ++violations["aba_finish_equivocation"];
    return;
  }
  finish_senders_[bit].insert(from);
  if (finish_senders_[bit].size() >= cfg_.f + 1 && !sent_finish_) {
    sent_finish_ = true;
    out.push_back({std::nullopt, make(MessageKind::AbaFinish, AbaFinishBody{bit})});
  }
  if (finish_senders_[bit].size() >= 2 * cfg_.f + 1) {
    if (!decision_) decision_ = AbaDecision{bit, current_};
    halted_ = true;
  }
}

void AbaInstance::run_gates(std::vector<Outbound>& out, ViolationCounters& violations) {
  RoundState& r = rs();
  std::uint32_t quorum = cfg_.n - cfg_.f;

  for (std::uint8_t bit = 0; bit <= 1; ++bit) {
    std::size_t count = r.bval_senders[bit].size();
    if (count >= cfg_.f + 1 && !r.sent_bval[bit]) {
      r.sent_bval[bit] = true;
      out.push_back({std::nullopt, make(MessageKind::AbaBval, AbaBvalBody{current_, bit})});
    }
    if (count >= 2 * cfg_.f + 1 && !(r.bin_values & (1u << bit))) {
      r.bin_values |= (1u << bit);
      if (!r.sent_aux) {
        r.sent_aux = true;
        out.push_back({std::nullopt, make(MessageKind::AbaAux, AbaAuxBody{current_, bit})});
      }
    }
  }

  if (r.bin_values != 0 && !r.sent_conf) {
    std::size_t supporting = 0;
    for (const auto& [sender, bit] : r.aux) {
      if (r.bin_values & (1u << bit)) ++supporting;
    }
    if (supporting >= quorum) {
      r.sent_conf = true;
      out.push_back({std::nullopt, make(MessageKind::AbaConf, AbaConfBody{current_, r.bin_values})});
    }
  }

  // Gates are strictly ordered: the coin share is revealed only after our
  // own CONF is out. Skipping ahead on other replicas' CONFs can leave a
  // peer one CONF short forever once we advance past this round.
  if (r.sent_conf && !r.sent_coin_share) {
    std::size_t supporting = 0;
    std::uint8_t value_union = 0;
    for (const auto& [sender, mask] : r.conf) {
      if ((mask & ~r.bin_values) == 0) {
        ++supporting;
        value_union |= mask;
      }
    }
    if (supporting >= quorum) {
      r.sent_coin_share = true;
      r.conf_union = value_union;
      Bytes name = tcrypto::coin_name(round_, current_);
      out.push_back({std::nullopt, make(MessageKind::AbaCoinShare,
                                        AbaCoinShareBody{current_,
                                                         tcrypto::sign_share(*coin_key_, name)})});
    }
  }

  maybe_resolve(out, violations);
}

void AbaInstance::maybe_resolve(std::vector<Outbound>& out, ViolationCounters& violations) {
  RoundState& r = rs();
  if (r.resolved || !r.coin || !r.sent_coin_share) return;
  r.resolved = true;

  int coin = *r.coin;
  if (r.conf_union == 3) {
    estimate_ = static_cast<std::uint8_t>(coin);
  } else {
    std::uint8_t bit = r.conf_union == 2 ? 1 : 0;
    estimate_ = bit;
    if (bit == coin) decide(bit, out);
  }
  advance_round(out, violations);
}

void AbaInstance::decide(std::uint8_t bit, std::vector<Outbound>& out) {
  if (!decision_) decision_ = AbaDecision{bit, current_};
  if (!sent_finish_) {
    sent_finish_ = true;
    out.push_back({std::nullopt, make(MessageKind::AbaFinish, AbaFinishBody{bit})});
  }
}

void AbaInstance::advance_round(std::vector<Outbound>& out, ViolationCounters& violations) {
  rounds_.erase(current_);
  ++current_;
  rs().sent_bval[estimate_] = true;
  out.push_back({std::nullopt, make(MessageKind::AbaBval, AbaBvalBody{current_, estimate_})});
  replay_buffered(out, violations);
}

void AbaInstance::replay_buffered(std::vector<Outbound>& out, ViolationCounters& violations) {
  auto it = buffered_.find(current_);
  if (it == buffered_.end()) return;
  auto pending = std::move(it->second);
  buffered_.erase(it);
  for (auto& [from, body] : pending) {
    if (halted_) return;
    std::uint32_t at_entry = current_;
    auto more = handle(from, body, violations);
    out.insert(out.end(), more.begin(), more.end());
    // handle() may advance the round and already replay deeper buffers
    if (current_ != at_entry) return;
  }
}

}  // namespace abft
