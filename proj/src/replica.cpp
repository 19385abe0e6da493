#include "abft/replica.hpp"

#include <stdexcept>
#include <utility>

namespace abft {

namespace {

constexpr std::uint8_t kKeyFormatTag = 1;

// Outer rounds well past our own are buffered up to this distance; honest
// replicas in simulation stay far closer, anything beyond is flood control.
constexpr std::uint64_t kRoundLookahead = 1 << 14;

void append(std::vector<Outbound>& dst, std::vector<Outbound>&& src) {
  for (auto& o : src) dst.push_back(std::move(o));
}

}  // namespace

KeyMaterial KeyMaterial::generate(const Config& cfg, std::uint64_t seed) {
  auto vcbc = tcrypto::deal(cfg.n, 2 * cfg.f + 1, seed);
  auto coin = tcrypto::deal(cfg.n, cfg.f + 1, seed ^ 0x9e3779b97f4a7c15ULL);
  return {std::move(vcbc.public_key), std::move(vcbc.shares), std::move(coin.public_key),
          std::move(coin.shares)};
}

Bytes KeyMaterial::encode() const {
  ByteWriter w;
  w.u8(kKeyFormatTag);
  w.raw(vcbc_pk.encode());
  w.u32(static_cast<std::uint32_t>(vcbc_shares.size()));
  for (const auto& s : vcbc_shares) {
    w.u32(s.signer);
    w.u64(s.secret);
  }
  w.raw(coin_pk.encode());
  w.u32(static_cast<std::uint32_t>(coin_shares.size()));
  for (const auto& s : coin_shares) {
    w.u32(s.signer);
    w.u64(s.secret);
  }
  return std::move(w).take();
}

KeyMaterial KeyMaterial::decode(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.u8() != kKeyFormatTag) throw ParseError("unknown key material format");
  KeyMaterial km;
  km.vcbc_pk = tcrypto::PublicKey::decode(r);
  std::uint32_t count = r.u32();
  if (count > 1024) throw ParseError("implausible share count");
  for (std::uint32_t i = 0; i < count; ++i) {
    tcrypto::KeyShare s;
    s.signer = r.u32();
    s.secret = r.u64();
    km.vcbc_shares.push_back(s);
  }
  km.coin_pk = tcrypto::PublicKey::decode(r);
  count = r.u32();
  if (count > 1024) throw ParseError("implausible share count");
  for (std::uint32_t i = 0; i < count; ++i) {
    tcrypto::KeyShare s;
    s.signer = r.u32();
    s.secret = r.u64();
    km.coin_shares.push_back(s);
  }
  r.expect_done();
  return km;
}

Replica::Replica(ReplicaId id, const Config& cfg, const KeyMaterial& keys,
                 ReplicaObserver* observer)
    : id_(id), cfg_(cfg), keys_(keys), observer_(observer) {
  if (!cfg.valid()) throw std::invalid_argument("invalid replica configuration");
  if (id >= cfg.n) throw std::invalid_argument("replica id out of range");
  if (keys_.vcbc_pk.n != cfg.n || keys_.vcbc_pk.t != 2 * cfg.f + 1 ||
      keys_.vcbc_shares.size() != cfg.n) {
    throw std::invalid_argument("broadcast key material does not match configuration");
  }
  if (keys_.coin_pk.n != cfg.n || keys_.coin_pk.t != cfg.f + 1 ||
      keys_.coin_shares.size() != cfg.n) {
    throw std::invalid_argument("coin key material does not match configuration");
  }
  queues_.reserve(cfg.n);
  for (ReplicaId q = 0; q < cfg.n; ++q) queues_.emplace_back(q);
}

ReplicaOutput Replica::start() {
  if (started_) throw ProtocolViolation("replica started twice");
  started_ = true;
  ReplicaOutput out;
  pump(out);
  return out;
}

ReplicaOutput Replica::handle(const ReplicaEvent& event) {
  if (!started_) throw ProtocolViolation("event before start");
  ReplicaOutput out;
  std::visit(
      [&](const auto& ev) {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, ClientSubmit>) {
          if (auto ready = bc::on_client_message(bc_, cfg_, ev.message, delivered_)) {
            start_broadcast(ready->first, std::move(ready->second), out);
          }
        } else if constexpr (std::is_same_v<T, Receive>) {
          handle_receive(ev, out);
        } else {
          if (auto ready = bc::flush(bc_)) {
            start_broadcast(ready->first, std::move(ready->second), out);
          }
        }
      },
      event);
  pump(out);
  retry_fill_requests(out);
  return out;
}

ReplicaOutput Replica::broadcast_api(Bytes payload) {
  if (payload.empty()) throw std::invalid_argument("empty payload");
  return handle(ClientSubmit{ClientMessage::from_payload(std::move(payload))});
}

VcbcInstance& Replica::vcbc_instance(const VcbcId& id) {
  auto it = vcbc_.find(id);
  if (it == vcbc_.end()) {
    it = vcbc_
             .emplace(id, VcbcInstance(id, id_, cfg_, keys_.vcbc_pk, keys_.vcbc_shares[id_]))
             .first;
  }
  return it->second;
}

void Replica::start_broadcast(std::uint64_t priority, Batch batch, ReplicaOutput& out) {
  append(out.outbound, vcbc_instance({id_, priority}).broadcast(batch));
}

void Replica::handle_receive(const Receive& event, ReplicaOutput& out) {
  ProtocolMessage msg;
  try {
    msg = decode(event.wire);
  } catch (const ParseError&) {
    ++violations_["wire_parse_error"];
    return;
  }
  if (msg.sender != event.from || msg.sender >= cfg_.n) {
    ++violations_["wire_sender_mismatch"];
    return;
  }

  switch (msg.kind) {
    case MessageKind::VcbcSend: {
      if (msg.origin >= cfg_.n) {
        ++violations_["vcbc_bad_instance"];
        return;
      }
      if (msg.sender != msg.origin) {
        ++violations_["vcbc_send_non_origin"];
        return;
      }
      auto& body = std::get<VcbcSendBody>(msg.body);
      append(out.outbound,
             vcbc_instance({msg.origin, msg.priority}).on_send(msg.sender, body.batch, violations_));
      return;
    }
    case MessageKind::VcbcEchoShare: {
      if (msg.origin != id_) {
        ++violations_["vcbc_echo_misdirected"];
        return;
      }
      auto& body = std::get<VcbcEchoShareBody>(msg.body);
      append(out.outbound,
             vcbc_instance({msg.origin, msg.priority})
                 .on_echo_share(msg.sender, body.share, violations_));
      return;
    }
    case MessageKind::VcbcFinal: {
      if (msg.origin >= cfg_.n) {
        ++violations_["vcbc_bad_instance"];
        return;
      }
      auto& body = std::get<VcbcFinalBody>(msg.body);
      VcbcId id{msg.origin, msg.priority};
      // Reject before instantiating: an unverifiable FINAL must not cost state.
      Bytes tag = vcbc_signing_tag(id, body.batch.digest());
      if (!tcrypto::verify(keys_.vcbc_pk, tag, body.proof)) {
        ++violations_["vcbc_invalid_proof"];
        return;
      }
      if (vcbc_instance(id).on_final(body, violations_)) handle_vcbc_delivery(id, out);
      return;
    }
    case MessageKind::AbaBval:
    case MessageKind::AbaAux:
    case MessageKind::AbaConf:
    case MessageKind::AbaCoinShare:
    case MessageKind::AbaFinish: {
      if (msg.round > ac_.round) {
        if (msg.round - ac_.round > kRoundLookahead) {
          ++violations_["aba_round_overflow"];
          return;
        }
        future_aba_[msg.round].emplace_back(msg.sender, std::move(msg.body));
        return;
      }
      auto it = aba_.find(msg.round);
      if (it == aba_.end()) return;
      append(out.outbound, it->second.handle(msg.sender, msg.body, violations_));
      return;
    }
    case MessageKind::FillGap: {
      auto& body = std::get<FillGapBody>(msg.body);
      if (msg.origin >= cfg_.n) {
        ++violations_["fillgap_bad_queue"];
        return;
      }
      if (!try_fill(msg.sender, msg.origin, body.slot, out)) {
        // Nothing provable yet; answer once our own copy arrives.
        fill_requests_[msg.sender] = {msg.origin, body.slot};
      }
      return;
    }
    case MessageKind::Filler:
      apply_filler(std::get<FillerBody>(msg.body), out);
      return;
  }
  ++violations_["wire_unknown_kind"];
}

void Replica::apply_filler(const FillerBody& filler, ReplicaOutput& out) {
  for (const FillerEntry& entry : filler.entries) {
    if (entry.id.origin >= cfg_.n) {
      ++violations_["filler_bad_instance"];
      continue;
    }
    Bytes tag = vcbc_signing_tag(entry.id, entry.final.batch.digest());
    if (!tcrypto::verify(keys_.vcbc_pk, tag, entry.final.proof)) {
      ++violations_["filler_invalid_proof"];
      continue;
    }
    if (vcbc_instance(entry.id).on_final(entry.final, violations_)) {
      handle_vcbc_delivery(entry.id, out);
    }
  }
}

bool Replica::try_fill(ReplicaId requester, ReplicaId queue, std::uint64_t slot,
                       ReplicaOutput& out) {
  auto lookup = [&](VcbcId vid) -> std::optional<VcbcFinalBody> {
    auto it = vcbc_.find(vid);
    if (it == vcbc_.end() || !it->second.delivered()) return std::nullopt;
    return it->second.make_verifiable_message();
  };
  auto filler = ac::on_fill_gap(queues_, queue, slot, lookup);
  if (!filler) return false;
  ProtocolMessage reply;
  reply.kind = MessageKind::Filler;
  reply.sender = id_;
  reply.origin = queue;
  reply.body = std::move(*filler);
  out.outbound.push_back({requester, std::move(reply)});
  return true;
}

void Replica::retry_fill_requests(ReplicaOutput& out) {
  for (auto it = fill_requests_.begin(); it != fill_requests_.end();) {
    if (try_fill(it->first, it->second.first, it->second.second, out)) {
      it = fill_requests_.erase(it);
    } else {
      ++it;
    }
  }
}

void Replica::handle_vcbc_delivery(const VcbcId& id, ReplicaOutput& out) {
  const Batch& batch = vcbc_.at(id).payload();
  if (observer_) observer_->on_vcbc_delivered(id_, id, batch.digest());
  bc::on_vcbc_output(queues_[id.origin], id.priority, batch, delivered_);
  (void)out;
}

void Replica::do_deliver(const Batch& value, ReplicaOutput& out) {
  ReplicaId q = queue_map(ac_.round, cfg_.n);
  if (observer_) {
    observer_->on_batch_delivered(id_, ac_.round, q, queues_[q].head(), value.digest());
  }
  auto outputs = ac::deliver(queues_, delivered_, value);
  for (auto& m : outputs) {
    output_stream_.push_back(m);
    out.delivered.push_back(std::move(m));
  }
  ac::finish_round(ac_);
}

void Replica::pump(ReplicaOutput& out) {
  while (true) {
    switch (ac_.phase) {
      case ac::Phase::Proposing: {
        ReplicaId q = queue_map(ac_.round, cfg_.n);
        std::uint8_t bit = ac::begin_round(ac_, queues_, delivered_);
        if (observer_) {
          std::optional<Digest> head_digest;
          if (auto head = queues_[q].peek()) head_digest = head->digest();
          observer_->on_round_entry(id_, ac_.round, q, queues_[q].head(), bit, head_digest,
                                    delivered_set_digest());
        }
        auto it = aba_
                      .emplace(ac_.round, AbaInstance(ac_.round, id_, cfg_, keys_.coin_pk,
                                                      keys_.coin_shares[id_]))
                      .first;
        append(out.outbound, it->second.propose(bit, violations_));
        if (auto fit = future_aba_.find(ac_.round); fit != future_aba_.end()) {
          auto pending = std::move(fit->second);
          future_aba_.erase(fit);
          for (auto& [from, body] : pending) {
            append(out.outbound, it->second.handle(from, body, violations_));
          }
        }
        break;
      }
      case ac::Phase::AwaitingAba: {
        AbaInstance& inst = aba_.at(ac_.round);
        if (!inst.decision()) return;
        AbaDecision dec = *inst.decision();
        if (observer_) {
          observer_->on_aba_decided(id_, ac_.round, dec.value, dec.decided_round + 1);
        }
        auto action = ac::on_aba_decision(ac_, queues_, delivered_, dec.value);
        if (std::holds_alternative<ac::Advance>(action)) break;
        if (auto* d = std::get_if<ac::Deliver>(&action)) {
          do_deliver(d->value, out);
          break;
        }
        auto& rf = std::get<ac::RequestFill>(action);
        ProtocolMessage msg;
        msg.kind = MessageKind::FillGap;
        msg.sender = id_;
        msg.origin = rf.queue;
        msg.body = FillGapBody{rf.slot};
        out.outbound.push_back({std::nullopt, std::move(msg)});
        return;
      }
      case ac::Phase::AwaitingValue: {
        auto value = ac::recheck_awaited_value(ac_, queues_, delivered_);
        if (!value) return;
        do_deliver(*value, out);
        break;
      }
    }
  }
}

Digest Replica::delivered_set_digest() const {
  Sha256 h;
  for (const Digest& d : delivered_) h.update(d.bytes);
  return h.finish();
}

}  // namespace abft
