#include "abft/simnet.hpp"

#include <algorithm>
#include <cstring>

namespace abft::sim {

bool payload_is_invalid_marked(const Bytes& payload) {
  return payload.size() >= kInvalidPayloadMarker.size() &&
         std::equal(kInvalidPayloadMarker.begin(), kInvalidPayloadMarker.end(), payload.begin());
}

Bytes mark_payload_invalid(Bytes payload) {
  Bytes marked(kInvalidPayloadMarker.begin(), kInvalidPayloadMarker.end());
  marked.insert(marked.end(), payload.begin(), payload.end());
  return marked;
}

Simulator::Simulator(SimConfig sim, std::vector<Injection> injections)
    : sim_(std::move(sim)), injections_(std::move(injections)), rng_(sim_.seed) {
  const Config& cfg = sim_.cfg;
  if (!cfg.valid()) throw std::invalid_argument("invalid simulation configuration");
  if (sim_.adversary_delay == 0) sim_.adversary_delay = 64ULL * cfg.n;
  if (sim_.fairness_debt_cap == 0) sim_.fairness_debt_cap = 64ULL * cfg.n * cfg.n;

  fault_kind_.assign(cfg.n, FaultKind::None);
  fault_param_.assign(cfg.n, 0);
  for (const FaultAssignment& fa : sim_.faults) {
    if (fa.replica >= cfg.n) throw std::invalid_argument("fault assignment out of range");
    fault_kind_[fa.replica] = fa.kind;
    fault_param_[fa.replica] = fa.param;
  }

  std::stable_sort(injections_.begin(), injections_.end(),
                   [](const Injection& a, const Injection& b) { return a.step < b.step; });
  trace_.sim = sim_;
  trace_.injections = injections_;  // pre-rewrite workload, replay re-derives the rest

  for (Injection& inj : injections_) {
    if (fault_of(inj.replica) == FaultKind::ByzantineInvalidProposer) {
      inj.payload = mark_payload_invalid(std::move(inj.payload));
    }
  }
  for (const Injection& inj : injections_) {
    FaultKind k = fault_of(inj.replica);
    if (k == FaultKind::None || k == FaultKind::ByzantineInvalidProposer) {
      goal_payloads_.insert(sha256(inj.payload));
    }
  }

  keys_ = KeyMaterial::generate(cfg, sim_.key_seed);
  output_seen_.resize(cfg.n);
  trace_.sent_by_replica.assign(cfg.n, 0);
  replicas_.reserve(cfg.n);
  for (ReplicaId r = 0; r < cfg.n; ++r) {
    replicas_.push_back(
        std::make_unique<Replica>(r, cfg, keys_, static_cast<ReplicaObserver*>(this)));
  }
}

FaultKind Simulator::fault_of(ReplicaId r) const { return fault_kind_[r]; }

bool Simulator::is_correct(ReplicaId r) const { return fault_kind_[r] == FaultKind::None; }

bool Simulator::is_receiving(ReplicaId r) const {
  if (fault_kind_[r] == FaultKind::Crash) return step_ < fault_param_[r];
  return true;
}

void Simulator::on_round_entry(ReplicaId replica, std::uint64_t round, ReplicaId queue,
                               std::uint64_t head, std::uint8_t proposal,
                               const std::optional<Digest>& head_digest,
                               const Digest& delivered_digest) {
  RoundEntryRecord rec{replica, round,       queue,
                       head,    proposal,    head_digest.has_value(),
                       head_digest.value_or(Digest{}), delivered_digest, step_};
  trace_.rounds.push_back(rec);
}

void Simulator::on_aba_decided(ReplicaId replica, std::uint64_t round, std::uint8_t value,
                               std::uint32_t internal_rounds) {
  trace_.aba_decisions.push_back({replica, round, value, internal_rounds, step_});
}

void Simulator::on_vcbc_delivered(ReplicaId replica, const VcbcId& id, const Digest& batch) {
  trace_.vcbc_delivers.push_back({replica, id.origin, id.priority, batch, step_});
}

void Simulator::on_batch_delivered(ReplicaId replica, std::uint64_t round, ReplicaId queue,
                                   std::uint64_t priority, const Digest& batch) {
  trace_.deliveries.push_back({replica, round, queue, priority, batch, step_});
}

void Simulator::push_pending(ReplicaId src, ReplicaId dst, MessageKind kind, ReplicaId origin,
                             Bytes wire) {
  trace_.messages_sent += 1;
  trace_.bytes_sent += wire.size();
  trace_.sent_by_kind[static_cast<std::size_t>(kind)] += 1;
  trace_.sent_by_replica[src] += 1;
  pending_.push_back({next_seq_++, step_, src, dst, kind, origin, std::move(wire)});
}

void Simulator::enqueue_wire(ReplicaId src, ReplicaId dst, const ProtocolMessage& msg) {
  if (msg.kind == MessageKind::VcbcSend || msg.kind == MessageKind::VcbcEchoShare ||
      msg.kind == MessageKind::VcbcFinal) {
    ++vcbc_per_instance_[VcbcId{msg.origin, msg.priority}];
  }
  Bytes wire;
  if (fault_of(src) == FaultKind::ByzantineFuzzer) {
    wire = fuzz_wire(msg);
  } else {
    wire = encode(msg);
  }
  push_pending(src, dst, msg.kind, msg.origin, std::move(wire));
}

void Simulator::enqueue_outbound(ReplicaId src, const std::vector<Outbound>& outbound) {
  FaultKind fk = fault_of(src);
  if (fk == FaultKind::ByzantineSilent) return;
  if (fk == FaultKind::Crash && step_ >= fault_param_[src]) return;
  for (const Outbound& o : outbound) {
    if (o.dst) {
      enqueue_wire(src, *o.dst, o.msg);
      continue;
    }
    for (ReplicaId dst = 0; dst < sim_.cfg.n; ++dst) {
      if (fk == FaultKind::ByzantineEquivocator && o.msg.kind == MessageKind::VcbcSend &&
          dst >= sim_.cfg.n / 2) {
        enqueue_wire(src, dst, equivocate(o.msg, dst));
      } else {
        enqueue_wire(src, dst, o.msg);
      }
    }
  }
}

ProtocolMessage Simulator::equivocate(const ProtocolMessage& msg, ReplicaId dst) {
  const auto& body = std::get<VcbcSendBody>(msg.body);
  std::vector<ClientMessage> entries = body.batch.entries();
  if (!entries.empty()) {
    Bytes payload = entries[0].payload;
    payload.push_back(static_cast<std::uint8_t>(0xE0 + (dst & 0x0F)));
    entries[0] = ClientMessage::from_payload(std::move(payload));
  }
  ProtocolMessage twisted = msg;
  twisted.body = VcbcSendBody{Batch(std::move(entries))};
  return twisted;
}

Bytes Simulator::fuzz_wire(const ProtocolMessage& msg) {
  switch (rng_() % 4) {
    case 0:
      return encode(msg);  // pass through, instance may even complete
    case 1: {  // envelope mutation, wire stays structurally valid
      ProtocolMessage m = msg;
      switch (rng_() % 4) {
        case 0: m.sender = static_cast<ReplicaId>(rng_() % (sim_.cfg.n + 2)); break;
        case 1: m.round += rng_() % 5; break;
        case 2: m.priority = rng_(); break;
        default: m.origin = static_cast<ReplicaId>(rng_() % (sim_.cfg.n + 2)); break;
      }
      return encode(m);
    }
    case 2: {  // body mutation
      ProtocolMessage m = msg;
      if (auto* bval = std::get_if<AbaBvalBody>(&m.body)) {
        bval->bit ^= 1;
      } else if (auto* aux = std::get_if<AbaAuxBody>(&m.body)) {
        aux->internal_round += static_cast<std::uint32_t>(rng_() % 3);
      } else if (auto* share = std::get_if<VcbcEchoShareBody>(&m.body)) {
        share->share.value ^= rng_();
      } else if (auto* fin = std::get_if<VcbcFinalBody>(&m.body)) {
        fin->proof.value ^= rng_();
      } else {
        m.sender = static_cast<ReplicaId>(rng_());
      }
      return encode(m);
    }
    default: {  // raw byte corruption
      Bytes wire = encode(msg);
      if (wire.empty()) return wire;
      std::size_t flips = 1 + rng_() % 8;
      for (std::size_t i = 0; i < flips; ++i) {
        wire[rng_() % wire.size()] ^= static_cast<std::uint8_t>(1 + rng_() % 255);
      }
      if (rng_() % 4 == 0) wire.resize(rng_() % (wire.size() + 1));
      return wire;
    }
  }
}

void Simulator::apply_outputs(ReplicaId r, ReplicaOutput&& out) {
  for (const ClientMessage& m : out.delivered) {
    trace_.outputs.push_back({r, m.id, !payload_is_invalid_marked(m.payload), step_});
    if (goal_payloads_.contains(m.id)) output_seen_[r].insert(m.id);
  }
  enqueue_outbound(r, out.outbound);
}

void Simulator::inject_due() {
  while (next_injection_ < injections_.size() && injections_[next_injection_].step <= step_) {
    const Injection& inj = injections_[next_injection_++];
    if (is_receiving(inj.replica)) {
      std::uint8_t tag = 0xF1;
      digest_.update({&tag, 1});
      digest_.update(inj.payload);
      apply_outputs(inj.replica,
                    replicas_[inj.replica]->handle(
                        ClientSubmit{ClientMessage::from_payload(inj.payload)}));
    }
  }
  if (next_injection_ == injections_.size() && !flushed_ && sim_.flush_partial_batches) {
    flushed_ = true;
    for (ReplicaId r = 0; r < sim_.cfg.n; ++r) {
      if (is_receiving(r)) apply_outputs(r, replicas_[r]->handle(HarnessFlush{}));
    }
  }
}

std::size_t Simulator::pick_next() {
  // Debt backstop keeps every schedule eventually-fair: the oldest message
  // wins outright once it exceeds the cap.
  std::size_t oldest = 0;
  for (std::size_t i = 1; i < pending_.size(); ++i) {
    if (pending_[i].seq < pending_[oldest].seq) oldest = i;
  }
  if (step_ - pending_[oldest].enqueued > sim_.fairness_debt_cap) return oldest;

  switch (sim_.scheduler) {
    case SchedulerKind::FairRandom:
      return std::uniform_int_distribution<std::size_t>(0, pending_.size() - 1)(rng_);
    case SchedulerKind::FifoPerLink: {
      std::map<std::pair<ReplicaId, ReplicaId>, std::size_t> heads;
      for (std::size_t i = 0; i < pending_.size(); ++i) {
        auto key = std::make_pair(pending_[i].src, pending_[i].dst);
        auto it = heads.find(key);
        if (it == heads.end() || pending_[i].seq < pending_[it->second].seq) heads[key] = i;
      }
      std::size_t pick = std::uniform_int_distribution<std::size_t>(0, heads.size() - 1)(rng_);
      auto it = heads.begin();
      std::advance(it, static_cast<long>(pick));
      return it->second;
    }
    case SchedulerKind::AdversarialVcbcDelay: {
      std::vector<std::size_t> eligible;
      eligible.reserve(pending_.size());
      for (std::size_t i = 0; i < pending_.size(); ++i) {
        const Pending& p = pending_[i];
        bool attacked = (p.kind == MessageKind::VcbcSend || p.kind == MessageKind::VcbcFinal ||
                         p.kind == MessageKind::Filler) &&
                        p.origin == 0;
        if (!attacked || step_ - p.enqueued >= sim_.adversary_delay) eligible.push_back(i);
      }
      if (eligible.empty()) return oldest;
      std::size_t pick =
          std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng_);
      return eligible[pick];
    }
  }
  return oldest;
}

void Simulator::deliver(std::size_t index) {
  Pending p = std::move(pending_[index]);
  pending_[index] = std::move(pending_.back());
  pending_.pop_back();
  if (!is_receiving(p.dst)) return;

  ByteWriter w;
  w.u64(step_);
  w.u32(p.src);
  w.u32(p.dst);
  Bytes header = std::move(w).take();
  digest_.update(header);
  digest_.update(p.wire);

  apply_outputs(p.dst, replicas_[p.dst]->handle(Receive{p.src, std::move(p.wire)}));
  ++step_;
}

bool Simulator::goal_reached() const {
  for (ReplicaId r = 0; r < sim_.cfg.n; ++r) {
    if (!is_correct(r)) continue;
    if (output_seen_[r].size() != goal_payloads_.size()) return false;
  }
  return true;
}

Trace Simulator::run() {
  for (ReplicaId r = 0; r < sim_.cfg.n; ++r) {
    ReplicaOutput out = replicas_[r]->start();
    if (is_receiving(r)) apply_outputs(r, std::move(out));
  }
  while (step_ < sim_.max_steps) {
    inject_due();
    if (goal_reached()) {
      trace_.goal_reached = true;
      break;
    }
    if (pending_.empty()) {
      if (next_injection_ < injections_.size()) {
        step_ = injections_[next_injection_].step;
        continue;
      }
      break;  // quiescent without reaching the goal
    }
    deliver(pick_next());
  }
  if (!trace_.goal_reached) trace_.goal_reached = goal_reached();

  trace_.steps = step_;
  trace_.trace_digest = digest_.finish();
  for (ReplicaId r = 0; r < sim_.cfg.n; ++r) {
    for (const auto& [key, count] : replicas_[r]->violations()) {
      trace_.violations[key] += count;
    }
  }
  return trace_;
}

}  // namespace abft::sim
