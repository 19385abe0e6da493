#include "abft/trace.hpp"

#include <stdexcept>

#include <json.hpp>

namespace abft::sim {

using nlohmann::json;

const char* scheduler_name(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::FairRandom: return "fair-random";
    case SchedulerKind::FifoPerLink: return "fifo-per-link";
    case SchedulerKind::AdversarialVcbcDelay: return "adversarial-vcbc-delay";
  }
  return "unknown";
}

const char* fault_name(FaultKind k) {
  switch (k) {
    case FaultKind::None: return "none";
    case FaultKind::Crash: return "crash";
    case FaultKind::ByzantineSilent: return "byzantine-silent";
    case FaultKind::ByzantineInvalidProposer: return "byzantine-invalid-proposer";
    case FaultKind::ByzantineEquivocator: return "byzantine-equivocator";
    case FaultKind::ByzantineFuzzer: return "byzantine-fuzzer";
  }
  return "unknown";
}

std::optional<SchedulerKind> scheduler_from_name(const std::string& s) {
  for (SchedulerKind k : {SchedulerKind::FairRandom, SchedulerKind::FifoPerLink,
                          SchedulerKind::AdversarialVcbcDelay}) {
    if (s == scheduler_name(k)) return k;
  }
  return std::nullopt;
}

std::optional<FaultKind> fault_from_name(const std::string& s) {
  for (FaultKind k : {FaultKind::None, FaultKind::Crash, FaultKind::ByzantineSilent,
                      FaultKind::ByzantineInvalidProposer, FaultKind::ByzantineEquivocator,
                      FaultKind::ByzantineFuzzer}) {
    if (s == fault_name(k)) return k;
  }
  return std::nullopt;
}

namespace {

std::string to_hex(std::span<const std::uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0F]);
  }
  return out;
}

std::uint8_t nibble(char c) {
  if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
  if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
  if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
  throw std::runtime_error("bad hex digit in trace");
}

Bytes from_hex(const std::string& s) {
  if (s.size() % 2 != 0) throw std::runtime_error("odd hex length in trace");
  Bytes out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((nibble(s[2 * i]) << 4) | nibble(s[2 * i + 1]));
  }
  return out;
}

json digest_json(const Digest& d) { return to_hex(d.bytes); }

Digest digest_from(const json& j) {
  Bytes raw = from_hex(j.get<std::string>());
  if (raw.size() != 32) throw std::runtime_error("bad digest length in trace");
  Digest d;
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

}  // namespace

std::string Trace::to_json() const {
  json j;
  j["format"] = 1;
  json cfg;
  cfg["n"] = sim.cfg.n;
  cfg["f"] = sim.cfg.f;
  cfg["batch_size"] = sim.cfg.batch_size;
  cfg["tx_size"] = sim.cfg.tx_size;
  j["config"] = cfg;
  j["scheduler"] = scheduler_name(sim.scheduler);
  j["seed"] = sim.seed;
  j["key_seed"] = sim.key_seed;
  j["max_steps"] = sim.max_steps;
  j["adversary_delay"] = sim.adversary_delay;
  j["fairness_debt_cap"] = sim.fairness_debt_cap;
  j["flush_partial_batches"] = sim.flush_partial_batches;
  j["faults"] = json::array();
  for (const auto& fa : sim.faults) {
    j["faults"].push_back({{"replica", fa.replica}, {"kind", fault_name(fa.kind)},
                           {"param", fa.param}});
  }
  j["injections"] = json::array();
  for (const auto& inj : injections) {
    j["injections"].push_back(
        {{"replica", inj.replica}, {"step", inj.step}, {"payload", to_hex(inj.payload)}});
  }
  j["rounds"] = json::array();
  for (const auto& r : rounds) {
    j["rounds"].push_back({{"replica", r.replica},
                           {"round", r.round},
                           {"queue", r.queue},
                           {"head_priority", r.head_priority},
                           {"proposal", r.proposal},
                           {"has_head", r.has_head},
                           {"head_digest", digest_json(r.head_digest)},
                           {"delivered_digest", digest_json(r.delivered_digest)},
                           {"step", r.step}});
  }
  j["aba_decisions"] = json::array();
  for (const auto& d : aba_decisions) {
    j["aba_decisions"].push_back({{"replica", d.replica},
                                  {"round", d.round},
                                  {"value", d.value},
                                  {"internal_rounds", d.internal_rounds},
                                  {"step", d.step}});
  }
  j["vcbc_delivers"] = json::array();
  for (const auto& v : vcbc_delivers) {
    j["vcbc_delivers"].push_back({{"replica", v.replica},
                                  {"origin", v.origin},
                                  {"priority", v.priority},
                                  {"batch", digest_json(v.batch)},
                                  {"step", v.step}});
  }
  j["deliveries"] = json::array();
  for (const auto& d : deliveries) {
    j["deliveries"].push_back({{"replica", d.replica},
                               {"round", d.round},
                               {"queue", d.queue},
                               {"priority", d.priority},
                               {"batch", digest_json(d.batch)},
                               {"step", d.step}});
  }
  j["outputs"] = json::array();
  for (const auto& o : outputs) {
    j["outputs"].push_back({{"replica", o.replica},
                            {"message", digest_json(o.message)},
                            {"valid", o.valid},
                            {"step", o.step}});
  }
  j["steps"] = steps;
  j["goal_reached"] = goal_reached;
  j["messages_sent"] = messages_sent;
  j["bytes_sent"] = bytes_sent;
  j["sent_by_kind"] = sent_by_kind;
  j["sent_by_replica"] = sent_by_replica;
  j["violations"] = violations;
  j["trace_digest"] = digest_json(trace_digest);
  return j.dump(2);
}

Trace Trace::from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.at("format").get<int>() != 1) throw std::runtime_error("unknown trace format");
  Trace t;
  const json& cfg = j.at("config");
  t.sim.cfg.n = cfg.at("n").get<std::uint32_t>();
  t.sim.cfg.f = cfg.at("f").get<std::uint32_t>();
  t.sim.cfg.batch_size = cfg.at("batch_size").get<std::uint32_t>();
  t.sim.cfg.tx_size = cfg.at("tx_size").get<std::uint32_t>();
  auto sched = scheduler_from_name(j.at("scheduler").get<std::string>());
  if (!sched) throw std::runtime_error("unknown scheduler in trace");
  t.sim.scheduler = *sched;
  t.sim.seed = j.at("seed").get<std::uint64_t>();
  t.sim.key_seed = j.at("key_seed").get<std::uint64_t>();
  t.sim.max_steps = j.at("max_steps").get<std::uint64_t>();
  t.sim.adversary_delay = j.at("adversary_delay").get<std::uint64_t>();
  t.sim.fairness_debt_cap = j.at("fairness_debt_cap").get<std::uint64_t>();
  t.sim.flush_partial_batches = j.at("flush_partial_batches").get<bool>();
  for (const json& f : j.at("faults")) {
    FaultAssignment fa;
    fa.replica = f.at("replica").get<ReplicaId>();
    auto kind = fault_from_name(f.at("kind").get<std::string>());
    if (!kind) throw std::runtime_error("unknown fault kind in trace");
    fa.kind = *kind;
    fa.param = f.at("param").get<std::uint64_t>();
    t.sim.faults.push_back(fa);
  }
  for (const json& i : j.at("injections")) {
    Injection inj;
    inj.replica = i.at("replica").get<ReplicaId>();
    inj.step = i.at("step").get<std::uint64_t>();
    inj.payload = from_hex(i.at("payload").get<std::string>());
    t.injections.push_back(std::move(inj));
  }
  for (const json& r : j.at("rounds")) {
    RoundEntryRecord rec;
    rec.replica = r.at("replica").get<ReplicaId>();
    rec.round = r.at("round").get<std::uint64_t>();
    rec.queue = r.at("queue").get<ReplicaId>();
    rec.head_priority = r.at("head_priority").get<std::uint64_t>();
    rec.proposal = r.at("proposal").get<std::uint8_t>();
    rec.has_head = r.at("has_head").get<bool>();
    rec.head_digest = digest_from(r.at("head_digest"));
    rec.delivered_digest = digest_from(r.at("delivered_digest"));
    rec.step = r.at("step").get<std::uint64_t>();
    t.rounds.push_back(rec);
  }
  for (const json& d : j.at("aba_decisions")) {
    AbaDecisionRecord rec;
    rec.replica = d.at("replica").get<ReplicaId>();
    rec.round = d.at("round").get<std::uint64_t>();
    rec.value = d.at("value").get<std::uint8_t>();
    rec.internal_rounds = d.at("internal_rounds").get<std::uint32_t>();
    rec.step = d.at("step").get<std::uint64_t>();
    t.aba_decisions.push_back(rec);
  }
  for (const json& v : j.at("vcbc_delivers")) {
    VcbcDeliverRecord rec;
    rec.replica = v.at("replica").get<ReplicaId>();
    rec.origin = v.at("origin").get<ReplicaId>();
    rec.priority = v.at("priority").get<std::uint64_t>();
    rec.batch = digest_from(v.at("batch"));
    rec.step = v.at("step").get<std::uint64_t>();
    t.vcbc_delivers.push_back(rec);
  }
  for (const json& d : j.at("deliveries")) {
    DeliveryRecord rec;
    rec.replica = d.at("replica").get<ReplicaId>();
    rec.round = d.at("round").get<std::uint64_t>();
    rec.queue = d.at("queue").get<ReplicaId>();
    rec.priority = d.at("priority").get<std::uint64_t>();
    rec.batch = digest_from(d.at("batch"));
    rec.step = d.at("step").get<std::uint64_t>();
    t.deliveries.push_back(rec);
  }
  for (const json& o : j.at("outputs")) {
    OutputRecord rec;
    rec.replica = o.at("replica").get<ReplicaId>();
    rec.message = digest_from(o.at("message"));
    rec.valid = o.at("valid").get<bool>();
    rec.step = o.at("step").get<std::uint64_t>();
    t.outputs.push_back(rec);
  }
  t.steps = j.at("steps").get<std::uint64_t>();
  t.goal_reached = j.at("goal_reached").get<bool>();
  t.messages_sent = j.at("messages_sent").get<std::uint64_t>();
  t.bytes_sent = j.at("bytes_sent").get<std::uint64_t>();
  auto kinds = j.at("sent_by_kind").get<std::vector<std::uint64_t>>();
  if (kinds.size() != t.sent_by_kind.size()) throw std::runtime_error("bad kind counts in trace");
  std::copy(kinds.begin(), kinds.end(), t.sent_by_kind.begin());
  t.sent_by_replica = j.at("sent_by_replica").get<std::vector<std::uint64_t>>();
  t.violations = j.at("violations").get<std::map<std::string, std::uint64_t>>();
  t.trace_digest = digest_from(j.at("trace_digest"));
  return t;
}

}  // namespace abft::sim
