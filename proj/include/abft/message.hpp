#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "abft/bytes.hpp"
#include "abft/core.hpp"
#include "abft/tcrypto.hpp"

namespace abft {

enum class MessageKind : std::uint8_t {
  VcbcSend = 0,
  VcbcEchoShare = 1,
  VcbcFinal = 2,
  AbaBval = 3,
  AbaAux = 4,
  AbaConf = 5,
  AbaCoinShare = 6,
  AbaFinish = 7,
  FillGap = 8,
  Filler = 9,
};

const char* message_kind_name(MessageKind k);

/// Identifies one broadcast instance: (origin replica, local priority).
struct VcbcId {
  ReplicaId origin = 0;
  std::uint64_t priority = 0;

  auto operator<=>(const VcbcId&) const = default;
};

struct VcbcSendBody {
  Batch batch;
  bool operator==(const VcbcSendBody&) const = default;
};

struct VcbcEchoShareBody {
  tcrypto::SignatureShare share;
  bool operator==(const VcbcEchoShareBody&) const = default;
};

/// Also the verifiable message M: self-authenticating, embeddable in FILLER.
struct VcbcFinalBody {
  Batch batch;
  tcrypto::ThresholdSignature proof;
  bool operator==(const VcbcFinalBody&) const = default;
};

struct AbaBvalBody {
  std::uint32_t internal_round = 0;
  std::uint8_t bit = 0;
  bool operator==(const AbaBvalBody&) const = default;
};

struct AbaAuxBody {
  std::uint32_t internal_round = 0;
  std::uint8_t bit = 0;
  bool operator==(const AbaAuxBody&) const = default;
};

struct AbaConfBody {
  std::uint32_t internal_round = 0;
  std::uint8_t bits = 0;  // mask: bit0 set if 0 in set, bit1 set if 1 in set
  bool operator==(const AbaConfBody&) const = default;
};

struct AbaCoinShareBody {
  std::uint32_t internal_round = 0;
  tcrypto::SignatureShare share;
  bool operator==(const AbaCoinShareBody&) const = default;
};

struct AbaFinishBody {
  std::uint8_t bit = 0;
  bool operator==(const AbaFinishBody&) const = default;
};

struct FillGapBody {
  std::uint64_t slot = 0;  // requester's head for the tagged queue
  bool operator==(const FillGapBody&) const = default;
};

struct FillerEntry {
  VcbcId id;
  VcbcFinalBody final;  // verbatim VCBC_FINAL body
  bool operator==(const FillerEntry&) const = default;
};

struct FillerBody {
  std::vector<FillerEntry> entries;
  bool operator==(const FillerBody&) const = default;
};

using MessageBody = std::variant<VcbcSendBody, VcbcEchoShareBody, VcbcFinalBody, AbaBvalBody,
                                 AbaAuxBody, AbaConfBody, AbaCoinShareBody, AbaFinishBody,
                                 FillGapBody, FillerBody>;

/// Wire envelope. Every message addresses exactly one protocol instance:
/// VCBC kinds carry a VcbcId, ABA kinds a round number, recovery kinds a
/// queue id.
struct ProtocolMessage {
  MessageKind kind = MessageKind::VcbcSend;
  ReplicaId sender = 0;
  ReplicaId origin = 0;        // VCBC instance / recovery queue id
  std::uint64_t priority = 0;  // VCBC instance
  std::uint64_t round = 0;     // ABA instance
  MessageBody body;

  bool operator==(const ProtocolMessage&) const = default;
};

/// An emitted message: to one replica, or to all n (self-loop included).
struct Outbound {
  std::optional<ReplicaId> dst;  // nullopt = broadcast
  ProtocolMessage msg;
};

/// Byzantine-attributable malformedness is counted, never thrown: a correct
/// replica must not halt on bad input.
using ViolationCounters = std::map<std::string, std::uint64_t>;

/// Canonical, versioned (1-byte format tag) binary encoding.
Bytes encode(const ProtocolMessage& msg);

/// Throws ParseError on malformed or truncated input.
ProtocolMessage decode(std::span<const std::uint8_t> bytes);

/// The byte string VCBC echo shares and proofs sign: binds the instance id
/// and the payload digest, never the payload itself.
Bytes vcbc_signing_tag(const VcbcId& id, const Digest& payload_digest);

}  // namespace abft
