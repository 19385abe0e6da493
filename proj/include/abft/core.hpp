#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "abft/bytes.hpp"
#include "abft/digest.hpp"

namespace abft {

using ReplicaId = std::uint32_t;

/// Replica-group configuration. The reference configuration has n = 3f+1.
struct Config {
  std::uint32_t n = 4;
  std::uint32_t f = 1;
  std::uint32_t batch_size = 1;   // B, transactions per proposal
  std::uint32_t tx_size = 250;    // bytes per transaction (harness default)

  bool valid() const { return n >= 3 * f + 1 && batch_size >= 1 && n >= 1; }
};

struct Quorums {
  std::uint32_t weak;    // f+1
  std::uint32_t strong;  // 2f+1
  std::uint32_t quorum;  // n-f
};

inline Quorums quorums(const Config& cfg) {
  return {cfg.f + 1, 2 * cfg.f + 1, cfg.n - cfg.f};
}

/// Round-robin queue mapping: round r operates on queue r mod n.
inline ReplicaId queue_map(std::uint64_t round, std::uint32_t n) {
  return static_cast<ReplicaId>(round % n);
}

/// A client payload; identity is the digest of the payload bytes.
struct ClientMessage {
  Bytes payload;
  Digest id;

  static ClientMessage from_payload(Bytes payload) {
    ClientMessage m;
    m.id = sha256(payload);
    m.payload = std::move(payload);
    return m;
  }

  bool operator==(const ClientMessage& o) const { return id == o.id; }
};

/// An ordered sequence of distinct client messages with a canonical encoding.
/// Equal entries in equal order produce identical bytes and digest.
class Batch {
 public:
  Batch() = default;
  explicit Batch(std::vector<ClientMessage> entries);

  const std::vector<ClientMessage>& entries() const { return entries_; }
  const Digest& digest() const { return digest_; }
  bool empty() const { return entries_.empty(); }

  Bytes encode() const;
  static Batch decode(ByteReader& r);

  bool operator==(const Batch& o) const { return digest_ == o.digest_; }

 private:
  std::vector<ClientMessage> entries_;
  Digest digest_{};
};

/// Local protocol assertion failure (never triggered by remote input).
class ProtocolViolation : public std::logic_error {
 public:
  explicit ProtocolViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace abft
