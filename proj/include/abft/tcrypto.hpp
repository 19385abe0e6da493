#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "abft/bytes.hpp"
#include "abft/core.hpp"
#include "abft/digest.hpp"

namespace abft::tcrypto {

// Deterministic trusted-dealer threshold signatures over a Schnorr-style
// discrete-log group. A dealer Shamir-shares a master secret a0; a share
// signature over message m is y_i * H(m), Lagrange-combined at zero to the
// unique signature a0 * H(m). Combining is independent of which t valid
// shares are used, which the common coin and proof comparisons rely on.
// Group: subgroup of order q in Z_p*, p = 2q+1 (62-bit safe prime).

struct SignatureShare {
  ReplicaId signer = 0;
  std::uint64_t value = 0;

  bool operator==(const SignatureShare&) const = default;
};

struct ThresholdSignature {
  std::uint64_t value = 0;  // lambda = 8 bytes, independent of message length

  bool operator==(const ThresholdSignature&) const = default;
};

struct PublicKey {
  std::uint32_t n = 0;
  std::uint32_t t = 0;
  std::uint64_t key = 0;                          // g^a0
  std::vector<std::uint64_t> share_commitments;   // g^y_i, index-aligned

  Bytes encode() const;
  static PublicKey decode(ByteReader& r);
};

struct KeyShare {
  ReplicaId signer = 0;
  std::uint64_t secret = 0;  // y_i, never serialized into public material
};

struct DealerOutput {
  PublicKey public_key;
  std::vector<KeyShare> shares;
};

class ThresholdError : public std::runtime_error {
 public:
  explicit ThresholdError(const std::string& what) : std::runtime_error(what) {}
};

/// Deterministic in seed; throws ThresholdError unless 1 <= t <= n.
DealerOutput deal(std::uint32_t n, std::uint32_t t, std::uint64_t seed);

SignatureShare sign_share(const KeyShare& share, std::span<const std::uint8_t> message);

bool verify_share(const PublicKey& pk, ReplicaId signer, std::span<const std::uint8_t> message,
                  const SignatureShare& share);

/// Requires >= t shares from distinct signers; throws ThresholdError otherwise.
/// Output is identical for any valid t-subset over the same message.
ThresholdSignature combine(const PublicKey& pk, std::span<const std::uint8_t> message,
                           std::span<const SignatureShare> shares);

bool verify(const PublicKey& pk, std::span<const std::uint8_t> message,
            const ThresholdSignature& sig);

/// Common-coin bit: low-order bit of digest(sig); identical at all replicas.
int coin_bit(const ThresholdSignature& sig);

/// Canonical byte string all replicas sign for the coin of an ABA round.
Bytes coin_name(std::uint64_t aba_round, std::uint32_t internal_round);

}  // namespace abft::tcrypto
