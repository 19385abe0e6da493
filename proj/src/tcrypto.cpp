#include "abft/tcrypto.hpp"

#include <random>
#include <set>

namespace abft::tcrypto {

namespace {

// p = 2q+1, both prime; g = 4 generates the order-q subgroup.
constexpr std::uint64_t kQ = 2305843009213697249ULL;
constexpr std::uint64_t kP = 4611686018427394499ULL;
constexpr std::uint64_t kG = 4;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return result;
}

std::uint64_t invmod_q(std::uint64_t a) { return powmod(a, kQ - 2, kQ); }

std::uint64_t submod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return a >= b ? a - b : a + m - b;
}

// Hash of the signed message mapped into [1, q).
std::uint64_t message_scalar(std::span<const std::uint8_t> message) {
  Digest d = sha256(message);
  std::uint64_t h = 0;
  for (int i = 0; i < 8; ++i) h = (h << 8) | d.bytes[i];
  h %= kQ;
  return h == 0 ? 1 : h;
}

std::uint64_t poly_eval(const std::vector<std::uint64_t>& coeffs, std::uint64_t x) {
  std::uint64_t acc = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = (mulmod(acc, x, kQ) + *it) % kQ;
  }
  return acc;
}

}  // namespace

Bytes PublicKey::encode() const {
  ByteWriter w;
  w.u32(n);
  w.u32(t);
  w.u64(key);
  for (auto c : share_commitments) w.u64(c);
  return w.take();
}

PublicKey PublicKey::decode(ByteReader& r) {
  PublicKey pk;
  pk.n = r.u32();
  pk.t = r.u32();
  pk.key = r.u64();
  if (pk.n > 1u << 16) throw ParseError("implausible key size");
  pk.share_commitments.reserve(pk.n);
  for (std::uint32_t i = 0; i < pk.n; ++i) pk.share_commitments.push_back(r.u64());
  return pk;
}

DealerOutput deal(std::uint32_t n, std::uint32_t t, std::uint64_t seed) {
  if (t < 1 || t > n) throw ThresholdError("threshold t must satisfy 1 <= t <= n");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> dist(1, kQ - 1);
  std::vector<std::uint64_t> coeffs(t);
  for (auto& c : coeffs) c = dist(rng);

  DealerOutput out;
  out.public_key.n = n;
  out.public_key.t = t;
  out.public_key.key = powmod(kG, coeffs[0], kP);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint64_t y = poly_eval(coeffs, i + 1);
    out.shares.push_back({i, y});
    out.public_key.share_commitments.push_back(powmod(kG, y, kP));
  }
  return out;
}

SignatureShare sign_share(const KeyShare& share, std::span<const std::uint8_t> message) {
  return {share.signer, mulmod(share.secret, message_scalar(message), kQ)};
}

bool verify_share(const PublicKey& pk, ReplicaId signer, std::span<const std::uint8_t> message,
                  const SignatureShare& share) {
  if (share.signer != signer || signer >= pk.share_commitments.size()) return false;
  std::uint64_t h = message_scalar(message);
  return powmod(kG, share.value, kP) == powmod(pk.share_commitments[signer], h, kP);
}

ThresholdSignature combine(const PublicKey& pk, std::span<const std::uint8_t> message,
                           std::span<const SignatureShare> shares) {
  // Distinct, verified signers only; the first t in signer order are used
  // (any valid t-subset combines to the same value).
  std::set<ReplicaId> seen;
  std::vector<SignatureShare> valid;
  for (const auto& s : shares) {
    if (seen.contains(s.signer)) continue;
    if (!verify_share(pk, s.signer, message, s)) continue;
    seen.insert(s.signer);
    valid.push_back(s);
    if (valid.size() == pk.t) break;
  }
  if (valid.size() < pk.t) throw ThresholdError("fewer than t distinct valid shares");

  std::uint64_t sig = 0;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    std::uint64_t xi = valid[i].signer + 1;
    std::uint64_t num = 1, den = 1;
    for (std::size_t j = 0; j < valid.size(); ++j) {
      if (i == j) continue;
      std::uint64_t xj = valid[j].signer + 1;
      num = mulmod(num, xj, kQ);
      den = mulmod(den, submod(xj % kQ, xi % kQ, kQ), kQ);
    }
    std::uint64_t lagrange = mulmod(num, invmod_q(den), kQ);
    sig = (sig + mulmod(lagrange, valid[i].value, kQ)) % kQ;
  }
  return {sig};
}

bool verify(const PublicKey& pk, std::span<const std::uint8_t> message,
            const ThresholdSignature& sig) {
  std::uint64_t h = message_scalar(message);
  return powmod(kG, sig.value, kP) == powmod(pk.key, h, kP);
}

int coin_bit(const ThresholdSignature& sig) {
  ByteWriter w;
  w.u64(sig.value);
  Digest d = sha256(w.data());
  return d.bytes[31] & 1;
}

Bytes coin_name(std::uint64_t aba_round, std::uint32_t internal_round) {
  ByteWriter w;
  w.u8(3);  // domain tag: coin names
  w.u64(aba_round);
  w.u32(internal_round);
  return w.take();
}

}  // namespace abft::tcrypto
