#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "abft/digest.hpp"
#include "abft/tcrypto.hpp"

using namespace abft;
using namespace abft::tcrypto;

namespace {

Bytes ascii(const char* s) {
  Bytes out;
  while (*s) out.push_back(static_cast<std::uint8_t>(*s++));
  return out;
}

std::vector<SignatureShare> sign_all(const DealerOutput& d, const Bytes& msg) {
  std::vector<SignatureShare> out;
  for (const auto& ks : d.shares) out.push_back(sign_share(ks, msg));
  return out;
}

}  // namespace

TEST_CASE("dealing is deterministic in the seed") {
  auto a = deal(4, 3, 99);
  auto b = deal(4, 3, 99);
  auto c = deal(4, 3, 100);
  CHECK(a.public_key.key == b.public_key.key);
  CHECK(a.public_key.share_commitments == b.public_key.share_commitments);
  CHECK(a.shares[2].secret == b.shares[2].secret);
  CHECK(a.public_key.key != c.public_key.key);
  CHECK_THROWS_AS(deal(4, 0, 1), ThresholdError);
  CHECK_THROWS_AS(deal(4, 5, 1), ThresholdError);
}

TEST_CASE("shares verify against the right signer only") {
  auto d = deal(4, 3, 7);
  Bytes msg = ascii("hello");
  for (ReplicaId i = 0; i < 4; ++i) {
    auto s = sign_share(d.shares[i], msg);
    CHECK(s.signer == i);
    CHECK(verify_share(d.public_key, i, msg, s));
    CHECK_FALSE(verify_share(d.public_key, (i + 1) % 4, msg, s));
    CHECK_FALSE(verify_share(d.public_key, i, ascii("other"), s));
    auto tampered = s;
    tampered.value ^= 1;
    CHECK_FALSE(verify_share(d.public_key, i, msg, tampered));
  }
}

TEST_CASE("combining is independent of the chosen share subset") {
  auto d = deal(4, 3, 11);
  Bytes msg = ascii("the message");
  auto shares = sign_all(d, msg);

  // Every 3-subset of 4 shares gives the identical signature.
  std::vector<ThresholdSignature> sigs;
  for (int skip = 0; skip < 4; ++skip) {
    std::vector<SignatureShare> subset;
    for (int i = 0; i < 4; ++i) {
      if (i != skip) subset.push_back(shares[i]);
    }
    sigs.push_back(combine(d.public_key, msg, subset));
  }
  for (const auto& s : sigs) CHECK(s == sigs.front());
  CHECK(verify(d.public_key, msg, sigs.front()));
  CHECK_FALSE(verify(d.public_key, ascii("not it"), sigs.front()));
  auto forged = sigs.front();
  forged.value ^= 1;
  CHECK_FALSE(verify(d.public_key, msg, forged));

  // Order of shares inside the subset does not matter either.
  std::vector<SignatureShare> reversed{shares[2], shares[0], shares[3]};
  CHECK(combine(d.public_key, msg, reversed) == sigs.front());
}

TEST_CASE("combining refuses fewer than t distinct valid shares") {
  auto d = deal(4, 3, 13);
  Bytes msg = ascii("m");
  auto shares = sign_all(d, msg);
  std::vector<SignatureShare> two{shares[0], shares[1]};
  CHECK_THROWS_AS(combine(d.public_key, msg, two), ThresholdError);
  std::vector<SignatureShare> dup{shares[0], shares[0], shares[0]};
  CHECK_THROWS_AS(combine(d.public_key, msg, dup), ThresholdError);
  std::vector<SignatureShare> corrupt{shares[0], shares[1], {2, shares[2].value ^ 5}};
  CHECK_THROWS_AS(combine(d.public_key, msg, corrupt), ThresholdError);
  // A bad share plus t good ones still combines.
  std::vector<SignatureShare> mixed{{2, shares[2].value ^ 5}, shares[0], shares[1], shares[3]};
  CHECK(verify(d.public_key, msg, combine(d.public_key, msg, mixed)));
}

TEST_CASE("signatures stay 8 bytes regardless of message size") {
  auto d = deal(4, 3, 17);
  Bytes small = ascii("x");
  Bytes large(1 << 20, 0xAB);
  auto s1 = combine(d.public_key, small, sign_all(d, small));
  auto s2 = combine(d.public_key, large, sign_all(d, large));
  CHECK(sizeof(s1.value) == 8);
  CHECK(verify(d.public_key, small, s1));
  CHECK(verify(d.public_key, large, s2));
  CHECK(s1.value != s2.value);
}

TEST_CASE("public key material round-trips") {
  auto d = deal(7, 5, 23);
  Bytes enc = d.public_key.encode();
  ByteReader r(enc);
  PublicKey back = PublicKey::decode(r);
  CHECK(r.done());
  CHECK(back.n == d.public_key.n);
  CHECK(back.t == d.public_key.t);
  CHECK(back.key == d.public_key.key);
  CHECK(back.share_commitments == d.public_key.share_commitments);
}

TEST_CASE("coin names are distinct per round pair") {
  CHECK(coin_name(0, 0) != coin_name(0, 1));
  CHECK(coin_name(0, 0) != coin_name(1, 0));
  CHECK(coin_name(3, 2) == coin_name(3, 2));
  CHECK(coin_name(0, 0).size() == 1 + 8 + 4);
}

TEST_CASE("coin bits are unpredictable but unbiased") {
  auto d = deal(4, 2, 31);
  int ones = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    Bytes name = coin_name(i, 0);
    std::vector<SignatureShare> shares{sign_share(d.shares[0], name),
                                       sign_share(d.shares[3], name)};
    int bit = coin_bit(combine(d.public_key, name, shares));
    CHECK((bit == 0 || bit == 1));
    ones += bit;
    // Any f+1 subset sees the same coin.
    std::vector<SignatureShare> other{sign_share(d.shares[1], name),
                                      sign_share(d.shares[2], name)};
    CHECK(coin_bit(combine(d.public_key, name, other)) == bit);
  }
  double mean = static_cast<double>(ones) / trials;
  CHECK(mean > 0.45);
  CHECK(mean < 0.55);
}
