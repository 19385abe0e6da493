#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "abft/core.hpp"
#include "abft/digest.hpp"
#include "abft/message.hpp"

using namespace abft;

namespace {

Bytes ascii(const char* s) {
  Bytes out;
  while (*s) out.push_back(static_cast<std::uint8_t>(*s++));
  return out;
}

}  // namespace

TEST_CASE("sha256 known answers") {
  // FIPS 180-2 vectors.
  CHECK(sha256(Bytes{}).hex() ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256(ascii("abc")).hex() ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256(ascii("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")).hex() ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");

  // One million 'a': exercises the incremental path across block boundaries.
  Sha256 h;
  Bytes chunk(1000, 'a');
  for (int i = 0; i < 1000; ++i) h.update(chunk);
  CHECK(h.finish().hex() ==
        "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("quorum sizes at reference configurations") {
  struct Row {
    std::uint32_t n, f, weak, strong, quorum;
  };
  for (Row row : {Row{4, 1, 2, 3, 3}, Row{7, 2, 3, 5, 5}, Row{10, 3, 4, 7, 7},
                  Row{13, 4, 5, 9, 9}}) {
    Config cfg{row.n, row.f, 1, 250};
    CHECK(cfg.valid());
    Quorums q = quorums(cfg);
    CHECK(q.weak == row.weak);
    CHECK(q.strong == row.strong);
    CHECK(q.quorum == row.quorum);
  }
  CHECK_FALSE(Config{4, 2, 1, 250}.valid());
  CHECK_FALSE(Config{3, 1, 1, 250}.valid());
}

TEST_CASE("round to queue mapping cycles through all queues") {
  for (std::uint32_t n : {4u, 7u, 10u}) {
    for (std::uint64_t r = 0; r < 3 * n; ++r) CHECK(queue_map(r, n) == r % n);
  }
  CHECK(queue_map(0, 4) == 0);
  CHECK(queue_map(5, 4) == 1);
  CHECK(queue_map(1ull << 40, 4) == 0);
}

TEST_CASE("client message identity is the payload digest") {
  auto m = ClientMessage::from_payload(ascii("tx-1"));
  CHECK(m.id == sha256(ascii("tx-1")));
  auto m2 = ClientMessage::from_payload(ascii("tx-1"));
  CHECK(m == m2);
}

TEST_CASE("batch canonical encoding round-trips and fixes the digest") {
  std::vector<ClientMessage> entries{ClientMessage::from_payload(ascii("a")),
                                     ClientMessage::from_payload(ascii("bb")),
                                     ClientMessage::from_payload(ascii("ccc"))};
  Batch b(entries);
  Bytes enc = b.encode();
  ByteReader r(enc);
  Batch back = Batch::decode(r);
  CHECK(r.done());
  CHECK(back == b);
  CHECK(back.entries().size() == 3);
  CHECK(back.entries()[1].payload == ascii("bb"));
  CHECK(back.digest() == sha256(enc));

  // Same entries, same order: identical bytes. Different order: different digest.
  Batch b2(entries);
  CHECK(b2.encode() == enc);
  std::swap(entries[0], entries[1]);
  CHECK(Batch(entries).digest() != b.digest());
}

namespace {

ProtocolMessage sample_message(MessageKind kind) {
  Batch batch({ClientMessage::from_payload(ascii("payload-x")),
               ClientMessage::from_payload(ascii("payload-y"))});
  ProtocolMessage m;
  m.kind = kind;
  m.sender = 2;
  switch (kind) {
    case MessageKind::VcbcSend:
    case MessageKind::VcbcEchoShare:
    case MessageKind::VcbcFinal:
      m.origin = 1;
      m.priority = 7;
      break;
    case MessageKind::AbaBval:
    case MessageKind::AbaAux:
    case MessageKind::AbaConf:
    case MessageKind::AbaCoinShare:
    case MessageKind::AbaFinish:
      m.round = 11;
      break;
    default:
      m.origin = 1;
      break;
  }
  switch (kind) {
    case MessageKind::VcbcSend: m.body = VcbcSendBody{batch}; break;
    case MessageKind::VcbcEchoShare: m.body = VcbcEchoShareBody{{2, 12345}}; break;
    case MessageKind::VcbcFinal: m.body = VcbcFinalBody{batch, {67890}}; break;
    case MessageKind::AbaBval: m.body = AbaBvalBody{3, 1}; break;
    case MessageKind::AbaAux: m.body = AbaAuxBody{3, 0}; break;
    case MessageKind::AbaConf: m.body = AbaConfBody{3, 3}; break;
    case MessageKind::AbaCoinShare: m.body = AbaCoinShareBody{3, {2, 999}}; break;
    case MessageKind::AbaFinish: m.body = AbaFinishBody{1}; break;
    case MessageKind::FillGap: m.body = FillGapBody{42}; break;
    case MessageKind::Filler: m.body = FillerBody{{{{1, 7}, {batch, {67890}}}}}; break;
  }
  return m;
}

}  // namespace

TEST_CASE("wire encoding round-trips every message kind") {
  for (int k = 0; k <= static_cast<int>(MessageKind::Filler); ++k) {
    auto kind = static_cast<MessageKind>(k);
    ProtocolMessage m = sample_message(kind);
    ProtocolMessage back = decode(encode(m));
    CHECK(back == m);
  }
}

TEST_CASE("decoder rejects malformed input") {
  CHECK_THROWS_AS(decode(Bytes{}), ParseError);
  CHECK_THROWS_AS(decode(Bytes{9, 0, 0, 0, 0, 0}), ParseError);   // wrong format tag
  CHECK_THROWS_AS(decode(Bytes{1, 99, 0, 0, 0, 0}), ParseError);  // unknown kind

  Bytes good = encode(sample_message(MessageKind::AbaBval));
  for (std::size_t cut = 0; cut < good.size(); ++cut) {
    Bytes truncated(good.begin(), good.begin() + cut);
    CHECK_THROWS_AS(decode(truncated), ParseError);
  }
  Bytes padded = good;
  padded.push_back(0);
  CHECK_THROWS_AS(decode(padded), ParseError);

  // Domain violations inside otherwise well-formed bodies.
  ProtocolMessage m = sample_message(MessageKind::AbaBval);
  std::get<AbaBvalBody>(m.body).bit = 2;
  CHECK_THROWS_AS(decode(encode(m)), ParseError);
  m = sample_message(MessageKind::AbaConf);
  std::get<AbaConfBody>(m.body).bits = 0;
  CHECK_THROWS_AS(decode(encode(m)), ParseError);
  std::get<AbaConfBody>(m.body).bits = 4;
  CHECK_THROWS_AS(decode(encode(m)), ParseError);
}

TEST_CASE("decoder round-trips under random corruption without crashing") {
  std::mt19937_64 rng(7);
  Bytes good = encode(sample_message(MessageKind::Filler));
  for (int trial = 0; trial < 2000; ++trial) {
    Bytes bad = good;
    std::size_t flips = 1 + rng() % 6;
    for (std::size_t i = 0; i < flips; ++i) bad[rng() % bad.size()] ^= 1 + rng() % 255;
    try {
      ProtocolMessage m = decode(bad);
      CHECK(encode(m).size() > 0);  // decoded object must re-encode
    } catch (const ParseError&) {
    }
  }
}

TEST_CASE("signing tag binds instance and digest, never the payload") {
  Digest d = sha256(ascii("v"));
  Bytes tag = vcbc_signing_tag({3, 9}, d);
  CHECK(tag.size() == 1 + 4 + 8 + 32);
  CHECK(tag[0] == 2);
  CHECK(tag != vcbc_signing_tag({3, 10}, d));
  CHECK(tag != vcbc_signing_tag({4, 9}, d));
  CHECK(tag != vcbc_signing_tag({3, 9}, sha256(ascii("w"))));
  CHECK(tag == vcbc_signing_tag({3, 9}, d));
}
