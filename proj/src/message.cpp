#include "abft/message.hpp"

namespace abft {

namespace {

constexpr std::uint8_t kFormatTag = 1;

void write_share(ByteWriter& w, const tcrypto::SignatureShare& s) {
  w.u32(s.signer);
  w.u64(s.value);
}

tcrypto::SignatureShare read_share(ByteReader& r) {
  tcrypto::SignatureShare s;
  s.signer = r.u32();
  s.value = r.u64();
  return s;
}

void write_final(ByteWriter& w, const VcbcFinalBody& b) {
  w.raw(b.batch.encode());
  w.u64(b.proof.value);
}

VcbcFinalBody read_final(ByteReader& r) {
  VcbcFinalBody b;
  b.batch = Batch::decode(r);
  b.proof.value = r.u64();
  return b;
}

bool is_vcbc(MessageKind k) {
  return k == MessageKind::VcbcSend || k == MessageKind::VcbcEchoShare ||
         k == MessageKind::VcbcFinal;
}

bool is_aba(MessageKind k) {
  return k == MessageKind::AbaBval || k == MessageKind::AbaAux || k == MessageKind::AbaConf ||
         k == MessageKind::AbaCoinShare || k == MessageKind::AbaFinish;
}

}  // namespace

const char* message_kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::VcbcSend: return "VCBC_SEND";
    case MessageKind::VcbcEchoShare: return "VCBC_ECHO_SHARE";
    case MessageKind::VcbcFinal: return "VCBC_FINAL";
    case MessageKind::AbaBval: return "ABA_BVAL";
    case MessageKind::AbaAux: return "ABA_AUX";
    case MessageKind::AbaConf: return "ABA_CONF";
    case MessageKind::AbaCoinShare: return "ABA_COIN_SHARE";
    case MessageKind::AbaFinish: return "ABA_FINISH";
    case MessageKind::FillGap: return "FILL_GAP";
    case MessageKind::Filler: return "FILLER";
  }
  return "UNKNOWN";
}

Bytes vcbc_signing_tag(const VcbcId& id, const Digest& payload_digest) {
  ByteWriter w;
  w.u8(2);  // domain tag: vcbc proofs
  w.u32(id.origin);
  w.u64(id.priority);
  w.raw(payload_digest.bytes);
  return w.take();
}

Bytes encode(const ProtocolMessage& msg) {
  ByteWriter w;
  w.u8(kFormatTag);
  w.u8(static_cast<std::uint8_t>(msg.kind));
  w.u32(msg.sender);
  if (is_vcbc(msg.kind)) {
    w.u32(msg.origin);
    w.u64(msg.priority);
  } else if (is_aba(msg.kind)) {
    w.u64(msg.round);
  } else {
    w.u32(msg.origin);
  }
  std::visit(
      [&w](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, VcbcSendBody>) {
          w.raw(body.batch.encode());
        } else if constexpr (std::is_same_v<T, VcbcEchoShareBody>) {
          write_share(w, body.share);
        } else if constexpr (std::is_same_v<T, VcbcFinalBody>) {
          write_final(w, body);
        } else if constexpr (std::is_same_v<T, AbaBvalBody> || std::is_same_v<T, AbaAuxBody>) {
          w.u32(body.internal_round);
          w.u8(body.bit);
        } else if constexpr (std::is_same_v<T, AbaConfBody>) {
          w.u32(body.internal_round);
          w.u8(body.bits);
        } else if constexpr (std::is_same_v<T, AbaCoinShareBody>) {
          w.u32(body.internal_round);
          write_share(w, body.share);
        } else if constexpr (std::is_same_v<T, AbaFinishBody>) {
          w.u8(body.bit);
        } else if constexpr (std::is_same_v<T, FillGapBody>) {
          w.u64(body.slot);
        } else if constexpr (std::is_same_v<T, FillerBody>) {
          w.u32(static_cast<std::uint32_t>(body.entries.size()));
          for (const auto& e : body.entries) {
            w.u32(e.id.origin);
            w.u64(e.id.priority);
            write_final(w, e.final);
          }
        }
      },
      msg.body);
  return w.take();
}

ProtocolMessage decode(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.u8() != kFormatTag) throw ParseError("unknown format tag");
  std::uint8_t kind_raw = r.u8();
  if (kind_raw > static_cast<std::uint8_t>(MessageKind::Filler)) {
    throw ParseError("unknown message kind");
  }
  ProtocolMessage msg;
  msg.kind = static_cast<MessageKind>(kind_raw);
  msg.sender = r.u32();
  if (is_vcbc(msg.kind)) {
    msg.origin = r.u32();
    msg.priority = r.u64();
  } else if (is_aba(msg.kind)) {
    msg.round = r.u64();
  } else {
    msg.origin = r.u32();
  }
  switch (msg.kind) {
    case MessageKind::VcbcSend:
      msg.body = VcbcSendBody{Batch::decode(r)};
      break;
    case MessageKind::VcbcEchoShare:
      msg.body = VcbcEchoShareBody{read_share(r)};
      break;
    case MessageKind::VcbcFinal:
      msg.body = read_final(r);
      break;
    case MessageKind::AbaBval: {
      AbaBvalBody b;
      b.internal_round = r.u32();
      b.bit = r.u8();
      if (b.bit > 1) throw ParseError("BVAL bit out of domain");
      msg.body = b;
      break;
    }
    case MessageKind::AbaAux: {
      AbaAuxBody b;
      b.internal_round = r.u32();
      b.bit = r.u8();
      if (b.bit > 1) throw ParseError("AUX bit out of domain");
      msg.body = b;
      break;
    }
    case MessageKind::AbaConf: {
      AbaConfBody b;
      b.internal_round = r.u32();
      b.bits = r.u8();
      if (b.bits == 0 || b.bits > 3) throw ParseError("CONF set malformed");
      msg.body = b;
      break;
    }
    case MessageKind::AbaCoinShare: {
      AbaCoinShareBody b;
      b.internal_round = r.u32();
      b.share = read_share(r);
      msg.body = b;
      break;
    }
    case MessageKind::AbaFinish: {
      AbaFinishBody b;
      b.bit = r.u8();
      if (b.bit > 1) throw ParseError("FINISH bit out of domain");
      msg.body = b;
      break;
    }
    case MessageKind::FillGap: {
      FillGapBody b;
      b.slot = r.u64();
      msg.body = b;
      break;
    }
    case MessageKind::Filler: {
      FillerBody b;
      std::uint32_t count = r.u32();
      if (count > 1u << 20) throw ParseError("implausible FILLER size");
      if (count > r.remaining() / 16) throw ParseError("FILLER count exceeds input");
      b.entries.reserve(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        FillerEntry e;
        e.id.origin = r.u32();
        e.id.priority = r.u64();
        e.final = read_final(r);
        b.entries.push_back(std::move(e));
      }
      msg.body = std::move(b);
      break;
    }
  }
  r.expect_done();
  return msg;
}

}  // namespace abft
