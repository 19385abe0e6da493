#include "abft/core.hpp"

namespace abft {

Batch::Batch(std::vector<ClientMessage> entries) : entries_(std::move(entries)) {
  digest_ = sha256(encode());
}

Bytes Batch::encode() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(entries_.size()));
  for (const auto& e : entries_) w.bytes(e.payload);
  return w.take();
}

Batch Batch::decode(ByteReader& r) {
  std::uint32_t count = r.u32();
  // Each entry carries at least its own length prefix; a count beyond that
  // bound is unsatisfiable and must not drive the reserve below.
  if (count > r.remaining() / 4) throw ParseError("batch count exceeds input");
  std::vector<ClientMessage> entries;
  entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    entries.push_back(ClientMessage::from_payload(r.bytes()));
  }
  return Batch(std::move(entries));
}

}  // namespace abft
