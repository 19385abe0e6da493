#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>

#include "abft/bytes.hpp"

namespace abft {

struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  auto operator<=>(const Digest&) const = default;

  std::string hex() const;
};

/// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  Sha256& update(std::span<const std::uint8_t> data);
  Digest finish();

 private:
  void compress(const std::uint8_t* block);

  std::array<std::uint32_t, 8> state_;
  std::array<std::uint8_t, 64> buf_;
  std::uint64_t total_ = 0;
  std::size_t buflen_ = 0;
};

Digest sha256(std::span<const std::uint8_t> data);

}  // namespace abft
