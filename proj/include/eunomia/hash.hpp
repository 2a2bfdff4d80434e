#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace eunomia {

/// 256-bit content digest. Equality and ordering are byte-wise.
struct Hash {
  std::array<std::uint8_t, 32> bytes{};

  auto operator<=>(const Hash&) const = default;

  bool is_zero() const;
  std::string hex() const;
  static Hash from_hex(std::string_view hex);

  /// Value of the lowest `count` bits (count <= 64), reading the digest as a
  /// big-endian integer, i.e. the trailing bits of the last bytes.
  std::uint64_t trailing_bits(unsigned count) const;
  unsigned leading_zero_bits() const;
};

struct HashHasher {
  std::size_t operator()(const Hash& h) const noexcept {
    std::size_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | h.bytes[i];
    return v;
  }
};

Hash digest(std::span<const std::uint8_t> data);
Hash digest(std::string_view data);
/// digest(left || right); the Merkle node combiner and the metadata leaf.
Hash digest_pair(const Hash& left, const Hash& right);

/// Streaming SHA-256.
class Hasher {
 public:
  Hasher();
  ~Hasher();
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;
  Hasher(Hasher&&) noexcept;
  Hasher& operator=(Hasher&&) noexcept;

  void update(std::span<const std::uint8_t> data);
  void update(const Hash& h) { update(std::span<const std::uint8_t>(h.bytes)); }
  Hash finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace eunomia
