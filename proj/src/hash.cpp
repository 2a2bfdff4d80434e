#include "eunomia/hash.hpp"

#include <openssl/evp.h>

#include <bit>
#include <stdexcept>

namespace eunomia {

bool Hash::is_zero() const {
  for (auto b : bytes)
    if (b != 0) return false;
  return true;
}

std::string Hash::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(64, '0');
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    out[2 * i] = kDigits[bytes[i] >> 4];
    out[2 * i + 1] = kDigits[bytes[i] & 0xF];
  }
  return out;
}

Hash Hash::from_hex(std::string_view hex) {
  if (hex.size() != 64) throw std::invalid_argument("hash hex must be 64 characters");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex digit in hash");
  };
  Hash h;
  for (std::size_t i = 0; i < 32; ++i)
    h.bytes[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
  return h;
}

std::uint64_t Hash::trailing_bits(unsigned count) const {
  if (count == 0) return 0;
  if (count > 64) throw std::invalid_argument("trailing_bits count > 64");
  std::uint64_t v = 0;
  for (int i = 24; i < 32; ++i) v = (v << 8) | bytes[i];
  return count == 64 ? v : (v & ((std::uint64_t{1} << count) - 1));
}

unsigned Hash::leading_zero_bits() const {
  unsigned n = 0;
  for (auto b : bytes) {
    if (b == 0) {
      n += 8;
      continue;
    }
    return n + static_cast<unsigned>(std::countl_zero(b));
  }
  return n;
}

namespace {

// Explicitly fetched once; sha256_md() would be looked up on every init.
const EVP_MD* sha256_md() {
  static EVP_MD* md = EVP_MD_fetch(nullptr, "SHA256", nullptr);
  return md;
}

}  // namespace

struct Hasher::Impl {
  EVP_MD_CTX* ctx = nullptr;
};

Hasher::Hasher() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, sha256_md(), nullptr) != 1)
    throw std::runtime_error("SHA-256 init failed");
}

Hasher::~Hasher() {
  if (impl_ && impl_->ctx) EVP_MD_CTX_free(impl_->ctx);
}

Hasher::Hasher(Hasher&&) noexcept = default;
Hasher& Hasher::operator=(Hasher&&) noexcept = default;

void Hasher::update(std::span<const std::uint8_t> data) {
  if (EVP_DigestUpdate(impl_->ctx, data.data(), data.size()) != 1)
    throw std::runtime_error("SHA-256 update failed");
}

Hash Hasher::finish() {
  Hash h;
  unsigned len = 0;
  if (EVP_DigestFinal_ex(impl_->ctx, h.bytes.data(), &len) != 1 || len != 32)
    throw std::runtime_error("SHA-256 final failed");
  return h;
}

Hash digest(std::span<const std::uint8_t> data) {
  // One context per thread, reused to avoid an allocation per hash.
  struct Ctx {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    ~Ctx() { EVP_MD_CTX_free(ctx); }
  };
  thread_local Ctx local;
  Hash h;
  unsigned len = 0;
  if (local.ctx == nullptr || EVP_DigestInit_ex(local.ctx, sha256_md(), nullptr) != 1 ||
      EVP_DigestUpdate(local.ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(local.ctx, h.bytes.data(), &len) != 1)
    throw std::runtime_error("SHA-256 failed");
  return h;
}

Hash digest(std::string_view data) {
  return digest(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

Hash digest_pair(const Hash& left, const Hash& right) {
  std::array<std::uint8_t, 64> buf;
  std::copy(left.bytes.begin(), left.bytes.end(), buf.begin());
  std::copy(right.bytes.begin(), right.bytes.end(), buf.begin() + 32);
  return digest(std::span<const std::uint8_t>(buf));
}

}  // namespace eunomia
