#pragma once

// Canonical byte encoding: fixed-width little-endian integers, 32-byte raw
// hashes, u32 length prefixes for lists, fields in declaration order.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eunomia/hash.hpp"

namespace eunomia {

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ByteWriter {
 public:
  void reserve(std::size_t n) { buf_.reserve(n); }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void hash(const Hash& h) { buf_.insert(buf_.end(), h.bytes.begin(), h.bytes.end()); }
  void length(std::size_t n);

  const std::vector<std::uint8_t>& bytes() const& { return buf_; }
  std::vector<std::uint8_t> bytes() && { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  Hash hash();
  /// Reads a list length and rejects counts that cannot fit in the remaining
  /// input given at least `min_item_size` bytes per item.
  std::size_t length(std::size_t min_item_size = 1);

  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }
  void expect_done() const {
    if (!done()) throw DecodeError("trailing bytes after canonical encoding");
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw DecodeError("truncated canonical encoding");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace eunomia
