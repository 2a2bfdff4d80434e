#include "eunomia/encoding.hpp"

namespace eunomia {

void ByteWriter::u32(std::uint32_t v) {
  std::uint8_t b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  buf_.insert(buf_.end(), b, b + 4);
}

void ByteWriter::u64(std::uint64_t v) {
  std::uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  buf_.insert(buf_.end(), b, b + 8);
}

void ByteWriter::length(std::size_t n) {
  if (n > UINT32_MAX) throw std::length_error("list too long for canonical encoding");
  u32(static_cast<std::uint32_t>(n));
}

std::uint8_t ByteReader::u8() {
  need(1);
  return data_[pos_++];
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

Hash ByteReader::hash() {
  need(32);
  Hash h;
  std::copy(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
            data_.begin() + static_cast<std::ptrdiff_t>(pos_ + 32), h.bytes.begin());
  pos_ += 32;
  return h;
}

std::size_t ByteReader::length(std::size_t min_item_size) {
  const std::size_t n = u32();
  if (min_item_size > 0 && n > remaining() / min_item_size)
    throw DecodeError("list length exceeds remaining input");
  return n;
}

}  // namespace eunomia
