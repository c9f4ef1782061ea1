#pragma once

#include <cstdint>
#include <vector>

#include "latticetag/errors.hpp"

namespace latticetag {

// MSB-first bit packing. Used by the wire frames and the credential
// files; padding is always zero bits at the very end of a region.
class BitWriter {
 public:
  void put(std::uint32_t value, std::uint32_t bits) {
    for (std::uint32_t i = bits; i > 0; --i) {
      const std::uint32_t bit = (value >> (i - 1)) & 1u;
      if (fill_ == 0) {
        bytes_.push_back(0);
        fill_ = 8;
      }
      --fill_;
      if (bit != 0) bytes_.back() |= static_cast<std::uint8_t>(1u << fill_);
    }
  }

  void put_bytes(const std::vector<std::uint8_t>& raw) {
    for (std::uint8_t b : raw) put(b, 8);
  }

  // Zero-fill to the next byte boundary.
  void pad_to_byte() { fill_ = 0; }

  std::uint64_t bit_count() const { return bytes_.size() * 8 - fill_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint32_t fill_ = 0;  // unused bits remaining in the last byte
};

class BitReader {
 public:
  BitReader(const std::uint8_t* data, std::size_t size)
      : data_(data), size_bits_(size * 8) {}

  std::uint32_t get(std::uint32_t bits) {
    std::uint32_t value = 0;
    for (std::uint32_t i = 0; i < bits; ++i) {
      if (pos_ >= size_bits_) throw FormatError("bit stream truncated");
      const std::uint8_t byte = data_[pos_ >> 3];
      const std::uint32_t bit = (byte >> (7 - (pos_ & 7))) & 1u;
      value = (value << 1) | bit;
      ++pos_;
    }
    return value;
  }

  std::vector<std::uint8_t> get_bytes(std::size_t count) {
    std::vector<std::uint8_t> out(count);
    for (auto& b : out) b = static_cast<std::uint8_t>(get(8));
    return out;
  }

  // Consume padding up to the next byte boundary; every bit must be 0.
  void skip_zero_padding_to_byte() {
    while ((pos_ & 7) != 0) {
      if (get(1) != 0) throw FormatError("nonzero padding bit");
    }
  }

  std::uint64_t bits_left() const { return size_bits_ - pos_; }
  std::uint64_t position() const { return pos_; }

 private:
  const std::uint8_t* data_;
  std::uint64_t size_bits_;
  std::uint64_t pos_ = 0;
};

}  // namespace latticetag
