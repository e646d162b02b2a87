#pragma once

#include <cstdint>

#include "stegsan/image.hpp"

namespace stegsan::steg {

/// Number of secret bit-planes written into the cover's low bits.
struct LsbConfig {
  int k = 4;

  std::uint8_t low_mask() const { return static_cast<std::uint8_t>((1u << k) - 1u); }
  /// Largest byte-scale change hiding can make to a cover pixel.
  int max_perturbation() const { return (1 << k) - 1; }
  void validate() const;
};

/// Byte-level kernels. The secret's top k bits land in the cover's low k
/// bits.
inline std::uint8_t lsb_hide_byte(std::uint8_t cover, std::uint8_t secret, int k) {
  const auto mask = static_cast<std::uint8_t>((1u << k) - 1u);
  return static_cast<std::uint8_t>((cover & ~mask) | (secret >> (8 - k)));
}

/// Extract the low k bits and stretch them back to a full byte by bit
/// replication (v * 255 / (2^k - 1), rounded), so 0 -> 0 and max -> 255.
inline std::uint8_t lsb_reveal_byte(std::uint8_t container, int k) {
  const unsigned mask = (1u << k) - 1u;
  const unsigned v = container & mask;
  return static_cast<std::uint8_t>((v * 255u + mask / 2u) / mask);
}

ImageTensor lsb_hide(const ImageTensor& cover, const ImageTensor& secret, const LsbConfig& cfg = {});
ImageTensor lsb_reveal(const ImageTensor& container, const LsbConfig& cfg = {});

}  // namespace stegsan::steg
