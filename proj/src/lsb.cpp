#include "stegsan/lsb.hpp"

#include <string>

#include "stegsan/error.hpp"

namespace stegsan::steg {

void LsbConfig::validate() const {
  if (k < 1 || k > 7) throw UsageError("LSB bit-plane count must be in [1,7], got " + std::to_string(k));
}

ImageTensor lsb_hide(const ImageTensor& cover, const ImageTensor& secret, const LsbConfig& cfg) {
  cfg.validate();
  require_same_shape(cover, secret, "lsb_hide");
  auto c = cover.to_bytes();
  const auto s = secret.to_bytes();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = lsb_hide_byte(c[i], s[i], cfg.k);
  return ImageTensor::from_bytes(cover.shape(), c);
}

ImageTensor lsb_reveal(const ImageTensor& container, const LsbConfig& cfg) {
  cfg.validate();
  auto b = container.to_bytes();
  for (auto& v : b) v = lsb_reveal_byte(v, cfg.k);
  return ImageTensor::from_bytes(container.shape(), b);
}

}  // namespace stegsan::steg
