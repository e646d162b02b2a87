#include "stegsan/rng.hpp"

namespace stegsan {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t basis) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = basis;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

Seed child_seed(Seed root, std::string_view name) {
  return Seed{splitmix64(root.value ^ fnv1a64(name.data(), name.size()))};
}

Seed child_seed(Seed root, std::string_view name, std::uint64_t index) {
  return Seed{splitmix64(child_seed(root, name).value + splitmix64(index))};
}

}  // namespace stegsan
