#include "stegsan/nn/tensor.hpp"

#include <algorithm>

#include "stegsan/error.hpp"

namespace stegsan::nn {
inline namespace STEGSAN_NN_NS {

std::string Tensor::shape_string() const {
  return "(" + std::to_string(c) + "," + std::to_string(n) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

Tensor batch_from_images(std::span<const ImageTensor* const> images) {
  if (images.empty()) throw UsageError("empty batch");
  const Shape s = images.front()->shape();
  Tensor t(s.channels, static_cast<int>(images.size()), s.height, s.width);
  const std::size_t plane = t.plane();
  for (int i = 0; i < t.n; ++i) {
    const ImageTensor& im = *images[static_cast<std::size_t>(i)];
    if (im.shape() != s) throw UsageError("batch images must share one shape");
    const auto px = im.pixels();
    for (int ch = 0; ch < s.channels; ++ch) {
      std::copy_n(px.begin() + static_cast<std::ptrdiff_t>(ch * plane), plane, t.plane_ptr(ch, i));
    }
  }
  return t;
}

Tensor batch_from_images(const std::vector<ImageTensor>& images) {
  std::vector<const ImageTensor*> ptrs;
  ptrs.reserve(images.size());
  for (const auto& im : images) ptrs.push_back(&im);
  return batch_from_images(ptrs);
}

std::vector<Real> sample_values(const Tensor& t, int i) {
  std::vector<Real> out(static_cast<std::size_t>(t.c) * t.plane());
  for (int ch = 0; ch < t.c; ++ch) {
    std::copy_n(t.plane_ptr(ch, i), t.plane(), out.begin() + static_cast<std::ptrdiff_t>(ch * t.plane()));
  }
  return out;
}

ImageTensor sample_image(const Tensor& t, int i) {
  const auto v = sample_values(t, i);
  std::vector<float> f(v.begin(), v.end());
  return clip_unit(Shape{t.c, t.h, t.w}, f);
}

std::vector<ImageTensor> to_images(const Tensor& t) {
  std::vector<ImageTensor> out;
  out.reserve(static_cast<std::size_t>(t.n));
  for (int i = 0; i < t.n; ++i) out.push_back(sample_image(t, i));
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w) {
    throw UsageError("concat_channels: incompatible " + a.shape_string() + " and " + b.shape_string());
  }
  Tensor out(a.c + b.c, a.n, a.h, a.w);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

std::pair<Tensor, Tensor> split_channels(const Tensor& t, int first_channels) {
  Tensor a(first_channels, t.n, t.h, t.w);
  Tensor b(t.c - first_channels, t.n, t.h, t.w);
  std::copy_n(t.data.begin(), a.size(), a.data.begin());
  std::copy(t.data.begin() + static_cast<std::ptrdiff_t>(a.size()), t.data.end(), b.data.begin());
  return {std::move(a), std::move(b)};
}

}  // namespace STEGSAN_NN_NS
}  // namespace stegsan::nn
