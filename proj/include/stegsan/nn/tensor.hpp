#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stegsan/image.hpp"

// The engine is compiled once in single precision (training, inference) and
// once in double precision (finite-difference gradient checks). The inline
// namespace keeps the two builds from colliding at link time.
#ifdef STEGSAN_NN_DOUBLE
#define STEGSAN_NN_NS f64
#else
#define STEGSAN_NN_NS f32
#endif

namespace stegsan::nn {
inline namespace STEGSAN_NN_NS {

#ifdef STEGSAN_NN_DOUBLE
using Real = double;
#else
using Real = float;
#endif

/// Batch of activations in channel-major layout: element (c, n, y, x) lives
/// at ((c * N + n) * H + y) * W + x. Every channel is one contiguous block,
/// so a convolution is a single GEMM over the whole batch. Dense features
/// use H = W = 1.
struct Tensor {
  int c = 0;
  int n = 0;
  int h = 1;
  int w = 1;
  std::vector<Real> data;

  Tensor() = default;
  Tensor(int channels, int batch, int height, int width, Real fill = 0)
      : c(channels), n(batch), h(height), w(width),
        data(static_cast<std::size_t>(channels) * batch * height * width, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  Real* plane_ptr(int ch, int i) { return data.data() + (static_cast<std::size_t>(ch) * n + i) * plane(); }
  const Real* plane_ptr(int ch, int i) const {
    return data.data() + (static_cast<std::size_t>(ch) * n + i) * plane();
  }
  bool same_shape(const Tensor& o) const { return c == o.c && n == o.n && h == o.h && w == o.w; }
  std::string shape_string() const;
};

/// Pack images into a batch. All images must share a shape.
Tensor batch_from_images(std::span<const ImageTensor* const> images);
Tensor batch_from_images(const std::vector<ImageTensor>& images);
/// Sample i as planar (c, h, w) values, unclipped.
std::vector<Real> sample_values(const Tensor& t, int i);
/// Sample i clipped into [0, 1].
ImageTensor sample_image(const Tensor& t, int i);
std::vector<ImageTensor> to_images(const Tensor& t);

Tensor concat_channels(const Tensor& a, const Tensor& b);
/// Inverse of concat_channels: first `first_channels` channels, then the rest.
std::pair<Tensor, Tensor> split_channels(const Tensor& t, int first_channels);

}  // namespace STEGSAN_NN_NS
}  // namespace stegsan::nn
