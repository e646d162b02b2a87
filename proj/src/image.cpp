#include "stegsan/image.hpp"

#include <algorithm>
#include <cmath>

#include "stegsan/error.hpp"

namespace stegsan {

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.channels) + "," + std::to_string(s.height) + "," +
         std::to_string(s.width) + ")";
}

void require_valid_shape(const Shape& s) {
  if ((s.channels != 1 && s.channels != 3) || s.height <= 0 || s.width <= 0) {
    throw UsageError("invalid image shape " + to_string(s) + ": need c in {1,3}, h,w > 0");
  }
}

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw UsageError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

ImageTensor::ImageTensor(Shape shape) : shape_(shape) {
  require_valid_shape(shape);
  pixels_.assign(shape.size(), 0.0f);
}

ImageTensor::ImageTensor(Shape shape, std::vector<float> pixels)
    : shape_(shape), pixels_(std::move(pixels)) {
  require_valid_shape(shape);
  if (pixels_.size() != shape.size()) {
    throw UsageError("pixel count " + std::to_string(pixels_.size()) + " does not match shape " +
                     to_string(shape));
  }
  for (float p : pixels_) {
    if (!(p >= 0.0f && p <= 1.0f)) {
      throw UsageError("pixel value outside [0,1]: " + std::to_string(p));
    }
  }
}

ImageTensor ImageTensor::from_bytes(Shape shape, std::span<const std::uint8_t> bytes) {
  std::vector<float> px(bytes.size());
  std::transform(bytes.begin(), bytes.end(), px.begin(),
                 [](std::uint8_t b) { return static_cast<float>(b) / 255.0f; });
  return ImageTensor(shape, std::move(px));
}

ImageTensor ImageTensor::filled(Shape shape, float value) {
  return ImageTensor(shape, std::vector<float>(shape.size(), value));
}

std::vector<std::uint8_t> ImageTensor::to_bytes() const {
  std::vector<std::uint8_t> out(pixels_.size());
  std::transform(pixels_.begin(), pixels_.end(), out.begin(), to_byte);
  return out;
}

ImageTensor clip_unit(Shape shape, std::span<const float> values) {
  std::vector<float> px(values.size());
  std::transform(values.begin(), values.end(), px.begin(), [](float v) {
    if (std::isnan(v)) return 0.0f;
    return std::min(1.0f, std::max(0.0f, v));
  });
  return ImageTensor(shape, std::move(px));
}

ImageTensor resize_bilinear(const ImageTensor& x, int height, int width) {
  if (height <= 0 || width <= 0) throw UsageError("resize target must be positive");
  const Shape in = x.shape();
  if (in.height == height && in.width == width) return x;
  const Shape out{in.channels, height, width};
  std::vector<float> px(out.size());
  const double sy = static_cast<double>(in.height) / height;
  const double sx = static_cast<double>(in.width) / width;
  for (int c = 0; c < in.channels; ++c) {
    for (int y = 0; y < height; ++y) {
      const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, in.height - 1.0);
      const int y0 = static_cast<int>(fy);
      const int y1 = std::min(y0 + 1, in.height - 1);
      const double wy = fy - y0;
      for (int xo = 0; xo < width; ++xo) {
        const double fx = std::clamp((xo + 0.5) * sx - 0.5, 0.0, in.width - 1.0);
        const int x0 = static_cast<int>(fx);
        const int x1 = std::min(x0 + 1, in.width - 1);
        const double wx = fx - x0;
        const double top = x.at(c, y0, x0) * (1 - wx) + x.at(c, y0, x1) * wx;
        const double bot = x.at(c, y1, x0) * (1 - wx) + x.at(c, y1, x1) * wx;
        const double v = top * (1 - wy) + bot * wy;
        px[(static_cast<std::size_t>(c) * height + y) * width + xo] =
            static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return ImageTensor(out, std::move(px));
}

}  // namespace stegsan
