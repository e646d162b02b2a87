#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace stegsan {

struct Shape {
  int channels = 1;
  int height = 0;
  int width = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// A (c, h, w) image with unit-interval pixels stored row-major per
/// channel. Immutable once built; c is 1 (grayscale) or 3 (RGB).
class ImageTensor {
 public:
  ImageTensor() = default;
  /// Zero image.
  explicit ImageTensor(Shape shape);
  /// Throws UsageError if the shape is invalid, the size disagrees, or any
  /// pixel lies outside [0, 1].
  ImageTensor(Shape shape, std::vector<float> pixels);

  /// Pixels from byte scale: p = b / 255.
  static ImageTensor from_bytes(Shape shape, std::span<const std::uint8_t> bytes);
  /// Constant image.
  static ImageTensor filled(Shape shape, float value);

  /// round(p * 255) per pixel.
  std::vector<std::uint8_t> to_bytes() const;

  const Shape& shape() const { return shape_; }
  int channels() const { return shape_.channels; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  std::span<const float> pixels() const { return pixels_; }
  float at(int c, int y, int x) const {
    return pixels_[(static_cast<std::size_t>(c) * shape_.height + y) * shape_.width + x];
  }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  Shape shape_{};
  std::vector<float> pixels_;
};

void require_valid_shape(const Shape& s);
void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what);

/// Clamp arbitrary real values into [0, 1] and wrap them as an image.
/// NaN maps to 0.
ImageTensor clip_unit(Shape shape, std::span<const float> values);
inline ImageTensor clip_unit(const ImageTensor& x) { return clip_unit(x.shape(), x.pixels()); }

inline std::uint8_t to_byte(float p) {
  const float v = p * 255.0f + 0.5f;
  return static_cast<std::uint8_t>(v <= 0.0f ? 0.0f : (v >= 255.0f ? 255.0f : v));
}

/// Bilinear resize with half-pixel centres and edge clamping.
ImageTensor resize_bilinear(const ImageTensor& x, int height, int width);

}  // namespace stegsan
