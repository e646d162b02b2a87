#include "stegsan/image_io.hpp"

#include <png.h>

#include <cstring>
#include <vector>

#include "stegsan/error.hpp"

namespace stegsan {

void write_png(const ImageTensor& image, const std::filesystem::path& path) {
  const Shape s = image.shape();
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(s.width);
  png.height = static_cast<png_uint_32>(s.height);
  png.format = s.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

  // planar (c,h,w) -> interleaved (h,w,c)
  const auto planar = image.to_bytes();
  std::vector<std::uint8_t> interleaved(planar.size());
  const std::size_t plane = static_cast<std::size_t>(s.height) * s.width;
  for (int c = 0; c < s.channels; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      interleaved[i * s.channels + c] = planar[c * plane + i];
    }
  }
  if (!png_image_write_to_file(&png, path.c_str(), 0, interleaved.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw IoError("cannot write PNG " + path.string() + ": " + msg);
  }
}

ImageTensor read_png(const std::filesystem::path& path, int channels) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + png.message);
  }
  if (channels == 0) channels = (png.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  if (channels != 1 && channels != 3) {
    png_image_free(&png);
    throw UsageError("PNG channels must be 1 or 3");
  }
  png.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> interleaved(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, interleaved.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  const Shape s{channels, static_cast<int>(png.height), static_cast<int>(png.width)};
  std::vector<std::uint8_t> planar(s.size());
  const std::size_t plane = static_cast<std::size_t>(s.height) * s.width;
  for (int c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < plane; ++i) planar[c * plane + i] = interleaved[i * channels + c];
  }
  return ImageTensor::from_bytes(s, planar);
}

ImageTensor make_image_grid(std::span<const ImageTensor> images, int rows, int cols) {
  if (images.empty()) throw UsageError("image grid needs at least one image");
  if (rows <= 0 || cols <= 0 || static_cast<std::size_t>(rows) * cols < images.size()) {
    throw UsageError("grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " cannot hold " + std::to_string(images.size()) + " images");
  }
  const Shape cell = images.front().shape();
  for (const auto& im : images) {
    if (im.shape() != cell) throw UsageError("image grid: images must share one shape");
  }
  const Shape out{cell.channels, cell.height * rows, cell.width * cols};
  std::vector<float> px(out.size(), 0.0f);
  for (std::size_t k = 0; k < images.size(); ++k) {
    const int gr = static_cast<int>(k) / cols;
    const int gc = static_cast<int>(k) % cols;
    for (int c = 0; c < cell.channels; ++c) {
      for (int y = 0; y < cell.height; ++y) {
        for (int x = 0; x < cell.width; ++x) {
          const std::size_t oy = static_cast<std::size_t>(gr) * cell.height + y;
          const std::size_t ox = static_cast<std::size_t>(gc) * cell.width + x;
          px[(static_cast<std::size_t>(c) * out.height + oy) * out.width + ox] =
              images[k].at(c, y, x);
        }
      }
    }
  }
  return ImageTensor(out, std::move(px));
}

void save_image_grid(std::span<const ImageTensor> images, int rows, int cols,
                     const std::filesystem::path& path) {
  write_png(make_image_grid(images, rows, cols), path);
}

}  // namespace stegsan
