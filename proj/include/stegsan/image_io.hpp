#pragma once

#include <filesystem>
#include <span>

#include "stegsan/image.hpp"

namespace stegsan {

/// 8-bit PNG, gray or RGB depending on channel count.
void write_png(const ImageTensor& image, const std::filesystem::path& path);
/// Reads any PNG. Gray stays 1 channel unless `channels` is 3; colour
/// input is converted to gray when `channels` is 1. 0 keeps the file's
/// own colour type (gray or RGB).
ImageTensor read_png(const std::filesystem::path& path, int channels = 0);

/// Tile images into a rows x cols grid (row-major fill, blank cells black)
/// and write it as a PNG. All images must share a shape.
void save_image_grid(std::span<const ImageTensor> images, int rows, int cols,
                     const std::filesystem::path& path);
ImageTensor make_image_grid(std::span<const ImageTensor> images, int rows, int cols);

}  // namespace stegsan
