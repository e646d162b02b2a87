#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "stegsan/image.hpp"

namespace stegsan {

enum class DatasetName { mnist, cifar10 };
enum class Split { train, test };

DatasetName parse_dataset_name(std::string_view s);
Split parse_split(std::string_view s);
std::string_view to_string(DatasetName n);
std::string_view to_string(Split s);

/// Canonical working size; MNIST's 28x28 digits are resized up to it.
inline constexpr int kImageSize = 32;

struct LabeledDataset {
  DatasetName name = DatasetName::mnist;
  Split split = Split::train;
  std::vector<ImageTensor> images;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return images.size(); }
  Shape shape() const { return images.empty() ? Shape{} : images.front().shape(); }
  /// First `count` items (or all, if fewer).
  LabeledDataset head(std::size_t count) const;
};

/// Reads MNIST IDX files or CIFAR-10 binary batches from `root` (or the
/// conventional sub-directory `root/mnist`, `root/cifar-10-batches-bin`).
/// Throws IngestionError naming the offending file.
LabeledDataset load_dataset(DatasetName name, Split split, const std::filesystem::path& root);

struct IdxImages {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<std::uint8_t>> images;
};
IdxImages read_idx_images(const std::filesystem::path& file);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& file);

/// One CIFAR-10 batch: records of 1 label byte + 3072 pixel bytes (R, G, B
/// planes of 32x32).
void read_cifar_batch(const std::filesystem::path& file, LabeledDataset& into);

}  // namespace stegsan
