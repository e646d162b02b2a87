#include "stegsan/dataset.hpp"

#include <fstream>
#include <iterator>

#include "stegsan/error.hpp"

namespace stegsan {
namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
constexpr std::size_t kCifarPixels = 3 * 32 * 32;

std::vector<std::uint8_t> read_file(const std::filesystem::path& file) {
  std::ifstream f(file, std::ios::binary);
  if (!f) throw IngestionError("cannot open dataset file " + file.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

std::filesystem::path locate(const std::filesystem::path& root,
                             std::initializer_list<const char*> subdirs, const char* file) {
  for (const char* sub : subdirs) {
    auto p = sub[0] ? root / sub / file : root / file;
    if (std::filesystem::exists(p)) return p;
  }
  return root / file;
}

}  // namespace

DatasetName parse_dataset_name(std::string_view s) {
  if (s == "mnist") return DatasetName::mnist;
  if (s == "cifar10" || s == "cifar-10") return DatasetName::cifar10;
  throw UsageError("unknown dataset '" + std::string(s) + "' (expected mnist|cifar10)");
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw UsageError("unknown split '" + std::string(s) + "' (expected train|test)");
}

std::string_view to_string(DatasetName n) { return n == DatasetName::mnist ? "mnist" : "cifar10"; }
std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

LabeledDataset LabeledDataset::head(std::size_t count) const {
  LabeledDataset out{name, split, {}, {}};
  const std::size_t n = std::min(count, size());
  out.images.assign(images.begin(), images.begin() + static_cast<std::ptrdiff_t>(n));
  out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

IdxImages read_idx_images(const std::filesystem::path& file) {
  const auto b = read_file(file);
  if (b.size() < 16 || be32(b, 0) != kIdxImagesMagic) {
    throw IngestionError("not an IDX image file (bad magic): " + file.string());
  }
  IdxImages out;
  const std::size_t count = be32(b, 4);
  out.rows = static_cast<int>(be32(b, 8));
  out.cols = static_cast<int>(be32(b, 12));
  const std::size_t px = static_cast<std::size_t>(out.rows) * out.cols;
  if (b.size() != 16 + count * px) {
    throw IngestionError("IDX image file truncated or oversized: " + file.string());
  }
  out.images.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto* start = b.data() + 16 + i * px;
    out.images[i].assign(start, start + px);
  }
  return out;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& file) {
  const auto b = read_file(file);
  if (b.size() < 8 || be32(b, 0) != kIdxLabelsMagic) {
    throw IngestionError("not an IDX label file (bad magic): " + file.string());
  }
  const std::size_t count = be32(b, 4);
  if (b.size() != 8 + count) throw IngestionError("IDX label file truncated: " + file.string());
  std::vector<std::uint8_t> labels(b.begin() + 8, b.end());
  for (auto l : labels) {
    if (l > 9) throw IngestionError("label out of range in " + file.string());
  }
  return labels;
}

void read_cifar_batch(const std::filesystem::path& file, LabeledDataset& into) {
  const auto b = read_file(file);
  constexpr std::size_t record = 1 + kCifarPixels;
  if (b.empty() || b.size() % record != 0) {
    throw IngestionError("CIFAR-10 batch size is not a multiple of 3073 bytes: " + file.string());
  }
  const Shape shape{3, 32, 32};
  for (std::size_t off = 0; off < b.size(); off += record) {
    if (b[off] > 9) throw IngestionError("CIFAR-10 label out of range in " + file.string());
    into.labels.push_back(b[off]);
    into.images.push_back(
        ImageTensor::from_bytes(shape, std::span(b.data() + off + 1, kCifarPixels)));
  }
}

LabeledDataset load_dataset(DatasetName name, Split split, const std::filesystem::path& root) {
  LabeledDataset ds{name, split, {}, {}};
  if (name == DatasetName::mnist) {
    const char* img = split == Split::train ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte";
    const char* lab = split == Split::train ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte";
    const auto img_path = locate(root, {"", "mnist"}, img);
    const auto lab_path = locate(root, {"", "mnist"}, lab);
    auto raw = read_idx_images(img_path);
    ds.labels = read_idx_labels(lab_path);
    if (raw.images.size() != ds.labels.size()) {
      throw IngestionError("image/label count mismatch between " + img_path.string() + " and " +
                           lab_path.string());
    }
    ds.images.reserve(raw.images.size());
    const Shape native{1, raw.rows, raw.cols};
    for (const auto& bytes : raw.images) {
      ds.images.push_back(
          resize_bilinear(ImageTensor::from_bytes(native, bytes), kImageSize, kImageSize));
    }
  } else {
    const std::initializer_list<const char*> subdirs = {"", "cifar-10-batches-bin", "cifar10"};
    if (split == Split::train) {
      for (int i = 1; i <= 5; ++i) {
        const std::string f = "data_batch_" + std::to_string(i) + ".bin";
        read_cifar_batch(locate(root, subdirs, f.c_str()), ds);
      }
    } else {
      read_cifar_batch(locate(root, subdirs, "test_batch.bin"), ds);
    }
  }
  return ds;
}

}  // namespace stegsan
