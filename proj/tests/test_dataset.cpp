#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "stegsan/dataset.hpp"
#include "stegsan/error.hpp"

using namespace stegsan;

namespace {

void put_be32(std::ofstream& f, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

std::filesystem::path fixture_dir(const char* name) {
  auto d = std::filesystem::temp_directory_path() / ("stegsan_ds_" + std::string(name));
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

// n synthetic 28x28 digits; image i is constant (i * 10) with label i % 10.
void write_mnist(const std::filesystem::path& dir, const char* prefix, int n) {
  std::ofstream img(dir / (std::string(prefix) + "-images-idx3-ubyte"), std::ios::binary);
  put_be32(img, 0x00000803);
  put_be32(img, static_cast<std::uint32_t>(n));
  put_be32(img, 28);
  put_be32(img, 28);
  for (int i = 0; i < n; ++i) {
    const std::string px(28 * 28, static_cast<char>(i * 10));
    img.write(px.data(), static_cast<std::streamsize>(px.size()));
  }
  std::ofstream lab(dir / (std::string(prefix) + "-labels-idx1-ubyte"), std::ios::binary);
  put_be32(lab, 0x00000801);
  put_be32(lab, static_cast<std::uint32_t>(n));
  for (int i = 0; i < n; ++i) lab.put(static_cast<char>(i % 10));
}

}  // namespace

TEST_CASE("MNIST IDX files load resized to 32x32 with labels preserved") {
  const auto dir = fixture_dir("mnist");
  write_mnist(dir, "train", 12);
  write_mnist(dir, "t10k", 5);
  const auto train = load_dataset(DatasetName::mnist, Split::train, dir);
  const auto test = load_dataset(DatasetName::mnist, Split::test, dir);
  CHECK(train.size() == 12);
  CHECK(test.size() == 5);
  CHECK(train.images.size() == train.labels.size());
  CHECK(train.shape() == Shape{1, 32, 32});
  CHECK(train.labels[7] == 7);
  // constant digits stay constant after resizing
  CHECK(train.images[3].at(0, 16, 16) == doctest::Approx(30.0f / 255.0f));

  const auto again = load_dataset(DatasetName::mnist, Split::train, dir);
  CHECK(again.images == train.images);
  CHECK(again.labels == train.labels);
}

TEST_CASE("corrupt or missing MNIST files name the offending file") {
  const auto dir = fixture_dir("mnist_bad");
  CHECK_THROWS_WITH_AS(load_dataset(DatasetName::mnist, Split::train, dir),
                       doctest::Contains("train-images-idx3-ubyte"), IngestionError);
  write_mnist(dir, "train", 3);
  {
    std::ofstream f(dir / "train-images-idx3-ubyte", std::ios::binary | std::ios::in);
    put_be32(f, 0x12345678);
  }
  CHECK_THROWS_WITH_AS(load_dataset(DatasetName::mnist, Split::train, dir),
                       doctest::Contains("bad magic"), IngestionError);
  write_mnist(dir, "train", 3);
  std::filesystem::resize_file(dir / "train-images-idx3-ubyte", 16 + 28 * 28 * 2);
  CHECK_THROWS_WITH_AS(load_dataset(DatasetName::mnist, Split::train, dir),
                       doctest::Contains("truncated"), IngestionError);
}

TEST_CASE("CIFAR-10 binary batches decode planar RGB") {
  const auto dir = fixture_dir("cifar");
  {
    std::ofstream f(dir / "test_batch.bin", std::ios::binary);
    for (int r = 0; r < 4; ++r) {
      f.put(static_cast<char>(r));
      for (int c = 0; c < 3; ++c) {
        const std::string plane(1024, static_cast<char>(r * 40 + c * 10));
        f.write(plane.data(), 1024);
      }
    }
  }
  const auto ds = load_dataset(DatasetName::cifar10, Split::test, dir);
  CHECK(ds.size() == 4);
  CHECK(ds.shape() == Shape{3, 32, 32});
  CHECK(ds.labels[2] == 2);
  CHECK(ds.images[2].at(1, 5, 5) == doctest::Approx(90.0f / 255.0f));
  CHECK(ds.images[3].at(2, 31, 31) == doctest::Approx(140.0f / 255.0f));

  std::filesystem::resize_file(dir / "test_batch.bin", 3073 * 2 + 7);
  CHECK_THROWS_AS(load_dataset(DatasetName::cifar10, Split::test, dir), IngestionError);
  CHECK_THROWS_WITH_AS(load_dataset(DatasetName::cifar10, Split::train, dir),
                       doctest::Contains("data_batch_1.bin"), IngestionError);
}

TEST_CASE("unknown dataset names are usage errors") {
  CHECK_THROWS_AS(parse_dataset_name("svhn"), UsageError);
  CHECK_THROWS_AS(parse_split("validation"), UsageError);
  CHECK(parse_dataset_name("cifar10") == DatasetName::cifar10);
}

TEST_CASE("bundled MNIST split, when present, has the canonical layout") {
  const std::filesystem::path root = STEGSAN_TEST_DATA_ROOT;
  if (!std::filesystem::exists(root / "mnist" / "t10k-images-idx3-ubyte")) return;
  const auto test = load_dataset(DatasetName::mnist, Split::test, root);
  CHECK(test.size() == test.labels.size());
  CHECK(test.size() >= 1000);
  CHECK(test.shape() == Shape{1, 32, 32});
}
