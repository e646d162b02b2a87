#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "stegsan/error.hpp"
#include "stegsan/image.hpp"
#include "stegsan/image_io.hpp"
#include "stegsan/metrics.hpp"
#include "stegsan/rng.hpp"

using namespace stegsan;

namespace {

ImageTensor random_image(Shape s, std::mt19937_64& g) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> px(s.size());
  for (auto& p : px) p = u(g);
  return ImageTensor(s, std::move(px));
}

std::filesystem::path temp_dir(const char* name) {
  auto d = std::filesystem::temp_directory_path() / ("stegsan_test_" + std::string(name));
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("ImageTensor rejects invalid shapes and out-of-range pixels") {
  CHECK_THROWS_AS(ImageTensor(Shape{2, 4, 4}), UsageError);
  CHECK_THROWS_AS(ImageTensor(Shape{1, 0, 4}), UsageError);
  CHECK_THROWS_AS(ImageTensor(Shape{1, 1, 2}, {0.5f}), UsageError);
  CHECK_THROWS_AS(ImageTensor(Shape{1, 1, 2}, {0.5f, 1.5f}), UsageError);
  CHECK_THROWS_AS(ImageTensor(Shape{1, 1, 1}, {-0.01f}), UsageError);
  CHECK_NOTHROW(ImageTensor(Shape{3, 2, 2}));
}

TEST_CASE("byte round trip moves no pixel by more than 1/510") {
  std::mt19937_64 g(7);
  for (int t = 0; t < 20; ++t) {
    const auto x = random_image({3, 8, 8}, g);
    const auto back = ImageTensor::from_bytes(x.shape(), x.to_bytes());
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(back.pixels()[i] - x.pixels()[i]) <= 1.0f / 510.0f + 1e-7f);
    }
  }
}

TEST_CASE("clip_unit clamps into the unit interval") {
  const std::vector<float> raw = {-0.3f, 0.5f, 1.7f, 0.0f};
  const auto y = clip_unit(Shape{1, 2, 2}, raw);
  CHECK(y.pixels()[0] == 0.0f);
  CHECK(y.pixels()[1] == 0.5f);
  CHECK(y.pixels()[2] == 1.0f);
  CHECK(y.pixels()[3] == 0.0f);
}

TEST_CASE("mse and psnr closed forms") {
  const Shape s{1, 5, 7};
  const auto zeros = ImageTensor(s);
  const auto ones = ImageTensor::filled(s, 1.0f);
  CHECK(mse(zeros, zeros) == 0.0);
  CHECK(mse(zeros, ones) == doctest::Approx(65025.0));
  CHECK(psnr_from_mse(65025.0) == doctest::Approx(0.0));
  CHECK(psnr_from_mse(650.25) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(psnr_from_mse(0.273) == doctest::Approx(53.77).epsilon(0.01 / 53.77));
  CHECK(std::isinf(psnr(ones, ones)));
  CHECK_THROWS_AS(mse(zeros, ImageTensor(Shape{1, 7, 5})), UsageError);
}

TEST_CASE("mse is symmetric and psnr reconstructs mse") {
  std::mt19937_64 g(11);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_image({1, 6, 6}, g);
    const auto b = random_image({1, 6, 6}, g);
    const double m = mse(a, b);
    CHECK(m == mse(b, a));
    CHECK(m >= 0.0);
    const double back = 255.0 * 255.0 / std::pow(10.0, psnr(a, b) / 10.0);
    CHECK(std::abs(back - m) <= 1e-6 * m);
  }
}

TEST_CASE("bilinear resize keeps constant images constant") {
  for (float v : {0.0f, 0.25f, 0.6f, 1.0f}) {
    const auto x = ImageTensor::filled({1, 28, 28}, v);
    const auto y = resize_bilinear(x, 32, 32);
    CHECK(y.shape() == Shape{1, 32, 32});
    for (float p : y.pixels()) CHECK(p == doctest::Approx(v).epsilon(1e-6));
  }
}

TEST_CASE("MetricsReport keeps psnr consistent and round-trips through CSV") {
  MetricsReport r;
  r.set({SanitizerKind::suds, HidingMethod::lsb, MetricColumn::revealed_sanitized}, 62.72, 10);
  r.set({SanitizerKind::gaussian, HidingMethod::clean, MetricColumn::sanitized}, 0.09, 10);
  r.set({SanitizerKind::none, HidingMethod::ddh, MetricColumn::revealed}, 0.0, 10);
  for (const auto& [k, v] : r.rows()) {
    if (v.mse > 0) CHECK(v.psnr == doctest::Approx(10 * std::log10(65025.0 / v.mse)).epsilon(1e-12));
  }
  const std::string csv = r.to_csv();
  CHECK(csv.rfind("sanitizer,method,column,mse,psnr\n", 0) == 0);
  CHECK(csv.find("none,ddh,revealed,0,inf") != std::string::npos);
  const auto back = MetricsReport::from_csv(csv);
  CHECK(back.to_csv() == csv);
  CHECK_THROWS_AS(MetricsReport::from_csv("bad,header\n"), UsageError);
}

TEST_CASE("child seeds are deterministic and distinct") {
  const Seed root{42};
  CHECK(child_seed(root, "noise") == child_seed(root, "noise"));
  CHECK(!(child_seed(root, "noise") == child_seed(root, "weights")));
  CHECK(!(child_seed(root, "noise", 1) == child_seed(root, "noise", 2)));
  RngStream a(child_seed(root, "x")), b(child_seed(root, "x"));
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
}

TEST_CASE("image grids have the expected geometry") {
  const auto dir = temp_dir("grid");
  const auto one = ImageTensor::filled({1, 32, 32}, 0.5f);
  save_image_grid(std::span(&one, 1), 1, 1, dir / "one.png");
  CHECK(read_png(dir / "one.png").shape() == Shape{1, 32, 32});

  std::vector<ImageTensor> eight(8, one);
  const auto g = make_image_grid(eight, 2, 4);
  CHECK(g.shape() == Shape{1, 64, 128});

  // cover, secret, container, sanitized, revealed-sanitized strip
  std::vector<ImageTensor> strip(5, ImageTensor::filled({3, 32, 32}, 0.2f));
  save_image_grid(strip, 1, 5, dir / "strip.png");
  CHECK(read_png(dir / "strip.png").shape() == Shape{3, 32, 160});

  CHECK_THROWS_AS(make_image_grid(eight, 2, 3), UsageError);
  CHECK_THROWS_AS(save_image_grid(std::span(&one, 1), 1, 1, "/nonexistent-dir/x.png"), IoError);
}

TEST_CASE("PNG round trip is byte exact") {
  std::mt19937_64 g(3);
  const auto dir = temp_dir("png");
  for (int c : {1, 3}) {
    const auto x = random_image({c, 9, 13}, g);
    write_png(x, dir / "x.png");
    const auto y = read_png(dir / "x.png");
    CHECK(y.to_bytes() == x.to_bytes());
  }
}
