#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <tuple>

#include "stegsan/image.hpp"

namespace stegsan {

inline constexpr double kMaxPixel = 255.0;

/// Mean squared error on byte scale: both images are multiplied by 255
/// before differencing.
double mse(const ImageTensor& a, const ImageTensor& b);

/// 10 log10(255^2 / mse). Returns +infinity when mse == 0, which callers
/// render as "identical images".
double psnr_from_mse(double mse_value);
double psnr(const ImageTensor& a, const ImageTensor& b);

enum class SanitizerKind { suds, gaussian, none };
enum class HidingMethod { clean, lsb, ddh, udh };
/// Table columns: input vs sanitized, secret vs revealed, secret vs
/// revealed-after-sanitization.
enum class MetricColumn { sanitized, revealed, revealed_sanitized };

std::string_view to_string(SanitizerKind s);
std::string_view to_string(HidingMethod m);
std::string_view to_string(MetricColumn c);
SanitizerKind parse_sanitizer(std::string_view s);
HidingMethod parse_method(std::string_view s);
MetricColumn parse_column(std::string_view s);

struct MetricCell {
  double mse = 0.0;
  double psnr = 0.0;
  std::size_t count = 0;
};

struct MetricKey {
  SanitizerKind sanitizer;
  HidingMethod method;
  MetricColumn column;

  auto tie() const { return std::tie(sanitizer, method, column); }
  friend bool operator<(const MetricKey& a, const MetricKey& b) { return a.tie() < b.tie(); }
  friend bool operator==(const MetricKey& a, const MetricKey& b) { return a.tie() == b.tie(); }
};

/// Aggregated MSE/PSNR keyed like the sanitization table. PSNR is always
/// derived from the aggregated MSE so the two stay consistent.
class MetricsReport {
 public:
  void set(MetricKey key, double mean_mse, std::size_t count);
  bool contains(MetricKey key) const { return rows_.contains(key); }
  const MetricCell& at(MetricKey key) const;
  const std::map<MetricKey, MetricCell>& rows() const { return rows_; }
  void merge(const MetricsReport& other);

  /// Header: sanitizer,method,column,mse,psnr
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
  static MetricsReport from_csv(std::string_view text);
  static MetricsReport read_csv(const std::filesystem::path& path);

 private:
  std::map<MetricKey, MetricCell> rows_;
};

/// Running mean of MSE values, summed in double in insertion order.
class MseAccumulator {
 public:
  void add(double v) {
    sum_ += v;
    ++count_;
  }
  double mean() const { return count_ ? sum_ / static_cast<double>(count_) : 0.0; }
  std::size_t count() const { return count_; }

 private:
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

std::string format_number(double v);

}  // namespace stegsan
