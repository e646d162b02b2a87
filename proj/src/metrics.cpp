#include "stegsan/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "stegsan/error.hpp"

namespace stegsan {

double mse(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "mse");
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  double sum = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = (static_cast<double>(pa[i]) - static_cast<double>(pb[i])) * kMaxPixel;
    sum += d * d;
  }
  return sum / static_cast<double>(pa.size());
}

double psnr_from_mse(double mse_value) {
  if (mse_value < 0.0) throw UsageError("mse must be non-negative");
  if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(kMaxPixel * kMaxPixel / mse_value);
}

double psnr(const ImageTensor& a, const ImageTensor& b) { return psnr_from_mse(mse(a, b)); }

std::string_view to_string(SanitizerKind s) {
  switch (s) {
    case SanitizerKind::suds: return "suds";
    case SanitizerKind::gaussian: return "gaussian";
    case SanitizerKind::none: return "none";
  }
  return "?";
}

std::string_view to_string(HidingMethod m) {
  switch (m) {
    case HidingMethod::clean: return "clean";
    case HidingMethod::lsb: return "lsb";
    case HidingMethod::ddh: return "ddh";
    case HidingMethod::udh: return "udh";
  }
  return "?";
}

std::string_view to_string(MetricColumn c) {
  switch (c) {
    case MetricColumn::sanitized: return "sanitized";
    case MetricColumn::revealed: return "revealed";
    case MetricColumn::revealed_sanitized: return "revealed_sanitized";
  }
  return "?";
}

SanitizerKind parse_sanitizer(std::string_view s) {
  if (s == "suds") return SanitizerKind::suds;
  if (s == "gaussian" || s == "noise") return SanitizerKind::gaussian;
  if (s == "none") return SanitizerKind::none;
  throw UsageError("unknown sanitizer '" + std::string(s) + "'");
}

HidingMethod parse_method(std::string_view s) {
  if (s == "clean") return HidingMethod::clean;
  if (s == "lsb") return HidingMethod::lsb;
  if (s == "ddh") return HidingMethod::ddh;
  if (s == "udh") return HidingMethod::udh;
  throw UsageError("unknown hiding method '" + std::string(s) + "'");
}

MetricColumn parse_column(std::string_view s) {
  if (s == "sanitized") return MetricColumn::sanitized;
  if (s == "revealed") return MetricColumn::revealed;
  if (s == "revealed_sanitized") return MetricColumn::revealed_sanitized;
  throw UsageError("unknown metric column '" + std::string(s) + "'");
}

void MetricsReport::set(MetricKey key, double mean_mse, std::size_t count) {
  rows_[key] = MetricCell{mean_mse, psnr_from_mse(mean_mse), count};
}

const MetricCell& MetricsReport::at(MetricKey key) const {
  auto it = rows_.find(key);
  if (it == rows_.end()) {
    throw UsageError("metrics report has no row " + std::string(to_string(key.sanitizer)) + "/" +
                     std::string(to_string(key.method)) + "/" +
                     std::string(to_string(key.column)));
  }
  return it->second;
}

void MetricsReport::merge(const MetricsReport& other) {
  for (const auto& [k, v] : other.rows_) rows_[k] = v;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 10);
  (void)ec;
  return std::string(buf, end);
}

std::string MetricsReport::to_csv() const {
  std::string out = "sanitizer,method,column,mse,psnr\n";
  for (const auto& [k, v] : rows_) {
    out += std::string(to_string(k.sanitizer)) + "," + std::string(to_string(k.method)) + "," +
           std::string(to_string(k.column)) + "," + format_number(v.mse) + "," +
           format_number(v.psnr) + "\n";
  }
  return out;
}

void MetricsReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << to_csv();
  if (!f) throw IoError("write failed: " + path.string());
}

MetricsReport MetricsReport::from_csv(std::string_view text) {
  MetricsReport report;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "sanitizer,method,column,mse,psnr") {
    throw UsageError("metrics CSV: unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw UsageError("metrics CSV: malformed row '" + line + "'");
    const MetricKey key{parse_sanitizer(cells[0]), parse_method(cells[1]), parse_column(cells[2])};
    report.set(key, std::stod(cells[3]), 0);
  }
  return report;
}

MetricsReport MetricsReport::read_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return from_csv(ss.str());
}

}  // namespace stegsan
