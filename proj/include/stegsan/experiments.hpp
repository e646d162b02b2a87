#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "stegsan/dataset.hpp"
#include "stegsan/deep_hiding.hpp"
#include "stegsan/lsb.hpp"
#include "stegsan/metrics.hpp"
#include "stegsan/noise.hpp"
#include "stegsan/vae.hpp"

namespace stegsan::experiments {

/// One hiding instance: a cover, the secret hidden in it and the result.
struct StegoRecord {
  ImageTensor cover;
  std::uint8_t cover_label = 0;
  ImageTensor secret;
  std::uint8_t secret_label = 0;
  ImageTensor container;
  HidingMethod method = HidingMethod::lsb;
  std::size_t cover_index = 0;
  std::size_t secret_index = 0;
};

/// Hiding back-ends. Deep models are only needed for their own method.
struct HidingModels {
  steg::LsbConfig lsb{};
  const steg::DeepHidingModel* ddh = nullptr;
  const steg::DeepHidingModel* udh = nullptr;
};

inline constexpr HidingMethod kHidingMethods[] = {HidingMethod::lsb, HidingMethod::ddh, HidingMethod::udh};

/// Secret index for every cover, uniform with replacement, from the
/// "pairing" child of `seed`. Independent of the hiding method.
std::vector<std::size_t> draw_pairing(std::size_t count, Seed seed);

std::vector<StegoRecord> generate_containers(const LabeledDataset& test, HidingMethod method,
                                             const HidingModels& models, Seed seed);

/// Batched hide/reveal for any method.
std::vector<ImageTensor> hide_all(HidingMethod method, const HidingModels& models,
                                  std::span<const ImageTensor* const> covers,
                                  std::span<const ImageTensor* const> secrets);
std::vector<ImageTensor> reveal_all(HidingMethod method, const HidingModels& models,
                                    std::span<const ImageTensor* const> containers);

/// SUDS, additive noise, or the identity.
struct Sanitizer {
  SanitizerKind kind = SanitizerKind::none;
  const suds::VaeModel* vae = nullptr;
  steg::NoiseConfig noise{};

  /// `stream` names the noise stream; image i draws from child (stream, i)
  /// of noise.seed, so results do not depend on batching.
  std::vector<ImageTensor> apply(std::span<const ImageTensor* const> xs, std::string_view stream) const;
};

using RecordSet = std::map<HidingMethod, std::vector<StegoRecord>>;

/// Fills the clean row (covers vs sanitized covers) and, per method, the
/// sanitized, revealed and revealed-sanitized columns.
MetricsReport evaluate_sanitizer(std::span<const ImageTensor> covers, const RecordSet& records,
                                 const Sanitizer& sanitizer, const HidingModels& models);

struct AblationPoint {
  int latent = 0;
  MetricsReport report;
};

using AblationModelSink = std::function<void(int latent, suds::VaeModel&& model)>;

/// Trains one SUDS per latent size (otherwise identical config) and scores
/// each on the same covers and records.
std::vector<AblationPoint> latent_ablation(const LabeledDataset& train, std::span<const ImageTensor> covers,
                                           const RecordSet& records, const HidingModels& models,
                                           const suds::VaeConfig& base, std::span<const int> sizes,
                                           const AblationModelSink& keep = {});

inline constexpr int kAblationSizes[] = {2, 4, 8, 16, 32, 64, 128};

/// Per-(digit, image type) statistics of encoder means. Covers use
/// HidingMethod::clean.
struct LatentStats {
  std::uint8_t digit = 0;
  HidingMethod type = HidingMethod::clean;
  std::size_t count = 0;
  std::vector<double> mean;
  std::vector<double> stddev;
};

std::vector<LatentStats> latent_probe(const suds::VaeModel& model, const RecordSet& records);

struct OverlapResult {
  std::uint8_t digit = 0;
  HidingMethod method = HidingMethod::lsb;
  /// Features whose cover and container means differ by less than
  /// `threshold` pooled standard deviations.
  int overlapping = 0;
  int features = 0;
  double max_separation = 0;
};

std::vector<OverlapResult> latent_overlap(std::span<const LatentStats> stats, double threshold = 0.5);

std::string latent_stats_csv(std::span<const LatentStats> stats);

}  // namespace stegsan::experiments
