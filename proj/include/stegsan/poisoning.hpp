#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stegsan/classifier.hpp"
#include "stegsan/dataset.hpp"
#include "stegsan/deep_hiding.hpp"
#include "stegsan/vae.hpp"

namespace stegsan::experiments {

struct PoisonConfig {
  /// Share of training images replaced by relabeled containers.
  double poison_fraction = 0.4;
  /// Share of test images replaced by containers.
  double test_poison_fraction = 0.5;
  Seed seed{};

  void validate() const;
};

struct PoisonedDataset {
  LabeledDataset data;
  /// Sorted indices of the replaced records.
  std::vector<std::size_t> poisoned;
  /// Original label of every replaced record, parallel to `poisoned`.
  std::vector<std::uint8_t> original_labels;
  /// Training index of the secret hidden in each replaced record.
  std::vector<std::size_t> secrets;
};

/// floor(fraction * n).
std::size_t poison_count(std::size_t n, double fraction);

/// Replaces floor(fraction * N) training images with DDH containers whose
/// secret is drawn with replacement from the same set, relabeled to the
/// secret's label.
PoisonedDataset poison_dataset(const LabeledDataset& train, const steg::DeepHidingModel& ddh,
                               double fraction, Seed seed);

/// Mixed test set: floor(test_fraction * N) images become containers.
struct PoisonTestSet {
  std::vector<ImageTensor> images;
  std::vector<std::uint8_t> labels;         // true (cover) label
  std::vector<std::uint8_t> secret_labels;  // meaningful where is_container
  std::vector<bool> is_container;
};

PoisonTestSet make_poison_test_set(const LabeledDataset& test, const steg::DeepHidingModel& ddh,
                                   double test_fraction, Seed seed);

struct PoisonOutcome {
  double clean_accuracy = 0;  // %
  double attack_success = 0;  // %
  std::size_t clean_count = 0;
  std::size_t attack_count = 0;
  /// Containers whose secret label equals the cover label; they cannot
  /// distinguish attack from correct classification and are left out of
  /// the attack-success figure.
  std::size_t self_label_excluded = 0;
};

/// With `defense` set every test image is sanitized before classification.
PoisonOutcome evaluate_poisoning(const Classifier& classifier, const PoisonTestSet& test,
                                 const suds::VaeModel* defense);

struct PoisonReport {
  double clean_accuracy_no_defense = 0;
  double attack_success_no_defense = 0;
  double clean_accuracy_with_suds = 0;
  double attack_success_with_suds = 0;
  double resistance_gain = 0;
  std::size_t clean_count = 0;
  std::size_t attack_count = 0;
  std::size_t self_label_excluded = 0;

  std::string to_csv() const;
};

/// ((100 - s_suds) - (100 - s_none)) / (100 - s_none) * 100. Throws
/// DegenerateInputError when s_none is 100.
double resistance_gain(double attack_success_none, double attack_success_suds);

PoisonReport make_poison_report(const PoisonOutcome& none, const PoisonOutcome& suds);

}  // namespace stegsan::experiments
