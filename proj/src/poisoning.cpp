#include "stegsan/poisoning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "stegsan/error.hpp"
#include "stegsan/metrics.hpp"

namespace stegsan::experiments {

namespace {

void require_fraction(double f, const char* name) {
  if (!(f >= 0.0 && f <= 1.0)) throw UsageError(std::string(name) + " must lie in [0, 1]");
}

std::vector<std::size_t> choose(std::size_t n, std::size_t k, Seed seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  RngStream rng(child_seed(seed, "select"));
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// DDH containers for covers[idx] with secrets drawn from `pool`.
std::vector<ImageTensor> containers_for(const steg::DeepHidingModel& ddh, const LabeledDataset& pool,
                                        const std::vector<std::size_t>& idx, const std::vector<std::size_t>& secret,
                                        const LabeledDataset& covers) {
  std::vector<ImageTensor> out;
  out.reserve(idx.size());
  constexpr std::size_t chunk = 256;
  for (std::size_t a = 0; a < idx.size(); a += chunk) {
    std::vector<const ImageTensor*> c, s;
    for (std::size_t i = a; i < std::min(idx.size(), a + chunk); ++i) {
      c.push_back(&covers.images[idx[i]]);
      s.push_back(&pool.images[secret[i]]);
    }
    for (auto& x : ddh.hide_batch(c, s)) out.push_back(std::move(x));
  }
  return out;
}

double percent(std::size_t hits, std::size_t total) {
  return total ? 100.0 * static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

}  // namespace

std::size_t poison_count(std::size_t n, double fraction) {
  require_fraction(fraction, "poison fraction");
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
}

void PoisonConfig::validate() const {
  require_fraction(poison_fraction, "poison_fraction");
  require_fraction(test_poison_fraction, "test_poison_fraction");
}

PoisonedDataset poison_dataset(const LabeledDataset& train, const steg::DeepHidingModel& ddh, double fraction,
                               Seed seed) {
  require_fraction(fraction, "poison_fraction");
  const std::size_t n = train.size();
  const std::size_t k = poison_count(n, fraction);
  PoisonedDataset out{train, choose(n, k, child_seed(seed, "train")), {}, {}};
  if (k == 0) return out;

  RngStream pick(child_seed(seed, "train-secret"));
  std::vector<std::size_t> secret(k);
  for (auto& s : secret) s = pick.index(n);
  auto containers = containers_for(ddh, train, out.poisoned, secret, train);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t i = out.poisoned[j];
    out.original_labels.push_back(out.data.labels[i]);
    out.data.images[i] = std::move(containers[j]);
    out.data.labels[i] = train.labels[secret[j]];
  }
  out.secrets = std::move(secret);
  return out;
}

PoisonTestSet make_poison_test_set(const LabeledDataset& test, const steg::DeepHidingModel& ddh,
                                   double test_fraction, Seed seed) {
  require_fraction(test_fraction, "test_poison_fraction");
  const std::size_t n = test.size();
  const std::size_t k = poison_count(n, test_fraction);
  const auto idx = choose(n, k, child_seed(seed, "test"));

  PoisonTestSet out{test.images, test.labels, test.labels, std::vector<bool>(n, false)};
  RngStream pick(child_seed(seed, "test-secret"));
  std::vector<std::size_t> secret(k);
  for (auto& s : secret) s = pick.index(n);
  auto containers = containers_for(ddh, test, idx, secret, test);
  for (std::size_t j = 0; j < k; ++j) {
    out.images[idx[j]] = std::move(containers[j]);
    out.secret_labels[idx[j]] = test.labels[secret[j]];
    out.is_container[idx[j]] = true;
  }
  return out;
}

PoisonOutcome evaluate_poisoning(const Classifier& classifier, const PoisonTestSet& test,
                                 const suds::VaeModel* defense) {
  std::vector<ImageTensor> inputs;
  if (defense) {
    constexpr std::size_t chunk = 256;
    inputs.reserve(test.images.size());
    for (std::size_t a = 0; a < test.images.size(); a += chunk) {
      std::vector<const ImageTensor*> xs;
      for (std::size_t i = a; i < std::min(test.images.size(), a + chunk); ++i) xs.push_back(&test.images[i]);
      for (auto& x : defense->sanitize_batch(xs)) inputs.push_back(std::move(x));
    }
  }
  const auto pred = classifier.predict_all(defense ? std::span<const ImageTensor>(inputs) : test.images);

  PoisonOutcome o;
  std::size_t clean_hits = 0, attack_hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!test.is_container[i]) {
      ++o.clean_count;
      clean_hits += pred[i] == test.labels[i];
    } else if (test.secret_labels[i] == test.labels[i]) {
      ++o.self_label_excluded;
    } else {
      ++o.attack_count;
      attack_hits += pred[i] == test.secret_labels[i];
    }
  }
  o.clean_accuracy = percent(clean_hits, o.clean_count);
  o.attack_success = percent(attack_hits, o.attack_count);
  return o;
}

double resistance_gain(double s_none, double s_suds) {
  if (!(s_none >= 0 && s_none <= 100 && s_suds >= 0 && s_suds <= 100)) {
    throw UsageError("attack success rates must be percentages in [0, 100]");
  }
  if (s_none == 100.0) throw DegenerateInputError("resistance gain undefined when attack success is 100%");
  return ((100.0 - s_suds) - (100.0 - s_none)) / (100.0 - s_none) * 100.0;
}

PoisonReport make_poison_report(const PoisonOutcome& none, const PoisonOutcome& suds) {
  PoisonReport r;
  r.clean_accuracy_no_defense = none.clean_accuracy;
  r.attack_success_no_defense = none.attack_success;
  r.clean_accuracy_with_suds = suds.clean_accuracy;
  r.attack_success_with_suds = suds.attack_success;
  r.resistance_gain = resistance_gain(none.attack_success, suds.attack_success);
  r.clean_count = none.clean_count;
  r.attack_count = none.attack_count;
  r.self_label_excluded = none.self_label_excluded;
  return r;
}

std::string PoisonReport::to_csv() const {
  std::ostringstream os;
  os << "metric,value\n"
     << "clean_accuracy_no_defense," << format_number(clean_accuracy_no_defense) << '\n'
     << "attack_success_no_defense," << format_number(attack_success_no_defense) << '\n'
     << "clean_accuracy_with_suds," << format_number(clean_accuracy_with_suds) << '\n'
     << "attack_success_with_suds," << format_number(attack_success_with_suds) << '\n'
     << "resistance_gain," << format_number(resistance_gain) << '\n'
     << "clean_count," << clean_count << '\n'
     << "attack_count," << attack_count << '\n'
     << "self_label_excluded," << self_label_excluded << '\n';
  return os.str();
}

}  // namespace stegsan::experiments
