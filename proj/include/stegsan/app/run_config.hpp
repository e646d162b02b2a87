#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stegsan/classifier.hpp"
#include "stegsan/dataset.hpp"
#include "stegsan/deep_hiding.hpp"
#include "stegsan/lsb.hpp"
#include "stegsan/noise.hpp"
#include "stegsan/poisoning.hpp"
#include "stegsan/vae.hpp"

namespace stegsan::app {

inline constexpr int kConfigSchemaVersion = 1;
/// Overrides the default dataset root; --data-root and config files win.
inline constexpr const char* kDataRootEnv = "STEGSAN_DATA_ROOT";

enum class ValueType { integer, unsigned_integer, real, boolean, text };

struct KeySpec {
  std::string key;
  ValueType type;
  std::string default_value;
  std::string help;
};

const std::vector<KeySpec>& config_schema();

/// Flat key = value settings. Precedence, lowest first: schema defaults,
/// the desk-scale preset, a config file, explicit set() calls (command-line
/// flags). Unknown keys and malformed values are usage errors.
class RunConfig {
 public:
  RunConfig();

  void set(const std::string& key, const std::string& value);
  /// Parses `key=value` (used by repeated --set flags).
  void set_assignment(const std::string& assignment);
  void load_file(const std::filesystem::path& path);
  bool is_set(const std::string& key) const { return explicit_.contains(key); }

  std::string text(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;

  /// Resolved values (desk-scale preset applied), one per line, sorted.
  std::string to_text() const;
  void write(const std::filesystem::path& path) const;

  Seed seed() const { return Seed{unsigned_integer("seed")}; }
  bool desk_scale() const { return boolean("desk_scale"); }
  DatasetName dataset() const;
  std::filesystem::path data_root() const;
  /// 0 means the whole split.
  std::size_t train_limit() const;
  std::size_t test_limit() const;

  suds::VaeConfig vae_config(int channels) const;
  steg::DeepHidingConfig deep_config(steg::DeepMode mode, int channels) const;
  experiments::ClassifierConfig classifier_config(int channels) const;
  steg::LsbConfig lsb_config() const;
  steg::NoiseConfig noise_config() const;
  experiments::PoisonConfig poison_config() const;

 private:
  const KeySpec& spec(const std::string& key) const;
  std::string resolved(const std::string& key) const;

  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

/// Loads the configured split, truncated to the configured limit.
LabeledDataset load_configured(const RunConfig& cfg, Split split);

}  // namespace stegsan::app
