#include "stegsan/app/run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stegsan/error.hpp"

namespace stegsan::app {

namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc{} && r.ptr == end;
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") return out = true, true;
  if (s == "false" || s == "0" || s == "no") return out = false, true;
  return false;
}

// Applied by --desk-scale to keys the user did not set.
const std::map<std::string, std::string>& desk_preset() {
  static const std::map<std::string, std::string> p = {
      {"train_limit", "10000"}, {"suds.epochs", "20"}, {"deep.epochs", "30"}};
  return p;
}

}  // namespace

const std::vector<KeySpec>& config_schema() {
  using enum ValueType;
  static const std::vector<KeySpec> s = {
      {"schema_version", integer, "1", "config file schema version"},
      {"seed", unsigned_integer, "1", "root seed for every random stream"},
      {"dataset", text, "mnist", "mnist or cifar10"},
      {"data_root", text, "", "dataset directory (default: $STEGSAN_DATA_ROOT, else ./data)"},
      {"desk_scale", boolean, "false", "10000 training images, 20 SUDS epochs, 30 DDH/UDH epochs"},
      {"train_limit", integer, "0", "use only the first N training images (0 = all)"},
      {"test_limit", integer, "0", "use only the first N test images (0 = all)"},
      {"suds.latent", integer, "128", "latent features n"},
      {"suds.epochs", integer, "100", "SUDS training epochs"},
      {"suds.batch_size", integer, "128", "SUDS batch size"},
      {"suds.learning_rate", real, "0.0001", "SUDS Adam learning rate"},
      {"suds.width", integer, "32", "channels of the first encoder stage"},
      {"suds.sample_at_inference", boolean, "false", "decode a sampled z instead of the mean"},
      {"deep.epochs", integer, "100", "DDH/UDH training epochs"},
      {"deep.batch_size", integer, "44", "DDH/UDH batch size"},
      {"deep.beta", real, "0.75", "weight of the secret reconstruction term"},
      {"deep.learning_rate", real, "0.0001", "DDH/UDH Adam learning rate"},
      {"deep.width", integer, "16", "base channel width of hide/reveal networks"},
      {"deep.batch_norm", boolean, "true", "batch normalisation in hide/reveal networks"},
      {"lsb.k", integer, "4", "secret bit-planes for LSB hiding"},
      {"noise.mu", real, "0", "Gaussian sanitizer mean (unit scale)"},
      {"noise.sigma", real, "0.02", "Gaussian sanitizer standard deviation (unit scale)"},
      {"poison.fraction", real, "0.4", "share of training images poisoned"},
      {"poison.test_fraction", real, "0.5", "share of test images replaced by containers"},
      {"classifier.epochs", integer, "30", "classifier training epochs"},
      {"classifier.batch_size", integer, "64", "classifier batch size"},
      {"classifier.learning_rate", real, "0.001", "classifier Adam learning rate"},
  };
  return s;
}

RunConfig::RunConfig() {
  for (const auto& k : config_schema()) values_[k.key] = k.default_value;
}

const KeySpec& RunConfig::spec(const std::string& key) const {
  for (const auto& k : config_schema()) {
    if (k.key == key) return k;
  }
  throw UsageError("unknown config key '" + key + "'");
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const auto& s = spec(key);
  const std::string value = trim(raw);
  bool ok = true;
  switch (s.type) {
    case ValueType::integer: {
      long long v;
      ok = parse_number(value, v);
      break;
    }
    case ValueType::unsigned_integer: {
      std::uint64_t v;
      ok = parse_number(value, v);
      break;
    }
    case ValueType::real: {
      double v;
      ok = parse_number(value, v);
      break;
    }
    case ValueType::boolean: {
      bool v;
      ok = parse_bool(value, v);
      break;
    }
    case ValueType::text:
      break;
  }
  if (!ok) throw UsageError("invalid value '" + value + "' for config key '" + key + "'");
  if (key == "schema_version" && value != std::to_string(kConfigSchemaVersion)) {
    throw UsageError("unsupported config schema_version " + value);
  }
  if (key == "dataset") parse_dataset_name(value);
  values_[key] = value;
  explicit_.insert(key);
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file " + path.string());
  std::string line;
  int lineno = 0;
  bool saw_schema = false;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    // flags given before the file still win
    if (explicit_.contains(key) && key != "schema_version") {
      spec(key);
      continue;
    }
    try {
      set(key, t.substr(eq + 1));
    } catch (const UsageError& e) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    saw_schema = saw_schema || key == "schema_version";
  }
  if (!saw_schema) throw UsageError(path.string() + ": missing schema_version");
}

std::string RunConfig::resolved(const std::string& key) const {
  spec(key);
  if (!explicit_.contains(key) && values_.at("desk_scale") == "true") {
    auto it = desk_preset().find(key);
    if (it != desk_preset().end()) return it->second;
  }
  return values_.at(key);
}

std::string RunConfig::text(const std::string& key) const { return resolved(key); }

long long RunConfig::integer(const std::string& key) const {
  long long v = 0;
  parse_number(resolved(key), v);
  return v;
}

std::uint64_t RunConfig::unsigned_integer(const std::string& key) const {
  std::uint64_t v = 0;
  parse_number(resolved(key), v);
  return v;
}

double RunConfig::real(const std::string& key) const {
  double v = 0;
  parse_number(resolved(key), v);
  return v;
}

bool RunConfig::boolean(const std::string& key) const {
  bool v = false;
  parse_bool(resolved(key), v);
  return v;
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "# stegsan resolved run config\n";
  os << "schema_version = " << kConfigSchemaVersion << '\n';
  for (const auto& [key, _] : values_) {
    if (key == "schema_version") continue;
    std::string v = resolved(key);
    if (key == "data_root") v = data_root().string();
    os << key << " = " << v << '\n';
  }
  return os.str();
}

void RunConfig::write(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::trunc);
  f << to_text();
  if (!f) throw IoError("cannot write " + path.string());
}

DatasetName RunConfig::dataset() const { return parse_dataset_name(text("dataset")); }

std::filesystem::path RunConfig::data_root() const {
  const std::string v = text("data_root");
  if (!v.empty()) return v;
  if (const char* env = std::getenv(kDataRootEnv); env && *env) return env;
  return "data";
}

std::size_t RunConfig::train_limit() const {
  const auto v = integer("train_limit");
  if (v < 0) throw UsageError("train_limit must be >= 0");
  return static_cast<std::size_t>(v);
}

std::size_t RunConfig::test_limit() const {
  const auto v = integer("test_limit");
  if (v < 0) throw UsageError("test_limit must be >= 0");
  return static_cast<std::size_t>(v);
}

suds::VaeConfig RunConfig::vae_config(int channels) const {
  suds::VaeConfig c;
  c.latent = static_cast<int>(integer("suds.latent"));
  c.epochs = static_cast<int>(integer("suds.epochs"));
  c.batch_size = static_cast<int>(integer("suds.batch_size"));
  c.learning_rate = real("suds.learning_rate");
  c.width = static_cast<int>(integer("suds.width"));
  c.sample_at_inference = boolean("suds.sample_at_inference");
  c.channels = channels;
  c.seed = child_seed(seed(), "suds");
  c.validate();
  return c;
}

steg::DeepHidingConfig RunConfig::deep_config(steg::DeepMode mode, int channels) const {
  steg::DeepHidingConfig c;
  c.mode = mode;
  c.epochs = static_cast<int>(integer("deep.epochs"));
  c.batch_size = static_cast<int>(integer("deep.batch_size"));
  c.beta = real("deep.beta");
  c.learning_rate = real("deep.learning_rate");
  c.width = static_cast<int>(integer("deep.width"));
  c.batch_norm = boolean("deep.batch_norm");
  c.channels_cover = c.channels_secret = channels;
  c.seed = child_seed(seed(), steg::to_string(mode));
  c.validate();
  return c;
}

experiments::ClassifierConfig RunConfig::classifier_config(int channels) const {
  experiments::ClassifierConfig c;
  c.epochs = static_cast<int>(integer("classifier.epochs"));
  c.batch_size = static_cast<int>(integer("classifier.batch_size"));
  c.learning_rate = real("classifier.learning_rate");
  c.channels = channels;
  c.seed = child_seed(seed(), "classifier");
  c.validate();
  return c;
}

steg::LsbConfig RunConfig::lsb_config() const {
  steg::LsbConfig c{static_cast<int>(integer("lsb.k"))};
  c.validate();
  return c;
}

steg::NoiseConfig RunConfig::noise_config() const {
  steg::NoiseConfig c{static_cast<float>(real("noise.mu")), static_cast<float>(real("noise.sigma")),
                      child_seed(seed(), "noise")};
  c.validate();
  return c;
}

experiments::PoisonConfig RunConfig::poison_config() const {
  experiments::PoisonConfig c{real("poison.fraction"), real("poison.test_fraction"), child_seed(seed(), "poison")};
  c.validate();
  return c;
}

LabeledDataset load_configured(const RunConfig& cfg, Split split) {
  LabeledDataset d = load_dataset(cfg.dataset(), split, cfg.data_root());
  const std::size_t limit = split == Split::train ? cfg.train_limit() : cfg.test_limit();
  return limit ? d.head(limit) : d;
}

}  // namespace stegsan::app
