#include "stegsan/app/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stegsan/error.hpp"

namespace stegsan::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "stegsan-checkpoint";
constexpr int kVersion = 1;

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

std::uint32_t le32(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

json vae_json(const suds::VaeConfig& c) {
  return {{"latent", c.latent},         {"epochs", c.epochs},   {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate}, {"seed", c.seed.value}, {"image_size", c.image_size},
          {"channels", c.channels},     {"width", c.width},     {"sample_at_inference", c.sample_at_inference}};
}

suds::VaeConfig vae_from(const json& j) {
  suds::VaeConfig c;
  c.latent = j.at("latent");
  c.epochs = j.at("epochs");
  c.batch_size = j.at("batch_size");
  c.learning_rate = j.at("learning_rate");
  c.seed = Seed{j.at("seed").get<std::uint64_t>()};
  c.image_size = j.at("image_size");
  c.channels = j.at("channels");
  c.width = j.at("width");
  c.sample_at_inference = j.at("sample_at_inference");
  return c;
}

json deep_json(const steg::DeepHidingConfig& c) {
  return {{"mode", steg::to_string(c.mode)}, {"image_size", c.image_size},   {"batch_size", c.batch_size},
          {"channels_cover", c.channels_cover}, {"channels_secret", c.channels_secret},
          {"batch_norm", c.batch_norm},     {"beta", c.beta},               {"epochs", c.epochs},
          {"learning_rate", c.learning_rate}, {"seed", c.seed.value},       {"width", c.width}};
}

steg::DeepHidingConfig deep_from(const json& j) {
  steg::DeepHidingConfig c;
  c.mode = steg::parse_deep_mode(j.at("mode").get<std::string>());
  c.image_size = j.at("image_size");
  c.batch_size = j.at("batch_size");
  c.channels_cover = j.at("channels_cover");
  c.channels_secret = j.at("channels_secret");
  c.batch_norm = j.at("batch_norm");
  c.beta = j.at("beta");
  c.epochs = j.at("epochs");
  c.learning_rate = j.at("learning_rate");
  c.seed = Seed{j.at("seed").get<std::uint64_t>()};
  c.width = j.at("width");
  return c;
}

json classifier_json(const experiments::ClassifierConfig& c) {
  return {{"epochs", c.epochs},     {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
          {"channels", c.channels}, {"image_size", c.image_size}, {"seed", c.seed.value}};
}

experiments::ClassifierConfig classifier_from(const json& j) {
  experiments::ClassifierConfig c;
  c.epochs = j.at("epochs");
  c.batch_size = j.at("batch_size");
  c.learning_rate = j.at("learning_rate");
  c.channels = j.at("channels");
  c.image_size = j.at("image_size");
  c.seed = Seed{j.at("seed").get<std::uint64_t>()};
  return c;
}

void save(const fs::path& dir, ModelKind kind, json config, const std::vector<nn::ParamView>& params) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir.string() + ": " + ec.message());

  std::string blob;
  json tensors = json::array();
  std::size_t offset = 0;
  for (const auto& p : params) {
    const auto& v = *p.value;
    tensors.push_back({{"name", p.name}, {"shape", p.shape}, {"offset", offset}, {"count", v.size()}});
    for (float f : v) {
      const std::uint32_t bits = le32(std::bit_cast<std::uint32_t>(f));
      blob.append(reinterpret_cast<const char*>(&bits), 4);
    }
    offset += v.size();
  }
  const json manifest = {{"format", kFormat},
                         {"version", kVersion},
                         {"kind", to_string(kind)},
                         {"config", std::move(config)},
                         {"tensors", std::move(tensors)},
                         {"blob", "params.bin"},
                         {"blob_bytes", blob.size()},
                         {"hash", hex64(fnv1a64(blob.data(), blob.size()))}};

  std::ofstream b(dir / "params.bin", std::ios::binary | std::ios::trunc);
  b.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  std::ofstream m(dir / "manifest.json", std::ios::trunc);
  m << manifest.dump(2) << '\n';
  if (!b || !m) throw IoError("failed writing checkpoint " + dir.string());
}

json read_manifest(const fs::path& dir) {
  std::ifstream f(dir / "manifest.json");
  if (!f) throw CorruptCheckpointError("missing manifest.json in " + dir.string());
  try {
    json j = json::parse(f);
    if (j.at("format") != kFormat) throw CorruptCheckpointError("not a stegsan checkpoint: " + dir.string());
    if (j.at("version") != kVersion) throw CorruptCheckpointError("unsupported checkpoint version in " + dir.string());
    return j;
  } catch (const json::exception& e) {
    throw CorruptCheckpointError("unreadable manifest in " + dir.string() + ": " + e.what());
  }
}

void require_kind(const json& manifest, ModelKind expected, const fs::path& dir) {
  const auto kind = manifest.at("kind").get<std::string>();
  if (kind != to_string(expected)) {
    throw CorruptCheckpointError("checkpoint " + dir.string() + " holds a " + kind + " model, expected " +
                                 std::string(to_string(expected)));
  }
}

void restore(const fs::path& dir, const json& manifest, const std::vector<nn::ParamView>& params) {
  std::ifstream f(dir / manifest.at("blob").get<std::string>(), std::ios::binary);
  if (!f) throw CorruptCheckpointError("missing parameter blob in " + dir.string());
  const std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (blob.size() != manifest.at("blob_bytes").get<std::size_t>()) {
    throw CorruptCheckpointError("parameter blob in " + dir.string() + " is truncated or padded");
  }
  if (hex64(fnv1a64(blob.data(), blob.size())) != manifest.at("hash").get<std::string>()) {
    throw CorruptCheckpointError("content hash mismatch in " + dir.string());
  }
  const auto& tensors = manifest.at("tensors");
  if (tensors.size() != params.size()) {
    throw CorruptCheckpointError("tensor count mismatch in " + dir.string());
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    const auto& entry = tensors[t];
    const auto& p = params[t];
    const auto count = entry.at("count").get<std::size_t>();
    const auto offset = entry.at("offset").get<std::size_t>();
    if (entry.at("name") != p.name || entry.at("shape").get<std::vector<int>>() != p.shape ||
        count != p.value->size()) {
      throw CorruptCheckpointError("tensor " + p.name + " does not match the model architecture in " +
                                   dir.string());
    }
    if ((offset + count) * 4 > blob.size()) throw CorruptCheckpointError("tensor " + p.name + " out of range");
    for (std::size_t i = 0; i < count; ++i) {
      std::uint32_t bits;
      std::memcpy(&bits, blob.data() + (offset + i) * 4, 4);
      (*p.value)[i] = std::bit_cast<float>(le32(bits));
    }
  }
}

template <typename F>
auto guarded(const fs::path& dir, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw CorruptCheckpointError("malformed checkpoint " + dir.string() + ": " + e.what());
  } catch (const UsageError& e) {
    throw CorruptCheckpointError("invalid config in checkpoint " + dir.string() + ": " + e.what());
  }
}

}  // namespace

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::suds: return "suds";
    case ModelKind::ddh: return "ddh";
    case ModelKind::udh: return "udh";
    case ModelKind::classifier: return "classifier";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "suds") return ModelKind::suds;
  if (s == "ddh") return ModelKind::ddh;
  if (s == "udh") return ModelKind::udh;
  if (s == "classifier") return ModelKind::classifier;
  throw UsageError("unknown model kind '" + std::string(s) + "'");
}

void save_checkpoint(const fs::path& dir, suds::VaeModel& model) {
  if (!model.trained()) throw StateError("refusing to save an untrained SUDS model");
  save(dir, ModelKind::suds, vae_json(model.config()), model.parameters());
}

void save_checkpoint(const fs::path& dir, steg::DeepHidingModel& model) {
  if (!model.trained()) throw StateError("refusing to save an untrained deep hiding model");
  save(dir, model.mode() == steg::DeepMode::ddh ? ModelKind::ddh : ModelKind::udh, deep_json(model.config()),
       model.parameters());
}

void save_checkpoint(const fs::path& dir, experiments::Classifier& model) {
  if (!model.trained()) throw StateError("refusing to save an untrained classifier");
  save(dir, ModelKind::classifier, classifier_json(model.config()), model.parameters());
}

suds::VaeModel load_suds(const fs::path& dir) {
  const json m = read_manifest(dir);
  require_kind(m, ModelKind::suds, dir);
  return guarded(dir, [&] {
    suds::VaeModel model(vae_from(m.at("config")));
    restore(dir, m, model.parameters());
    model.mark_trained();
    return model;
  });
}

steg::DeepHidingModel load_deep(const fs::path& dir, std::optional<steg::DeepMode> expected) {
  const json m = read_manifest(dir);
  const auto kind = m.at("kind").get<std::string>();
  if (expected) {
    require_kind(m, *expected == steg::DeepMode::ddh ? ModelKind::ddh : ModelKind::udh, dir);
  } else if (kind != "ddh" && kind != "udh") {
    throw CorruptCheckpointError("checkpoint " + dir.string() + " holds a " + kind + " model, expected ddh or udh");
  }
  return guarded(dir, [&] {
    steg::DeepHidingModel model(deep_from(m.at("config")));
    if (steg::to_string(model.mode()) != kind) throw CorruptCheckpointError("mode/kind disagree in " + dir.string());
    restore(dir, m, model.parameters());
    model.mark_trained();
    return model;
  });
}

experiments::Classifier load_classifier(const fs::path& dir) {
  const json m = read_manifest(dir);
  require_kind(m, ModelKind::classifier, dir);
  return guarded(dir, [&] {
    experiments::Classifier model(classifier_from(m.at("config")));
    restore(dir, m, model.parameters());
    model.mark_trained();
    return model;
  });
}

ModelKind checkpoint_kind(const fs::path& dir) {
  const json m = read_manifest(dir);
  return guarded(dir, [&] { return parse_model_kind(m.at("kind").get<std::string>()); });
}

std::string checkpoint_hash(const fs::path& dir) {
  return guarded(dir, [&] { return read_manifest(dir).at("hash").get<std::string>(); });
}

}  // namespace stegsan::app
