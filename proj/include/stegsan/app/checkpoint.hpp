#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "stegsan/classifier.hpp"
#include "stegsan/deep_hiding.hpp"
#include "stegsan/vae.hpp"

namespace stegsan::app {

/// A checkpoint is a directory holding manifest.json (kind, config, tensor
/// index, content hash) and params.bin (little-endian float32, tensors
/// back to back in manifest order).
enum class ModelKind { suds, ddh, udh, classifier };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

void save_checkpoint(const std::filesystem::path& dir, suds::VaeModel& model);
void save_checkpoint(const std::filesystem::path& dir, steg::DeepHidingModel& model);
void save_checkpoint(const std::filesystem::path& dir, experiments::Classifier& model);

/// Throws CorruptCheckpointError on a missing, truncated or tampered
/// checkpoint, or one holding a different kind of model.
suds::VaeModel load_suds(const std::filesystem::path& dir);
steg::DeepHidingModel load_deep(const std::filesystem::path& dir, std::optional<steg::DeepMode> expected = {});
experiments::Classifier load_classifier(const std::filesystem::path& dir);

ModelKind checkpoint_kind(const std::filesystem::path& dir);
/// Hex content hash recorded in the manifest.
std::string checkpoint_hash(const std::filesystem::path& dir);

}  // namespace stegsan::app
