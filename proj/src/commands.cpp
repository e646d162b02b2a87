#include "stegsan/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stegsan/app/checkpoint.hpp"
#include "stegsan/app/run_config.hpp"
#include "stegsan/error.hpp"
#include "stegsan/experiments.hpp"
#include "stegsan/image_io.hpp"
#include "stegsan/poisoning.hpp"

namespace stegsan::app {

namespace fs = std::filesystem;
using nlohmann::json;
using experiments::HidingModels;
using experiments::RecordSet;
using experiments::Sanitizer;

namespace {

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> assignments;
  std::optional<std::uint64_t> seed;
  std::string dataset;
  std::string data_root;
  bool desk_scale = false;
  std::string run_dir;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_run_dir) {
  cmd->add_option("--config", o.config_file, "flat key = value config file");
  cmd->add_option("--set", o.assignments, "override one config key (key=value), repeatable");
  cmd->add_option("--seed", o.seed, "root seed");
  cmd->add_option("--dataset", o.dataset, "mnist or cifar10");
  cmd->add_option("--data-root", o.data_root, "dataset directory (overrides $STEGSAN_DATA_ROOT)");
  cmd->add_flag("--desk-scale", o.desk_scale, "10000 training images, 20 SUDS epochs, 30 DDH/UDH epochs");
  if (with_run_dir) cmd->add_option("--run-dir", o.run_dir, "output directory for CSVs, figures and manifest");
}

RunConfig resolve(const CommonOptions& o) {
  RunConfig cfg;
  if (!o.config_file.empty()) cfg.load_file(o.config_file);
  for (const auto& a : o.assignments) cfg.set_assignment(a);
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  if (!o.dataset.empty()) cfg.set("dataset", o.dataset);
  if (!o.data_root.empty()) cfg.set("data_root", o.data_root);
  if (o.desk_scale) cfg.set("desk_scale", "true");
  return cfg;
}

int channels_of(const RunConfig& cfg) { return cfg.dataset() == DatasetName::cifar10 ? 3 : 1; }

void log(const std::string& msg) { std::cerr << "[stegsan] " << msg << std::endl; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw IoError("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

/// Output directory with the resolved config and a JSON manifest.
class RunDir {
 public:
  RunDir(fs::path path, const RunConfig& cfg, std::string command) : path_(std::move(path)) {
    std::error_code ec;
    fs::create_directories(path_, ec);
    if (ec) throw IoError("cannot create run directory " + path_.string() + ": " + ec.message());
    cfg.write(path_ / "config.txt");
    manifest_ = {{"command", std::move(command)},
                 {"seed", cfg.seed().value},
                 {"dataset", to_string(cfg.dataset())},
                 {"desk_scale", cfg.desk_scale()},
                 {"config", "config.txt"},
                 {"checkpoints", json::object()},
                 {"outputs", json::array()},
                 {"notes", json::object()}};
  }

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

  void checkpoint(const std::string& name, const fs::path& dir, bool trained_here) {
    manifest_["checkpoints"][name] = {{"path", dir.string()}, {"hash", checkpoint_hash(dir)}, {"trained_in_run", trained_here}};
  }
  void output(const std::string& file) { manifest_["outputs"].push_back(file); }
  void note(const std::string& key, json value) { manifest_["notes"][key] = std::move(value); }
  void write_csv(const std::string& file, const std::string& csv) {
    write_text(path_ / file, csv);
    output(file);
  }
  void finish() { write_text(path_ / "manifest.json", manifest_.dump(2) + "\n"); }

 private:
  fs::path path_;
  json manifest_;
};

fs::path default_run_dir(const CommonOptions& o, const std::string& name) {
  return o.run_dir.empty() ? fs::path("runs") / name : fs::path(o.run_dir);
}

std::string history_csv_header(const char* cols) { return std::string("epoch,") + cols + "\n"; }

suds::VaeModel train_suds_logged(const RunConfig& cfg, const LabeledDataset& train, int latent,
                                 std::string* history) {
  auto vc = cfg.vae_config(train.shape().channels);
  if (latent > 0) vc.latent = latent;
  log("training SUDS (n=" + std::to_string(vc.latent) + ", " + std::to_string(vc.epochs) + " epochs, " +
      std::to_string(train.size()) + " images)");
  std::ostringstream h;
  h << history_csv_header("loss,reconstruction,kl");
  auto model = suds::train_suds(train, vc, nullptr, [&](const suds::EpochStats& s) {
    h << s.epoch << ',' << format_number(s.loss) << ',' << format_number(s.reconstruction) << ','
      << format_number(s.kl) << '\n';
    log("  suds epoch " + std::to_string(s.epoch) + " loss " + format_number(s.loss));
  });
  if (history) *history = h.str();
  return model;
}

steg::DeepHidingModel train_deep_logged(const RunConfig& cfg, const LabeledDataset& train, steg::DeepMode mode,
                                        std::string* history) {
  const auto dc = cfg.deep_config(mode, train.shape().channels);
  log("training " + std::string(steg::to_string(mode)) + " (" + std::to_string(dc.epochs) + " epochs, " +
      std::to_string(train.size()) + " images)");
  std::ostringstream h;
  h << history_csv_header("loss,cover,secret");
  auto model = steg::train_deep_hiding(train, dc, nullptr, [&](const steg::EpochStats& s) {
    h << s.epoch << ',' << format_number(s.loss) << ',' << format_number(s.cover_loss) << ','
      << format_number(s.secret_loss) << '\n';
    log("  " + std::string(steg::to_string(mode)) + " epoch " + std::to_string(s.epoch) + " loss " +
        format_number(s.loss));
  });
  if (history) *history = h.str();
  return model;
}

// Lazily loaded training split shared by the model providers of one command.
class TrainSplit {
 public:
  explicit TrainSplit(const RunConfig& cfg) : cfg_(cfg) {}
  const LabeledDataset& get() {
    if (!data_) data_ = load_configured(cfg_, Split::train);
    return *data_;
  }

 private:
  const RunConfig& cfg_;
  std::optional<LabeledDataset> data_;
};

suds::VaeModel provide_suds(const std::string& ckpt, const RunConfig& cfg, TrainSplit& train, RunDir& run,
                            const std::string& name, int latent = 0) {
  if (!ckpt.empty()) {
    auto m = load_suds(ckpt);
    if (latent > 0 && m.latent() != latent) {
      throw UsageError("checkpoint " + ckpt + " has n=" + std::to_string(m.latent()) + ", this experiment needs n=" +
                       std::to_string(latent));
    }
    run.checkpoint(name, ckpt, false);
    return m;
  }
  std::string history;
  auto m = train_suds_logged(cfg, train.get(), latent, &history);
  const fs::path dir = run / ("checkpoints/" + name);
  save_checkpoint(dir, m);
  write_text(dir / "history.csv", history);
  run.checkpoint(name, dir, true);
  return m;
}

steg::DeepHidingModel provide_deep(const std::string& ckpt, steg::DeepMode mode, const RunConfig& cfg,
                                   TrainSplit& train, RunDir& run) {
  const std::string name(steg::to_string(mode));
  if (!ckpt.empty()) {
    auto m = load_deep(ckpt, mode);
    run.checkpoint(name, ckpt, false);
    return m;
  }
  std::string history;
  auto m = train_deep_logged(cfg, train.get(), mode, &history);
  const fs::path dir = run / ("checkpoints/" + name);
  save_checkpoint(dir, m);
  write_text(dir / "history.csv", history);
  run.checkpoint(name, dir, true);
  return m;
}

RecordSet make_records(const LabeledDataset& test, const HidingModels& models, Seed seed) {
  RecordSet rs;
  for (auto m : experiments::kHidingMethods) rs[m] = experiments::generate_containers(test, m, models, seed);
  return rs;
}

// Cover, secret, container, sanitized container, revealed-sanitized secret;
// one row per hiding method, first test record.
void save_strip_figure(const fs::path& path, const RecordSet& records, const Sanitizer& sanitizer,
                       const HidingModels& models) {
  std::vector<ImageTensor> tiles;
  for (const auto& [method, recs] : records) {
    const auto& r = recs.front();
    const ImageTensor* c = &r.container;
    auto san = sanitizer.apply(std::span(&c, 1), "figure");
    const ImageTensor* s = &san.front();
    auto rev = experiments::reveal_all(method, models, std::span(&s, 1));
    tiles.insert(tiles.end(), {r.cover, r.secret, r.container, san.front(), rev.front()});
  }
  save_image_grid(tiles, static_cast<int>(records.size()), 5, path);
}

// ---- sanitization tables -------------------------------------------------

struct TableArgs {
  std::string suds, ddh, udh;
};

int cmd_table(const CommonOptions& o, const TableArgs& a, const std::string& name, bool with_suds, bool with_noise,
              std::optional<DatasetName> force_dataset) {
  RunConfig cfg = resolve(o);
  if (force_dataset) {
    if (cfg.is_set("dataset") && cfg.dataset() != *force_dataset) {
      throw UsageError(name + " runs on " + std::string(to_string(*force_dataset)));
    }
    cfg.set("dataset", std::string(to_string(*force_dataset)));
  }
  RunDir run(default_run_dir(o, name), cfg, "eval " + name);
  TrainSplit train(cfg);
  const auto test = load_configured(cfg, Split::test);

  auto ddh = provide_deep(a.ddh, steg::DeepMode::ddh, cfg, train, run);
  auto udh = provide_deep(a.udh, steg::DeepMode::udh, cfg, train, run);
  const HidingModels models{cfg.lsb_config(), &ddh, &udh};
  log("hiding " + std::to_string(test.size()) + " test secrets with lsb, ddh, udh");
  const auto records = make_records(test, models, child_seed(cfg.seed(), "containers"));

  MetricsReport report = experiments::evaluate_sanitizer(test.images, records, {SanitizerKind::none}, models);
  std::optional<suds::VaeModel> vae;
  if (with_suds) {
    vae.emplace(provide_suds(a.suds, cfg, train, run, "suds"));
    const Sanitizer s{SanitizerKind::suds, &*vae, {}};
    report.merge(experiments::evaluate_sanitizer(test.images, records, s, models));
    save_strip_figure(run / "samples_suds.png", records, s, models);
    run.output("samples_suds.png");
  }
  if (with_noise) {
    const Sanitizer s{SanitizerKind::gaussian, nullptr, cfg.noise_config()};
    report.merge(experiments::evaluate_sanitizer(test.images, records, s, models));
    save_strip_figure(run / "samples_gaussian.png", records, s, models);
    run.output("samples_gaussian.png");
  }
  run.write_csv("sanitization.csv", report.to_csv());
  run.note("records_per_method", test.size());
  run.note("pairing", "secrets drawn uniformly with replacement; one pairing shared by all methods");
  run.finish();
  std::cout << report.to_csv();
  return 0;
}

// ---- latent ablation ------------------------------------------------------

int cmd_rq3(const CommonOptions& o, const TableArgs& a, const std::vector<int>& sizes) {
  const RunConfig cfg = resolve(o);
  RunDir run(default_run_dir(o, "rq3"), cfg, "eval rq3");
  TrainSplit train(cfg);
  const auto test = load_configured(cfg, Split::test);
  auto ddh = provide_deep(a.ddh, steg::DeepMode::ddh, cfg, train, run);
  auto udh = provide_deep(a.udh, steg::DeepMode::udh, cfg, train, run);
  const HidingModels models{cfg.lsb_config(), &ddh, &udh};
  const auto records = make_records(test, models, child_seed(cfg.seed(), "containers"));

  const std::size_t shown = std::min<std::size_t>(8, test.size());
  std::vector<ImageTensor> tiles(test.images.begin(), test.images.begin() + static_cast<long>(shown));
  const auto base = cfg.vae_config(channels_of(cfg));
  log("latent ablation over " + std::to_string(sizes.size()) + " sizes");
  const auto points = experiments::latent_ablation(
      train.get(), test.images, records, models, base, sizes, [&](int n, suds::VaeModel&& m) {
        log("  n=" + std::to_string(n) + " done");
        std::vector<const ImageTensor*> xs;
        for (std::size_t i = 0; i < shown; ++i) xs.push_back(&test.images[i]);
        for (auto& x : m.sanitize_batch(xs)) tiles.push_back(std::move(x));
      });

  std::ostringstream csv;
  csv << "latent,sanitizer,method,column,mse,psnr\n";
  for (const auto& p : points) {
    for (const auto& [k, v] : p.report.rows()) {
      csv << p.latent << ',' << to_string(k.sanitizer) << ',' << to_string(k.method) << ',' << to_string(k.column)
          << ',' << format_number(v.mse) << ',' << format_number(v.psnr) << '\n';
    }
  }
  run.write_csv("ablation.csv", csv.str());
  save_image_grid(tiles, static_cast<int>(sizes.size()) + 1, static_cast<int>(shown), run / "ablation_reconstructions.png");
  run.output("ablation_reconstructions.png");
  run.note("figure_rows", "first row: covers; then one row per latent size in order");
  run.note("sizes", sizes);
  run.finish();
  std::cout << csv.str();
  return 0;
}

// ---- latent probe ---------------------------------------------------------

int cmd_rq4(const CommonOptions& o, const TableArgs& a) {
  constexpr int kProbeLatent = 8;
  const RunConfig cfg = resolve(o);
  RunDir run(default_run_dir(o, "rq4"), cfg, "eval rq4");
  TrainSplit train(cfg);
  const auto test = load_configured(cfg, Split::test);
  auto ddh = provide_deep(a.ddh, steg::DeepMode::ddh, cfg, train, run);
  auto udh = provide_deep(a.udh, steg::DeepMode::udh, cfg, train, run);
  auto vae = provide_suds(a.suds, cfg, train, run, "suds_n8", kProbeLatent);
  const HidingModels models{cfg.lsb_config(), &ddh, &udh};
  const auto records = make_records(test, models, child_seed(cfg.seed(), "containers"));

  const auto stats = experiments::latent_probe(vae, records);
  run.write_csv("latent_stats.csv", experiments::latent_stats_csv(stats));
  std::ostringstream ov;
  ov << "digit,method,overlapping_features,features,max_separation\n";
  for (const auto& r : experiments::latent_overlap(stats)) {
    ov << int(r.digit) << ',' << to_string(r.method) << ',' << r.overlapping << ',' << r.features << ','
       << format_number(r.max_separation) << '\n';
  }
  run.write_csv("overlap.csv", ov.str());

  // decoded group means: one row per image type, one column per digit
  std::vector<ImageTensor> tiles;
  for (HidingMethod type : {HidingMethod::clean, HidingMethod::lsb, HidingMethod::ddh, HidingMethod::udh}) {
    for (int d = 0; d < 10; ++d) {
      auto it = std::find_if(stats.begin(), stats.end(), [&](const auto& s) { return s.digit == d && s.type == type; });
      if (it == stats.end()) {
        tiles.push_back(ImageTensor(vae.image_shape()));
        continue;
      }
      std::vector<nn::Real> z(it->mean.begin(), it->mean.end());
      tiles.push_back(vae.decode(z));
    }
  }
  save_image_grid(tiles, 4, 10, run / "latent_group_means.png");
  run.output("latent_group_means.png");
  run.note("probe", "encoder means; separation in pooled standard deviations");
  run.finish();
  std::cout << ov.str();
  return 0;
}

// ---- poisoning ------------------------------------------------------------

int cmd_poison(const CommonOptions& o, const TableArgs& a, bool control) {
  const RunConfig cfg = resolve(o);
  RunDir run(default_run_dir(o, "poison"), cfg, "poison-study");
  TrainSplit train(cfg);
  const auto test = load_configured(cfg, Split::test);
  auto ddh = provide_deep(a.ddh, steg::DeepMode::ddh, cfg, train, run);
  auto vae = provide_suds(a.suds, cfg, train, run, "suds");
  const auto pc = cfg.poison_config();

  const auto poisoned = experiments::poison_dataset(train.get(), ddh, pc.poison_fraction, pc.seed);
  log("poisoned " + std::to_string(poisoned.poisoned.size()) + " of " + std::to_string(train.get().size()) +
      " training images");
  auto clf = experiments::train_classifier(poisoned.data, cfg.classifier_config(channels_of(cfg)));
  save_checkpoint(run / "checkpoints/classifier_poisoned", clf);
  run.checkpoint("classifier_poisoned", run / "checkpoints/classifier_poisoned", true);

  const auto mixed = experiments::make_poison_test_set(test, ddh, pc.test_poison_fraction, pc.seed);
  const auto none = experiments::evaluate_poisoning(clf, mixed, nullptr);
  const auto with = experiments::evaluate_poisoning(clf, mixed, &vae);
  const auto report = experiments::make_poison_report(none, with);
  run.write_csv("poison.csv", report.to_csv());
  run.note("poisoned_train_records", poisoned.poisoned.size());
  run.note("self_label_containers_excluded", report.self_label_excluded);

  if (control) {
    auto clean = experiments::train_classifier(train.get(), cfg.classifier_config(channels_of(cfg)));
    const auto cn = experiments::evaluate_poisoning(clean, mixed, nullptr);
    const auto cs = experiments::evaluate_poisoning(clean, mixed, &vae);
    std::ostringstream c;
    c << "metric,value\n"
      << "clean_accuracy_no_defense," << format_number(cn.clean_accuracy) << '\n'
      << "clean_accuracy_with_suds," << format_number(cs.clean_accuracy) << '\n'
      << "attack_success_no_defense," << format_number(cn.attack_success) << '\n'
      << "attack_success_with_suds," << format_number(cs.attack_success) << '\n';
    run.write_csv("control.csv", c.str());
  }
  run.finish();
  std::cout << report.to_csv();
  return 0;
}

// ---- report -----------------------------------------------------------------

std::string csv_to_markdown(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::ostringstream md;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string row = "| ";
    std::size_t cols = 1;
    for (char ch : line) {
      if (ch == ',') {
        row += " | ";
        ++cols;
      } else {
        row += ch;
      }
    }
    md << row << " |\n";
    if (header) {
      md << '|';
      for (std::size_t i = 0; i < cols; ++i) md << " --- |";
      md << '\n';
      header = false;
    }
  }
  return md.str();
}

int cmd_report(const std::string& dir) {
  if (!fs::is_directory(dir)) throw UsageError("no run directory at " + dir);
  std::ostringstream md;
  md << "# stegsan run report\n\n";
  static const std::pair<const char*, const char*> known[] = {
      {"sanitization.csv", "Sanitization metrics (byte-scale MSE, PSNR in dB)"},
      {"ablation.csv", "Latent size ablation"},
      {"overlap.csv", "Latent overlap of covers and containers"},
      {"poison.csv", "Poisoning defense (percentages)"},
      {"control.csv", "Clean-trained control classifier (percentages)"}};
  int found = 0;
  for (const auto& [file, title] : known) {
    const fs::path p = fs::path(dir) / file;
    if (!fs::exists(p)) continue;
    ++found;
    const std::string csv = read_text(p);
    if (std::string(file) == "sanitization.csv") MetricsReport::from_csv(csv);  // validates the schema
    md << "## " << title << "\n\n" << csv_to_markdown(csv) << '\n';
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".png") md << "![" << entry.path().stem().string() << "](" << entry.path().filename().string() << ")\n";
  }
  if (!found) throw UsageError("no result CSVs in " + dir);
  write_text(fs::path(dir) / "report.md", md.str());
  std::cout << md.str();
  return 0;
}

// ---- single-image commands -------------------------------------------------

int cmd_train(const CommonOptions& o, const std::string& method, const std::string& out, const std::string& poison_ddh) {
  const RunConfig cfg = resolve(o);
  const auto train = load_configured(cfg, Split::train);
  std::error_code ec;
  fs::create_directories(out, ec);
  std::string history;
  if (method == "suds") {
    auto m = train_suds_logged(cfg, train, 0, &history);
    save_checkpoint(out, m);
  } else if (method == "ddh" || method == "udh") {
    auto m = train_deep_logged(cfg, train, steg::parse_deep_mode(method), &history);
    save_checkpoint(out, m);
  } else {
    LabeledDataset data = train;
    if (!poison_ddh.empty()) {
      const auto ddh = load_deep(poison_ddh, steg::DeepMode::ddh);
      const auto pc = cfg.poison_config();
      data = experiments::poison_dataset(train, ddh, pc.poison_fraction, pc.seed).data;
    }
    std::vector<double> losses;
    auto m = experiments::train_classifier(data, cfg.classifier_config(channels_of(cfg)), &losses);
    std::ostringstream h;
    h << "epoch,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i) h << i + 1 << ',' << format_number(losses[i]) << '\n';
    history = h.str();
    save_checkpoint(out, m);
  }
  write_text(fs::path(out) / "history.csv", history);
  cfg.write(fs::path(out) / "config.txt");
  std::cout << out << " " << checkpoint_hash(out) << '\n';
  return 0;
}

struct ImageArgs {
  std::string method, cover, secret, container, input, out, model;
  int k = 4;
};

int deep_channels(const steg::DeepHidingModel& m) { return m.config().channels_cover; }

int cmd_hide(const ImageArgs& a) {
  if (a.method == "lsb") {
    const auto cover = read_png(a.cover);
    const auto secret = read_png(a.secret, cover.channels());
    write_png(steg::lsb_hide(cover, secret, {a.k}), a.out);
    return 0;
  }
  if (a.model.empty()) throw UsageError("--model is required for " + a.method);
  const auto m = load_deep(a.model, steg::parse_deep_mode(a.method));
  const auto cover = read_png(a.cover, deep_channels(m));
  const auto secret = read_png(a.secret, m.config().channels_secret);
  write_png(m.hide(cover, secret), a.out);
  return 0;
}

int cmd_reveal(const ImageArgs& a) {
  if (a.method == "lsb") {
    write_png(steg::lsb_reveal(read_png(a.container), {a.k}), a.out);
    return 0;
  }
  if (a.model.empty()) throw UsageError("--model is required for " + a.method);
  const auto m = load_deep(a.model, steg::parse_deep_mode(a.method));
  write_png(m.reveal(read_png(a.container, deep_channels(m))), a.out);
  return 0;
}

int cmd_sanitize(const CommonOptions& o, const ImageArgs& a) {
  if (a.method == "noise") {
    const RunConfig cfg = resolve(o);
    write_png(steg::gaussian_sanitize(read_png(a.input), cfg.noise_config()), a.out);
    return 0;
  }
  if (a.model.empty()) throw UsageError("--model is required for suds");
  const auto m = load_suds(a.model);
  write_png(m.sanitize(read_png(a.input, m.image_shape().channels)), a.out);
  return 0;
}

std::string schema_help() {
  std::ostringstream os;
  os << "Config keys (key = value; --set key=value overrides):\n";
  for (const auto& k : config_schema()) {
    os << "  " << k.key << " (default " << (k.default_value.empty() ? "\"\"" : k.default_value) << "): " << k.help
       << '\n';
  }
  os << "Environment: " << kDataRootEnv << " sets the default dataset root.\n";
  return os.str();
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"stegsan: steganography hiding and sanitization workbench", "stegsan"};
  app.footer(schema_help());
  app.require_subcommand(1);

  CommonOptions common;
  TableArgs models;
  ImageArgs img;
  std::string method, out, poison_ddh, run_dir;
  std::vector<int> sizes(std::begin(experiments::kAblationSizes), std::end(experiments::kAblationSizes));
  bool control = true;

  auto* train = app.add_subcommand("train", "train a SUDS, DDH, UDH or classifier checkpoint");
  train->add_option("--method", method, "suds | ddh | udh | classifier")
      ->required()
      ->check(CLI::IsMember({"suds", "ddh", "udh", "classifier"}));
  train->add_option("--out", out, "checkpoint directory")->required();
  train->add_option("--poison-ddh", poison_ddh, "classifier only: poison the training set with this DDH checkpoint");
  add_common(train, common, false);

  auto* hide = app.add_subcommand("hide", "hide a secret PNG inside a cover PNG");
  hide->add_option("--method", img.method, "lsb | ddh | udh")->required()->check(CLI::IsMember({"lsb", "ddh", "udh"}));
  hide->add_option("--cover", img.cover)->required();
  hide->add_option("--secret", img.secret)->required();
  hide->add_option("--out", img.out, "container PNG")->required();
  hide->add_option("--model", img.model, "DDH/UDH checkpoint");
  hide->add_option("--k", img.k, "LSB bit-planes")->check(CLI::Range(1, 7));

  auto* reveal = app.add_subcommand("reveal", "extract a secret from a container PNG");
  reveal->add_option("--method", img.method, "lsb | ddh | udh")->required()->check(CLI::IsMember({"lsb", "ddh", "udh"}));
  reveal->add_option("--container", img.container)->required();
  reveal->add_option("--out", img.out, "revealed secret PNG")->required();
  reveal->add_option("--model", img.model, "DDH/UDH checkpoint");
  reveal->add_option("--k", img.k, "LSB bit-planes")->check(CLI::Range(1, 7));

  auto* sanitize = app.add_subcommand("sanitize", "sanitize a PNG with SUDS or Gaussian noise");
  sanitize->add_option("--method", img.method, "suds | noise")->required()->check(CLI::IsMember({"suds", "noise"}));
  sanitize->add_option("--in", img.input)->required();
  sanitize->add_option("--out", img.out)->required();
  sanitize->add_option("--model", img.model, "SUDS checkpoint");
  add_common(sanitize, common, false);

  auto* eval = app.add_subcommand("eval", "reproduce one experiment into a run directory");
  eval->require_subcommand(1);
  auto add_models = [&](CLI::App* c, bool suds, bool deep) {
    if (suds) c->add_option("--suds", models.suds, "SUDS checkpoint (trained in the run if omitted)");
    if (deep) {
      c->add_option("--ddh", models.ddh, "DDH checkpoint (trained in the run if omitted)");
      c->add_option("--udh", models.udh, "UDH checkpoint (trained in the run if omitted)");
    }
    add_common(c, common, true);
  };
  auto* rq1 = eval->add_subcommand("rq1", "SUDS sanitization table");
  add_models(rq1, true, true);
  auto* rq2 = eval->add_subcommand("rq2", "Gaussian-noise baseline table");
  add_models(rq2, false, true);
  auto* rq3 = eval->add_subcommand("rq3", "latent size ablation");
  add_models(rq3, false, true);
  rq3->add_option("--sizes", sizes, "latent sizes")->delimiter(',');
  auto* rq4 = eval->add_subcommand("rq4", "latent detection probe (n = 8)");
  add_models(rq4, true, true);
  auto* rq5 = eval->add_subcommand("rq5", "SUDS and noise tables on CIFAR-10");
  add_models(rq5, true, true);

  auto* poison = app.add_subcommand("poison-study", "poisoning attack and SUDS defense");
  poison->add_option("--ddh", models.ddh, "DDH checkpoint used to poison (trained in the run if omitted)");
  poison->add_option("--suds", models.suds, "SUDS checkpoint used as defense (trained in the run if omitted)");
  poison->add_option("--control", control, "also evaluate a clean-trained classifier")->default_val(true);
  add_common(poison, common, true);

  auto* report = app.add_subcommand("report", "render stored CSVs of a run directory as markdown");
  report->add_option("--run-dir", run_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) return cmd_train(common, method, out, poison_ddh);
    if (hide->parsed()) return cmd_hide(img);
    if (reveal->parsed()) return cmd_reveal(img);
    if (sanitize->parsed()) return cmd_sanitize(common, img);
    if (rq1->parsed()) return cmd_table(common, models, "rq1", true, false, std::nullopt);
    if (rq2->parsed()) return cmd_table(common, models, "rq2", false, true, std::nullopt);
    if (rq3->parsed()) return cmd_rq3(common, models, sizes);
    if (rq4->parsed()) return cmd_rq4(common, models);
    if (rq5->parsed()) return cmd_table(common, models, "rq5", true, true, DatasetName::cifar10);
    if (poison->parsed()) return cmd_poison(common, models, control);
    if (report->parsed()) return cmd_report(run_dir);
  } catch (const UsageError& e) {
    std::cerr << "stegsan: usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "stegsan: error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace stegsan::app
