// Acceptance run: one PASS/FAIL/SKIP line per criterion. Criteria 4-9 train
// the desk-scale models (tens of minutes on one core); --reuse picks up
// checkpoints left in the work directory by an earlier run with the same
// resolved config.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "stegsan/app/checkpoint.hpp"
#include "stegsan/app/run_config.hpp"
#include "stegsan/error.hpp"
#include "stegsan/experiments.hpp"
#include "stegsan/lsb.hpp"
#include "stegsan/metrics.hpp"
#include "stegsan/poisoning.hpp"

using namespace stegsan;
using namespace stegsan::experiments;
namespace fs = std::filesystem;

namespace {

enum class Verdict { pass, fail, skip };

struct Line {
  int id;
  std::string name;
  Verdict verdict;
  std::string detail;
};

std::vector<Line> g_lines;

void report(int id, std::string name, Verdict v, std::string detail) {
  static const char* words[] = {"PASS", "FAIL", "SKIP"};
  std::cout << words[static_cast<int>(v)] << " criterion " << id << " " << name << ": " << detail << std::endl;
  g_lines.push_back({id, std::move(name), v, std::move(detail)});
}

void report(int id, std::string name, bool ok, std::string detail) {
  report(id, std::move(name), ok ? Verdict::pass : Verdict::fail, std::move(detail));
}

void progress(const std::string& msg) {
  static const auto start = std::chrono::steady_clock::now();
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "[acceptance " << static_cast<long>(s) << "s] " << msg << std::endl;
}

std::string num(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void dump(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

// ---- exact oracles ---------------------------------------------------------

void criterion_lsb() {
  constexpr int k = 4;
  long violations = 0;
  int max_delta = 0;
  for (int c = 0; c < 256; ++c) {
    for (int s = 0; s < 256; ++s) {
      const auto out = steg::lsb_hide_byte(static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(s), k);
      const auto rev = steg::lsb_reveal_byte(out, k);
      const bool high_kept = (out >> k) == (c >> k);
      const bool low_is_secret = (out & 0x0F) == (s >> (8 - k));
      const bool reveal_top = (rev >> (8 - k)) == (s >> (8 - k));
      if (!high_kept || !low_is_secret || !reveal_top) ++violations;
      max_delta = std::max(max_delta, std::abs(int(out) - c));
    }
  }
  report(1, "LSB exactness", violations == 0 && max_delta <= 15,
         std::to_string(violations) + " bit-plane violations over 65536 pairs, max perturbation " +
             std::to_string(max_delta));
}

void criterion_metrics() {
  std::mt19937_64 g(4242);
  std::uniform_int_distribution<int> byte(0, 255);
  double worst = 0;
  bool self_zero = true;
  for (int i = 0; i < 1000; ++i) {
    const Shape shape{i % 2 ? 3 : 1, 32, 32};
    std::vector<std::uint8_t> a(static_cast<std::size_t>(shape.channels) * 32 * 32), b(a.size());
    for (auto& v : a) v = static_cast<std::uint8_t>(byte(g));
    b = a;
    // perturb a random subset so the MSE spans several decades
    const int touched = 1 + static_cast<int>(g() % a.size());
    for (int t = 0; t < touched; ++t) b[g() % b.size()] = static_cast<std::uint8_t>(byte(g));
    const auto x = ImageTensor::from_bytes(shape, a), y = ImageTensor::from_bytes(shape, b);
    const double m = mse(x, y);
    if (m > 0) worst = std::max(worst, std::abs(psnr(x, y) - 10.0 * std::log10(255.0 * 255.0 / m)));
    if (mse(x, x) != 0.0) self_zero = false;
  }
  report(2, "metric identity", worst <= 1e-6 && self_zero,
         "max |psnr - 10 log10(255^2/mse)| " + num(worst) + " dB over 1000 pairs, mse(x,x)=0 " +
             (self_zero ? "holds" : "violated"));
}

void criterion_vae_math() {
  const auto o = acceptance::vae_math_oracles();
  report(3, "VAE math oracles", o.ok, o.detail);
}

// ---- trained pipeline ------------------------------------------------------

struct Options {
  fs::path work = "acceptance";
  fs::path data_root;
  std::string cli;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool reuse = false;
};

app::RunConfig desk_config(const Options& opt, DatasetName ds) {
  app::RunConfig cfg;
  cfg.set("desk_scale", "true");
  cfg.set("dataset", std::string(to_string(ds)));
  cfg.set("data_root", opt.data_root.string());
  if (opt.seed_set) cfg.set("seed", std::to_string(opt.seed));
  return cfg;
}

// Trains or, with --reuse and a matching config stamp, loads checkpoints.
class ModelCache {
 public:
  ModelCache(fs::path dir, const app::RunConfig& cfg, bool reuse) : dir_(std::move(dir)) {
    const auto stamp = cfg.to_text();
    const auto stamp_file = dir_ / "config.txt";
    reuse_ = reuse && fs::exists(stamp_file) && slurp(stamp_file) == stamp;
    if (!reuse_) {
      fs::remove_all(dir_);
      fs::create_directories(dir_);
      dump(stamp_file, stamp);
    }
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  template <typename Model, typename Train, typename Load>
  Model get(const std::string& name, Train&& train, Load&& load) {
    const auto p = path(name);
    if (reuse_ && fs::exists(p / "manifest.json")) {
      progress("reusing " + p.string());
      return load(p);
    }
    progress("training " + name);
    Model m = train();
    app::save_checkpoint(p, m);
    return m;
  }

 private:
  fs::path dir_;
  bool reuse_ = false;
};

struct Hiders {
  steg::DeepHidingModel ddh;
  steg::DeepHidingModel udh;
};

Hiders deep_models(ModelCache& cache, const app::RunConfig& cfg, const LabeledDataset& train, int channels) {
  auto make = [&](steg::DeepMode mode) {
    const std::string name(steg::to_string(mode));
    return cache.get<steg::DeepHidingModel>(
        name,
        [&] {
          return steg::train_deep_hiding(train, cfg.deep_config(mode, channels), nullptr,
                                         [&](const steg::EpochStats& s) {
                                           progress("  " + name + " epoch " + std::to_string(s.epoch) + " loss " +
                                                    num(s.loss));
                                         });
        },
        [&](const fs::path& p) { return app::load_deep(p, mode); });
  };
  auto ddh = make(steg::DeepMode::ddh);
  auto udh = make(steg::DeepMode::udh);
  return {std::move(ddh), std::move(udh)};
}

suds::VaeModel suds_model(ModelCache& cache, const app::RunConfig& cfg, const LabeledDataset& train, int channels,
                          int latent) {
  const std::string name = "suds_n" + std::to_string(latent);
  return cache.get<suds::VaeModel>(
      name,
      [&] {
        auto vc = cfg.vae_config(channels);
        vc.latent = latent;
        return suds::train_suds(train, vc, nullptr, [&](const suds::EpochStats& s) {
          progress("  " + name + " epoch " + std::to_string(s.epoch) + " loss " + num(s.loss));
        });
      },
      [](const fs::path& p) { return app::load_suds(p); });
}

double cell(const MetricsReport& r, SanitizerKind s, HidingMethod m, MetricColumn c) { return r.at({s, m, c}).mse; }

struct Table {
  MetricsReport none;
  MetricsReport suds;
  MetricsReport gauss;
};

// Criterion 4 (and 8 with the RGB band): ratio and cover-fidelity checks.
void sanitization_criterion(int id, const std::string& name, const Table& t, std::size_t records,
                            double psnr_floor) {
  bool ok = records >= 1000;
  std::ostringstream d;
  d << records << " records;";
  for (auto m : kHidingMethods) {
    const double before = cell(t.none, SanitizerKind::none, m, MetricColumn::revealed);
    const double after = cell(t.suds, SanitizerKind::suds, m, MetricColumn::revealed_sanitized);
    const double ratio = after / before;
    ok = ok && ratio >= 20.0;
    d << ' ' << to_string(m) << " " << num(after) << "/" << num(before) << " = " << num(ratio, 3) << "x;";
  }
  const double cover_psnr = t.suds.at({SanitizerKind::suds, HidingMethod::clean, MetricColumn::sanitized}).psnr;
  ok = ok && cover_psnr >= psnr_floor;
  d << " cover PSNR " << num(cover_psnr) << " dB (floor " << psnr_floor << ")";
  report(id, name, ok, d.str());
}

void run_mnist(const Options& opt) {
  const auto cfg = desk_config(opt, DatasetName::mnist);
  const fs::path out = opt.work / "mnist";
  ModelCache cache(out / "checkpoints", cfg, opt.reuse);
  LabeledDataset train, test;
  try {
    train = app::load_configured(cfg, Split::train);
    test = app::load_configured(cfg, Split::test);
  } catch (const IngestionError& e) {
    for (int id : {4, 5, 6, 7, 9}) report(id, "MNIST pipeline", Verdict::skip, std::string("no MNIST: ") + e.what());
    return;
  }
  progress("MNIST " + std::to_string(train.size()) + " train / " + std::to_string(test.size()) + " test");

  auto hiders = deep_models(cache, cfg, train, 1);
  const HidingModels models{cfg.lsb_config(), &hiders.ddh, &hiders.udh};
  RecordSet records;
  for (auto m : kHidingMethods) records[m] = generate_containers(test, m, models, child_seed(cfg.seed(), "containers"));

  Table t;
  t.none = evaluate_sanitizer(test.images, records, {SanitizerKind::none}, models);

  // ablation; n = 128 doubles as the main SUDS model and n = 8 as the probe
  std::vector<AblationPoint> ablation;
  std::optional<suds::VaeModel> main_suds, probe_suds;
  for (int n : kAblationSizes) {
    auto vae = suds_model(cache, cfg, train, 1, n);
    ablation.push_back({n, evaluate_sanitizer(test.images, records, {SanitizerKind::suds, &vae, {}}, models)});
    progress("  n=" + std::to_string(n) + " clean mse " +
             num(cell(ablation.back().report, SanitizerKind::suds, HidingMethod::clean, MetricColumn::sanitized)));
    if (n == 128) main_suds.emplace(std::move(vae));
    else if (n == 8) probe_suds.emplace(std::move(vae));
  }
  t.suds = ablation.back().report;
  t.gauss = evaluate_sanitizer(test.images, records, {SanitizerKind::gaussian, nullptr, cfg.noise_config()}, models);

  MetricsReport table = t.none;
  table.merge(t.suds);
  table.merge(t.gauss);
  dump(out / "sanitization.csv", table.to_csv());
  {
    std::ostringstream csv;
    csv << "latent,sanitizer,method,column,mse,psnr\n";
    for (const auto& p : ablation) {
      for (const auto& [k, v] : p.report.rows()) {
        csv << p.latent << ',' << to_string(k.sanitizer) << ',' << to_string(k.method) << ','
            << to_string(k.column) << ',' << format_number(v.mse) << ',' << format_number(v.psnr) << '\n';
      }
    }
    dump(out / "ablation.csv", csv.str());
  }

  sanitization_criterion(4, "sanitization effectiveness", t, test.size(), 40.0);

  {
    bool ok = true;
    std::ostringstream d;
    for (auto m : {HidingMethod::lsb, HidingMethod::ddh}) {
      const double g = cell(t.gauss, SanitizerKind::gaussian, m, MetricColumn::revealed_sanitized);
      const double s = cell(t.suds, SanitizerKind::suds, m, MetricColumn::revealed_sanitized);
      ok = ok && g < 0.6 * s;
      d << to_string(m) << " noise " << num(g) << " vs 0.6 x SUDS " << num(0.6 * s) << "; ";
    }
    const double ug = cell(t.gauss, SanitizerKind::gaussian, HidingMethod::udh, MetricColumn::revealed_sanitized);
    const double ub = cell(t.none, SanitizerKind::none, HidingMethod::udh, MetricColumn::revealed);
    ok = ok && ug > 1.5 * ub;
    d << "udh noise " << num(ug) << " vs 1.5 x unsanitized " << num(1.5 * ub);
    report(5, "noise baseline ordering", ok, d.str());
  }

  {
    bool ok = true;
    double lowest = INFINITY;
    std::string lowest_at;
    for (const auto& p : ablation) {
      for (auto m : kHidingMethods) {
        const double v = cell(p.report, SanitizerKind::suds, m, MetricColumn::revealed_sanitized);
        if (v < lowest) lowest = v, lowest_at = "n=" + std::to_string(p.latent) + " " + std::string(to_string(m));
      }
    }
    ok = lowest >= 20.0;
    const double r2 = cell(ablation.front().report, SanitizerKind::suds, HidingMethod::clean, MetricColumn::sanitized);
    const double r128 = cell(ablation.back().report, SanitizerKind::suds, HidingMethod::clean, MetricColumn::sanitized);
    ok = ok && r2 >= 2.0 * r128;
    report(6, "latent ablation shape", ok,
           "lowest sanitized-secret MSE " + num(lowest) + " (" + lowest_at + "); reconstruction MSE n=2 " + num(r2) +
               " vs n=128 " + num(r128) + " (" + num(r2 / r128, 3) + "x)");
  }

  {
    const auto stats = latent_probe(*probe_suds, records);
    dump(out / "latent_stats.csv", latent_stats_csv(stats));
    const auto overlap = latent_overlap(stats, 0.5);
    std::ostringstream csv;
    csv << "digit,method,overlapping_features,features,max_separation\n";
    int failing = 0, fewest = 8;
    for (const auto& r : overlap) {
      csv << int(r.digit) << ',' << to_string(r.method) << ',' << r.overlapping << ',' << r.features << ','
          << format_number(r.max_separation) << '\n';
      fewest = std::min(fewest, r.overlapping);
      if (r.overlapping < 6) ++failing;
    }
    dump(out / "overlap.csv", csv.str());
    report(7, "detection negativity", failing == 0 && overlap.size() == 30,
           std::to_string(overlap.size()) + " digit/method groups, " + std::to_string(failing) +
               " with fewer than 6 of 8 overlapping features, fewest " + std::to_string(fewest));
  }

  {
    const double gain = resistance_gain(93.26, 0.56);
    const auto pc = cfg.poison_config();
    const auto poisoned = poison_dataset(train, hiders.ddh, pc.poison_fraction, pc.seed);
    progress("training poisoned classifier on " + std::to_string(poisoned.data.size()) + " images");
    const auto clf = train_classifier(poisoned.data, cfg.classifier_config(1));
    const auto mixed = make_poison_test_set(test, hiders.ddh, pc.test_poison_fraction, pc.seed);
    const auto none = evaluate_poisoning(clf, mixed, nullptr);
    const auto with = evaluate_poisoning(clf, mixed, &*main_suds);
    const auto rep = make_poison_report(none, with);
    dump(out / "poison.csv", rep.to_csv());
    const double drop = rep.clean_accuracy_no_defense - rep.clean_accuracy_with_suds;
    const bool ok = rep.attack_success_no_defense >= 75.0 && rep.attack_success_with_suds <= 10.0 && drop <= 3.0 &&
                    std::abs(gain - 1375.0) <= 1.0;
    report(9, "poisoning defense", ok,
           "attack success " + num(rep.attack_success_no_defense) + "% -> " + num(rep.attack_success_with_suds) +
               "% with SUDS; clean accuracy " + num(rep.clean_accuracy_no_defense) + "% -> " +
               num(rep.clean_accuracy_with_suds) + "% (drop " + num(drop, 3) + " points); gain formula " +
               num(gain, 6));
  }

  // ---- reproducibility ----
  {
    std::vector<std::string> problems;
    std::string detail;
    MetricsReport own = t.none;
    own.merge(t.suds);
    if (opt.cli.empty()) {
      problems.push_back("no CLI path given");
    } else {
      std::string a_csv, b_csv;
      for (const char* run : {"repro_a", "repro_b"}) {
        const fs::path dir = opt.work / run;
        fs::remove_all(dir);
        std::ostringstream cmd;
        cmd << '"' << opt.cli << "\" eval rq1 --desk-scale --dataset mnist --data-root \"" << opt.data_root.string()
            << "\" --seed " << cfg.seed().value << " --suds \"" << cache.path("suds_n128").string() << "\" --ddh \""
            << cache.path("ddh").string() << "\" --udh \"" << cache.path("udh").string() << "\" --run-dir \""
            << dir.string() << "\" > \"" << (opt.work / (std::string(run) + ".log")).string() << "\" 2>&1";
        progress(std::string("CLI ") + run);
        const int rc = std::system(cmd.str().c_str());
        if (rc != 0) problems.push_back(std::string(run) + " exited with " + std::to_string(rc));
        (std::string(run) == "repro_a" ? a_csv : b_csv) = slurp(dir / "sanitization.csv");
      }
      if (a_csv.empty() || a_csv != b_csv) problems.push_back("CLI reruns differ");
      if (a_csv != own.to_csv()) problems.push_back("CLI table differs from the in-process table");
      detail = "two CLI eval runs " + std::string(a_csv == b_csv && !a_csv.empty() ? "byte-identical" : "differ") +
               " (" + std::to_string(a_csv.size()) + " bytes)";
    }

    // retraining from scratch with the same seed gives the same weights
    const auto small = train.head(600);
    auto vc = cfg.vae_config(1);
    vc.latent = 8, vc.epochs = 2;
    auto dc = cfg.deep_config(steg::DeepMode::udh, 1);
    dc.epochs = 1;
    std::string hashes[2][2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path d = opt.work / ("retrain_" + std::to_string(rep));
      fs::remove_all(d);
      auto vae = suds::train_suds(small, vc);
      auto udh = steg::train_deep_hiding(small, dc);
      app::save_checkpoint(d / "suds", vae);
      app::save_checkpoint(d / "udh", udh);
      hashes[rep][0] = app::checkpoint_hash(d / "suds");
      hashes[rep][1] = app::checkpoint_hash(d / "udh");
    }
    if (hashes[0][0] != hashes[1][0] || hashes[0][1] != hashes[1][1]) problems.push_back("retrained weights differ");
    detail += "; retrained SUDS/UDH hashes " + hashes[0][0] + "/" + hashes[0][1] +
              (hashes[0][0] == hashes[1][0] && hashes[0][1] == hashes[1][1] ? " match" : " differ");
    std::string why;
    for (const auto& p : problems) why += "; " + p;
    report(10, "reproducibility", problems.empty(), detail + why);
  }
}

void run_cifar(const Options& opt) {
  const auto cfg = desk_config(opt, DatasetName::cifar10);
  LabeledDataset train, test;
  try {
    test = app::load_configured(cfg, Split::test);
    train = app::load_configured(cfg, Split::train);
  } catch (const IngestionError& e) {
    report(8, "RGB scaling", Verdict::skip, std::string("CIFAR-10 not available: ") + e.what());
    return;
  }
  const fs::path out = opt.work / "cifar10";
  ModelCache cache(out / "checkpoints", cfg, opt.reuse);
  auto hiders = deep_models(cache, cfg, train, 3);
  const HidingModels models{cfg.lsb_config(), &hiders.ddh, &hiders.udh};
  RecordSet records;
  for (auto m : kHidingMethods) records[m] = generate_containers(test, m, models, child_seed(cfg.seed(), "containers"));
  auto vae = suds_model(cache, cfg, train, 3, cfg.vae_config(3).latent);
  Table t;
  t.none = evaluate_sanitizer(test.images, records, {SanitizerKind::none}, models);
  t.suds = evaluate_sanitizer(test.images, records, {SanitizerKind::suds, &vae, {}}, models);
  MetricsReport table = t.none;
  table.merge(t.suds);
  dump(out / "sanitization.csv", table.to_csv());
  sanitization_criterion(8, "RGB scaling", t, test.size(), 30.0);
}

fs::path default_data_root() {
  if (const char* env = std::getenv(app::kDataRootEnv)) return env;
#ifdef STEGSAN_TEST_DATA_ROOT
  return STEGSAN_TEST_DATA_ROOT;
#else
  return "data";
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"desk-scale acceptance run"};
  Options opt;
  opt.data_root = default_data_root();
  cli.add_option("--work-dir", opt.work, "checkpoints, CSVs and logs");
  cli.add_option("--data-root", opt.data_root, "dataset directory");
  cli.add_option("--cli", opt.cli, "stegsan executable used for the reproducibility check");
  auto* seed = cli.add_option("--seed", opt.seed, "root seed (config default otherwise)");
  cli.add_flag("--reuse", opt.reuse, "load checkpoints from an earlier run with the same config");
  CLI11_PARSE(cli, argc, argv);
  opt.seed_set = seed->count() > 0;
  opt.work = fs::absolute(opt.work);
  opt.data_root = fs::absolute(opt.data_root);

  try {
    criterion_lsb();
    criterion_metrics();
    criterion_vae_math();
    run_mnist(opt);
    run_cifar(opt);
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 2;
  }

  std::sort(g_lines.begin(), g_lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  std::ostringstream summary;
  int failed = 0;
  for (const auto& l : g_lines) {
    static const char* words[] = {"PASS", "FAIL", "SKIP"};
    summary << words[static_cast<int>(l.verdict)] << " criterion " << l.id << " " << l.name << ": " << l.detail
            << '\n';
    failed += l.verdict == Verdict::fail;
  }
  dump(opt.work / "summary.txt", summary.str());
  std::cout << "\nsummary (" << opt.work.string() << "/summary.txt)\n" << summary.str();
  return failed ? 1 : 0;
}
