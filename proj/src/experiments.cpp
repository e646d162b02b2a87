#include "stegsan/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stegsan/error.hpp"

namespace stegsan::experiments {

namespace {

constexpr std::size_t kChunk = 256;

const steg::DeepHidingModel& deep_model(HidingMethod method, const HidingModels& models) {
  const auto* m = method == HidingMethod::ddh ? models.ddh : models.udh;
  if (!m) throw StateError(std::string(to_string(method)) + " model not provided");
  if (!m->trained()) throw StateError(std::string(to_string(method)) + " model is untrained");
  return *m;
}

template <typename F>
void for_chunks(std::size_t n, F&& f) {
  for (std::size_t start = 0; start < n; start += kChunk) f(start, std::min(n, start + kChunk));
}

std::vector<const ImageTensor*> pointers(std::span<const ImageTensor> xs) {
  std::vector<const ImageTensor*> p;
  p.reserve(xs.size());
  for (const auto& x : xs) p.push_back(&x);
  return p;
}

}  // namespace

std::vector<std::size_t> draw_pairing(std::size_t count, Seed seed) {
  RngStream rng(child_seed(seed, "pairing"));
  std::vector<std::size_t> idx(count);
  for (auto& i : idx) i = rng.index(count);
  return idx;
}

std::vector<ImageTensor> hide_all(HidingMethod method, const HidingModels& models,
                                  std::span<const ImageTensor* const> covers,
                                  std::span<const ImageTensor* const> secrets) {
  if (covers.size() != secrets.size()) throw UsageError("hide_all: cover/secret count mismatch");
  std::vector<ImageTensor> out;
  out.reserve(covers.size());
  switch (method) {
    case HidingMethod::lsb:
      for (std::size_t i = 0; i < covers.size(); ++i) out.push_back(steg::lsb_hide(*covers[i], *secrets[i], models.lsb));
      break;
    case HidingMethod::ddh:
    case HidingMethod::udh: {
      const auto& m = deep_model(method, models);
      for_chunks(covers.size(), [&](std::size_t a, std::size_t b) {
        std::vector<const ImageTensor*> c(covers.begin() + a, covers.begin() + b);
        std::vector<const ImageTensor*> s(secrets.begin() + a, secrets.begin() + b);
        for (auto& x : m.hide_batch(c, s)) out.push_back(std::move(x));
      });
      break;
    }
    case HidingMethod::clean:
      throw UsageError("clean is not a hiding method");
  }
  return out;
}

std::vector<ImageTensor> reveal_all(HidingMethod method, const HidingModels& models,
                                    std::span<const ImageTensor* const> containers) {
  std::vector<ImageTensor> out;
  out.reserve(containers.size());
  switch (method) {
    case HidingMethod::lsb:
      for (const auto* c : containers) out.push_back(steg::lsb_reveal(*c, models.lsb));
      break;
    case HidingMethod::ddh:
    case HidingMethod::udh: {
      const auto& m = deep_model(method, models);
      for_chunks(containers.size(), [&](std::size_t a, std::size_t b) {
        std::vector<const ImageTensor*> c(containers.begin() + a, containers.begin() + b);
        for (auto& x : m.reveal_batch(c)) out.push_back(std::move(x));
      });
      break;
    }
    case HidingMethod::clean:
      throw UsageError("clean is not a hiding method");
  }
  return out;
}

std::vector<StegoRecord> generate_containers(const LabeledDataset& test, HidingMethod method,
                                             const HidingModels& models, Seed seed) {
  if (method == HidingMethod::clean) throw UsageError("clean is not a hiding method");
  const std::size_t n = test.size();
  const auto pairing = draw_pairing(n, seed);
  std::vector<const ImageTensor*> covers, secrets;
  for (std::size_t i = 0; i < n; ++i) {
    covers.push_back(&test.images[i]);
    secrets.push_back(&test.images[pairing[i]]);
  }
  auto containers = hide_all(method, models, covers, secrets);
  std::vector<StegoRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    records.push_back({test.images[i], test.labels[i], test.images[pairing[i]], test.labels[pairing[i]],
                       std::move(containers[i]), method, i, pairing[i]});
  }
  return records;
}

std::vector<ImageTensor> Sanitizer::apply(std::span<const ImageTensor* const> xs, std::string_view stream) const {
  std::vector<ImageTensor> out;
  out.reserve(xs.size());
  switch (kind) {
    case SanitizerKind::none:
      for (const auto* x : xs) out.push_back(*x);
      break;
    case SanitizerKind::gaussian: {
      const Seed base = child_seed(noise.seed, stream);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        RngStream rng(child_seed(base, "noise", i));
        out.push_back(steg::gaussian_sanitize(*xs[i], noise, rng));
      }
      break;
    }
    case SanitizerKind::suds: {
      if (!vae) throw StateError("SUDS sanitizer has no model");
      const Seed base = child_seed(vae->config().seed, stream);
      for_chunks(xs.size(), [&](std::size_t a, std::size_t b) {
        std::vector<const ImageTensor*> chunk(xs.begin() + a, xs.begin() + b);
        RngStream rng(child_seed(base, "sample", a));
        for (auto& x : vae->sanitize_batch(chunk, &rng)) out.push_back(std::move(x));
      });
      break;
    }
  }
  return out;
}

MetricsReport evaluate_sanitizer(std::span<const ImageTensor> covers, const RecordSet& records,
                                 const Sanitizer& sanitizer, const HidingModels& models) {
  const SanitizerKind sk = sanitizer.kind;
  MetricsReport report;
  if (!covers.empty()) {
    MseAccumulator acc;
    const auto cp = pointers(covers);
    const auto clean = sanitizer.apply(cp, "clean");
    for (std::size_t i = 0; i < covers.size(); ++i) acc.add(mse(covers[i], clean[i]));
    report.set({sk, HidingMethod::clean, MetricColumn::sanitized}, acc.mean(), acc.count());
  }
  for (const auto& [method, recs] : records) {
    if (recs.empty()) throw UsageError("evaluate_sanitizer: no records for " + std::string(to_string(method)));
    std::vector<const ImageTensor*> containers;
    for (const auto& r : recs) containers.push_back(&r.container);
    const auto sanitized = sanitizer.apply(containers, to_string(method));
    const auto revealed = reveal_all(method, models, containers);
    std::vector<ImageTensor> revealed_sanitized;
    if (sk == SanitizerKind::none) {
      revealed_sanitized = revealed;
    } else {
      revealed_sanitized = reveal_all(method, models, pointers(sanitized));
    }
    MseAccumulator xs, rs, rss;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      xs.add(mse(recs[i].container, sanitized[i]));
      rs.add(mse(recs[i].secret, revealed[i]));
      rss.add(mse(recs[i].secret, revealed_sanitized[i]));
    }
    report.set({sk, method, MetricColumn::sanitized}, xs.mean(), xs.count());
    report.set({sk, method, MetricColumn::revealed}, rs.mean(), rs.count());
    report.set({sk, method, MetricColumn::revealed_sanitized}, rss.mean(), rss.count());
  }
  return report;
}

std::vector<AblationPoint> latent_ablation(const LabeledDataset& train, std::span<const ImageTensor> covers,
                                           const RecordSet& records, const HidingModels& models,
                                           const suds::VaeConfig& base, std::span<const int> sizes,
                                           const AblationModelSink& keep) {
  std::vector<AblationPoint> out;
  for (int n : sizes) {
    suds::VaeConfig cfg = base;
    cfg.latent = n;
    suds::VaeModel model = [&] {
      try {
        return suds::train_suds(train, cfg);
      } catch (const TrainingError& e) {
        throw TrainingError("latent size " + std::to_string(n) + ": " + e.what());
      }
    }();
    out.push_back({n, evaluate_sanitizer(covers, records, {SanitizerKind::suds, &model, {}}, models)});
    if (keep) keep(n, std::move(model));
  }
  return out;
}

std::vector<LatentStats> latent_probe(const suds::VaeModel& model, const RecordSet& records) {
  if (records.empty()) throw UsageError("latent_probe: no records");
  const std::size_t nf = static_cast<std::size_t>(model.latent());

  // Welford accumulators per (digit, type)
  struct Acc {
    std::size_t n = 0;
    std::vector<double> mean, m2;
  };
  std::map<std::pair<HidingMethod, std::uint8_t>, Acc> acc;
  auto add = [&](HidingMethod type, std::uint8_t digit, const std::vector<nn::Real>& mu) {
    auto& a = acc[{type, digit}];
    if (a.mean.empty()) a.mean.assign(nf, 0.0), a.m2.assign(nf, 0.0);
    ++a.n;
    for (std::size_t f = 0; f < nf; ++f) {
      const double d = mu[f] - a.mean[f];
      a.mean[f] += d / static_cast<double>(a.n);
      a.m2[f] += d * (mu[f] - a.mean[f]);
    }
  };
  auto encode_group = [&](HidingMethod type, const std::vector<StegoRecord>& recs, bool covers) {
    for_chunks(recs.size(), [&](std::size_t a, std::size_t b) {
      std::vector<const ImageTensor*> xs;
      for (std::size_t i = a; i < b; ++i) xs.push_back(covers ? &recs[i].cover : &recs[i].container);
      const auto enc = model.encode_batch(xs);
      for (std::size_t i = a; i < b; ++i) add(type, recs[i].cover_label, enc[i - a].mu);
    });
  };
  encode_group(HidingMethod::clean, records.begin()->second, true);
  for (const auto& [method, recs] : records) encode_group(method, recs, false);

  std::vector<LatentStats> out;
  for (int digit = 0; digit < 10; ++digit) {
    for (HidingMethod type : {HidingMethod::clean, HidingMethod::lsb, HidingMethod::ddh, HidingMethod::udh}) {
      auto it = acc.find({type, static_cast<std::uint8_t>(digit)});
      if (it == acc.end()) continue;
      LatentStats s{static_cast<std::uint8_t>(digit), type, it->second.n, it->second.mean, {}};
      s.stddev.resize(nf);
      for (std::size_t f = 0; f < nf; ++f) {
        s.stddev[f] = it->second.n > 1 ? std::sqrt(it->second.m2[f] / static_cast<double>(it->second.n - 1)) : 0.0;
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<OverlapResult> latent_overlap(std::span<const LatentStats> stats, double threshold) {
  std::vector<OverlapResult> out;
  for (const auto& cover : stats) {
    if (cover.type != HidingMethod::clean) continue;
    for (const auto& other : stats) {
      if (other.digit != cover.digit || other.type == HidingMethod::clean) continue;
      OverlapResult r{cover.digit, other.type, 0, static_cast<int>(cover.mean.size()), 0.0};
      for (std::size_t f = 0; f < cover.mean.size(); ++f) {
        const double pooled =
            std::sqrt((cover.stddev[f] * cover.stddev[f] + other.stddev[f] * other.stddev[f]) / 2.0);
        const double diff = std::abs(cover.mean[f] - other.mean[f]);
        const double sep = pooled > 0 ? diff / pooled : (diff > 0 ? INFINITY : 0.0);
        r.max_separation = std::max(r.max_separation, sep);
        if (sep < threshold) ++r.overlapping;
      }
      out.push_back(r);
    }
  }
  return out;
}

std::string latent_stats_csv(std::span<const LatentStats> stats) {
  std::ostringstream os;
  os << "digit,type,count,feature,mean,std\n";
  for (const auto& s : stats) {
    for (std::size_t f = 0; f < s.mean.size(); ++f) {
      os << int(s.digit) << ',' << (s.type == HidingMethod::clean ? "cover" : to_string(s.type)) << ','
         << s.count << ',' << f << ',' << format_number(s.mean[f]) << ',' << format_number(s.stddev[f]) << '\n';
    }
  }
  return os.str();
}

}  // namespace stegsan::experiments
