#include <doctest.h>

#include "fixtures.hpp"
#include "stegsan/error.hpp"
#include "stegsan/experiments.hpp"
#include "stegsan/poisoning.hpp"

using namespace stegsan;
using namespace stegsan::experiments;

namespace {

// Deep models with random weights: good enough for bookkeeping checks.
struct Fixture {
  LabeledDataset test = testing::synthetic_digits(60, 17);
  steg::DeepHidingModel ddh = make(steg::DeepMode::ddh);
  steg::DeepHidingModel udh = make(steg::DeepMode::udh);
  HidingModels models{{}, &ddh, &udh};

  static steg::DeepHidingModel make(steg::DeepMode mode) {
    steg::DeepHidingConfig cfg;
    cfg.mode = mode;
    cfg.width = 4;
    cfg.seed = Seed{mode == steg::DeepMode::ddh ? 1u : 2u};
    steg::DeepHidingModel m(cfg);
    m.mark_trained();
    return m;
  }
  RecordSet records(Seed seed) const {
    RecordSet rs;
    for (auto m : kHidingMethods) rs[m] = generate_containers(test, m, models, seed);
    return rs;
  }
};

}  // namespace

TEST_CASE("resistance gain formula") {
  CHECK(resistance_gain(93.26, 0.56) == doctest::Approx(1375.4).epsilon(0.1 / 1375.4));
  CHECK(std::abs(resistance_gain(93.26, 0.56) - 1375.0) <= 1.0);
  CHECK(resistance_gain(40.0, 40.0) == 0.0);
  CHECK(resistance_gain(50.0, 0.0) == doctest::Approx(100.0));
  CHECK_THROWS_AS(resistance_gain(100.0, 3.0), DegenerateInputError);
  CHECK_THROWS_AS(resistance_gain(120.0, 3.0), UsageError);
}

TEST_CASE("container generation shares one pairing across methods") {
  Fixture f;
  const auto rs = f.records(Seed{5});
  const auto& lsb = rs.at(HidingMethod::lsb);
  const auto& ddh = rs.at(HidingMethod::ddh);
  REQUIRE(lsb.size() == f.test.size());
  REQUIRE(ddh.size() == f.test.size());
  for (std::size_t i = 0; i < lsb.size(); ++i) {
    CHECK(lsb[i].cover_label == ddh[i].cover_label);
    CHECK(lsb[i].secret_label == ddh[i].secret_label);
    CHECK(lsb[i].secret_index == ddh[i].secret_index);
    CHECK(lsb[i].container.shape() == lsb[i].cover.shape());
    // LSB containment: the secret's top nibble sits in the container's low nibble
    const auto c = lsb[i].container.to_bytes(), s = lsb[i].secret.to_bytes(), cv = lsb[i].cover.to_bytes();
    for (std::size_t p = 0; p < c.size(); ++p) {
      CHECK((c[p] & 0x0F) == (s[p] >> 4));
      CHECK((c[p] >> 4) == (cv[p] >> 4));
    }
  }
  const auto again = generate_containers(f.test, HidingMethod::ddh, f.models, Seed{5});
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].container == ddh[i].container);
  CHECK(draw_pairing(60, Seed{5}) != draw_pairing(60, Seed{6}));
}

TEST_CASE("untrained deep models are rejected") {
  Fixture f;
  steg::DeepHidingConfig cfg;
  steg::DeepHidingModel raw(cfg);
  HidingModels m{{}, &raw, nullptr};
  CHECK_THROWS_AS(generate_containers(f.test, HidingMethod::ddh, m, Seed{1}), StateError);
  CHECK_THROWS_AS(generate_containers(f.test, HidingMethod::udh, m, Seed{1}), StateError);
}

TEST_CASE("identity sanitizer copies the revealed column") {
  Fixture f;
  const auto rs = f.records(Seed{9});
  const auto r = evaluate_sanitizer(f.test.images, rs, {SanitizerKind::none}, f.models);
  CHECK(r.at({SanitizerKind::none, HidingMethod::clean, MetricColumn::sanitized}).mse == 0.0);
  for (auto m : kHidingMethods) {
    const auto& s = r.at({SanitizerKind::none, m, MetricColumn::revealed});
    const auto& ss = r.at({SanitizerKind::none, m, MetricColumn::revealed_sanitized});
    CHECK(s.mse == ss.mse);
    CHECK(s.count == f.test.size());
    CHECK(r.at({SanitizerKind::none, m, MetricColumn::sanitized}).mse == 0.0);
  }
}

TEST_CASE("noise sanitizer scores are reproducible and consistent") {
  Fixture f;
  const auto rs = f.records(Seed{9});
  Sanitizer s{SanitizerKind::gaussian, nullptr, {0.0f, 0.02f, Seed{3}}};
  const auto a = evaluate_sanitizer(f.test.images, rs, s, f.models);
  const auto b = evaluate_sanitizer(f.test.images, rs, s, f.models);
  CHECK(a.to_csv() == b.to_csv());
  for (const auto& [k, v] : a.rows()) {
    if (v.mse > 0) CHECK(v.psnr == doctest::Approx(psnr_from_mse(v.mse)));
  }
  // sigma 0.02 on the unit scale is about 5 grey levels before clipping
  const double clean = a.at({SanitizerKind::gaussian, HidingMethod::clean, MetricColumn::sanitized}).mse;
  CHECK(clean > 5.0);
  CHECK(clean < 30.0);
}

TEST_CASE("latent probe groups by digit and image type") {
  Fixture f;
  const auto rs = f.records(Seed{2});
  suds::VaeConfig cfg;
  cfg.latent = 8;
  cfg.width = 4;
  suds::VaeModel vae(cfg);
  const auto stats = latent_probe(vae, rs);
  CHECK(stats.size() == 40);
  for (const auto& s : stats) {
    CHECK(s.mean.size() == 8);
    for (double v : s.stddev) CHECK(v >= 0.0);
  }
  const auto ov = latent_overlap(stats);
  CHECK(ov.size() == 30);
  for (const auto& o : ov) {
    CHECK(o.features == 8);
    CHECK(o.overlapping <= 8);
  }
  CHECK(latent_stats_csv(stats).rfind("digit,type,count,feature,mean,std\n", 0) == 0);
}

TEST_CASE("poisoning bookkeeping") {
  CHECK(poison_count(60000, 0.4) == 24000);
  CHECK(poison_count(10000, 0.5) == 5000);
  CHECK(poison_count(99, 0.0) == 0);
  CHECK_THROWS_AS(poison_count(10, 1.5), UsageError);

  Fixture f;
  const auto& train = f.test;
  const auto p = poison_dataset(train, f.ddh, 0.4, Seed{8});
  CHECK(p.poisoned.size() == 24);
  CHECK(p.secrets.size() == 24);
  CHECK(p.data.size() == train.size());
  std::vector<bool> hit(train.size(), false);
  for (std::size_t j = 0; j < p.poisoned.size(); ++j) {
    const auto i = p.poisoned[j];
    hit[i] = true;
    CHECK(p.data.labels[i] == train.labels[p.secrets[j]]);
    CHECK(p.original_labels[j] == train.labels[i]);
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!hit[i]) {
      CHECK(p.data.images[i] == train.images[i]);
      CHECK(p.data.labels[i] == train.labels[i]);
    }
  }
  const auto none = poison_dataset(train, f.ddh, 0.0, Seed{8});
  CHECK(none.data.images == train.images);
  CHECK(none.data.labels == train.labels);

  const auto mixed = make_poison_test_set(train, f.ddh, 0.5, Seed{8});
  CHECK(std::count(mixed.is_container.begin(), mixed.is_container.end(), true) == 30);
}

TEST_CASE("attack success leaves out self-label containers") {
  Fixture f;
  const auto train = testing::synthetic_digits(300, 51);
  ClassifierConfig cfg;
  cfg.epochs = 1;
  const auto clf = train_classifier(train, cfg);
  const auto mixed = make_poison_test_set(f.test, f.ddh, 0.5, Seed{4});
  const auto o = evaluate_poisoning(clf, mixed, nullptr);
  std::size_t self = 0;
  for (std::size_t i = 0; i < mixed.images.size(); ++i) {
    self += mixed.is_container[i] && mixed.secret_labels[i] == mixed.labels[i];
  }
  CHECK(o.self_label_excluded == self);
  CHECK(o.attack_count + o.self_label_excluded == 30);
  CHECK(o.clean_count == 30);
  CHECK(o.clean_accuracy >= 0.0);
  CHECK(o.clean_accuracy <= 100.0);
  const auto rep = make_poison_report(o, o);
  CHECK(rep.resistance_gain == 0.0);
  CHECK(rep.to_csv().find("attack_success_with_suds,") != std::string::npos);
}
