// Copyright 2026 The segshap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "segshap/evaluation.hpp"
#include "segshap/rng.hpp"

using namespace segshap;

namespace {

/// Fixed output regardless of input.
class ConstantModel final : public Classifier {
 public:
  ConstantModel(std::size_t d, std::size_t L, std::vector<double> row)
      : d_(d), L_(L), row_(std::move(row)) {}
  ProbaMatrix predict_proba(std::span<const TimeSeries> batch) const override {
    return ProbaMatrix(batch.size(), row_);
  }
  const std::vector<std::string>& class_names() const override {
    return names_;
  }
  std::size_t channels() const override { return d_; }
  std::size_t length() const override { return L_; }

 private:
  std::size_t d_, L_;
  std::vector<double> row_;
  std::vector<std::string> names_{"a", "b"};
};

/// Probability 1 for class 0 on one exact input, 0 otherwise.
class ExactMatchModel final : public Classifier {
 public:
  explicit ExactMatchModel(TimeSeries target) : target_(std::move(target)) {}
  ProbaMatrix predict_proba(std::span<const TimeSeries> batch) const override {
    ProbaMatrix out;
    for (const TimeSeries& x : batch) {
      out.push_back(x == target_ ? std::vector<double>{1.0, 0.0}
                                 : std::vector<double>{0.0, 1.0});
    }
    return out;
  }
  const std::vector<std::string>& class_names() const override {
    return names_;
  }
  std::size_t channels() const override { return target_.channels(); }
  std::size_t length() const override { return target_.length(); }

 private:
  TimeSeries target_;
  std::vector<std::string> names_{"a", "b"};
};

ChannelStats zero_stats(std::size_t d) {
  ChannelStats stats;
  stats.mean.assign(d, 0.0);
  stats.stddev.assign(d, 1.0);
  return stats;
}

TimepointAttribution make_attr(TimeSeries values) {
  TimepointAttribution attr;
  attr.source.segmentation =
      Segmentation::shared({0, values.length()}, values.channels());
  attr.source.values.assign(values.channels(), {0.0});
  attr.values = std::move(values);
  attr.mode = ExpansionMode::replicated;
  return attr;
}

LabeledDataset two_bump_centroids(std::size_t length = 20,
                                  std::size_t width = 4) {
  LabeledDataset train;
  train.class_names = {"zero", "one"};
  TimeSeries c0(1, length, 0.0), c1(1, length, 0.0);
  for (std::size_t t = 0; t < width; ++t) c0(0, t) = 1.0;
  for (std::size_t t = length - width; t < length; ++t) c1(0, t) = 1.0;
  train.instances = {c0, c1};
  train.labels = {0, 1};
  return train;
}

}  // namespace

TEST_CASE("default evaluation config") {
  const EvalConfig cfg;
  CHECK(cfg.k_schedule ==
        std::vector<double>{0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75,
                            0.85, 0.95, 1.0});
  CHECK(cfg.aucd_step_fraction == 0.04);
  cfg.validate();

  EvalConfig bad = cfg;
  bad.k_schedule = {0.5, 0.4};
  CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
  bad = cfg;
  bad.aucd_step_fraction = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
}

TEST_CASE("perturb_values") {
  const TimeSeries x = TimeSeries::from_rows({{5, 5, 5, 5, 5}});
  const ChannelStats stats = zero_stats(1);
  Rng rng(1);
  SUBCASE("empty mask leaves x untouched") {
    for (auto strategy :
         {PerturbationStrategy::normal, PerturbationStrategy::global_gaussian,
          PerturbationStrategy::global_mean,
          PerturbationStrategy::local_mean}) {
      CHECK(perturb_values(strategy, x, std::vector<std::uint8_t>(5, 0), stats,
                           rng) == x);
    }
  }
  SUBCASE("global_mean writes the channel mean") {
    const TimeSeries out =
        perturb_values(PerturbationStrategy::global_mean, x,
                       {1, 0, 1, 0, 0}, stats, rng);
    CHECK(out == TimeSeries::from_rows({{0, 5, 0, 5, 5}}));
  }
  SUBCASE("local_mean keeps a constant channel constant") {
    const TimeSeries out =
        perturb_values(PerturbationStrategy::local_mean, x,
                       {1, 1, 1, 1, 1}, stats, rng);
    CHECK(out == x);
  }
  SUBCASE("mask shape is validated") {
    CHECK_THROWS_AS(perturb_values(PerturbationStrategy::normal, x,
                                   {1, 0}, stats, rng),
                    ShapeMismatch);
  }
}

TEST_CASE("interpret_time limits") {
  const std::size_t L = 30;
  TimeSeries x(1, L, 5.0);
  TimeSeries attr_values(1, L, 1.0);  // every cell positive
  const TimepointAttribution attr = make_attr(attr_values);
  const ChannelStats stats = zero_stats(1);
  EvalConfig cfg;
  cfg.seed = 3;

  SUBCASE("perturbation-invariant model gives AUCSE exactly 0") {
    const ConstantModel model(1, L, {0.7, 0.3});
    const InterpretTimeResult res = interpret_time(
        model, x, attr, PerturbationStrategy::normal, stats, cfg);
    CHECK(res.aucse == 0.0);
    for (const auto& [k, s_bar] : res.top_curve) CHECK(s_bar == 0.0);
  }
  SUBCASE("certain collapse gives AUCSE 1") {
    const ExactMatchModel model(x);
    // global_mean with zero stats rewrites every masked cell to 0 != 5
    const InterpretTimeResult res = interpret_time(
        model, x, attr, PerturbationStrategy::global_mean, stats, cfg);
    CHECK(res.aucse == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("bottom perturbation at k = 1 is empty, S_bar exactly 0") {
    const ConstantModel model(1, L, {0.6, 0.4});
    const InterpretTimeResult res = interpret_time(
        model, x, attr, PerturbationStrategy::normal, stats, cfg);
    CHECK(res.bottom_curve.back().first == 1.0);
    CHECK(res.bottom_curve.back().second == 0.0);
  }
  SUBCASE("no positive attributions flags the result") {
    const ConstantModel model(1, L, {0.7, 0.3});
    const TimepointAttribution none = make_attr(TimeSeries(1, L, -1.0));
    const InterpretTimeResult res = interpret_time(
        model, x, none, PerturbationStrategy::normal, stats, cfg);
    CHECK(res.no_positive_attributions);
    CHECK(res.aucse == 0.0);
    CHECK(res.f_score == 0.0);
  }
  SUBCASE("zero base probability is an error") {
    const ConstantModel model(1, L, {0.0, 0.0});  // deliberately degenerate
    CHECK_THROWS_AS(interpret_time(model, x, attr,
                                   PerturbationStrategy::normal, stats, cfg),
                    ZeroBaseProbability);
  }
}

TEST_CASE("opposite class representative") {
  SUBCASE("two classes leave a single candidate") {
    const LabeledDataset train = two_bump_centroids();
    const ClassifierHandle model = train_nearest_centroid(train);
    const auto [rep, cls] =
        opposite_class_representative(*model, train, 0);
    CHECK(cls == 1);
    CHECK(rep == train.instances[1]);
  }
  SUBCASE("representative is the class mean") {
    LabeledDataset train = two_bump_centroids();
    TimeSeries shifted = train.instances[1];
    for (double& v : shifted.raw()) v += 2.0;
    train.instances.push_back(shifted);
    train.labels.push_back(1);
    const ClassifierHandle model = train_nearest_centroid(train);
    const auto [rep, cls] = opposite_class_representative(*model, train, 0);
    CHECK(cls == 1);
    for (std::size_t t = 0; t < rep.length(); ++t) {
      CHECK(rep(0, t) ==
            doctest::Approx((train.instances[1](0, t) + shifted(0, t)) / 2.0));
    }
  }
  SUBCASE("three classes pick the argmin by direct evaluation") {
    LabeledDataset train;
    train.class_names = {"a", "b", "c"};
    train.instances.push_back(TimeSeries(1, 8, 0.0));
    train.instances.push_back(TimeSeries(1, 8, 1.0));
    train.instances.push_back(TimeSeries(1, 8, 10.0));
    train.labels = {0, 1, 2};
    const ClassifierHandle model = train_nearest_centroid(train);
    const auto [rep, cls] = opposite_class_representative(*model, train, 0);
    // oracle: evaluate the model on both candidate centroids directly
    const double p1 = model->predict_proba_one(train.instances[1])[0];
    const double p2 = model->predict_proba_one(train.instances[2])[0];
    CHECK(cls == (p2 < p1 ? 2 : 1));
    CHECK(cls == 2);
  }
  SUBCASE("single class is an error") {
    LabeledDataset train;
    train.class_names = {"only"};
    train.instances.push_back(TimeSeries(1, 4, 0.0));
    train.labels = {0};
    const ClassifierHandle model = train_nearest_centroid(train);
    CHECK_THROWS_AS(opposite_class_representative(*model, train, 0),
                    SingleClassDataset);
  }
}

TEST_CASE("aucd walks between x and the opposite representative") {
  const LabeledDataset train = two_bump_centroids();
  const ClassifierHandle model = train_nearest_centroid(train);
  const TimeSeries& x = train.instances[0];
  const TimepointAttribution attr = make_attr(TimeSeries(1, 20, 0.0));
  EvalConfig cfg;
  const AUCDResult res = aucd(*model, x, attr, train, cfg);

  SUBCASE("endpoints") {
    CHECK(res.deletion_curve.front().first == 0.0);
    CHECK(res.deletion_curve.back().first == 1.0);
    // the fully deleted state IS the representative: identical probability
    CHECK(res.deletion_curve.back().second == res.insertion_curve.front().second);
    CHECK(res.deletion_curve.front().second ==
          model->predict_proba_one(x)[0]);
    CHECK(res.opposite_class == 1);
  }
  SUBCASE("oracle: closed-form nearest-centroid walk reproduces the curves") {
    // zero attribution ranks cells in index order; rebuild the walk directly
    const TimeSeries& rep = train.instances[1];
    const std::size_t step = 1;  // ceil(0.04 * 20)
    auto prob0 = [&](const TimeSeries& s) {
      double d0 = 0.0, d1 = 0.0;
      for (std::size_t t = 0; t < 20; ++t) {
        d0 += (s(0, t) - x(0, t)) * (s(0, t) - x(0, t));
        d1 += (s(0, t) - rep(0, t)) * (s(0, t) - rep(0, t));
      }
      const double scale = std::sqrt(20.0);
      const double e0 = std::exp(-std::sqrt(d0) / scale);
      const double e1 = std::exp(-std::sqrt(d1) / scale);
      return e0 / (e0 + e1);
    };
    TimeSeries del = x;
    for (std::size_t j = 0; j <= 20 / step; ++j) {
      CHECK(res.deletion_curve[j].second ==
            doctest::Approx(prob0(del)).epsilon(1e-9));
      for (std::size_t t = j * step; t < std::min<std::size_t>(20, (j + 1) * step);
           ++t) {
        del(0, t) = rep(0, t);
      }
    }
    // symmetric two-centroid fixture: AUCD vanishes up to float error
    CHECK(std::abs(res.aucd) <= 1e-9);
  }
}

TEST_CASE("aucd default step and range on random fixtures") {
  Rng rng(21);
  const LabeledDataset train = two_bump_centroids(25, 5);
  const ClassifierHandle model = train_nearest_centroid(train);
  EvalConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    TimeSeries x(1, 25);
    TimeSeries values(1, 25);
    for (double& v : x.raw()) v = rng.normal();
    for (double& v : values.raw()) v = rng.normal();
    const AUCDResult res = aucd(*model, x, make_attr(values), train, cfg);
    CHECK(res.aucd >= -1.0);
    CHECK(res.aucd <= 1.0);
    CHECK(res.aucd == doctest::Approx(res.auic - res.audc));
    // ceil(0.04 * 25) = 1 cell per step: 26 curve points
    CHECK(res.deletion_curve.size() == 26);
  }
}

TEST_CASE("aucd of the reversed ranking is the negated aucd") {
  Rng rng(17);
  const LabeledDataset train = two_bump_centroids(25, 5);
  const ClassifierHandle model = train_nearest_centroid(train);
  EvalConfig cfg;  // ceil(0.04 * 25) = 1 divides 25 exactly
  for (int trial = 0; trial < 10; ++trial) {
    TimeSeries x(1, 25);
    for (double& v : x.raw()) v = rng.normal();
    TimeSeries values(1, 25);
    for (double& v : values.raw()) v = rng.uniform(0.1, 1.0);
    TimeSeries reversed_values(1, 25);
    for (std::size_t t = 0; t < 25; ++t) {
      reversed_values(0, t) = 2.0 - values(0, t);  // reverses the |attr| order
    }
    const AUCDResult fwd = aucd(*model, x, make_attr(values), train, cfg);
    const AUCDResult rev =
        aucd(*model, x, make_attr(reversed_values), train, cfg);
    CHECK(rev.aucd == doctest::Approx(-fwd.aucd).epsilon(1e-12));
  }
}

TEST_CASE("positive rescaling leaves both evaluations bit-identical") {
  Rng rng(4);
  const LabeledDataset train = two_bump_centroids(30, 6);
  const ClassifierHandle model = train_nearest_centroid(train);
  const ChannelStats stats = zero_stats(1);
  EvalConfig cfg;
  cfg.seed = 11;

  TimeSeries x(1, 30);
  for (double& v : x.raw()) v = rng.normal();
  TimeSeries values(1, 30);
  for (double& v : values.raw()) v = rng.normal();
  TimeSeries scaled = values;
  for (double& v : scaled.raw()) v *= 7.3;

  const InterpretTimeResult a = interpret_time(
      *model, x, make_attr(values), PerturbationStrategy::global_gaussian,
      stats, cfg);
  const InterpretTimeResult b = interpret_time(
      *model, x, make_attr(scaled), PerturbationStrategy::global_gaussian,
      stats, cfg);
  CHECK(a.aucse == b.aucse);
  CHECK(a.f_score == b.f_score);
  CHECK(a.top_curve == b.top_curve);
  CHECK(a.bottom_curve == b.bottom_curve);

  const AUCDResult c = aucd(*model, x, make_attr(values), train, cfg);
  const AUCDResult d = aucd(*model, x, make_attr(scaled), train, cfg);
  CHECK(c.aucd == d.aucd);
  CHECK(c.deletion_curve == d.deletion_curve);
  CHECK(c.insertion_curve == d.insertion_curve);
}

TEST_CASE("equal-length segments: normalized and replicated arms coincide") {
  Rng rng(6);
  const LabeledDataset train = two_bump_centroids(30, 6);
  const ClassifierHandle model = train_nearest_centroid(train);
  const ChannelStats stats = zero_stats(1);
  EvalConfig cfg;
  cfg.seed = 31;

  SegmentAttribution attr;
  attr.segmentation = segment_equal(30, 6);  // 30 divisible by 6
  attr.values.emplace_back();
  for (int s = 0; s < 6; ++s) attr.values[0].push_back(rng.normal());

  TimeSeries x(1, 30);
  for (double& v : x.raw()) v = rng.normal();

  const TimepointAttribution rep = replicate_to_timepoints(attr);
  const TimepointAttribution norm = normalize_to_timepoints(attr);
  const InterpretTimeResult ra = interpret_time(
      *model, x, rep, PerturbationStrategy::normal, stats, cfg);
  const InterpretTimeResult rb = interpret_time(
      *model, x, norm, PerturbationStrategy::normal, stats, cfg);
  CHECK(ra.aucse == rb.aucse);
  CHECK(ra.f_score == rb.f_score);

  const AUCDResult aa = aucd(*model, x, rep, train, cfg);
  const AUCDResult ab = aucd(*model, x, norm, train, cfg);
  CHECK(aa.aucd == ab.aucd);
}
