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

#include "segshap/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace segshap {

std::string to_string(PerturbationStrategy s) {
  switch (s) {
    case PerturbationStrategy::normal: return "normal";
    case PerturbationStrategy::global_gaussian: return "global_gaussian";
    case PerturbationStrategy::global_mean: return "global_mean";
    case PerturbationStrategy::local_mean: return "local_mean";
  }
  throw Error("bad perturbation strategy");
}

PerturbationStrategy perturbation_from_string(const std::string& name) {
  if (name == "normal") return PerturbationStrategy::normal;
  if (name == "global_gaussian") return PerturbationStrategy::global_gaussian;
  if (name == "global_mean") return PerturbationStrategy::global_mean;
  if (name == "local_mean") return PerturbationStrategy::local_mean;
  throw ConfigInvalid("unknown perturbation strategy '" + name + "'");
}

void EvalConfig::validate() const {
  if (k_schedule.size() < 2) {
    throw ConfigInvalid("k schedule needs at least two thresholds");
  }
  double prev = 0.0;
  for (double k : k_schedule) {
    if (!(k > prev) || k > 1.0) {
      throw ConfigInvalid("k schedule must be strictly increasing in (0, 1]");
    }
    prev = k;
  }
  if (!(aucd_step_fraction > 0.0) || aucd_step_fraction > 1.0) {
    throw ConfigInvalid("aucd step fraction must be in (0, 1]");
  }
}

double trapezoid_area(const Curve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += 0.5 * (curve[i].second + curve[i - 1].second) *
            (curve[i].first - curve[i - 1].first);
  }
  return area;
}

TimeSeries perturb_values(PerturbationStrategy strategy, const TimeSeries& x,
                          const std::vector<std::uint8_t>& mask,
                          const ChannelStats& stats, Rng& rng,
                          std::size_t local_mean_radius) {
  if (mask.size() != x.cells()) {
    throw ShapeMismatch("mask size does not match instance");
  }
  TimeSeries out = x;
  const std::size_t L = x.length();
  for (std::size_t c = 0; c < x.channels(); ++c) {
    for (std::size_t t = 0; t < L; ++t) {
      if (!mask[c * L + t]) continue;
      switch (strategy) {
        case PerturbationStrategy::normal:
          out(c, t) = rng.normal();
          break;
        case PerturbationStrategy::global_gaussian:
          out(c, t) = rng.normal(stats.mean[c], stats.stddev[c]);
          break;
        case PerturbationStrategy::global_mean:
          out(c, t) = stats.mean[c];
          break;
        case PerturbationStrategy::local_mean: {
          const std::size_t lo =
              t >= local_mean_radius ? t - local_mean_radius : 0;
          const std::size_t hi = std::min(L - 1, t + local_mean_radius);
          double sum = 0.0;
          for (std::size_t u = lo; u <= hi; ++u) sum += x(c, u);
          out(c, t) = sum / static_cast<double>(hi - lo + 1);
          break;
        }
      }
    }
  }
  return out;
}

namespace {

struct RankedCell {
  double value;
  std::size_t channel;
  std::size_t timepoint;
};

/// Descending by value; ties by channel then timepoint.
void sort_ranked(std::vector<RankedCell>& cells) {
  std::sort(cells.begin(), cells.end(),
            [](const RankedCell& a, const RankedCell& b) {
              if (a.value != b.value) return a.value > b.value;
              if (a.channel != b.channel) return a.channel < b.channel;
              return a.timepoint < b.timepoint;
            });
}

}  // namespace

InterpretTimeResult interpret_time(const Classifier& model, const TimeSeries& x,
                                   const TimepointAttribution& attr,
                                   PerturbationStrategy strategy,
                                   const ChannelStats& stats,
                                   const EvalConfig& cfg) {
  cfg.validate();
  if (!attr.values.same_shape(x)) {
    throw ShapeMismatch("attribution shape does not match instance");
  }

  // positive-attribution cells, ranked descending
  std::vector<RankedCell> positive;
  for (std::size_t c = 0; c < x.channels(); ++c) {
    for (std::size_t t = 0; t < x.length(); ++t) {
      if (attr.values(c, t) > 0.0) {
        positive.push_back({attr.values(c, t), c, t});
      }
    }
  }
  sort_ranked(positive);

  InterpretTimeResult result;
  result.strategy = strategy;

  const std::size_t L = x.length();
  std::vector<TimeSeries> batch;
  batch.push_back(x);
  for (std::size_t i = 0; i < cfg.k_schedule.size(); ++i) {
    const double k = cfg.k_schedule[i];
    const std::size_t n_top = std::min(
        positive.size(),
        static_cast<std::size_t>(
            std::ceil(k * static_cast<double>(positive.size()))));
    std::vector<std::uint8_t> top_mask(x.cells(), 0);
    std::vector<std::uint8_t> bottom_mask(x.cells(), 0);
    for (std::size_t j = 0; j < positive.size(); ++j) {
      auto& mask = j < n_top ? top_mask : bottom_mask;
      mask[positive[j].channel * L + positive[j].timepoint] = 1;
    }
    // one substream per (k, arm): masks determine the draws, so any
    // positive rescaling of the attribution reproduces them bit-exactly
    Rng top_rng = Rng::from_words({cfg.seed, fnv1a64("interprettime"), 2 * i});
    Rng bottom_rng =
        Rng::from_words({cfg.seed, fnv1a64("interprettime"), 2 * i + 1});
    batch.push_back(perturb_values(strategy, x, top_mask, stats, top_rng,
                                   cfg.local_mean_radius));
    batch.push_back(perturb_values(strategy, x, bottom_mask, stats, bottom_rng,
                                   cfg.local_mean_radius));
  }

  const ProbaMatrix probs = model.predict_proba(batch);
  const std::vector<double>& base_row = probs.front();
  const std::size_t predicted = static_cast<std::size_t>(
      std::max_element(base_row.begin(), base_row.end()) - base_row.begin());
  const double s_x = base_row[predicted];
  if (!(s_x > 0.0)) {
    throw ZeroBaseProbability("predicted class has zero probability");
  }

  for (std::size_t i = 0; i < cfg.k_schedule.size(); ++i) {
    const double k = cfg.k_schedule[i];
    const double s_top = probs[1 + 2 * i][predicted];
    const double s_bottom = probs[2 + 2 * i][predicted];
    result.top_curve.emplace_back(k, (s_x - s_top) / s_x);
    result.bottom_curve.emplace_back(k, (s_x - s_bottom) / s_x);
  }

  const double k_range = cfg.k_schedule.back() - cfg.k_schedule.front();
  result.aucse = trapezoid_area(result.top_curve) / k_range;
  const double bottom_area = trapezoid_area(result.bottom_curve) / k_range;
  const double a = result.aucse;
  const double b = 1.0 - bottom_area;
  result.f_score = (a + b) != 0.0 ? 2.0 * a * b / (a + b) : 0.0;

  if (positive.empty()) {
    result.no_positive_attributions = true;
    result.aucse = 0.0;
    result.f_score = 0.0;
  }
  return result;
}

std::pair<TimeSeries, std::size_t> opposite_class_representative(
    const Classifier& model, const LabeledDataset& train,
    std::size_t predicted) {
  train.validate();
  std::vector<std::size_t> counts(train.class_names.size(), 0);
  for (std::size_t label : train.labels) ++counts[label];
  std::size_t present = 0;
  for (std::size_t c : counts) present += c > 0;
  if (present < 2) {
    throw SingleClassDataset("need at least two classes in the train set");
  }

  std::vector<TimeSeries> candidates;
  std::vector<std::size_t> candidate_classes;
  for (std::size_t cls = 0; cls < counts.size(); ++cls) {
    if (cls == predicted || counts[cls] == 0) continue;
    TimeSeries mean(train.channels(), train.length(), 0.0);
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (train.labels[i] != cls) continue;
      for (std::size_t j = 0; j < mean.raw().size(); ++j) {
        mean.raw()[j] += train.instances[i].raw()[j];
      }
    }
    for (double& v : mean.raw()) v /= static_cast<double>(counts[cls]);
    candidates.push_back(std::move(mean));
    candidate_classes.push_back(cls);
  }
  if (candidates.empty()) {
    throw SingleClassDataset("no class other than the predicted one");
  }

  const ProbaMatrix probs = model.predict_proba(candidates);
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (probs[i][predicted] < probs[best][predicted]) best = i;
  }
  return {candidates[best], candidate_classes[best]};
}

AUCDResult aucd(const Classifier& model, const TimeSeries& x,
                const TimepointAttribution& attr, const LabeledDataset& train,
                const EvalConfig& cfg) {
  cfg.validate();
  if (!attr.values.same_shape(x)) {
    throw ShapeMismatch("attribution shape does not match instance");
  }
  const std::size_t predicted = model.predict_class(x);
  auto [representative, opposite] =
      opposite_class_representative(model, train, predicted);

  // all cells ranked by |attribution| descending
  std::vector<RankedCell> ranked;
  ranked.reserve(x.cells());
  for (std::size_t c = 0; c < x.channels(); ++c) {
    for (std::size_t t = 0; t < x.length(); ++t) {
      ranked.push_back({std::abs(attr.values(c, t)), c, t});
    }
  }
  sort_ranked(ranked);

  const std::size_t n_cells = x.cells();
  const std::size_t step = static_cast<std::size_t>(
      std::ceil(cfg.aucd_step_fraction * static_cast<double>(n_cells)));

  std::vector<TimeSeries> deletion_states, insertion_states;
  std::vector<double> fractions;
  TimeSeries del_state = x;
  TimeSeries ins_state = representative;
  deletion_states.push_back(del_state);
  insertion_states.push_back(ins_state);
  fractions.push_back(0.0);
  std::size_t replaced = 0;
  while (replaced < n_cells) {
    const std::size_t until = std::min(n_cells, replaced + step);
    for (; replaced < until; ++replaced) {
      const RankedCell& cell = ranked[replaced];
      del_state(cell.channel, cell.timepoint) =
          representative(cell.channel, cell.timepoint);
      ins_state(cell.channel, cell.timepoint) = x(cell.channel, cell.timepoint);
    }
    deletion_states.push_back(del_state);
    insertion_states.push_back(ins_state);
    fractions.push_back(static_cast<double>(replaced) /
                        static_cast<double>(n_cells));
  }

  const ProbaMatrix del_probs = model.predict_proba(deletion_states);
  const ProbaMatrix ins_probs = model.predict_proba(insertion_states);

  AUCDResult result;
  result.opposite_class = opposite;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    result.deletion_curve.emplace_back(fractions[i], del_probs[i][predicted]);
    result.insertion_curve.emplace_back(fractions[i], ins_probs[i][predicted]);
  }
  result.audc = trapezoid_area(result.deletion_curve);
  result.auic = trapezoid_area(result.insertion_curve);
  result.aucd = result.auic - result.audc;
  return result;
}

namespace {

nlohmann::json curve_json(const Curve& curve) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [xv, yv] : curve) j.push_back({xv, yv});
  return j;
}

}  // namespace

std::string InterpretTimeResult::to_json() const {
  nlohmann::json j;
  j["strategy"] = segshap::to_string(strategy);
  j["top_curve"] = curve_json(top_curve);
  j["bottom_curve"] = curve_json(bottom_curve);
  j["aucse"] = aucse;
  j["f_score"] = f_score;
  j["no_positive_attributions"] = no_positive_attributions;
  return j.dump();
}

std::string AUCDResult::to_json() const {
  nlohmann::json j;
  j["deletion_curve"] = curve_json(deletion_curve);
  j["insertion_curve"] = curve_json(insertion_curve);
  j["audc"] = audc;
  j["auic"] = auic;
  j["aucd"] = aucd;
  j["opposite_class"] = opposite_class;
  return j.dump();
}

}  // namespace segshap
