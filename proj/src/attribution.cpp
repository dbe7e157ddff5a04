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

#include "segshap/attribution.hpp"

#include <bit>
#include <cmath>

#include <nlohmann/json.hpp>

#include "segshap/rng.hpp"

namespace segshap {

std::string to_string(BackgroundKind k) {
  switch (k) {
    case BackgroundKind::zero: return "zero";
    case BackgroundKind::average: return "average";
    case BackgroundKind::custom: return "custom";
  }
  throw Error("bad background kind");
}

std::string to_string(ExpansionMode m) {
  return m == ExpansionMode::replicated ? "replicated" : "normalized";
}

BackgroundSet background_zero(std::size_t channels, std::size_t length) {
  BackgroundSet bg;
  bg.kind = BackgroundKind::zero;
  bg.instances.emplace_back(channels, length, 0.0);
  return bg;
}

BackgroundSet background_average(const LabeledDataset& train) {
  BackgroundSet bg;
  bg.kind = BackgroundKind::average;
  bg.instances.push_back(average_instance(train));
  return bg;
}

double SegmentAttribution::total() const {
  double sum = 0.0;
  for (const auto& channel : values) {
    for (double v : channel) sum += v;
  }
  return sum;
}

TimeSeries mask_replace(const TimeSeries& x, const TimeSeries& background,
                        const FeatureSet& active, const Segmentation& seg) {
  if (!x.same_shape(background) || seg.length() != x.length() ||
      seg.channels() != x.channels()) {
    throw ShapeMismatch("mask_replace inputs disagree on d x L");
  }
  if (active.size() != seg.feature_count()) {
    throw InvalidFeature("active set size does not match feature count");
  }
  TimeSeries out = background;
  std::size_t feature = 0;
  for (std::size_t c = 0; c < seg.channels(); ++c) {
    for (std::size_t s = 0; s < seg.segment_count(c); ++s, ++feature) {
      if (!active[feature]) continue;
      const auto [begin, end] = seg.segment(c, s);
      for (std::size_t t = begin; t < end; ++t) out(c, t) = x(c, t);
    }
  }
  return out;
}

namespace {

void check_attribution_inputs(const Classifier& model, const TimeSeries& x,
                              const Segmentation& seg,
                              const BackgroundSet& background,
                              std::size_t explained_class) {
  seg.validate();
  if (x.channels() != model.channels() || x.length() != model.length()) {
    throw ShapeMismatch("instance does not match classifier shape");
  }
  if (seg.channels() != x.channels() || seg.length() != x.length()) {
    throw ShapeMismatch("segmentation does not match instance shape");
  }
  if (background.instances.empty()) {
    throw ShapeMismatch("background set is empty");
  }
  for (const TimeSeries& b : background.instances) {
    if (!b.same_shape(x)) {
      throw ShapeMismatch("background instance shape mismatch");
    }
  }
  if (explained_class >= model.n_classes()) {
    throw InvalidFeature("explained class out of range");
  }
}

/// Mean model probability of `cls` over one masked batch per background
/// instance. States are FeatureSets; one batched predict_proba call per
/// background instance.
std::vector<double> coalition_values(const Classifier& model,
                                     const TimeSeries& x,
                                     const Segmentation& seg,
                                     const BackgroundSet& background,
                                     std::size_t cls,
                                     const std::vector<FeatureSet>& states) {
  std::vector<double> values(states.size(), 0.0);
  for (const TimeSeries& bg : background.instances) {
    std::vector<TimeSeries> batch;
    batch.reserve(states.size());
    for (const FeatureSet& state : states) {
      batch.push_back(mask_replace(x, bg, state, seg));
    }
    const ProbaMatrix probs = model.predict_proba(batch);
    for (std::size_t i = 0; i < states.size(); ++i) {
      values[i] += probs[i][cls];
    }
  }
  const double n = static_cast<double>(background.instances.size());
  for (double& v : values) v /= n;
  return values;
}

SegmentAttribution shape_result(const Segmentation& seg,
                                const std::vector<double>& flat,
                                std::size_t explained_class, double base_value,
                                std::size_t n_permutations,
                                std::uint64_t seed) {
  SegmentAttribution attr;
  attr.segmentation = seg;
  attr.explained_class = explained_class;
  attr.base_value = base_value;
  attr.n_permutations = n_permutations;
  attr.seed = seed;
  std::size_t feature = 0;
  for (std::size_t c = 0; c < seg.channels(); ++c) {
    attr.values.emplace_back();
    for (std::size_t s = 0; s < seg.segment_count(c); ++s, ++feature) {
      attr.values.back().push_back(flat[feature]);
    }
  }
  return attr;
}

}  // namespace

SegmentAttribution shapley_exact(const Classifier& model, const TimeSeries& x,
                                 const Segmentation& seg,
                                 const BackgroundSet& background,
                                 std::size_t explained_class) {
  check_attribution_inputs(model, x, seg, background, explained_class);
  const std::size_t F = seg.feature_count();
  if (F > 12) {
    throw TooManyFeatures("exact Shapley enumeration is limited to 12 features");
  }

  const std::size_t n_states = std::size_t{1} << F;
  std::vector<FeatureSet> states(n_states, FeatureSet(F, 0));
  for (std::size_t mask = 0; mask < n_states; ++mask) {
    for (std::size_t j = 0; j < F; ++j) {
      states[mask][j] = (mask >> j) & 1 ? 1 : 0;
    }
  }
  const std::vector<double> v =
      coalition_values(model, x, seg, background, explained_class, states);

  // w[t] = t! (F-t-1)! / F!
  std::vector<double> weight(F, 0.0);
  for (std::size_t t = 0; t < F; ++t) {
    double w = 1.0 / static_cast<double>(F);
    for (std::size_t i = 1; i <= t; ++i) {
      w *= static_cast<double>(i) / static_cast<double>(F - i);
    }
    weight[t] = w;
  }

  std::vector<double> phi(F, 0.0);
  for (std::size_t mask = 0; mask < n_states; ++mask) {
    const std::size_t size = static_cast<std::size_t>(std::popcount(mask));
    for (std::size_t j = 0; j < F; ++j) {
      if ((mask >> j) & 1) continue;
      phi[j] += weight[size] * (v[mask | (std::size_t{1} << j)] - v[mask]);
    }
  }
  return shape_result(seg, phi, explained_class, v[0], 0, 0);
}

SegmentAttribution shapley_sampling(const Classifier& model,
                                    const TimeSeries& x,
                                    const Segmentation& seg,
                                    const BackgroundSet& background,
                                    std::size_t explained_class,
                                    std::size_t n_permutations,
                                    std::uint64_t seed) {
  check_attribution_inputs(model, x, seg, background, explained_class);
  if (n_permutations < 1) {
    throw InvalidPermutationCount("need at least one permutation");
  }
  const std::size_t F = seg.feature_count();
  std::vector<double> phi(F, 0.0);
  double base_value = 0.0;

  for (std::size_t p = 0; p < n_permutations; ++p) {
    // Per-permutation substream: scheduling cannot change the draws.
    Rng rng = Rng::from_words({seed, fnv1a64("permutation"), p});
    const std::vector<std::size_t> order = rng.permutation(F);

    // prefix states along the permutation walk, one batched call
    std::vector<FeatureSet> states;
    states.reserve(F + 1);
    FeatureSet current(F, 0);
    states.push_back(current);
    for (std::size_t j : order) {
      current[j] = 1;
      states.push_back(current);
    }
    const std::vector<double> v =
        coalition_values(model, x, seg, background, explained_class, states);
    if (p == 0) base_value = v.front();
    for (std::size_t i = 0; i < F; ++i) {
      phi[order[i]] += v[i + 1] - v[i];
    }
  }
  for (double& value : phi) {
    value /= static_cast<double>(n_permutations);
  }
  return shape_result(seg, phi, explained_class, base_value, n_permutations,
                      seed);
}

TimepointAttribution replicate_to_timepoints(const SegmentAttribution& attr) {
  const Segmentation& seg = attr.segmentation;
  TimepointAttribution out;
  out.mode = ExpansionMode::replicated;
  out.source = attr;
  out.values = TimeSeries(seg.channels(), seg.length(), 0.0);
  for (std::size_t c = 0; c < seg.channels(); ++c) {
    for (std::size_t s = 0; s < seg.segment_count(c); ++s) {
      const auto [begin, end] = seg.segment(c, s);
      for (std::size_t t = begin; t < end; ++t) {
        out.values(c, t) = attr.values[c][s];
      }
    }
  }
  return out;
}

TimepointAttribution normalize_to_timepoints(const SegmentAttribution& attr) {
  const Segmentation& seg = attr.segmentation;
  TimepointAttribution out;
  out.mode = ExpansionMode::normalized;
  out.source = attr;
  out.values = TimeSeries(seg.channels(), seg.length(), 0.0);
  for (std::size_t c = 0; c < seg.channels(); ++c) {
    for (std::size_t s = 0; s < seg.segment_count(c); ++s) {
      const auto [begin, end] = seg.segment(c, s);
      const double share =
          attr.values[c][s] / static_cast<double>(end - begin);
      for (std::size_t t = begin; t < end; ++t) {
        out.values(c, t) = share;
      }
    }
  }
  return out;
}

TimepointAttribution expand_to_timepoints(const SegmentAttribution& attr,
                                          ExpansionMode mode) {
  return mode == ExpansionMode::replicated ? replicate_to_timepoints(attr)
                                           : normalize_to_timepoints(attr);
}

std::string TimepointAttribution::to_json() const {
  nlohmann::json j;
  j["explained_class"] = source.explained_class;
  j["base_value"] = source.base_value;
  j["segment_values"] = source.values;
  std::vector<std::vector<double>> rows;
  for (std::size_t c = 0; c < values.channels(); ++c) {
    const auto chan = values.channel(c);
    rows.emplace_back(chan.begin(), chan.end());
  }
  j["timepoint_values"] = rows;
  j["mode"] = segshap::to_string(mode);
  j["seed"] = source.seed;
  j["n_permutations"] = source.n_permutations;
  return j.dump();
}

}  // namespace segshap
