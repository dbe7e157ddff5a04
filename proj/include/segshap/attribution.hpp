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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "segshap/core.hpp"
#include "segshap/model.hpp"
#include "segshap/segmentation.hpp"

namespace segshap {

enum class BackgroundKind { zero, average, custom };

std::string to_string(BackgroundKind k);

/// Reference instance(s) substituted for inactive features. The default
/// backgrounds are singletons; the value function averages over instances
/// when more are supplied.
struct BackgroundSet {
  std::vector<TimeSeries> instances;
  BackgroundKind kind = BackgroundKind::custom;
};

BackgroundSet background_zero(std::size_t channels, std::size_t length);
BackgroundSet background_average(const LabeledDataset& train);

/// Shapley values per (channel, segment) feature.
struct SegmentAttribution {
  std::vector<std::vector<double>> values;  // [channel][segment]
  std::size_t explained_class = 0;
  double base_value = 0.0;  // value of the empty coalition
  Segmentation segmentation;
  std::size_t n_permutations = 0;  // 0 for the exact oracle
  std::uint64_t seed = 0;

  double total() const;
};

enum class ExpansionMode { replicated, normalized };

std::string to_string(ExpansionMode m);

/// Per-timepoint expansion of a SegmentAttribution.
struct TimepointAttribution {
  TimeSeries values;  // d x L
  ExpansionMode mode = ExpansionMode::replicated;
  SegmentAttribution source;

  std::string to_json() const;
};

/// Active-feature mask over the flattened (channel, segment) features.
using FeatureSet = std::vector<std::uint8_t>;

/// output[c, t] = x[c, t] when the feature containing (c, t) is active,
/// otherwise background[c, t].
TimeSeries mask_replace(const TimeSeries& x, const TimeSeries& background,
                        const FeatureSet& active, const Segmentation& seg);

/// Brute-force Shapley values over all 2^F coalitions (F <= 12); the
/// reference oracle for shapley_sampling. The value of a coalition is the
/// mean over background instances of the model probability of
/// `explained_class` on the masked input.
SegmentAttribution shapley_exact(const Classifier& model, const TimeSeries& x,
                                 const Segmentation& seg,
                                 const BackgroundSet& background,
                                 std::size_t explained_class);

/// Shapley Value Sampling: averages marginal contributions over
/// n_permutations seeded random feature permutations, walking each
/// permutation from the all-background state. Marginals telescope per
/// permutation, so sum(values) = v(all) - v(empty) holds for any m.
SegmentAttribution shapley_sampling(const Classifier& model,
                                    const TimeSeries& x,
                                    const Segmentation& seg,
                                    const BackgroundSet& background,
                                    std::size_t explained_class,
                                    std::size_t n_permutations,
                                    std::uint64_t seed);

/// Every timepoint of segment S carries phi_S; the per-segment sum becomes
/// |S| * phi_S.
TimepointAttribution replicate_to_timepoints(const SegmentAttribution& attr);

/// Every timepoint of segment S carries phi_S / |S|, preserving segment-level
/// additivity exactly.
TimepointAttribution normalize_to_timepoints(const SegmentAttribution& attr);

TimepointAttribution expand_to_timepoints(const SegmentAttribution& attr,
                                          ExpansionMode mode);

}  // namespace segshap
