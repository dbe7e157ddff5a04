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
#include <utility>
#include <vector>

#include "segshap/attribution.hpp"
#include "segshap/core.hpp"
#include "segshap/model.hpp"
#include "segshap/rng.hpp"

namespace segshap {

enum class PerturbationStrategy { normal, global_gaussian, global_mean, local_mean };

std::string to_string(PerturbationStrategy s);
PerturbationStrategy perturbation_from_string(const std::string& name);

struct EvalConfig {
  // perturbation thresholds for InterpretTime
  std::vector<double> k_schedule = {0.05, 0.15, 0.25, 0.35, 0.45, 0.55,
                                    0.65, 0.75, 0.85, 0.95, 1.0};
  double aucd_step_fraction = 0.04;
  std::size_t local_mean_radius = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

using Curve = std::vector<std::pair<double, double>>;

struct InterpretTimeResult {
  PerturbationStrategy strategy = PerturbationStrategy::normal;
  Curve top_curve;     // (k, S_bar after perturbing the top k share of P)
  Curve bottom_curve;  // (k, S_bar after perturbing the bottom 1-k share)
  double aucse = 0.0;
  double f_score = 0.0;
  bool no_positive_attributions = false;

  std::string to_json() const;
};

struct AUCDResult {
  Curve deletion_curve;   // (fraction of cells replaced, P(predicted))
  Curve insertion_curve;
  double audc = 0.0;
  double auic = 0.0;
  double aucd = 0.0;  // auic - audc
  std::size_t opposite_class = 0;

  std::string to_json() const;
};

/// Replaces masked cells: normal draws N(0,1); global_gaussian draws
/// N(mean_c, std_c); global_mean writes mean_c; local_mean writes the mean of
/// the original x over [t-r, t+r] on the same channel. Unmasked cells are
/// untouched. Draws are consumed channel-major over masked cells only.
TimeSeries perturb_values(PerturbationStrategy strategy, const TimeSeries& x,
                          const std::vector<std::uint8_t>& mask,
                          const ChannelStats& stats, Rng& rng,
                          std::size_t local_mean_radius = 2);

/// Perturbation curves over the k schedule, AUCSE, and the F-score
/// 2ab/(a+b) with a the top-curve area and b one minus the bottom-curve
/// area (both trapezoidal over k, divided by the k range).
InterpretTimeResult interpret_time(const Classifier& model, const TimeSeries& x,
                                   const TimepointAttribution& attr,
                                   PerturbationStrategy strategy,
                                   const ChannelStats& stats,
                                   const EvalConfig& cfg);

/// Per-class mean training instance with the lowest model probability of
/// `predicted`; ties resolve to the lowest class index.
std::pair<TimeSeries, std::size_t> opposite_class_representative(
    const Classifier& model, const LabeledDataset& train,
    std::size_t predicted);

/// Deletion/insertion walks against the opposite-class representative,
/// ranked by |attribution|, in blocks of ceil(step_fraction * d * L) cells.
AUCDResult aucd(const Classifier& model, const TimeSeries& x,
                const TimepointAttribution& attr, const LabeledDataset& train,
                const EvalConfig& cfg);

/// Trapezoidal area under a piecewise-linear curve.
double trapezoid_area(const Curve& curve);

}  // namespace segshap
