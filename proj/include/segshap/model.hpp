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

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "segshap/core.hpp"

namespace segshap {

using ProbaMatrix = std::vector<std::vector<double>>;

/// Black-box probabilistic classifier over fixed-shape time series.
/// Implementations are deterministic: an identical batch yields identical
/// output, and every probability row is nonnegative and sums to 1 +- 1e-9.
/// Built-in classifiers are immutable after training and safe to call from
/// multiple threads; the external client serializes calls over its pipe.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ProbaMatrix predict_proba(std::span<const TimeSeries> batch) const = 0;
  virtual const std::vector<std::string>& class_names() const = 0;
  virtual std::size_t channels() const = 0;
  virtual std::size_t length() const = 0;

  std::size_t n_classes() const { return class_names().size(); }
  std::vector<double> predict_proba_one(const TimeSeries& x) const;
  /// argmax class of x; ties resolve to the lowest index.
  std::size_t predict_class(const TimeSeries& x) const;

 protected:
  /// Throws ShapeMismatch unless every instance matches channels() x length().
  void check_batch(std::span<const TimeSeries> batch) const;
};

using ClassifierHandle = std::shared_ptr<const Classifier>;

/// Per-class centroid model: predict_proba(x) is the softmax over
/// -||x - centroid_c||_2 / sqrt(d*L).
ClassifierHandle train_nearest_centroid(const LabeledDataset& train);

/// Reduced-scale MiniRocket: PPV features of dilated convolutions with the
/// 84 fixed kernels (three +2 weights among nine, rest -1), bias quantiles
/// drawn from seeded training instances, one-vs-rest ridge regression on
/// +-1 targets solved in closed form, softmax over decision scores.
ClassifierHandle train_minirocket_ridge(const LabeledDataset& train,
                                        std::size_t n_features = 1000,
                                        double lambda = 1.0,
                                        std::uint64_t seed = 0);

/// Launches `command` (via /bin/sh -c) and speaks the line-delimited JSON
/// protocol: {"op":"info"} then {"op":"predict_proba","instances":[...]}.
ClassifierHandle connect_external(const std::string& command);

/// Builds a classifier from its CLI spelling: "nearest_centroid",
/// "minirocket", or "external:<command>".
ClassifierHandle make_classifier(const std::string& spec,
                                 const LabeledDataset& train,
                                 std::uint64_t seed);

std::vector<std::string> builtin_classifier_names();

namespace detail {

/// The 84 MiniRocket weight patterns (C(9,3) placements of +2).
std::vector<std::array<double, 9>> minirocket_kernel_set();

/// Valid dilated convolution of one channel with a length-9 kernel.
std::vector<double> dilated_conv(std::span<const double> channel,
                                 const std::array<double, 9>& kernel,
                                 std::size_t dilation);

/// Proportion of values strictly greater than bias.
double ppv(std::span<const double> values, double bias);

}  // namespace detail

}  // namespace segshap
