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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "segshap/core.hpp"

namespace segshap {

enum class SegmentationMode { shared, per_channel };

/// Per-channel ordered segment boundaries b_0=0 < b_1 < ... < b_m=L;
/// segment i covers [b_i, b_{i+1}). Shared mode stores identical lists for
/// every channel.
struct Segmentation {
  SegmentationMode mode = SegmentationMode::shared;
  std::vector<std::vector<std::size_t>> boundaries;  // one list per channel
  // Set when a method could not order its candidates (zero information gain
  // everywhere) and fell back to the equal split.
  bool degenerate_fallback = false;

  std::size_t channels() const { return boundaries.size(); }
  std::size_t length() const {
    return boundaries.empty() ? 0 : boundaries.front().back();
  }
  std::size_t segment_count(std::size_t c) const {
    return boundaries[c].size() - 1;
  }
  /// [begin, end) of segment s on channel c.
  std::pair<std::size_t, std::size_t> segment(std::size_t c,
                                              std::size_t s) const {
    return {boundaries[c][s], boundaries[c][s + 1]};
  }
  /// Total number of (channel, segment) features.
  std::size_t feature_count() const;
  /// Flattened feature index of (channel, segment).
  std::size_t feature_index(std::size_t c, std::size_t s) const;
  /// Inverse of feature_index.
  std::pair<std::size_t, std::size_t> feature_location(std::size_t f) const;

  void validate() const;

  std::string to_json() const;
  static Segmentation from_json(const std::string& text);

  /// Shared segmentation built from one boundary list replicated d times.
  static Segmentation shared(std::vector<std::size_t> bounds, std::size_t d);
};

enum class SegmentationMethod {
  equal,
  binseg,
  bottomup,
  kernelcpd,
  infogain,
  greedy_gaussian,
  nnsegment,
  clasp,
};

std::string to_string(SegmentationMethod m);
SegmentationMethod segmentation_method_from_string(const std::string& name);

struct SegmentationConfig {
  SegmentationMethod method = SegmentationMethod::equal;
  std::size_t n_segments = 10;
  std::size_t min_size = 2;        // binseg
  std::size_t initial_width = 2;   // bottomup
  std::size_t window = 10;         // nnsegment
  std::size_t period = 4;          // clasp
  double reg = 1e-4;               // greedy_gaussian
};

// --- methods -----------------------------------------------------------------

/// n segments; the first (L mod n) have length ceil(L/n), the rest floor(L/n).
Segmentation segment_equal(std::size_t length, std::size_t n,
                           std::size_t channels = 1);

/// Greedy top-down splits minimizing total L1 cost (sum over channels of
/// absolute deviation from the per-segment median).
Segmentation segment_binseg(const TimeSeries& x, std::size_t n,
                            std::size_t min_size = 2);

/// Over-split into fixed-width segments, then merge the adjacent pair with
/// the smallest L1 cost increase until n segments remain.
Segmentation segment_bottomup(const TimeSeries& x, std::size_t n,
                              std::size_t initial_width = 2);

/// Exact dynamic program over all placements of n-1 change points under the
/// linear-kernel cost (within-segment scatter summed across channels).
Segmentation segment_kernelcpd(const TimeSeries& x, std::size_t n);

/// Greedy top-down insertion of the change point with the largest
/// information gain over per-segment channel-mass distributions. Falls back
/// to the equal split (degenerate_fallback set) when no split gains.
Segmentation segment_infogain(const TimeSeries& x, std::size_t n);

/// Greedy insertion maximizing the summed per-segment Gaussian profile
/// log-likelihood (per channel, diagonal covariance, variance + reg).
Segmentation segment_greedy_gaussian(const TimeSeries& x, std::size_t n,
                                     double reg = 1e-4);

/// Dimension-wise nearest-neighbour change point flags on non-overlapping
/// windows, reduced/padded to exactly n-1 boundaries per channel.
Segmentation segment_nn(const TimeSeries& x, std::size_t n,
                        std::size_t window);

/// Dimension-wise classification score profile peaks (leave-one-out 1-NN
/// over z-normalised sliding windows of length `period`).
Segmentation segment_clasp(const TimeSeries& x, std::size_t n,
                           std::size_t period = 4);

Segmentation run_segmentation(const TimeSeries& x,
                              const SegmentationConfig& cfg);

/// Mean over channels of H(p)/ln(n) with p_i = |S_i|/L; 1.0 for n = 1.
double normalized_entropy(const Segmentation& seg);

// --- cost and profile primitives (also used by the test oracles) -------------

/// Sum over channels and timepoints of |x - median(segment)| on [begin, end).
double l1_segment_cost(const TimeSeries& x, std::size_t begin,
                       std::size_t end);

/// Within-segment scatter sum_t ||x_t - mu||^2 on [begin, end).
double scatter_segment_cost(const TimeSeries& x, std::size_t begin,
                            std::size_t end);

/// Total scatter cost of one boundary list (0 ... L).
double scatter_total_cost(const TimeSeries& x,
                          const std::vector<std::size_t>& bounds);

/// Scatter cost of a (possibly per-channel) segmentation, summed over
/// channels using each channel's own boundary list.
double scatter_total_cost(const TimeSeries& x, const Segmentation& seg);

/// Gaussian profile log-likelihood of one boundary list:
/// sum over segments and channels of -(|S|/2) * (ln(2*pi*(var+reg)) + 1).
double gaussian_profile_loglik(const TimeSeries& x,
                               const std::vector<std::size_t>& bounds,
                               double reg);

/// ClaSP score profile for splits s in [begin+period, end-period] on one
/// channel; profile[i] is the leave-one-out 1-NN accuracy for
/// s = begin + period + i. Empty when the segment admits no split.
std::vector<double> clasp_score_profile(std::span<const double> channel,
                                        std::size_t begin, std::size_t end,
                                        std::size_t period);

/// A nearest-neighbour change point flag: boundary position plus the
/// |nn-distance difference| of the adjacent window pair that produced it.
struct NnFlag {
  std::size_t position;
  double gap;
};

/// Flags from the window nearest-neighbour rule on one channel (before
/// reduction/padding).
std::vector<NnFlag> nn_flag_candidates(std::span<const double> channel,
                                       std::size_t window);

}  // namespace segshap
