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
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "segshap/errors.hpp"

namespace segshap {

/// A d x L real-valued signal: d channels, L timepoints, stored channel-major.
/// Instances are immutable in practice once built; every mutating accessor is
/// used only during construction.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(std::size_t channels, std::size_t length, double fill = 0.0);
  static TimeSeries from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t channels() const { return channels_; }
  std::size_t length() const { return length_; }
  std::size_t cells() const { return values_.size(); }

  double operator()(std::size_t c, std::size_t t) const {
    return values_[c * length_ + t];
  }
  double& operator()(std::size_t c, std::size_t t) {
    return values_[c * length_ + t];
  }

  std::span<const double> channel(std::size_t c) const {
    return {values_.data() + c * length_, length_};
  }
  std::span<double> channel(std::size_t c) {
    return {values_.data() + c * length_, length_};
  }
  const std::vector<double>& raw() const { return values_; }
  std::vector<double>& raw() { return values_; }

  bool same_shape(const TimeSeries& o) const {
    return channels_ == o.channels_ && length_ == o.length_;
  }
  bool all_finite() const;

  bool operator==(const TimeSeries& o) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
  std::vector<double> values_;
};

enum class DatasetRole { train, test };

/// Equal-length, fully observed classification dataset.
struct LabeledDataset {
  std::vector<TimeSeries> instances;
  std::vector<std::size_t> labels;       // index into class_names
  std::vector<std::string> class_names;  // declaration order
  DatasetRole role = DatasetRole::train;

  std::size_t size() const { return instances.size(); }
  std::size_t channels() const {
    return instances.empty() ? 0 : instances.front().channels();
  }
  std::size_t length() const {
    return instances.empty() ? 0 : instances.front().length();
  }

  /// Throws if shapes, label ranges, or finiteness are violated.
  void validate() const;
};

/// Per-channel mean and population standard deviation over all instances
/// and timepoints of one dataset.
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

// --- ingestion -------------------------------------------------------------

/// Parses the supported .ts subset (equal length, no timestamps, no missing
/// values). Directive names are case-insensitive; labels are mapped to
/// contiguous indices in the declaration order of @classLabel.
LabeledDataset parse_ts_file(std::istream& in);
LabeledDataset parse_ts_file(const std::string& text);

/// Emits the same subset parse_ts_file accepts; parse(serialize(ds)) == ds.
std::string serialize_ts(const LabeledDataset& ds,
                         const std::string& problem_name);

/// Header-less CSV: each row is d*L values (channel-major: all of channel 0,
/// then channel 1, ...) followed by a label string.
LabeledDataset parse_csv(std::istream& in, std::size_t channels);
LabeledDataset parse_csv(const std::string& text, std::size_t channels);

/// Loads a dataset by extension: ".ts" or ".csv" (csv_channels applies to
/// CSV only).
LabeledDataset load_dataset_file(const std::string& path,
                                 std::size_t csv_channels = 1);

// --- statistics ------------------------------------------------------------

ChannelStats compute_channel_stats(const LabeledDataset& ds);

/// Elementwise mean across all instances.
TimeSeries average_instance(const LabeledDataset& ds);

/// Flattens a d x L series into 1 x (d*L); channel c occupies
/// columns [c*L, (c+1)*L).
TimeSeries concat_channels(const TimeSeries& x);

// --- synthetic fixtures ------------------------------------------------------

/// Ground-truth-saliency fixture: class c has a unit-height rectangular bump
/// on channel 0 in [c*floor(L/n_classes), c*floor(L/n_classes)+bump_width),
/// plus N(0, noise_std^2) noise everywhere. Deterministic under seed;
/// classes are assigned round-robin.
LabeledDataset synth_bump_dataset(std::size_t n_instances,
                                  std::size_t channels, std::size_t length,
                                  std::size_t n_classes,
                                  std::size_t bump_width, double noise_std,
                                  std::uint64_t seed);

}  // namespace segshap
