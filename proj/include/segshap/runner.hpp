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
#include <iosfwd>
#include <string>
#include <vector>

#include "segshap/attribution.hpp"
#include "segshap/evaluation.hpp"
#include "segshap/segmentation.hpp"

namespace segshap {

enum class Metric { interprettime, aucd };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& name);

struct DatasetSpec {
  std::string name;
  std::string train_path;
  std::string test_path;
  std::size_t csv_channels = 1;
};

/// Full factor grid of one experiment run. The grid size is the product of
/// the factor list lengths; perturbations apply to InterpretTime only.
struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<std::string> classifiers;
  std::vector<SegmentationConfig> segmentations;
  std::vector<BackgroundKind> backgrounds;
  std::vector<ExpansionMode> normalizations;
  std::vector<Metric> metrics;
  std::vector<PerturbationStrategy> perturbations;
  std::size_t shap_permutations = 25;
  std::uint64_t seed = 0;
  std::size_t max_instances = 50;
  std::string out_dir = "results";

  void validate() const;  // throws ConfigInvalid
};

ExperimentConfig load_config(const std::string& path);

/// One evaluated statistic (or skip) of one grid cell and instance.
struct ResultRecord {
  std::string dataset;
  std::string classifier;
  std::string segmentation;
  std::string background;
  std::string normalization;
  std::string perturbation;  // "-" for aucd
  std::string metric;        // "aucse", "f_score", or "aucd"
  std::size_t instance = 0;
  double value = 0.0;
  std::string skip_reason;  // empty for value records

  bool is_skip() const { return !skip_reason.empty(); }
};

/// Executes the grid: segment, attribute, expand, evaluate, record.
/// Classifiers are trained once per dataset; per-instance failures become
/// skip records and never abort the grid. Output order is canonical
/// (sorted by grid key and instance), independent of execution order.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg);

/// Exact header: dataset,classifier,segmentation,background,normalization,
/// perturbation,metric,instance,value,skip_reason
void write_records_csv(std::ostream& out,
                       const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_records_csv(std::istream& in);

struct AggregateRecord {
  std::vector<std::pair<std::string, std::string>> group;  // (factor, value)
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;  // population std
  std::size_t count = 0;
};

/// Mean/std/count of value records per (group_by factors, metric); skips are
/// excluded from the denominators. Factors must name record columns.
std::vector<AggregateRecord> aggregate(const std::vector<ResultRecord>& records,
                                       const std::vector<std::string>& group_by);

void write_aggregates_csv(std::ostream& out,
                          const std::vector<std::string>& group_by,
                          const std::vector<AggregateRecord>& aggregates);

/// Paired per-instance differences (normalized - replicated) with all other
/// factors matched, grouped by (dataset, segmentation, metric). A value
/// record whose partner arm is missing raises UnpairedRecords; pairs with a
/// skipped arm are dropped.
std::vector<AggregateRecord> normalization_delta_report(
    const std::vector<ResultRecord>& records);

struct EntropyRow {
  std::string dataset;
  std::string segmentation;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

/// Normalized entropy of each configured segmentation over the test
/// instances, aggregated per (dataset, segmentation).
std::vector<EntropyRow> entropy_report(const ExperimentConfig& cfg);

void write_entropy_csv(std::ostream& out, const std::vector<EntropyRow>& rows);

}  // namespace segshap
