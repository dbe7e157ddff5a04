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

#include "segshap/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "segshap/rng.hpp"
#include "segshap/toml_lite.hpp"

namespace segshap {

std::string to_string(Metric m) {
  return m == Metric::interprettime ? "interprettime" : "aucd";
}

Metric metric_from_string(const std::string& name) {
  if (name == "interprettime") return Metric::interprettime;
  if (name == "aucd") return Metric::aucd;
  throw ConfigInvalid("unknown metric '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (datasets.empty()) throw ConfigInvalid("no datasets configured");
  for (const DatasetSpec& ds : datasets) {
    if (ds.name.empty() || ds.train_path.empty() || ds.test_path.empty()) {
      throw ConfigInvalid("dataset entries need name, train, and test");
    }
  }
  if (classifiers.empty()) throw ConfigInvalid("no classifiers configured");
  if (segmentations.empty()) throw ConfigInvalid("no segmentations configured");
  std::set<std::string> seg_names;
  for (const SegmentationConfig& seg : segmentations) {
    if (!seg_names.insert(to_string(seg.method)).second) {
      throw ConfigInvalid("duplicate segmentation method '" +
                          to_string(seg.method) + "'");
    }
    if (seg.n_segments < 1) throw ConfigInvalid("n_segments must be >= 1");
  }
  if (backgrounds.empty()) throw ConfigInvalid("no backgrounds configured");
  if (normalizations.empty()) throw ConfigInvalid("no normalization arms");
  if (metrics.empty()) throw ConfigInvalid("no metrics configured");
  const bool wants_interprettime =
      std::find(metrics.begin(), metrics.end(), Metric::interprettime) !=
      metrics.end();
  if (wants_interprettime && perturbations.empty()) {
    throw ConfigInvalid("interprettime needs at least one perturbation");
  }
  if (shap_permutations < 1) {
    throw ConfigInvalid("shap_permutations must be >= 1");
  }
  if (max_instances < 1) throw ConfigInvalid("max_instances must be >= 1");
}

namespace {

SegmentationConfig segmentation_from_table(const TomlTable& table) {
  SegmentationConfig cfg;
  auto it = table.find("method");
  if (it == table.end()) {
    throw ConfigInvalid("[[segmentations]] entry misses 'method'");
  }
  cfg.method = segmentation_method_from_string(it->second.as_string());
  auto get_size = [&](const char* key, std::size_t& out) {
    auto found = table.find(key);
    if (found == table.end()) return;
    const std::int64_t v = found->second.as_int();
    if (v < 1) throw ConfigInvalid(std::string(key) + " must be >= 1");
    out = static_cast<std::size_t>(v);
  };
  get_size("n_segments", cfg.n_segments);
  get_size("min_size", cfg.min_size);
  get_size("initial_width", cfg.initial_width);
  get_size("window", cfg.window);
  get_size("period", cfg.period);
  if (auto found = table.find("reg"); found != table.end()) {
    cfg.reg = found->second.as_float();
  }
  return cfg;
}

std::vector<std::string> string_list(const TomlValue& value,
                                     const char* what) {
  std::vector<std::string> out;
  for (const TomlValue& item : value.as_array()) {
    if (!item.is_string()) {
      throw ConfigInvalid(std::string(what) + " must be a list of strings");
    }
    out.push_back(item.as_string());
  }
  return out;
}

DatasetSpec dataset_from_table(const TomlTable& table) {
  DatasetSpec spec;
  auto get = [&](const char* key, std::string& out, bool required) {
    auto it = table.find(key);
    if (it == table.end()) {
      if (required) {
        throw ConfigInvalid(std::string("dataset entry misses '") + key + "'");
      }
      return;
    }
    out = it->second.as_string();
  };
  get("name", spec.name, true);
  get("train", spec.train_path, true);
  get("test", spec.test_path, true);
  if (auto it = table.find("channels"); it != table.end()) {
    spec.csv_channels = static_cast<std::size_t>(it->second.as_int());
  }
  return spec;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  const TomlDocument doc = parse_toml_file(path);
  ExperimentConfig cfg;

  if (auto it = doc.tables.find("datasets"); it != doc.tables.end()) {
    cfg.datasets.push_back(dataset_from_table(it->second));
  }
  if (auto it = doc.table_arrays.find("datasets"); it != doc.table_arrays.end()) {
    for (const TomlTable& table : it->second) {
      cfg.datasets.push_back(dataset_from_table(table));
    }
  }
  if (auto it = doc.table_arrays.find("segmentations");
      it != doc.table_arrays.end()) {
    for (const TomlTable& table : it->second) {
      cfg.segmentations.push_back(segmentation_from_table(table));
    }
  }

  const TomlTable& root = doc.root;
  if (auto it = root.find("classifiers"); it != root.end()) {
    cfg.classifiers = string_list(it->second, "classifiers");
  }
  if (auto it = root.find("backgrounds"); it != root.end()) {
    for (const std::string& name : string_list(it->second, "backgrounds")) {
      if (name == "zero") {
        cfg.backgrounds.push_back(BackgroundKind::zero);
      } else if (name == "average") {
        cfg.backgrounds.push_back(BackgroundKind::average);
      } else {
        throw ConfigInvalid("unknown background '" + name + "'");
      }
    }
  }
  if (auto it = root.find("normalization"); it != root.end()) {
    for (const std::string& name : string_list(it->second, "normalization")) {
      if (name == "replicated") {
        cfg.normalizations.push_back(ExpansionMode::replicated);
      } else if (name == "normalized") {
        cfg.normalizations.push_back(ExpansionMode::normalized);
      } else {
        throw ConfigInvalid("unknown normalization '" + name + "'");
      }
    }
  }
  if (auto it = root.find("metrics"); it != root.end()) {
    for (const std::string& name : string_list(it->second, "metrics")) {
      cfg.metrics.push_back(metric_from_string(name));
    }
  }
  if (auto it = root.find("perturbations"); it != root.end()) {
    for (const std::string& name : string_list(it->second, "perturbations")) {
      cfg.perturbations.push_back(perturbation_from_string(name));
    }
  }
  if (auto it = root.find("shap_permutations"); it != root.end()) {
    cfg.shap_permutations = static_cast<std::size_t>(it->second.as_int());
  }
  if (auto it = root.find("seed"); it != root.end()) {
    cfg.seed = static_cast<std::uint64_t>(it->second.as_int());
  }
  if (auto it = root.find("max_instances"); it != root.end()) {
    cfg.max_instances = static_cast<std::size_t>(it->second.as_int());
  }
  if (auto it = root.find("out_dir"); it != root.end()) {
    cfg.out_dir = it->second.as_string();
  }

  cfg.validate();
  return cfg;
}

// --- grid execution ---------------------------------------------------------

namespace {

/// Seed derivation: every substream depends only on the factor values that
/// legitimately influence it, so adding grid factors never shifts the
/// randomness of existing cells, and the two normalization arms share their
/// evaluation draws.
std::uint64_t attribution_seed(std::uint64_t master, const std::string& dataset,
                               const std::string& classifier,
                               const std::string& segmentation,
                               const std::string& background,
                               std::size_t instance) {
  return mix_words({master, fnv1a64("attribution"), fnv1a64(dataset),
                    fnv1a64(classifier), fnv1a64(segmentation),
                    fnv1a64(background), instance});
}

std::uint64_t evaluation_seed(std::uint64_t master, const std::string& dataset,
                              const std::string& classifier,
                              const std::string& segmentation,
                              const std::string& background,
                              const std::string& metric,
                              const std::string& perturbation,
                              std::size_t instance) {
  return mix_words({master, fnv1a64("evaluation"), fnv1a64(dataset),
                    fnv1a64(classifier), fnv1a64(segmentation),
                    fnv1a64(background), fnv1a64(metric), fnv1a64(perturbation),
                    instance});
}

std::string error_tag(const Error& e) {
  if (dynamic_cast<const ZeroBaseProbability*>(&e) != nullptr) {
    return "zero_base_probability";
  }
  if (dynamic_cast<const SingleClassDataset*>(&e) != nullptr) {
    return "single_class_dataset";
  }
  if (dynamic_cast<const SeriesTooShort*>(&e) != nullptr) {
    return "series_too_short";
  }
  if (dynamic_cast<const ShapeMismatch*>(&e) != nullptr) {
    return "shape_mismatch";
  }
  if (dynamic_cast<const ExternalProtocolError*>(&e) != nullptr) {
    return "external_protocol_error";
  }
  return "error";
}

struct CellKey {
  std::string segmentation;
  std::string background;
  std::string normalization;
  std::string perturbation;
  std::string metric_kind;
};

bool record_less(const ResultRecord& a, const ResultRecord& b) {
  auto key = [](const ResultRecord& r) {
    return std::tie(r.dataset, r.classifier, r.segmentation, r.background,
                    r.normalization, r.perturbation, r.metric, r.instance);
  };
  return key(a) < key(b);
}

}  // namespace

std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ResultRecord> records;

  for (const DatasetSpec& spec : cfg.datasets) {
    const LabeledDataset train = load_dataset_file(spec.train_path,
                                                   spec.csv_channels);
    LabeledDataset test = load_dataset_file(spec.test_path, spec.csv_channels);
    test.role = DatasetRole::test;
    if (train.channels() != test.channels() ||
        train.length() != test.length()) {
      throw DatasetLoadError("train/test shapes disagree for '" + spec.name +
                             "'");
    }
    const ChannelStats stats = compute_channel_stats(train);
    const std::size_t n_eval = std::min(cfg.max_instances, test.size());

    // classifiers train once per dataset and are shared across grid cells
    std::vector<ClassifierHandle> models;
    for (const std::string& name : cfg.classifiers) {
      models.push_back(make_classifier(
          name, train,
          mix_words({cfg.seed, fnv1a64("train"), fnv1a64(spec.name),
                     fnv1a64(name)})));
    }

    for (const SegmentationConfig& seg_cfg : cfg.segmentations) {
      const std::string seg_name = to_string(seg_cfg.method);

      // segmentations are classifier-independent; compute once per instance
      std::vector<Segmentation> segmentations;
      std::vector<std::string> seg_errors(n_eval);
      for (std::size_t i = 0; i < n_eval; ++i) {
        try {
          segmentations.push_back(run_segmentation(test.instances[i], seg_cfg));
        } catch (const Error& e) {
          segmentations.emplace_back();
          seg_errors[i] = error_tag(e);
        }
      }

      for (std::size_t m = 0; m < models.size(); ++m) {
        const Classifier& model = *models[m];
        const std::string& model_name = cfg.classifiers[m];

        for (BackgroundKind bg_kind : cfg.backgrounds) {
          const BackgroundSet background =
              bg_kind == BackgroundKind::zero
                  ? background_zero(train.channels(), train.length())
                  : background_average(train);
          const std::string bg_name = to_string(bg_kind);

          for (std::size_t i = 0; i < n_eval; ++i) {
            // emit one record (value or skip) per cell/instance/statistic
            auto emit_all = [&](const std::string& reason) {
              for (Metric metric : cfg.metrics) {
                const bool it_metric = metric == Metric::interprettime;
                const std::vector<std::string> stats_names =
                    it_metric ? std::vector<std::string>{"aucse", "f_score"}
                              : std::vector<std::string>{"aucd"};
                const std::vector<std::string> perts =
                    it_metric ? [&] {
                      std::vector<std::string> names;
                      for (auto p : cfg.perturbations) {
                        names.push_back(to_string(p));
                      }
                      return names;
                    }()
                              : std::vector<std::string>{"-"};
                for (ExpansionMode norm : cfg.normalizations) {
                  for (const std::string& pert : perts) {
                    for (const std::string& stat : stats_names) {
                      records.push_back({spec.name, model_name, seg_name,
                                         bg_name, to_string(norm), pert, stat,
                                         i, 0.0, reason});
                    }
                  }
                }
              }
            };

            if (!seg_errors[i].empty()) {
              emit_all(seg_errors[i]);
              continue;
            }
            const TimeSeries& x = test.instances[i];
            const Segmentation& seg = segmentations[i];

            SegmentAttribution attr;
            try {
              const std::size_t predicted = model.predict_class(x);
              attr = shapley_sampling(
                  model, x, seg, background, predicted, cfg.shap_permutations,
                  attribution_seed(cfg.seed, spec.name, model_name, seg_name,
                                   bg_name, i));
            } catch (const Error& e) {
              emit_all(error_tag(e));
              continue;
            }

            for (ExpansionMode norm : cfg.normalizations) {
              const TimepointAttribution expanded =
                  expand_to_timepoints(attr, norm);
              const std::string norm_name = to_string(norm);

              for (Metric metric : cfg.metrics) {
                if (metric == Metric::interprettime) {
                  for (PerturbationStrategy pert : cfg.perturbations) {
                    const std::string pert_name = to_string(pert);
                    EvalConfig eval_cfg;
                    eval_cfg.seed = evaluation_seed(
                        cfg.seed, spec.name, model_name, seg_name, bg_name,
                        "interprettime", pert_name, i);
                    try {
                      const InterpretTimeResult res = interpret_time(
                          model, x, expanded, pert, stats, eval_cfg);
                      records.push_back({spec.name, model_name, seg_name,
                                         bg_name, norm_name, pert_name,
                                         "aucse", i, res.aucse, ""});
                      records.push_back({spec.name, model_name, seg_name,
                                         bg_name, norm_name, pert_name,
                                         "f_score", i, res.f_score, ""});
                    } catch (const Error& e) {
                      const std::string reason = error_tag(e);
                      records.push_back({spec.name, model_name, seg_name,
                                         bg_name, norm_name, pert_name,
                                         "aucse", i, 0.0, reason});
                      records.push_back({spec.name, model_name, seg_name,
                                         bg_name, norm_name, pert_name,
                                         "f_score", i, 0.0, reason});
                    }
                  }
                } else {
                  EvalConfig eval_cfg;
                  eval_cfg.seed =
                      evaluation_seed(cfg.seed, spec.name, model_name,
                                      seg_name, bg_name, "aucd", "-", i);
                  try {
                    const AUCDResult res =
                        aucd(model, x, expanded, train, eval_cfg);
                    records.push_back({spec.name, model_name, seg_name,
                                       bg_name, norm_name, "-", "aucd", i,
                                       res.aucd, ""});
                  } catch (const Error& e) {
                    records.push_back({spec.name, model_name, seg_name,
                                       bg_name, norm_name, "-", "aucd", i, 0.0,
                                       error_tag(e)});
                  }
                }
              }
            }
          }
        }
      }
    }
  }

  std::sort(records.begin(), records.end(), record_less);
  return records;
}

// --- CSV ---------------------------------------------------------------------

namespace {

const char* kRecordsHeader =
    "dataset,classifier,segmentation,background,normalization,perturbation,"
    "metric,instance,value,skip_reason";

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_records_csv(std::ostream& out,
                       const std::vector<ResultRecord>& records) {
  out << kRecordsHeader << "\n";
  for (const ResultRecord& r : records) {
    out << csv_quote(r.dataset) << "," << csv_quote(r.classifier) << ","
        << csv_quote(r.segmentation) << "," << csv_quote(r.background) << ","
        << csv_quote(r.normalization) << "," << csv_quote(r.perturbation)
        << "," << csv_quote(r.metric) << "," << r.instance << ","
        << (r.is_skip() ? "" : format_double(r.value)) << ","
        << csv_quote(r.skip_reason) << "\n";
  }
}

std::vector<ResultRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DatasetLoadError("empty records CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordsHeader) {
    throw DatasetLoadError("unexpected records CSV header");
  }
  std::vector<ResultRecord> records;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = csv_split(line);
    if (f.size() != 10) throw DatasetLoadError("bad records CSV row");
    ResultRecord r;
    r.dataset = f[0];
    r.classifier = f[1];
    r.segmentation = f[2];
    r.background = f[3];
    r.normalization = f[4];
    r.perturbation = f[5];
    r.metric = f[6];
    std::size_t instance = 0;
    auto [ptr, ec] =
        std::from_chars(f[7].data(), f[7].data() + f[7].size(), instance);
    if (ec != std::errc() || ptr != f[7].data() + f[7].size()) {
      throw DatasetLoadError("bad instance id in records CSV");
    }
    r.instance = instance;
    r.skip_reason = f[9];
    if (!r.is_skip()) {
      char* end = nullptr;
      r.value = std::strtod(f[8].c_str(), &end);
      if (end != f[8].c_str() + f[8].size()) {
        throw DatasetLoadError("bad value in records CSV");
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

// --- aggregation ----------------------------------------------------------------

namespace {

const std::string& record_field(const ResultRecord& r,
                                const std::string& name) {
  if (name == "dataset") return r.dataset;
  if (name == "classifier") return r.classifier;
  if (name == "segmentation") return r.segmentation;
  if (name == "background") return r.background;
  if (name == "normalization") return r.normalization;
  if (name == "perturbation") return r.perturbation;
  throw ConfigInvalid("unknown group-by factor '" + name + "'");
}

struct MomentAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return sum / static_cast<double>(count); }
  double stddev() const {
    const double m = mean();
    return std::sqrt(std::max(0.0, sum_sq / static_cast<double>(count) - m * m));
  }
};

}  // namespace

std::vector<AggregateRecord> aggregate(
    const std::vector<ResultRecord>& records,
    const std::vector<std::string>& group_by) {
  std::map<std::vector<std::string>, MomentAccumulator> groups;
  for (const ResultRecord& r : records) {
    if (r.is_skip()) continue;
    std::vector<std::string> key;
    for (const std::string& factor : group_by) {
      key.push_back(record_field(r, factor));
    }
    key.push_back(r.metric);
    groups[key].add(r.value);
  }
  if (groups.empty()) {
    throw EmptyAfterFiltering("no value records to aggregate");
  }
  std::vector<AggregateRecord> out;
  for (const auto& [key, acc] : groups) {
    AggregateRecord agg;
    for (std::size_t i = 0; i < group_by.size(); ++i) {
      agg.group.emplace_back(group_by[i], key[i]);
    }
    agg.metric = key.back();
    agg.mean = acc.mean();
    agg.stddev = acc.stddev();
    agg.count = acc.count;
    out.push_back(std::move(agg));
  }
  return out;
}

void write_aggregates_csv(std::ostream& out,
                          const std::vector<std::string>& group_by,
                          const std::vector<AggregateRecord>& aggregates) {
  for (const std::string& factor : group_by) out << csv_quote(factor) << ",";
  out << "metric,mean,std,count\n";
  for (const AggregateRecord& agg : aggregates) {
    for (const auto& [factor, value] : agg.group) {
      out << csv_quote(value) << ",";
    }
    out << csv_quote(agg.metric) << "," << format_double(agg.mean) << ","
        << format_double(agg.stddev) << "," << agg.count << "\n";
  }
}

std::vector<AggregateRecord> normalization_delta_report(
    const std::vector<ResultRecord>& records) {
  // pair key: everything but the normalization arm
  using PairKey = std::vector<std::string>;
  struct Arms {
    bool has_replicated = false, has_normalized = false;
    bool skip = false;
    double replicated = 0.0, normalized = 0.0;
  };
  std::map<PairKey, Arms> pairs;
  for (const ResultRecord& r : records) {
    PairKey key{r.dataset,       r.classifier, r.segmentation,
                r.background,    r.perturbation, r.metric,
                std::to_string(r.instance)};
    Arms& arms = pairs[key];
    if (r.is_skip()) {
      arms.skip = true;
    }
    if (r.normalization == "normalized") {
      arms.has_normalized = true;
      arms.normalized = r.value;
    } else if (r.normalization == "replicated") {
      arms.has_replicated = true;
      arms.replicated = r.value;
    }
  }

  std::map<std::vector<std::string>, MomentAccumulator> groups;
  for (const auto& [key, arms] : pairs) {
    if (arms.skip) continue;  // dropped, both arms exist but one failed
    if (!arms.has_normalized || !arms.has_replicated) {
      throw UnpairedRecords("missing normalization arm for a matched cell");
    }
    groups[{key[0], key[2], key[5]}].add(arms.normalized - arms.replicated);
  }
  if (groups.empty()) {
    throw EmptyAfterFiltering("no pairs to report");
  }
  std::vector<AggregateRecord> out;
  for (const auto& [key, acc] : groups) {
    AggregateRecord agg;
    agg.group = {{"dataset", key[0]}, {"segmentation", key[1]}};
    agg.metric = key[2];
    agg.mean = acc.mean();
    agg.stddev = acc.stddev();
    agg.count = acc.count;
    out.push_back(std::move(agg));
  }
  return out;
}

std::vector<EntropyRow> entropy_report(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<EntropyRow> rows;
  for (const DatasetSpec& spec : cfg.datasets) {
    const LabeledDataset test =
        load_dataset_file(spec.test_path, spec.csv_channels);
    const std::size_t n_eval = std::min(cfg.max_instances, test.size());
    for (const SegmentationConfig& seg_cfg : cfg.segmentations) {
      MomentAccumulator acc;
      for (std::size_t i = 0; i < n_eval; ++i) {
        const Segmentation seg = run_segmentation(test.instances[i], seg_cfg);
        acc.add(normalized_entropy(seg));
      }
      rows.push_back({spec.name, to_string(seg_cfg.method), acc.mean(),
                      acc.stddev(), acc.count});
    }
  }
  return rows;
}

void write_entropy_csv(std::ostream& out, const std::vector<EntropyRow>& rows) {
  out << "dataset,segmentation,mean_normalized_entropy,std,count\n";
  for (const EntropyRow& row : rows) {
    out << csv_quote(row.dataset) << "," << csv_quote(row.segmentation) << ","
        << format_double(row.mean) << "," << format_double(row.stddev) << ","
        << row.count << "\n";
  }
}

}  // namespace segshap
