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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "segshap/attribution.hpp"
#include "segshap/core.hpp"
#include "segshap/evaluation.hpp"
#include "segshap/model.hpp"
#include "segshap/runner.hpp"
#include "segshap/segmentation.hpp"

namespace {

using namespace segshap;

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

struct SegmentationOptions {
  std::string method = "equal";
  std::size_t n_segments = 10;
  std::size_t min_size = 2;
  std::size_t initial_width = 2;
  std::size_t window = 10;
  std::size_t period = 4;
  double reg = 1e-4;

  void attach(CLI::App* cmd) {
    cmd->add_option("--method,--segmentation", method,
                    "equal|binseg|bottomup|kernelcpd|infogain|"
                    "greedy_gaussian|nnsegment|clasp");
    cmd->add_option("--n-segments", n_segments, "target segment count");
    cmd->add_option("--min-size", min_size, "binseg minimum segment size");
    cmd->add_option("--initial-width", initial_width,
                    "bottomup over-split width");
    cmd->add_option("--window", window, "nnsegment window length");
    cmd->add_option("--period", period, "clasp period length");
    cmd->add_option("--reg", reg, "greedy_gaussian variance regularizer");
  }

  SegmentationConfig to_config() const {
    SegmentationConfig cfg;
    cfg.method = segmentation_method_from_string(method);
    cfg.n_segments = n_segments;
    cfg.min_size = min_size;
    cfg.initial_width = initial_width;
    cfg.window = window;
    cfg.period = period;
    cfg.reg = reg;
    return cfg;
  }
};

struct ExplainOptions {
  std::string train_path, test_path;
  std::size_t channels = 1;
  std::string classifier = "nearest_centroid";
  SegmentationOptions seg;
  std::string background = "average";
  bool normalize = true;
  std::size_t permutations = 25;
  std::uint64_t seed = 0;
  std::size_t instance = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--train", train_path, "training dataset (.ts or .csv)")
        ->required();
    cmd->add_option("--test", test_path, "test dataset (.ts or .csv)")
        ->required();
    cmd->add_option("--channels", channels, "channel count for CSV inputs");
    cmd->add_option("--classifier", classifier,
                    "nearest_centroid|minirocket|external:<command>");
    seg.attach(cmd);
    cmd->add_option("--background", background, "zero|average");
    cmd->add_flag("--normalize,!--no-normalize", normalize,
                  "length-normalised timepoint expansion (default on)");
    cmd->add_option("--permutations", permutations,
                    "Shapley sampling permutations");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--instance", instance, "test instance index");
  }
};

BackgroundSet make_background(const std::string& name,
                              const LabeledDataset& train) {
  if (name == "zero") return background_zero(train.channels(), train.length());
  if (name == "average") return background_average(train);
  throw ConfigInvalid("unknown background '" + name + "'");
}

TimepointAttribution run_explain(const ExplainOptions& opt,
                                 LabeledDataset& train, LabeledDataset& test,
                                 ClassifierHandle& model) {
  train = load_dataset_file(opt.train_path, opt.channels);
  test = load_dataset_file(opt.test_path, opt.channels);
  test.role = DatasetRole::test;
  if (opt.instance >= test.size()) {
    throw ConfigInvalid("instance index out of range");
  }
  model = make_classifier(opt.classifier, train, opt.seed);
  const TimeSeries& x = test.instances[opt.instance];
  const Segmentation seg = run_segmentation(x, opt.seg.to_config());
  const BackgroundSet background = make_background(opt.background, train);
  const std::size_t predicted = model->predict_class(x);
  const SegmentAttribution attr =
      shapley_sampling(*model, x, seg, background, predicted,
                       opt.permutations, opt.seed);
  return expand_to_timepoints(attr, opt.normalize ? ExpansionMode::normalized
                                                  : ExpansionMode::replicated);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"segment-based SHAP attribution and evaluation for time series "
               "classifiers"};
  app.require_subcommand(1);

  // --- classifiers ---
  CLI::App* cmd_classifiers =
      app.add_subcommand("classifiers", "list built-in classifiers");

  // --- synth ---
  CLI::App* cmd_synth = app.add_subcommand(
      "synth", "generate a synthetic bump dataset as .ts files");
  std::string synth_train = "synth_TRAIN.ts", synth_test = "synth_TEST.ts";
  std::string synth_name = "synth_bump";
  std::size_t synth_train_n = 40, synth_test_n = 20, synth_channels = 1,
              synth_length = 100, synth_classes = 2, synth_bump = 10;
  double synth_noise = 0.1;
  std::uint64_t synth_seed = 7;
  cmd_synth->add_option("--out-train", synth_train, "train output path");
  cmd_synth->add_option("--out-test", synth_test, "test output path");
  cmd_synth->add_option("--name", synth_name, "problem name");
  cmd_synth->add_option("--train-instances", synth_train_n, "");
  cmd_synth->add_option("--test-instances", synth_test_n, "");
  cmd_synth->add_option("--channels", synth_channels, "");
  cmd_synth->add_option("--length", synth_length, "");
  cmd_synth->add_option("--classes", synth_classes, "");
  cmd_synth->add_option("--bump-width", synth_bump, "");
  cmd_synth->add_option("--noise", synth_noise, "noise std");
  cmd_synth->add_option("--seed", synth_seed, "");

  // --- segment ---
  CLI::App* cmd_segment =
      app.add_subcommand("segment", "segment one instance of a dataset");
  std::string segment_input, segment_out = "-";
  std::size_t segment_channels = 1, segment_instance = 0;
  SegmentationOptions segment_opts;
  cmd_segment->add_option("--input", segment_input, "dataset (.ts or .csv)")
      ->required();
  cmd_segment->add_option("--channels", segment_channels,
                          "channel count for CSV inputs");
  cmd_segment->add_option("--instance", segment_instance,
                          "instance index to segment");
  segment_opts.attach(cmd_segment);
  cmd_segment->add_option("--out", segment_out, "output JSON path ('-' = stdout)");

  // --- explain ---
  CLI::App* cmd_explain = app.add_subcommand(
      "explain", "segment-SHAP attribution of one test instance");
  ExplainOptions explain_opts;
  std::string explain_out = "-";
  explain_opts.attach(cmd_explain);
  cmd_explain->add_option("--out", explain_out, "output JSON path");

  // --- evaluate ---
  CLI::App* cmd_evaluate = app.add_subcommand(
      "evaluate", "score an attribution with interprettime or aucd");
  ExplainOptions evaluate_opts;
  std::string evaluate_out = "-";
  std::string evaluate_metric = "interprettime";
  std::string evaluate_pert = "normal";
  evaluate_opts.attach(cmd_evaluate);
  cmd_evaluate->add_option("--metric", evaluate_metric, "interprettime|aucd");
  cmd_evaluate->add_option("--perturbation", evaluate_pert,
                           "normal|global_gaussian|global_mean|local_mean");
  cmd_evaluate->add_option("--out", evaluate_out, "output JSON path");

  // --- run ---
  CLI::App* cmd_run =
      app.add_subcommand("run", "execute the full experiment grid");
  std::string run_config;
  std::string run_out;
  cmd_run->add_option("--config", run_config, "TOML experiment config")
      ->required();
  cmd_run->add_option("--out", run_out, "output directory (overrides config)");

  // --- aggregate ---
  CLI::App* cmd_aggregate =
      app.add_subcommand("aggregate", "aggregate a records CSV");
  std::string agg_input, agg_out = "-";
  std::string agg_group = "dataset,classifier";
  cmd_aggregate->add_option("--input", agg_input, "records.csv")->required();
  cmd_aggregate->add_option("--group-by", agg_group,
                            "comma-separated factor list");
  cmd_aggregate->add_option("--out", agg_out, "output CSV path");

  // --- report ---
  CLI::App* cmd_report =
      app.add_subcommand("report", "normalization delta or entropy report");
  std::string report_kind, report_input, report_config, report_out = "-";
  cmd_report->add_option("--kind", report_kind, "normalization|entropy")
      ->required();
  cmd_report->add_option("--input", report_input,
                         "records.csv (normalization report)");
  cmd_report->add_option("--config", report_config,
                         "experiment config (entropy report)");
  cmd_report->add_option("--out", report_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  if (*cmd_classifiers) {
    for (const std::string& name : builtin_classifier_names()) {
      std::cout << name << "\n";
    }
    std::cout << "external:<command>\n";
    return 0;
  }

  if (*cmd_synth) {
    const LabeledDataset train =
        synth_bump_dataset(synth_train_n, synth_channels, synth_length,
                           synth_classes, synth_bump, synth_noise, synth_seed);
    const LabeledDataset test = synth_bump_dataset(
        synth_test_n, synth_channels, synth_length, synth_classes, synth_bump,
        synth_noise, synth_seed + 1);
    write_output(synth_train, serialize_ts(train, synth_name));
    write_output(synth_test, serialize_ts(test, synth_name));
    return 0;
  }

  if (*cmd_segment) {
    const LabeledDataset ds = load_dataset_file(segment_input, segment_channels);
    if (segment_instance >= ds.size()) {
      throw ConfigInvalid("instance index out of range");
    }
    const Segmentation seg =
        run_segmentation(ds.instances[segment_instance],
                         segment_opts.to_config());
    write_output(segment_out, seg.to_json() + "\n");
    return 0;
  }

  if (*cmd_explain) {
    LabeledDataset train, test;
    ClassifierHandle model;
    const TimepointAttribution attr =
        run_explain(explain_opts, train, test, model);
    write_output(explain_out, attr.to_json() + "\n");
    return 0;
  }

  if (*cmd_evaluate) {
    LabeledDataset train, test;
    ClassifierHandle model;
    const TimepointAttribution attr =
        run_explain(evaluate_opts, train, test, model);
    const TimeSeries& x = test.instances[evaluate_opts.instance];
    EvalConfig eval_cfg;
    eval_cfg.seed = evaluate_opts.seed;
    nlohmann::json j;
    j["instance"] = evaluate_opts.instance;
    j["metric"] = evaluate_metric;
    if (metric_from_string(evaluate_metric) == Metric::interprettime) {
      const ChannelStats stats = compute_channel_stats(train);
      const InterpretTimeResult res =
          interpret_time(*model, x, attr, perturbation_from_string(evaluate_pert),
                         stats, eval_cfg);
      j["result"] = nlohmann::json::parse(res.to_json());
    } else {
      const AUCDResult res = aucd(*model, x, attr, train, eval_cfg);
      j["result"] = nlohmann::json::parse(res.to_json());
    }
    write_output(evaluate_out, j.dump(2) + "\n");
    return 0;
  }

  if (*cmd_run) {
    ExperimentConfig cfg = load_config(run_config);
    if (!run_out.empty()) cfg.out_dir = run_out;
    std::filesystem::create_directories(cfg.out_dir);
    const std::vector<ResultRecord> records = run_experiment(cfg);
    std::size_t skips = 0;
    for (const ResultRecord& r : records) skips += r.is_skip();
    {
      std::ofstream out(cfg.out_dir + "/records.csv");
      if (!out) throw Error("cannot write records.csv");
      write_records_csv(out, records);
    }
    {
      nlohmann::json meta;
      meta["config"] = run_config;
      meta["seed"] = cfg.seed;
      meta["shap_permutations"] = cfg.shap_permutations;
      meta["max_instances"] = cfg.max_instances;
      meta["records"] = records.size();
      meta["skips"] = skips;
      std::ofstream out(cfg.out_dir + "/metadata.json");
      out << meta.dump(2) << "\n";
    }
    std::cerr << "wrote " << records.size() << " records (" << skips
              << " skips) to " << cfg.out_dir << "/records.csv\n";
    return skips > 0 ? 2 : 0;
  }

  if (*cmd_aggregate) {
    std::ifstream in(agg_input);
    if (!in) throw DatasetLoadError("cannot open '" + agg_input + "'");
    const std::vector<ResultRecord> records = read_records_csv(in);
    std::vector<std::string> factors;
    std::stringstream ss(agg_group);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) factors.push_back(tok);
    }
    const std::vector<AggregateRecord> aggs = aggregate(records, factors);
    std::ostringstream out;
    write_aggregates_csv(out, factors, aggs);
    write_output(agg_out, out.str());
    return 0;
  }

  if (*cmd_report) {
    std::ostringstream out;
    if (report_kind == "normalization") {
      if (report_input.empty()) {
        throw ConfigInvalid("--kind normalization needs --input records.csv");
      }
      std::ifstream in(report_input);
      if (!in) throw DatasetLoadError("cannot open '" + report_input + "'");
      const std::vector<AggregateRecord> deltas =
          normalization_delta_report(read_records_csv(in));
      write_aggregates_csv(out, {"dataset", "segmentation"}, deltas);
    } else if (report_kind == "entropy") {
      if (report_config.empty()) {
        throw ConfigInvalid("--kind entropy needs --config");
      }
      const std::vector<EntropyRow> rows =
          entropy_report(load_config(report_config));
      write_entropy_csv(out, rows);
    } else {
      throw ConfigInvalid("unknown report kind '" + report_kind + "'");
    }
    write_output(report_out, out.str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const segshap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
