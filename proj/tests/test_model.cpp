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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "segshap/core.hpp"
#include "segshap/model.hpp"
#include "segshap/rng.hpp"

using namespace segshap;

namespace {

LabeledDataset two_centroid_train() {
  LabeledDataset ds;
  ds.class_names = {"low", "high"};
  ds.instances.push_back(TimeSeries::from_rows({{0, 0, 0, 0}}));
  ds.instances.push_back(TimeSeries::from_rows({{4, 4, 4, 4}}));
  ds.labels = {0, 1};
  return ds;
}

void check_probability_rows(const ProbaMatrix& rows, std::size_t classes) {
  for (const auto& row : rows) {
    REQUIRE(row.size() == classes);
    double total = 0.0;
    for (double p : row) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

std::string mock_command(const char* script) {
  return std::string("python3 ") + SEGSHAP_TEST_DATA_DIR "/" + script;
}

}  // namespace

TEST_CASE("nearest centroid basics") {
  const ClassifierHandle model = train_nearest_centroid(two_centroid_train());
  SUBCASE("a centroid classifies as its own class") {
    CHECK(model->predict_class(TimeSeries::from_rows({{0, 0, 0, 0}})) == 0);
    CHECK(model->predict_class(TimeSeries::from_rows({{4, 4, 4, 4}})) == 1);
  }
  SUBCASE("equidistant input gives exactly [0.5, 0.5]") {
    const std::vector<double> p =
        model->predict_proba_one(TimeSeries::from_rows({{2, 2, 2, 2}}));
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
  }
  SUBCASE("missing class") {
    LabeledDataset train = two_centroid_train();
    train.class_names.push_back("ghost");
    CHECK_THROWS_AS(train_nearest_centroid(train), MissingClass);
  }
}

TEST_CASE("nearest centroid separates the noiseless bump dataset") {
  const LabeledDataset train = synth_bump_dataset(12, 1, 40, 2, 8, 0.0, 3);
  const ClassifierHandle model = train_nearest_centroid(train);
  for (std::size_t i = 0; i < train.size(); ++i) {
    CHECK(model->predict_class(train.instances[i]) == train.labels[i]);
  }
}

TEST_CASE("predict_proba contract") {
  const ClassifierHandle model = train_nearest_centroid(two_centroid_train());
  SUBCASE("empty batch") {
    CHECK(model->predict_proba({}).empty());
  }
  SUBCASE("identical instances get identical rows") {
    const std::vector<TimeSeries> batch(2, TimeSeries::from_rows({{1, 2, 0, 1}}));
    const ProbaMatrix rows = model->predict_proba(batch);
    CHECK(rows[0] == rows[1]);
  }
  SUBCASE("wrong shape") {
    const std::vector<TimeSeries> batch{TimeSeries(1, 5, 0.0)};
    CHECK_THROWS_AS(model->predict_proba(batch), ShapeMismatch);
  }
}

TEST_CASE("minirocket kernel set and PPV") {
  const auto kernels = detail::minirocket_kernel_set();
  CHECK(kernels.size() == 84);  // C(9,3)
  for (const auto& kernel : kernels) {
    double sum = 0.0;
    int n_pos = 0;
    for (double w : kernel) {
      sum += w;
      n_pos += w == 2.0;
    }
    CHECK(sum == 0.0);
    CHECK(n_pos == 3);
  }
  SUBCASE("all-positive convolution output gives PPV 1") {
    const std::vector<double> conv{0.5, 1.0, 2.0};
    CHECK(detail::ppv(conv, 0.0) == 1.0);
    CHECK(detail::ppv(conv, 5.0) == 0.0);
  }
  SUBCASE("dilated convolution length") {
    std::vector<double> channel(20, 1.0);
    const auto out = detail::dilated_conv(channel, kernels[0], 2);
    CHECK(out.size() == 20 - (8 * 2 + 1) + 1);
    // kernel weights sum to zero, so constant input convolves to zero
    for (double v : out) CHECK(v == doctest::Approx(0.0));
  }
}

TEST_CASE("minirocket ridge on the bump fixture") {
  const LabeledDataset train = synth_bump_dataset(40, 1, 64, 2, 10, 0.1, 2026);
  const ClassifierHandle model = train_minirocket_ridge(train, 200, 1.0, 9);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    correct += model->predict_class(train.instances[i]) == train.labels[i];
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(train.size()) >=
        0.95);

  SUBCASE("deterministic under seed") {
    const ClassifierHandle again = train_minirocket_ridge(train, 200, 1.0, 9);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(model->predict_proba_one(train.instances[i]) ==
            again->predict_proba_one(train.instances[i]));
    }
  }
  SUBCASE("series too short") {
    const LabeledDataset tiny = synth_bump_dataset(4, 1, 8, 2, 2, 0.0, 1);
    CHECK_THROWS_AS(train_minirocket_ridge(tiny, 100, 1.0, 0), SeriesTooShort);
  }
}

TEST_CASE("probability rows are valid distributions on random inputs") {
  const LabeledDataset train = synth_bump_dataset(24, 2, 32, 3, 6, 0.2, 5);
  const std::vector<ClassifierHandle> models = {
      train_nearest_centroid(train),
      train_minirocket_ridge(train, 120, 1.0, 11),
  };
  Rng rng(99);
  std::vector<TimeSeries> batch;
  for (int i = 0; i < 20; ++i) {
    TimeSeries x(2, 32);
    for (double& v : x.raw()) v = rng.normal(0.0, 3.0);
    batch.push_back(std::move(x));
  }
  for (const ClassifierHandle& model : models) {
    check_probability_rows(model->predict_proba(batch), 3);
  }
}

TEST_CASE("external classifier protocol") {
  SUBCASE("well-formed peer") {
    const ClassifierHandle model =
        connect_external(mock_command("mock_classifier_ok.py"));
    CHECK(model->class_names() == std::vector<std::string>{"a", "b"});
    CHECK(model->channels() == 1);
    CHECK(model->length() == 8);

    std::vector<TimeSeries> batch;
    batch.push_back(TimeSeries::from_rows({{1, 1, 1, 1, 1, 1, 1, 1}}));
    batch.push_back(TimeSeries::from_rows({{-1, -1, -1, -1, -1, -1, -1, -1}}));
    const ProbaMatrix rows = model->predict_proba(batch);
    check_probability_rows(rows, 2);
    CHECK(rows[0][0] > 0.5);
    CHECK(rows[1][0] < 0.5);
    // determinism through the pipe
    CHECK(model->predict_proba(batch) == rows);
    // order preserved under empty batch
    CHECK(model->predict_proba({}).empty());
  }
  SUBCASE("row summing to 0.8 is rejected") {
    const ClassifierHandle model =
        connect_external(mock_command("mock_classifier_badsum.py"));
    const std::vector<TimeSeries> batch{TimeSeries(1, 8, 0.0)};
    CHECK_THROWS_AS(model->predict_proba(batch), ProtocolViolation);
  }
  SUBCASE("non-JSON reply is rejected") {
    CHECK_THROWS_AS(connect_external(mock_command("mock_classifier_nonjson.py")),
                    HandshakeFailure);
  }
  SUBCASE("error reply surfaces as ExternalProtocolError") {
    const ClassifierHandle model =
        connect_external(mock_command("mock_classifier_error.py"));
    const std::vector<TimeSeries> batch{TimeSeries(1, 8, 0.0)};
    CHECK_THROWS_AS(model->predict_proba(batch), ExternalProtocolError);
  }
  SUBCASE("immediate exit fails the handshake") {
    CHECK_THROWS_AS(connect_external(mock_command("mock_classifier_exit.py")),
                    HandshakeFailure);
  }
}

TEST_CASE("make_classifier dispatch") {
  const LabeledDataset train = two_centroid_train();
  CHECK(make_classifier("nearest_centroid", train, 0)->n_classes() == 2);
  CHECK_THROWS_AS(make_classifier("bogus", train, 0), ConfigInvalid);
  CHECK(builtin_classifier_names().size() == 2);
}
