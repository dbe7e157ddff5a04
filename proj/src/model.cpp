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

#include "segshap/model.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "segshap/rng.hpp"

namespace segshap {

std::vector<double> Classifier::predict_proba_one(const TimeSeries& x) const {
  return predict_proba(std::span<const TimeSeries>(&x, 1)).front();
}

std::size_t Classifier::predict_class(const TimeSeries& x) const {
  const std::vector<double> p = predict_proba_one(x);
  return static_cast<std::size_t>(
      std::max_element(p.begin(), p.end()) - p.begin());
}

void Classifier::check_batch(std::span<const TimeSeries> batch) const {
  for (const TimeSeries& x : batch) {
    if (x.channels() != channels() || x.length() != length()) {
      throw ShapeMismatch("instance shape does not match classifier");
    }
  }
}

namespace {

std::vector<double> softmax(const std::vector<double>& scores) {
  const double hi = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] - hi);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

void check_classes_covered(const LabeledDataset& train) {
  std::vector<bool> seen(train.class_names.size(), false);
  for (std::size_t label : train.labels) seen[label] = true;
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) {
      throw MissingClass("no training instance for class '" +
                         train.class_names[c] + "'");
    }
  }
}

// --- nearest centroid -------------------------------------------------------

class NearestCentroid final : public Classifier {
 public:
  NearestCentroid(std::vector<TimeSeries> centroids,
                  std::vector<std::string> names)
      : centroids_(std::move(centroids)), names_(std::move(names)) {}

  ProbaMatrix predict_proba(std::span<const TimeSeries> batch) const override {
    check_batch(batch);
    ProbaMatrix out;
    out.reserve(batch.size());
    const double scale =
        std::sqrt(static_cast<double>(channels() * length()));
    for (const TimeSeries& x : batch) {
      std::vector<double> scores(centroids_.size());
      for (std::size_t c = 0; c < centroids_.size(); ++c) {
        double sq = 0.0;
        const auto& cen = centroids_[c].raw();
        for (std::size_t i = 0; i < cen.size(); ++i) {
          const double diff = x.raw()[i] - cen[i];
          sq += diff * diff;
        }
        scores[c] = -std::sqrt(sq) / scale;
      }
      out.push_back(softmax(scores));
    }
    return out;
  }

  const std::vector<std::string>& class_names() const override {
    return names_;
  }
  std::size_t channels() const override { return centroids_.front().channels(); }
  std::size_t length() const override { return centroids_.front().length(); }

 private:
  std::vector<TimeSeries> centroids_;
  std::vector<std::string> names_;
};

}  // namespace

ClassifierHandle train_nearest_centroid(const LabeledDataset& train) {
  if (train.instances.empty()) throw EmptyData("empty training set");
  train.validate();
  check_classes_covered(train);
  const std::size_t k = train.class_names.size();
  std::vector<TimeSeries> centroids(
      k, TimeSeries(train.channels(), train.length(), 0.0));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const std::size_t c = train.labels[i];
    for (std::size_t j = 0; j < centroids[c].raw().size(); ++j) {
      centroids[c].raw()[j] += train.instances[i].raw()[j];
    }
    ++counts[c];
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (double& v : centroids[c].raw()) {
      v /= static_cast<double>(counts[c]);
    }
  }
  return std::make_shared<NearestCentroid>(std::move(centroids),
                                           train.class_names);
}

// --- minirocket ---------------------------------------------------------------

namespace detail {

std::vector<std::array<double, 9>> minirocket_kernel_set() {
  std::vector<std::array<double, 9>> kernels;
  for (std::size_t a = 0; a < 9; ++a) {
    for (std::size_t b = a + 1; b < 9; ++b) {
      for (std::size_t c = b + 1; c < 9; ++c) {
        std::array<double, 9> w;
        w.fill(-1.0);
        w[a] = w[b] = w[c] = 2.0;
        kernels.push_back(w);
      }
    }
  }
  return kernels;  // C(9,3) = 84
}

std::vector<double> dilated_conv(std::span<const double> channel,
                                 const std::array<double, 9>& kernel,
                                 std::size_t dilation) {
  const std::size_t receptive = 8 * dilation + 1;
  if (channel.size() < receptive) return {};
  std::vector<double> out(channel.size() - receptive + 1);
  for (std::size_t t = 0; t < out.size(); ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < 9; ++k) {
      acc += kernel[k] * channel[t + k * dilation];
    }
    out[t] = acc;
  }
  return out;
}

double ppv(std::span<const double> values, double bias) {
  if (values.empty()) return 0.0;
  std::size_t count = 0;
  for (double v : values) count += v > bias;
  return static_cast<double>(count) / static_cast<double>(values.size());
}

}  // namespace detail

namespace {

struct RocketFeature {
  std::size_t kernel;
  std::size_t dilation;
  std::size_t channel;
  double bias;
};

class MiniRocketLite final : public Classifier {
 public:
  MiniRocketLite(std::vector<std::array<double, 9>> kernels,
                 std::vector<RocketFeature> features,
                 std::vector<double> feat_mean, std::vector<double> feat_std,
                 Eigen::MatrixXd weights, Eigen::VectorXd intercept,
                 std::vector<std::string> names, std::size_t d, std::size_t L)
      : kernels_(std::move(kernels)),
        features_(std::move(features)),
        feat_mean_(std::move(feat_mean)),
        feat_std_(std::move(feat_std)),
        weights_(std::move(weights)),
        intercept_(std::move(intercept)),
        names_(std::move(names)),
        channels_(d),
        length_(L) {}

  std::vector<double> featurize(const TimeSeries& x) const {
    std::vector<double> feats(features_.size());
    // conv outputs are shared between features with the same
    // (kernel, dilation, channel); features_ is sorted so runs are contiguous
    std::vector<double> conv;
    std::size_t prev_kernel = features_.size();  // sentinel
    std::size_t prev_dilation = 0, prev_channel = 0;
    for (std::size_t f = 0; f < features_.size(); ++f) {
      const RocketFeature& rf = features_[f];
      if (f == 0 || rf.kernel != prev_kernel || rf.dilation != prev_dilation ||
          rf.channel != prev_channel) {
        conv = detail::dilated_conv(x.channel(rf.channel), kernels_[rf.kernel],
                                    rf.dilation);
        prev_kernel = rf.kernel;
        prev_dilation = rf.dilation;
        prev_channel = rf.channel;
      }
      feats[f] = detail::ppv(conv, rf.bias);
    }
    return feats;
  }

  ProbaMatrix predict_proba(std::span<const TimeSeries> batch) const override {
    check_batch(batch);
    ProbaMatrix out;
    out.reserve(batch.size());
    for (const TimeSeries& x : batch) {
      const std::vector<double> feats = featurize(x);
      std::vector<double> scores(names_.size(), 0.0);
      for (std::size_t c = 0; c < names_.size(); ++c) {
        double acc = intercept_(static_cast<Eigen::Index>(c));
        for (std::size_t f = 0; f < feats.size(); ++f) {
          const double z = feat_std_[f] > 0.0
                               ? (feats[f] - feat_mean_[f]) / feat_std_[f]
                               : 0.0;
          acc += weights_(static_cast<Eigen::Index>(f),
                          static_cast<Eigen::Index>(c)) *
                 z;
        }
        scores[c] = acc;
      }
      out.push_back(softmax(scores));
    }
    return out;
  }

  const std::vector<std::string>& class_names() const override {
    return names_;
  }
  std::size_t channels() const override { return channels_; }
  std::size_t length() const override { return length_; }

 private:
  std::vector<std::array<double, 9>> kernels_;
  std::vector<RocketFeature> features_;
  std::vector<double> feat_mean_, feat_std_;
  Eigen::MatrixXd weights_;   // F x C
  Eigen::VectorXd intercept_;  // C
  std::vector<std::string> names_;
  std::size_t channels_, length_;
};

double sorted_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

ClassifierHandle train_minirocket_ridge(const LabeledDataset& train,
                                        std::size_t n_features, double lambda,
                                        std::uint64_t seed) {
  if (train.instances.empty()) throw EmptyData("empty training set");
  train.validate();
  check_classes_covered(train);
  const std::size_t L = train.length();
  const std::size_t d = train.channels();
  if (L < 9) throw SeriesTooShort("minirocket needs L >= 9");
  if (n_features < 84) throw ConfigInvalid("n_features must be >= 84");

  std::vector<std::array<double, 9>> kernels = detail::minirocket_kernel_set();

  // dilations 2^j with receptive field 8*dilation + 1 <= L
  std::vector<std::size_t> dilations;
  for (std::size_t dil = 1; 8 * dil + 1 <= L; dil *= 2) {
    dilations.push_back(dil);
  }

  // spread the feature budget over (kernel, dilation) pairs; each feature
  // gets a bias quantile drawn from a seeded random training instance
  const std::size_t n_pairs = kernels.size() * dilations.size();
  Rng rng = Rng::from_words({seed, fnv1a64("minirocket")});
  std::vector<RocketFeature> features;
  features.reserve(n_features);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    const std::size_t count =
        n_features / n_pairs + (p < n_features % n_pairs ? 1 : 0);
    if (count == 0) continue;
    const std::size_t kernel = p % kernels.size();
    const std::size_t dilation = dilations[p / kernels.size()];
    const std::size_t channel = d == 1 ? 0 : rng.below(d);
    const std::size_t inst = rng.below(train.size());
    std::vector<double> conv = detail::dilated_conv(
        train.instances[inst].channel(channel), kernels[kernel], dilation);
    std::sort(conv.begin(), conv.end());
    for (std::size_t j = 0; j < count; ++j) {
      const double q = static_cast<double>(j + 1) / static_cast<double>(count + 1);
      features.push_back({kernel, dilation, channel, sorted_quantile(conv, q)});
    }
  }
  std::stable_sort(features.begin(), features.end(),
                   [](const RocketFeature& a, const RocketFeature& b) {
                     if (a.channel != b.channel) return a.channel < b.channel;
                     if (a.kernel != b.kernel) return a.kernel < b.kernel;
                     return a.dilation < b.dilation;
                   });

  // training feature matrix
  const std::size_t n = train.size();
  const std::size_t F = features.size();
  Eigen::MatrixXd phi(n, F);
  {
    MiniRocketLite probe(kernels, features, std::vector<double>(F, 0.0),
                         std::vector<double>(F, 1.0), Eigen::MatrixXd(),
                         Eigen::VectorXd(), train.class_names, d, L);
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> feats = probe.featurize(train.instances[i]);
      for (std::size_t f = 0; f < F; ++f) {
        phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) =
            feats[f];
      }
    }
  }

  // standardize, then closed-form one-vs-rest ridge on +-1 targets
  std::vector<double> feat_mean(F), feat_std(F);
  for (std::size_t f = 0; f < F; ++f) {
    const auto col = phi.col(static_cast<Eigen::Index>(f));
    feat_mean[f] = col.mean();
    feat_std[f] = std::sqrt(
        (col.array() - feat_mean[f]).square().sum() / static_cast<double>(n));
    if (feat_std[f] > 0.0) {
      phi.col(static_cast<Eigen::Index>(f)) =
          (col.array() - feat_mean[f]) / feat_std[f];
    } else {
      phi.col(static_cast<Eigen::Index>(f)).setZero();
    }
  }
  const std::size_t k = train.class_names.size();
  Eigen::MatrixXd targets(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      targets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          train.labels[i] == c ? 1.0 : -1.0;
    }
  }
  Eigen::MatrixXd gram = phi.transpose() * phi;
  gram.diagonal().array() += lambda;
  const Eigen::MatrixXd weights =
      gram.ldlt().solve(phi.transpose() * targets);  // F x C
  const Eigen::VectorXd intercept = targets.colwise().mean();

  return std::make_shared<MiniRocketLite>(
      std::move(kernels), std::move(features), std::move(feat_mean),
      std::move(feat_std), weights, intercept, train.class_names, d, L);
}

// --- registry ------------------------------------------------------------------

std::vector<std::string> builtin_classifier_names() {
  return {"nearest_centroid", "minirocket"};
}

ClassifierHandle make_classifier(const std::string& spec,
                                 const LabeledDataset& train,
                                 std::uint64_t seed) {
  if (spec == "nearest_centroid") return train_nearest_centroid(train);
  if (spec == "minirocket") {
    return train_minirocket_ridge(train, 1000, 1.0, seed);
  }
  if (spec.rfind("external:", 0) == 0) {
    return connect_external(spec.substr(9));
  }
  throw ConfigInvalid("unknown classifier '" + spec + "'");
}

}  // namespace segshap
