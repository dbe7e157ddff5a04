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

#include "segshap/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

namespace segshap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_count(std::size_t n) {
  if (n < 1) throw InvalidCount("segment count must be >= 1");
}

}  // namespace

// --- Segmentation ------------------------------------------------------------

std::size_t Segmentation::feature_count() const {
  std::size_t total = 0;
  for (std::size_t c = 0; c < channels(); ++c) total += segment_count(c);
  return total;
}

std::size_t Segmentation::feature_index(std::size_t c, std::size_t s) const {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < c; ++i) offset += segment_count(i);
  return offset + s;
}

std::pair<std::size_t, std::size_t> Segmentation::feature_location(
    std::size_t f) const {
  for (std::size_t c = 0; c < channels(); ++c) {
    if (f < segment_count(c)) return {c, f};
    f -= segment_count(c);
  }
  throw InvalidFeature("feature index out of range");
}

void Segmentation::validate() const {
  if (boundaries.empty()) throw InvalidGeometry("segmentation has no channels");
  const std::size_t L = length();
  for (const auto& bounds : boundaries) {
    if (bounds.size() < 2 || bounds.front() != 0 || bounds.back() != L) {
      throw InvalidGeometry("boundaries must run from 0 to L");
    }
    for (std::size_t i = 1; i < bounds.size(); ++i) {
      if (bounds[i] <= bounds[i - 1]) {
        throw InvalidGeometry("boundaries must be strictly increasing");
      }
    }
  }
  if (mode == SegmentationMode::shared) {
    for (const auto& bounds : boundaries) {
      if (bounds != boundaries.front()) {
        throw InvalidGeometry("shared mode requires identical boundary lists");
      }
    }
  }
}

std::string Segmentation::to_json() const {
  nlohmann::json j;
  j["mode"] = mode == SegmentationMode::shared ? "shared" : "per_channel";
  j["boundaries"] = boundaries;
  return j.dump();
}

Segmentation Segmentation::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Segmentation seg;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "shared") {
    seg.mode = SegmentationMode::shared;
  } else if (mode == "per_channel") {
    seg.mode = SegmentationMode::per_channel;
  } else {
    throw InvalidGeometry("unknown segmentation mode '" + mode + "'");
  }
  seg.boundaries = j.at("boundaries").get<std::vector<std::vector<std::size_t>>>();
  seg.validate();
  return seg;
}

Segmentation Segmentation::shared(std::vector<std::size_t> bounds,
                                  std::size_t d) {
  Segmentation seg;
  seg.mode = SegmentationMode::shared;
  seg.boundaries.assign(d, bounds);
  seg.validate();
  return seg;
}

std::string to_string(SegmentationMethod m) {
  switch (m) {
    case SegmentationMethod::equal: return "equal";
    case SegmentationMethod::binseg: return "binseg";
    case SegmentationMethod::bottomup: return "bottomup";
    case SegmentationMethod::kernelcpd: return "kernelcpd";
    case SegmentationMethod::infogain: return "infogain";
    case SegmentationMethod::greedy_gaussian: return "greedy_gaussian";
    case SegmentationMethod::nnsegment: return "nnsegment";
    case SegmentationMethod::clasp: return "clasp";
  }
  throw InvalidGeometry("bad segmentation method");
}

SegmentationMethod segmentation_method_from_string(const std::string& name) {
  if (name == "equal") return SegmentationMethod::equal;
  if (name == "binseg") return SegmentationMethod::binseg;
  if (name == "bottomup") return SegmentationMethod::bottomup;
  if (name == "kernelcpd") return SegmentationMethod::kernelcpd;
  if (name == "infogain") return SegmentationMethod::infogain;
  if (name == "greedy_gaussian") return SegmentationMethod::greedy_gaussian;
  if (name == "nnsegment") return SegmentationMethod::nnsegment;
  if (name == "clasp") return SegmentationMethod::clasp;
  throw ConfigInvalid("unknown segmentation method '" + name + "'");
}

// --- equal -------------------------------------------------------------------

Segmentation segment_equal(std::size_t length, std::size_t n,
                           std::size_t channels) {
  if (n < 1 || n > length) {
    throw InvalidCount("equal segmentation needs 1 <= n <= L");
  }
  std::vector<std::size_t> bounds{0};
  const std::size_t base = length / n;
  const std::size_t extra = length % n;  // first `extra` segments get +1
  for (std::size_t i = 0; i < n; ++i) {
    bounds.push_back(bounds.back() + base + (i < extra ? 1 : 0));
  }
  return Segmentation::shared(std::move(bounds), channels);
}

// --- L1 cost machinery ---------------------------------------------------------

namespace {

/// Streaming sum of absolute deviations from the running median.
class RunningL1Cost {
 public:
  void add(double v) {
    if (low_.empty() || v <= *low_.rbegin()) {
      low_.insert(v);
      low_sum_ += v;
    } else {
      high_.insert(v);
      high_sum_ += v;
    }
    if (low_.size() > high_.size() + 1) {
      auto it = std::prev(low_.end());
      high_.insert(*it);
      high_sum_ += *it;
      low_sum_ -= *it;
      low_.erase(it);
    } else if (high_.size() > low_.size()) {
      auto it = high_.begin();
      low_.insert(*it);
      low_sum_ += *it;
      high_sum_ -= *it;
      high_.erase(it);
    }
  }

  double cost() const {
    if (low_.empty()) return 0.0;
    const double med = *low_.rbegin();
    return (med * static_cast<double>(low_.size()) - low_sum_) +
           (high_sum_ - med * static_cast<double>(high_.size()));
  }

 private:
  std::multiset<double> low_, high_;
  double low_sum_ = 0.0, high_sum_ = 0.0;
};

/// costs[i] = L1 cost of [a, a+i) summed over channels, i = 0..(b-a).
std::vector<double> l1_prefix_costs(const TimeSeries& x, std::size_t a,
                                    std::size_t b) {
  const std::size_t m = b - a;
  std::vector<double> costs(m + 1, 0.0);
  for (std::size_t c = 0; c < x.channels(); ++c) {
    RunningL1Cost acc;
    for (std::size_t i = 0; i < m; ++i) {
      acc.add(x(c, a + i));
      costs[i + 1] += acc.cost();
    }
  }
  return costs;
}

std::vector<double> l1_suffix_costs(const TimeSeries& x, std::size_t a,
                                    std::size_t b) {
  const std::size_t m = b - a;
  std::vector<double> costs(m + 1, 0.0);
  for (std::size_t c = 0; c < x.channels(); ++c) {
    RunningL1Cost acc;
    for (std::size_t i = 0; i < m; ++i) {
      acc.add(x(c, b - 1 - i));
      costs[i + 1] += acc.cost();
    }
  }
  return costs;
}

}  // namespace

double l1_segment_cost(const TimeSeries& x, std::size_t begin,
                       std::size_t end) {
  return l1_prefix_costs(x, begin, end).back();
}

// --- binseg --------------------------------------------------------------------

namespace {

struct SplitChoice {
  std::size_t position;
  double gain;
};

/// Best L1 split of [a, b) honoring min_size; nullopt when none exists.
/// Ties resolve to the lowest split index.
std::optional<SplitChoice> best_l1_split(const TimeSeries& x, std::size_t a,
                                         std::size_t b, double segment_cost,
                                         std::size_t min_size) {
  if (b - a < 2 * min_size) return std::nullopt;
  const std::vector<double> pref = l1_prefix_costs(x, a, b);
  const std::vector<double> suff = l1_suffix_costs(x, a, b);
  SplitChoice best{0, -kInf};
  for (std::size_t s = a + min_size; s + min_size <= b; ++s) {
    const double gain = segment_cost - (pref[s - a] + suff[b - s]);
    if (gain > best.gain) best = {s, gain};
  }
  return best;
}

struct BinsegNode {
  std::size_t a, b;
  double cost;
  std::optional<SplitChoice> split;
};

}  // namespace

Segmentation segment_binseg(const TimeSeries& x, std::size_t n,
                            std::size_t min_size) {
  check_count(n);
  if (min_size < 1) throw ConfigInvalid("min_size must be >= 1");
  const std::size_t L = x.length();
  if (L < n * min_size) {
    throw SeriesTooShort("binseg needs L >= n * min_size");
  }

  auto make_node = [&](std::size_t a, std::size_t b, std::size_t msize) {
    BinsegNode node{a, b, l1_segment_cost(x, a, b), std::nullopt};
    node.split = best_l1_split(x, a, b, node.cost, msize);
    return node;
  };

  std::vector<BinsegNode> nodes{make_node(0, L, min_size)};
  std::size_t effective_min = min_size;
  while (nodes.size() < n) {
    std::size_t pick = nodes.size();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!nodes[i].split) continue;
      if (pick == nodes.size() ||
          nodes[i].split->gain > nodes[pick].split->gain ||
          (nodes[i].split->gain == nodes[pick].split->gain &&
           nodes[i].split->position < nodes[pick].split->position)) {
        pick = i;
      }
    }
    if (pick == nodes.size()) {
      // No segment admits a min_size split; relax to unit segments so the
      // exactly-n contract still holds.
      if (effective_min == 1) {
        throw SeriesTooShort("cannot reach requested segment count");
      }
      effective_min = 1;
      for (auto& node : nodes) {
        node.split = best_l1_split(x, node.a, node.b, node.cost, 1);
      }
      continue;
    }
    const BinsegNode node = nodes[pick];
    const std::size_t s = node.split->position;
    nodes[pick] = make_node(node.a, s, effective_min);
    nodes.insert(nodes.begin() + static_cast<std::ptrdiff_t>(pick) + 1,
                 make_node(s, node.b, effective_min));
  }

  std::vector<std::size_t> bounds{0};
  for (const auto& node : nodes) bounds.push_back(node.b);
  return Segmentation::shared(std::move(bounds), x.channels());
}

// --- bottomup --------------------------------------------------------------------

Segmentation segment_bottomup(const TimeSeries& x, std::size_t n,
                              std::size_t initial_width) {
  check_count(n);
  if (initial_width < 1) throw ConfigInvalid("initial_width must be >= 1");
  const std::size_t L = x.length();
  const std::size_t n_initial = (L + initial_width - 1) / initial_width;
  if (n > n_initial) {
    throw SeriesTooShort("initial over-split has fewer segments than n");
  }

  std::vector<std::size_t> bounds{0};
  while (bounds.back() < L) {
    bounds.push_back(std::min(L, bounds.back() + initial_width));
  }
  std::vector<double> costs(bounds.size() - 1);
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    costs[i] = l1_segment_cost(x, bounds[i], bounds[i + 1]);
  }

  while (costs.size() > n) {
    std::size_t pick = 0;
    double best_delta = kInf;
    double best_merged = 0.0;
    for (std::size_t i = 0; i + 1 < costs.size(); ++i) {
      const double merged = l1_segment_cost(x, bounds[i], bounds[i + 2]);
      const double delta = merged - costs[i] - costs[i + 1];
      if (delta < best_delta) {
        best_delta = delta;
        best_merged = merged;
        pick = i;
      }
    }
    costs[pick] = best_merged;
    costs.erase(costs.begin() + static_cast<std::ptrdiff_t>(pick) + 1);
    bounds.erase(bounds.begin() + static_cast<std::ptrdiff_t>(pick) + 1);
  }
  return Segmentation::shared(std::move(bounds), x.channels());
}

// --- kernelcpd --------------------------------------------------------------------

namespace {

double scatter_channel_cost(std::span<const double> v, std::size_t a,
                            std::size_t b) {
  double sum = 0.0, sq = 0.0;
  for (std::size_t t = a; t < b; ++t) {
    sum += v[t];
    sq += v[t] * v[t];
  }
  return sq - sum * sum / static_cast<double>(b - a);
}

}  // namespace

double scatter_segment_cost(const TimeSeries& x, std::size_t begin,
                            std::size_t end) {
  double total = 0.0;
  for (std::size_t c = 0; c < x.channels(); ++c) {
    total += scatter_channel_cost(x.channel(c), begin, end);
  }
  return total;
}

double scatter_total_cost(const TimeSeries& x,
                          const std::vector<std::size_t>& bounds) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    total += scatter_segment_cost(x, bounds[i], bounds[i + 1]);
  }
  return total;
}

double scatter_total_cost(const TimeSeries& x, const Segmentation& seg) {
  double total = 0.0;
  for (std::size_t c = 0; c < seg.channels(); ++c) {
    const auto& bounds = seg.boundaries[c];
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
      total += scatter_channel_cost(x.channel(c), bounds[i], bounds[i + 1]);
    }
  }
  return total;
}

Segmentation segment_kernelcpd(const TimeSeries& x, std::size_t n) {
  check_count(n);
  const std::size_t L = x.length();
  const std::size_t d = x.channels();
  if (n > L) throw SeriesTooShort("kernelcpd needs n <= L");

  // prefix sums per channel and of the total squared norm
  std::vector<std::vector<double>> s1(d, std::vector<double>(L + 1, 0.0));
  std::vector<double> s2(L + 1, 0.0);
  for (std::size_t t = 0; t < L; ++t) {
    double sq = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      s1[c][t + 1] = s1[c][t] + x(c, t);
      sq += x(c, t) * x(c, t);
    }
    s2[t + 1] = s2[t] + sq;
  }
  auto cost = [&](std::size_t a, std::size_t b) {
    double within = s2[b] - s2[a];
    for (std::size_t c = 0; c < d; ++c) {
      const double sum = s1[c][b] - s1[c][a];
      within -= sum * sum / static_cast<double>(b - a);
    }
    return within;
  };

  // dp[k][t]: optimal cost of segmenting [0, t) into k segments
  std::vector<std::vector<double>> dp(n + 1, std::vector<double>(L + 1, kInf));
  std::vector<std::vector<std::size_t>> parent(
      n + 1, std::vector<std::size_t>(L + 1, 0));
  for (std::size_t t = 1; t <= L; ++t) dp[1][t] = cost(0, t);
  for (std::size_t k = 2; k <= n; ++k) {
    for (std::size_t t = k; t <= L; ++t) {
      for (std::size_t s = k - 1; s < t; ++s) {
        const double cand = dp[k - 1][s] + cost(s, t);
        if (cand < dp[k][t]) {
          dp[k][t] = cand;
          parent[k][t] = s;
        }
      }
    }
  }

  std::vector<std::size_t> bounds(n + 1);
  bounds[n] = L;
  for (std::size_t k = n; k >= 2; --k) {
    bounds[k - 1] = parent[k][bounds[k]];
  }
  bounds[0] = 0;
  return Segmentation::shared(std::move(bounds), d);
}

// --- infogain --------------------------------------------------------------------

namespace {

constexpr std::size_t kCpMinSize = 2;

/// Greedy one-boundary-at-a-time insertion maximizing `objective` of the
/// whole boundary list. Returns false when no insertion strictly helps and
/// `require_positive_gain` is set.
template <typename Objective>
bool greedy_insertions(std::size_t length, std::size_t n,
                       std::vector<std::size_t>& bounds, Objective objective,
                       bool require_positive_gain) {
  double current = objective(bounds);
  while (bounds.size() < n + 1) {
    double best_score = -kInf;
    std::size_t best_pos = 0;
    std::size_t best_at = 0;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
      const std::size_t a = bounds[i];
      const std::size_t b = bounds[i + 1];
      if (b - a < 2 * kCpMinSize) continue;
      for (std::size_t s = a + kCpMinSize; s + kCpMinSize <= b; ++s) {
        bounds.insert(bounds.begin() + static_cast<std::ptrdiff_t>(i) + 1, s);
        const double score = objective(bounds);
        bounds.erase(bounds.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        if (score > best_score) {
          best_score = score;
          best_pos = s;
          best_at = i + 1;
        }
      }
    }
    if (best_score == -kInf) return false;  // nothing splittable
    if (require_positive_gain && best_score <= current) return false;
    bounds.insert(bounds.begin() + static_cast<std::ptrdiff_t>(best_at),
                  best_pos);
    current = best_score;
  }
  (void)length;
  return true;
}

}  // namespace

Segmentation segment_infogain(const TimeSeries& x, std::size_t n) {
  check_count(n);
  const std::size_t L = x.length();
  const std::size_t d = x.channels();
  if (L < n * kCpMinSize) throw SeriesTooShort("infogain needs L >= 2n");

  // shift each channel to nonnegative mass and take prefix sums
  std::vector<std::vector<double>> mass(d, std::vector<double>(L + 1, 0.0));
  for (std::size_t c = 0; c < d; ++c) {
    const auto chan = x.channel(c);
    const double lo = *std::min_element(chan.begin(), chan.end());
    for (std::size_t t = 0; t < L; ++t) {
      mass[c][t + 1] = mass[c][t] + (chan[t] - lo);
    }
  }
  auto entropy = [&](std::size_t a, std::size_t b) {
    double total = 0.0;
    for (std::size_t c = 0; c < d; ++c) total += mass[c][b] - mass[c][a];
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double p = (mass[c][b] - mass[c][a]) / total;
      if (p > 0.0) h -= p * std::log(p);
    }
    return h;
  };
  // objective = negative length-weighted entropy; inserting the best
  // boundary maximizes the information gain
  auto objective = [&](const std::vector<std::size_t>& bounds) {
    double weighted = 0.0;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
      weighted += static_cast<double>(bounds[i + 1] - bounds[i]) /
                  static_cast<double>(L) * entropy(bounds[i], bounds[i + 1]);
    }
    return -weighted;
  };

  std::vector<std::size_t> bounds{0, L};
  if (greedy_insertions(L, n, bounds, objective,
                        /*require_positive_gain=*/true)) {
    return Segmentation::shared(std::move(bounds), d);
  }
  // Zero gain everywhere (constant or effectively single-channel signal):
  // no total ordering of candidates exists, use the equal split.
  Segmentation seg = segment_equal(L, n, d);
  seg.degenerate_fallback = true;
  return seg;
}

// --- greedy gaussian ----------------------------------------------------------

double gaussian_profile_loglik(const TimeSeries& x,
                               const std::vector<std::size_t>& bounds,
                               double reg) {
  constexpr double ln_two_pi = 1.8378770664093454835606594728112;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const std::size_t a = bounds[i];
    const std::size_t b = bounds[i + 1];
    const double m = static_cast<double>(b - a);
    for (std::size_t c = 0; c < x.channels(); ++c) {
      const double var =
          std::max(0.0, scatter_channel_cost(x.channel(c), a, b) / m);
      total += -0.5 * m * (ln_two_pi + std::log(var + reg) + 1.0);
    }
  }
  return total;
}

Segmentation segment_greedy_gaussian(const TimeSeries& x, std::size_t n,
                                     double reg) {
  check_count(n);
  if (!(reg > 0.0)) throw ConfigInvalid("reg must be > 0");
  const std::size_t L = x.length();
  if (L < n * kCpMinSize) throw SeriesTooShort("greedy_gaussian needs L >= 2n");

  auto objective = [&](const std::vector<std::size_t>& bounds) {
    return gaussian_profile_loglik(x, bounds, reg);
  };
  std::vector<std::size_t> bounds{0, L};
  if (!greedy_insertions(L, n, bounds, objective,
                         /*require_positive_gain=*/false)) {
    throw SeriesTooShort("cannot reach requested segment count");
  }
  return Segmentation::shared(std::move(bounds), x.channels());
}

// --- nnsegment --------------------------------------------------------------------

namespace {

std::vector<double> znormalize(std::span<const double> w) {
  const double m = static_cast<double>(w.size());
  double mean = 0.0;
  for (double v : w) mean += v;
  mean /= m;
  double var = 0.0;
  for (double v : w) var += (v - mean) * (v - mean);
  var /= m;
  std::vector<double> z(w.size(), 0.0);
  if (var > 0.0) {
    const double sd = std::sqrt(var);
    for (std::size_t i = 0; i < w.size(); ++i) z[i] = (w[i] - mean) / sd;
  }
  return z;
}

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sq += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return std::sqrt(sq);
}

/// Pads `points` (sorted, interior boundaries) up to `want` entries using the
/// equal-split positions first, then any unused index.
void pad_boundaries(std::vector<std::size_t>& points, std::size_t want,
                    std::size_t length, std::size_t n) {
  std::set<std::size_t> used(points.begin(), points.end());
  const Segmentation eq = segment_equal(length, n, 1);
  const std::vector<std::size_t>& eq_bounds = eq.boundaries[0];
  for (std::size_t i = 1; i + 1 < eq_bounds.size() && used.size() < want; ++i) {
    used.insert(eq_bounds[i]);
  }
  for (std::size_t p = 1; p < length && used.size() < want; ++p) {
    used.insert(p);
  }
  points.assign(used.begin(), used.end());
}

}  // namespace

std::vector<NnFlag> nn_flag_candidates(std::span<const double> channel,
                                       std::size_t window) {
  const std::size_t m = channel.size() / window;  // trailing partial ignored
  std::vector<std::vector<double>> z(m);
  for (std::size_t i = 0; i < m; ++i) {
    z[i] = znormalize(channel.subspan(i * window, window));
  }
  // nearest-neighbour distance and argmin set per window, self and adjacent
  // windows excluded
  std::vector<double> dmin(m, kInf);
  std::vector<std::vector<std::size_t>> argmin(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (j + 2 <= i || j >= i + 2) {
        const double dist = euclid(z[i], z[j]);
        if (dist < dmin[i]) {
          dmin[i] = dist;
          argmin[i].assign(1, j);
        } else if (dist == dmin[i]) {
          argmin[i].push_back(j);
        }
      }
    }
  }
  // Adjacent windows whose nearest-neighbour sets cannot be reconciled to
  // adjacent indices mark a change point at the start of the later window.
  std::vector<NnFlag> flags;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (argmin[i].empty() || argmin[i + 1].empty()) continue;
    bool reconcilable = false;
    for (std::size_t a : argmin[i]) {
      for (std::size_t b : argmin[i + 1]) {
        const std::size_t gap = a > b ? a - b : b - a;
        if (gap <= 1) {
          reconcilable = true;
          break;
        }
      }
      if (reconcilable) break;
    }
    if (!reconcilable) {
      flags.push_back({(i + 1) * window, std::abs(dmin[i] - dmin[i + 1])});
    }
  }
  return flags;
}

Segmentation segment_nn(const TimeSeries& x, std::size_t n,
                        std::size_t window) {
  check_count(n);
  if (window < 2) throw ConfigInvalid("window must be >= 2");
  const std::size_t L = x.length();
  if (L < 3 * window) throw SeriesTooShort("nnsegment needs L >= 3 * window");
  if (n > L) throw SeriesTooShort("nnsegment needs n <= L");

  Segmentation seg;
  seg.mode = SegmentationMode::per_channel;
  for (std::size_t c = 0; c < x.channels(); ++c) {
    std::vector<NnFlag> flags = nn_flag_candidates(x.channel(c), window);
    if (flags.size() > n - 1) {
      std::stable_sort(flags.begin(), flags.end(),
                       [](const NnFlag& a, const NnFlag& b) {
                         if (a.gap != b.gap) return a.gap > b.gap;
                         return a.position < b.position;
                       });
      flags.resize(n - 1);
    }
    std::vector<std::size_t> points;
    for (const NnFlag& f : flags) points.push_back(f.position);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    if (points.size() < n - 1) pad_boundaries(points, n - 1, L, n);

    std::vector<std::size_t> bounds{0};
    bounds.insert(bounds.end(), points.begin(), points.end());
    bounds.push_back(L);
    seg.boundaries.push_back(std::move(bounds));
  }
  seg.validate();
  return seg;
}

// --- clasp --------------------------------------------------------------------

std::vector<double> clasp_score_profile(std::span<const double> channel,
                                        std::size_t begin, std::size_t end,
                                        std::size_t period) {
  if (end - begin < 2 * period) return {};
  const std::size_t first_s = begin + period;
  const std::size_t last_s = end - period;
  if (last_s < first_s) return {};

  // sliding windows fully inside [begin, end)
  const std::size_t n_windows = end - begin - period + 1;
  std::vector<std::vector<double>> z(n_windows);
  for (std::size_t i = 0; i < n_windows; ++i) {
    z[i] = znormalize(channel.subspan(begin + i, period));
  }
  // leave-one-out nearest neighbour of each window (tie -> lowest index)
  std::vector<std::size_t> nn(n_windows, 0);
  for (std::size_t i = 0; i < n_windows; ++i) {
    double best = kInf;
    for (std::size_t j = 0; j < n_windows; ++j) {
      if (j == i) continue;
      const double dist = euclid(z[i], z[j]);
      if (dist < best) {
        best = dist;
        nn[i] = j;
      }
    }
  }

  std::vector<double> profile;
  profile.reserve(last_s - first_s + 1);
  for (std::size_t s = first_s; s <= last_s; ++s) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n_windows; ++i) {
      const bool left = begin + i < s;
      const bool nn_left = begin + nn[i] < s;
      if (left == nn_left) ++correct;
    }
    profile.push_back(static_cast<double>(correct) /
                      static_cast<double>(n_windows));
  }
  return profile;
}

Segmentation segment_clasp(const TimeSeries& x, std::size_t n,
                           std::size_t period) {
  check_count(n);
  if (period < 2) throw ConfigInvalid("period must be >= 2");
  const std::size_t L = x.length();
  if (L < 4 * period) throw SeriesTooShort("clasp needs L >= 4 * period");
  if (n > L) throw SeriesTooShort("clasp needs n <= L");

  Segmentation seg;
  seg.mode = SegmentationMode::per_channel;
  for (std::size_t c = 0; c < x.channels(); ++c) {
    const auto chan = x.channel(c);
    std::vector<std::size_t> bounds{0, L};
    while (bounds.size() < n + 1) {
      double best_score = -kInf;
      std::size_t best_pos = 0;
      std::size_t best_at = 0;
      for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        const std::vector<double> profile =
            clasp_score_profile(chan, bounds[i], bounds[i + 1], period);
        for (std::size_t k = 0; k < profile.size(); ++k) {
          if (profile[k] > best_score) {
            best_score = profile[k];
            best_pos = bounds[i] + period + k;
            best_at = i + 1;
          }
        }
      }
      if (best_score == -kInf) break;  // no segment admits a split
      bounds.insert(bounds.begin() + static_cast<std::ptrdiff_t>(best_at),
                    best_pos);
    }
    if (bounds.size() < n + 1) {
      std::vector<std::size_t> points(bounds.begin() + 1, bounds.end() - 1);
      pad_boundaries(points, n - 1, L, n);
      bounds.assign(1, 0);
      bounds.insert(bounds.end(), points.begin(), points.end());
      bounds.push_back(L);
    }
    seg.boundaries.push_back(std::move(bounds));
  }
  seg.validate();
  return seg;
}

// --- dispatch and diagnostics ---------------------------------------------------

Segmentation run_segmentation(const TimeSeries& x,
                              const SegmentationConfig& cfg) {
  switch (cfg.method) {
    case SegmentationMethod::equal:
      return segment_equal(x.length(), cfg.n_segments, x.channels());
    case SegmentationMethod::binseg:
      return segment_binseg(x, cfg.n_segments, cfg.min_size);
    case SegmentationMethod::bottomup:
      return segment_bottomup(x, cfg.n_segments, cfg.initial_width);
    case SegmentationMethod::kernelcpd:
      return segment_kernelcpd(x, cfg.n_segments);
    case SegmentationMethod::infogain:
      return segment_infogain(x, cfg.n_segments);
    case SegmentationMethod::greedy_gaussian:
      return segment_greedy_gaussian(x, cfg.n_segments, cfg.reg);
    case SegmentationMethod::nnsegment:
      return segment_nn(x, cfg.n_segments, cfg.window);
    case SegmentationMethod::clasp:
      return segment_clasp(x, cfg.n_segments, cfg.period);
  }
  throw ConfigInvalid("bad segmentation method");
}

double normalized_entropy(const Segmentation& seg) {
  seg.validate();
  const double L = static_cast<double>(seg.length());
  double total = 0.0;
  for (std::size_t c = 0; c < seg.channels(); ++c) {
    const std::size_t n = seg.segment_count(c);
    if (n == 1) {
      total += 1.0;
      continue;
    }
    bool all_equal = true;
    const std::size_t first_len = seg.boundaries[c][1] - seg.boundaries[c][0];
    for (std::size_t s = 1; s < n; ++s) {
      if (seg.boundaries[c][s + 1] - seg.boundaries[c][s] != first_len) {
        all_equal = false;
        break;
      }
    }
    if (all_equal) {
      total += 1.0;  // uniform lengths attain the entropy bound exactly
      continue;
    }
    double h = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double p =
          static_cast<double>(seg.boundaries[c][s + 1] - seg.boundaries[c][s]) /
          L;
      h -= p * std::log(p);
    }
    total += std::min(1.0, h / std::log(static_cast<double>(n)));
  }
  return total / static_cast<double>(seg.channels());
}

}  // namespace segshap
