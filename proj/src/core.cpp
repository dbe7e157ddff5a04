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

#include "segshap/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "segshap/rng.hpp"

namespace segshap {

TimeSeries::TimeSeries(std::size_t channels, std::size_t length, double fill)
    : channels_(channels), length_(length), values_(channels * length, fill) {
  if (channels == 0 || length == 0) {
    throw InvalidGeometry("TimeSeries requires d >= 1 and L >= 1");
  }
}

TimeSeries TimeSeries::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw InvalidGeometry("TimeSeries requires d >= 1 and L >= 1");
  }
  TimeSeries out(rows.size(), rows.front().size());
  for (std::size_t c = 0; c < rows.size(); ++c) {
    if (rows[c].size() != out.length_) {
      throw InvalidGeometry("all channels must have equal length");
    }
    std::copy(rows[c].begin(), rows[c].end(),
              out.values_.begin() + static_cast<std::ptrdiff_t>(c * out.length_));
  }
  if (!out.all_finite()) {
    throw InvalidGeometry("TimeSeries values must be finite");
  }
  return out;
}

bool TimeSeries::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void LabeledDataset::validate() const {
  if (instances.size() != labels.size()) {
    throw DataRowMismatch("instance/label count mismatch");
  }
  for (std::size_t label : labels) {
    if (label >= class_names.size()) {
      throw DataRowMismatch("label index out of range");
    }
  }
  for (const TimeSeries& x : instances) {
    if (!x.same_shape(instances.front())) {
      throw DataRowMismatch("instances must share one d x L shape");
    }
    if (!x.all_finite()) {
      throw DataRowMismatch("non-finite value in dataset");
    }
  }
}

namespace {

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

double parse_double_strict(const std::string& tok, const char* err_context) {
  const std::string t = trim(tok);
  if (t == "?") {
    throw UnsupportedFeature("missing values ('?') are not supported");
  }
  const char* begin = t.data();
  const char* end = begin + t.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw DataRowMismatch(std::string(err_context) + ": bad value '" + t + "'");
  }
  return value;
}

bool parse_bool_directive(const std::string& tok, const std::string& name) {
  const std::string t = to_lower(trim(tok));
  if (t == "true") return true;
  if (t == "false") return false;
  throw MalformedHeader("@" + name + " expects true or false");
}

std::size_t parse_size_directive(const std::string& tok,
                                 const std::string& name) {
  const std::string t = trim(tok);
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || value == 0) {
    throw MalformedHeader("@" + name + " expects a positive integer");
  }
  return value;
}

struct TsHeader {
  std::optional<std::string> problem_name;
  std::optional<bool> timestamps;
  std::optional<bool> univariate;
  std::optional<std::size_t> dimensions;
  std::optional<bool> equal_length;
  std::optional<std::size_t> series_length;
  std::optional<std::vector<std::string>> class_names;
};

}  // namespace

LabeledDataset parse_ts_file(std::istream& in) {
  TsHeader hdr;
  std::string line;
  bool in_data = false;
  LabeledDataset ds;
  std::size_t channels = 0;
  std::size_t length = 0;
  std::map<std::string, std::size_t> label_index;

  auto require_unset = [](const auto& field, const std::string& name) {
    if (field.has_value()) {
      throw MalformedHeader("duplicate directive @" + name);
    }
  };

  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') continue;

    if (!in_data) {
      if (line[0] != '@') {
        throw MalformedHeader("expected directive, got: " + line);
      }
      const std::size_t sp = line.find_first_of(" \t");
      const std::string name =
          to_lower(line.substr(1, sp == std::string::npos ? std::string::npos
                                                          : sp - 1));
      const std::string rest =
          sp == std::string::npos ? "" : trim(line.substr(sp + 1));

      if (name == "problemname") {
        require_unset(hdr.problem_name, name);
        if (rest.empty()) throw MalformedHeader("@problemName expects a token");
        hdr.problem_name = split_ws(rest).front();
      } else if (name == "timestamps") {
        require_unset(hdr.timestamps, name);
        hdr.timestamps = parse_bool_directive(rest, name);
        if (*hdr.timestamps) {
          throw UnsupportedFeature("timestamped series are not supported");
        }
      } else if (name == "univariate") {
        require_unset(hdr.univariate, name);
        hdr.univariate = parse_bool_directive(rest, name);
      } else if (name == "dimensions") {
        require_unset(hdr.dimensions, name);
        hdr.dimensions = parse_size_directive(rest, name);
      } else if (name == "equallength") {
        require_unset(hdr.equal_length, name);
        hdr.equal_length = parse_bool_directive(rest, name);
        if (!*hdr.equal_length) {
          throw UnsupportedFeature("unequal-length series are not supported");
        }
      } else if (name == "serieslength") {
        require_unset(hdr.series_length, name);
        hdr.series_length = parse_size_directive(rest, name);
      } else if (name == "classlabel") {
        require_unset(hdr.class_names, name);
        std::vector<std::string> toks = split_ws(rest);
        if (toks.empty()) {
          throw MalformedHeader("@classLabel expects true plus labels");
        }
        if (to_lower(toks.front()) != "true") {
          throw UnsupportedFeature("unlabeled datasets are not supported");
        }
        toks.erase(toks.begin());
        if (toks.empty()) {
          throw MalformedHeader("@classLabel declares no labels");
        }
        hdr.class_names = toks;
      } else if (name == "data") {
        if (!hdr.problem_name || !hdr.timestamps || !hdr.univariate ||
            !hdr.equal_length || !hdr.series_length || !hdr.class_names) {
          throw MalformedHeader("missing required directive before @data");
        }
        if (*hdr.univariate) {
          if (hdr.dimensions && *hdr.dimensions != 1) {
            throw MalformedHeader("@dimensions contradicts @univariate true");
          }
          channels = 1;
        } else {
          if (!hdr.dimensions) {
            throw MalformedHeader(
                "@dimensions is required when @univariate false");
          }
          channels = *hdr.dimensions;
        }
        length = *hdr.series_length;
        ds.class_names = *hdr.class_names;
        for (std::size_t i = 0; i < ds.class_names.size(); ++i) {
          if (!label_index.emplace(ds.class_names[i], i).second) {
            throw MalformedHeader("duplicate class label '" +
                                  ds.class_names[i] + "'");
          }
        }
        in_data = true;
      } else {
        throw MalformedHeader("unknown directive @" + name);
      }
      continue;
    }

    // data row: d colon-separated channels, then the label
    std::vector<std::string> fields = split(line, ':');
    if (fields.size() != channels + 1) {
      throw DataRowMismatch("expected " + std::to_string(channels) +
                            " channels, got " +
                            std::to_string(fields.size() - 1));
    }
    TimeSeries x(channels, length);
    for (std::size_t c = 0; c < channels; ++c) {
      std::vector<std::string> toks = split(fields[c], ',');
      if (toks.size() != length) {
        throw DataRowMismatch("channel " + std::to_string(c) + " has " +
                              std::to_string(toks.size()) + " values, expected " +
                              std::to_string(length));
      }
      for (std::size_t t = 0; t < length; ++t) {
        x(c, t) = parse_double_strict(toks[t], "data row");
      }
    }
    const std::string label = trim(fields.back());
    auto it = label_index.find(label);
    if (it == label_index.end()) {
      throw DataRowMismatch("unknown class label '" + label + "'");
    }
    ds.instances.push_back(std::move(x));
    ds.labels.push_back(it->second);
  }

  if (!in_data) throw MalformedHeader("missing @data section");
  if (ds.instances.empty()) throw EmptyData("no data rows");
  ds.validate();
  return ds;
}

LabeledDataset parse_ts_file(const std::string& text) {
  std::istringstream iss(text);
  return parse_ts_file(iss);
}

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string serialize_ts(const LabeledDataset& ds,
                         const std::string& problem_name) {
  if (ds.instances.empty()) throw EmptyData("cannot serialize empty dataset");
  ds.validate();
  std::ostringstream out;
  const std::size_t d = ds.channels();
  out << "@problemName " << problem_name << "\n";
  out << "@timeStamps false\n";
  out << "@univariate " << (d == 1 ? "true" : "false") << "\n";
  if (d != 1) out << "@dimensions " << d << "\n";
  out << "@equalLength true\n";
  out << "@seriesLength " << ds.length() << "\n";
  out << "@classLabel true";
  for (const std::string& name : ds.class_names) out << " " << name;
  out << "\n@data\n";
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    const TimeSeries& x = ds.instances[i];
    for (std::size_t c = 0; c < d; ++c) {
      for (std::size_t t = 0; t < x.length(); ++t) {
        if (t) out << ",";
        out << format_value(x(c, t));
      }
      out << ":";
    }
    out << ds.class_names[ds.labels[i]] << "\n";
  }
  return out.str();
}

LabeledDataset parse_csv(std::istream& in, std::size_t channels) {
  if (channels == 0) throw NonDivisibleColumns("channel count must be >= 1");
  LabeledDataset ds;
  std::map<std::string, std::size_t> label_index;
  std::string line;
  std::size_t length = 0;

  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cols = split(line, ',');
    if (cols.size() < 2) {
      throw NonDivisibleColumns("row needs at least one value and a label");
    }
    const std::size_t n_values = cols.size() - 1;
    if (n_values % channels != 0) {
      throw NonDivisibleColumns(std::to_string(n_values) +
                                " value columns not divisible by d=" +
                                std::to_string(channels));
    }
    const std::size_t row_length = n_values / channels;
    if (ds.instances.empty()) {
      length = row_length;
    } else if (row_length != length) {
      throw DataRowMismatch("inconsistent row length in CSV");
    }
    TimeSeries x(channels, length);
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t t = 0; t < length; ++t) {
        const std::string& tok = cols[c * length + t];
        const std::string trimmed = trim(tok);
        const char* begin = trimmed.data();
        const char* end = begin + trimmed.size();
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
          throw NonNumericValue("bad numeric value '" + trimmed + "'");
        }
        x(c, t) = value;
      }
    }
    const std::string label = trim(cols.back());
    auto [it, inserted] = label_index.emplace(label, label_index.size());
    if (inserted) ds.class_names.push_back(label);
    ds.instances.push_back(std::move(x));
    ds.labels.push_back(it->second);
  }

  if (ds.instances.empty()) throw EmptyData("no CSV rows");
  ds.validate();
  return ds;
}

LabeledDataset parse_csv(const std::string& text, std::size_t channels) {
  std::istringstream iss(text);
  return parse_csv(iss, channels);
}

LabeledDataset load_dataset_file(const std::string& path,
                                 std::size_t csv_channels) {
  std::ifstream in(path);
  if (!in) throw DatasetLoadError("cannot open '" + path + "'");
  try {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
      return parse_csv(in, csv_channels);
    }
    return parse_ts_file(in);
  } catch (const Error& e) {
    throw DatasetLoadError(path + ": " + e.what());
  }
}

ChannelStats compute_channel_stats(const LabeledDataset& ds) {
  if (ds.instances.empty()) throw EmptyData("stats of empty dataset");
  const std::size_t d = ds.channels();
  const std::size_t L = ds.length();
  ChannelStats stats;
  stats.mean.assign(d, 0.0);
  stats.stddev.assign(d, 0.0);
  const double n = static_cast<double>(ds.size() * L);
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0.0;
    for (const TimeSeries& x : ds.instances) {
      for (double v : x.channel(c)) sum += v;
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (const TimeSeries& x : ds.instances) {
      for (double v : x.channel(c)) sq += (v - mean) * (v - mean);
    }
    stats.mean[c] = mean;
    stats.stddev[c] = std::sqrt(sq / n);  // population std
  }
  return stats;
}

TimeSeries average_instance(const LabeledDataset& ds) {
  if (ds.instances.empty()) throw EmptyData("average of empty dataset");
  TimeSeries avg(ds.channels(), ds.length(), 0.0);
  for (const TimeSeries& x : ds.instances) {
    for (std::size_t i = 0; i < avg.raw().size(); ++i) {
      avg.raw()[i] += x.raw()[i];
    }
  }
  const double n = static_cast<double>(ds.size());
  for (double& v : avg.raw()) v /= n;
  return avg;
}

TimeSeries concat_channels(const TimeSeries& x) {
  if (x.channels() == 1) return x;
  TimeSeries out(1, x.cells());
  std::copy(x.raw().begin(), x.raw().end(), out.raw().begin());
  return out;
}

LabeledDataset synth_bump_dataset(std::size_t n_instances,
                                  std::size_t channels, std::size_t length,
                                  std::size_t n_classes,
                                  std::size_t bump_width, double noise_std,
                                  std::uint64_t seed) {
  if (n_classes < 2 || bump_width == 0 || channels == 0 || n_instances == 0 ||
      n_classes * bump_width > length) {
    throw InvalidGeometry("need n_classes >= 2 and n_classes*bump_width <= L");
  }
  LabeledDataset ds;
  for (std::size_t c = 0; c < n_classes; ++c) {
    ds.class_names.push_back("class_" + std::to_string(c));
  }
  const std::size_t slot = length / n_classes;
  for (std::size_t i = 0; i < n_instances; ++i) {
    const std::size_t cls = i % n_classes;
    TimeSeries x(channels, length, 0.0);
    const std::size_t start = cls * slot;
    for (std::size_t t = start; t < start + bump_width; ++t) x(0, t) = 1.0;
    if (noise_std > 0.0) {
      Rng rng = Rng::from_words({seed, i});
      for (double& v : x.raw()) v += rng.normal(0.0, noise_std);
    }
    ds.instances.push_back(std::move(x));
    ds.labels.push_back(cls);
  }
  return ds;
}

}  // namespace segshap
