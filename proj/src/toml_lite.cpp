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

#include "segshap/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace segshap {

const std::string& TomlValue::as_string() const {
  if (!is_string()) throw ConfigInvalid("expected a string value");
  return std::get<std::string>(storage_);
}

std::int64_t TomlValue::as_int() const {
  if (!is_int()) throw ConfigInvalid("expected an integer value");
  return std::get<std::int64_t>(storage_);
}

double TomlValue::as_float() const {
  if (is_int()) return static_cast<double>(std::get<std::int64_t>(storage_));
  if (!is_float()) throw ConfigInvalid("expected a numeric value");
  return std::get<double>(storage_);
}

bool TomlValue::as_bool() const {
  if (!is_bool()) throw ConfigInvalid("expected a boolean value");
  return std::get<bool>(storage_);
}

const TomlValue::Array& TomlValue::as_array() const {
  if (!is_array()) throw ConfigInvalid("expected an array value");
  return std::get<Array>(storage_);
}

namespace {

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Removes a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

class ValueParser {
 public:
  explicit ValueParser(const std::string& text) : text_(text) {}

  TomlValue parse() {
    TomlValue value = parse_value();
    skip_ws();
    if (pos_ != text_.size()) {
      throw ConfigInvalid("trailing characters after value: '" + text_ + "'");
    }
    return value;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t')) {
      ++pos_;
    }
  }

  TomlValue parse_value() {
    skip_ws();
    if (pos_ >= text_.size()) throw ConfigInvalid("missing value");
    const char c = text_[pos_];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    return parse_scalar();
  }

  TomlValue parse_string() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\' && pos_ < text_.size()) {
        const char esc = text_[pos_++];
        switch (esc) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case 'r': c = '\r'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default:
            throw ConfigInvalid(std::string("unsupported escape \\") + esc);
        }
      }
      out.push_back(c);
    }
    if (pos_ >= text_.size()) throw ConfigInvalid("unterminated string");
    ++pos_;  // closing quote
    return TomlValue(TomlValue::Storage(out));
  }

  TomlValue parse_array() {
    ++pos_;  // '['
    TomlValue::Array items;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ']') {
      ++pos_;
      return TomlValue(TomlValue::Storage(items));
    }
    for (;;) {
      items.push_back(parse_value());
      skip_ws();
      if (pos_ >= text_.size()) throw ConfigInvalid("unterminated array");
      if (text_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ']') {  // trailing comma
          ++pos_;
          return TomlValue(TomlValue::Storage(items));
        }
        continue;
      }
      if (text_[pos_] == ']') {
        ++pos_;
        return TomlValue(TomlValue::Storage(items));
      }
      throw ConfigInvalid("expected ',' or ']' in array");
    }
  }

  TomlValue parse_scalar() {
    std::size_t end = pos_;
    while (end < text_.size() && text_[end] != ',' && text_[end] != ']') ++end;
    const std::string tok = strip(text_.substr(pos_, end - pos_));
    pos_ = end;
    if (tok == "true") return TomlValue(TomlValue::Storage(true));
    if (tok == "false") return TomlValue(TomlValue::Storage(false));
    if (tok.empty()) throw ConfigInvalid("empty value");

    const bool looks_float = tok.find_first_of(".eE") != std::string::npos &&
                             tok.find("0x") != 0;
    if (!looks_float) {
      std::int64_t iv = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
      if (ec == std::errc() && ptr == tok.data() + tok.size()) {
        return TomlValue(TomlValue::Storage(iv));
      }
    }
    char* parse_end = nullptr;
    const double dv = std::strtod(tok.c_str(), &parse_end);
    if (parse_end == tok.c_str() + tok.size()) {
      return TomlValue(TomlValue::Storage(dv));
    }
    throw ConfigInvalid("cannot parse value '" + tok + "'");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (unsigned char c : key) {
    if (!std::isalnum(c) && c != '_' && c != '-') return false;
  }
  return true;
}

}  // namespace

TomlDocument parse_toml(const std::string& text) {
  TomlDocument doc;
  TomlTable* current = &doc.root;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip(strip_comment(raw));
    if (line.empty()) continue;
    try {
      if (line.size() >= 4 && line.substr(0, 2) == "[[" &&
          line.substr(line.size() - 2) == "]]") {
        const std::string name = strip(line.substr(2, line.size() - 4));
        if (!valid_key(name)) throw ConfigInvalid("bad table name");
        doc.table_arrays[name].emplace_back();
        current = &doc.table_arrays[name].back();
      } else if (line.front() == '[' && line.back() == ']') {
        const std::string name = strip(line.substr(1, line.size() - 2));
        if (!valid_key(name)) throw ConfigInvalid("bad table name");
        if (doc.tables.count(name) > 0) {
          throw ConfigInvalid("duplicate table [" + name + "]");
        }
        current = &doc.tables[name];
      } else {
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
          throw ConfigInvalid("expected key = value");
        }
        const std::string key = strip(line.substr(0, eq));
        if (!valid_key(key)) throw ConfigInvalid("bad key '" + key + "'");
        if (current->count(key) > 0) {
          throw ConfigInvalid("duplicate key '" + key + "'");
        }
        (*current)[key] = ValueParser(strip(line.substr(eq + 1))).parse();
      }
    } catch (const ConfigInvalid& e) {
      throw ConfigInvalid("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return doc;
}

TomlDocument parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_toml(buffer.str());
}

}  // namespace segshap
