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
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "segshap/errors.hpp"

namespace segshap {

/// The TOML subset the experiment config needs: top-level key/value pairs,
/// [table] and [[array-of-tables]] headers, strings, integers, floats,
/// booleans, and flat arrays of scalars. Errors surface as ConfigInvalid.
class TomlValue {
 public:
  using Array = std::vector<TomlValue>;
  using Storage = std::variant<std::string, std::int64_t, double, bool, Array>;

  TomlValue() : storage_(std::int64_t{0}) {}
  explicit TomlValue(Storage s) : storage_(std::move(s)) {}

  bool is_string() const { return std::holds_alternative<std::string>(storage_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(storage_); }
  bool is_float() const { return std::holds_alternative<double>(storage_); }
  bool is_bool() const { return std::holds_alternative<bool>(storage_); }
  bool is_array() const { return std::holds_alternative<Array>(storage_); }

  const std::string& as_string() const;
  std::int64_t as_int() const;
  double as_float() const;  // accepts integers too
  bool as_bool() const;
  const Array& as_array() const;

 private:
  Storage storage_;
};

using TomlTable = std::map<std::string, TomlValue>;

struct TomlDocument {
  TomlTable root;
  std::map<std::string, TomlTable> tables;
  std::map<std::string, std::vector<TomlTable>> table_arrays;

  bool has(const TomlTable& table, const std::string& key) const {
    return table.count(key) > 0;
  }
};

TomlDocument parse_toml(const std::string& text);
TomlDocument parse_toml_file(const std::string& path);

}  // namespace segshap
