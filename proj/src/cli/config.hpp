// Copyright 2026 The srmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace srmem::cli {

/// Bad command line or configuration; maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output; maps to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeySpec {
  std::string_view name;
  std::string_view help;
};

/// Every key accepted in a config file or as a --key flag.
const std::vector<KeySpec>& known_keys();

/// Flat key=value store. Later assignments override earlier ones, so the
/// config file is loaded first and command-line flags second.
class Config {
 public:
  /// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
  void load_file(const std::string& path);
  void load_text(std::string_view text, const std::string& origin);
  void set(const std::string& key, const std::string& value, const std::string& origin);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> raw(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, std::optional<double> fallback) const;
  std::uint64_t get_uint(const std::string& key, std::optional<std::uint64_t> fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Comma-separated list; empty string gives an empty list.
  std::vector<std::string> get_list(const std::string& key, const std::string& fallback) const;

  /// All keys in sorted order with their values, for echoing into outputs.
  const std::map<std::string, std::string>& entries() const { return values_; }

  /// Throws ConfigError naming the key unless `ok`.
  void require(bool ok, const std::string& key, const std::string& what) const;

 private:
  std::string origin_of(const std::string& key) const;

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> origins_;
};

}  // namespace srmem::cli
