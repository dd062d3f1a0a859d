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

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace srmem::cli {

/// Scientific notation, 17 significant digits, '.' decimal separator,
/// independent of the global locale.
std::string format_number(double v);

/// Writes '#' comment lines, one header row, then comma-separated rows.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void comment(std::string_view text);
  void header(const std::vector<std::string>& columns);
  /// Empty optionals become empty fields.
  void row(const std::vector<std::optional<double>>& values);
  void raw_row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  std::size_t n_columns_ = 0;
};

/// Numeric table read from CSV text: comment lines skipped, first remaining
/// line is the header. Errors are reported as "<origin>:<line>: ...".
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;

  std::optional<std::size_t> column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, const std::string& origin);

}  // namespace srmem::cli
