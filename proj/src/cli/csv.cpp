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

#include "cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "cli/config.hpp"

namespace srmem::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t c = line.find(',', pos);
    out.push_back(trim(line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos)));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  // std::to_chars ignores the locale, unlike printf
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

void CsvWriter::comment(std::string_view text) { out_ << "# " << text << '\n'; }

void CsvWriter::header(const std::vector<std::string>& columns) {
  n_columns_ = columns.size();
  raw_row(columns);
}

void CsvWriter::row(const std::vector<std::optional<double>>& values) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (const auto& v : values) fields.push_back(v ? format_number(*v) : std::string());
  raw_row(fields);
}

void CsvWriter::raw_row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

CsvTable parse_csv(std::string_view text, const std::string& origin) {
  CsvTable t;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    std::vector<std::string> fields = split(body);
    if (!have_header) {
      t.columns = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.columns.size()) {
      throw ConfigError(where + "expected " + std::to_string(t.columns.size()) + " fields, found " +
                        std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const char* b = fields[i].data();
      const char* e = b + fields[i].size();
      const auto [ptr, ec] = std::from_chars(b, e, row[i]);
      if (fields[i].empty() || ec != std::errc() || ptr != e || !std::isfinite(row[i])) {
        throw ConfigError(where + "field '" + t.columns[i] + "' is not a number: '" + fields[i] + "'");
      }
    }
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw ConfigError(origin + ": empty file, expected a header row");
  return t;
}

}  // namespace srmem::cli
