// Copyright 2026 The tccrank Authors.
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

#ifndef TCCRANK_CSV_H_
#define TCCRANK_CSV_H_

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tccrank {

// A comma-delimited table with a mandatory header row. Fields may be quoted.
// Quoted fields may span lines. Blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based source line of each row, for error messages.
  std::vector<int> line_numbers;

  std::optional<int> ColumnIndex(std::string_view name) const;
};

CsvTable ReadCsv(std::istream& in);

// Parses a finite double; the whole (trimmed) field must be consumed.
std::optional<double> ParseDouble(std::string_view field);

// Quotes a field when it contains a delimiter, quote or newline.
std::string CsvEscape(std::string_view field);

// "%.6g" for human-facing tables.
std::string FormatSignificant(double value, int digits = 6);

// Shortest representation that round-trips exactly.
std::string FormatRoundTrip(double value);

}  // namespace tccrank

#endif  // TCCRANK_CSV_H_
