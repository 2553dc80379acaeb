// Copyright 2026 The GonStat Authors
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

#ifndef GONSTAT_CSV_HPP
#define GONSTAT_CSV_HPP

#include <string>
#include <vector>

namespace gonstat {

// One parsed record plus the 1-based line its first field started on,
// so schema diagnostics can point at the offending row even when quoted
// fields span physical lines.
struct CsvRow {
  std::vector<std::string> fields;
  long line = 0;
};

// Quoted fields, doubled-quote escapes, embedded commas and newlines,
// tolerant of CRLF line ends. Throws IoError when the file cannot be
// opened and SchemaError on an unterminated quote or text trailing a
// closing quote.
std::vector<CsvRow> read_csv(const std::string& path);
std::vector<CsvRow> parse_csv(const std::string& text);

// Quotes a field only when it needs it (comma, quote, or newline).
std::string csv_escape(const std::string& field);
std::string csv_line(const std::vector<std::string>& fields);

// Writes to a sibling temp file and renames over the target so readers
// never observe a half-written file. Throws IoError on any failure.
void write_text_atomic(const std::string& path, const std::string& content);
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Shortest decimal form that parses back to the same double.
std::string format_full(double x);
// Six significant digits, the table precision used by every report.
std::string format_sig6(double x);
// Strict double/long parsers for CSV cells; throw SchemaError carrying
// the given line on any trailing junk or empty cell.
double parse_double_cell(const std::string& cell, long line);
long parse_long_cell(const std::string& cell, long line);

}  // namespace gonstat

#endif  // GONSTAT_CSV_HPP
