/* Copyright 2026 The tqt Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tqt::csv {

// Shortest decimal form that parses back to the same double. Locale
// independent, '.' decimal separator.
std::string format_number(double value);

// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

// Splits one line into fields, honoring double-quoted fields.
std::vector<std::string> split_line(std::string_view line);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Parses text with a header row. Blank lines are skipped. Rows whose field
// count differs from the header raise FormatError with the byte offset of the
// row.
Table parse(std::string_view text);

}  // namespace tqt::csv
