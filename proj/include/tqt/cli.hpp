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

#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tqt/error.hpp"

namespace tqt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitFormat = 3;

// Invalid command-line input, reported against the flag it came from.
class UsageError : public Error {
 public:
  UsageError(std::string flag, const std::string& what)
      : Error(flag + ": " + what), flag_(std::move(flag)) {}

  const std::string& flag() const noexcept { return flag_; }

 private:
  std::string flag_;
};

// "lo-hi" or a comma list; returned ascending without duplicates.
std::vector<int> parse_bits_list(std::string_view text, const std::string& flag = "--bits");

// Runs one command. args[0] is the program name. Diagnostics go to err as a
// single line; reports without an --output file go to out.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace tqt::cli
