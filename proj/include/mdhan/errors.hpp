/*
 * Copyright 2026 the mdhan authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MDHAN_ERRORS_HPP
#define MDHAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mdhan {

// Error categories map to distinct CLI exit codes (see tools/mdhan_cli.cpp).

// Missing or unreadable files.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data: bad JSON lines, schema violations, broken invariants.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated operation preconditions (caller bugs, bad flag combinations).
struct UsageError : std::invalid_argument {
  explicit UsageError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Non-finite values produced during numeric computation (divergence guards).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mdhan

#endif  // MDHAN_ERRORS_HPP
