// Copyright 2026 The vfm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VFM_ERRORS_H_
#define VFM_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vfm {

// Base of every error the library raises. The CLI maps the concrete type to
// an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller handed in malformed or out-of-domain input.
class InputError : public Error {
 public:
  using Error::Error;
};

// A CSV cell or column could not be ingested. Carries the 1-based data row
// (0 for header-level problems) and the column name.
class IngestionError : public InputError {
 public:
  IngestionError(const std::string& message, std::size_t row,
                 std::string column)
      : InputError(message + " (row " + std::to_string(row) + ", column '" +
                   column + "')"),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

// A documented mathematical invariant would be broken by the request.
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Fixed-point accumulation would not fit in the field.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& message, std::size_t max_safe_terms)
      : Error(message), max_safe_terms_(max_safe_terms) {}

  std::size_t max_safe_terms() const { return max_safe_terms_; }

 private:
  std::size_t max_safe_terms_;
};

// Message arrived out of order, from the wrong actor, twice, or never.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace vfm

#endif  // VFM_ERRORS_H_
