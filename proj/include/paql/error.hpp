// Copyright 2026 The PaQL Engine Authors
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

#ifndef PAQL_ERROR_HPP_
#define PAQL_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace paql {

// Base class of every error raised by the engine. Callers that only need to
// report a failure can catch this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input data (CSV contents, JSON documents, partitioning files).
class DataError : public Error {
 public:
  using Error::Error;
};

// PaQL text that does not conform to the grammar, or uses a construct the
// engine deliberately does not support. Positions are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(message + " at line " + std::to_string(line) + ", column " +
              std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// A query or parameter set that is well-formed but inconsistent with the
// relation it is applied to (unknown attribute, wrong attribute kind, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The ILP has a variable without a finite upper bound and no constraint
// implies one.
class UnboundedError : public Error {
 public:
  using Error::Error;
};

// Requested operation exceeds a hard resource cap (e.g. the brute-force
// enumeration space).
class LimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace paql

#endif  // PAQL_ERROR_HPP_
