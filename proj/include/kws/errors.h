// Copyright 2026 The KWS Authors
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

#ifndef KWS_ERRORS_H_
#define KWS_ERRORS_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kws {

// Base class of every error raised by the library. Data errors (bad input
// files, undefined metrics) derive from it; programming errors use
// std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed lattice text. `line()` is 1-based, 0 when the problem is not
// tied to a single line (e.g. an empty stream).
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& reason)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + reason
                       : reason),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Lattice that parses but violates a graph invariant.
class StructureError : public Error {
 public:
  using Error::Error;
};

// Forward mass of the lattice is zero (every path has a -inf score).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Path enumeration refused because the lattice has more paths than allowed.
class CapExceededError : public Error {
 public:
  CapExceededError(std::uint64_t path_count, std::uint64_t cap)
      : Error("lattice has at least " + std::to_string(path_count) +
              " paths, cap is " + std::to_string(cap)),
        path_count_(path_count) {}
  std::uint64_t path_count_lower_bound() const { return path_count_; }

 private:
  std::uint64_t path_count_;
};

class IndexFormatError : public Error {
 public:
  enum class Kind { kCorrupt, kVersion, kIo };
  IndexFormatError(Kind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

}  // namespace kws

#endif  // KWS_ERRORS_H_
