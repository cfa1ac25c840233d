// Copyright 2026 The shardplan authors
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

#pragma once

#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace shardplan {

/// printf-style formatting into a std::string.
inline std::string strfmt(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  va_list args2;
  va_copy(args2, args);
  int n = std::vsnprintf(nullptr, 0, fmt, args);
  va_end(args);
  std::string out(n > 0 ? static_cast<size_t>(n) : 0, '\0');
  if (n > 0) std::vsnprintf(out.data(), out.size() + 1, fmt, args2);
  va_end(args2);
  return out;
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition or invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A text or binary artifact could not be decoded. Carries the 1-based
/// line number when the source is line oriented (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, size_t line = 0)
      : Error(line ? strfmt("line %zu: %s", line, what.c_str()) : what),
        line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

/// No placement satisfies the capacity constraints; the message names the
/// violated constraint.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace shardplan
