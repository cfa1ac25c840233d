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

#include <memory>
#include <string>
#include <string_view>

namespace shardplan {

/// Newline-delimited text sink; paths ending in .gz are gzip-compressed.
class LineWriter {
 public:
  explicit LineWriter(const std::string& path);
  ~LineWriter();
  LineWriter(const LineWriter&) = delete;
  LineWriter& operator=(const LineWriter&) = delete;

  void write_line(std::string_view line);  // appends '\n'
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Newline-delimited text source; paths ending in .gz are decompressed.
class LineReader {
 public:
  explicit LineReader(const std::string& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  /// Reads the next line without its terminator. Returns false at EOF.
  bool next_line(std::string& out);
  size_t line_number() const { return line_number_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  size_t line_number_ = 0;
};

bool path_is_gz(const std::string& path);

}  // namespace shardplan
