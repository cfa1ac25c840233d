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

#include "shardplan/line_io.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <vector>

#include "shardplan/error.hpp"

namespace shardplan {

bool path_is_gz(const std::string& path) {
  return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

struct LineWriter::Impl {
  FILE* plain = nullptr;
  gzFile gz = nullptr;
  std::string path;
};

LineWriter::LineWriter(const std::string& path) : impl_(new Impl) {
  impl_->path = path;
  if (path_is_gz(path)) {
    impl_->gz = gzopen(path.c_str(), "wb");
    if (!impl_->gz) throw IoError("cannot open for writing: " + path);
  } else {
    impl_->plain = std::fopen(path.c_str(), "wb");
    if (!impl_->plain) throw IoError("cannot open for writing: " + path);
  }
}

LineWriter::~LineWriter() {
  try {
    close();
  } catch (...) {
  }
}

void LineWriter::write_line(std::string_view line) {
  if (impl_->gz) {
    if (!line.empty() &&
        gzwrite(impl_->gz, line.data(), static_cast<unsigned>(line.size())) !=
            static_cast<int>(line.size()))
      throw IoError("gzip write failed: " + impl_->path);
    if (gzwrite(impl_->gz, "\n", 1) != 1)
      throw IoError("gzip write failed: " + impl_->path);
  } else if (impl_->plain) {
    if (std::fwrite(line.data(), 1, line.size(), impl_->plain) != line.size() ||
        std::fputc('\n', impl_->plain) == EOF)
      throw IoError("write failed: " + impl_->path);
  }
}

void LineWriter::close() {
  if (impl_->gz) {
    int rc = gzclose(impl_->gz);
    impl_->gz = nullptr;
    if (rc != Z_OK) throw IoError("gzip close failed: " + impl_->path);
  }
  if (impl_->plain) {
    FILE* f = impl_->plain;
    impl_->plain = nullptr;
    if (std::fclose(f) != 0) throw IoError("close failed: " + impl_->path);
  }
}

struct LineReader::Impl {
  FILE* plain = nullptr;
  gzFile gz = nullptr;
  std::string path;
  std::vector<char> buf;
  size_t pos = 0;
  size_t end = 0;
  bool eof = false;

  size_t refill() {
    pos = 0;
    if (gz) {
      int n = gzread(gz, buf.data(), static_cast<unsigned>(buf.size()));
      if (n < 0) throw IoError("gzip read failed: " + path);
      end = static_cast<size_t>(n);
    } else {
      end = std::fread(buf.data(), 1, buf.size(), plain);
      if (end == 0 && std::ferror(plain))
        throw IoError("read failed: " + path);
    }
    if (end == 0) eof = true;
    return end;
  }
};

LineReader::LineReader(const std::string& path) : impl_(new Impl) {
  impl_->path = path;
  impl_->buf.resize(1 << 16);
  if (path_is_gz(path)) {
    impl_->gz = gzopen(path.c_str(), "rb");
    if (!impl_->gz) throw IoError("cannot open: " + path);
  } else {
    impl_->plain = std::fopen(path.c_str(), "rb");
    if (!impl_->plain) throw IoError("cannot open: " + path);
  }
}

LineReader::~LineReader() {
  if (impl_->gz) gzclose(impl_->gz);
  if (impl_->plain) std::fclose(impl_->plain);
}

bool LineReader::next_line(std::string& out) {
  out.clear();
  auto& im = *impl_;
  while (true) {
    if (im.pos == im.end) {
      if (im.eof || im.refill() == 0) {
        if (out.empty()) return false;
        ++line_number_;
        return true;  // final line without newline
      }
    }
    const char* start = im.buf.data() + im.pos;
    const char* nl = static_cast<const char*>(
        std::memchr(start, '\n', im.end - im.pos));
    if (nl) {
      out.append(start, nl - start);
      im.pos += static_cast<size_t>(nl - start) + 1;
      if (!out.empty() && out.back() == '\r') out.pop_back();
      ++line_number_;
      return true;
    }
    out.append(start, im.end - im.pos);
    im.pos = im.end;
  }
}

}  // namespace shardplan
