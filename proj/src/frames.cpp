// Copyright 2026 The repjudge Authors.
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

#include "repjudge/frames.hpp"

#include <cctype>
#include <charconv>
#include <fstream>

#include "json_util.hpp"

namespace repjudge {

namespace fs = std::filesystem;

GrayFrame parse_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kParse, "PGM: " + what); };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip_space();
    int value = 0;
    const auto [end, ec] = std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), value);
    if (ec != std::errc()) fail("bad header number");
    pos = static_cast<std::size_t>(end - bytes.data());
    return value;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') fail("only binary P5 is supported");
  pos = 2;
  GrayFrame f;
  f.width = number();
  f.height = number();
  const int maxval = number();
  if (f.width < 1 || f.height < 1) fail("non-positive dimensions");
  if (maxval < 1 || maxval > 255) fail("maxval must be in [1, 255]");
  ++pos;  // single whitespace before the raster
  const std::size_t n = static_cast<std::size_t>(f.width) * static_cast<std::size_t>(f.height);
  if (bytes.size() < pos + n) fail("truncated raster");
  f.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                  bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return f;
}

GrayFrame read_pgm(const fs::path& path) { return parse_pgm(detail::read_text_file(path)); }

void write_pgm(const fs::path& path, const GrayFrame& frame) {
  frame.validate();
  std::string out = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) +
                    "\n255\n";
  out.append(frame.pixels.begin(), frame.pixels.end());
  detail::write_text_file(path, out);
}

namespace {

class PgmDirectory final : public FrameSource {
 public:
  explicit PgmDirectory(const fs::path& dir) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
      const std::string stem = entry.path().stem().string();
      std::int64_t index = 0;
      const auto [end, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), index);
      if (ec != std::errc() || end != stem.data() + stem.size()) continue;
      files_[index] = entry.path();
    }
    if (files_.empty()) {
      throw Error(ErrorKind::kIo, "no indexed .pgm files in '" + dir.string() + "'");
    }
    const GrayFrame first = read_pgm(files_.begin()->second);
    width_ = first.width;
    height_ = first.height;
  }

  std::int64_t size() const override { return files_.rbegin()->first + 1; }
  int width() const override { return width_; }
  int height() const override { return height_; }

  GrayFrame frame(std::int64_t index) const override {
    auto it = files_.find(index);
    if (it == files_.end()) {
      throw Error(ErrorKind::kIo, "frame " + std::to_string(index) + " has no PGM file");
    }
    GrayFrame f = read_pgm(it->second);
    if (f.width != width_ || f.height != height_) {
      throw Error(ErrorKind::kShape, "'" + it->second.string() + "' differs in size");
    }
    return f;
  }

 private:
  std::map<std::int64_t, fs::path> files_;
  int width_ = 0;
  int height_ = 0;
};

class RawStream final : public FrameSource {
 public:
  RawStream(fs::path path, const fs::path& sidecar) : path_(std::move(path)) {
    const auto doc = detail::parse_json(detail::read_text_file(sidecar), "frame sidecar");
    const std::string ctx = "frame sidecar '" + sidecar.string() + "'";
    width_ = detail::get_field<int>(doc, "width", ctx);
    height_ = detail::get_field<int>(doc, "height", ctx);
    count_ = detail::get_field<std::int64_t>(doc, "frames", ctx);
    if (width_ < 1 || height_ < 1 || count_ < 0) {
      throw Error(ErrorKind::kSchema, ctx + ": invalid dimensions or frame count");
    }
    const auto expected = static_cast<std::uintmax_t>(count_) * frame_bytes();
    if (fs::file_size(path_) < expected) {
      throw Error(ErrorKind::kShape, "raw stream '" + path_.string() + "' is shorter than " +
                                         std::to_string(count_) + " frames");
    }
  }

  std::int64_t size() const override { return count_; }
  int width() const override { return width_; }
  int height() const override { return height_; }

  GrayFrame frame(std::int64_t index) const override {
    if (index < 0 || index >= count_) {
      throw Error(ErrorKind::kIo, "frame " + std::to_string(index) + " is out of range");
    }
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path_.string() + "'");
    GrayFrame f(width_, height_);
    in.seekg(static_cast<std::streamoff>(index * static_cast<std::int64_t>(frame_bytes())));
    in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(frame_bytes()));
    if (!in) throw Error(ErrorKind::kIo, "short read from '" + path_.string() + "'");
    return f;
  }

 private:
  std::size_t frame_bytes() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  fs::path path_;
  int width_ = 0;
  int height_ = 0;
  std::int64_t count_ = 0;
};

}  // namespace

std::unique_ptr<FrameSource> FrameSource::open(const fs::path& path) {
  if (fs::is_directory(path)) return std::make_unique<PgmDirectory>(path);
  if (!fs::exists(path)) throw Error(ErrorKind::kIo, "no frame input at '" + path.string() + "'");
  fs::path sidecar = path;
  sidecar += ".json";
  if (!fs::exists(sidecar)) sidecar = fs::path(path).replace_extension(".json");
  if (!fs::exists(sidecar) || sidecar == path) {
    throw Error(ErrorKind::kIo, "raw frame stream '" + path.string() + "' has no JSON sidecar");
  }
  return std::make_unique<RawStream>(path, sidecar);
}

void save_raw_frames(const fs::path& path, std::span<const GrayFrame> frames) {
  int w = 0;
  int h = 0;
  std::string bytes;
  for (const GrayFrame& f : frames) {
    f.validate();
    if (w == 0) {
      w = f.width;
      h = f.height;
    } else if (f.width != w || f.height != h) {
      throw Error(ErrorKind::kShape, "raw stream frames must share one size");
    }
    bytes.append(f.pixels.begin(), f.pixels.end());
  }
  detail::write_text_file(path, bytes);
  detail::OrderedJson side;
  side["width"] = w;
  side["height"] = h;
  side["frames"] = frames.size();
  fs::path sidecar = path;
  sidecar += ".json";
  detail::write_text_file(sidecar, side.dump() + "\n");
}

}  // namespace repjudge
