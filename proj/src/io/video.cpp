// Copyright 2026 The insa-codec Authors
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

#include "insa/video.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "insa/error.hpp"

namespace insa {
namespace fs = std::filesystem;
namespace {

constexpr double kKr = 0.2126;
constexpr double kKb = 0.0722;
constexpr double kKg = 1.0 - kKr - kKb;

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

void check_frame(const Tensor& f, const char* what) {
  const Shape& s = f.shape();
  if (s.n != 1 || s.c != 3) {
    throw std::invalid_argument(std::string(what) + ": expected a (1, 3, H, W) frame, got " + s.str());
  }
}

// Reads one whitespace-delimited token of a PNM header, skipping comments.
std::string pnm_token(std::istream& in, const std::string& path) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw InputError(path + ": truncated header");
  return tok;
}

int parse_positive(const std::string& tok, const std::string& path, const char* field) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used == tok.size() && v > 0 && v <= 1 << 16) return static_cast<int>(v);
  } catch (const std::exception&) {
  }
  throw InputError(path + ": invalid " + field + " '" + tok + "'");
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

VideoClip read_y4m(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("YUV4MPEG2", 0) != 0) {
    throw InputError(path + ": not a Y4M file");
  }
  VideoClip clip;
  bool chroma420 = true;
  std::istringstream hdr(line.substr(9));
  std::string tag;
  while (hdr >> tag) {
    const char key = tag[0];
    const std::string val = tag.substr(1);
    if (key == 'W') {
      clip.width = parse_positive(val, path, "width");
    } else if (key == 'H') {
      clip.height = parse_positive(val, path, "height");
    } else if (key == 'F') {
      int num = 0, den = 0;
      if (std::sscanf(val.c_str(), "%d:%d", &num, &den) == 2 && num > 0 && den > 0) clip.fps = double(num) / den;
    } else if (key == 'C') {
      if (val == "444") {
        chroma420 = false;
      } else if (val == "420" || val == "420jpeg" || val == "420paldv" || val == "420mpeg2") {
        chroma420 = true;
      } else {
        throw InputError(path + ": unsupported Y4M colorspace C" + val + " (need 8-bit 4:2:0 or 4:4:4)");
      }
    } else if (key == 'I' && val != "p" && val != "?") {
      throw InputError(path + ": interlaced Y4M is not supported");
    }
  }
  if (clip.width == 0 || clip.height == 0) throw InputError(path + ": Y4M header lacks W or H");
  const int w = clip.width, h = clip.height;
  const int cw = chroma420 ? (w + 1) / 2 : w;
  const int ch = chroma420 ? (h + 1) / 2 : h;
  const std::size_t ysize = static_cast<std::size_t>(w) * h;
  const std::size_t csize = static_cast<std::size_t>(cw) * ch;
  std::vector<std::uint8_t> buf(ysize + 2 * csize);
  while (std::getline(in, line)) {
    if (line.rfind("FRAME", 0) != 0) {
      throw InputError(path + ": expected FRAME marker at frame " + std::to_string(clip.frames.size()));
    }
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
      throw InputError(path + ": truncated frame " + std::to_string(clip.frames.size()));
    }
    Tensor f(Shape{1, 3, h, w});
    auto d = f.data();
    const std::size_t plane = ysize;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t ci = chroma420 ? static_cast<std::size_t>(y / 2) * cw + x / 2
                                         : static_cast<std::size_t>(y) * cw + x;
        const double Y = buf[static_cast<std::size_t>(y) * w + x];
        const double cb = buf[ysize + ci] - 128.0;
        const double cr = buf[ysize + csize + ci] - 128.0;
        const double r = Y + 2.0 * (1.0 - kKr) * cr;
        const double b = Y + 2.0 * (1.0 - kKb) * cb;
        const double g = Y - (2.0 * kKb * (1.0 - kKb) / kKg) * cb - (2.0 * kKr * (1.0 - kKr) / kKg) * cr;
        const std::size_t p = static_cast<std::size_t>(y) * w + x;
        d[p] = clamp01(r / 255.0);
        d[plane + p] = clamp01(g / 255.0);
        d[2 * plane + p] = clamp01(b / 255.0);
      }
    }
    clip.frames.push_back(std::move(f));
  }
  if (clip.frames.empty()) throw InputError(path + ": Y4M file has no frames");
  return clip;
}

void write_y4m(const std::string& path, const VideoClip& clip) {
  if (clip.frames.empty()) throw std::invalid_argument("write_y4m: empty clip");
  std::ofstream out = open_out(path);
  const int fps_num = static_cast<int>(std::lround(clip.fps * 1000.0));
  const Shape s = clip.frames.front().shape();
  out << "YUV4MPEG2 W" << s.w << " H" << s.h << " F" << fps_num << ":1000 Ip A1:1 C444\n";
  const std::size_t plane = s.plane();
  std::vector<std::uint8_t> buf(3 * plane);
  for (const Tensor& f : clip.frames) {
    check_frame(f, "write_y4m");
    if (!(f.shape() == s)) throw std::invalid_argument("write_y4m: frames differ in size");
    auto d = f.data();
    for (std::size_t p = 0; p < plane; ++p) {
      const double r = d[p] * 255.0, g = d[plane + p] * 255.0, b = d[2 * plane + p] * 255.0;
      const double y = kKr * r + kKg * g + kKb * b;
      buf[p] = to_u8(y);
      buf[plane + p] = to_u8((b - y) / (2.0 * (1.0 - kKb)) + 128.0);
      buf[2 * plane + p] = to_u8((r - y) / (2.0 * (1.0 - kKr)) + 128.0);
    }
    out << "FRAME\n";
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw InputError("write failed for " + path);
}

Tensor read_ppm(const std::string& path) {
  std::ifstream in = open_in(path);
  if (pnm_token(in, path) != "P6") throw InputError(path + ": not a binary PPM (P6)");
  const int w = parse_positive(pnm_token(in, path), path, "width");
  const int h = parse_positive(pnm_token(in, path), path, "height");
  const int maxval = parse_positive(pnm_token(in, path), path, "maxval");
  if (maxval > 65535) throw InputError(path + ": maxval above 65535");
  const int bps = maxval > 255 ? 2 : 1;
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  std::vector<std::uint8_t> buf(plane * 3 * bps);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw InputError(path + ": truncated pixel data");
  Tensor f(Shape{1, 3, h, w});
  auto d = f.data();
  for (std::size_t p = 0; p < plane; ++p) {
    for (int c = 0; c < 3; ++c) {
      const std::size_t i = (p * 3 + c) * bps;
      const int v = bps == 2 ? (buf[i] << 8) | buf[i + 1] : buf[i];
      d[c * plane + p] = static_cast<float>(v) / static_cast<float>(maxval);
    }
  }
  return f;
}

void write_ppm(const std::string& path, const Tensor& frame) {
  check_frame(frame, "write_ppm");
  const Shape& s = frame.shape();
  std::ofstream out = open_out(path);
  out << "P6\n" << s.w << ' ' << s.h << "\n255\n";
  const std::size_t plane = s.plane();
  auto d = frame.data();
  std::vector<std::uint8_t> buf(plane * 3);
  for (std::size_t p = 0; p < plane; ++p) {
    for (int c = 0; c < 3; ++c) buf[p * 3 + c] = to_u8(std::clamp(d[c * plane + p], 0.0f, 1.0f) * 255.0);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw InputError("write failed for " + path);
}

Tensor read_pfm(const std::string& path) {
  std::ifstream in = open_in(path);
  if (pnm_token(in, path) != "PF") throw InputError(path + ": not a colour PFM");
  const int w = parse_positive(pnm_token(in, path), path, "width");
  const int h = parse_positive(pnm_token(in, path), path, "height");
  const double scale = std::stod(pnm_token(in, path));
  if (scale >= 0) throw InputError(path + ": only little-endian PFM is supported");
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  std::vector<std::uint32_t> buf(plane * 3);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
  if (in.gcount() != static_cast<std::streamsize>(buf.size() * 4)) throw InputError(path + ": truncated PFM data");
  Tensor f(Shape{1, 3, h, w});
  auto d = f.data();
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(h - 1 - y) * w;
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        std::uint32_t bits = buf[(row + x) * 3 + c];
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
        d[c * plane + static_cast<std::size_t>(y) * w + x] = std::bit_cast<float>(bits);
      }
    }
  }
  return f;
}

void write_pfm(const std::string& path, const Tensor& frame) {
  check_frame(frame, "write_pfm");
  const Shape& s = frame.shape();
  std::ofstream out = open_out(path);
  out << "PF\n" << s.w << ' ' << s.h << "\n-1.0\n";
  const std::size_t plane = s.plane();
  auto d = frame.data();
  std::vector<std::uint32_t> buf(plane * 3);
  for (int y = 0; y < s.h; ++y) {
    const std::size_t row = static_cast<std::size_t>(s.h - 1 - y) * s.w;
    for (int x = 0; x < s.w; ++x) {
      for (int c = 0; c < 3; ++c) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(d[c * plane + static_cast<std::size_t>(y) * s.w + x]);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
        buf[(row + x) * 3 + c] = bits;
      }
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
  if (!out) throw InputError("write failed for " + path);
}

VideoClip read_frame_dir(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw InputError(dir + ": not a directory");
  std::vector<std::string> ppm, pfm;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    if (e.path().extension() == ".ppm") ppm.push_back(e.path().string());
    if (e.path().extension() == ".pfm") pfm.push_back(e.path().string());
  }
  if (ppm.empty() && pfm.empty()) throw InputError(dir + ": no frames found (expected *.ppm or *.pfm files)");
  if (!ppm.empty() && !pfm.empty()) throw InputError(dir + ": mixes .ppm and .pfm frames");
  const bool is_pfm = !pfm.empty();
  std::vector<std::string>& files = is_pfm ? pfm : ppm;
  std::sort(files.begin(), files.end());
  VideoClip clip;
  for (const auto& f : files) {
    Tensor t = is_pfm ? read_pfm(f) : read_ppm(f);
    if (clip.frames.empty()) {
      clip.width = t.shape().w;
      clip.height = t.shape().h;
    } else if (t.shape().w != clip.width || t.shape().h != clip.height) {
      throw InputError(f + ": frame size " + std::to_string(t.shape().w) + "x" + std::to_string(t.shape().h) +
                       " differs from " + std::to_string(clip.width) + "x" + std::to_string(clip.height));
    }
    clip.frames.push_back(std::move(t));
  }
  return clip;
}

void write_frame_dir(const std::string& dir, const std::vector<Tensor>& frames, const std::string& ext) {
  if (ext != "ppm" && ext != "pfm") throw std::invalid_argument("frame format must be ppm or pfm, got " + ext);
  fs::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.%s", i, ext.c_str());
    const std::string path = (fs::path(dir) / name).string();
    if (ext == "ppm") {
      write_ppm(path, frames[i]);
    } else {
      write_pfm(path, frames[i]);
    }
  }
}

VideoClip read_video(const std::string& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) return read_frame_dir(path);
  if (!fs::exists(path, ec)) throw InputError(path + ": no such file or directory");
  return read_y4m(path);
}

VideoClip subsample(const VideoClip& clip, int step, int max_frames) {
  if (step < 1) throw std::invalid_argument("subsample step must be >= 1");
  VideoClip out;
  out.width = clip.width;
  out.height = clip.height;
  out.fps = clip.fps / step;
  for (std::size_t i = 0; i < clip.frames.size(); i += static_cast<std::size_t>(step)) {
    if (max_frames > 0 && out.frames.size() >= static_cast<std::size_t>(max_frames)) break;
    out.frames.push_back(clip.frames[i]);
  }
  return out;
}

Tensor pad_to_multiple(const Tensor& frame, int multiple) {
  if (multiple < 1) throw std::invalid_argument("pad multiple must be >= 1");
  const Shape& s = frame.shape();
  const int ph = (s.h + multiple - 1) / multiple * multiple;
  const int pw = (s.w + multiple - 1) / multiple * multiple;
  if (ph == s.h && pw == s.w) return frame.detach();
  Tensor out(Shape{s.n, s.c, ph, pw});
  auto src = frame.data();
  auto dst = out.data();
  for (int nc = 0; nc < s.n * s.c; ++nc) {
    for (int y = 0; y < ph; ++y) {
      const int sy = reflect(y, s.h);
      for (int x = 0; x < pw; ++x) {
        dst[(static_cast<std::size_t>(nc) * ph + y) * pw + x] =
            src[(static_cast<std::size_t>(nc) * s.h + sy) * s.w + reflect(x, s.w)];
      }
    }
  }
  return out;
}

Tensor crop(const Tensor& frame, int width, int height) {
  const Shape& s = frame.shape();
  if (width < 1 || height < 1 || width > s.w || height > s.h) {
    throw std::invalid_argument("crop " + std::to_string(width) + "x" + std::to_string(height) + " exceeds " + s.str());
  }
  Tensor out(Shape{s.n, s.c, height, width});
  auto src = frame.data();
  auto dst = out.data();
  for (int nc = 0; nc < s.n * s.c; ++nc) {
    for (int y = 0; y < height; ++y) {
      std::copy_n(src.begin() + (static_cast<std::ptrdiff_t>(nc) * s.h + y) * s.w, width,
                  dst.begin() + (static_cast<std::ptrdiff_t>(nc) * height + y) * width);
    }
  }
  return out;
}

}  // namespace insa
