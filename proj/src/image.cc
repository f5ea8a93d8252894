// Copyright 2026 The SAFD Authors.
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

#include "safd/image.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "safd/error.h"

namespace safd {

int ScaledDim(int dim, double factor) {
  return std::max(1, static_cast<int>(std::floor(dim * factor + 0.5)));
}

namespace {

Image Resample(const Image& img, int out_h, int out_w, double fy, double fx,
               int x0 = 0, int y0 = 0) {
  const int in_h = img.height();
  const int in_w = img.width();
  const int channels = img.channels();
  Image out({channels, out_h, out_w});

  struct Tap {
    int i0, i1;
    float w1;
  };
  auto taps = [](int out_n, int in_n, double f, int origin) {
    std::vector<Tap> t(out_n);
    for (int o = 0; o < out_n; ++o) {
      double src = (o + origin + 0.5) / f - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in_n - 1));
      const int i0 = static_cast<int>(std::floor(src));
      const int i1 = std::min(i0 + 1, in_n - 1);
      t[o] = {i0, i1, static_cast<float>(src - i0)};
    }
    return t;
  };
  const auto ty = taps(out_h, in_h, fy, y0);
  const auto tx = taps(out_w, in_w, fx, x0);
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < out_h; ++y) {
      const Tap& a = ty[y];
      for (int x = 0; x < out_w; ++x) {
        const Tap& b = tx[x];
        const float top = img.at(c, a.i0, b.i0) * (1.0f - b.w1) + img.at(c, a.i0, b.i1) * b.w1;
        const float bot = img.at(c, a.i1, b.i0) * (1.0f - b.w1) + img.at(c, a.i1, b.i1) * b.w1;
        out.at(c, y, x) = top * (1.0f - a.w1) + bot * a.w1;
      }
    }
  }
  return out;
}

}  // namespace

Image ResizeBilinear(const Image& img, double factor) {
  if (img.rank() != 3 || img.height() < 1 || img.width() < 1) {
    throw Error(ErrorKind::kInput, "cannot resize an empty image");
  }
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorKind::kParameter, "resize factor must be positive");
  }
  if (factor == 1.0) return img;
  return Resample(img, ScaledDim(img.height(), factor),
                  ScaledDim(img.width(), factor), factor, factor);
}

Image ResizeWindow(const Image& img, double factor, int x0, int y0, int w, int h) {
  if (img.rank() != 3 || img.height() < 1 || img.width() < 1 || w < 1 || h < 1) {
    throw Error(ErrorKind::kInput, "degenerate resize window");
  }
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorKind::kParameter, "resize factor must be positive");
  }
  return Resample(img, h, w, factor, factor, x0, y0);
}

Image ResizeToLongSide(const Image& img, int long_side, double* factor_out) {
  if (img.rank() != 3 || img.height() < 1 || img.width() < 1) {
    throw Error(ErrorKind::kInput, "degenerate image dimensions");
  }
  if (long_side < 1) throw Error(ErrorKind::kParameter, "long side must be positive");
  const int longest = std::max(img.height(), img.width());
  const double f = static_cast<double>(long_side) / longest;
  if (factor_out) *factor_out = f;
  if (longest == long_side) return img;
  return ResizeBilinear(img, f);
}

namespace {

std::string NextToken(std::istream& is) {
  std::string tok;
  char ch;
  while (is.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(is, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

}  // namespace

Image ReadImage(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  const std::string magic = NextToken(is);
  if (magic != "P5" && magic != "P6") {
    throw Error(ErrorKind::kInput, path.string() + ": only binary PGM/PPM supported");
  }
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(NextToken(is));
    h = std::stoi(NextToken(is));
    maxval = std::stoi(NextToken(is));
  } catch (const std::exception&) {
    throw Error(ErrorKind::kInput, path.string() + ": malformed header");
  }
  if (w < 1 || h < 1 || maxval != 255) {
    throw Error(ErrorKind::kInput, path.string() + ": unsupported dimensions or depth");
  }
  const int comps = magic == "P6" ? 3 : 1;
  std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * comps);
  if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw Error(ErrorKind::kInput, path.string() + ": truncated pixel data");
  }
  Image img({1, h, w});
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (comps == 1) {
      img[i] = raw[i] / 255.0f;
    } else {
      const float luma = 0.299f * raw[3 * i] + 0.587f * raw[3 * i + 1] + 0.114f * raw[3 * i + 2];
      img[i] = std::round(luma) / 255.0f;
    }
  }
  return img;
}

void WritePgm(const Image& img, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  os << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> raw(static_cast<std::size_t>(img.width()) * img.height());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<unsigned char>(std::lround(std::clamp(img[i], 0.0f, 1.0f) * 255.0f));
  }
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

void WriteChannelPgm(const Tensor<float>& t, int channel,
                     const std::filesystem::path& path) {
  const int h = t.height();
  const int w = t.width();
  const float* p = t.plane(channel);
  const auto [lo, hi] = std::minmax_element(p, p + static_cast<std::size_t>(h) * w);
  const float range = *hi - *lo;
  Image img({1, h, w});
  for (std::size_t i = 0; i < img.size(); ++i) {
    img[i] = range > 0.0f ? (p[i] - *lo) / range : 0.0f;
  }
  WritePgm(img, path);
}

void QuantizeTo8Bit(Image& img) {
  for (float& v : img.values()) {
    v = static_cast<float>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)) / 255.0f;
  }
}

}  // namespace safd
