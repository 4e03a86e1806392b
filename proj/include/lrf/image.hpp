#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lrf/common.hpp"
#include "lrf/tensor.hpp"

namespace lrf {

/// 8-bit interleaved RGB image, row-major. This is the at-rest form: files,
/// network inputs/outputs and metric operands are all quantized to it, so a
/// saved PNG carries exactly what was scored.
struct ImageU8 {
  std::int64_t w = 0;
  std::int64_t h = 0;
  std::vector<std::uint8_t> data;  // 3 * w * h, RGBRGB...

  ImageU8() = default;
  ImageU8(std::int64_t w_, std::int64_t h_) : w(w_), h(h_) {
    config_check(w >= 1 && h >= 1, "image dimensions must be >= 1");
    data.assign(static_cast<std::size_t>(3 * w * h), 0);
  }

  std::uint8_t* px(std::int64_t y, std::int64_t x) {
    return data.data() + 3 * (y * w + x);
  }
  const std::uint8_t* px(std::int64_t y, std::int64_t x) const {
    return data.data() + 3 * (y * w + x);
  }

  bool operator==(const ImageU8&) const = default;
};

/// Single real-valued channel.
struct Plane {
  std::int64_t w = 0;
  std::int64_t h = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(std::int64_t w_, std::int64_t h_) : w(w_), h(h_) {
    config_check(w >= 1 && h >= 1, "plane dimensions must be >= 1");
    v.assign(static_cast<std::size_t>(w * h), 0.0);
  }

  double& at(std::int64_t y, std::int64_t x) { return v[y * w + x]; }
  double at(std::int64_t y, std::int64_t x) const { return v[y * w + x]; }
};

/// Planar RGB image in [0,1] reals; the in-flight form for resampling and
/// metric computation.
struct ImageF {
  std::int64_t w = 0;
  std::int64_t h = 0;
  std::array<Plane, 3> ch;

  ImageF() = default;
  ImageF(std::int64_t w_, std::int64_t h_) : w(w_), h(h_) {
    for (auto& p : ch) p = Plane(w, h);
  }
};

inline ImageF decode(const ImageU8& img) {
  ImageF out(img.w, img.h);
  const double inv = 1.0 / 255.0;
  for (std::int64_t y = 0; y < img.h; ++y) {
    for (std::int64_t x = 0; x < img.w; ++x) {
      const std::uint8_t* p = img.px(y, x);
      for (int c = 0; c < 3; ++c) out.ch[c].at(y, x) = p[c] * inv;
    }
  }
  return out;
}

inline std::uint8_t quantize_unit(double v) {
  const double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

inline ImageU8 encode(const ImageF& img) {
  ImageU8 out(img.w, img.h);
  for (std::int64_t y = 0; y < img.h; ++y) {
    for (std::int64_t x = 0; x < img.w; ++x) {
      std::uint8_t* p = out.px(y, x);
      for (int c = 0; c < 3; ++c) p[c] = quantize_unit(img.ch[c].at(y, x));
    }
  }
  return out;
}

inline ImageU8 crop(const ImageU8& img, std::int64_t x0, std::int64_t y0,
                    std::int64_t cw, std::int64_t chh) {
  config_check(x0 >= 0 && y0 >= 0 && cw >= 1 && chh >= 1 &&
                   x0 + cw <= img.w && y0 + chh <= img.h,
               "crop rectangle out of bounds");
  ImageU8 out(cw, chh);
  for (std::int64_t y = 0; y < chh; ++y) {
    std::copy_n(img.px(y0 + y, x0), 3 * cw, out.px(y, 0));
  }
  return out;
}

/// Drops bottom/right remainder pixels so both dimensions are multiples of m.
inline ImageU8 crop_to_multiple(const ImageU8& img, std::int64_t m) {
  config_check(img.w >= m && img.h >= m,
               "image smaller than " + std::to_string(m) + " pixels");
  const std::int64_t cw = img.w - img.w % m;
  const std::int64_t chh = img.h - img.h % m;
  if (cw == img.w && chh == img.h) return img;
  return crop(img, 0, 0, cw, chh);
}

/// Decodes an 8-bit image straight into a (1,3,H,W) tensor in [0,1].
template <typename T>
Tensor<T> to_tensor(const ImageU8& img) {
  Tensor<T> t(Shape4{1, 3, img.h, img.w});
  auto d = t.data();
  const T inv = T{1} / T{255};
  for (int c = 0; c < 3; ++c) {
    T* plane = d.data() + c * img.h * img.w;
    for (std::int64_t y = 0; y < img.h; ++y) {
      for (std::int64_t x = 0; x < img.w; ++x) {
        plane[y * img.w + x] = static_cast<T>(img.px(y, x)[c]) * inv;
      }
    }
  }
  return t;
}

struct NamedImage {
  std::string name;
  ImageU8 image;
};

/// Clips a (1,3,H,W) tensor to [0,1] and quantizes it to 8 bits.
template <typename T>
ImageU8 from_tensor(const Tensor<T>& t) {
  config_check(t.shape().n == 1 && t.shape().c == 3,
               "from_tensor expects a (1,3,H,W) tensor, got " +
                   t.shape().str());
  const std::int64_t h = t.shape().h, w = t.shape().w;
  ImageU8 out(w, h);
  const auto d = t.data();
  for (int c = 0; c < 3; ++c) {
    const T* plane = d.data() + c * h * w;
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        out.px(y, x)[c] = quantize_unit(static_cast<double>(plane[y * w + x]));
      }
    }
  }
  return out;
}

}  // namespace lrf
