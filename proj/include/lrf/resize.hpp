#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "lrf/common.hpp"
#include "lrf/image.hpp"

namespace lrf {

/// Keys cubic kernel with a = -0.5: W(0)=1, W(+-1)=W(+-2)=0, support 2.
inline double cubic_keys(double x) {
  constexpr double a = -0.5;
  const double ax = std::abs(x);
  if (ax <= 1.0) {
    return ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0;
  }
  if (ax < 2.0) {
    return (((ax - 5.0) * ax + 8.0) * ax - 4.0) * a;
  }
  return 0.0;
}

namespace detail {

struct TapPlan {
  std::int64_t taps = 0;                // taps per output sample
  std::vector<std::int64_t> index;      // out_len * taps, clamped to borders
  std::vector<double> weight;           // out_len * taps, rows sum to 1
};

/// One-axis resampling plan. Output sample j draws from input positions
/// around u = (j + 0.5) / scale - 0.5. When downscaling with antialias, the
/// kernel is stretched by the scale factor (h(x) = s * W(s * x)) so it
/// averages over the full source footprint; weights are renormalized to sum
/// to 1 and out-of-range indices clamp to the border pixel.
inline TapPlan make_tap_plan(std::int64_t in_len, std::int64_t out_len,
                             bool antialias) {
  const double scale = static_cast<double>(out_len) / in_len;
  const double kscale = (antialias && scale < 1.0) ? scale : 1.0;
  const double width = 4.0 / kscale;
  TapPlan plan;
  plan.taps = static_cast<std::int64_t>(std::ceil(width)) + 2;
  plan.index.resize(out_len * plan.taps);
  plan.weight.resize(out_len * plan.taps);
  for (std::int64_t j = 0; j < out_len; ++j) {
    const double u = (j + 0.5) / scale - 0.5;
    const std::int64_t left =
        static_cast<std::int64_t>(std::floor(u - width / 2.0));
    double total = 0.0;
    double* wrow = plan.weight.data() + j * plan.taps;
    std::int64_t* irow = plan.index.data() + j * plan.taps;
    for (std::int64_t t = 0; t < plan.taps; ++t) {
      const std::int64_t src = left + t;
      const double wv = kscale * cubic_keys(kscale * (u - src));
      wrow[t] = wv;
      total += wv;
      irow[t] = std::clamp<std::int64_t>(src, 0, in_len - 1);
    }
    for (std::int64_t t = 0; t < plan.taps; ++t) wrow[t] /= total;
  }
  return plan;
}

}  // namespace detail

/// Separable cubic resampling of one channel: the horizontal axis first,
/// then the vertical axis.
inline Plane resize_plane(const Plane& in, std::int64_t out_w,
                          std::int64_t out_h, bool antialias) {
  config_check(out_w >= 1 && out_h >= 1, "resize target must be >= 1 pixel");
  const auto hplan = detail::make_tap_plan(in.w, out_w, antialias);
  Plane mid(out_w, in.h);
  for (std::int64_t y = 0; y < in.h; ++y) {
    const double* src = in.v.data() + y * in.w;
    double* dst = mid.v.data() + y * out_w;
    for (std::int64_t x = 0; x < out_w; ++x) {
      const double* wrow = hplan.weight.data() + x * hplan.taps;
      const std::int64_t* irow = hplan.index.data() + x * hplan.taps;
      double acc = 0.0;
      for (std::int64_t t = 0; t < hplan.taps; ++t) {
        acc += wrow[t] * src[irow[t]];
      }
      dst[x] = acc;
    }
  }
  const auto vplan = detail::make_tap_plan(in.h, out_h, antialias);
  Plane out(out_w, out_h);
  for (std::int64_t y = 0; y < out_h; ++y) {
    const double* wrow = vplan.weight.data() + y * vplan.taps;
    const std::int64_t* irow = vplan.index.data() + y * vplan.taps;
    double* dst = out.v.data() + y * out_w;
    for (std::int64_t x = 0; x < out_w; ++x) dst[x] = 0.0;
    for (std::int64_t t = 0; t < vplan.taps; ++t) {
      const double* src = mid.v.data() + irow[t] * out_w;
      const double wv = wrow[t];
      for (std::int64_t x = 0; x < out_w; ++x) dst[x] += wv * src[x];
    }
  }
  return out;
}

inline ImageF resize_bicubic(const ImageF& img, std::int64_t out_w,
                             std::int64_t out_h, bool antialias) {
  ImageF out;
  out.w = out_w;
  out.h = out_h;
  for (int c = 0; c < 3; ++c) {
    out.ch[c] = resize_plane(img.ch[c], out_w, out_h, antialias);
  }
  return out;
}

inline ImageU8 resize_bicubic(const ImageU8& img, std::int64_t out_w,
                              std::int64_t out_h, bool antialias) {
  return encode(resize_bicubic(decode(img), out_w, out_h, antialias));
}

struct LrTriple {
  ImageU8 lr;      // downscaled
  ImageU8 input;   // lr upscaled back to target size
  ImageU8 target;  // cropped ground truth
};

/// Degrades an HR image: the target is the HR image cropped to a multiple of
/// 8 (bottom/right remainder dropped, one crop serves both x4 and x8), the
/// LR is an antialiased cubic downscale of it, and the input is the LR
/// upscaled back. Every stage is 8-bit, so the results are bit-reproducible
/// and match what the files on disk would hold.
inline LrTriple make_lr_triple(const ImageU8& hr, int scale) {
  config_check(scale == 4 || scale == 8, "scale must be 4 or 8");
  config_check(hr.w >= 8 && hr.h >= 8, "image smaller than the scale floor");
  LrTriple t;
  t.target = crop_to_multiple(hr, 8);
  t.lr = resize_bicubic(t.target, t.target.w / scale, t.target.h / scale,
                        /*antialias=*/true);
  t.input = resize_bicubic(t.lr, t.target.w, t.target.h,
                           /*antialias=*/false);
  return t;
}

/// The (input, target) slice of make_lr_triple.
inline std::pair<ImageU8, ImageU8> make_lr_pair(const ImageU8& hr,
                                                int scale) {
  LrTriple t = make_lr_triple(hr, scale);
  return {std::move(t.input), std::move(t.target)};
}

}  // namespace lrf
