#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lrf/common.hpp"
#include "lrf/image.hpp"
#include "lrf/resize.hpp"

namespace lrf {

/// BT.601 studio-swing luma from [0,1] RGB:
/// Y = 16/255 + (65.481 R + 128.553 G + 24.966 B) / 255.
inline Plane rgb_to_y(const ImageU8& img) {
  Plane y(img.w, img.h);
  constexpr double inv = 1.0 / 255.0;
  for (std::int64_t r = 0; r < img.h; ++r) {
    for (std::int64_t c = 0; c < img.w; ++c) {
      const std::uint8_t* p = img.px(r, c);
      const double rr = p[0] * inv, gg = p[1] * inv, bb = p[2] * inv;
      y.at(r, c) =
          16.0 / 255.0 + (65.481 * rr + 128.553 * gg + 24.966 * bb) / 255.0;
    }
  }
  return y;
}

/// Removes a border frame of `px` pixels from every side.
inline Plane shave(const Plane& p, std::int64_t px) {
  config_check(px >= 0, "shave must be >= 0");
  if (px == 0) return p;
  config_check(p.w > 2 * px && p.h > 2 * px,
               "shave leaves no pixels on a " + std::to_string(p.w) + "x" +
                   std::to_string(p.h) + " plane");
  Plane out(p.w - 2 * px, p.h - 2 * px);
  for (std::int64_t y = 0; y < out.h; ++y) {
    for (std::int64_t x = 0; x < out.w; ++x) {
      out.at(y, x) = p.at(y + px, x + px);
    }
  }
  return out;
}

/// 10 log10(peak^2 / MSE) over all given channel pairs. Identical inputs
/// return +infinity; callers exclude that sentinel from aggregates.
inline double psnr(const std::vector<Plane>& a, const std::vector<Plane>& b,
                   double peak = 1.0) {
  config_check(a.size() == b.size() && !a.empty(), "psnr: channel mismatch");
  double sq = 0.0;
  std::int64_t count = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    config_check(a[c].w == b[c].w && a[c].h == b[c].h,
                 "psnr: shape mismatch");
    for (std::size_t i = 0; i < a[c].v.size(); ++i) {
      const double d = a[c].v[i] - b[c].v[i];
      sq += d * d;
    }
    count += a[c].w * a[c].h;
  }
  if (sq == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sq / static_cast<double>(count);
  return 10.0 * std::log10(peak * peak / mse);
}

inline double psnr(const Plane& a, const Plane& b, double peak = 1.0) {
  return psnr(std::vector<Plane>{a}, std::vector<Plane>{b}, peak);
}

namespace detail {

inline std::vector<double> gaussian_window_11() {
  constexpr double sigma = 1.5;
  std::vector<double> w(11);
  double total = 0.0;
  for (int i = 0; i < 11; ++i) {
    const double d = i - 5;
    w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

/// Valid-region separable filtering with an 11-tap window: the output loses
/// 5 pixels on every side.
inline Plane filter_valid_11(const Plane& p, const std::vector<double>& w) {
  Plane mid(p.w - 10, p.h);
  for (std::int64_t y = 0; y < p.h; ++y) {
    const double* src = p.v.data() + y * p.w;
    double* dst = mid.v.data() + y * mid.w;
    for (std::int64_t x = 0; x < mid.w; ++x) {
      double acc = 0.0;
      for (int t = 0; t < 11; ++t) acc += w[t] * src[x + t];
      dst[x] = acc;
    }
  }
  Plane out(mid.w, p.h - 10);
  for (std::int64_t y = 0; y < out.h; ++y) {
    double* dst = out.v.data() + y * out.w;
    for (std::int64_t x = 0; x < out.w; ++x) dst[x] = 0.0;
    for (int t = 0; t < 11; ++t) {
      const double* src = mid.v.data() + (y + t) * mid.w;
      for (std::int64_t x = 0; x < out.w; ++x) dst[x] += w[t] * src[x];
    }
  }
  return out;
}

}  // namespace detail

/// Structural similarity with the standard constants: 11x11 Gaussian window
/// (sigma 1.5), C1 = (0.01 peak)^2, C2 = (0.03 peak)^2, computed over the
/// valid region only and averaged. Identical inputs give exactly 1.
inline double ssim(const Plane& a, const Plane& b, double peak = 1.0) {
  config_check(a.w == b.w && a.h == b.h, "ssim: shape mismatch");
  config_check(a.w >= 11 && a.h >= 11,
               "ssim needs at least 11x11 pixels, got " +
                   std::to_string(a.w) + "x" + std::to_string(a.h));
  const auto w = detail::gaussian_window_11();
  Plane aa(a.w, a.h), bb(a.w, a.h), ab(a.w, a.h);
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    aa.v[i] = a.v[i] * a.v[i];
    bb.v[i] = b.v[i] * b.v[i];
    ab.v[i] = a.v[i] * b.v[i];
  }
  const Plane mu_a = detail::filter_valid_11(a, w);
  const Plane mu_b = detail::filter_valid_11(b, w);
  const Plane m_aa = detail::filter_valid_11(aa, w);
  const Plane m_bb = detail::filter_valid_11(bb, w);
  const Plane m_ab = detail::filter_valid_11(ab, w);
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
    const double ma = mu_a.v[i], mb = mu_b.v[i];
    const double va = m_aa.v[i] - ma * ma;
    const double vb = m_bb.v[i] - mb * mb;
    const double cov = m_ab.v[i] - ma * mb;
    const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
    const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
    total += num / den;
  }
  return total / static_cast<double>(mu_a.v.size());
}

enum class ColourSpace { Y, RGB };

inline const char* colour_space_name(ColourSpace c) {
  return c == ColourSpace::Y ? "Y" : "RGB";
}

/// Scoring protocol: which channels are compared and how many border pixels
/// are shaved per side before scoring. The benchmark convention is Y with
/// shave = scale.
struct EvalProtocol {
  ColourSpace colour_space = ColourSpace::Y;
  std::int64_t shave = 0;
};

struct EvalRow {
  std::string name;
  int scale = 0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  EvalProtocol protocol;
  int scale = 0;
  std::vector<EvalRow> rows;
  double mean_psnr = 0.0;   // over finite per-image values
  double mean_ssim = 0.0;
  int psnr_inf_count = 0;   // identical-image sentinels excluded from mean
};

/// Scores one quantized output against its target under a protocol.
inline std::pair<double, double> score_images(const ImageU8& out,
                                              const ImageU8& target,
                                              const EvalProtocol& proto) {
  config_check(out.w == target.w && out.h == target.h,
               "score: image dimensions differ");
  if (proto.colour_space == ColourSpace::Y) {
    const Plane ya = shave(rgb_to_y(out), proto.shave);
    const Plane yb = shave(rgb_to_y(target), proto.shave);
    return {psnr(ya, yb), ssim(ya, yb)};
  }
  const ImageF fa = decode(out);
  const ImageF fb = decode(target);
  std::vector<Plane> pa, pb;
  double ssim_sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    pa.push_back(shave(fa.ch[c], proto.shave));
    pb.push_back(shave(fb.ch[c], proto.shave));
    ssim_sum += ssim(pa.back(), pb.back());
  }
  return {psnr(pa, pb), ssim_sum / 3.0};
}

/// Maps a bicubic-upscaled LR input (already at target size, 8-bit) to a
/// super-resolved 8-bit output. The identity function is the bicubic
/// baseline.
using SrFunction = std::function<ImageU8(const ImageU8&)>;

inline SrFunction bicubic_sr_function() {
  return [](const ImageU8& input) { return input; };
}

/// Full-protocol evaluation: every HR image is cropped and degraded through
/// make_lr_pair, the SR function maps the input, and the quantized output is
/// scored against the target. The mean skips +inf PSNR sentinels and counts
/// them.
inline EvalReport evaluate(const SrFunction& fn,
                           const std::vector<NamedImage>& dataset, int scale,
                           const EvalProtocol& proto) {
  config_check(!dataset.empty(), "evaluate: empty dataset");
  EvalReport rep;
  rep.protocol = proto;
  rep.scale = scale;
  double psnr_sum = 0.0, ssim_sum = 0.0;
  int finite = 0;
  for (const auto& item : dataset) {
    const auto [input, target] = make_lr_pair(item.image, scale);
    const ImageU8 out = fn(input);
    const auto [p, s] = score_images(out, target, proto);
    rep.rows.push_back(EvalRow{item.name, scale, p, s});
    if (std::isinf(p)) {
      ++rep.psnr_inf_count;
    } else {
      psnr_sum += p;
      ++finite;
    }
    ssim_sum += s;
  }
  rep.mean_psnr = finite > 0 ? psnr_sum / finite
                             : std::numeric_limits<double>::infinity();
  rep.mean_ssim = ssim_sum / static_cast<double>(rep.rows.size());
  return rep;
}

namespace detail {

inline std::string fmt_metric(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace detail

inline std::string to_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "# protocol: colour_space=" << colour_space_name(r.protocol.colour_space)
     << " shave=" << r.protocol.shave << " scale=" << r.scale;
  if (r.psnr_inf_count > 0) {
    os << " psnr_inf_excluded=" << r.psnr_inf_count;
  }
  os << "\nname,scale,psnr_db,ssim\n";
  for (const auto& row : r.rows) {
    os << row.name << "," << row.scale << ","
       << detail::fmt_metric(row.psnr, "%.6f") << ","
       << detail::fmt_metric(row.ssim, "%.8f") << "\n";
  }
  os << "mean," << r.scale << "," << detail::fmt_metric(r.mean_psnr, "%.6f")
     << "," << detail::fmt_metric(r.mean_ssim, "%.8f") << "\n";
  return os.str();
}

inline std::string to_table(const EvalReport& r) {
  std::ostringstream os;
  os << "protocol: colour_space=" << colour_space_name(r.protocol.colour_space)
     << " shave=" << r.protocol.shave << " scale=x" << r.scale << "\n";
  for (const auto& row : r.rows) {
    os << "  " << row.name << ": " << detail::fmt_metric(row.psnr, "%.2f")
       << " dB / " << detail::fmt_metric(row.ssim, "%.4f") << "\n";
  }
  os << "  mean: " << detail::fmt_metric(r.mean_psnr, "%.2f") << " dB / "
     << detail::fmt_metric(r.mean_ssim, "%.4f");
  if (r.psnr_inf_count > 0) {
    os << "  (" << r.psnr_inf_count << " identical-image PSNR excluded)";
  }
  os << "\n";
  return os.str();
}

}  // namespace lrf
