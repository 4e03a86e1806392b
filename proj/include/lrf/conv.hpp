#pragma once

#include <cstdint>
#include <sstream>
#include <string>

#include "lrf/common.hpp"
#include "lrf/tensor.hpp"

namespace lrf {

/// Geometry of one 2-D convolution layer. Cross-correlation convention,
/// stride 1, zero padding chosen so the output matches the input extent
/// ("same" padding). Kernel extents must be odd so that padding is symmetric;
/// this covers square k x k as well as 1 x k and k x 1 kernels. A dilation of
/// d spreads the taps d pixels apart on both axes.
struct ConvSpec {
  std::int64_t in_channels = 0;
  std::int64_t out_channels = 0;
  std::int64_t kernel_h = 0;
  std::int64_t kernel_w = 0;
  std::int64_t dilation = 1;

  void validate() const {
    config_check(in_channels >= 1, "conv: in_channels must be >= 1");
    config_check(out_channels >= 1, "conv: out_channels must be >= 1");
    config_check(kernel_h >= 1 && kernel_w >= 1,
                 "conv: kernel extents must be >= 1");
    config_check(kernel_h % 2 == 1 && kernel_w % 2 == 1,
                 "conv: kernel extents must be odd for symmetric padding");
    config_check(dilation >= 1, "conv: dilation must be >= 1");
  }

  std::int64_t pad_h() const { return dilation * (kernel_h - 1) / 2; }
  std::int64_t pad_w() const { return dilation * (kernel_w - 1) / 2; }

  /// Pixel extent the kernel covers on each axis once dilation spreads the
  /// taps: d * (k - 1) + 1.
  std::int64_t field_h() const { return dilation * (kernel_h - 1) + 1; }
  std::int64_t field_w() const { return dilation * (kernel_w - 1) + 1; }

  Shape4 weight_shape() const {
    return Shape4{out_channels, in_channels, kernel_h, kernel_w};
  }

  std::int64_t param_count() const {
    return out_channels * in_channels * kernel_h * kernel_w + out_channels;
  }

  std::string str() const {
    std::ostringstream os;
    os << in_channels << "->" << out_channels << " " << kernel_h << "x"
       << kernel_w;
    if (dilation != 1) os << " d" << dilation;
    return os.str();
  }
};

/// Weight and bias of one conv layer. Weight layout is
/// (out_channels, in_channels, kernel_h, kernel_w); bias is (1, c, 1, 1).
template <typename T>
struct ConvParams {
  Tensor<T> weight;
  Tensor<T> bias;

  static ConvParams zeros(const ConvSpec& spec, bool requires_grad) {
    spec.validate();
    return ConvParams{
        Tensor<T>(spec.weight_shape(), requires_grad),
        Tensor<T>(Shape4{1, spec.out_channels, 1, 1}, requires_grad)};
  }
};

namespace detail {

/// Set by the self-test's fault-injection path to corrupt one weight
/// gradient, proving the gradient checker actually detects broken adjoints.
inline bool conv_fault_injection = false;

/// out[n,co,oy,ox] = b[co] + sum_{ci,dy,dx} w[co,ci,dy,dx] *
///                   x[n,ci, oy + d*dy - ph, ox + d*dx - pw]
/// Out-of-range reads are zeros. For each tap the valid output rows and
/// columns form one contiguous span, so the inner loop is a shifted axpy over
/// a row.
template <typename T>
void conv2d_forward_raw(const ConvSpec& sp, const T* x, const T* w,
                        const T* b, T* out, std::int64_t n, std::int64_t h,
                        std::int64_t wd) {
  const std::int64_t ci_n = sp.in_channels, co_n = sp.out_channels;
  const std::int64_t kh = sp.kernel_h, kw = sp.kernel_w, d = sp.dilation;
  const std::int64_t ph = sp.pad_h(), pw = sp.pad_w();
  for (std::int64_t in = 0; in < n; ++in) {
    for (std::int64_t co = 0; co < co_n; ++co) {
      T* out_ch = out + (in * co_n + co) * h * wd;
      const T bias = b[co];
      for (std::int64_t i = 0; i < h * wd; ++i) out_ch[i] = bias;
      for (std::int64_t ci = 0; ci < ci_n; ++ci) {
        const T* x_ch = x + (in * ci_n + ci) * h * wd;
        const T* w_k = w + (co * ci_n + ci) * kh * kw;
        for (std::int64_t dy = 0; dy < kh; ++dy) {
          const std::int64_t oy_lo = std::max<std::int64_t>(0, ph - d * dy);
          const std::int64_t oy_hi = std::min(h, h + ph - d * dy);
          for (std::int64_t dx = 0; dx < kw; ++dx) {
            const T wv = w_k[dy * kw + dx];
            if (wv == T{0}) continue;
            const std::int64_t ox_lo = std::max<std::int64_t>(0, pw - d * dx);
            const std::int64_t ox_hi = std::min(wd, wd + pw - d * dx);
            if (ox_lo >= ox_hi) continue;
            const std::int64_t off_x = d * dx - pw;
            for (std::int64_t oy = oy_lo; oy < oy_hi; ++oy) {
              T* orow = out_ch + oy * wd + ox_lo;
              const T* xrow = x_ch + (oy + d * dy - ph) * wd + ox_lo + off_x;
              axpy(orow, xrow, wv, ox_hi - ox_lo);
            }
          }
        }
      }
    }
  }
}

/// gx[n,ci,iy,ix] += sum_{co,dy,dx} w[co,ci,dy,dx] *
///                   gout[n,co, iy - d*dy + ph, ix - d*dx + pw]
/// Same span structure as the forward pass with the shift reversed.
template <typename T>
void conv2d_grad_x_raw(const ConvSpec& sp, const T* w, const T* gout, T* gx,
                       std::int64_t n, std::int64_t h, std::int64_t wd) {
  const std::int64_t ci_n = sp.in_channels, co_n = sp.out_channels;
  const std::int64_t kh = sp.kernel_h, kw = sp.kernel_w, d = sp.dilation;
  const std::int64_t ph = sp.pad_h(), pw = sp.pad_w();
  for (std::int64_t in = 0; in < n; ++in) {
    for (std::int64_t co = 0; co < co_n; ++co) {
      const T* go_ch = gout + (in * co_n + co) * h * wd;
      for (std::int64_t ci = 0; ci < ci_n; ++ci) {
        T* gx_ch = gx + (in * ci_n + ci) * h * wd;
        const T* w_k = w + (co * ci_n + ci) * kh * kw;
        for (std::int64_t dy = 0; dy < kh; ++dy) {
          const std::int64_t iy_lo = std::max<std::int64_t>(0, d * dy - ph);
          const std::int64_t iy_hi = std::min(h, h + d * dy - ph);
          for (std::int64_t dx = 0; dx < kw; ++dx) {
            const T wv = w_k[dy * kw + dx];
            if (wv == T{0}) continue;
            const std::int64_t ix_lo = std::max<std::int64_t>(0, d * dx - pw);
            const std::int64_t ix_hi = std::min(wd, wd + d * dx - pw);
            if (ix_lo >= ix_hi) continue;
            const std::int64_t off_x = pw - d * dx;
            for (std::int64_t iy = iy_lo; iy < iy_hi; ++iy) {
              T* gxrow = gx_ch + iy * wd + ix_lo;
              const T* gorow =
                  go_ch + (iy - d * dy + ph) * wd + ix_lo + off_x;
              axpy(gxrow, gorow, wv, ix_hi - ix_lo);
            }
          }
        }
      }
    }
  }
}

/// gw[co,ci,dy,dx] += sum over valid (n,oy,ox) of
///                    gout[n,co,oy,ox] * x[n,ci, oy + d*dy - ph, ox + d*dx - pw]
template <typename T>
void conv2d_grad_w_raw(const ConvSpec& sp, const T* x, const T* gout, T* gw,
                       std::int64_t n, std::int64_t h, std::int64_t wd) {
  const std::int64_t ci_n = sp.in_channels, co_n = sp.out_channels;
  const std::int64_t kh = sp.kernel_h, kw = sp.kernel_w, d = sp.dilation;
  const std::int64_t ph = sp.pad_h(), pw = sp.pad_w();
  for (std::int64_t in = 0; in < n; ++in) {
    for (std::int64_t co = 0; co < co_n; ++co) {
      const T* go_ch = gout + (in * co_n + co) * h * wd;
      for (std::int64_t ci = 0; ci < ci_n; ++ci) {
        const T* x_ch = x + (in * ci_n + ci) * h * wd;
        T* gw_k = gw + (co * ci_n + ci) * kh * kw;
        for (std::int64_t dy = 0; dy < kh; ++dy) {
          const std::int64_t oy_lo = std::max<std::int64_t>(0, ph - d * dy);
          const std::int64_t oy_hi = std::min(h, h + ph - d * dy);
          for (std::int64_t dx = 0; dx < kw; ++dx) {
            const std::int64_t ox_lo = std::max<std::int64_t>(0, pw - d * dx);
            const std::int64_t ox_hi = std::min(wd, wd + pw - d * dx);
            if (ox_lo >= ox_hi || oy_lo >= oy_hi) continue;
            const std::int64_t off_x = d * dx - pw;
            T acc{};
            for (std::int64_t oy = oy_lo; oy < oy_hi; ++oy) {
              const T* gorow = go_ch + oy * wd + ox_lo;
              const T* xrow = x_ch + (oy + d * dy - ph) * wd + ox_lo + off_x;
              for (std::int64_t i = 0; i < ox_hi - ox_lo; ++i) {
                acc += gorow[i] * xrow[i];
              }
            }
            gw_k[dy * kw + dx] += acc;
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_grad_b_raw(const ConvSpec& sp, const T* gout, T* gb,
                       std::int64_t n, std::int64_t h, std::int64_t wd) {
  const std::int64_t co_n = sp.out_channels;
  for (std::int64_t in = 0; in < n; ++in) {
    for (std::int64_t co = 0; co < co_n; ++co) {
      const T* go_ch = gout + (in * co_n + co) * h * wd;
      T acc{};
      for (std::int64_t i = 0; i < h * wd; ++i) acc += go_ch[i];
      gb[co] += acc;
    }
  }
}

}  // namespace detail

/// Extent-preserving 2-D convolution. Records exact adjoints when a tape is
/// given and any of x / weight / bias requires grad. Throws NumericError if
/// the output contains a non-finite value, naming the layer geometry; this is
/// the cheapest place to catch numeric blow-ups because every network value
/// flows through a convolution.
template <typename T>
Tensor<T> conv2d(Tape<T>* tape, const ConvSpec& spec, const Tensor<T>& x,
                 const ConvParams<T>& params) {
  spec.validate();
  config_check(x.shape().c == spec.in_channels,
               "conv2d: input has " + std::to_string(x.shape().c) +
                   " channels, layer expects " +
                   std::to_string(spec.in_channels));
  config_check(params.weight.shape() == spec.weight_shape(),
               "conv2d: weight shape " + params.weight.shape().str() +
                   " does not match layer " + spec.weight_shape().str());
  config_check(params.bias.shape() == (Shape4{1, spec.out_channels, 1, 1}),
               "conv2d: bias shape " + params.bias.shape().str() +
                   " does not match layer");
  const std::int64_t n = x.shape().n, h = x.shape().h, w = x.shape().w;
  const bool rec = detail::track(
      tape, {x.requires_grad(), params.weight.requires_grad(),
             params.bias.requires_grad()});
  Tensor<T> out(Shape4{n, spec.out_channels, h, w}, rec);
  detail::conv2d_forward_raw(spec, x.data().data(),
                             params.weight.data().data(),
                             params.bias.data().data(), out.data().data(), n,
                             h, w);
  if (!out.all_finite()) {
    throw NumericError("conv2d produced a non-finite value (layer " +
                       spec.str() + ")");
  }
  if (rec) {
    Tensor<T> weight = params.weight;
    Tensor<T> bias = params.bias;
    tape->record([spec, x, weight, bias, out, n, h, w]() mutable {
      const T* gout = out.grad().data();
      if (x.requires_grad()) {
        detail::conv2d_grad_x_raw(spec, weight.data().data(), gout,
                                  x.grad().data(), n, h, w);
      }
      if (weight.requires_grad()) {
        detail::conv2d_grad_w_raw(spec, x.data().data(), gout,
                                  weight.grad().data(), n, h, w);
        if (detail::conv_fault_injection) {
          weight.grad()[0] += T{0.01};
        }
      }
      if (bias.requires_grad()) {
        detail::conv2d_grad_b_raw(spec, gout, bias.grad().data(), n, h, w);
      }
    });
  }
  return out;
}

}  // namespace lrf
