#pragma once

#include <cstdint>

#include "lrf/image.hpp"
#include "lrf/metrics.hpp"
#include "lrf/network.hpp"
#include "lrf/resize.hpp"
#include "lrf/tensor.hpp"

namespace lrf {

/// Runs a bicubic-upscaled input (already at target size) through the
/// network and quantizes the result; the [0,1] clip happens in the
/// quantization.
template <typename T>
ImageU8 model_apply(const Model<T>& model, const ImageU8& input) {
  const Tensor<T> x = to_tensor<T>(input);
  Tensor<T> y = model.forward(nullptr, x);
  return from_tensor(y);
}

/// Adapter for the evaluation protocol. The model reference must outlive the
/// returned function.
template <typename T>
SrFunction model_sr_function(const Model<T>& model) {
  return [&model](const ImageU8& input) { return model_apply(model, input); };
}

/// End-to-end single-image upscaling: bicubic-upscale the LR input by the
/// scale factor, then refine it with the network. A zero-initialized network
/// returns the bicubic upscale itself.
template <typename T>
ImageU8 super_resolve(const Model<T>& model, const ImageU8& lr, int scale) {
  config_check(scale >= 1, "scale must be >= 1");
  const ImageU8 input =
      resize_bicubic(lr, lr.w * scale, lr.h * scale, /*antialias=*/false);
  return model_apply(model, input);
}

}  // namespace lrf
