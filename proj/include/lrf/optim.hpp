#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lrf/common.hpp"
#include "lrf/tensor.hpp"

namespace lrf {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers aligned one-to-one with a named parameter
/// list, plus the shared step counter.
template <typename T>
struct AdamState {
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::int64_t t = 0;

  static AdamState init(
      const std::vector<std::pair<std::string, Tensor<T>>>& params) {
    AdamState st;
    for (const auto& [name, p] : params) {
      st.m.push_back(Tensor<T>(p.shape()));
      st.v.push_back(Tensor<T>(p.shape()));
    }
    return st;
  }
};

/// One Adam update over all parameters:
///   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
///   theta <- theta - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
/// Gradients are taken from each parameter's grad buffer. There is no
/// gradient clipping anywhere; a non-finite gradient aborts the step with
/// the offending parameter named.
template <typename T>
void adam_step(std::vector<std::pair<std::string, Tensor<T>>>& params,
               AdamState<T>& state, const AdamConfig& cfg) {
  config_check(params.size() == state.m.size(),
               "adam_step: state does not match parameter list");
  state.t += 1;
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T lr = static_cast<T>(cfg.lr);
  const T eps = static_cast<T>(cfg.eps);
  const T bc1 = static_cast<T>(
      1.0 - std::pow(cfg.beta1, static_cast<double>(state.t)));
  const T bc2 = static_cast<T>(
      1.0 - std::pow(cfg.beta2, static_cast<double>(state.t)));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& [name, p] = params[pi];
    const auto g = p.grad();
    for (const T gv : g) {
      if (!std::isfinite(static_cast<double>(gv))) {
        throw NumericError("non-finite gradient in " + name +
                           " at step " + std::to_string(state.t));
      }
    }
    auto theta = p.data();
    auto m = state.m[pi].data();
    auto v = state.v[pi].data();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const T gv = g[i];
      m[i] = b1 * m[i] + (T{1} - b1) * gv;
      v[i] = b2 * v[i] + (T{1} - b2) * gv * gv;
      const T mhat = m[i] / bc1;
      const T vhat = v[i] / bc2;
      theta[i] = theta[i] - lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

/// Piecewise-constant halving: lr(epoch) = initial * 2^-(epoch / period),
/// integer division. Exact powers of two, so epoch 299 at the defaults gives
/// 1e-4 / 32 with no drift.
inline double lr_schedule(double initial_lr, std::int64_t halving_period,
                          std::int64_t epoch) {
  config_check(halving_period >= 1, "halving period must be >= 1");
  config_check(epoch >= 0, "epoch must be >= 0");
  return std::ldexp(initial_lr, -static_cast<int>(epoch / halving_period));
}

enum class Loss { L1, L2 };

inline const char* loss_name(Loss l) { return l == Loss::L1 ? "l1" : "l2"; }

struct TrainConfig {
  double initial_lr = 1e-4;
  std::int64_t lr_halving_period = 50;
  std::int64_t epochs = 300;
  std::int64_t batch_size = 16;
  std::uint64_t seed = 0;
  Loss loss = Loss::L1;
  std::vector<int> scales = {4, 8};
  std::int64_t checkpoint_every = 25;  // epochs; the final epoch always saves
};

}  // namespace lrf
