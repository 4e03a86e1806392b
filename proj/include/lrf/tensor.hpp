#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lrf/common.hpp"

namespace lrf {

/// Dense 4-D shape in (batch, channels, rows, cols) order.
struct Shape4 {
  std::int64_t n = 0;
  std::int64_t c = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;

  std::int64_t numel() const { return n * c * h * w; }
  bool operator==(const Shape4&) const = default;

  std::string str() const {
    std::ostringstream os;
    os << "(" << n << "," << c << "," << h << "," << w << ")";
    return os.str();
  }
};

/// Dense 4-D tensor over scalar T (float for training/inference, double for
/// gradient checks; both instantiate the same code).
///
/// Copies share storage. A tensor is immutable after creation except for its
/// grad buffer and explicit in-place parameter updates by the optimizer;
/// engine ops never write to their inputs.
template <typename T>
class Tensor {
  struct Storage {
    Shape4 shape;
    std::vector<T> data;
    std::vector<T> grad;  // same length as data iff requires_grad
    bool requires_grad = false;
  };

 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape4 shape, bool requires_grad = false)
      : s_(std::make_shared<Storage>()) {
    config_check(shape.n >= 1 && shape.c >= 1 && shape.h >= 1 && shape.w >= 1,
                 "tensor dimensions must be >= 1, got " + shape.str());
    s_->shape = shape;
    s_->data.assign(static_cast<std::size_t>(shape.numel()), T{});
    s_->requires_grad = requires_grad;
    if (requires_grad) {
      s_->grad.assign(s_->data.size(), T{});
    }
  }

  static Tensor zeros(Shape4 shape, bool requires_grad = false) {
    return Tensor(shape, requires_grad);
  }

  static Tensor full(Shape4 shape, T value, bool requires_grad = false) {
    Tensor t(shape, requires_grad);
    std::fill(t.s_->data.begin(), t.s_->data.end(), value);
    return t;
  }

  static Tensor from(Shape4 shape, std::vector<T> values,
                     bool requires_grad = false) {
    Tensor t(shape, requires_grad);
    config_check(static_cast<std::int64_t>(values.size()) == shape.numel(),
                 "value count does not match shape " + shape.str());
    t.s_->data = std::move(values);
    return t;
  }

  bool defined() const { return static_cast<bool>(s_); }
  const Shape4& shape() const { return s_->shape; }
  std::int64_t numel() const { return s_->shape.numel(); }
  bool requires_grad() const { return s_->requires_grad; }

  // Handle constness does not propagate to the shared storage (same model as
  // shared_ptr): backward rules mutate grad through by-value captures that
  // the language makes const when the source was a const reference.
  std::span<T> data() const { return {s_->data.data(), s_->data.size()}; }

  std::span<T> grad() const {
    usage_check(s_->requires_grad, "tensor has no grad buffer");
    return {s_->grad.data(), s_->grad.size()};
  }

  void zero_grad() {
    if (s_->requires_grad) {
      std::fill(s_->grad.begin(), s_->grad.end(), T{});
    }
  }

  /// Value of a single-element tensor.
  T item() const {
    usage_check(numel() == 1, "item() needs a scalar tensor, shape is " +
                                  shape().str());
    return s_->data[0];
  }

  bool shares_storage_with(const Tensor& other) const {
    return s_ == other.s_;
  }

  bool all_finite() const {
    for (const T v : s_->data) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

 private:
  std::shared_ptr<Storage> s_;
};

/// Reverse-mode tape: an ordered list of recorded backward rules. Replaying
/// them in reverse visits every recorded op exactly once. One tape lives for
/// one training step and is discarded after backward.
template <typename T>
class Tape {
 public:
  void record(std::function<void()> backward_rule) {
    steps_.push_back(std::move(backward_rule));
  }

  std::size_t size() const { return steps_.size(); }
  bool spent() const { return spent_; }

  /// Runs all recorded rules in reverse order. Single use.
  void replay_backward() {
    usage_check(!spent_, "tape already replayed; use one tape per step");
    spent_ = true;
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
      (*it)();
    }
  }

 private:
  std::vector<std::function<void()>> steps_;
  bool spent_ = false;
};

namespace detail {

template <typename T>
bool track(const Tape<T>* tape, std::initializer_list<bool> input_grads) {
  if (tape == nullptr) return false;
  for (bool g : input_grads) {
    if (g) return true;
  }
  return false;
}

template <typename T>
void axpy(T* y, const T* x, T a, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) {
    y[i] += a * x[i];
  }
}

}  // namespace detail

/// Elementwise sum. Backward passes the incoming gradient unchanged to both
/// inputs.
template <typename T>
Tensor<T> add(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
  config_check(a.shape() == b.shape(), "add: shape mismatch " +
                                           a.shape().str() + " vs " +
                                           b.shape().str());
  const bool rec = detail::track(tape, {a.requires_grad(), b.requires_grad()});
  Tensor<T> out(a.shape(), rec);
  const auto av = a.data();
  const auto bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    ov[i] = av[i] + bv[i];
  }
  if (rec) {
    tape->record([a, b, out]() mutable {
      const auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

/// Elementwise product (used by tests and losses, not by the networks).
template <typename T>
Tensor<T> mul(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
  config_check(a.shape() == b.shape(), "mul: shape mismatch " +
                                           a.shape().str() + " vs " +
                                           b.shape().str());
  const bool rec = detail::track(tape, {a.requires_grad(), b.requires_grad()});
  Tensor<T> out(a.shape(), rec);
  const auto av = a.data();
  const auto bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    ov[i] = av[i] * bv[i];
  }
  if (rec) {
    tape->record([a, b, out]() mutable {
      const auto g = out.grad();
      const auto av2 = a.data();
      const auto bv2 = b.data();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv2[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av2[i];
      }
    });
  }
  return out;
}

/// max(x, 0) elementwise. The gradient is masked by (x > 0); the subgradient
/// at exactly 0 is fixed to 0.
template <typename T>
Tensor<T> relu(Tape<T>* tape, const Tensor<T>& x) {
  const bool rec = detail::track(tape, {x.requires_grad()});
  Tensor<T> out(x.shape(), rec);
  const auto xv = x.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    ov[i] = xv[i] > T{0} ? xv[i] : T{0};
  }
  if (rec) {
    tape->record([x, out]() mutable {
      const auto g = out.grad();
      const auto xv2 = x.data();
      auto gx = x.grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (xv2[i] > T{0}) gx[i] += g[i];
      }
    });
  }
  return out;
}

/// Sum over all elements, as a (1,1,1,1) tensor.
template <typename T>
Tensor<T> sum(Tape<T>* tape, const Tensor<T>& x) {
  const bool rec = detail::track(tape, {x.requires_grad()});
  Tensor<T> out(Shape4{1, 1, 1, 1}, rec);
  const auto xv = x.data();
  T acc{};
  for (const T v : xv) acc += v;
  out.data()[0] = acc;
  if (rec) {
    tape->record([x, out]() mutable {
      const T g = out.grad()[0];
      auto gx = x.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
    });
  }
  return out;
}

namespace detail {

template <typename T>
void loss_finite_check(const Tensor<T>& loss, const char* name) {
  if (!std::isfinite(static_cast<double>(loss.item()))) {
    throw NumericError(std::string(name) + " produced a non-finite value");
  }
}

}  // namespace detail

/// Mean absolute difference over all elements. Backward on the prediction is
/// sign(pred - target) / N, with sign(0) = 0.
template <typename T>
Tensor<T> l1_loss(Tape<T>* tape, const Tensor<T>& pred,
                  const Tensor<T>& target) {
  config_check(pred.shape() == target.shape(),
               "l1_loss: shape mismatch " + pred.shape().str() + " vs " +
                   target.shape().str());
  const bool rec =
      detail::track(tape, {pred.requires_grad(), target.requires_grad()});
  Tensor<T> out(Shape4{1, 1, 1, 1}, rec);
  const auto pv = pred.data();
  const auto tv = target.data();
  T acc{};
  for (std::size_t i = 0; i < pv.size(); ++i) {
    acc += std::abs(pv[i] - tv[i]);
  }
  const T inv_n = T{1} / static_cast<T>(pv.size());
  out.data()[0] = acc * inv_n;
  detail::loss_finite_check(out, "l1_loss");
  if (rec) {
    tape->record([pred, target, out, inv_n]() mutable {
      const T g = out.grad()[0] * inv_n;
      const auto pv2 = pred.data();
      const auto tv2 = target.data();
      for (std::size_t i = 0; i < pv2.size(); ++i) {
        const T d = pv2[i] - tv2[i];
        const T s = d > T{0} ? T{1} : (d < T{0} ? T{-1} : T{0});
        if (pred.requires_grad()) pred.grad()[i] += g * s;
        if (target.requires_grad()) target.grad()[i] -= g * s;
      }
    });
  }
  return out;
}

/// Mean squared difference over all elements.
template <typename T>
Tensor<T> mse_loss(Tape<T>* tape, const Tensor<T>& pred,
                   const Tensor<T>& target) {
  config_check(pred.shape() == target.shape(),
               "mse_loss: shape mismatch " + pred.shape().str() + " vs " +
                   target.shape().str());
  const bool rec =
      detail::track(tape, {pred.requires_grad(), target.requires_grad()});
  Tensor<T> out(Shape4{1, 1, 1, 1}, rec);
  const auto pv = pred.data();
  const auto tv = target.data();
  T acc{};
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const T d = pv[i] - tv[i];
    acc += d * d;
  }
  const T inv_n = T{1} / static_cast<T>(pv.size());
  out.data()[0] = acc * inv_n;
  detail::loss_finite_check(out, "mse_loss");
  if (rec) {
    tape->record([pred, target, out, inv_n]() mutable {
      const T g = out.grad()[0] * inv_n * T{2};
      const auto pv2 = pred.data();
      const auto tv2 = target.data();
      for (std::size_t i = 0; i < pv2.size(); ++i) {
        const T d = pv2[i] - tv2[i];
        if (pred.requires_grad()) pred.grad()[i] += g * d;
        if (target.requires_grad()) target.grad()[i] -= g * d;
      }
    });
  }
  return out;
}

/// Seeds the scalar loss gradient with 1 and replays the tape in reverse,
/// populating grad for every requires_grad leaf that contributed.
template <typename T>
void backward(Tape<T>& tape, Tensor<T>& loss) {
  usage_check(loss.numel() == 1,
              "backward needs a scalar loss, shape is " + loss.shape().str());
  usage_check(loss.requires_grad(),
              "loss was not produced through taped, grad-requiring ops");
  loss.grad()[0] = T{1};
  tape.replay_backward();
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace lrf
