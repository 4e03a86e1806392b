#include "lrf/tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "lrf/common.hpp"
#include "lrf/rng.hpp"

namespace {

using lrf::Shape4;
using lrf::Tape;
using lrf::Tensor;

TEST(Shape, NumelAndEquality) {
  const Shape4 s{2, 3, 4, 5};
  EXPECT_EQ(s.numel(), 120);
  EXPECT_EQ(s, (Shape4{2, 3, 4, 5}));
  EXPECT_NE(s, (Shape4{2, 3, 5, 4}));
  EXPECT_EQ(s.str(), "(2,3,4,5)");
}

TEST(Tensor, FactoriesAndAccessors) {
  auto z = Tensor<float>::zeros({1, 2, 2, 2});
  EXPECT_EQ(z.numel(), 8);
  for (float v : z.data()) EXPECT_EQ(v, 0.0f);
  EXPECT_FALSE(z.requires_grad());

  auto f = Tensor<double>::full({1, 1, 2, 2}, 2.5);
  for (double v : f.data()) EXPECT_EQ(v, 2.5);

  auto t = Tensor<float>::from({1, 1, 1, 3}, {1.0f, 2.0f, 3.0f});
  EXPECT_EQ(t.data()[2], 3.0f);
  EXPECT_THROW(Tensor<float>::from({1, 1, 1, 3}, {1.0f}), lrf::ConfigError);
  EXPECT_THROW(Tensor<float>({0, 1, 1, 1}), lrf::ConfigError);
}

TEST(Tensor, CopiesShareStorage) {
  auto a = Tensor<float>::full({1, 1, 1, 4}, 1.0f, /*requires_grad=*/true);
  Tensor<float> b = a;
  EXPECT_TRUE(a.shares_storage_with(b));
  b.data()[0] = 9.0f;
  EXPECT_EQ(a.data()[0], 9.0f);
  b.grad()[1] = 3.0f;
  EXPECT_EQ(a.grad()[1], 3.0f);
  a.zero_grad();
  EXPECT_EQ(b.grad()[1], 0.0f);
}

TEST(Tensor, GradBufferGuards) {
  auto a = Tensor<float>::zeros({1, 1, 1, 2});
  EXPECT_THROW(a.grad(), lrf::UsageError);
  auto b = Tensor<float>::zeros({1, 1, 1, 2}, true);
  EXPECT_EQ(b.grad().size(), 2u);
}

TEST(Tensor, ItemRequiresScalar) {
  auto s = Tensor<float>::full({1, 1, 1, 1}, 7.0f);
  EXPECT_EQ(s.item(), 7.0f);
  auto v = Tensor<float>::zeros({1, 1, 1, 2});
  EXPECT_THROW(v.item(), lrf::UsageError);
}

TEST(Tensor, AllFinite) {
  auto a = Tensor<float>::full({1, 1, 1, 2}, 1.0f);
  EXPECT_TRUE(a.all_finite());
  a.data()[1] = std::nanf("");
  EXPECT_FALSE(a.all_finite());
  a.data()[1] = INFINITY;
  EXPECT_FALSE(a.all_finite());
}

TEST(Ops, AddForwardBackward) {
  Tape<double> tape;
  auto a = Tensor<double>::from({1, 1, 1, 3}, {1, 2, 3}, true);
  auto b = Tensor<double>::from({1, 1, 1, 3}, {10, 20, 30}, true);
  auto c = lrf::add(&tape, a, b);
  EXPECT_EQ(c.data()[1], 22);
  auto loss = lrf::sum(&tape, c);
  lrf::backward(tape, loss);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(a.grad()[i], 1.0);
    EXPECT_EQ(b.grad()[i], 1.0);
  }
}

TEST(Ops, AddShapeMismatchThrows) {
  auto a = Tensor<float>::zeros({1, 1, 1, 3});
  auto b = Tensor<float>::zeros({1, 1, 3, 1});
  EXPECT_THROW(lrf::add<float>(nullptr, a, b), lrf::ConfigError);
}

TEST(Ops, MulBackwardIsCrossed) {
  Tape<double> tape;
  auto a = Tensor<double>::from({1, 1, 1, 2}, {3, 5}, true);
  auto b = Tensor<double>::from({1, 1, 1, 2}, {7, 11}, true);
  auto c = lrf::mul(&tape, a, b);
  auto loss = lrf::sum(&tape, c);
  lrf::backward(tape, loss);
  EXPECT_EQ(a.grad()[0], 7);
  EXPECT_EQ(a.grad()[1], 11);
  EXPECT_EQ(b.grad()[0], 3);
  EXPECT_EQ(b.grad()[1], 5);
}

TEST(Ops, ReluMasksAndSubgradientZeroAtZero) {
  Tape<double> tape;
  auto x = Tensor<double>::from({1, 1, 1, 4}, {-2, 0, 0.5, 3}, true);
  auto y = lrf::relu(&tape, x);
  EXPECT_EQ(y.data()[0], 0);
  EXPECT_EQ(y.data()[1], 0);
  EXPECT_EQ(y.data()[2], 0.5);
  auto loss = lrf::sum(&tape, y);
  lrf::backward(tape, loss);
  EXPECT_EQ(x.grad()[0], 0);
  EXPECT_EQ(x.grad()[1], 0);  // exact 0 input gets zero subgradient
  EXPECT_EQ(x.grad()[2], 1);
  EXPECT_EQ(x.grad()[3], 1);
}

TEST(Ops, L1LossValueAndGradient) {
  Tape<double> tape;
  auto p = Tensor<double>::from({1, 1, 1, 4}, {1, 2, 3, 4}, true);
  auto t = Tensor<double>::from({1, 1, 1, 4}, {2, 2, 1, 6});
  auto loss = lrf::l1_loss(&tape, p, t);
  EXPECT_DOUBLE_EQ(loss.item(), (1 + 0 + 2 + 2) / 4.0);
  lrf::backward(tape, loss);
  EXPECT_DOUBLE_EQ(p.grad()[0], -0.25);
  EXPECT_DOUBLE_EQ(p.grad()[1], 0.0);  // tie gets sign 0
  EXPECT_DOUBLE_EQ(p.grad()[2], 0.25);
  EXPECT_DOUBLE_EQ(p.grad()[3], -0.25);
}

TEST(Ops, MseLossValueAndGradient) {
  Tape<double> tape;
  auto p = Tensor<double>::from({1, 1, 1, 2}, {3, -1}, true);
  auto t = Tensor<double>::from({1, 1, 1, 2}, {1, 0});
  auto loss = lrf::mse_loss(&tape, p, t);
  EXPECT_DOUBLE_EQ(loss.item(), (4.0 + 1.0) / 2.0);
  lrf::backward(tape, loss);
  EXPECT_DOUBLE_EQ(p.grad()[0], 2.0 * 2.0 / 2.0);
  EXPECT_DOUBLE_EQ(p.grad()[1], 2.0 * -1.0 / 2.0);
}

TEST(Ops, NonFiniteLossThrows) {
  auto p = Tensor<float>::full({1, 1, 1, 2}, 1e30f, true);
  auto t = Tensor<float>::full({1, 1, 1, 2}, -1e30f);
  EXPECT_THROW(lrf::mse_loss<float>(nullptr, p, t), lrf::NumericError);
}

TEST(Tape, NullTapeRecordsNothingAndSkipsGrads) {
  auto a = Tensor<float>::full({1, 1, 1, 2}, 1.0f, true);
  auto b = Tensor<float>::full({1, 1, 1, 2}, 2.0f, true);
  auto c = lrf::add<float>(nullptr, a, b);
  EXPECT_FALSE(c.requires_grad());
}

TEST(Tape, NoGradInputsRecordNothing) {
  Tape<float> tape;
  auto a = Tensor<float>::full({1, 1, 1, 2}, 1.0f);
  auto b = Tensor<float>::full({1, 1, 1, 2}, 2.0f);
  auto c = lrf::add(&tape, a, b);
  EXPECT_EQ(tape.size(), 0u);
  EXPECT_FALSE(c.requires_grad());
}

TEST(Tape, SingleUse) {
  Tape<double> tape;
  auto a = Tensor<double>::full({1, 1, 1, 1}, 2.0, true);
  auto loss = lrf::sum(&tape, a);
  lrf::backward(tape, loss);
  EXPECT_TRUE(tape.spent());
  EXPECT_THROW(tape.replay_backward(), lrf::UsageError);
}

TEST(Tape, BackwardNeedsScalarGradLoss) {
  Tape<float> tape;
  auto v = Tensor<float>::zeros({1, 1, 1, 2}, true);
  auto w = lrf::relu(&tape, v);
  EXPECT_THROW(lrf::backward(tape, w), lrf::UsageError);
  auto plain = Tensor<float>::zeros({1, 1, 1, 1});
  Tape<float> tape2;
  EXPECT_THROW(lrf::backward(tape2, plain), lrf::UsageError);
}

TEST(Tape, GradientsAccumulateAcrossUses) {
  // y = x + x: the same leaf contributes through two paths.
  Tape<double> tape;
  auto x = Tensor<double>::full({1, 1, 1, 1}, 1.5, true);
  auto y = lrf::add(&tape, x, x);
  auto loss = lrf::sum(&tape, y);
  lrf::backward(tape, loss);
  EXPECT_EQ(x.grad()[0], 2.0);
}

// Central-difference comparison of every op's gradient on random data; the
// dedicated convolution checks live in test_conv.
TEST(Ops, FiniteDifferenceSweep) {
  lrf::Rng rng(42);
  const Shape4 sh{1, 2, 3, 3};
  std::vector<double> base(static_cast<std::size_t>(sh.numel()));
  for (auto& v : base) v = lrf::uniform_unit(rng) * 2.0 - 1.0;

  struct Case {
    const char* name;
    // builds loss from x through the op under test
    std::function<lrf::Tensor<double>(lrf::Tape<double>*,
                                      const lrf::Tensor<double>&)>
        f;
  };
  auto other = Tensor<double>::from(sh, [&] {
    std::vector<double> v(base.size());
    for (auto& x : v) x = lrf::uniform_unit(rng) * 2.0 - 1.0;
    return v;
  }());
  const std::vector<Case> cases = {
      {"add", [&](auto* t, const auto& x) { return lrf::sum(t, lrf::add(t, x, other)); }},
      {"mul", [&](auto* t, const auto& x) { return lrf::sum(t, lrf::mul(t, x, other)); }},
      {"relu", [&](auto* t, const auto& x) { return lrf::sum(t, lrf::relu(t, x)); }},
      {"mse", [&](auto* t, const auto& x) { return lrf::mse_loss(t, x, other); }},
  };
  for (const auto& c : cases) {
    auto x = Tensor<double>::from(sh, base, true);
    lrf::Tape<double> tape;
    auto loss = c.f(&tape, x);
    lrf::backward(tape, loss);
    const double h = 1e-6;
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (std::abs(base[i]) < 1e-3) continue;  // keep clear of relu kinks
      auto xp = Tensor<double>::from(sh, base);
      auto xm = Tensor<double>::from(sh, base);
      xp.data()[i] += h;
      xm.data()[i] -= h;
      const double fp = c.f(nullptr, xp).item();
      const double fm = c.f(nullptr, xm).item();
      const double fd = (fp - fm) / (2 * h);
      EXPECT_NEAR(x.grad()[i], fd, 1e-5)
          << c.name << " grad mismatch at " << i;
    }
  }
}

}  // namespace
