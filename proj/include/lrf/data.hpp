#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lrf/common.hpp"
#include "lrf/image.hpp"
#include "lrf/resize.hpp"
#include "lrf/rng.hpp"
#include "lrf/tensor.hpp"

namespace lrf {

/// The 8 dihedral transforms of a square image: t = rot + 4 * flip, rot in
/// 0..3 quarter-turns clockwise, flip mirrors horizontally before rotating.
inline ImageU8 transform_dihedral(const ImageU8& img, int t) {
  config_check(t >= 0 && t < 8, "dihedral transform index must be in 0..7");
  config_check(img.w == img.h, "dihedral transforms need a square image");
  const std::int64_t n = img.w;
  const int rot = t % 4;
  const bool flip = t >= 4;
  ImageU8 out(n, n);
  for (std::int64_t y = 0; y < n; ++y) {
    for (std::int64_t x = 0; x < n; ++x) {
      std::int64_t sy = y, sx = x;
      switch (rot) {  // inverse rotation: source position of out(y,x)
        case 0: break;
        case 1: sy = n - 1 - x; sx = y; break;
        case 2: sy = n - 1 - y; sx = n - 1 - x; break;
        case 3: sy = x; sx = n - 1 - y; break;
      }
      if (flip) sx = n - 1 - sx;
      const std::uint8_t* s = img.px(sy, sx);
      std::uint8_t* d = out.px(y, x);
      d[0] = s[0]; d[1] = s[1]; d[2] = s[2];
    }
  }
  return out;
}

/// Draws one of the 8 transforms uniformly.
inline int random_dihedral(Rng& rng) {
  return static_cast<int>(uniform_below(rng, 8));
}

/// Top-left corners of the non-overlapping size x size patch grid; the
/// bottom/right remainder is discarded. An image smaller than one patch
/// yields an empty list.
inline std::vector<std::pair<std::int64_t, std::int64_t>> patch_grid(
    std::int64_t w, std::int64_t h, std::int64_t size = 128) {
  config_check(size >= 1, "patch size must be >= 1");
  std::vector<std::pair<std::int64_t, std::int64_t>> corners;
  for (std::int64_t y = 0; y + size <= h; y += size) {
    for (std::int64_t x = 0; x + size <= w; x += size) {
      corners.emplace_back(x, y);
    }
  }
  return corners;
}

/// One single-scale batch of aligned patch pairs in [0,1].
struct PatchBatch {
  Tensor<float> inputs;   // (N,3,p,p) bicubic-upscaled LR
  Tensor<float> targets;  // (N,3,p,p) ground truth
  int scale = 0;
};

/// In-memory training corpus: for every scale, the degraded/target image
/// pairs (both at target size, 8-bit) plus the patch index. Patches are
/// materialized lazily per batch.
class TrainDataset {
 public:
  struct PatchRef {
    std::int32_t image = 0;
    std::int32_t x0 = 0;
    std::int32_t y0 = 0;
  };

  struct ScaleSet {
    int scale = 0;
    std::vector<std::pair<ImageU8, ImageU8>> pairs;  // (input, target)
    std::vector<PatchRef> patches;
  };

  static TrainDataset build(const std::vector<NamedImage>& hr_images,
                            const std::vector<int>& scales,
                            std::int64_t patch_size = 128) {
    config_check(!scales.empty(), "no scales given");
    TrainDataset ds;
    ds.patch_size_ = patch_size;
    for (const int s : scales) {
      ScaleSet set;
      set.scale = s;
      for (const auto& item : hr_images) {
        auto pair = make_lr_pair(item.image, s);
        const auto grid = patch_grid(pair.second.w, pair.second.h, patch_size);
        const auto idx = static_cast<std::int32_t>(set.pairs.size());
        for (const auto& [x0, y0] : grid) {
          set.patches.push_back(PatchRef{idx, static_cast<std::int32_t>(x0),
                                         static_cast<std::int32_t>(y0)});
        }
        set.pairs.push_back(std::move(pair));
      }
      ds.scales_.push_back(std::move(set));
    }
    return ds;
  }

  std::int64_t patch_size() const { return patch_size_; }
  const std::vector<ScaleSet>& scales() const { return scales_; }

  std::int64_t total_patches() const {
    std::int64_t n = 0;
    for (const auto& s : scales_) {
      n += static_cast<std::int64_t>(s.patches.size());
    }
    return n;
  }

 private:
  std::int64_t patch_size_ = 128;
  std::vector<ScaleSet> scales_;
};

namespace detail {

inline void fill_patch(Tensor<float>& batch, std::int64_t slot,
                       const ImageU8& patch) {
  const std::int64_t p = batch.shape().h;
  auto d = batch.data();
  float* base = d.data() + slot * 3 * p * p;
  constexpr float inv = 1.0f / 255.0f;
  for (int c = 0; c < 3; ++c) {
    float* plane = base + c * p * p;
    for (std::int64_t y = 0; y < p; ++y) {
      for (std::int64_t x = 0; x < p; ++x) {
        plane[y * p + x] = static_cast<float>(patch.px(y, x)[c]) * inv;
      }
    }
  }
}

}  // namespace detail

/// One epoch of batches: every patch of every enabled scale appears exactly
/// once, in an order and with augmentations drawn entirely from the given
/// RNG up front, so iteration is reproducible. Each batch is single-scale;
/// scales alternate batch-by-batch until one runs out.
class EpochBatches {
 public:
  EpochBatches(const TrainDataset& ds, std::int64_t batch_size, Rng rng)
      : ds_(ds), batch_size_(batch_size) {
    config_check(batch_size >= 1, "batch size must be >= 1");
    // Draw all randomness now, scale lists in order: shuffle first, then one
    // augmentation code per patch.
    for (const auto& set : ds.scales()) {
      PerScale ps;
      ps.order.resize(set.patches.size());
      for (std::size_t i = 0; i < ps.order.size(); ++i) {
        ps.order[i] = static_cast<std::int32_t>(i);
      }
      shuffle(ps.order.begin(), ps.order.end(), rng);
      ps.augment.resize(set.patches.size());
      for (auto& a : ps.augment) a = random_dihedral(rng);
      per_scale_.push_back(std::move(ps));
    }
  }

  /// Next batch, or nothing when the epoch is exhausted.
  std::optional<PatchBatch> next() {
    const std::size_t k = per_scale_.size();
    for (std::size_t tried = 0; tried < k; ++tried) {
      const std::size_t si = (turn_ + tried) % k;
      if (per_scale_[si].cursor < per_scale_[si].order.size()) {
        turn_ = (si + 1) % k;
        return make_batch(si);
      }
    }
    return std::nullopt;
  }

 private:
  struct PerScale {
    std::vector<std::int32_t> order;
    std::vector<int> augment;
    std::size_t cursor = 0;
  };

  PatchBatch make_batch(std::size_t si) {
    const auto& set = ds_.scales()[si];
    auto& ps = per_scale_[si];
    const std::int64_t remaining =
        static_cast<std::int64_t>(ps.order.size() - ps.cursor);
    const std::int64_t n = std::min<std::int64_t>(batch_size_, remaining);
    const std::int64_t p = ds_.patch_size();
    PatchBatch batch;
    batch.scale = set.scale;
    batch.inputs = Tensor<float>(Shape4{n, 3, p, p});
    batch.targets = Tensor<float>(Shape4{n, 3, p, p});
    for (std::int64_t i = 0; i < n; ++i) {
      const std::int32_t pi = ps.order[ps.cursor++];
      const auto& ref = set.patches[static_cast<std::size_t>(pi)];
      const int t = ps.augment[static_cast<std::size_t>(pi)];
      const auto& [input_img, target_img] =
          set.pairs[static_cast<std::size_t>(ref.image)];
      detail::fill_patch(
          batch.inputs, i,
          transform_dihedral(crop(input_img, ref.x0, ref.y0, p, p), t));
      detail::fill_patch(
          batch.targets, i,
          transform_dihedral(crop(target_img, ref.x0, ref.y0, p, p), t));
    }
    return batch;
  }

  const TrainDataset& ds_;
  std::int64_t batch_size_;
  std::vector<PerScale> per_scale_;
  std::size_t turn_ = 0;
};

}  // namespace lrf
