// Shared helpers for the test binaries: deterministic synthetic images and a
// small process-spawn wrapper for driving the command-line tool.

#pragma once

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lrf/image.hpp"
#include "lrf/rng.hpp"

namespace testsup {

/// Smooth low-frequency colour gradients. Bicubic reconstruction is nearly
/// perfect on these, so they exercise plumbing rather than model quality.
inline lrf::ImageU8 smooth_image(std::int64_t w, std::int64_t h,
                                 std::uint64_t seed) {
  lrf::Rng rng(lrf::mix_seed(seed, 0x736d6f6f7468ULL));
  const double fx = 0.02 + 0.08 * lrf::uniform_unit(rng);
  const double fy = 0.02 + 0.08 * lrf::uniform_unit(rng);
  const double ph = 6.28 * lrf::uniform_unit(rng);
  lrf::ImageU8 img(w, h);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      std::uint8_t* p = img.px(y, x);
      p[0] = static_cast<std::uint8_t>(127.5 + 127.0 * std::sin(fx * x + ph));
      p[1] = static_cast<std::uint8_t>(127.5 + 127.0 * std::sin(fy * y - ph));
      p[2] = static_cast<std::uint8_t>(
          127.5 + 127.0 * std::sin(0.5 * (fx + fy) * (x + y)));
    }
  }
  return img;
}

/// High-contrast rectangles on a light background. Plain bicubic upscaling
/// visibly blurs the edges, leaving a correction even a tiny network can
/// learn, which makes these the training-smoke workload.
inline lrf::ImageU8 boxes_image(std::int64_t w, std::int64_t h,
                                std::uint64_t seed) {
  lrf::Rng rng(lrf::mix_seed(seed, 0x626f786573ULL));
  lrf::ImageU8 img(w, h);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      std::uint8_t* p = img.px(y, x);
      p[0] = p[1] = p[2] = 235;
    }
  }
  constexpr std::array<std::uint8_t, 5> kLevels = {10, 25, 40, 215, 230};
  for (int r = 0; r < 16; ++r) {
    const std::int64_t rw =
        5 + static_cast<std::int64_t>(lrf::uniform_below(rng, 30));
    const std::int64_t rh =
        5 + static_cast<std::int64_t>(lrf::uniform_below(rng, 30));
    if (rw > w || rh > h) continue;
    const std::int64_t x0 =
        static_cast<std::int64_t>(lrf::uniform_below(rng, w - rw + 1));
    const std::int64_t y0 =
        static_cast<std::int64_t>(lrf::uniform_below(rng, h - rh + 1));
    const std::uint8_t v = kLevels[lrf::uniform_below(rng, kLevels.size())];
    for (std::int64_t y = y0; y < y0 + rh; ++y) {
      for (std::int64_t x = x0; x < x0 + rw; ++x) {
        std::uint8_t* p = img.px(y, x);
        p[0] = p[1] = p[2] = v;
      }
    }
  }
  return img;
}

/// Uniform random RGB noise; the adversarial input for resampling and metric
/// oracles.
inline lrf::ImageU8 noise_image(std::int64_t w, std::int64_t h,
                                std::uint64_t seed) {
  lrf::Rng rng(lrf::mix_seed(seed, 0x6e6f697365ULL));
  lrf::ImageU8 img(w, h);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      std::uint8_t* p = img.px(y, x);
      p[0] = static_cast<std::uint8_t>(lrf::uniform_below(rng, 256));
      p[1] = static_cast<std::uint8_t>(lrf::uniform_below(rng, 256));
      p[2] = static_cast<std::uint8_t>(lrf::uniform_below(rng, 256));
    }
  }
  return img;
}

inline std::vector<lrf::NamedImage> boxes_corpus(int count, std::int64_t size,
                                                 std::uint64_t seed) {
  std::vector<lrf::NamedImage> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(lrf::NamedImage{
        "img" + std::to_string(i) + ".png",
        boxes_image(size, size, seed + static_cast<std::uint64_t>(i))});
  }
  return out;
}

/// Scratch directory unique to (suite, tag), wiped on creation.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  const auto dir =
      std::filesystem::temp_directory_path() / ("lrf_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

/// Runs a shell command, capturing combined output. Test-only; quoting is the
/// caller's problem.
inline RunResult run_command(const std::string& cmd) {
  RunResult r;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) {
    r.output += buf;
  }
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p,
                       const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace testsup
