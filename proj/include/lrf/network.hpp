#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lrf/common.hpp"
#include "lrf/conv.hpp"
#include "lrf/rng.hpp"
#include "lrf/tensor.hpp"

namespace lrf {

/// Network variants:
///   B  - baseline, square k x k block kernels, no dilation
///   S  - 1-D kernels, one 1 x k and one k x 1 per block, no dilation
///   A  - square k x k block kernels with a dilation schedule
///   SA - 1-D kernels with the 1-4-8 dilation schedule on their long axis
enum class Variant { B, S, A, SA };

/// Residual block arrangements:
///   A - conv, ReLU, conv, plus identity skip
///   B - ReLU, conv, conv, plus identity skip
///   C - ReLU, then parallel 1 x k and k x 1 branches summed, plus skip
///   D - parallel 1 x k and k x 1 branches summed, then ReLU, plus skip
/// C and D need 1-D kernels, so they pair only with variants S and SA.
enum class BlockScheme { A, B, C, D };

/// Dilation schedules over the block sequence. Two-rate schedules split the
/// blocks in halves, three-rate schedules in thirds; the remainder goes to
/// the earlier groups when the block count is not divisible. Head and tail
/// always run undilated.
enum class DilationScheme { Uniform1, S12, S123, S135, S148 };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::B: return "B";
    case Variant::S: return "S";
    case Variant::A: return "A";
    case Variant::SA: return "SA";
  }
  return "?";
}

inline const char* scheme_name(BlockScheme s) {
  switch (s) {
    case BlockScheme::A: return "A";
    case BlockScheme::B: return "B";
    case BlockScheme::C: return "C";
    case BlockScheme::D: return "D";
  }
  return "?";
}

inline const char* dilation_name(DilationScheme d) {
  switch (d) {
    case DilationScheme::Uniform1: return "uniform1";
    case DilationScheme::S12: return "s12";
    case DilationScheme::S123: return "s123";
    case DilationScheme::S135: return "s135";
    case DilationScheme::S148: return "s148";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "B" || s == "b") return Variant::B;
  if (s == "S" || s == "s") return Variant::S;
  if (s == "A" || s == "a") return Variant::A;
  if (s == "SA" || s == "sa") return Variant::SA;
  throw ConfigError("unknown variant '" + s + "' (expected B, S, A, or SA)");
}

inline BlockScheme parse_scheme(const std::string& s) {
  if (s == "A" || s == "a") return BlockScheme::A;
  if (s == "B" || s == "b") return BlockScheme::B;
  if (s == "C" || s == "c") return BlockScheme::C;
  if (s == "D" || s == "d") return BlockScheme::D;
  throw ConfigError("unknown block scheme '" + s +
                    "' (expected A, B, C, or D)");
}

inline DilationScheme parse_dilation(const std::string& s) {
  if (s == "uniform1" || s == "1") return DilationScheme::Uniform1;
  if (s == "s12" || s == "1-2") return DilationScheme::S12;
  if (s == "s123" || s == "1-2-3") return DilationScheme::S123;
  if (s == "s135" || s == "1-3-5") return DilationScheme::S135;
  if (s == "s148" || s == "1-4-8") return DilationScheme::S148;
  throw ConfigError("unknown dilation scheme '" + s +
                    "' (expected uniform1, s12, s123, s135, or s148)");
}

inline std::vector<std::int64_t> dilation_rates(DilationScheme d) {
  switch (d) {
    case DilationScheme::Uniform1: return {1};
    case DilationScheme::S12: return {1, 2};
    case DilationScheme::S123: return {1, 2, 3};
    case DilationScheme::S135: return {1, 3, 5};
    case DilationScheme::S148: return {1, 4, 8};
  }
  return {1};
}

/// Complete declarative description of one network. Head and tail are always
/// 3x3 undilated convolutions; the variant chooses the block kernel shapes
/// and whether the dilation schedule applies.
struct NetworkConfig {
  Variant variant = Variant::B;
  std::int64_t num_blocks = 12;
  std::int64_t channels = 64;
  std::int64_t kernel = 3;
  BlockScheme scheme = BlockScheme::A;
  DilationScheme dilation = DilationScheme::Uniform1;
  std::int64_t input_channels = 3;

  bool one_d_kernels() const {
    return variant == Variant::S || variant == Variant::SA;
  }

  void validate() const {
    config_check(num_blocks >= 1, "blocks must be >= 1");
    config_check(channels >= 1, "channels must be >= 1");
    config_check(input_channels >= 1, "input channels must be >= 1");
    config_check(kernel == 3 || kernel == 5 || kernel == 7 || kernel == 9 ||
                     kernel == 11,
                 "kernel must be one of 3, 5, 7, 9, 11");
    if (scheme == BlockScheme::C || scheme == BlockScheme::D) {
      config_check(one_d_kernels(),
                   "block schemes C and D use parallel 1-D branches and "
                   "require variant S or SA");
    }
    if (variant == Variant::B || variant == Variant::S) {
      config_check(dilation == DilationScheme::Uniform1,
                   "variants B and S are undilated; use variant A or SA "
                   "for a dilation schedule");
    }
    if (variant == Variant::SA) {
      config_check(dilation == DilationScheme::S148,
                   "variant SA is defined with the s148 schedule");
    }
  }

  /// Dilation rate of block b (0-based). Rates are assigned to consecutive
  /// equal block groups, earlier groups first.
  std::int64_t block_dilation(std::int64_t b) const {
    const auto rates = dilation_rates(dilation);
    const auto g = static_cast<std::int64_t>(rates.size());
    return rates[static_cast<std::size_t>(b * g / num_blocks)];
  }

  /// Number of conv layers: one head, two per block, one tail.
  std::int64_t depth() const { return 2 * num_blocks + 2; }

  ConvSpec head_spec() const {
    return ConvSpec{input_channels, channels, 3, 3, 1};
  }
  ConvSpec tail_spec() const {
    return ConvSpec{channels, input_channels, 3, 3, 1};
  }

  /// The two conv layers of block b. For 1-D variants the first is 1 x k
  /// (row kernel) and the second k x 1 (column kernel); under schemes C/D
  /// they run as parallel branches instead of in sequence. Dilating the
  /// length-1 axis is a no-op, so a single rate per block is enough.
  std::array<ConvSpec, 2> block_specs(std::int64_t b) const {
    const std::int64_t d = block_dilation(b);
    if (one_d_kernels()) {
      return {ConvSpec{channels, channels, 1, kernel, d},
              ConvSpec{channels, channels, kernel, 1, d}};
    }
    return {ConvSpec{channels, channels, kernel, kernel, d},
            ConvSpec{channels, channels, kernel, kernel, d}};
  }
};

/// Exact trainable-parameter total, closed form. Must match the instantiated
/// model; the test suite asserts that over the whole config grid.
inline std::int64_t count_parameters(const NetworkConfig& cfg) {
  cfg.validate();
  std::int64_t total = cfg.head_spec().param_count() +
                       cfg.tail_spec().param_count();
  for (std::int64_t b = 0; b < cfg.num_blocks; ++b) {
    const auto specs = cfg.block_specs(b);
    total += specs[0].param_count() + specs[1].param_count();
  }
  return total;
}

/// Whole-network theoretical receptive field per axis:
/// 1 + sum over every conv of dilation * (kernel_extent_on_axis - 1).
/// Parallel 1-D branches contribute on their long axis only, which makes the
/// per-axis sum exact for schemes C/D as well.
inline std::pair<std::int64_t, std::int64_t> receptive_field(
    const NetworkConfig& cfg) {
  cfg.validate();
  std::int64_t rf_h = 1, rf_w = 1;
  auto absorb = [&](const ConvSpec& sp) {
    rf_h += sp.dilation * (sp.kernel_h - 1);
    rf_w += sp.dilation * (sp.kernel_w - 1);
  };
  absorb(cfg.head_spec());
  for (std::int64_t b = 0; b < cfg.num_blocks; ++b) {
    const auto specs = cfg.block_specs(b);
    absorb(specs[0]);
    absorb(specs[1]);
  }
  absorb(cfg.tail_spec());
  return {rf_h, rf_w};
}

/// One ledger row describing a config.
struct SummaryRow {
  std::string variant;
  std::int64_t kernel;
  std::string scheme;
  std::string dilation;
  std::int64_t params;
  std::int64_t rf_h;
  std::int64_t rf_w;
  std::int64_t depth;
};

inline SummaryRow summarize(const NetworkConfig& cfg) {
  const auto [rf_h, rf_w] = receptive_field(cfg);
  return SummaryRow{variant_name(cfg.variant), cfg.kernel,
                    scheme_name(cfg.scheme),  dilation_name(cfg.dilation),
                    count_parameters(cfg),    rf_h,
                    rf_w,                     cfg.depth()};
}

inline std::string summary_csv_header() {
  return "variant,kernel,scheme,dilation,params,rf_h,rf_w,depth";
}

inline std::string to_csv(const SummaryRow& r) {
  std::ostringstream os;
  os << r.variant << "," << r.kernel << "," << r.scheme << "," << r.dilation
     << "," << r.params << "," << r.rf_h << "," << r.rf_w << "," << r.depth;
  return os.str();
}

/// Instantiated parameter set for a config. Templated on the scalar so the
/// gradient-check suite can run the identical topology in double precision.
template <typename T>
struct Model {
  struct Block {
    ConvParams<T> c0;
    ConvParams<T> c1;
  };

  NetworkConfig config;
  ConvParams<T> head;
  std::vector<Block> blocks;
  ConvParams<T> tail;

  /// Canonical name/tensor listing; the checkpoint format and the optimizer
  /// both follow this order.
  std::vector<std::pair<std::string, Tensor<T>>> named_parameters() {
    std::vector<std::pair<std::string, Tensor<T>>> out;
    out.emplace_back("head.weight", head.weight);
    out.emplace_back("head.bias", head.bias);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const std::string p = "block" + std::to_string(b) + ".";
      out.emplace_back(p + "conv0.weight", blocks[b].c0.weight);
      out.emplace_back(p + "conv0.bias", blocks[b].c0.bias);
      out.emplace_back(p + "conv1.weight", blocks[b].c1.weight);
      out.emplace_back(p + "conv1.bias", blocks[b].c1.bias);
    }
    out.emplace_back("tail.weight", tail.weight);
    out.emplace_back("tail.bias", tail.bias);
    return out;
  }

  std::int64_t parameter_count() {
    std::int64_t n = 0;
    for (auto& [name, t] : named_parameters()) n += t.numel();
    return n;
  }

  void zero_grad() {
    for (auto& [name, t] : named_parameters()) t.zero_grad();
  }

  /// Full forward pass: head conv, ReLU, the residual blocks, tail conv, and
  /// the global skip that adds the raw input. Output shape equals input
  /// shape for any spatial extent.
  Tensor<T> forward(Tape<T>* tape, const Tensor<T>& x) const {
    config_check(x.shape().c == config.input_channels,
                 "forward: input has " + std::to_string(x.shape().c) +
                     " channels, network expects " +
                     std::to_string(config.input_channels));
    Tensor<T> t = relu(tape, conv2d(tape, config.head_spec(), x, head));
    for (std::int64_t b = 0; b < config.num_blocks; ++b) {
      const auto specs = config.block_specs(b);
      const Block& blk = blocks[static_cast<std::size_t>(b)];
      Tensor<T> y;
      switch (config.scheme) {
        case BlockScheme::A: {
          Tensor<T> h = relu(tape, conv2d(tape, specs[0], t, blk.c0));
          y = conv2d(tape, specs[1], h, blk.c1);
          break;
        }
        case BlockScheme::B: {
          Tensor<T> h = conv2d(tape, specs[0], relu(tape, t), blk.c0);
          y = conv2d(tape, specs[1], h, blk.c1);
          break;
        }
        case BlockScheme::C: {
          Tensor<T> a = relu(tape, t);
          y = add(tape, conv2d(tape, specs[0], a, blk.c0),
                  conv2d(tape, specs[1], a, blk.c1));
          break;
        }
        case BlockScheme::D: {
          y = relu(tape, add(tape, conv2d(tape, specs[0], t, blk.c0),
                             conv2d(tape, specs[1], t, blk.c1)));
          break;
        }
      }
      t = add(tape, t, y);
    }
    Tensor<T> out = conv2d(tape, config.tail_spec(), t, tail);
    return add(tape, out, x);
  }
};

/// Builds a model with fan-in-scaled normal weights (std = sqrt(2 / fan_in))
/// and zero biases, drawn in canonical parameter order so the same seed
/// always yields the same parameters, including across variants that share
/// kernel shapes.
template <typename T>
Model<T> build_model(const NetworkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Model<T> m;
  m.config = cfg;
  Rng rng(mix_seed(seed, 0x6d6f64656cULL));
  auto init = [&rng](const ConvSpec& sp) {
    auto p = ConvParams<T>::zeros(sp, /*requires_grad=*/true);
    const double fan_in =
        static_cast<double>(sp.in_channels * sp.kernel_h * sp.kernel_w);
    const double std_dev = std::sqrt(2.0 / fan_in);
    for (T& v : p.weight.data()) {
      v = static_cast<T>(normal_unit(rng) * std_dev);
    }
    return p;
  };
  m.head = init(cfg.head_spec());
  for (std::int64_t b = 0; b < cfg.num_blocks; ++b) {
    const auto specs = cfg.block_specs(b);
    m.blocks.push_back({init(specs[0]), init(specs[1])});
  }
  m.tail = init(cfg.tail_spec());
  return m;
}

/// Builds a model with every weight and bias zero. Such a network is the
/// identity map thanks to the global residual.
template <typename T>
Model<T> build_zero_model(const NetworkConfig& cfg) {
  cfg.validate();
  Model<T> m;
  m.config = cfg;
  m.head = ConvParams<T>::zeros(cfg.head_spec(), true);
  for (std::int64_t b = 0; b < cfg.num_blocks; ++b) {
    const auto specs = cfg.block_specs(b);
    m.blocks.push_back({ConvParams<T>::zeros(specs[0], true),
                        ConvParams<T>::zeros(specs[1], true)});
  }
  m.tail = ConvParams<T>::zeros(cfg.tail_spec(), true);
  return m;
}

/// Flat key = value config file. Architecture keys: variant, blocks,
/// channels, kernel, scheme, dilation. Run keys: seed, scales (comma list of
/// 4 and/or 8), loss (l1|l2), lr, patch (training patch edge at target
/// resolution). '#' starts a comment; unknown keys are rejected. When the
/// variant is SA and no dilation key is given, the s148 schedule is filled
/// in.
struct ConfigFile {
  NetworkConfig net;
  std::uint64_t seed = 0;
  std::vector<int> scales = {4, 8};
  std::string loss = "l1";
  double lr = 1e-4;
  std::int64_t patch = 128;
};

inline ConfigFile parse_config_text(const std::string& text) {
  ConfigFile cf;
  bool dilation_given = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    config_check(eq != std::string::npos,
                 "config line " + std::to_string(line_no) +
                     ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    config_check(!key.empty() && !val.empty(),
                 "config line " + std::to_string(line_no) +
                     ": empty key or value");
    auto as_int = [&](const std::string& v) {
      try {
        std::size_t pos = 0;
        const long long n = std::stoll(v, &pos);
        config_check(pos == v.size(), "trailing characters");
        return static_cast<std::int64_t>(n);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": '" + v + "' is not an integer");
      }
    };
    if (key == "variant") {
      cf.net.variant = parse_variant(val);
    } else if (key == "blocks") {
      cf.net.num_blocks = as_int(val);
    } else if (key == "channels") {
      cf.net.channels = as_int(val);
    } else if (key == "kernel") {
      cf.net.kernel = as_int(val);
    } else if (key == "scheme") {
      cf.net.scheme = parse_scheme(val);
    } else if (key == "dilation") {
      cf.net.dilation = parse_dilation(val);
      dilation_given = true;
    } else if (key == "seed") {
      cf.seed = static_cast<std::uint64_t>(as_int(val));
    } else if (key == "scales") {
      cf.scales.clear();
      std::istringstream ss(val);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        const auto s = as_int(trim(tok));
        config_check(s == 4 || s == 8, "scales must be 4 and/or 8");
        cf.scales.push_back(static_cast<int>(s));
      }
      config_check(!cf.scales.empty(), "scales must not be empty");
    } else if (key == "loss") {
      config_check(val == "l1" || val == "l2", "loss must be l1 or l2");
      cf.loss = val;
    } else if (key == "patch") {
      cf.patch = as_int(val);
      config_check(cf.patch >= 8, "patch must be >= 8");
    } else if (key == "lr") {
      try {
        cf.lr = std::stod(val);
      } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": '" + val + "' is not a number");
      }
      config_check(cf.lr > 0, "lr must be positive");
    } else {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
  }
  if (cf.net.variant == Variant::SA && !dilation_given) {
    cf.net.dilation = DilationScheme::S148;
  }
  cf.net.validate();
  return cf;
}

inline ConfigFile load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Architecture keys only, in canonical order; used by the checkpoint header
/// and by the CLI's resolved-config echo.
inline std::string serialize_network_config(const NetworkConfig& cfg) {
  std::ostringstream os;
  os << "variant = " << variant_name(cfg.variant) << "\n"
     << "blocks = " << cfg.num_blocks << "\n"
     << "channels = " << cfg.channels << "\n"
     << "kernel = " << cfg.kernel << "\n"
     << "scheme = " << scheme_name(cfg.scheme) << "\n"
     << "dilation = " << dilation_name(cfg.dilation) << "\n";
  return os.str();
}

}  // namespace lrf
