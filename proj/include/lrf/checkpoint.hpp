#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lrf/common.hpp"
#include "lrf/network.hpp"
#include "lrf/optim.hpp"

namespace lrf {

/// Checkpoint file layout, version 1:
///   line 1            "lrf-checkpoint 1"
///   key = value       network config (variant, blocks, channels, kernel,
///                     scheme, dilation), then seed, epoch, step
///   tensor lines      "tensor <name> <n> <c> <h> <w> @ <byte offset>"
///                     parameters in canonical order, then adam.m.<name> and
///                     adam.v.<name> blocks in the same order
///   "end"             terminates the header
///   payload           little-endian 32-bit floats, tensors in header order
/// Offsets are relative to the payload start. The header is regenerated
/// deterministically, so save -> load -> save is byte-identical.
struct CheckpointMeta {
  NetworkConfig net;
  std::uint64_t seed = 0;
  std::int64_t epoch = 0;  // completed epochs
  std::int64_t step = 0;   // optimizer steps == Adam t
};

struct LoadedCheckpoint {
  CheckpointMeta meta;
  Model<float> model;
  AdamState<float> adam;
};

namespace detail {

inline void append_f32_le(std::string& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  out.push_back(static_cast<char>(bits & 0xff));
  out.push_back(static_cast<char>((bits >> 8) & 0xff));
  out.push_back(static_cast<char>((bits >> 16) & 0xff));
  out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

inline float read_f32_le(const char* p) {
  const auto b = [p](int i) {
    return static_cast<std::uint32_t>(static_cast<std::uint8_t>(p[i]));
  };
  return std::bit_cast<float>(b(0) | (b(1) << 8) | (b(2) << 16) |
                              (b(3) << 24));
}

inline std::vector<std::pair<std::string, Tensor<float>>> checkpoint_tensors(
    Model<float>& model, AdamState<float>& adam) {
  auto params = model.named_parameters();
  std::vector<std::pair<std::string, Tensor<float>>> all = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    all.emplace_back("adam.m." + params[i].first, adam.m[i]);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    all.emplace_back("adam.v." + params[i].first, adam.v[i]);
  }
  return all;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, Model<float>& model,
                            AdamState<float>& adam,
                            const CheckpointMeta& meta) {
  config_check(adam.m.size() == model.named_parameters().size(),
               "adam state does not match the model");
  auto tensors = detail::checkpoint_tensors(model, adam);
  std::ostringstream header;
  header << "lrf-checkpoint 1\n"
         << serialize_network_config(meta.net) << "seed = " << meta.seed
         << "\nepoch = " << meta.epoch << "\nstep = " << meta.step << "\n";
  std::int64_t offset = 0;
  for (auto& [name, t] : tensors) {
    const Shape4 s = t.shape();
    header << "tensor " << name << " " << s.n << " " << s.c << " " << s.h
           << " " << s.w << " @ " << offset << "\n";
    offset += t.numel() * 4;
  }
  header << "end\n";
  std::string payload;
  payload.reserve(static_cast<std::size_t>(offset));
  for (auto& [name, t] : tensors) {
    for (const float v : t.data()) detail::append_f32_le(payload, v);
  }
  // Write to a sibling temp file and rename so an interrupted save never
  // destroys the previous checkpoint.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint: " + tmp);
    const std::string h = header.str();
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw IoError("short write on checkpoint: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "lrf-checkpoint 1") {
    throw IoError("not a version-1 checkpoint: " + path);
  }
  std::map<std::string, std::string> kv;
  struct Dir {
    std::string name;
    Shape4 shape;
    std::int64_t offset;
  };
  std::vector<Dir> dir;
  bool saw_end = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      saw_end = true;
      break;
    }
    if (line.rfind("tensor ", 0) == 0) {
      std::istringstream ls(line);
      std::string word, name, at;
      Dir d{};
      ls >> word >> name >> d.shape.n >> d.shape.c >> d.shape.h >>
          d.shape.w >> at >> d.offset;
      if (!ls || at != "@") throw IoError("bad tensor line: " + line);
      d.name = name;
      dir.push_back(d);
      continue;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw IoError("bad header line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  if (!saw_end) throw IoError("truncated checkpoint header: " + path);
  auto need = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw IoError("checkpoint missing key: " + key);
    return it->second;
  };
  LoadedCheckpoint ck;
  ck.meta.net.variant = parse_variant(need("variant"));
  ck.meta.net.num_blocks = std::stoll(need("blocks"));
  ck.meta.net.channels = std::stoll(need("channels"));
  ck.meta.net.kernel = std::stoll(need("kernel"));
  ck.meta.net.scheme = parse_scheme(need("scheme"));
  ck.meta.net.dilation = parse_dilation(need("dilation"));
  ck.meta.seed = std::stoull(need("seed"));
  ck.meta.epoch = std::stoll(need("epoch"));
  ck.meta.step = std::stoll(need("step"));
  ck.meta.net.validate();

  ck.model = build_zero_model<float>(ck.meta.net);
  ck.adam = AdamState<float>::init(ck.model.named_parameters());
  ck.adam.t = ck.meta.step;
  auto expected = detail::checkpoint_tensors(ck.model, ck.adam);
  if (expected.size() != dir.size()) {
    throw IoError("checkpoint tensor count mismatch");
  }
  std::string payload((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  std::int64_t offset = 0;
  for (std::size_t i = 0; i < dir.size(); ++i) {
    auto& [name, t] = expected[i];
    if (dir[i].name != name || !(dir[i].shape == t.shape()) ||
        dir[i].offset != offset) {
      throw IoError("checkpoint directory mismatch at " + dir[i].name);
    }
    const std::int64_t bytes = t.numel() * 4;
    if (offset + bytes > static_cast<std::int64_t>(payload.size())) {
      throw IoError("checkpoint payload truncated at " + name);
    }
    auto d = t.data();
    const char* src = payload.data() + offset;
    for (std::int64_t j = 0; j < t.numel(); ++j) {
      d[static_cast<std::size_t>(j)] = detail::read_f32_le(src + 4 * j);
    }
    offset += bytes;
  }
  if (offset != static_cast<std::int64_t>(payload.size())) {
    throw IoError("checkpoint payload has trailing bytes");
  }
  return ck;
}

}  // namespace lrf
