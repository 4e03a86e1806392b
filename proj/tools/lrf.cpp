// Command-line surface: architecture ledger, training, evaluation, and
// single-image super-resolution. Every command echoes its fully resolved
// configuration to stderr before acting; machine-readable output (CSV) goes
// to stdout.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lrf/checkpoint.hpp"
#include "lrf/common.hpp"
#include "lrf/data.hpp"
#include "lrf/metrics.hpp"
#include "lrf/network.hpp"
#include "lrf/png_io.hpp"
#include "lrf/resize.hpp"
#include "lrf/selfcheck.hpp"
#include "lrf/sr.hpp"
#include "lrf/train.hpp"

namespace fs = std::filesystem;

namespace {

class Echo {
 public:
  explicit Echo(const std::string& command) {
    std::cerr << "# resolved configuration\n";
    kv("command", command);
  }
  void kv(const std::string& key, const std::string& value) {
    std::cerr << key << " = " << value << "\n";
  }
  void kv(const std::string& key, std::int64_t value) {
    kv(key, std::to_string(value));
  }
  void net(const lrf::NetworkConfig& cfg) {
    std::cerr << lrf::serialize_network_config(cfg);
  }
  void done() { std::cerr << "\n"; }
};

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<lrf::NamedImage> load_dataset(const std::string& path) {
  std::vector<std::pair<std::string, fs::path>> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (ext != ".png") continue;
      files.emplace_back(
          fs::relative(entry.path(), path).generic_string(), entry.path());
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path)) {
    // Manifest: one relative PNG path per line, resolved against the
    // manifest's directory; '#' comments allowed.
    std::ifstream in(path);
    if (!in) throw lrf::IoError("cannot open manifest: " + path);
    const fs::path base = fs::path(path).parent_path();
    std::string line;
    while (std::getline(in, line)) {
      if (const auto hash = line.find('#'); hash != std::string::npos) {
        line = line.substr(0, hash);
      }
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto e = line.find_last_not_of(" \t\r");
      const std::string rel = line.substr(b, e - b + 1);
      files.emplace_back(rel, base / rel);
    }
  } else {
    throw lrf::IoError("dataset path does not exist: " + path);
  }
  if (files.empty()) {
    throw lrf::ConfigError("no PNG images found under " + path);
  }
  std::vector<lrf::NamedImage> out;
  out.reserve(files.size());
  for (const auto& [name, p] : files) {
    out.push_back(lrf::NamedImage{name, lrf::read_png(p.string())});
  }
  return out;
}

int cmd_summarize(const std::string& config_path, const std::string& sweep,
                  const std::string& variants) {
  Echo echo("summarize");
  std::vector<lrf::NetworkConfig> configs;
  if (!sweep.empty()) {
    echo.kv("sweep", sweep);
    if (sweep == "kernels") {
      echo.kv("variants", variants);
      std::istringstream ss(variants);
      std::string tok;
      std::vector<lrf::Variant> vs;
      while (std::getline(ss, tok, ',')) vs.push_back(lrf::parse_variant(tok));
      lrf::usage_check(!vs.empty(), "empty --variant list");
      for (const auto v : vs) {
        for (const std::int64_t k : {3, 5, 7, 9, 11}) {
          lrf::NetworkConfig c;
          c.variant = v;
          c.kernel = k;
          if (v == lrf::Variant::SA) c.dilation = lrf::DilationScheme::S148;
          configs.push_back(c);
        }
      }
    } else if (sweep == "dilations") {
      for (const auto d :
           {lrf::DilationScheme::Uniform1, lrf::DilationScheme::S12,
            lrf::DilationScheme::S123, lrf::DilationScheme::S135,
            lrf::DilationScheme::S148}) {
        lrf::NetworkConfig c;
        c.variant = lrf::Variant::A;
        c.dilation = d;
        configs.push_back(c);
      }
    } else if (sweep == "variants") {
      for (const auto v : {lrf::Variant::B, lrf::Variant::S, lrf::Variant::A,
                           lrf::Variant::SA}) {
        lrf::NetworkConfig c;
        c.variant = v;
        if (v == lrf::Variant::A || v == lrf::Variant::SA) {
          c.dilation = lrf::DilationScheme::S148;
        }
        configs.push_back(c);
      }
    } else {
      throw lrf::UsageError(
          "--sweep must be kernels, dilations, or variants");
    }
  } else {
    lrf::NetworkConfig cfg;
    if (!config_path.empty()) {
      echo.kv("config", config_path);
      cfg = lrf::load_config_file(config_path).net;
    }
    cfg.validate();
    echo.net(cfg);
    configs.push_back(cfg);
  }
  echo.done();
  std::cout << lrf::summary_csv_header() << "\n";
  for (const auto& c : configs) {
    std::cout << lrf::to_csv(lrf::summarize(c)) << "\n";
  }
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              std::int64_t epochs, std::int64_t batch, std::uint64_t seed,
              bool seed_given, const std::string& out_dir,
              const std::string& resume_path) {
  const lrf::ConfigFile cf = lrf::load_config_file(config_path);
  lrf::TrainConfig tc;
  tc.epochs = epochs;
  tc.batch_size = batch;
  tc.seed = seed_given ? seed : cf.seed;
  tc.loss = cf.loss == "l2" ? lrf::Loss::L2 : lrf::Loss::L1;
  tc.scales = cf.scales;
  tc.initial_lr = cf.lr;

  lrf::TrainRun run;
  if (!resume_path.empty()) {
    const lrf::LoadedCheckpoint ck = lrf::load_checkpoint(resume_path);
    if (lrf::serialize_network_config(ck.meta.net) !=
        lrf::serialize_network_config(cf.net)) {
      throw lrf::ConfigError(
          "checkpoint architecture does not match --config");
    }
    run = lrf::resume_train_run(ck);
    tc.seed = ck.meta.seed;  // a resumed run always replays its own stream
  } else {
    run = lrf::make_train_run(cf.net, tc.seed);
  }

  Echo echo("train");
  echo.net(cf.net);
  echo.kv("seed", static_cast<std::int64_t>(tc.seed));
  echo.kv("data", data_path);
  echo.kv("epochs", tc.epochs);
  echo.kv("batch", tc.batch_size);
  echo.kv("scales", join_ints(tc.scales));
  echo.kv("patch", cf.patch);
  echo.kv("loss", lrf::loss_name(tc.loss));
  {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", tc.initial_lr);
    echo.kv("lr", std::string(buf));
  }
  echo.kv("out", out_dir);
  if (!resume_path.empty()) {
    echo.kv("resume", resume_path);
    echo.kv("resume_epoch", run.start_epoch);
  }
  echo.done();

  const auto images = load_dataset(data_path);
  std::cerr << images.size() << " images, preparing patches...\n";
  const auto ds = lrf::TrainDataset::build(images, tc.scales, cf.patch);
  std::cerr << ds.total_patches() << " patches across "
            << tc.scales.size() << " scale(s)\n";

  fs::create_directories(out_dir);
  const std::string ckpt = (fs::path(out_dir) / "checkpoint.ckpt").string();
  const std::string log = (fs::path(out_dir) / "log.csv").string();
  lrf::TrainHooks hooks;
  hooks.on_epoch_end = [](const lrf::EpochStat& s) {
    std::cerr << "epoch " << s.epoch << " lr " << s.lr;
    for (const auto& ps : s.per_scale) {
      std::cerr << "  x" << ps.scale << " loss " << ps.mean_loss;
    }
    std::cerr << "\n";
  };
  lrf::train(run, ds, tc, ckpt, log, hooks);
  std::cerr << "checkpoint: " << ckpt << "\nlog: " << log << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data_path,
             int scale, const std::string& protocol, std::int64_t shave,
             bool shave_given) {
  lrf::EvalProtocol proto;
  proto.colour_space =
      protocol == "rgb" ? lrf::ColourSpace::RGB : lrf::ColourSpace::Y;
  proto.shave = shave_given ? shave : scale;

  Echo echo("eval");
  echo.kv("checkpoint", checkpoint);
  echo.kv("data", data_path);
  echo.kv("scale", scale);
  echo.kv("protocol", protocol);
  echo.kv("shave", proto.shave);
  echo.done();

  const auto images = load_dataset(data_path);
  lrf::EvalReport report;
  if (checkpoint == "bicubic") {
    report = lrf::evaluate(lrf::bicubic_sr_function(), images, scale, proto);
  } else {
    const lrf::LoadedCheckpoint ck = lrf::load_checkpoint(checkpoint);
    std::cerr << "# checkpoint architecture\n";
    std::cerr << lrf::serialize_network_config(ck.meta.net);
    std::cerr << "epoch = " << ck.meta.epoch << "\n\n";
    report = lrf::evaluate(lrf::model_sr_function(ck.model), images, scale,
                           proto);
  }
  std::cout << lrf::to_csv(report);
  std::cerr << lrf::to_table(report);
  return 0;
}

int cmd_sr(const std::string& checkpoint, const std::string& image_path,
           int scale, const std::string& out_path) {
  Echo echo("sr");
  echo.kv("checkpoint", checkpoint);
  echo.kv("image", image_path);
  echo.kv("scale", scale);
  echo.kv("out", out_path);
  echo.done();

  const lrf::ImageU8 lr = lrf::read_png(image_path);
  lrf::ImageU8 out;
  if (checkpoint == "bicubic") {
    out = lrf::resize_bicubic(lr, lr.w * scale, lr.h * scale,
                              /*antialias=*/false);
  } else {
    const lrf::LoadedCheckpoint ck = lrf::load_checkpoint(checkpoint);
    out = lrf::super_resolve(ck.model, lr, scale);
  }
  lrf::write_png(out_path, out);
  std::cerr << "wrote " << out.w << "x" << out.h << " -> " << out_path
            << "\n";
  return 0;
}

int cmd_make_lr(const std::string& hr_dir, int scale,
                const std::string& out_dir) {
  Echo echo("make-lr");
  echo.kv("hr-dir", hr_dir);
  echo.kv("scale", scale);
  echo.kv("out-dir", out_dir);
  echo.done();

  const auto images = load_dataset(hr_dir);
  const fs::path lr_dir = fs::path(out_dir) / "lr";
  const fs::path input_dir = fs::path(out_dir) / "input";
  const fs::path target_dir = fs::path(out_dir) / "target";
  for (const auto& d : {lr_dir, input_dir, target_dir}) {
    fs::create_directories(d);
  }
  for (const auto& item : images) {
    const lrf::LrTriple t = lrf::make_lr_triple(item.image, scale);
    const std::string base = fs::path(item.name).filename().string();
    lrf::write_png((lr_dir / base).string(), t.lr);
    lrf::write_png((input_dir / base).string(), t.input);
    lrf::write_png((target_dir / base).string(), t.target);
  }
  std::cerr << "wrote " << images.size() << " image triple(s) under "
            << out_dir << "\n";
  return 0;
}

int cmd_selftest(bool inject_conv_fault) {
  Echo echo("selftest");
  if (inject_conv_fault) echo.kv("inject-conv-fault", "true");
  echo.done();
  lrf::detail::conv_fault_injection = inject_conv_fault;
  const int failures = lrf::run_selftest(std::cout);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"large receptive field single-image super-resolution toolkit"};
  app.require_subcommand(1);

  auto* sum = app.add_subcommand(
      "summarize", "print parameter/receptive-field ledger rows as CSV");
  std::string sum_config, sum_sweep;
  std::string sum_variants = "B,S";
  auto* sum_config_opt =
      sum->add_option("--config", sum_config, "network config file");
  sum->add_option("--sweep", sum_sweep,
                  "sweep a family: kernels, dilations, or variants")
      ->excludes(sum_config_opt);
  sum->add_option("--variant", sum_variants,
                  "comma list of variants for --sweep kernels");

  auto* train = app.add_subcommand("train", "train a network on HR images");
  std::string tr_config, tr_data, tr_out, tr_resume;
  std::int64_t tr_epochs = 300, tr_batch = 16;
  std::uint64_t tr_seed = 0;
  train->add_option("--config", tr_config, "network config file")
      ->required();
  train->add_option("--data", tr_data,
                    "HR image directory or manifest file")
      ->required();
  train->add_option("--epochs", tr_epochs, "total epochs (default 300)");
  train->add_option("--batch", tr_batch, "patches per batch (default 16)");
  auto* tr_seed_opt =
      train->add_option("--seed", tr_seed, "overrides the config file seed");
  train->add_option("--out", tr_out, "output directory")->required();
  train->add_option("--resume", tr_resume, "checkpoint to continue from");

  auto* eval = app.add_subcommand("eval", "evaluate on a dataset");
  std::string ev_ckpt, ev_data, ev_protocol = "y";
  int ev_scale = 4;
  std::int64_t ev_shave = 0;
  eval->add_option("--checkpoint", ev_ckpt,
                   "checkpoint file, or 'bicubic' for the baseline")
      ->required();
  eval->add_option("--data", ev_data, "HR image directory or manifest")
      ->required();
  eval->add_option("--scale", ev_scale, "4 or 8")
      ->required()
      ->check(CLI::IsMember({4, 8}));
  eval->add_option("--protocol", ev_protocol, "y (default) or rgb")
      ->check(CLI::IsMember({"y", "rgb"}));
  auto* ev_shave_opt = eval->add_option(
      "--shave", ev_shave, "border pixels to ignore (default: scale)");

  auto* sr = app.add_subcommand("sr", "upscale one image");
  std::string sr_ckpt, sr_image, sr_out;
  int sr_scale = 4;
  sr->add_option("--checkpoint", sr_ckpt,
                 "checkpoint file, or 'bicubic' for plain upscaling")
      ->required();
  sr->add_option("--image", sr_image, "LR input PNG")->required();
  sr->add_option("--scale", sr_scale, "4 or 8")
      ->required()
      ->check(CLI::IsMember({4, 8}));
  sr->add_option("--out", sr_out, "output PNG path")->required();

  auto* mklr = app.add_subcommand(
      "make-lr", "write lr/input/target trees for an HR image set");
  std::string ml_hr, ml_out;
  int ml_scale = 4;
  mklr->add_option("--hr-dir", ml_hr, "HR image directory or manifest")
      ->required();
  mklr->add_option("--scale", ml_scale, "4 or 8")
      ->required()
      ->check(CLI::IsMember({4, 8}));
  mklr->add_option("--out-dir", ml_out, "output directory")->required();

  auto* selftest =
      app.add_subcommand("selftest", "run built-in consistency checks");
  bool inject_fault = false;
  selftest
      ->add_flag("--inject-conv-fault", inject_fault,
                 "corrupt one conv gradient to prove the checks can fail")
      ->group("");  // test hook, hidden from help

  try {
    app.parse(argc, argv);
    if (sum->parsed()) {
      return cmd_summarize(sum_config, sum_sweep, sum_variants);
    }
    if (train->parsed()) {
      return cmd_train(tr_config, tr_data, tr_epochs, tr_batch, tr_seed,
                       tr_seed_opt->count() > 0, tr_out, tr_resume);
    }
    if (eval->parsed()) {
      return cmd_eval(ev_ckpt, ev_data, ev_scale, ev_protocol, ev_shave,
                      ev_shave_opt->count() > 0);
    }
    if (sr->parsed()) {
      return cmd_sr(sr_ckpt, sr_image, sr_scale, sr_out);
    }
    if (mklr->parsed()) {
      return cmd_make_lr(ml_hr, ml_scale, ml_out);
    }
    if (selftest->parsed()) {
      return cmd_selftest(inject_fault);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
