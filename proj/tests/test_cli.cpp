// End-to-end checks of the lrf binary: each test spawns the real executable
// and inspects its output and exit code.

#include <gtest/gtest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "lrf/image.hpp"
#include "lrf/png_io.hpp"
#include "support.hpp"

namespace {

namespace fs = std::filesystem;

std::string cli() { return LRF_CLI_PATH; }

testsup::RunResult run_cli(const std::string& args) {
  return testsup::run_command(cli() + " " + args);
}

void expect_contains(const std::string& haystack, const std::string& needle) {
  EXPECT_NE(haystack.find(needle), std::string::npos)
      << "missing '" << needle << "' in:\n"
      << haystack;
}

fs::path write_corpus(const fs::path& dir, int count, std::int64_t size,
                      std::uint64_t seed) {
  fs::create_directories(dir);
  for (const auto& item : testsup::boxes_corpus(count, size, seed)) {
    lrf::write_png((dir / item.name).string(), item.image);
  }
  return dir;
}

TEST(Cli, SummarizeConfigFile) {
  const auto dir = testsup::scratch_dir("cli_sum");
  testsup::write_file(dir / "net.cfg", "variant = B\nkernel = 3\n");
  const auto r = run_cli("summarize --config " + (dir / "net.cfg").string());
  EXPECT_EQ(r.exit_code, 0);
  expect_contains(r.output, "# resolved configuration");
  expect_contains(r.output, "variant,kernel,scheme,dilation,params,rf_h,rf_w,depth");
  expect_contains(r.output, "B,3,A,uniform1,889795,53,53,26");
}

TEST(Cli, SummarizeKernelSweepMatchesPublishedLedger) {
  const auto r = run_cli("summarize --sweep kernels");
  EXPECT_EQ(r.exit_code, 0);
  const std::vector<std::string> rows = {
      "B,3,A,uniform1,889795,53,53,26",
      "B,5,A,uniform1,2462659,101,101,26",
      "B,7,A,uniform1,4821955,149,149,26",
      "B,9,A,uniform1,7967683,197,197,26",
      "B,11,A,uniform1,11899843,245,245,26",
      "S,3,A,uniform1,299971,29,29,26",
      "S,5,A,uniform1,496579,53,53,26",
      "S,7,A,uniform1,693187,77,77,26",
      "S,9,A,uniform1,889795,101,101,26",
      "S,11,A,uniform1,1086403,125,125,26",
  };
  for (const auto& row : rows) expect_contains(r.output, row + "\n");
}

TEST(Cli, SummarizeVariantAndDilationSweeps) {
  const auto rv = run_cli("summarize --sweep variants");
  EXPECT_EQ(rv.exit_code, 0);
  expect_contains(rv.output, "A,3,A,s148,889795,213,213,26");
  expect_contains(rv.output, "SA,3,A,s148,299971,109,109,26");

  const auto rd = run_cli("summarize --sweep dilations");
  EXPECT_EQ(rd.exit_code, 0);
  expect_contains(rd.output, "A,3,A,uniform1,889795,53,53,26");
  expect_contains(rd.output, "A,3,A,s12,889795,77,77,26");
  expect_contains(rd.output, "A,3,A,s123,889795,101,101,26");
  expect_contains(rd.output, "A,3,A,s135,889795,149,149,26");
  expect_contains(rd.output, "A,3,A,s148,889795,213,213,26");
}

TEST(Cli, BadInvocationsFail) {
  EXPECT_NE(run_cli("summarize --nope").exit_code, 0);
  EXPECT_NE(run_cli("train").exit_code, 0);
  EXPECT_NE(run_cli("").exit_code, 0);
  EXPECT_NE(run_cli("summarize --sweep nonsense").exit_code, 0);
  // --config and --sweep are mutually exclusive
  const auto dir = testsup::scratch_dir("cli_bad");
  testsup::write_file(dir / "net.cfg", "variant = B\n");
  EXPECT_NE(run_cli("summarize --sweep kernels --config " +
                    (dir / "net.cfg").string())
                .exit_code,
            0);
}

TEST(Cli, ConfigFileErrorsAreReported) {
  const auto dir = testsup::scratch_dir("cli_cfgerr");
  testsup::write_file(dir / "bad.cfg", "variant = B\nbogus = 1\n");
  const auto r = run_cli("summarize --config " + (dir / "bad.cfg").string());
  EXPECT_NE(r.exit_code, 0);
  expect_contains(r.output, "error:");
  expect_contains(r.output, "bogus");
}

TEST(Cli, SelftestPassesAndInjectedFaultIsCaught) {
  const auto ok = run_cli("selftest");
  EXPECT_EQ(ok.exit_code, 0) << ok.output;
  expect_contains(ok.output, "[ok]");
  expect_contains(ok.output, ", 0 failed");

  const auto bad = run_cli("selftest --inject-conv-fault");
  EXPECT_EQ(bad.exit_code, 1);
  expect_contains(bad.output, "[FAIL]");
}

TEST(Cli, TrainEvalSrRoundTrip) {
  const auto dir = testsup::scratch_dir("cli_train");
  const auto data = write_corpus(dir / "hr", 3, 48, 400);
  testsup::write_file(dir / "net.cfg",
                      "variant = B\nblocks = 2\nchannels = 8\nkernel = 3\n"
                      "scales = 4\nloss = l1\nlr = 3e-3\npatch = 16\n"
                      "seed = 11\n");

  const auto tr = run_cli("train --config " + (dir / "net.cfg").string() +
                          " --data " + data.string() +
                          " --epochs 2 --batch 8 --out " +
                          (dir / "out").string());
  ASSERT_EQ(tr.exit_code, 0) << tr.output;
  expect_contains(tr.output, "# resolved configuration");
  expect_contains(tr.output, "patch = 16");
  expect_contains(tr.output, "epoch 1");
  const auto ckpt = dir / "out" / "checkpoint.ckpt";
  EXPECT_TRUE(fs::exists(ckpt));
  expect_contains(testsup::read_file(dir / "out" / "log.csv"),
                  "epoch,step,scale,lr,loss,val_psnr");

  const auto ev = run_cli("eval --checkpoint " + ckpt.string() + " --data " +
                          data.string() + " --scale 4");
  ASSERT_EQ(ev.exit_code, 0) << ev.output;
  expect_contains(ev.output, "# checkpoint architecture");
  expect_contains(ev.output, "name,scale,psnr_db,ssim");
  expect_contains(ev.output, "\nmean,4,");

  const auto evb = run_cli("eval --checkpoint bicubic --data " +
                           data.string() + " --scale 4 --protocol rgb");
  ASSERT_EQ(evb.exit_code, 0) << evb.output;
  expect_contains(evb.output, "# protocol: colour_space=RGB shave=4 scale=4");

  // eval rejects scales the pipeline does not support
  EXPECT_NE(run_cli("eval --checkpoint bicubic --data " + data.string() +
                    " --scale 5")
                .exit_code,
            0);

  // super-resolve one image with the trained checkpoint and with bicubic
  const auto lr_img = testsup::boxes_image(12, 12, 77);
  lrf::write_png((dir / "lr.png").string(), lr_img);
  for (const std::string& ck : {ckpt.string(), std::string("bicubic")}) {
    const auto out_png = dir / ("sr_" + fs::path(ck).stem().string() + ".png");
    const auto sr = run_cli("sr --checkpoint " + ck + " --image " +
                            (dir / "lr.png").string() + " --scale 4 --out " +
                            out_png.string());
    ASSERT_EQ(sr.exit_code, 0) << sr.output;
    const auto out = lrf::read_png(out_png.string());
    EXPECT_EQ(out.w, 48);
    EXPECT_EQ(out.h, 48);
  }
}

TEST(Cli, TrainResumeProducesIdenticalCheckpoint) {
  const auto dir = testsup::scratch_dir("cli_resume");
  const auto data = write_corpus(dir / "hr", 2, 40, 500);
  testsup::write_file(dir / "net.cfg",
                      "variant = S\nblocks = 2\nchannels = 8\nkernel = 3\n"
                      "scales = 4\nlr = 1e-3\npatch = 16\nseed = 21\n");
  const std::string common = "train --config " + (dir / "net.cfg").string() +
                             " --data " + data.string() + " --batch 4 ";

  ASSERT_EQ(run_cli(common + "--epochs 4 --out " + (dir / "a").string())
                .exit_code,
            0);
  ASSERT_EQ(run_cli(common + "--epochs 2 --out " + (dir / "b").string())
                .exit_code,
            0);
  ASSERT_EQ(run_cli(common + "--epochs 4 --out " + (dir / "b").string() +
                    " --resume " + (dir / "b" / "checkpoint.ckpt").string())
                .exit_code,
            0);
  EXPECT_EQ(testsup::read_file(dir / "a" / "checkpoint.ckpt"),
            testsup::read_file(dir / "b" / "checkpoint.ckpt"));

  // resuming under a different architecture is refused
  testsup::write_file(dir / "other.cfg",
                      "variant = B\nblocks = 2\nchannels = 8\nkernel = 3\n"
                      "scales = 4\npatch = 16\n");
  const auto bad = run_cli("train --config " + (dir / "other.cfg").string() +
                           " --data " + data.string() +
                           " --epochs 6 --batch 4 --out " +
                           (dir / "c").string() + " --resume " +
                           (dir / "a" / "checkpoint.ckpt").string());
  EXPECT_NE(bad.exit_code, 0);
  expect_contains(bad.output, "does not match");
}

TEST(Cli, MakeLrWritesAlignedTriples) {
  const auto dir = testsup::scratch_dir("cli_mklr");
  const auto data = write_corpus(dir / "hr", 2, 37, 600);  // forces cropping
  const auto r = run_cli("make-lr --hr-dir " + data.string() +
                         " --scale 4 --out-dir " + (dir / "out").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  for (const std::string name : {"img0.png", "img1.png"}) {
    const auto lr = lrf::read_png((dir / "out" / "lr" / name).string());
    const auto input = lrf::read_png((dir / "out" / "input" / name).string());
    const auto target =
        lrf::read_png((dir / "out" / "target" / name).string());
    EXPECT_EQ(lr.w, 8);  // 37 -> 32 -> /4
    EXPECT_EQ(lr.h, 8);
    EXPECT_EQ(input.w, 32);
    EXPECT_EQ(target.w, 32);
    EXPECT_EQ(target.h, 32);
  }
}

TEST(Cli, ManifestDatasetsAndDirectoriesAgree) {
  const auto dir = testsup::scratch_dir("cli_manifest");
  const auto data = write_corpus(dir / "hr", 3, 32, 700);
  testsup::write_file(dir / "hr" / "subset.txt",
                      "# two of the three images\nimg0.png\nimg2.png\n");
  const auto r = run_cli("eval --checkpoint bicubic --data " +
                         (dir / "hr" / "subset.txt").string() + " --scale 4");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  expect_contains(r.output, "img0.png,4,");
  expect_contains(r.output, "img2.png,4,");
  EXPECT_EQ(r.output.find("img1.png"), std::string::npos);
}

}  // namespace
