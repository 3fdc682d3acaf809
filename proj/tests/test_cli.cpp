#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "rvw/synthetic.hpp"

using namespace rvw;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "rvw");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("rvw_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void make_pair(int size = 128, int logo = 40) {
    const GrayPlane host = synthetic_host(size, size, 17);
    roi_ = {size - logo - 8, size - logo - 8, logo, logo};
    save_image(host, path("host.pgm"));
    save_image(alpha_embed(host, synthetic_logo(logo, logo, 18), {0.5, roi_}), path("wm.pgm"));
  }
  std::string roi_arg() const { return to_string(roi_); }

  fs::path dir_;
  Roi roi_{};
};

}  // namespace

TEST_F(CliTest, EmbedRestoreVerify) {
  make_pair();
  auto e = run({"embed", "--host", path("host.pgm"), "--watermarked", path("wm.pgm"), "--roi", roi_arg(), "--out",
                path("final.png"), "--qp", "32", "--mu", "0.01", "--report", path("r.json")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("n_c"), std::string::npos);
  std::ifstream rf(path("r.json"));
  const auto j = nlohmann::json::parse(rf);
  EXPECT_EQ(j["qp"], 32);
  EXPECT_EQ(j["mu"], "0.01");
  EXPECT_EQ(j["n_d"], 8 * 40 * 40);
  EXPECT_DOUBLE_EQ(j["chosen_mu"].get<double>(), 0.01);
  EXPECT_LT(j["ratio"].get<double>(), 1.0);

  auto r = run({"restore", "--in", path("final.png"), "--out-host", path("back.pgm"), "--out-watermarked",
                path("wm2.pgm")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run({"verify", path("host.pgm"), path("back.pgm")}).code, 0);
  // the compensated watermarked image matches I^w outside the roi
  const auto wm = std::get<GrayPlane>(load_image(path("wm.pgm")));
  const auto wm2 = std::get<GrayPlane>(load_image(path("wm2.pgm")));
  for (int y = 0; y < wm.height(); ++y) {
    for (int x = 0; x < wm.width(); ++x) {
      if (!roi_.contains(x, y)) ASSERT_EQ(wm(x, y), wm2(x, y));
    }
  }
  const auto v = run({"verify", path("host.pgm"), path("final.png")});
  EXPECT_EQ(v.code, 1);
  EXPECT_NE(v.out.find("differ"), std::string::npos);
}

TEST_F(CliTest, EmbedWithLogo) {
  const GrayPlane host = synthetic_host(96, 96, 3);
  save_image(host, path("host.pgm"));
  save_image(synthetic_logo(32, 32, 4), path("logo.pgm"));
  auto e = run({"embed", "--host", path("host.pgm"), "--watermark", path("logo.pgm"), "--alpha", "0.3", "--roi",
                "50,50,32,32", "--out", path("final.pgm")});
  ASSERT_EQ(e.code, 0) << e.err;
  ASSERT_EQ(run({"restore", "--in", path("final.pgm"), "--out-host", path("back.pgm")}).code, 0);
  EXPECT_EQ(std::get<GrayPlane>(load_image(path("back.pgm"))), host);
}

TEST_F(CliTest, FlagAndInputErrors) {
  make_pair();
  const auto oob = run({"embed", "--host", path("host.pgm"), "--watermarked", path("wm.pgm"), "--roi",
                        "100,100,40,40", "--out", path("f.pgm")});
  EXPECT_EQ(oob.code, 2);
  EXPECT_NE(oob.err.find("roi out of bounds"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("f.pgm")));
  EXPECT_EQ(run({"embed", "--host", path("nope.pgm"), "--watermarked", path("wm.pgm"), "--roi", roi_arg(), "--out",
                 path("f.pgm")}).code,
            2);
  EXPECT_EQ(run({"embed", "--host", path("host.pgm"), "--watermarked", path("wm.pgm"), "--roi", roi_arg(), "--out",
                 path("f.pgm"), "--qp", "99"}).code,
            2);
  EXPECT_EQ(run({"embed", "--host", path("host.pgm"), "--roi", roi_arg(), "--out", path("f.pgm")}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"verify", path("host.pgm")}).code, 2);
}

TEST_F(CliTest, RestoreRejectsCorruptedImage) {
  make_pair();
  ASSERT_EQ(run({"embed", "--host", path("host.pgm"), "--watermarked", path("wm.pgm"), "--roi", roi_arg(), "--out",
                 path("final.pgm")})
                .code,
            0);
  auto img = std::get<GrayPlane>(load_image(path("final.pgm")));
  img(3, 100) = static_cast<std::uint8_t>(img(3, 100) ^ 0x40);
  save_image(img, path("bad.pgm"));
  EXPECT_EQ(run({"restore", "--in", path("bad.pgm"), "--out-host", path("back.pgm")}).code, 4);
  EXPECT_FALSE(fs::exists(path("back.pgm")));
  // an image that never carried a payload
  EXPECT_EQ(run({"restore", "--in", path("host.pgm"), "--out-host", path("back.pgm")}).code, 4);
  EXPECT_EQ(run({"restore", "--in", path("missing.pgm"), "--out-host", path("back.pgm")}).code, 2);
}

TEST_F(CliTest, CodecRoundTrip) {
  const GrayPlane host = synthetic_host(64, 64, 5);
  const Roi roi{0, 0, 64, 64};
  GrayPlane wm = alpha_embed(host, synthetic_logo(32, 32, 6), {0.6, {16, 16, 32, 32}});
  save_diff(difference(host, wm, roi), path("d.diff"));
  auto e = run({"codec", "encode", "--in", path("d.diff"), "--out", path("p.bin"), "--recon", path("r.diff")});
  ASSERT_EQ(e.code, 0) << e.err;
  ASSERT_EQ(run({"codec", "decode", "--in", path("p.bin"), "--out", path("o.diff")}).code, 0);
  EXPECT_EQ(read_file(path("r.diff")), read_file(path("o.diff")));

  save_diff(DifferencePlane(16, 16), path("z.diff"));
  ASSERT_EQ(run({"codec", "encode", "--in", path("z.diff"), "--out", path("z.bin")}).code, 0);
  ASSERT_EQ(run({"codec", "decode", "--in", path("z.bin"), "--out", path("z2.diff")}).code, 0);
  EXPECT_EQ(load_diff(path("z2.diff")), DifferencePlane(16, 16));
}

TEST_F(CliTest, CodecErrors) {
  std::ofstream(path("junk.diff"), std::ios::binary) << "not a diff";
  EXPECT_EQ(run({"codec", "encode", "--in", path("junk.diff"), "--out", path("p.bin")}).code, 2);
  std::ofstream(path("junk.bin"), std::ios::binary) << "garbage packet bytes";
  EXPECT_EQ(run({"codec", "decode", "--in", path("junk.bin"), "--out", path("o.diff")}).code, 3);
  EXPECT_FALSE(fs::exists(path("o.diff")));
}

TEST_F(CliTest, Bench) {
  EXPECT_EQ(run({"bench", "--corpus", path(""), "--out", path("rd.csv")}).code, 2);
  ASSERT_EQ(run({"synth", "--out", path("corpus"), "--count", "2", "--size", "64", "--logo", "24"}).code, 0);
  ASSERT_EQ(run({"bench", "--corpus", path("corpus"), "--mu", "0.01", "--qp", "28,40", "--out", path("rd.csv")}).code,
            0);
  ASSERT_EQ(run({"bench", "--corpus", path("corpus"), "--mu", "0.01", "--qp", "28,40", "--out", path("rd2.csv")}).code,
            0);
  const auto a = read_file(path("rd.csv"));
  EXPECT_EQ(a, read_file(path("rd2.csv")));
  const std::string text(a.begin(), a.end());
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST_F(CliTest, ConfigFile) {
  make_pair();
  std::ofstream(path("c.ini")) << "[embed]\nqp=36\nmu=0.001\n";
  ASSERT_EQ(run({"--config", path("c.ini"), "embed", "--host", path("host.pgm"), "--watermarked", path("wm.pgm"),
                 "--roi", roi_arg(), "--out", path("final.pgm"), "--report", path("r.json")})
                .code,
            0);
  std::ifstream rf(path("r.json"));
  const auto j = nlohmann::json::parse(rf);
  EXPECT_EQ(j["qp"], 36);
  EXPECT_EQ(j["mu"], "0.001");
}

#ifdef RVW_BINARY
TEST_F(CliTest, BinaryExitCodes) {
  make_pair(96, 32);
  const std::string bin = RVW_BINARY;
  const auto sh = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  EXPECT_EQ(sh("--help"), 0);
  EXPECT_EQ(sh("embed --host " + path("host.pgm") + " --watermarked " + path("wm.pgm") + " --roi " + roi_arg() +
               " --out " + path("f.pgm")),
            0);
  EXPECT_EQ(sh("restore --in " + path("f.pgm") + " --out-host " + path("b.pgm")), 0);
  EXPECT_EQ(sh("verify " + path("host.pgm") + " " + path("b.pgm")), 0);
  EXPECT_EQ(sh("embed --roi 1,2"), 2);
}
#endif
