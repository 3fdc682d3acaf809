#pragma once

// rvw command-line front end. Exit codes: 0 ok, 1 verify mismatch,
// 2 bad flags or unreadable input, 3 codec/capacity failure, 4 integrity
// failure during restore.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rvw/rvw.hpp"

namespace rvw::cli {

namespace fs = std::filesystem;

struct Exit {
  int code;
  std::string message;
};

// Runs `fn`, converting library errors into an Exit with the given code.
template <class F>
auto guarded(int code, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Exit{code, e.what()};
  }
}

inline Roi parse_roi(const std::string& text) {
  Roi roi;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d,%d,%d,%d%c", &roi.x0, &roi.y0, &roi.width, &roi.height, &tail) != 4) {
    throw Exit{2, "--roi expects X,Y,W,H, got '" + text + "'"};
  }
  return roi;
}

inline int image_width(const Image& img) {
  return std::visit([](const auto& i) { return i.width(); }, img);
}
inline int image_height(const Image& img) {
  return std::visit([](const auto& i) { return i.height(); }, img);
}

inline Image load_input(const std::string& path, const char* flag) {
  if (path.empty()) throw Exit{2, std::string(flag) + " is required"};
  if (!fs::exists(path)) throw Exit{2, std::string(flag) + ": no such file '" + path + "'"};
  return guarded(2, [&] { return load_image(path); });
}

inline std::vector<double> mu_grid_from(const std::string& mu) {
  if (mu == "auto") return CodecParams{}.mu_grid;
  try {
    std::size_t used = 0;
    const double v = std::stod(mu, &used);
    if (used != mu.size() || !(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(mu);
    return {v};
  } catch (const std::exception&) {
    throw Exit{2, "--mu expects 'auto' or a nonnegative number, got '" + mu + "'"};
  }
}

inline void check_qp(int qp) {
  if (qp < 0 || qp > 51) throw Exit{2, "--qp must lie in 0..51"};
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v;
    if (!(is >> v) || !(is >> std::ws).eof()) throw Exit{2, std::string(flag) + ": bad value '" + item + "'"};
    out.push_back(v);
  }
  if (out.empty()) throw Exit{2, std::string(flag) + " is empty"};
  return out;
}

inline nlohmann::ordered_json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline void write_text_atomic(const fs::path& path, const std::string& text) {
  guarded(2, [&] {
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  });
}

inline void save_output(const Image& img, const std::string& path) {
  guarded(2, [&] { save_image(img, path); });
}

// ---- embed ---------------------------------------------------------------

struct EmbedArgs {
  std::string host, watermarked, watermark, out, report, roi, mu = "auto";
  double alpha = 0.5;
  int qp = 28;
};

inline int cmd_embed(const EmbedArgs& a, std::ostream& out, std::ostream& err) {
  if (a.out.empty()) throw Exit{2, "--out is required"};
  if (a.roi.empty()) throw Exit{2, "--roi is required"};
  if (a.watermarked.empty() == a.watermark.empty()) {
    throw Exit{2, "give exactly one of --watermarked or --watermark"};
  }
  check_qp(a.qp);
  EmbedConfig config;
  config.roi = parse_roi(a.roi);
  config.codec.qp = a.qp;
  config.codec.mu_grid = mu_grid_from(a.mu);

  const Image host = load_input(a.host, "--host");
  if (!config.roi.fits(image_width(host), image_height(host))) {
    throw Exit{2, "roi out of bounds: " + to_string(config.roi)};
  }
  Image watermarked;
  if (!a.watermarked.empty()) {
    watermarked = load_input(a.watermarked, "--watermarked");
  } else {
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw Exit{2, "--alpha must lie in (0,1)"};
    config.visible = AlphaParams{a.alpha, config.roi};
    const Image logo = load_input(a.watermark, "--watermark");
    if (logo.index() != host.index()) throw Exit{2, "watermark and host differ in channel count"};
    if (image_width(logo) != config.roi.width || image_height(logo) != config.roi.height) {
      throw Exit{2, "watermark size must equal the roi size"};
    }
    watermarked = std::visit(
        [&](const auto& h) -> Image {
          using T = std::decay_t<decltype(h)>;
          const auto& l = std::get<T>(logo);
          if constexpr (std::is_same_v<T, GrayPlane>) {
            return alpha_embed(h, l, *config.visible);
          } else {
            ColorImage fused;
            for (int c = 0; c < 3; ++c) fused.channels[c] = alpha_embed(h.channels[c], l.channels[c], *config.visible);
            return fused;
          }
        },
        host);
  }
  if (watermarked.index() != host.index()) throw Exit{2, "host and watermarked differ in channel count"};
  if (image_width(watermarked) != image_width(host) || image_height(watermarked) != image_height(host)) {
    throw Exit{2, "host and watermarked differ in size"};
  }

  EmbedReport report;
  Image final_image = guarded(3, [&]() -> Image {
    return std::visit(
        [&](const auto& h) -> Image {
          using T = std::decay_t<decltype(h)>;
          auto r = embed(h, std::get<T>(watermarked), config);
          report = r.report;
          return std::move(r.final_image);
        },
        host);
  });

  std::vector<std::string> warnings;
  if (report.pixels_changed_outside_roi > 0) {
    warnings.push_back(std::to_string(report.pixels_changed_outside_roi) +
                       " samples differ between host and watermarked outside the roi; restore returns the "
                       "watermarked values there");
    err << "warning: " << warnings.back() << "\n";
  }

  save_output(final_image, a.out);
  if (!a.report.empty()) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["roi"] = {config.roi.x0, config.roi.y0, config.roi.width, config.roi.height};
    j["qp"] = a.qp;
    j["mu"] = a.mu;
    j["n_d"] = report.n_d;
    j["n_c"] = report.n_c;
    j["ratio"] = report.ratio;
    j["psnr_i"] = number_or_inf(report.psnr_i);
    j["psnr_n"] = number_or_inf(report.psnr_n);
    j["psnr_w"] = number_or_inf(report.psnr_w);
    j["chosen_mu"] = report.chosen_mu;
    j["alternation_rounds"] = report.alternation_rounds;
    auto& channels = j["channels"] = nlohmann::ordered_json::array();
    for (const auto& c : report.channels) {
      channels.push_back({{"n_c", c.n_c},
                          {"chosen_mu", c.chosen_mu},
                          {"alternation_rounds", c.alternation_rounds},
                          {"overflow_count", c.overflow_count},
                          {"payload_bits", c.payload_bits},
                          {"capacity_bits", c.capacity_bits}});
    }
    j["warnings"] = warnings;
    write_text_atomic(a.report, j.dump(2) + "\n");
  }
  out << "n_c " << report.n_c << " ratio " << format_number(report.ratio) << " psnr_n "
      << format_number(report.psnr_n) << "\n";
  return 0;
}

// ---- restore -------------------------------------------------------------

struct RestoreArgs {
  std::string in, out_host, out_watermarked;
};

inline int cmd_restore(const RestoreArgs& a) {
  if (a.out_host.empty()) throw Exit{2, "--out-host is required"};
  const Image final_image = load_input(a.in, "--in");
  auto [host, intermediate] = guarded(4, [&]() -> std::pair<Image, Image> {
    return std::visit(
        [](const auto& img) -> std::pair<Image, Image> {
          auto r = restore(img);
          return {std::move(r.host), std::move(r.intermediate)};
        },
        final_image);
  });
  save_output(host, a.out_host);
  if (!a.out_watermarked.empty()) save_output(intermediate, a.out_watermarked);
  return 0;
}

// ---- codec ---------------------------------------------------------------

struct CodecArgs {
  std::string in, out, recon, mu = "auto";
  int qp = 28;
};

inline int cmd_codec_encode(const CodecArgs& a, std::ostream& out) {
  if (a.out.empty()) throw Exit{2, "--out is required"};
  check_qp(a.qp);
  CodecParams params;
  params.qp = a.qp;
  params.mu_grid = mu_grid_from(a.mu);
  if (a.in.empty() || !fs::exists(a.in)) throw Exit{2, "--in: no such file '" + a.in + "'"};
  const DifferencePlane diff = guarded(2, [&] { return load_diff(a.in); });
  if (diff.empty()) throw Exit{2, "--in: empty difference plane"};
  const Roi roi{0, 0, diff.width(), diff.height()};
  const EncodeResult r = guarded(3, [&] { return encode(diff, roi, params); });
  const auto bytes = r.packet.serialize();
  guarded(2, [&] { write_file_atomic(a.out, bytes); });
  if (!a.recon.empty()) guarded(2, [&] { save_diff(r.reconstructed, a.recon); });
  out << bytes.size() * 8 << "\n";
  return 0;
}

inline int cmd_codec_decode(const CodecArgs& a) {
  if (a.out.empty()) throw Exit{2, "--out is required"};
  if (a.in.empty() || !fs::exists(a.in)) throw Exit{2, "--in: no such file '" + a.in + "'"};
  const Bytes bytes = guarded(2, [&] { return read_file(a.in); });
  const DifferencePlane plane = guarded(3, [&] { return decode(std::span<const std::uint8_t>(bytes)); });
  guarded(2, [&] { save_diff(plane, a.out); });
  return 0;
}

// ---- bench ---------------------------------------------------------------

struct BenchArgs {
  std::string corpus, out, mu = "0.1,0.01,0.001", qp = "28,32,36,40";
};

// corpus.txt: one "host watermarked X,Y,W,H" per line, paths relative to DIR.
inline std::vector<CorpusItem> load_corpus(const fs::path& dir) {
  const fs::path manifest = dir / "corpus.txt";
  if (!fs::is_directory(dir)) throw Exit{2, "--corpus: not a directory '" + dir.string() + "'"};
  std::ifstream in(manifest);
  if (!in) throw Exit{2, "empty corpus: no corpus.txt in " + dir.string()};
  std::vector<CorpusItem> items;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string host, wm, roi;
    if (!(ls >> host) || host[0] == '#') continue;
    if (!(ls >> wm >> roi)) throw Exit{2, "corpus.txt: malformed line '" + line + "'"};
    CorpusItem item{load_input((dir / host).string(), "corpus host"), load_input((dir / wm).string(), "corpus watermarked"),
                    parse_roi(roi)};
    if (!item.roi.fits(image_width(item.host), image_height(item.host))) {
      throw Exit{2, "roi out of bounds in corpus line '" + line + "'"};
    }
    items.push_back(std::move(item));
  }
  if (items.empty()) throw Exit{2, "empty corpus: " + manifest.string()};
  return items;
}

inline int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.out.empty()) throw Exit{2, "--out is required"};
  auto mus = parse_list<double>(a.mu, "--mu");
  std::sort(mus.begin(), mus.end(), std::greater<>());
  const auto qps = parse_list<int>(a.qp, "--qp");
  for (double m : mus) {
    if (!(m >= 0.0)) throw Exit{2, "--mu values must be nonnegative"};
  }
  for (int q : qps) check_qp(q);
  const auto corpus = load_corpus(a.corpus);
  const auto points = guarded(3, [&] { return rd_sweep(corpus, mus, qps); });
  const std::string csv = rd_csv(points);
  write_text_atomic(a.out, csv);
  out << points.size() << " rows\n";
  return 0;
}

// ---- verify --------------------------------------------------------------

inline int cmd_verify(const std::string& a_path, const std::string& b_path, std::ostream& out) {
  const Image a = load_input(a_path, "first image");
  const Image b = load_input(b_path, "second image");
  if (a == b) {
    out << "identical\n";
    return 0;
  }
  if (a.index() != b.index() || image_width(a) != image_width(b) || image_height(a) != image_height(b)) {
    out << "differ: shape\n";
    return 1;
  }
  std::size_t diff = 0;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b);
        if constexpr (std::is_same_v<T, GrayPlane>) {
          for (std::size_t i = 0; i < x.size(); ++i) diff += x.samples()[i] != y.samples()[i];
        } else {
          for (int c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < x.channels[c].size(); ++i) {
              diff += x.channels[c].samples()[i] != y.channels[c].samples()[i];
            }
          }
        }
      },
      a);
  out << "differ: " << diff << " samples\n";
  return 1;
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string out;
  int count = 4, size = 256, logo = 64;
  double alpha = 0.5;
  std::uint64_t seed = 1;
  bool color = false;
};

inline int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.out.empty()) throw Exit{2, "--out is required"};
  if (a.count < 1 || a.size < 16 || a.logo < 8 || a.logo + 16 > a.size) {
    throw Exit{2, "need count >= 1, size >= 16 and logo + 16 <= size"};
  }
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw Exit{2, "--alpha must lie in (0,1)"};
  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Exit{2, "cannot create " + dir.string()};
  const std::string ext = a.color ? ".ppm" : ".pgm";
  std::string manifest;
  for (int i = 0; i < a.count; ++i) {
    const std::uint64_t s = a.seed * 1000 + static_cast<std::uint64_t>(i);
    const Roi roi{a.size - a.logo - 8, a.size - a.logo - 8, a.logo, a.logo};
    const AlphaParams alpha{a.alpha, roi};
    Image host, wm;
    if (a.color) {
      ColorImage h = synthetic_color_host(a.size, a.size, 2 * s);
      ColorImage l = synthetic_color_logo(a.logo, a.logo, 2 * s + 1);
      ColorImage w;
      for (int c = 0; c < 3; ++c) w.channels[c] = alpha_embed(h.channels[c], l.channels[c], alpha);
      host = std::move(h);
      wm = std::move(w);
    } else {
      GrayPlane h = synthetic_host(a.size, a.size, 2 * s);
      wm = alpha_embed(h, synthetic_logo(a.logo, a.logo, 2 * s + 1), alpha);
      host = std::move(h);
    }
    const std::string hn = "host_" + std::to_string(i) + ext;
    const std::string wn = "wm_" + std::to_string(i) + ext;
    save_output(host, (dir / hn).string());
    save_output(wm, (dir / wn).string());
    manifest += hn + " " + wn + " " + to_string(roi) + "\n";
  }
  write_text_atomic(dir / "corpus.txt", manifest);
  out << a.count << " items\n";
  return 0;
}

// ---- entry ---------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"reversible visible watermarking toolkit", "rvw"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file; flags override it");

  EmbedArgs ea;
  auto* embed_cmd = app.add_subcommand("embed", "embed a payload so the host can be restored blindly");
  embed_cmd->add_option("--host", ea.host, "original image")->required();
  auto* wmd = embed_cmd->add_option("--watermarked", ea.watermarked, "visibly watermarked image");
  auto* wm = embed_cmd->add_option("--watermark", ea.watermark, "logo to alpha-fuse (roi-sized)");
  wmd->excludes(wm);
  embed_cmd->add_option("--alpha", ea.alpha, "fusion weight for --watermark")->needs(wm);
  embed_cmd->add_option("--roi", ea.roi, "X,Y,W,H")->required();
  embed_cmd->add_option("--out", ea.out, "final image")->required();
  embed_cmd->add_option("--qp", ea.qp, "quantization parameter");
  embed_cmd->add_option("--mu", ea.mu, "auto or a fixed value");
  embed_cmd->add_option("--report", ea.report, "JSON report path");

  RestoreArgs ra;
  auto* restore_cmd = app.add_subcommand("restore", "recover the host from a final image");
  restore_cmd->add_option("--in", ra.in, "final image")->required();
  restore_cmd->add_option("--out-host", ra.out_host, "restored host")->required();
  restore_cmd->add_option("--out-watermarked", ra.out_watermarked, "compensated watermarked image");

  CodecArgs ca;
  auto* codec_cmd = app.add_subcommand("codec", "standalone difference-plane codec");
  codec_cmd->require_subcommand(1);
  auto* enc_cmd = codec_cmd->add_subcommand("encode", "DIFF -> packet");
  enc_cmd->add_option("--in", ca.in, "DIFF file")->required();
  enc_cmd->add_option("--out", ca.out, "packet file")->required();
  enc_cmd->add_option("--qp", ca.qp, "quantization parameter");
  enc_cmd->add_option("--mu", ca.mu, "auto or a fixed value");
  enc_cmd->add_option("--recon", ca.recon, "write the encoder reconstruction as DIFF");
  auto* dec_cmd = codec_cmd->add_subcommand("decode", "packet -> DIFF");
  dec_cmd->add_option("--in", ca.in, "packet file")->required();
  dec_cmd->add_option("--out", ca.out, "DIFF file")->required();

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "rate-distortion sweep over a corpus");
  bench_cmd->add_option("--corpus", ba.corpus, "directory holding corpus.txt")->required();
  bench_cmd->add_option("--mu", ba.mu, "comma-separated mu values");
  bench_cmd->add_option("--qp", ba.qp, "comma-separated qp values");
  bench_cmd->add_option("--out", ba.out, "CSV path")->required();

  std::string va, vb;
  auto* verify_cmd = app.add_subcommand("verify", "exit 0 when two images hold identical samples");
  verify_cmd->add_option("first", va)->required();
  verify_cmd->add_option("second", vb)->required();

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic corpus");
  synth_cmd->add_option("--out", sa.out, "output directory")->required();
  synth_cmd->add_option("--count", sa.count);
  synth_cmd->add_option("--size", sa.size, "host side length");
  synth_cmd->add_option("--logo", sa.logo, "logo side length");
  synth_cmd->add_option("--alpha", sa.alpha);
  synth_cmd->add_option("--seed", sa.seed);
  synth_cmd->add_flag("--color", sa.color);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*embed_cmd) return cmd_embed(ea, out, err);
    if (*restore_cmd) return cmd_restore(ra);
    if (*enc_cmd) return cmd_codec_encode(ca, out);
    if (*dec_cmd) return cmd_codec_decode(ca);
    if (*bench_cmd) return cmd_bench(ba, out);
    if (*verify_cmd) return cmd_verify(va, vb, out);
    if (*synth_cmd) return cmd_synth(sa, out);
  } catch (const Exit& e) {
    err << "error: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace rvw::cli
