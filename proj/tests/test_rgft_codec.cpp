#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "rvw/contour.hpp"
#include "rvw/entropy.hpp"
#include "rvw/intra.hpp"
#include "rvw/range_coder.hpp"
#include "rvw/rgft_codec.hpp"
#include "rvw/transform.hpp"

using namespace rvw;

namespace {

DifferencePlane random_diff(std::mt19937& rng, int w, int h, int lo = -255, int hi = 255) {
  DifferencePlane d(w, h);
  std::uniform_int_distribution<int> u(lo, hi);
  for (auto& v : d.samples()) v = static_cast<std::int16_t>(u(rng));
  return d;
}

// Two flat regions split by a diagonal, with optional mild noise.
DifferencePlane piecewise_diff(int w, int h, int a, int b, std::mt19937* rng = nullptr) {
  DifferencePlane d(w, h);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = (x + y < (w + h) / 2) ? a : b;
      if (rng) v += n(*rng);
      d(x, y) = static_cast<std::int16_t>(std::clamp<long>(std::lround(v), -255, 255));
    }
  }
  return d;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

// ---- parameters --------------------------------------------------------

TEST(LambdaFromQp, Values) {
  EXPECT_DOUBLE_EQ(lambda_from_qp(6), 0.85);
  EXPECT_NEAR(lambda_from_qp(9), 1.70, 1e-12);
  EXPECT_NEAR(lambda_from_qp(28), 0.85 * std::cbrt(std::pow(2.0, 22.0)), 1e-9);
  EXPECT_NEAR(lambda_from_qp(28), 137.078, 0.01);
  EXPECT_EQ(code_of([] { lambda_from_qp(52); }), ErrorCode::kQpOutOfRange);
  EXPECT_EQ(code_of([] { lambda_from_qp(-1); }), ErrorCode::kQpOutOfRange);
}

TEST(Quantize, Examples) {
  EXPECT_DOUBLE_EQ(quant_step(4), 1.0);
  const std::vector<double> c = {0.0, 2.4, -2.5, 2.5, -0.49};
  const auto q = quantize(c, 4);
  EXPECT_EQ(q, (std::vector<std::int32_t>{0, 2, -3, 3, 0}));
  const auto r = dequantize(q, 4);
  EXPECT_DOUBLE_EQ(r[1], 2.0);
  EXPECT_DOUBLE_EQ(r[0], 0.0);
}

TEST(Quantize, ErrorBoundedByHalfStep) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-2000, 2000);
  for (int qp : {0, 10, 22, 28, 36, 51}) {
    std::vector<double> c(500);
    for (auto& v : c) v = u(rng);
    const auto r = dequantize(quantize(c, qp), qp);
    const double step = std::pow(2.0, (qp - 4) / 6.0);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_LE(std::abs(c[i] - r[i]), step / 2 + 1e-9);
  }
}

TEST(Quantize, OverflowIsReported) {
  const std::vector<double> huge = {1e9};
  EXPECT_EQ(code_of([&] { quantize(huge, 0); }), ErrorCode::kEncodeOverflow);
}

// ---- transforms --------------------------------------------------------

TEST(Transform, ZeroAndConstantBlocks) {
  const std::vector<double> zero(64, 0.0);
  for (int k = 0; k < kChoiceCount; ++k) {
    for (double v : transform_block(zero, TransformChoice::from_index(k))) EXPECT_EQ(v, 0.0);
  }
  const std::vector<double> constant(64, 5.0);
  const auto dct = transform_block(constant, TransformChoice::dct());
  ASSERT_EQ(dct.size(), 64u);
  EXPECT_NEAR(dct[0], 40.0, 1e-9);
  for (int i = 1; i < 64; ++i) EXPECT_NEAR(dct[i], 0.0, 1e-9);
  for (int t = 0; t < kTemplateCount; ++t) {
    const auto g = transform_block(constant, TransformChoice::gft(t));
    ASSERT_EQ(g.size(), 16u);
    EXPECT_NEAR(g[0], 20.0, 1e-9);
    for (int i = 1; i < 16; ++i) EXPECT_NEAR(g[i], 0.0, 1e-9);
  }
  EXPECT_EQ(code_of([&] { transform_block(constant, TransformChoice::gft(4)); }), ErrorCode::kBadTemplate);
}

TEST(Transform, DctMatchesDirectSum) {
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(-100, 100);
  std::vector<double> b(64);
  for (auto& v : b) v = u(rng);
  const auto c = dct_forward(b);
  const double pi = std::acos(-1.0);
  for (int v = 0; v < 8; ++v) {
    for (int uu = 0; uu < 8; ++uu) {
      double s = 0.0;
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          s += b[y * 8 + x] * std::cos((2 * x + 1) * uu * pi / 16) * std::cos((2 * y + 1) * v * pi / 16);
        }
      }
      const double cu = uu == 0 ? std::sqrt(1.0 / 8) : std::sqrt(2.0 / 8);
      const double cv = v == 0 ? std::sqrt(1.0 / 8) : std::sqrt(2.0 / 8);
      EXPECT_NEAR(c[v * 8 + uu], cu * cv * s, 1e-9);
    }
  }
  const auto back = dct_inverse(c);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(back[i], b[i], 1e-9);
}

TEST(Transform, TemplateBankIsOrthonormal) {
  for (const auto& basis : template_bank()) {
    const Eigen::MatrixXd& u = basis.eigenvectors;
    EXPECT_LT((u.transpose() * u - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(basis.eigenvalues(0), 0.0, 1e-8);
  }
  // templates 1..3 cut the grid, so their second frequency is tiny
  EXPECT_GT(template_bank()[0].eigenvalues(1), 0.1);
  for (int t = 1; t < kTemplateCount; ++t) EXPECT_LT(template_bank()[t].eigenvalues(1), 0.05);
}

// ---- contours ----------------------------------------------------------

TEST(Contours, ConstantPlaneHasNone) {
  const auto map = detect_contours(RealPlane(12, 9, 7.0));
  EXPECT_TRUE(map.chains.empty());
  for (auto f : map.flags.samples()) EXPECT_EQ(f, 0);
}

TEST(Contours, VerticalStepGivesOneStraightChain) {
  RealPlane p(16, 12, 0.0);
  for (int y = 0; y < 12; ++y) {
    for (int x = 9; x < 16; ++x) p(x, y) = 32.0;
  }
  const auto map = detect_contours(p);
  // brute force: flagged exactly where the forward difference exceeds 16
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 16; ++x) EXPECT_EQ(map.flagged(x, y), x == 8) << x << "," << y;
  }
  ASSERT_EQ(map.chains.size(), 1u);
  EXPECT_EQ(map.chains[0].x, 8);
  EXPECT_EQ(map.chains[0].y, 0);
  EXPECT_EQ(map.chains[0].moves, std::vector<std::uint8_t>(11, 2));
}

TEST(Contours, ChainsReproduceFlags) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(0, 60);
  for (int t = 0; t < 50; ++t) {
    RealPlane p(20 + t % 7, 15 + t % 5);
    for (auto& v : p.samples()) v = u(rng);
    const auto map = detect_contours(p);
    EXPECT_EQ(render_chains(p.width(), p.height(), map.chains), map.flags);
    const auto back = decode_contours(encode_contours(map), p.width(), p.height());
    EXPECT_EQ(back.flags, map.flags);
    EXPECT_EQ(back.chains, map.chains);
  }
}

TEST(Contours, StreamExamples) {
  ContourMap empty{Raster<std::uint8_t>(10, 10, 0), {}};
  const auto bytes = encode_contours(empty);
  EXPECT_LE(bytes.size(), 3u);
  EXPECT_EQ(decode_contours(bytes, 10, 10).flags, empty.flags);

  Chain c{2, 3, {0, 0, 1, 2, 2, 3, 4, 4, 0, 7}};
  ContourMap one{render_chains(20, 20, std::vector<Chain>{c}), {c}};
  const auto back = decode_contours(encode_contours(one), 20, 20);
  EXPECT_EQ(back.chains, one.chains);
  EXPECT_EQ(back.flags, one.flags);

  std::mt19937 rng(3);
  std::vector<Chain> chains;
  for (int i = 0; i < 5; ++i) {
    Chain ch{static_cast<int>(rng() % 10) + 10, static_cast<int>(rng() % 10) + 10, {}};
    for (int m = 0; m < 8; ++m) ch.moves.push_back(static_cast<std::uint8_t>(rng() % 8));
    chains.push_back(ch);
  }
  ContourMap five{render_chains(32, 32, chains), chains};
  const auto back5 = decode_contours(encode_contours(five), 32, 32);
  EXPECT_EQ(back5.chains, chains);
  EXPECT_EQ(back5.flags, five.flags);
}

TEST(Contours, CorruptStreamsRaise) {
  ByteWriter w;
  w.varint(1000);
  EXPECT_EQ(code_of([&] { decode_contours(w.take(), 4, 4); }), ErrorCode::kCorruptStream);
  Chain c{0, 0, {0, 0, 0}};
  ContourMap m{render_chains(8, 8, std::vector<Chain>{c}), {c}};
  auto bytes = encode_contours(m);
  bytes.resize(1);
  EXPECT_THROW(decode_contours(bytes, 8, 8), Error);
  // a chain that leaves the plane
  Chain out{7, 7, {0}};
  EXPECT_EQ(code_of([&] { render_chains(8, 8, std::vector<Chain>{out}); }), ErrorCode::kCorruptStream);
}

// ---- intra prediction --------------------------------------------------

namespace {

// Oracle: plain per-source BFS over the block; a pixel may take the value
// of any source at minimal path length, and 0 when unreachable.
std::vector<std::vector<int>> allowed_values(int ox, int oy, const Raster<int>& recon, const ContourMap& cm) {
  struct Src {
    int x, y, v;
  };
  std::vector<Src> sources;
  if (oy > 0) {
    for (int i = 0; i < 8; ++i) sources.push_back({ox + i, oy - 1, recon(ox + i, oy - 1)});
  }
  if (ox > 0) {
    for (int i = 0; i < 8; ++i) sources.push_back({ox - 1, oy + i, recon(ox - 1, oy + i)});
  }
  const int inf = std::numeric_limits<int>::max();
  std::vector<int> best(64, inf);
  std::vector<std::vector<int>> values(64);
  for (const auto& s : sources) {
    std::vector<int> dist(64, inf);
    std::deque<std::pair<int, int>> q;
    const int dx[4] = {1, 0, -1, 0}, dy[4] = {0, 1, 0, -1};
    auto visit = [&](int fx, int fy, int d) {
      for (int k = 0; k < 4; ++k) {
        const int nx = fx + dx[k], ny = fy + dy[k];
        if (nx < ox || ny < oy || nx >= ox + 8 || ny >= oy + 8) continue;
        const int idx = (ny - oy) * 8 + (nx - ox);
        if (dist[idx] != inf) continue;
        if (cm.flagged(fx, fy) != cm.flagged(nx, ny)) continue;
        dist[idx] = d + 1;
        q.push_back({nx, ny});
      }
    };
    visit(s.x, s.y, 0);
    while (!q.empty()) {
      auto [x, y] = q.front();
      q.pop_front();
      visit(x, y, dist[(y - oy) * 8 + (x - ox)]);
    }
    for (int i = 0; i < 64; ++i) {
      if (dist[i] < best[i]) {
        best[i] = dist[i];
        values[i] = {s.v};
      } else if (dist[i] != inf && dist[i] == best[i]) {
        values[i].push_back(s.v);
      }
    }
  }
  for (int i = 0; i < 64; ++i) {
    if (values[i].empty()) values[i] = {0};
  }
  return values;
}

}  // namespace

TEST(IntraPredict, FirstBlockAndConstantNeighbours) {
  Raster<int> recon(24, 24, 0);
  ContourMap none{Raster<std::uint8_t>(24, 24, 0), {}};
  for (int v : intra_predict(0, 0, recon, none)) EXPECT_EQ(v, 0);
  for (int i = 0; i < 24; ++i) {
    recon(i, 7) = 42;
    recon(7, i) = 42;
  }
  for (int v : intra_predict(8, 8, recon, none)) EXPECT_EQ(v, 42);
}

TEST(IntraPredict, VerticalContourSplitsPrediction) {
  Raster<int> recon(24, 24, 0);
  const int a = -30, b = 55;
  for (int i = 0; i < 24; ++i) recon(7, i) = a;
  for (int x = 8; x < 12; ++x) recon(x, 7) = a;
  for (int x = 12; x < 16; ++x) recon(x, 7) = b;
  ContourMap cm{Raster<std::uint8_t>(24, 24, 0), {}};
  for (int y = 0; y < 24; ++y) cm.flags(12, y) = 1;
  const auto pred = intra_predict(8, 8, recon, cm);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      if (x < 4) EXPECT_EQ(pred[y * 8 + x], a) << x << "," << y;
      if (x > 4) EXPECT_EQ(pred[y * 8 + x], b) << x << "," << y;
    }
  }
}

TEST(IntraPredict, MatchesShortestPathOracle) {
  std::mt19937 rng(44);
  std::uniform_int_distribution<int> val(-255, 255);
  for (int t = 0; t < 300; ++t) {
    Raster<int> recon(24, 24);
    for (auto& v : recon.samples()) v = val(rng);
    ContourMap cm{Raster<std::uint8_t>(24, 24, 0), {}};
    const double density = (t % 4) * 0.12;
    for (auto& f : cm.flags.samples()) f = std::uniform_real_distribution<double>(0, 1)(rng) < density;
    const int ox = 8 * static_cast<int>(rng() % 3), oy = 8 * static_cast<int>(rng() % 3);
    const auto pred = intra_predict(ox, oy, recon, cm);
    const auto allowed = allowed_values(ox, oy, recon, cm);
    for (int i = 0; i < 64; ++i) {
      EXPECT_NE(std::find(allowed[i].begin(), allowed[i].end(), pred[i]), allowed[i].end())
          << "trial " << t << " pixel " << i;
    }
  }
}

TEST(Upsample, SmoothAndContourAware) {
  ContourMap none{Raster<std::uint8_t>(8, 8, 0), {}};
  std::vector<double> low(16);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) low[y * 4 + x] = 2.0 * x;  // residual = x at even x
  }
  const auto r = upsample_residual(low, 0, 0, none);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 7; ++x) EXPECT_NEAR(r[y * 8 + x], 2.0 * (x / 2) + (x % 2), 1e-12);
    EXPECT_NEAR(r[y * 8 + 7], 6.0, 1e-12);  // right edge copies its only neighbour
  }
}

// ---- entropy coding ----------------------------------------------------

TEST(Entropy, RoundTripsRandomLevels) {
  std::mt19937 rng(31);
  std::vector<CodedBlock> blocks;
  for (int i = 0; i < 300; ++i) {
    CodedBlock b;
    b.choice = TransformChoice::from_index(static_cast<int>(rng() % kChoiceCount));
    b.levels.assign(b.choice.coefficient_count(), 0);
    const int mode = static_cast<int>(rng() % 3);
    for (auto& l : b.levels) {
      if (mode == 0) continue;
      if (rng() % 4 == 0) l = static_cast<std::int32_t>(rng() % 2001) - 1000;
      if (mode == 2 && rng() % 50 == 0) l = kMaxLevel * (rng() % 2 ? 1 : -1);
    }
    blocks.push_back(b);
  }
  const auto s = entropy_encode(blocks);
  EXPECT_EQ(entropy_decode(s.choices, s.coefficients, blocks.size()), blocks);
}

TEST(Entropy, AllZeroBlocksAreCheap) {
  std::vector<CodedBlock> blocks(100, CodedBlock{TransformChoice::dct(), std::vector<std::int32_t>(64, 0)});
  const auto s = entropy_encode(blocks);
  // under one bit per block once the two 5-byte coder flushes are paid
  EXPECT_LT((s.choices.size() + s.coefficients.size() - 10) * 8, 100u);
  EXPECT_EQ(entropy_decode(s.choices, s.coefficients, 100), blocks);
}

TEST(Entropy, SingleNonzeroLevel) {
  for (int sign : {1, -1}) {
    CodedBlock b{TransformChoice::gft(2), std::vector<std::int32_t>(16, 0)};
    b.levels[9] = sign * 77;
    const auto s = entropy_encode(std::vector<CodedBlock>{b});
    const auto back = entropy_decode(s.choices, s.coefficients, 1);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0], b);
  }
}

TEST(Entropy, EstimateTracksActualSize) {
  std::mt19937 rng(8);
  std::vector<CodedBlock> blocks;
  for (int i = 0; i < 400; ++i) {
    CodedBlock b{TransformChoice::dct(), std::vector<std::int32_t>(64, 0)};
    for (int k = 0; k < 6; ++k) b.levels[k] = static_cast<std::int32_t>(rng() % 9) - 4;
    blocks.push_back(b);
  }
  BlockModels models;
  RangeEncoder ce, ke;
  double estimate = 0.0;
  for (const auto& b : blocks) {
    estimate += models.estimate_bits(b);
    models.encode(ce, ke, b);
  }
  const double actual = 8.0 * static_cast<double>(ce.finish().size() + ke.finish().size());
  EXPECT_NEAR(estimate, actual, 0.05 * actual + 64);
}

TEST(RangeCoder, BypassAndModelledBitsRoundTrip) {
  std::mt19937 rng(77);
  std::vector<int> bits(5000);
  for (auto& b : bits) b = (rng() % 10) < 2;
  RangeEncoder enc;
  BitModel m;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (i % 3 == 0) {
      enc.encode_bypass(bits[i]);
    } else {
      enc.encode(m, bits[i]);
    }
  }
  const auto bytes = enc.finish();
  RangeDecoder dec(bytes);
  BitModel m2;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    EXPECT_EQ(i % 3 == 0 ? dec.decode_bypass() : dec.decode(m2), bits[i]);
  }
  // a skewed source compresses
  EXPECT_LT(bytes.size() * 8, bits.size());
}

// ---- packet & codec ----------------------------------------------------

TEST(RdCost, Examples) {
  DifferencePlane a(2, 2), b(2, 2);
  auto c = rd_cost(a, b, 100, 2.0);
  EXPECT_DOUBLE_EQ(c.cost, 200.0);
  b(1, 1) = 3;
  c = rd_cost(a, b, 0, 2.0);
  EXPECT_DOUBLE_EQ(c.cost, 9.0);
  EXPECT_LT(rd_cost(a, b, 10, 2.0).cost, rd_cost(a, b, 11, 2.0).cost);
  EXPECT_EQ(code_of([&] { rd_cost(a, DifferencePlane(3, 2), 0, 1.0); }), ErrorCode::kDimensionMismatch);
}

TEST(Codec, ZeroPlane) {
  const DifferencePlane zero(40, 24);
  const auto r = encode(zero, {0, 0, 40, 24}, {});
  EXPECT_EQ(r.reconstructed, zero);
  const auto bytes = r.packet.serialize();
  EXPECT_LE(bytes.size(), 64u + 40u);
  EXPECT_EQ(decode(bytes), zero);
  EXPECT_EQ(r.cost.rate_bits, bytes.size() * 8);
}

TEST(Codec, RoundTripAndRateAccounting) {
  std::mt19937 rng(19);
  for (int t = 0; t < 30; ++t) {
    const int w = 8 + static_cast<int>(rng() % 60), h = 8 + static_cast<int>(rng() % 60);
    const DifferencePlane d = t % 2 ? random_diff(rng, w, h) : piecewise_diff(w, h, -40, 90, &rng);
    CodecParams p;
    p.qp = 20 + static_cast<int>(rng() % 25);
    const auto r = encode(d, {3, 5, w, h}, p);
    const auto bytes = r.packet.serialize();
    EXPECT_EQ(r.cost.rate_bits, bytes.size() * 8);
    EXPECT_EQ(r.packet.bit_length(), bytes.size() * 8);
    EXPECT_EQ(decode(bytes), r.reconstructed);
    EXPECT_NEAR(r.cost.distortion, ssd(d, r.reconstructed), 1e-9);
    EXPECT_DOUBLE_EQ(r.cost.cost, r.cost.distortion + r.cost.lambda * static_cast<double>(r.cost.rate_bits));
    const auto parsed = CodedPacket::parse(bytes);
    EXPECT_EQ(parsed.roi, (Roi{3, 5, w, h}));
    EXPECT_EQ(parsed.qp, p.qp);
    EXPECT_EQ(parsed.mu_index, r.mu_index);
  }
}

TEST(Codec, ControllerPicksCheapestMuAndNeverRegresses) {
  std::mt19937 rng(5);
  for (int t = 0; t < 6; ++t) {
    const auto d = piecewise_diff(48, 40, -20 - t * 10, 60 + t * 5, &rng);
    const auto r = encode(d, {0, 0, 48, 40}, {});
    ASSERT_FALSE(r.trace.empty());
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& round : r.trace) {
      ASSERT_EQ(round.sweep_costs.size(), 5u);
      const double lowest = *std::min_element(round.sweep_costs.begin(), round.sweep_costs.end());
      EXPECT_DOUBLE_EQ(round.cost, lowest);
      EXPECT_DOUBLE_EQ(round.sweep_costs[round.chosen_mu_index], lowest);
      EXPECT_LE(round.cost, prev);
      prev = round.cost;
    }
    EXPECT_DOUBLE_EQ(r.cost.cost, r.trace.back().cost);
    EXPECT_EQ(r.mu_index, r.trace.back().chosen_mu_index);
    EXPECT_LE(r.alternation_rounds, 4);
  }
}

TEST(Codec, PiecewiseConstantPlaneCompresses) {
  const auto d = piecewise_diff(128, 128, 0, 40);
  const auto r = encode(d, {0, 0, 128, 128}, {});
  EXPECT_LT(static_cast<double>(r.packet.bit_length()), 0.2 * 131072);
  EXPECT_EQ(decode(r.packet.serialize()), r.reconstructed);
}

TEST(Codec, OutputsStayInRange) {
  std::mt19937 rng(2);
  const auto d = random_diff(rng, 32, 32, 200, 255);
  CodecParams p;
  p.qp = 51;
  const auto r = encode(d, {0, 0, 32, 32}, p);
  for (auto v : r.reconstructed.samples()) {
    EXPECT_GE(v, -255);
    EXPECT_LE(v, 255);
  }
}

TEST(Codec, CorruptPacketsRaise) {
  std::mt19937 rng(23);
  const auto d = piecewise_diff(24, 24, -50, 50, &rng);
  const auto bytes = encode(d, {0, 0, 24, 24}, {}).packet.serialize();

  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  EXPECT_EQ(code_of([&] { decode(truncated); }), ErrorCode::kCorruptStream);

  auto bad_crc = bytes;
  bad_crc.back() ^= 0x01;
  EXPECT_EQ(code_of([&] { decode(bad_crc); }), ErrorCode::kCrcMismatch);

  auto bad_version = bytes;
  bad_version[4] = 9;
  const std::uint32_t crc = crc32_of(std::span(bad_version.data(), bad_version.size() - 4));
  for (int i = 0; i < 4; ++i) bad_version[bad_version.size() - 4 + i] = static_cast<std::uint8_t>(crc >> (8 * i));
  EXPECT_EQ(code_of([&] { decode(bad_version); }), ErrorCode::kUnsupportedVersion);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode(bad_magic), Error);
}

TEST(Codec, ParamValidation) {
  CodecParams p;
  p.qp = 60;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::kQpOutOfRange);
  p = {};
  p.mu_grid = {0.1, 0.1};
  EXPECT_THROW(p.validate(), Error);
  p.mu_grid = {};
  EXPECT_THROW(p.validate(), Error);
  EXPECT_EQ(code_of([] { encode(DifferencePlane(4, 4), {0, 0, 5, 4}, {}); }), ErrorCode::kDimensionMismatch);
}

TEST(Codec, Deterministic) {
  std::mt19937 rng(99);
  const auto d = random_diff(rng, 37, 21, -60, 60);
  EXPECT_EQ(encode(d, {0, 0, 37, 21}, {}).packet.serialize(), encode(d, {0, 0, 37, 21}, {}).packet.serialize());
}
