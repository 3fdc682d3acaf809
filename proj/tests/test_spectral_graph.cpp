#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rvw/spectral_graph.hpp"

using namespace rvw;

namespace {

std::vector<double> random_vector(std::mt19937& rng, int n, double lo = -50, double hi = 50) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Independent edge-sum form of the regularizer: each unordered pair once.
double edge_sum(const std::vector<double>& x, const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = i + 1; j < a.cols(); ++j) s += a(i, j) * (x[i] - x[j]) * (x[i] - x[j]);
  }
  return s;
}

}  // namespace

TEST(BuildBlockGraph, ConstantBlockIsComplete) {
  const std::vector<double> block(5, 3.0);
  const auto g = build_block_graph(block, 2.0);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(g.adjacency(i, i), 0.0);
    for (int j = 0; j < 5; ++j) {
      if (i != j) EXPECT_EQ(g.adjacency(i, j), 1.0);
    }
    EXPECT_NEAR(g.laplacian.row(i).sum(), 0.0, 1e-12);
  }
}

TEST(BuildBlockGraph, TwoVertexKernel) {
  const double sigma = 3.5;
  const auto g = build_block_graph(std::vector<double>{0.0, sigma}, sigma);
  const double a = std::exp(-1.0);
  EXPECT_NEAR(g.adjacency(0, 1), 0.36787944117144233, 1e-15);
  EXPECT_NEAR(g.adjacency(0, 1), a, 1e-15);
  EXPECT_NEAR(g.laplacian(0, 0), a, 1e-15);
  EXPECT_NEAR(g.laplacian(0, 1), -a, 1e-15);
  EXPECT_NEAR(g.laplacian(1, 0), -a, 1e-15);
  EXPECT_NEAR(g.laplacian(1, 1), a, 1e-15);
}

TEST(BuildBlockGraph, WeightDecreasesWithDistance) {
  double prev = 2.0;
  for (double d = 0.0; d < 20.0; d += 0.5) {
    const auto g = build_block_graph(std::vector<double>{0.0, d}, 4.0);
    EXPECT_LE(g.adjacency(0, 1), prev);
    prev = g.adjacency(0, 1);
  }
  EXPECT_LT(prev, 1e-9);
}

TEST(BuildBlockGraph, InvalidSigma) {
  for (double s : {0.0, -1.0}) {
    try {
      build_block_graph(std::vector<double>{1, 2}, s);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidSigma);
    }
  }
}

TEST(Glr, Examples) {
  Eigen::MatrixXd a(2, 2);
  a << 0, 2, 2, 0;
  const auto g = graph_from_adjacency(a);
  EXPECT_DOUBLE_EQ(glr(std::vector<double>{3, 1}, g), 8.0);
  EXPECT_NEAR(glr(std::vector<double>{4, 4}, g), 0.0, 1e-15);
  EXPECT_THROW(glr(std::vector<double>{1, 2, 3}, g), Error);
}

TEST(Glr, QuadraticFormMatchesEdgeSum) {
  std::mt19937 rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto block = random_vector(rng, 8);
    const auto g = build_block_graph(block, 10.0);
    const auto x = random_vector(rng, 8);
    const double expected = edge_sum(x, g.adjacency);
    EXPECT_NEAR(glr(x, g), expected, 1e-9 * std::max(1.0, expected));
    EXPECT_GE(glr(x, g), 0.0);
  }
}

TEST(GftBasis, TwoVertexHandDecomposition) {
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  const auto b = gft_basis(graph_from_adjacency(a));
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(b.eigenvalues(0), 0.0, 1e-12);
  EXPECT_NEAR(b.eigenvalues(1), 2.0, 1e-12);
  EXPECT_NEAR(b.eigenvectors(0, 0), r, 1e-12);
  EXPECT_NEAR(b.eigenvectors(1, 0), r, 1e-12);
  EXPECT_NEAR(b.eigenvectors(0, 1), r, 1e-12);
  EXPECT_NEAR(b.eigenvectors(1, 1), -r, 1e-12);

  const auto c = gft_forward(std::vector<double>{5.0, 1.0}, b);
  EXPECT_NEAR(c[0], 6.0 * r, 1e-12);
  EXPECT_NEAR(c[1], 4.0 * r, 1e-12);
}

TEST(GftBasis, DisconnectedGraphHasDoubleZero) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 1) = a(1, 0) = 1.0;
  a(2, 3) = a(3, 2) = 2.0;
  const auto b = gft_basis(graph_from_adjacency(a));
  EXPECT_NEAR(b.eigenvalues(0), 0.0, 1e-12);
  EXPECT_NEAR(b.eigenvalues(1), 0.0, 1e-12);
  EXPECT_GT(b.eigenvalues(2), 0.5);
}

TEST(GftBasis, InvariantsOnRandomGraphs) {
  std::mt19937 rng(9);
  for (int t = 0; t < 100; ++t) {
    const auto g = build_block_graph(random_vector(rng, 16), 15.0);
    const auto b = gft_basis(g);
    EXPECT_NEAR(b.eigenvalues(0), 0.0, 1e-8);
    for (int i = 1; i < b.size(); ++i) EXPECT_LE(b.eigenvalues(i - 1), b.eigenvalues(i));
    const Eigen::MatrixXd& u = b.eigenvectors;
    EXPECT_LT((u.transpose() * u - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((u * b.eigenvalues.asDiagonal() * u.transpose() - g.laplacian).cwiseAbs().maxCoeff(), 1e-8);
    Eigen::MatrixXd d = u.transpose() * g.laplacian * u;
    d.diagonal().setZero();
    EXPECT_LT(d.cwiseAbs().maxCoeff(), 1e-8);
    for (int c = 0; c < b.size(); ++c) {
      for (int r = 0; r < b.size(); ++r) {
        if (std::abs(u(r, c)) > 1e-12) {
          EXPECT_GT(u(r, c), 0.0);
          break;
        }
      }
    }
  }
}

TEST(Gft, ForwardInverseAndParseval) {
  std::mt19937 rng(21);
  for (int t = 0; t < 100; ++t) {
    const auto b = gft_basis(build_block_graph(random_vector(rng, 8), 20.0));
    const auto x = random_vector(rng, 8);
    const auto c = gft_forward(x, b);
    double ex = 0, ec = 0;
    for (int i = 0; i < 8; ++i) {
      ex += x[i] * x[i];
      ec += c[i] * c[i];
    }
    EXPECT_NEAR(std::sqrt(ec), std::sqrt(ex), 1e-9 * std::sqrt(ex));
    const auto back = gft_inverse(c, b);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(back[i], x[i], 1e-9);
  }
}

TEST(Gft, ConstantSignalAndZeros) {
  std::mt19937 rng(2);
  const auto b = gft_basis(build_block_graph(random_vector(rng, 9), 30.0));
  const auto c = gft_forward(std::vector<double>(9, 2.5), b);
  EXPECT_NEAR(c[0], 2.5 * 3.0, 1e-9);
  for (int i = 1; i < 9; ++i) EXPECT_NEAR(c[i], 0.0, 1e-9);

  for (double v : gft_inverse(std::vector<double>(9, 0.0), b)) EXPECT_EQ(v, 0.0);
  std::vector<double> e1(9, 0.0);
  e1[0] = 3.0;
  for (double v : gft_inverse(e1, b)) EXPECT_NEAR(v, 1.0, 1e-9);
  EXPECT_THROW(gft_forward(std::vector<double>(4, 0.0), b), Error);
}

TEST(SmoothBlock, ClosedFormResidualAndMonotoneRegularizer) {
  std::mt19937 rng(13);
  for (int t = 0; t < 200; ++t) {
    const auto d = random_vector(rng, 64, -255, 255);
    const double mu = std::pow(10.0, std::uniform_real_distribution<double>(-4, 0)(rng));
    const auto s = smooth_block(d, mu, 1.0);
    Eigen::MatrixXd sys = mu * s.graph.laplacian;
    sys.diagonal().array() += 1.0;
    const Eigen::Map<const Eigen::VectorXd> dv(d.data(), 64);
    EXPECT_LT((sys * s.solution - dv).cwiseAbs().maxCoeff(), 1e-7);
    const std::vector<double> sol(s.solution.data(), s.solution.data() + 64);
    EXPECT_LE(glr(sol, s.graph), glr(d, s.graph) + 1e-9);
  }
}

TEST(SmoothBlock, LocalOptimality) {
  std::mt19937 rng(17);
  std::normal_distribution<double> n01(0.0, 1.0);
  const double mu = 0.01;
  const auto d = random_vector(rng, 64, -100, 100);
  const auto s = smooth_block(d, mu, 1.0);
  auto objective = [&](const std::vector<double>& x) {
    double f = 0.0;
    for (int i = 0; i < 64; ++i) f += (d[i] - x[i]) * (d[i] - x[i]);
    return f + mu * glr(x, s.graph);
  };
  const std::vector<double> sol(s.solution.data(), s.solution.data() + 64);
  const double best = objective(sol);
  for (int t = 0; t < 100; ++t) {
    auto p = sol;
    for (auto& v : p) v += 1e-3 * n01(rng);
    EXPECT_LE(best, objective(p));
  }
}

TEST(GlrSmooth, MuZeroIsIdentityAndConstantIsFixed) {
  std::mt19937 rng(4);
  Raster<std::int16_t> d(19, 13);
  std::uniform_int_distribution<int> u(-255, 255);
  for (auto& v : d.samples()) v = static_cast<std::int16_t>(u(rng));
  const auto same = glr_smooth(d, SmoothingParams{0.0});
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(same.samples()[i], d.samples()[i]);

  Raster<std::int16_t> c(12, 9, 37);
  for (double mu : {0.0001, 0.1, 1.0}) {
    const auto out = glr_smooth(c, SmoothingParams{mu});
    for (double v : out.samples()) EXPECT_NEAR(v, 37.0, 1e-9);
  }
}

TEST(GlrSmooth, SmallPlanesAndShape) {
  Raster<std::int16_t> tiny(3, 2, std::vector<std::int16_t>{0, 100, 0, 100, 0, 100});
  const auto out = glr_smooth(tiny, SmoothingParams{0.1});
  EXPECT_EQ(out.width(), 3);
  EXPECT_EQ(out.height(), 2);
}

TEST(GlrSmooth, ReducesVariationButKeepsMean) {
  std::mt19937 rng(8);
  Raster<std::int16_t> d(24, 24);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 24; ++x) d(x, y) = static_cast<std::int16_t>(std::lround((x < 12 ? 0 : 80) + n(rng)));
  }
  const auto s = glr_smooth(d, SmoothingParams{1.0});
  double tv_in = 0, tv_out = 0;
  for (int y = 0; y < 24; ++y) {
    for (int x = 1; x < 12; ++x) {
      tv_in += std::abs(d(x, y) - d(x - 1, y));
      tv_out += std::abs(s(x, y) - s(x - 1, y));
    }
  }
  EXPECT_LT(tv_out, tv_in);
  // most of the 80-level step survives smoothing
  EXPECT_GT(s(13, 12) - s(10, 12), 40.0);
}

TEST(SmoothingParams, Validation) {
  EXPECT_THROW((SmoothingParams{-1.0}.validate()), Error);
  EXPECT_THROW((SmoothingParams{0.1, 1}.validate()), Error);
  EXPECT_THROW((SmoothingParams{0.1, 8, 9}.validate()), Error);
  EXPECT_NO_THROW(SmoothingParams{}.validate());
}
