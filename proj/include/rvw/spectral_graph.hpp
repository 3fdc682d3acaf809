#pragma once

// Dense per-block graphs: combinatorial Laplacian, the graph Laplacian
// regularizer x'Lx, the graph Fourier transform, and GLR-regularized
// smoothing of a difference plane over overlapping blocks.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rvw/error.hpp"
#include "rvw/image.hpp"
#include "rvw/parallel.hpp"

namespace rvw {

struct BlockGraph {
  int n = 0;
  Eigen::MatrixXd adjacency;
  Eigen::MatrixXd laplacian;
};

struct GftBasis {
  Eigen::VectorXd eigenvalues;   // ascending graph frequencies
  Eigen::MatrixXd eigenvectors;  // orthonormal, one column per frequency
  int size() const { return static_cast<int>(eigenvalues.size()); }
};

struct SmoothingParams {
  double mu = 0.001;
  int block_size = 8;
  int step = 2;
  double sigma_floor = 1.0;

  void validate() const {
    if (block_size < 2) fail(ErrorCode::kInvalidArgument, "block_size < 2");
    if (step < 1 || step > block_size) {
      fail(ErrorCode::kInvalidArgument, "step must lie in 1..block_size");
    }
    if (!(mu >= 0.0) || !std::isfinite(mu)) {
      fail(ErrorCode::kInvalidArgument, "mu must be a finite value >= 0");
    }
    if (!(sigma_floor > 0.0)) {
      fail(ErrorCode::kInvalidSigma, "sigma_floor must be positive");
    }
  }
};

// L = D - A. The adjacency must be symmetric, nonnegative, zero-diagonal.
inline BlockGraph graph_from_adjacency(Eigen::MatrixXd adjacency) {
  const auto n = adjacency.rows();
  if (n != adjacency.cols() || n < 1) {
    fail(ErrorCode::kDimensionMismatch, "adjacency must be square");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) {
      fail(ErrorCode::kInvalidArgument, "adjacency diagonal must be zero");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adjacency(i, j) < 0.0 || adjacency(i, j) != adjacency(j, i)) {
        fail(ErrorCode::kInvalidArgument,
             "adjacency must be symmetric and nonnegative");
      }
    }
  }
  BlockGraph g;
  g.n = static_cast<int>(n);
  g.laplacian = -adjacency;
  for (Eigen::Index i = 0; i < n; ++i) g.laplacian(i, i) = adjacency.row(i).sum();
  g.adjacency = std::move(adjacency);
  return g;
}

// Fully connected graph with Gaussian-kernel weights exp(-(d_i-d_j)^2/sigma^2).
inline BlockGraph build_block_graph(std::span<const double> block, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    fail(ErrorCode::kInvalidSigma, "sigma must be positive");
  }
  if (block.size() < 2) {
    fail(ErrorCode::kInvalidArgument, "block graph needs at least two vertices");
  }
  const auto n = static_cast<Eigen::Index>(block.size());
  const double inv_s2 = 1.0 / (sigma * sigma);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = block[i] - block[j];
      const double w = std::exp(-d * d * inv_s2);
      a(i, j) = w;
      a(j, i) = w;
    }
  }
  return graph_from_adjacency(std::move(a));
}

inline double glr(std::span<const double> signal, const BlockGraph& graph) {
  if (static_cast<int>(signal.size()) != graph.n) {
    fail(ErrorCode::kDimensionMismatch, "signal length differs from graph size");
  }
  const Eigen::Map<const Eigen::VectorXd> x(signal.data(), graph.n);
  return std::max(0.0, x.dot(graph.laplacian * x));
}

// Eigenvectors are sign-normalized so the first entry with magnitude above
// 1e-12 is positive.
inline GftBasis gft_basis(const BlockGraph& graph) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(graph.laplacian);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::kEigenFailure, "eigendecomposition did not converge");
  }
  GftBasis basis{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index c = 0; c < basis.eigenvectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < basis.eigenvectors.rows(); ++r) {
      const double v = basis.eigenvectors(r, c);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) basis.eigenvectors.col(c) *= -1.0;
        break;
      }
    }
  }
  return basis;
}

inline std::vector<double> gft_forward(std::span<const double> signal,
                                       const GftBasis& basis) {
  if (static_cast<int>(signal.size()) != basis.size()) {
    fail(ErrorCode::kDimensionMismatch, "signal length differs from basis");
  }
  const Eigen::Map<const Eigen::VectorXd> x(signal.data(), basis.size());
  const Eigen::VectorXd c = basis.eigenvectors.transpose() * x;
  return {c.data(), c.data() + c.size()};
}

inline std::vector<double> gft_inverse(std::span<const double> coefficients,
                                       const GftBasis& basis) {
  if (static_cast<int>(coefficients.size()) != basis.size()) {
    fail(ErrorCode::kDimensionMismatch, "coefficient count differs from basis");
  }
  const Eigen::Map<const Eigen::VectorXd> c(coefficients.data(), basis.size());
  const Eigen::VectorXd x = basis.eigenvectors * c;
  return {x.data(), x.data() + x.size()};
}

// max(sample standard deviation, floor)
inline double block_sigma(std::span<const double> block, double sigma_floor) {
  const double n = static_cast<double>(block.size());
  double mean = 0.0;
  for (double v : block) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : block) ss += (v - mean) * (v - mean);
  const double sd = block.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return std::max(sd, sigma_floor);
}

struct SmoothedBlock {
  BlockGraph graph;
  Eigen::VectorXd solution;
};

// Minimizer of |d - s|^2 + mu s'Ls for one block: s = (I + mu L)^-1 d.
inline SmoothedBlock smooth_block(std::span<const double> block, double mu,
                                  double sigma_floor) {
  SmoothedBlock out;
  out.graph = build_block_graph(block, block_sigma(block, sigma_floor));
  const auto n = static_cast<Eigen::Index>(block.size());
  const Eigen::Map<const Eigen::VectorXd> d(block.data(), n);
  if (mu == 0.0 || std::all_of(block.begin(), block.end(),
                               [&](double v) { return v == block[0]; })) {
    out.solution = d;
    return out;
  }
  Eigen::MatrixXd system = mu * out.graph.laplacian;
  system.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::kSolveFailure, "I + mu L is not positive definite");
  }
  out.solution = llt.solve(d);
  if (!out.solution.allFinite()) {
    fail(ErrorCode::kSolveFailure, "non-finite smoothing solution");
  }
  return out;
}

namespace detail {

inline std::vector<int> block_origins(int extent, int block, int step) {
  std::vector<int> origins;
  for (int o = 0; o + block <= extent; o += step) origins.push_back(o);
  if (origins.empty() || origins.back() + block < extent) {
    origins.push_back(extent - block);
  }
  return origins;
}

// Same-size tight loop used by glr_smooth; mirrors smooth_block but reuses
// buffers across blocks.
class BlockSmoother {
 public:
  BlockSmoother(int n, double mu, double sigma_floor)
      : n_(n), mu_(mu), sigma_floor_(sigma_floor), system_(n, n), llt_(n) {}

  void solve(const Eigen::VectorXd& d, Eigen::VectorXd& out) {
    const double first = d[0];
    if (mu_ == 0.0 || (d.array() == first).all()) {
      out = d;
      return;
    }
    const double sigma =
        block_sigma(std::span<const double>(d.data(), n_), sigma_floor_);
    const double inv_s2 = 1.0 / (sigma * sigma);
    system_.setZero();
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        const double diff = d[i] - d[j];
        const double w = mu_ * std::exp(-diff * diff * inv_s2);
        system_(i, j) = -w;
        system_(j, i) = -w;
        system_(i, i) += w;
        system_(j, j) += w;
      }
      system_(i, i) += 1.0;
    }
    llt_.compute(system_);
    if (llt_.info() != Eigen::Success) {
      fail(ErrorCode::kSolveFailure, "I + mu L is not positive definite");
    }
    out = llt_.solve(d);
    if (!out.allFinite()) fail(ErrorCode::kSolveFailure, "non-finite solution");
  }

 private:
  int n_;
  double mu_;
  double sigma_floor_;
  Eigen::MatrixXd system_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace detail

// GLR smoothing over l x l blocks at stride t. Planes smaller than a block
// are edge-replicated up to block size and cropped back. Each pixel takes
// the uniform mean of every covering block's estimate.
inline RealPlane glr_smooth(const Raster<std::int16_t>& diff,
                            const SmoothingParams& params) {
  params.validate();
  if (diff.empty()) return RealPlane(diff.width(), diff.height());
  const int l = params.block_size;
  const int pw = std::max(diff.width(), l);
  const int ph = std::max(diff.height(), l);
  RealPlane padded(pw, ph);
  for (int y = 0; y < ph; ++y) {
    for (int x = 0; x < pw; ++x) {
      padded(x, y) = diff(std::min(x, diff.width() - 1), std::min(y, diff.height() - 1));
    }
  }
  if (params.mu == 0.0) {
    RealPlane out(diff.width(), diff.height());
    for (std::size_t i = 0; i < out.size(); ++i) out.samples()[i] = diff.samples()[i];
    return out;
  }

  const auto xs = detail::block_origins(pw, l, params.step);
  const auto ys = detail::block_origins(ph, l, params.step);
  const int n = l * l;
  // Per-row solutions, aggregated afterwards in raster order so the result
  // does not depend on thread scheduling.
  std::vector<std::vector<Eigen::VectorXd>> rows(ys.size());
  parallel_for(ys.size(), [&](std::size_t r) {
    detail::BlockSmoother smoother(n, params.mu, params.sigma_floor);
    Eigen::VectorXd d(n);
    rows[r].resize(xs.size());
    for (std::size_t c = 0; c < xs.size(); ++c) {
      for (int by = 0; by < l; ++by) {
        for (int bx = 0; bx < l; ++bx) d[by * l + bx] = padded(xs[c] + bx, ys[r] + by);
      }
      smoother.solve(d, rows[r][c]);
    }
  });

  RealPlane sum(pw, ph, 0.0);
  Raster<int> count(pw, ph, 0);
  for (std::size_t r = 0; r < ys.size(); ++r) {
    for (std::size_t c = 0; c < xs.size(); ++c) {
      const auto& s = rows[r][c];
      for (int by = 0; by < l; ++by) {
        for (int bx = 0; bx < l; ++bx) {
          sum(xs[c] + bx, ys[r] + by) += s[by * l + bx];
          count(xs[c] + bx, ys[r] + by) += 1;
        }
      }
    }
  }
  RealPlane out(diff.width(), diff.height());
  for (int y = 0; y < diff.height(); ++y) {
    for (int x = 0; x < diff.width(); ++x) out(x, y) = sum(x, y) / count(x, y);
  }
  return out;
}

}  // namespace rvw
