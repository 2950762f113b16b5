#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lbsolve/types.hpp"

namespace lbs {

struct FmmOptions {
  double epsilon = 1e-14;
  std::size_t leaf_capacity = 30;
  int max_depth = 30;
};

struct FmmStats {
  int levels_used = 0;
  std::size_t boxes = 0;
  std::size_t near_pairs = 0;  // leaf pairs summed directly
  std::size_t far_pairs = 0;   // multipole-to-local translations
  double seconds = 0.0;
};

int expansion_order(double epsilon);

// Adaptive quadtree over a source set and a target set.
struct QuadBox {
  int level = 0;
  std::int64_t ix = 0, iy = 0;
  Complex center;
  double half_width = 0.0;
  std::int64_t parent = -1;
  std::array<std::int64_t, 4> child{-1, -1, -1, -1};
  std::size_t src_begin = 0, src_end = 0;
  std::size_t tgt_begin = 0, tgt_end = 0;

  bool leaf() const { return child[0] < 0 && child[1] < 0 && child[2] < 0 && child[3] < 0; }
  std::size_t sources() const { return src_end - src_begin; }
  std::size_t targets() const { return tgt_end - tgt_begin; }
};

struct QuadTree {
  std::vector<QuadBox> boxes;               // breadth-first order
  std::vector<std::size_t> src_order;       // sources sorted by box
  std::vector<std::size_t> tgt_order;       // targets sorted by box
  std::vector<std::vector<std::size_t>> levels;
  // Interaction lists of the adaptive scheme.
  std::vector<std::vector<std::size_t>> colleagues, ulist, vlist, wlist, xlist;
  bool overflow = false;  // a leaf at max depth holds more than leaf_capacity points

  int depth() const { return static_cast<int>(levels.size()) - 1; }
};

// Builds the tree over the union of sources and targets (targets may be empty).
QuadTree build_tree(std::span<const Complex> sources, std::span<const Complex> targets,
                    std::size_t leaf_capacity, int max_depth);
inline QuadTree build_tree(std::span<const Complex> points, std::size_t leaf_capacity,
                           int max_depth) {
  return build_tree(points, {}, leaf_capacity, max_depth);
}

// Precomputed plan for u(t) = sum_j q_j / (t - z_j). Without targets the
// sources are the targets and the j = i term is skipped.
class CauchyFmm {
 public:
  CauchyFmm(std::span<const Complex> sources, std::span<const Complex> targets,
            const FmmOptions& options = {});
  explicit CauchyFmm(std::span<const Complex> points, const FmmOptions& options = {})
      : CauchyFmm(points, {}, options) {}

  std::vector<Complex> evaluate(std::span<const Complex> charges) const;

  const QuadTree& tree() const { return tree_; }
  int order() const { return p_; }
  bool self_mode() const { return self_; }
  // Stats of the most recent evaluate call; throws NoRun before the first.
  const FmmStats& stats() const;

 private:
  std::vector<Complex> src_, tgt_;
  bool self_;
  int p_;
  QuadTree tree_;
  std::vector<double> binom_;  // (2p) x (2p) table
  mutable std::optional<FmmStats> stats_;

  double binom(int n, int k) const { return binom_[static_cast<std::size_t>(n) * 2 * p_ + k]; }
};

std::vector<Complex> cauchy_sum(std::span<const Complex> sources, std::span<const Complex> charges,
                                std::span<const Complex> targets, double epsilon, bool exclude_self,
                                FmmStats* stats = nullptr);

// O(N M) reference.
std::vector<Complex> cauchy_sum_direct(std::span<const Complex> sources,
                                       std::span<const Complex> charges,
                                       std::span<const Complex> targets, bool exclude_self);

}  // namespace lbs
