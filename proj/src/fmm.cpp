#include "lbsolve/fmm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "lbsolve/error.hpp"
#include "lbsolve/parallel.hpp"

namespace lbs {

namespace {

bool adjacent(const QuadBox& a, const QuadBox& b) {
  const int level = std::max(a.level, b.level);
  const int sa = level - a.level, sb = level - b.level;
  const std::int64_t ax0 = a.ix << sa, ax1 = (a.ix + 1) << sa, ay0 = a.iy << sa, ay1 = (a.iy + 1) << sa;
  const std::int64_t bx0 = b.ix << sb, bx1 = (b.ix + 1) << sb, by0 = b.iy << sb, by1 = (b.iy + 1) << sb;
  return ax0 <= bx1 && bx0 <= ax1 && ay0 <= by1 && by0 <= ay1;
}

int quadrant(Complex z, Complex c) {
  return (z.real() >= c.real() ? 1 : 0) + (z.imag() >= c.imag() ? 2 : 0);
}

// Stable partition of order[begin, end) into quadrants; returns the 5 cut points.
std::array<std::size_t, 5> split_range(std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                                       std::span<const Complex> pts, Complex c) {
  std::array<std::size_t, 5> cut{};
  std::array<std::vector<std::size_t>, 4> bucket;
  for (std::size_t i = begin; i < end; ++i) bucket[quadrant(pts[order[i]], c)].push_back(order[i]);
  std::size_t pos = begin;
  for (int q = 0; q < 4; ++q) {
    cut[q] = pos;
    for (auto idx : bucket[q]) order[pos++] = idx;
  }
  cut[4] = end;
  return cut;
}

}  // namespace

int expansion_order(double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "FMM tolerance must be positive");
  const int p = static_cast<int>(std::ceil(std::log2(1.0 / std::min(epsilon, 0.5)))) + 2;
  return std::clamp(p, 4, 60);
}

QuadTree build_tree(std::span<const Complex> sources, std::span<const Complex> targets,
                    std::size_t leaf_capacity, int max_depth) {
  if (leaf_capacity == 0) throw Error(ErrorCode::InvalidArgument, "leaf capacity must be positive");
  QuadTree tree;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  auto extend = [&](Complex z) {
    xmin = std::min(xmin, z.real());
    xmax = std::max(xmax, z.real());
    ymin = std::min(ymin, z.imag());
    ymax = std::max(ymax, z.imag());
  };
  for (auto z : sources) extend(z);
  for (auto z : targets) extend(z);
  QuadBox root;
  if (sources.empty() && targets.empty()) {
    root.half_width = 1.0;
  } else {
    root.center = Complex(0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
    root.half_width = 0.5 * std::max(xmax - xmin, ymax - ymin) * (1.0 + 1e-10);
    if (!(root.half_width > 0.0)) root.half_width = 1.0;
    root.half_width += 1e-300;
  }
  tree.src_order.resize(sources.size());
  tree.tgt_order.resize(targets.size());
  for (std::size_t i = 0; i < sources.size(); ++i) tree.src_order[i] = i;
  for (std::size_t i = 0; i < targets.size(); ++i) tree.tgt_order[i] = i;
  root.src_end = sources.size();
  root.tgt_end = targets.size();
  tree.boxes.push_back(root);

  for (std::size_t b = 0; b < tree.boxes.size(); ++b) {
    QuadBox box = tree.boxes[b];
    if (static_cast<std::size_t>(box.level) >= tree.levels.size()) tree.levels.emplace_back();
    tree.levels[box.level].push_back(b);
    const std::size_t count = box.sources() + box.targets();
    if (count <= leaf_capacity) continue;
    if (box.level >= max_depth) {
      tree.overflow = true;
      continue;
    }
    const auto sc = split_range(tree.src_order, box.src_begin, box.src_end, sources, box.center);
    const auto tc = split_range(tree.tgt_order, box.tgt_begin, box.tgt_end, targets, box.center);
    for (int q = 0; q < 4; ++q) {
      if (sc[q + 1] - sc[q] + tc[q + 1] - tc[q] == 0) continue;
      QuadBox ch;
      ch.level = box.level + 1;
      ch.ix = 2 * box.ix + (q & 1);
      ch.iy = 2 * box.iy + (q >> 1);
      ch.half_width = 0.5 * box.half_width;
      ch.center = box.center + Complex((q & 1) ? ch.half_width : -ch.half_width,
                                       (q >> 1) ? ch.half_width : -ch.half_width);
      ch.parent = static_cast<std::int64_t>(b);
      ch.src_begin = sc[q];
      ch.src_end = sc[q + 1];
      ch.tgt_begin = tc[q];
      ch.tgt_end = tc[q + 1];
      tree.boxes[b].child[q] = static_cast<std::int64_t>(tree.boxes.size());
      tree.boxes.push_back(ch);
    }
  }

  const std::size_t nb = tree.boxes.size();
  tree.colleagues.assign(nb, {});
  tree.ulist.assign(nb, {});
  tree.vlist.assign(nb, {});
  tree.wlist.assign(nb, {});
  tree.xlist.assign(nb, {});
  tree.colleagues[0].push_back(0);
  for (std::size_t b = 1; b < nb; ++b) {
    const auto& box = tree.boxes[b];
    const auto parent = static_cast<std::size_t>(box.parent);
    for (auto c : tree.colleagues[parent]) {
      for (auto ch : tree.boxes[c].child) {
        if (ch < 0) continue;
        const auto& cb = tree.boxes[static_cast<std::size_t>(ch)];
        if (adjacent(box, cb))
          tree.colleagues[b].push_back(static_cast<std::size_t>(ch));
        else
          tree.vlist[b].push_back(static_cast<std::size_t>(ch));
      }
    }
  }

  std::function<void(std::size_t, std::size_t)> descend = [&](std::size_t b, std::size_t d) {
    const auto& bb = tree.boxes[b];
    const auto& db = tree.boxes[d];
    if (!adjacent(bb, db)) {
      tree.wlist[b].push_back(d);
      tree.xlist[d].push_back(b);
      return;
    }
    if (db.leaf()) {
      tree.ulist[b].push_back(d);
      tree.ulist[d].push_back(b);
      return;
    }
    for (auto ch : db.child)
      if (ch >= 0) descend(b, static_cast<std::size_t>(ch));
  };
  for (std::size_t b = 0; b < nb; ++b) {
    if (!tree.boxes[b].leaf()) continue;
    for (auto c : tree.colleagues[b]) {
      if (c == b || tree.boxes[c].leaf()) {
        tree.ulist[b].push_back(c);
        continue;
      }
      for (auto ch : tree.boxes[c].child)
        if (ch >= 0) descend(b, static_cast<std::size_t>(ch));
    }
  }
  return tree;
}

CauchyFmm::CauchyFmm(std::span<const Complex> sources, std::span<const Complex> targets,
                     const FmmOptions& options)
    : src_(sources.begin(), sources.end()),
      tgt_(targets.begin(), targets.end()),
      self_(targets.empty()),
      p_(expansion_order(options.epsilon)) {
  tree_ = build_tree(src_, tgt_, options.leaf_capacity, options.max_depth);
  const int n = 2 * p_;
  binom_.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    binom_[static_cast<std::size_t>(i) * n] = 1.0;
    for (int k = 1; k <= i; ++k)
      binom_[static_cast<std::size_t>(i) * n + k] =
          binom_[static_cast<std::size_t>(i - 1) * n + k - 1] + (k <= i - 1 ? binom_[static_cast<std::size_t>(i - 1) * n + k] : 0.0);
  }
}

const FmmStats& CauchyFmm::stats() const {
  if (!stats_) throw Error(ErrorCode::NoRun, "no FMM evaluation has been run");
  return *stats_;
}

std::vector<Complex> CauchyFmm::evaluate(std::span<const Complex> charges) const {
  if (charges.size() != src_.size()) throw Error(ErrorCode::DimensionMismatch, "one charge per source required");
  const auto t0 = std::chrono::steady_clock::now();
  const auto& boxes = tree_.boxes;
  const std::size_t nb = boxes.size();
  const auto p = static_cast<std::size_t>(p_);
  const std::vector<Complex>& tpts = self_ ? src_ : tgt_;
  const std::vector<std::size_t>& torder = self_ ? tree_.src_order : tree_.tgt_order;
  auto tbegin = [&](const QuadBox& b) { return self_ ? b.src_begin : b.tgt_begin; };
  auto tend = [&](const QuadBox& b) { return self_ ? b.src_end : b.tgt_end; };
  auto ntargets = [&](const QuadBox& b) { return tend(b) - tbegin(b); };

  std::vector<Complex> mpole(nb * p, 0.0), local(nb * p, 0.0);
  FmmStats st;
  st.levels_used = tree_.depth() + 1;
  st.boxes = nb;

  // upward pass
  for (int level = tree_.depth(); level >= 0; --level) {
    const auto& ids = tree_.levels[static_cast<std::size_t>(level)];
    parallel_for(ids.size(), [&](std::size_t ii) {
      const std::size_t b = ids[ii];
      const auto& box = boxes[b];
      if (box.sources() == 0) return;
      Complex* a = &mpole[b * p];
      if (box.leaf()) {
        for (std::size_t s = box.src_begin; s < box.src_end; ++s) {
          const std::size_t j = tree_.src_order[s];
          const Complex r = (src_[j] - box.center) / box.half_width;
          Complex pw = charges[j];
          for (std::size_t m = 0; m < p; ++m) {
            a[m] += pw;
            pw *= r;
          }
        }
        return;
      }
      std::vector<Complex> dpow(p);
      for (auto chi : box.child) {
        if (chi < 0) continue;
        const auto c = static_cast<std::size_t>(chi);
        if (boxes[c].sources() == 0) continue;
        const Complex* ac = &mpole[c * p];
        const Complex d = (boxes[c].center - box.center) / box.half_width;
        dpow[0] = 1.0;
        for (std::size_t k = 1; k < p; ++k) dpow[k] = dpow[k - 1] * d;
        double half = 1.0;
        std::vector<Complex> scaled(p);
        for (std::size_t k = 0; k < p; ++k, half *= 0.5) scaled[k] = ac[k] * half;
        for (std::size_t m = 0; m < p; ++m) {
          Complex s = 0.0;
          for (std::size_t k = 0; k <= m; ++k) s += binom(static_cast<int>(m), static_cast<int>(k)) * scaled[k] * dpow[m - k];
          a[m] += s;
        }
      }
    });
  }

  // downward pass
  std::size_t far_pairs = 0;
  for (std::size_t level = 2; level < tree_.levels.size(); ++level) {
    const auto& ids = tree_.levels[level];
    parallel_for(ids.size(), [&](std::size_t ii) {
      const std::size_t b = ids[ii];
      const auto& box = boxes[b];
      if (ntargets(box) == 0) return;
      Complex* loc = &local[b * p];
      std::vector<Complex> tmp(p), pw(p);
      const auto parent = static_cast<std::size_t>(box.parent);
      if (boxes[parent].level >= 2) {
        const Complex* lp = &local[parent * p];
        const Complex d = (box.center - boxes[parent].center) / boxes[parent].half_width;
        pw[0] = 1.0;
        for (std::size_t k = 1; k < p; ++k) pw[k] = pw[k - 1] * d;
        double half = 1.0;
        for (std::size_t k = 0; k < p; ++k, half *= 0.5) {
          Complex s = 0.0;
          for (std::size_t l = k; l < p; ++l) s += lp[l] * binom(static_cast<int>(l), static_cast<int>(k)) * pw[l - k];
          loc[k] += s * half;
        }
      }
      for (auto c : tree_.vlist[b]) {
        if (boxes[c].sources() == 0) continue;
        const Complex D = boxes[c].center - box.center;
        const Complex rho = box.half_width / D;
        const Complex* ac = &mpole[c * p];
        Complex r = -1.0;
        for (std::size_t m = 0; m < p; ++m) {
          tmp[m] = ac[m] * r;
          r *= -rho;
        }
        Complex rl = 1.0 / D;
        for (std::size_t l = 0; l < p; ++l) {
          Complex s = 0.0;
          for (std::size_t m = 0; m < p; ++m) s += binom(static_cast<int>(m + l), static_cast<int>(l)) * tmp[m];
          loc[l] += s * rl;
          rl *= rho;
        }
      }
      for (auto c : tree_.xlist[b]) {
        const auto& cb = boxes[c];
        for (std::size_t s = cb.src_begin; s < cb.src_end; ++s) {
          const std::size_t j = tree_.src_order[s];
          const Complex r = src_[j] - box.center;
          Complex term = -charges[j] / r;
          const Complex ratio = box.half_width / r;
          for (std::size_t l = 0; l < p; ++l) {
            loc[l] += term;
            term *= ratio;
          }
        }
      }
    });
  }
  for (std::size_t b = 0; b < nb; ++b) far_pairs += tree_.vlist[b].size() + tree_.wlist[b].size() + tree_.xlist[b].size();

  // leaf evaluation
  std::vector<Complex> out(tpts.size(), 0.0);
  std::vector<std::size_t> leaves;
  std::size_t near_pairs = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    if (boxes[b].leaf() && ntargets(boxes[b]) > 0) {
      leaves.push_back(b);
      near_pairs += tree_.ulist[b].size();
    }
  }
  parallel_for(leaves.size(), [&](std::size_t li) {
    const std::size_t b = leaves[li];
    const auto& box = boxes[b];
    const Complex* loc = &local[b * p];
    for (std::size_t t = tbegin(box); t < tend(box); ++t) {
      const std::size_t i = torder[t];
      const Complex z = tpts[i];
      Complex u = 0.0;
      if (box.level >= 2) {
        const Complex r = (z - box.center) / box.half_width;
        for (std::size_t l = p; l-- > 0;) u = u * r + loc[l];
      }
      for (auto c : tree_.wlist[b]) {
        const auto& cb = boxes[c];
        if (cb.sources() == 0) continue;
        if (cb.sources() <= p) {
          for (std::size_t s = cb.src_begin; s < cb.src_end; ++s) {
            const std::size_t j = tree_.src_order[s];
            u += charges[j] / (z - src_[j]);
          }
          continue;
        }
        const Complex* a = &mpole[c * p];
        const Complex inv = 1.0 / (z - cb.center);
        const Complex r = cb.half_width * inv;
        Complex acc = 0.0;
        for (std::size_t m = p; m-- > 0;) acc = acc * r + a[m];
        u += acc * inv;
      }
      for (auto c : tree_.ulist[b]) {
        const auto& cb = boxes[c];
        for (std::size_t s = cb.src_begin; s < cb.src_end; ++s) {
          const std::size_t j = tree_.src_order[s];
          if (self_ && j == i) continue;
          const Complex d = z - src_[j];
          if (d == Complex(0.0, 0.0)) {
            if (self_) continue;
            throw Error(ErrorCode::TargetEqualsSource, "target coincides with a source");
          }
          u += charges[j] / d;
        }
      }
      out[i] = u;
    }
  });

  st.near_pairs = near_pairs;
  st.far_pairs = far_pairs;
  st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  stats_ = st;
  return out;
}

std::vector<Complex> cauchy_sum(std::span<const Complex> sources, std::span<const Complex> charges,
                                std::span<const Complex> targets, double epsilon, bool exclude_self,
                                FmmStats* stats) {
  if (sources.size() != charges.size()) throw Error(ErrorCode::DimensionMismatch, "one charge per source required");
  if (!exclude_self && targets.empty()) return {};
  FmmOptions opt;
  opt.epsilon = epsilon;
  const auto t0 = std::chrono::steady_clock::now();
  CauchyFmm fmm = exclude_self ? CauchyFmm(sources, opt) : CauchyFmm(sources, targets, opt);
  auto out = fmm.evaluate(charges);
  if (stats) {
    *stats = fmm.stats();
    stats->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return out;
}

std::vector<Complex> cauchy_sum_direct(std::span<const Complex> sources, std::span<const Complex> charges,
                                       std::span<const Complex> targets, bool exclude_self) {
  const auto tgt = exclude_self ? sources : targets;
  std::vector<Complex> out(tgt.size(), 0.0);
  parallel_for(tgt.size(), [&](std::size_t i) {
    Complex u = 0.0;
    for (std::size_t j = 0; j < sources.size(); ++j) {
      if (exclude_self && i == j) continue;
      u += charges[j] / (tgt[i] - sources[j]);
    }
    out[i] = u;
  });
  return out;
}

}  // namespace lbs
