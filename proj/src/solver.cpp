#include "lbsolve/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "lbsolve/error.hpp"
#include "lbsolve/kernels.hpp"
#include "lbsolve/parallel.hpp"
#include "lbsolve/spectral.hpp"

namespace lbs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

constexpr double kInv2Pi = 1.0 / kTwoPi;

GmresResult run_gmres(const DiscreteSystem& sys, const SchurPreconditioner* prec, const GmresConfig& cfg) {
  LinearOperator apply = [&](const Eigen::VectorXd& v) { return apply_operator(sys, v); };
  LinearOperator pre;
  if (prec) pre = [prec](const Eigen::VectorXd& r) { return prec->apply(r); };
  return gmres(apply, pre, sys.rhs(), cfg);
}

Solution to_solution(const DiscreteSystem& sys, const GmresResult& r) {
  Solution s;
  s.domain = sys.domain_ptr();
  const auto n = static_cast<Eigen::Index>(sys.densities());
  s.sigma = r.solution.head(n);
  s.strengths = r.solution.tail(static_cast<Eigen::Index>(sys.islands()));
  s.report.iterations = r.iterations;
  s.report.converged = r.converged;
  s.report.residual_history = r.residual_history;
  s.report.residual = r.residual_history.empty() ? 0.0 : r.residual_history.back();
  return s;
}

// Halton radical inverse.
double halton(std::size_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

struct CurveBox {
  double xmin, xmax, ymin, ymax, reach;
};

std::vector<CurveBox> curve_boxes(const IslandDomain& d) {
  std::vector<CurveBox> out;
  for (const auto& c : d.curves) {
    CurveBox b{INFINITY, -INFINITY, INFINITY, -INFINITY, 0.0};
    double speed = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      b.xmin = std::min(b.xmin, c.nodes[j].real());
      b.xmax = std::max(b.xmax, c.nodes[j].real());
      b.ymin = std::min(b.ymin, c.nodes[j].imag());
      b.ymax = std::max(b.ymax, c.nodes[j].imag());
      speed = std::max(speed, std::abs(c.d_nodes[j]));
    }
    b.reach = 5.0 * c.mesh_width() * speed;
    out.push_back(b);
  }
  return out;
}

}  // namespace

Solution solve_dirichlet(std::shared_ptr<const IslandDomain> domain, std::span<const double> g,
                         const SolveOptions& options) {
  auto t0 = Clock::now();
  DiscreteSystem sys(std::move(domain), g, options.assembly);
  const double t_assemble = seconds_since(t0);
  t0 = Clock::now();
  std::optional<SchurPreconditioner> prec;
  if (options.precondition) prec.emplace(sys);
  const double t_prec = seconds_since(t0);
  t0 = Clock::now();
  const auto r = run_gmres(sys, prec ? &*prec : nullptr, options.gmres);
  const double t_solve = seconds_since(t0);
  if (!r.converged)
    throw Error(ErrorCode::NoConvergence, "GMRES did not converge in " + std::to_string(r.iterations) +
                                              " iterations (residual " +
                                              std::to_string(r.residual_history.empty() ? 1.0 : r.residual_history.back()) + ")");
  Solution s = to_solution(sys, r);
  s.report.seconds_assemble = t_assemble;
  s.report.seconds_precondition = t_prec;
  s.report.seconds_solve = t_solve;
  return s;
}

Solution solve_dirichlet(std::shared_ptr<const IslandDomain> domain, const std::function<double(Complex)>& g,
                         const SolveOptions& options) {
  std::vector<double> values;
  values.reserve(domain->total_nodes());
  for (const auto& c : domain->curves)
    for (auto z : c.nodes) values.push_back(g(z));
  return solve_dirichlet(std::move(domain), values, options);
}

Evaluation evaluate_solution(const Solution& sol, std::span<const Complex> targets, const FmmOptions& fmm) {
  const IslandDomain& domain = *sol.domain;
  const NodeSet nodes = flatten(domain);
  if (static_cast<std::size_t>(sol.sigma.size()) != nodes.size() ||
      static_cast<std::size_t>(sol.strengths.size()) != domain.islands())
    throw Error(ErrorCode::DimensionMismatch, "solution does not match its domain");

  const auto boxes = curve_boxes(domain);
  Evaluation ev;
  ev.values.assign(targets.size(), 0.0);
  ev.near_boundary.assign(targets.size(), false);
  std::vector<std::vector<std::size_t>> near(targets.size());
  parallel_for(targets.size(), [&](std::size_t t) {
    const Complex x = targets[t];
    if (auto k = island_containing(domain, x))
      throw Error(ErrorCode::TargetInsideIsland, "target " + std::to_string(t) + " lies inside island " + std::to_string(*k));
    for (std::size_t k = 0; k < domain.islands(); ++k) {
      const auto& b = boxes[k];
      if (x.real() < b.xmin - b.reach || x.real() > b.xmax + b.reach || x.imag() < b.ymin - b.reach ||
          x.imag() > b.ymax + b.reach)
        continue;
      bool close = false;
      for (auto z : domain.curves[k].nodes) {
        const double d = std::abs(x - z);
        if (d == 0.0) throw Error(ErrorCode::TargetOnBoundary, "target coincides with a boundary node");
        close = close || d < b.reach;
      }
      if (close) near[t].push_back(k);
    }
  });
  for (std::size_t t = 0; t < targets.size(); ++t) ev.near_boundary[t] = !near[t].empty();

  std::vector<Complex> q(nodes.size());
  double total = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double ws = nodes.weight[j] * sol.sigma[static_cast<Eigen::Index>(j)];
    q[j] = ws * nodes.dz[j];
    total += ws * correction_density(nodes.z[j], nodes.dz[j]);
  }
  total *= -KernelConvention::sign_correction;
  const bool use_fmm = static_cast<double>(targets.size()) * static_cast<double>(nodes.size()) > 4e6;
  const auto u = use_fmm ? CauchyFmm(nodes.z, targets, fmm).evaluate(q)
                         : cauchy_sum_direct(nodes.z, q, targets, false);
  parallel_for(targets.size(), [&](std::size_t t) {
    double v = kInv2Pi * (KernelConvention::sign_cauchy * u[t].imag() + total);
    // Near a curve, subtract the density at the closest node and add back
    // its exact Cauchy integral: 1 from the domain side of the outer curve,
    // 0 for the others.
    const Complex x = targets[t];
    for (std::size_t k : near[t]) {
      const auto& c = domain.curves[k];
      const std::size_t off = domain.offset(k);
      std::size_t jmin = 0;
      for (std::size_t j = 1; j < c.size(); ++j)
        if (std::abs(x - c.nodes[j]) < std::abs(x - c.nodes[jmin])) jmin = j;
      double s = 0.0;
      for (std::size_t j = 0; j < c.size(); ++j) s += std::imag(c.d_nodes[j] / (x - c.nodes[j]));
      const double exact = domain.is_outer(k) ? 1.0 : 0.0;
      v += KernelConvention::sign_cauchy * sol.sigma[static_cast<Eigen::Index>(off + jmin)] *
           (exact - kInv2Pi * c.mesh_width() * s);
    }
    for (std::size_t k = 0; k < domain.islands(); ++k)
      v += sol.strengths[static_cast<Eigen::Index>(k)] * green_plane(x, domain.anchors[k]);
    ev.values[t] = v;
  });
  return ev;
}

Evaluation evaluate_solution(const Solution& sol, std::span<const SpherePoint> targets, const FmmOptions& fmm) {
  std::vector<Complex> plane;
  plane.reserve(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (1.0 - targets[t].x3 <= 1e-13) {
      if (sol.domain->north_pole_island)
        throw Error(ErrorCode::TargetInsideIsland, "target " + std::to_string(t) + " lies inside island 0");
      throw Error(ErrorCode::NorthPoleSingular, "target " + std::to_string(t) + " is at the north pole");
    }
    plane.push_back(stereo_project(targets[t]));
  }
  return evaluate_solution(sol, plane, fmm);
}

double evaluate_on_boundary(const Solution& sol, std::size_t k, double alpha) {
  const IslandDomain& domain = *sol.domain;
  if (k >= domain.islands()) throw Error(ErrorCode::InvalidArgument, "curve index out of range");
  const auto& curve = domain.curves[k];
  const std::size_t n = curve.size();
  const std::size_t off = domain.offset(k);
  const double h = curve.mesh_width();

  const auto z = trig_shift(std::span<const Complex>(curve.nodes), alpha);
  const auto d = curve_derivatives(z);
  std::vector<double> sk(n);
  for (std::size_t j = 0; j < n; ++j) sk[j] = sol.sigma[static_cast<Eigen::Index>(off + j)];
  const auto s = trig_shift(std::span<const double>(sk), alpha);

  const Complex x = z[0];
  double v = 0.5 * s[0] + h * s[0] * dlp_kernel_diag(x, d.d_nodes[0], d.curvatures[0]);
  for (std::size_t j = 1; j < n; ++j) v += h * s[j] * dlp_kernel(x, z[j], d.d_nodes[j]);
  std::size_t base = 0;
  for (std::size_t c = 0; c < domain.islands(); ++c) {
    const auto& cc = domain.curves[c];
    if (c != k) {
      const double hc = cc.mesh_width();
      for (std::size_t j = 0; j < cc.size(); ++j)
        v += hc * sol.sigma[static_cast<Eigen::Index>(base + j)] * dlp_kernel(x, cc.nodes[j], cc.d_nodes[j]);
    }
    base += cc.size();
  }
  for (std::size_t c = 0; c < domain.islands(); ++c)
    v += sol.strengths[static_cast<Eigen::Index>(c)] * green_plane(x, domain.anchors[c]);
  return v;
}

double exact_harmonic(Complex xi, std::span<const Complex> poles) {
  double s = 0.0;
  for (auto p : poles) {
    if (xi == p) throw Error(ErrorCode::CoincidentPole, "evaluation point coincides with a pole");
    s += std::real(1.0 / (xi - p));
  }
  return 0.5 * s;
}

double VortexField::singular_part(Complex xi) const {
  double s = 0.0;
  for (const auto& v : vortices) s += v.strength * green_plane(xi, v.position);
  return s;
}

Evaluation VortexField::evaluate(std::span<const Complex> targets, const FmmOptions& fmm) const {
  Evaluation ev = evaluate_solution(correction, targets, fmm);
  for (std::size_t t = 0; t < targets.size(); ++t) ev.values[t] += singular_part(targets[t]);
  return ev;
}

double VortexField::on_boundary(std::size_t k, double alpha) const {
  const auto z = trig_shift(std::span<const Complex>(correction.domain->curves[k].nodes), alpha);
  return evaluate_on_boundary(correction, k, alpha) + singular_part(z[0]);
}

VortexField solve_point_vortices(std::shared_ptr<const IslandDomain> domain, const PointVortexSet& vortices,
                                 const SolveOptions& options) {
  for (std::size_t v = 0; v < vortices.size(); ++v) {
    if (auto k = island_containing(*domain, vortices[v].position))
      throw Error(ErrorCode::VortexInsideIsland,
                  "vortex " + std::to_string(v) + " lies inside island " + std::to_string(*k));
  }
  VortexField field;
  field.vortices = vortices;
  auto g = [&](Complex z) {
    double s = 0.0;
    for (const auto& v : vortices) s -= v.strength * green_plane(z, v.position);
    return s;
  };
  field.correction = solve_dirichlet(std::move(domain), g, options);
  return field;
}

std::vector<Complex> interior_samples(const IslandDomain& domain, std::size_t count, double min_distance) {
  std::vector<Complex> out;
  const NodeSet nodes = flatten(domain);
  for (std::size_t i = 1; out.size() < count && i < 200000; ++i) {
    const double u = halton(i, 2), w = halton(i, 3);
    const double z = 2.0 * u - 1.0, phi = kTwoPi * w;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    if (1.0 - z < 1e-6) continue;
    const Complex xi = stereo_project(SpherePoint(r * std::cos(phi), r * std::sin(phi), z));
    if (island_containing(domain, xi)) continue;
    bool ok = true;
    for (auto p : nodes.z) {
      if (geodesic_distance(xi, p) <= min_distance) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(xi);
  }
  return out;
}

std::vector<StudyRow> convergence_study(const DomainFactory& factory, const std::function<double(Complex)>& exact,
                                        std::span<const std::size_t> ns, const StudyOptions& options) {
  if (ns.empty()) throw Error(ErrorCode::InvalidArgument, "empty N list");
  const auto finest = factory(*std::max_element(ns.begin(), ns.end()));
  const auto samples = interior_samples(*finest, options.samples, options.min_distance);
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "no interior sample points found");
  std::vector<double> reference(samples.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    reference[i] = exact(samples[i]);
    scale = std::max(scale, std::abs(reference[i]));
  }
  if (scale == 0.0) scale = 1.0;

  std::vector<StudyRow> rows;
  for (auto n : ns) {
    StudyRow row;
    row.n = n;
    const auto domain = factory(n);
    std::vector<double> g;
    for (const auto& c : domain->curves)
      for (auto z : c.nodes) g.push_back(exact(z));
    DiscreteSystem sys(domain, g, options.solve.assembly);

    const auto t0 = Clock::now();
    SchurPreconditioner prec(sys);
    const auto r = run_gmres(sys, &prec, options.solve.gmres);
    row.cpu = seconds_since(t0);
    if (!r.converged) throw Error(ErrorCode::NoConvergence, "GMRES did not converge at N=" + std::to_string(n));
    row.iters_prec = r.iterations;

    if (options.unpreconditioned) {
      const auto ru = run_gmres(sys, nullptr, options.solve.gmres);
      row.iters_unprec = ru.converged ? ru.iterations : -ru.iterations;
    }

    row.cond_unprec = row.cond_prec = std::numeric_limits<double>::quiet_NaN();
    if (options.conditioning && sys.dim() <= 6000) {
      const Eigen::MatrixXd A = dense_materialize(sys);
      row.cond_unprec = condition_number(A);
      row.cond_prec = condition_number(preconditioned_matrix(prec, A));
    }

    const Solution sol = to_solution(sys, r);
    const auto ev = evaluate_solution(sol, samples, options.solve.assembly.fmm);
    double err = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) err = std::max(err, std::abs(ev.values[i] - reference[i]));
    row.error = err / scale;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lbs
