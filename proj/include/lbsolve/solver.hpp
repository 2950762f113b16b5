#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lbsolve/geometry.hpp"
#include "lbsolve/linsys.hpp"
#include "lbsolve/system.hpp"

namespace lbs {

struct SolveOptions {
  GmresConfig gmres;
  AssemblyOptions assembly;
  bool precondition = true;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> residual_history;
  double seconds_assemble = 0.0;
  double seconds_precondition = 0.0;
  double seconds_solve = 0.0;
};

struct Solution {
  std::shared_ptr<const IslandDomain> domain;
  Eigen::VectorXd sigma;      // densities on all nodes
  Eigen::VectorXd strengths;  // A_k
  SolveReport report;
};

// Throws NoConvergence when GMRES stops short of the tolerance.
Solution solve_dirichlet(std::shared_ptr<const IslandDomain> domain, std::span<const double> g,
                         const SolveOptions& options = {});
Solution solve_dirichlet(std::shared_ptr<const IslandDomain> domain,
                         const std::function<double(Complex)>& g, const SolveOptions& options = {});

struct Evaluation {
  std::vector<double> values;
  std::vector<bool> near_boundary;  // accuracy of the smooth rule degrades
};

// psi at domain points; throws TargetInsideIsland.
Evaluation evaluate_solution(const Solution& sol, std::span<const Complex> targets,
                             const FmmOptions& fmm = {});
Evaluation evaluate_solution(const Solution& sol, std::span<const SpherePoint> targets,
                             const FmmOptions& fmm = {});

// psi at parameter value alpha on curve k (limit from the domain), using a
// grid shifted so that alpha is a node.
double evaluate_on_boundary(const Solution& sol, std::size_t k, double alpha);

// 1/2 sum_k Re 1/(xi - xi_k); throws CoincidentPole.
double exact_harmonic(Complex xi, std::span<const Complex> poles);

struct PointVortex {
  Complex position;
  double strength = 0.0;
};
using PointVortexSet = std::vector<PointVortex>;

// Stream function of point vortices with psi = 0 on every boundary.
struct VortexField {
  Solution correction;
  PointVortexSet vortices;

  double singular_part(Complex xi) const;
  Evaluation evaluate(std::span<const Complex> targets, const FmmOptions& fmm = {}) const;
  double on_boundary(std::size_t k, double alpha) const;
};

// Throws VortexInsideIsland.
VortexField solve_point_vortices(std::shared_ptr<const IslandDomain> domain,
                                 const PointVortexSet& vortices, const SolveOptions& options = {});

// Quasi-random domain points at geodesic distance > min_distance from all
// boundary nodes.
std::vector<Complex> interior_samples(const IslandDomain& domain, std::size_t count,
                                      double min_distance);

struct StudyRow {
  std::size_t n = 0;
  int iters_unprec = 0;
  int iters_prec = 0;
  double cond_unprec = 0.0;  // NaN when the system is too large
  double cond_prec = 0.0;
  double error = 0.0;
  double cpu = 0.0;
};

struct StudyOptions {
  SolveOptions solve;
  std::size_t samples = 80;
  double min_distance = 0.1;
  bool conditioning = true;
  bool unpreconditioned = true;
};

using DomainFactory = std::function<std::shared_ptr<const IslandDomain>(std::size_t)>;

// Solves with g = exact on the boundary for each N and reports the maximum
// relative error at fixed interior samples.
std::vector<StudyRow> convergence_study(const DomainFactory& factory,
                                        const std::function<double(Complex)>& exact,
                                        std::span<const std::size_t> ns,
                                        const StudyOptions& options = {});

}  // namespace lbs
