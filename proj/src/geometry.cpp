#include "lbsolve/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Geometry>

#include "lbsolve/error.hpp"
#include "lbsolve/spectral.hpp"

namespace lbs {

namespace {

constexpr double kPoleTol = 1e-13;

struct PlaneSample {
  Complex xi, dxi, d2xi;
};

// xi, xi', xi'' from a sphere curve x(t) and its first two derivatives.
PlaneSample plane_from_sphere(const Vec3& x, const Vec3& dx, const Vec3& d2x) {
  const double d = 1.0 - x[2];
  if (d <= kPoleTol) throw Error(ErrorCode::NorthPoleSingular, "curve passes through the north pole");
  const double dd = -dx[2], d2d = -d2x[2];
  const Complex w(x[0], x[1]), dw(dx[0], dx[1]), d2w(d2x[0], d2x[1]);
  PlaneSample s;
  s.xi = w / d;
  s.dxi = dw / d - w * dd / (d * d);
  s.d2xi = d2w / d - 2.0 * dw * dd / (d * d) - w * d2d / (d * d) + 2.0 * w * dd * dd / (d * d * d);
  return s;
}

double curvature(Complex d1, Complex d2) {
  return std::imag(std::conj(d1) * d2) / std::pow(std::abs(d1), 3);
}

template <class F>
BoundaryCurve sample_sphere_curve(std::size_t n, F&& f) {
  std::vector<Complex> z(n), dz(n);
  std::vector<double> k(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    Vec3 x, dx, d2x;
    f(t, x, dx, d2x);
    const auto s = plane_from_sphere(x, dx, d2x);
    z[j] = s.xi;
    dz[j] = s.dxi;
    k[j] = curvature(s.dxi, s.d2xi);
  }
  return make_curve(std::move(z), std::move(dz), std::move(k));
}

BoundaryCurve with_orientation(BoundaryCurve c, Orientation want) {
  return c.orientation == want ? c : c.reversed();
}

void tangent_frame(const Vec3& c, Vec3& u, Vec3& v) {
  Vec3 e = std::abs(c[0]) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
  u = (e - e.dot(c) * c).normalized();
  v = c.cross(u);
}

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

bool segments_intersect(Complex p1, Complex p2, Complex q1, Complex q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on_segment = [](Complex a, Complex b, Complex p) {
    return std::min(a.real(), b.real()) <= p.real() && p.real() <= std::max(a.real(), b.real()) &&
           std::min(a.imag(), b.imag()) <= p.imag() && p.imag() <= std::max(a.imag(), b.imag());
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

struct Segment {
  Complex a, b;
  std::size_t poly, index;
  double xmin, xmax;
};

// Sweep over segments sorted by xmin. Returns the polygon ids of the first
// intersecting pair found; adjacent edges of one polygon are ignored.
std::optional<std::pair<std::size_t, std::size_t>> find_intersection(
    const std::vector<std::vector<Complex>>& polys) {
  std::vector<Segment> segs;
  for (std::size_t p = 0; p < polys.size(); ++p) {
    const auto& v = polys[p];
    for (std::size_t i = 0; i < v.size(); ++i) {
      Complex a = v[i], b = v[(i + 1) % v.size()];
      segs.push_back({a, b, p, i, std::min(a.real(), b.real()), std::max(a.real(), b.real())});
    }
  }
  std::sort(segs.begin(), segs.end(), [](const Segment& s, const Segment& t) {
    return s.xmin < t.xmin || (s.xmin == t.xmin && (s.poly < t.poly || (s.poly == t.poly && s.index < t.index)));
  });
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    std::erase_if(active, [&](std::size_t j) { return segs[j].xmax < s.xmin; });
    const double symin = std::min(s.a.imag(), s.b.imag()), symax = std::max(s.a.imag(), s.b.imag());
    for (std::size_t j : active) {
      const auto& t = segs[j];
      if (std::max(t.a.imag(), t.b.imag()) < symin || std::min(t.a.imag(), t.b.imag()) > symax) continue;
      if (s.poly == t.poly) {
        const std::size_t n = polys[s.poly].size();
        const std::size_t d = s.index > t.index ? s.index - t.index : t.index - s.index;
        if (d <= 1 || d == n - 1) continue;
      }
      if (segments_intersect(s.a, s.b, t.a, t.b)) return std::make_pair(s.poly, t.poly);
    }
    active.push_back(i);
  }
  return std::nullopt;
}

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

double min_node_distance(const BoundaryCurve& c, Complex p) {
  double d = std::numeric_limits<double>::infinity();
  for (auto z : c.nodes) d = std::min(d, std::abs(z - p));
  return d;
}

}  // namespace

Complex stereo_project(const SpherePoint& x) {
  const double d = 1.0 - x.x3;
  if (d <= kPoleTol) throw Error(ErrorCode::NorthPoleSingular, "point at the north pole");
  return {x.x1 / d, x.x2 / d};
}

SpherePoint stereo_inverse(Complex xi) {
  const double r2 = std::norm(xi);
  const double s = 1.0 + r2;
  return {2.0 * xi.real() / s, 2.0 * xi.imag() / s, (r2 - 1.0) / s};
}

Vec3 stereo_pushforward(Complex xi, Complex dxi) {
  const double r2 = std::norm(xi);
  const double s = 1.0 + r2;
  const double dr2 = 2.0 * std::real(std::conj(xi) * dxi);
  return {2.0 * dxi.real() / s - 2.0 * xi.real() * dr2 / (s * s),
          2.0 * dxi.imag() / s - 2.0 * xi.imag() * dr2 / (s * s), 2.0 * dr2 / (s * s)};
}

Eigen::Matrix3d rotation_to_north(const SpherePoint& pole) {
  Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(pole.vec().normalized(), Vec3(0, 0, 1));
  return q.toRotationMatrix();
}

double BoundaryCurve::signed_area() const {
  double a = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) a += std::imag(std::conj(nodes[j]) * d_nodes[j]);
  return 0.5 * mesh_width() * a;
}

BoundaryCurve BoundaryCurve::reversed() const {
  const std::size_t n = size();
  BoundaryCurve r;
  r.nodes.resize(n);
  r.d_nodes.resize(n);
  r.curvatures.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t s = (n - j) % n;
    r.nodes[j] = nodes[s];
    r.d_nodes[j] = -d_nodes[s];
    r.curvatures[j] = -curvatures[s];
  }
  r.orientation = orientation == Orientation::positive ? Orientation::negative : Orientation::positive;
  return r;
}

BoundaryCurve make_curve(std::vector<Complex> nodes, std::vector<Complex> d_nodes,
                         std::vector<double> curvatures) {
  if (nodes.size() != d_nodes.size() || nodes.size() != curvatures.size())
    throw Error(ErrorCode::DimensionMismatch, "curve sample arrays differ in length");
  BoundaryCurve c;
  c.nodes = std::move(nodes);
  c.d_nodes = std::move(d_nodes);
  c.curvatures = std::move(curvatures);
  c.orientation = c.signed_area() >= 0.0 ? Orientation::positive : Orientation::negative;
  return c;
}

BoundaryCurve make_cap_circle(const SpherePoint& center, double radius, std::size_t n) {
  if (!(radius > 0.0 && radius < kPi)) throw Error(ErrorCode::DegenerateCap, "cap radius must lie in (0, pi)");
  if (n < 8) throw Error(ErrorCode::InvalidArgument, "need at least 8 nodes");
  const Vec3 c = center.vec().normalized();
  const double pole_angle = std::acos(std::clamp(c[2], -1.0, 1.0));
  if (std::abs(pole_angle - radius) < 1e-8)
    throw Error(ErrorCode::DegenerateCap, "cap boundary passes through the north pole");
  Vec3 u, v;
  tangent_frame(c, u, v);
  const double cr = std::cos(radius), sr = std::sin(radius);
  auto curve = sample_sphere_curve(n, [&](double t, Vec3& x, Vec3& dx, Vec3& d2x) {
    const Vec3 r = u * std::cos(t) + v * std::sin(t);
    x = c * cr + sr * r;
    dx = sr * (-u * std::sin(t) + v * std::cos(t));
    d2x = -sr * r;
  });
  return with_orientation(std::move(curve), pole_angle < radius ? Orientation::negative : Orientation::positive);
}

BoundaryCurve make_plane_ellipse(Complex center, double a, double b, double rotation, std::size_t n,
                                 bool exterior) {
  if (!(a > 0.0 && b > 0.0)) throw Error(ErrorCode::DegenerateEllipse, "ellipse axes must be positive");
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "need at least 4 nodes");
  const Complex rot = std::polar(1.0, rotation);
  std::vector<Complex> z(n), dz(n);
  std::vector<double> k(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    const double ct = std::cos(t), st = std::sin(t);
    z[j] = center + rot * Complex(a * ct, b * st);
    dz[j] = rot * Complex(-a * st, b * ct);
    k[j] = curvature(dz[j], rot * Complex(-a * ct, -b * st));
  }
  auto c = make_curve(std::move(z), std::move(dz), std::move(k));
  return exterior ? c.reversed() : c;
}

BoundaryCurve make_sphere_ellipse(const SpherePoint& center, double a, double b, double rotation,
                                  std::size_t n) {
  if (!(a > 0.0 && b > 0.0 && a < 0.5 * kPi && b < 0.5 * kPi))
    throw Error(ErrorCode::DegenerateEllipse, "angular semi-axes must lie in (0, pi/2)");
  if (n < 8) throw Error(ErrorCode::InvalidArgument, "need at least 8 nodes");
  const Vec3 c = center.vec().normalized();
  Vec3 u0, v0;
  tangent_frame(c, u0, v0);
  const Vec3 U = std::cos(rotation) * u0 + std::sin(rotation) * v0;
  const Vec3 V = -std::sin(rotation) * u0 + std::cos(rotation) * v0;
  const double ta = std::tan(a), tb = std::tan(b);
  auto curve = sample_sphere_curve(n, [&](double t, Vec3& x, Vec3& dx, Vec3& d2x) {
    const Vec3 y = c + ta * std::cos(t) * U + tb * std::sin(t) * V;
    const Vec3 dy = -ta * std::sin(t) * U + tb * std::cos(t) * V;
    const Vec3 d2y = c - y;
    const double nrm = y.norm();
    const double yd = y.dot(dy);
    const double dn = yd / nrm;
    const double d2n = (dy.dot(dy) + y.dot(d2y)) / nrm - yd * yd / (nrm * nrm * nrm);
    x = y / nrm;
    dx = dy / nrm - y * dn / (nrm * nrm);
    d2x = d2y / nrm - 2.0 * dy * dn / (nrm * nrm) - y * d2n / (nrm * nrm) +
          2.0 * y * dn * dn / (nrm * nrm * nrm);
  });
  bool covers_pole = false;
  if (c[2] > 0.0) {
    const Vec3 p = Vec3(0, 0, 1) / c[2] - c;
    const double s = p.dot(U) / ta, q = p.dot(V) / tb;
    covers_pole = s * s + q * q < 1.0;
  }
  return with_orientation(std::move(curve), covers_pole ? Orientation::negative : Orientation::positive);
}

CurveDerivatives curve_derivatives(std::span<const Complex> nodes) {
  const std::size_t n = nodes.size();
  if (n < 4 || n % 2 != 0) throw Error(ErrorCode::InvalidArgument, "spectral derivatives need an even node count >= 4");
  auto d1 = spectral_derivative(nodes, 1);
  auto d2 = spectral_derivative(nodes, 2);
  double mean = 0.0;
  for (auto v : d1) mean += std::abs(v);
  mean /= static_cast<double>(n);
  CurveDerivatives out;
  out.d_nodes = d1;
  out.curvatures.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(std::abs(d1[j]) > 1e-12 * mean)) throw Error(ErrorCode::ZeroSpeed, "curve speed vanishes");
    out.curvatures[j] = curvature(d1[j], d2[j]);
  }
  return out;
}

BoundaryCurve resample_polyline(std::span<const Complex> vertices, std::size_t n) {
  std::vector<Complex> v;
  for (auto p : vertices)
    if (v.empty() || p != v.back()) v.push_back(p);
  while (v.size() > 1 && v.back() == v.front()) v.pop_back();
  if (v.size() < 16) throw Error(ErrorCode::TooFewVertices, "polyline needs at least 16 distinct vertices");
  if (find_intersection({v})) throw Error(ErrorCode::SelfIntersecting, "polyline intersects itself");
  if (n < 8 || n % 2 != 0) throw Error(ErrorCode::InvalidArgument, "node count must be even and >= 8");

  const std::size_t nv = v.size();
  std::vector<double> s(nv + 1, 0.0);
  for (std::size_t i = 0; i < nv; ++i) s[i + 1] = s[i] + std::abs(v[(i + 1) % nv] - v[i]);
  const double length = s[nv];

  std::size_t nf = 1;
  while (nf < std::max<std::size_t>(8 * n, 4 * nv)) nf *= 2;
  std::vector<Complex> fine(nf);
  std::size_t seg = 0;
  for (std::size_t m = 0; m < nf; ++m) {
    const double u = length * static_cast<double>(m) / static_cast<double>(nf);
    while (seg + 1 < nv && s[seg + 1] <= u) ++seg;
    const double t = (u - s[seg]) / (s[seg + 1] - s[seg]);
    fine[m] = v[seg] + t * (v[(seg + 1) % nv] - v[seg]);
  }
  const auto coef = dft(fine);
  const std::size_t kept = (2 * n + 2) / 3;
  const long kmax = static_cast<long>(kept / 2);
  std::vector<Complex> c(n, 0.0);
  const double scale = static_cast<double>(n) / static_cast<double>(nf);
  for (long k = -kmax; k <= kmax; ++k) {
    c[static_cast<std::size_t>((k + static_cast<long>(n)) % static_cast<long>(n))] =
        coef[static_cast<std::size_t>((k + static_cast<long>(nf)) % static_cast<long>(nf))] * scale;
  }
  auto nodes = idft(c);
  auto d = curve_derivatives(nodes);
  return make_curve(std::move(nodes), std::move(d.d_nodes), std::move(d.curvatures));
}

BoundaryCurve resample_polyline(std::span<const SpherePoint> vertices, std::size_t n) {
  std::vector<Complex> v;
  v.reserve(vertices.size());
  for (const auto& p : vertices) v.push_back(stereo_project(p));
  return resample_polyline(std::span<const Complex>(v), n);
}

std::size_t IslandDomain::total_nodes() const {
  std::size_t n = 0;
  for (const auto& c : curves) n += c.size();
  return n;
}

std::size_t IslandDomain::offset(std::size_t k) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < k; ++i) n += curves[i].size();
  return n;
}

int winding_number(const BoundaryCurve& curve, Complex p) {
  int w = 0;
  const auto& v = curve.nodes;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Complex a = v[i], b = v[(i + 1) % n];
    if (a.imag() <= p.imag()) {
      if (b.imag() > p.imag() && cross(b - a, p - a) > 0) ++w;
    } else {
      if (b.imag() <= p.imag() && cross(b - a, p - a) < 0) --w;
    }
  }
  return w;
}

std::optional<std::size_t> island_containing(const IslandDomain& domain, Complex p) {
  for (std::size_t k = 0; k < domain.islands(); ++k) {
    const int w = winding_number(domain.curves[k], p);
    if (domain.is_outer(k) ? w == 0 : w != 0) return k;
  }
  return std::nullopt;
}

Complex interior_point(const BoundaryCurve& curve) {
  const auto& v = curve.nodes;
  const std::size_t n = v.size();
  double area = 0.0;
  Complex cen = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex a = v[i], b = v[(i + 1) % n];
    const double c = cross(a, b);
    area += c;
    cen += (a + b) * c;
  }
  cen /= 3.0 * area;

  double xmin = v[0].real(), xmax = xmin, ymin = v[0].imag(), ymax = ymin;
  for (auto z : v) {
    xmin = std::min(xmin, z.real());
    xmax = std::max(xmax, z.real());
    ymin = std::min(ymin, z.imag());
    ymax = std::max(ymax, z.imag());
  }
  constexpr int g = 40;
  Complex best = cen;
  double best_d = -1.0;
  for (int i = 1; i < g; ++i) {
    for (int j = 1; j < g; ++j) {
      const Complex p(xmin + (xmax - xmin) * i / g, ymin + (ymax - ymin) * j / g);
      if (winding_number(curve, p) == 0) continue;
      const double d = min_node_distance(curve, p);
      if (d > best_d) {
        best_d = d;
        best = p;
      }
    }
  }
  if (winding_number(curve, cen) != 0 && min_node_distance(curve, cen) >= 0.5 * best_d) return cen;
  if (best_d < 0.0) throw Error(ErrorCode::InvalidArgument, "could not locate an interior point");
  return best;
}

Complex default_anchor(const BoundaryCurve& curve, bool outer) {
  const Complex p = interior_point(curve);
  const std::size_t n = curve.size();
  std::vector<double> gx, gw;
  gauss_legendre(24, gx, gw);
  Vec3 sum = Vec3::Zero();
  const double h = curve.mesh_width();
  for (std::size_t j = 0; j < n; ++j) {
    const Complex r = curve.nodes[j] - p;
    const double jac = std::imag(std::conj(r) * curve.d_nodes[j]);
    for (std::size_t q = 0; q < gx.size(); ++q) {
      const Complex z = p + gx[q] * r;
      const double s = 1.0 + std::norm(z);
      sum += stereo_inverse(z).vec() * (4.0 / (s * s)) * gx[q] * gw[q] * jac * h;
    }
  }
  if (curve.orientation == Orientation::negative) sum = -sum;
  if (outer) sum = -sum;
  if (sum.norm() > 1e-12) {
    const Vec3 x = sum.normalized();
    if (1.0 - x[2] > 1e-6) {
      const Complex a = stereo_project(SpherePoint(x));
      const int w = winding_number(curve, a);
      if (outer ? w == 0 : w != 0) return a;
    }
  }
  if (!outer) return p;
  double radius = 0.0;
  for (auto z : curve.nodes) radius = std::max(radius, std::abs(z - p));
  return p + 2.0 * radius;
}

IslandDomain orient_and_validate(IslandDomain domain) {
  const std::size_t m = domain.islands();
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "domain has no islands");
  for (std::size_t k = 0; k < m; ++k) {
    auto& c = domain.curves[k];
    if (c.size() < 4) throw Error(ErrorCode::InvalidArgument, "curve has too few nodes");
    for (auto d : c.d_nodes)
      if (!(std::abs(d) > 0.0)) throw Error(ErrorCode::ZeroSpeed, "curve speed vanishes");
    const Orientation want = domain.is_outer(k) ? Orientation::negative : Orientation::positive;
    if (c.orientation != want) c = c.reversed();
  }

  std::vector<std::vector<Complex>> polys;
  for (const auto& c : domain.curves) polys.push_back(c.nodes);
  if (auto hit = find_intersection(polys)) {
    if (hit->first == hit->second)
      throw Error(ErrorCode::SelfIntersecting, "curve " + std::to_string(hit->first) + " intersects itself");
    throw Error(ErrorCode::OverlappingIslands, "curves " + std::to_string(hit->first) + " and " +
                                                   std::to_string(hit->second) + " intersect");
  }
  for (std::size_t k = 0; k < m; ++k) {
    const Complex probe = domain.curves[k].nodes[0];
    for (std::size_t j = 0; j < m; ++j) {
      if (j == k) continue;
      const int w = winding_number(domain.curves[j], probe);
      const bool ok = domain.is_outer(j) ? w != 0 : w == 0;
      if (!ok)
        throw Error(ErrorCode::OverlappingIslands,
                    "island " + std::to_string(k) + " overlaps island " + std::to_string(j));
    }
  }

  if (domain.anchors.empty()) {
    for (std::size_t k = 0; k < m; ++k) domain.anchors.push_back(default_anchor(domain.curves[k], domain.is_outer(k)));
  }
  if (domain.anchors.size() != m) throw Error(ErrorCode::DimensionMismatch, "one anchor per island required");
  for (std::size_t k = 0; k < m; ++k) {
    if (std::isnan(domain.anchors[k].real()) || std::isnan(domain.anchors[k].imag()))
      domain.anchors[k] = default_anchor(domain.curves[k], domain.is_outer(k));
    const auto owner = island_containing(domain, domain.anchors[k]);
    if (!owner || *owner != k)
      throw Error(ErrorCode::AnchorOutsideIsland, "anchor " + std::to_string(k) + " is not inside its island");
  }
  return domain;
}

NodeSet flatten(const IslandDomain& domain) {
  NodeSet s;
  const std::size_t n = domain.total_nodes();
  s.z.reserve(n);
  s.dz.reserve(n);
  s.kappa.reserve(n);
  s.weight.reserve(n);
  s.curve.reserve(n);
  s.offsets.push_back(0);
  for (std::size_t k = 0; k < domain.islands(); ++k) {
    const auto& c = domain.curves[k];
    const double h = c.mesh_width();
    for (std::size_t j = 0; j < c.size(); ++j) {
      s.z.push_back(c.nodes[j]);
      s.dz.push_back(c.d_nodes[j]);
      s.kappa.push_back(c.curvatures[j]);
      s.weight.push_back(h);
      s.curve.push_back(k);
    }
    s.offsets.push_back(s.z.size());
  }
  return s;
}

double geodesic_distance(Complex a, Complex b) {
  const double chord = 2.0 * std::abs(a - b) / std::sqrt((1.0 + std::norm(a)) * (1.0 + std::norm(b)));
  return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
}

}  // namespace lbs
