#include "lbsolve/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lbsolve/error.hpp"
#include "lbsolve/fmm.hpp"
#include "lbsolve/kernels.hpp"
#include "lbsolve/parallel.hpp"
#include "lbsolve/presets.hpp"
#include "lbsolve/spectral.hpp"
#include "lbsolve/system.hpp"

namespace lbs {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); }

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string num_short(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) invalid(std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer() || j[key].get<long long>() < 0)
    invalid(std::string("'") + key + "' must be a non-negative integer");
  return j[key].get<std::size_t>();
}

Complex get_plane(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    invalid(std::string(what) + " must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Vec3 get_sphere(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
    invalid(std::string(what) + " must be [x1, x2, x3]");
  Vec3 v(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (!(v.norm() > 0.0)) invalid(std::string(what) + " must be non-zero");
  return v.normalized();
}

struct Built {
  std::shared_ptr<const IslandDomain> domain;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

std::vector<std::vector<double>> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::GeometryParse, "cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == ',' || c == '\t') c = ' ';
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorCode::GeometryParse, path.string() + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

struct IslandInput {
  const json* spec;
  std::string type;
  std::optional<Vec3> sphere_centre;  // for rotation targets
  std::vector<Vec3> sphere_vertices;
  std::vector<Complex> plane_vertices;
};

Vec3 lonlat(double lon_deg, double lat_deg) {
  const double lon = lon_deg * kPi / 180.0, lat = lat_deg * kPi / 180.0;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

Built build(const RunConfig& cfg, std::size_t n) {
  const json g = json::parse(cfg.geometry_json);
  Built out;
  if (g.contains("preset")) {
    const std::string preset = g["preset"].get<std::string>();
    if (preset == "ellipse_field") {
      out.domain = ellipse_field(n);
    } else if (preset == "ellipse_array") {
      out.domain = ellipse_array(get_count(g, "count", 98), n, get_count(g, "seed", 1));
    } else {
      invalid("unknown geometry preset '" + preset + "'");
    }
    return out;
  }
  if (!g.contains("islands") || !g["islands"].is_array() || g["islands"].empty())
    invalid("geometry needs a non-empty 'islands' array or a 'preset'");

  std::vector<IslandInput> inputs;
  for (const auto& isl : g["islands"]) {
    if (!isl.is_object() || !isl.contains("type") || !isl["type"].is_string()) invalid("each island needs a 'type'");
    IslandInput in{&isl, isl["type"].get<std::string>(), std::nullopt, {}, {}};
    if (in.type == "cap" || in.type == "sphere_ellipse") {
      if (!isl.contains("center")) invalid(in.type + " needs 'center'");
      in.sphere_centre = get_sphere(isl["center"], "center");
    } else if (in.type == "polyline") {
      if (!isl.contains("file") || !isl["file"].is_string()) invalid("polyline needs 'file'");
      const std::string coords = isl.value("coordinates", std::string("plane"));
      const auto rows = read_rows(cfg.base_dir / isl["file"].get<std::string>());
      for (const auto& r : rows) {
        if (coords == "plane") {
          if (r.size() != 2) throw Error(ErrorCode::GeometryParse, "plane vertices need 2 columns");
          in.plane_vertices.emplace_back(r[0], r[1]);
        } else if (coords == "sphere") {
          if (r.size() != 3) throw Error(ErrorCode::GeometryParse, "sphere vertices need 3 columns");
          Vec3 v(r[0], r[1], r[2]);
          if (!(v.norm() > 0.0)) throw Error(ErrorCode::GeometryParse, "zero sphere vertex");
          in.sphere_vertices.push_back(v.normalized());
        } else if (coords == "lonlat") {
          if (r.size() != 2) throw Error(ErrorCode::GeometryParse, "lon/lat vertices need 2 columns");
          in.sphere_vertices.push_back(lonlat(r[0], r[1]));
        } else {
          invalid("unknown polyline coordinates '" + coords + "'");
        }
      }
      if (!in.sphere_vertices.empty()) {
        Vec3 c = Vec3::Zero();
        for (const auto& v : in.sphere_vertices) c += v;
        if (c.norm() > 0.0) in.sphere_centre = c.normalized();
      }
    } else if (in.type != "ellipse") {
      invalid("unknown island type '" + in.type + "'");
    }
    inputs.push_back(std::move(in));
  }

  std::optional<std::size_t> pole_island;
  if (g.contains("north_pole")) {
    const auto& np = g["north_pole"];
    Vec3 target;
    if (np.contains("island")) {
      const auto i = get_count(np, "island", 0);
      if (i >= inputs.size() || !inputs[i].sphere_centre) invalid("north_pole.island must name a sphere-defined island");
      target = *inputs[i].sphere_centre;
      pole_island = i;
    } else if (np.contains("point")) {
      target = get_sphere(np["point"], "north_pole.point");
    } else {
      invalid("north_pole needs 'island' or 'point'");
    }
    for (const auto& in : inputs)
      if (in.type == "ellipse") invalid("plane ellipses cannot be combined with a north_pole rotation");
    out.rotation = rotation_to_north(SpherePoint(target));
  }
  const Eigen::Matrix3d& R = out.rotation;

  struct Piece {
    BoundaryCurve curve;
    Complex anchor;
    bool covers_pole;
  };
  std::vector<Piece> pieces;
  const Complex no_anchor(std::nan(""), std::nan(""));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& in = inputs[i];
    const json& s = *in.spec;
    const std::size_t ni = get_count(s, "n", n);
    Piece p{{}, no_anchor, false};
    if (in.type == "cap") {
      p.curve = make_cap_circle(SpherePoint(R * *in.sphere_centre), get_number(s, "radius", 0.0), ni);
      p.covers_pole = p.curve.orientation == Orientation::negative;
    } else if (in.type == "sphere_ellipse") {
      p.curve = make_sphere_ellipse(SpherePoint(R * *in.sphere_centre), get_number(s, "a", 0.0), get_number(s, "b", 0.0),
                                    get_number(s, "rotation", 0.0), ni);
      p.covers_pole = p.curve.orientation == Orientation::negative;
    } else if (in.type == "ellipse") {
      if (!s.contains("center")) invalid("ellipse needs 'center'");
      const bool ext = s.value("exterior", false);
      p.curve = make_plane_ellipse(get_plane(s["center"], "center"), get_number(s, "a", 0.0), get_number(s, "b", 0.0),
                                   get_number(s, "rotation", 0.0), ni, ext);
      p.covers_pole = ext;
    } else {
      if (!in.sphere_vertices.empty()) {
        std::vector<SpherePoint> v;
        for (const auto& x : in.sphere_vertices) v.emplace_back(R * x);
        p.curve = resample_polyline(std::span<const SpherePoint>(v), ni);
      } else {
        p.curve = resample_polyline(std::span<const Complex>(in.plane_vertices), ni);
      }
      p.covers_pole = s.value("contains_north_pole", false) || (pole_island && *pole_island == i);
    }
    if (s.contains("anchor")) {
      const auto& a = s["anchor"];
      p.anchor = a.size() == 3 ? stereo_project(SpherePoint(R * get_sphere(a, "anchor"))) : get_plane(a, "anchor");
    }
    pieces.push_back(std::move(p));
  }

  IslandDomain d;
  std::size_t covering = 0;
  for (const auto& p : pieces) covering += p.covers_pole ? 1 : 0;
  if (covering > 1) throw Error(ErrorCode::OverlappingIslands, "more than one island covers the north pole");
  d.north_pole_island = covering == 1;
  for (int pass = 0; pass < 2; ++pass) {
    for (auto& p : pieces) {
      if (p.covers_pole != (pass == 0)) continue;
      d.curves.push_back(std::move(p.curve));
      d.anchors.push_back(p.anchor);
    }
  }
  out.domain = std::make_shared<const IslandDomain>(orient_and_validate(std::move(d)));
  return out;
}

std::vector<Complex> poles_of(const RunConfig& cfg, const IslandDomain& d) {
  return cfg.poles.empty() ? d.anchors : cfg.poles;
}

std::vector<double> boundary_values(const RunConfig& cfg, const IslandDomain& d) {
  std::vector<double> g;
  g.reserve(d.total_nodes());
  switch (cfg.data) {
    case DataKind::constant:
      g.assign(d.total_nodes(), cfg.constant);
      break;
    case DataKind::poles: {
      const auto poles = poles_of(cfg, d);
      for (const auto& c : d.curves)
        for (auto z : c.nodes) g.push_back(exact_harmonic(z, poles));
      break;
    }
    case DataKind::file: {
      for (const auto& r : read_rows(cfg.base_dir / cfg.data_file))
        for (double v : r) g.push_back(v);
      if (g.size() != d.total_nodes())
        invalid("boundary data file has " + std::to_string(g.size()) + " values, expected " + std::to_string(d.total_nodes()));
      break;
    }
  }
  return g;
}

SolveOptions solve_options(const RunConfig& cfg) {
  SolveOptions o;
  o.gmres = cfg.gmres;
  o.assembly.mode = cfg.mode;
  o.assembly.fmm = cfg.fmm;
  return o;
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name, const std::string& title) {
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream out(cfg.output_dir / name);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + (cfg.output_dir / name).string());
  out << "# lbsolve " << title << "\n# config_hash\t" << cfg.hash << "\n";
  return out;
}

std::string timing(const RunConfig& cfg, double seconds) { return cfg.report_timings ? num_short(seconds) : "-"; }

void warn_no_pole(const IslandDomain& d) {
  if (!d.north_pole_island) std::cerr << "warning: no island covers the north pole\n";
}

// psi on a latitude-longitude grid (cell centres); nan inside islands.
template <class Eval>
void write_grid(const RunConfig& cfg, const std::string& name, const std::string& title, const Built& b, Eval&& eval) {
  const std::size_t nlat = cfg.grid_nlat, nlon = cfg.grid_nlon;
  std::vector<double> lat(nlat * nlon), lon(nlat * nlon), val(nlat * nlon, std::nan(""));
  std::vector<char> near(nlat * nlon, 0);
  std::vector<Complex> pts;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < nlat; ++i) {
    for (std::size_t j = 0; j < nlon; ++j) {
      const std::size_t k = i * nlon + j;
      lat[k] = -90.0 + 180.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(nlat);
      lon[k] = 360.0 * static_cast<double>(j) / static_cast<double>(nlon);
      const Vec3 x = b.rotation * lonlat(lon[k], lat[k]);
      if (1.0 - x[2] <= 1e-13) continue;
      const Complex xi = stereo_project(SpherePoint(x));
      if (island_containing(*b.domain, xi)) continue;
      pts.push_back(xi);
      where.push_back(k);
    }
  }
  const Evaluation ev = eval(pts);
  for (std::size_t t = 0; t < pts.size(); ++t) {
    val[where[t]] = ev.values[t];
    near[where[t]] = ev.near_boundary[t] ? 1 : 0;
  }
  auto out = open_output(cfg, name, title);
  out << "# grid\tnlat=" << nlat << "\tnlon=" << nlon << "\trow-major, latitude outer\n";
  out << "lat\tlon\tpsi\tnear_boundary\n";
  for (std::size_t k = 0; k < val.size(); ++k)
    out << num_short(lat[k]) << '\t' << num_short(lon[k]) << '\t' << num(val[k]) << '\t' << int(near[k]) << '\n';
}

double sample_error(const RunConfig& cfg, const Solution& sol) {
  const auto poles = poles_of(cfg, *sol.domain);
  const auto samples = interior_samples(*sol.domain, cfg.samples, 0.1);
  if (samples.empty()) return std::nan("");
  const auto ev = evaluate_solution(sol, samples, cfg.fmm);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double ex = exact_harmonic(samples[i], poles);
    err = std::max(err, std::abs(ev.values[i] - ex));
    scale = std::max(scale, std::abs(ex));
  }
  return err / (scale > 0.0 ? scale : 1.0);
}

PointVortexSet parse_vortices(const RunConfig& cfg, const Built& b) {
  PointVortexSet vs;
  if (cfg.vortices_json.empty()) return vs;
  const json j = json::parse(cfg.vortices_json);
  const Eigen::Matrix3d& R = b.rotation;
  if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_object() || !v.contains("position")) invalid("each vortex needs 'position' and 'strength'");
      const auto& p = v["position"];
      const Complex xi = p.size() == 3 ? stereo_project(SpherePoint(R * get_sphere(p, "position"))) : get_plane(p, "position");
      vs.push_back({xi, get_number(v, "strength", 0.0)});
    }
    return vs;
  }
  if (!j.is_object() || !j.contains("random")) invalid("'vortices' must be a list or {\"random\": {...}}");
  const auto& r = j["random"];
  const std::size_t count = get_count(r, "count", 0);
  const double min_distance = get_number(r, "min_distance", 0.05);
  const double max_strength = get_number(r, "max_strength", kTwoPi);
  std::mt19937_64 rng(get_count(r, "seed", 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const NodeSet nodes = flatten(*b.domain);
  for (std::size_t tries = 0; vs.size() < count; ++tries) {
    if (tries > 1000000) invalid("could not place the requested vortices");
    const double z = 2.0 * unit(rng) - 1.0, phi = kTwoPi * unit(rng);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double strength = max_strength * (2.0 * unit(rng) - 1.0);
    if (1.0 - z < 1e-6) continue;
    const Complex xi = stereo_project(SpherePoint(s * std::cos(phi), s * std::sin(phi), z));
    if (island_containing(*b.domain, xi)) continue;
    bool ok = true;
    for (auto q : nodes.z)
      if (geodesic_distance(xi, q) < min_distance) {
        ok = false;
        break;
      }
    if (ok) vs.push_back({xi, strength});
  }
  return vs;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::exception& e) {
    invalid(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) invalid("config must be a JSON object");
  static const std::vector<std::string> known{"command", "n", "n_list", "geometry", "boundary_data", "gmres", "fmm",
                                              "mode", "grid", "samples", "report_timings", "vortices", "output_dir"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) invalid("unknown config key '" + it.key() + "'");

  RunConfig c;
  try {
    c.base_dir = base_dir;
    c.command = j.value("command", std::string());
    c.n = get_count(j, "n", 128);
    if (c.n < 8) invalid("'n' must be at least 8");
    if (j.contains("n_list")) {
      if (!j["n_list"].is_array()) invalid("'n_list' must be an array");
      for (const auto& v : j["n_list"]) {
        if (!v.is_number_integer() || v.get<long long>() < 8) invalid("'n_list' entries must be integers >= 8");
        c.n_list.push_back(v.get<std::size_t>());
      }
    }
    if (j.contains("geometry")) {
      if (!j["geometry"].is_object()) invalid("'geometry' must be an object");
      c.geometry_json = j["geometry"].dump();
    }
    if (j.contains("boundary_data")) {
      const auto& b = j["boundary_data"];
      const std::string type = b.value("type", std::string("constant"));
      if (type == "constant") {
        c.data = DataKind::constant;
        c.constant = get_number(b, "value", 0.0);
      } else if (type == "poles") {
        c.data = DataKind::poles;
        if (b.contains("poles") && b["poles"].is_array())
          for (const auto& p : b["poles"]) c.poles.push_back(get_plane(p, "pole"));
      } else if (type == "file") {
        c.data = DataKind::file;
        if (!b.contains("path") || !b["path"].is_string()) invalid("file boundary data needs 'path'");
        c.data_file = b["path"].get<std::string>();
      } else {
        invalid("unknown boundary_data type '" + type + "'");
      }
    }
    if (j.contains("gmres")) {
      const auto& g = j["gmres"];
      c.gmres.tol = get_number(g, "tol", c.gmres.tol);
      c.gmres.restart = static_cast<int>(get_count(g, "restart", static_cast<std::size_t>(c.gmres.restart)));
      c.gmres.max_iters = static_cast<int>(get_count(g, "max_iters", static_cast<std::size_t>(c.gmres.max_iters)));
      if (!(c.gmres.tol > 0.0) || c.gmres.restart < 1 || c.gmres.max_iters < 1) invalid("invalid gmres settings");
    }
    if (j.contains("fmm")) {
      const auto& f = j["fmm"];
      c.fmm.epsilon = get_number(f, "epsilon", c.fmm.epsilon);
      c.fmm.leaf_capacity = get_count(f, "leaf_capacity", c.fmm.leaf_capacity);
      c.fmm.max_depth = static_cast<int>(get_count(f, "max_depth", static_cast<std::size_t>(c.fmm.max_depth)));
      if (!(c.fmm.epsilon > 0.0) || c.fmm.leaf_capacity < 1 || c.fmm.max_depth < 1) invalid("invalid fmm settings");
    }
    if (j.contains("mode")) {
      const std::string m = j["mode"].get<std::string>();
      if (m == "fmm")
        c.mode = ApplyMode::fmm;
      else if (m == "direct")
        c.mode = ApplyMode::direct;
      else
        invalid("mode must be 'fmm' or 'direct'");
    }
    if (j.contains("grid")) {
      c.grid_nlat = get_count(j["grid"], "nlat", 0);
      c.grid_nlon = get_count(j["grid"], "nlon", 0);
    }
    c.samples = get_count(j, "samples", c.samples);
    c.report_timings = j.value("report_timings", true);
    if (j.contains("vortices")) c.vortices_json = j["vortices"].dump();
    c.output_dir = base_dir / j.value("output_dir", std::string("."));
  } catch (const json::exception& e) {
    invalid(std::string("config has a value of the wrong type: ") + e.what());
  }
  c.hash = fnv1a(j.dump());
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::shared_ptr<const IslandDomain> build_domain(const RunConfig& cfg, std::size_t n) {
  if (cfg.geometry_json.empty()) invalid("config has no 'geometry'");
  return build(cfg, n).domain;
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoConvergence:
    case ErrorCode::SingularSchur:
    case ErrorCode::SingularMatrix:
      return 3;
    default:
      return 2;
  }
}

int cmd_solve(const RunConfig& cfg) {
  if (cfg.geometry_json.empty()) invalid("config has no 'geometry'");
  const Built b = build(cfg, cfg.n);
  warn_no_pole(*b.domain);
  if (cfg.mode == ApplyMode::direct && b.domain->total_nodes() + b.domain->islands() > 6000)
    invalid("direct mode requires at most 6000 unknowns");
  const auto g = boundary_values(cfg, *b.domain);
  const Solution sol = solve_dirichlet(b.domain, g, solve_options(cfg));
  const double err = cfg.data == DataKind::poles ? sample_error(cfg, sol) : std::nan("");

  {
    auto out = open_output(cfg, "solve_summary.tsv", "solve");
    out << "key\tvalue\n";
    out << "islands\t" << b.domain->islands() << "\n";
    out << "nodes\t" << b.domain->total_nodes() << "\n";
    out << "north_pole_island\t" << (b.domain->north_pole_island ? 1 : 0) << "\n";
    out << "iterations\t" << sol.report.iterations << "\n";
    out << "residual\t" << num_short(sol.report.residual) << "\n";
    out << "seconds_assemble\t" << timing(cfg, sol.report.seconds_assemble) << "\n";
    out << "seconds_precondition\t" << timing(cfg, sol.report.seconds_precondition) << "\n";
    out << "seconds_solve\t" << timing(cfg, sol.report.seconds_solve) << "\n";
    out << "sample_error\t" << num_short(err) << "\n";
    for (Eigen::Index k = 0; k < sol.strengths.size(); ++k) out << "A_" << k << "\t" << num(sol.strengths[k]) << "\n";
  }
  {
    auto out = open_output(cfg, "density.tsv", "density");
    out << "curve\tnode\tre\tim\tsigma\n";
    std::size_t i = 0;
    for (std::size_t k = 0; k < b.domain->islands(); ++k)
      for (std::size_t j = 0; j < b.domain->curves[k].size(); ++j, ++i) {
        const Complex z = b.domain->curves[k].nodes[j];
        out << k << '\t' << j << '\t' << num(z.real()) << '\t' << num(z.imag()) << '\t'
            << num(sol.sigma[static_cast<Eigen::Index>(i)]) << '\n';
      }
  }
  if (cfg.grid_nlat > 0 && cfg.grid_nlon > 0)
    write_grid(cfg, "grid.tsv", "solve grid", b, [&](const std::vector<Complex>& p) { return evaluate_solution(sol, p, cfg.fmm); });
  std::cout << "solve: " << sol.report.iterations << " iterations, residual " << num_short(sol.report.residual);
  if (!std::isnan(err)) std::cout << ", sample error " << num_short(err);
  std::cout << "\n";
  return 0;
}

int cmd_study(const RunConfig& cfg) {
  if (cfg.n_list.empty()) invalid("study needs a non-empty 'n_list'");
  if (cfg.geometry_json.empty()) invalid("config has no 'geometry'");
  if (cfg.data != DataKind::poles) invalid("study needs 'poles' boundary data");
  const std::size_t finest = *std::max_element(cfg.n_list.begin(), cfg.n_list.end());
  const auto poles = poles_of(cfg, *build_domain(cfg, finest));
  StudyOptions opt;
  opt.solve = solve_options(cfg);
  opt.samples = cfg.samples;
  const auto rows = convergence_study([&](std::size_t n) { return build_domain(cfg, n); },
                                      [&](Complex z) { return exact_harmonic(z, poles); }, cfg.n_list, opt);
  auto out = open_output(cfg, "study.tsv", "study");
  out << "N\titers_unprec\titers_prec\tcond_unprec\tcond_prec\terror\tcpu\n";
  for (const auto& r : rows) {
    out << r.n << '\t' << r.iters_unprec << '\t' << r.iters_prec << '\t' << num_short(r.cond_unprec) << '\t'
        << num_short(r.cond_prec) << '\t' << num_short(r.error) << '\t' << timing(cfg, r.cpu) << '\n';
    std::cout << "N=" << r.n << " iters " << r.iters_prec << " error " << num_short(r.error) << "\n";
  }
  return 0;
}

int cmd_bench(const RunConfig& cfg) {
  if (cfg.n_list.empty()) invalid("bench needs a non-empty 'n_list'");
  if (cfg.geometry_json.empty()) invalid("config has no 'geometry'");
  RunConfig c = cfg;
  c.mode = ApplyMode::fmm;
  if (c.data != DataKind::file) c.data = DataKind::poles;
  auto out = open_output(cfg, "bench.tsv", "bench");
  out << "N\titerations\tcpu_prec\tcpu_solve\terror\tlevels\n";
  out.flush();
  for (auto n : c.n_list) {
    const auto d = build_domain(c, n);
    const auto g = boundary_values(c, *d);
    const Solution sol = solve_dirichlet(d, g, solve_options(c));
    const double err = c.data == DataKind::poles ? sample_error(c, sol) : std::nan("");
    const auto tree = build_tree(flatten(*d).z, c.fmm.leaf_capacity, c.fmm.max_depth);
    out << n << '\t' << sol.report.iterations << '\t' << timing(cfg, sol.report.seconds_precondition) << '\t'
        << timing(cfg, sol.report.seconds_solve) << '\t' << num_short(err) << '\t' << tree.depth() + 1 << '\n';
    out.flush();
    std::cout << "N=" << n << " iterations " << sol.report.iterations << " error " << num_short(err) << "\n";
  }
  return 0;
}

int cmd_vortex(const RunConfig& cfg) {
  if (cfg.geometry_json.empty()) invalid("config has no 'geometry'");
  const Built b = build(cfg, cfg.n);
  warn_no_pole(*b.domain);
  const auto vortices = parse_vortices(cfg, b);
  const VortexField field = solve_point_vortices(b.domain, vortices, solve_options(cfg));

  // off-node boundary check points
  double resid = 0.0, scale = 0.0;
  constexpr std::size_t checks = 100;
  const std::size_t m = b.domain->islands();
  for (std::size_t i = 0; i < checks; ++i) {
    const std::size_t k = i % m;
    const double h = b.domain->curves[k].mesh_width();
    const double alpha = h * (static_cast<double>(i / m) * 0.618033988749895 * 7.0 + 0.37);
    resid = std::max(resid, std::abs(field.on_boundary(k, alpha)));
    const auto z = b.domain->curves[k].nodes;
    scale = std::max(scale, std::abs(field.singular_part(trig_eval(z, alpha))));
  }
  const double rel = scale > 0.0 ? resid / scale : resid;
  {
    auto out = open_output(cfg, "vortex_summary.tsv", "vortex");
    out << "key\tvalue\n";
    out << "vortices\t" << vortices.size() << "\n";
    out << "islands\t" << m << "\n";
    out << "iterations\t" << field.correction.report.iterations << "\n";
    out << "boundary_residual\t" << num_short(resid) << "\n";
    out << "boundary_scale\t" << num_short(scale) << "\n";
    out << "relative_boundary_residual\t" << num_short(rel) << "\n";
    out << "seconds_solve\t" << timing(cfg, field.correction.report.seconds_solve) << "\n";
  }
  if (cfg.grid_nlat > 0 && cfg.grid_nlon > 0) {
    write_grid(cfg, "vortex_grid.tsv", "vortex grid", b, [&](const std::vector<Complex>& p) {
      std::vector<Complex> keep;
      std::vector<std::size_t> idx;
      for (std::size_t t = 0; t < p.size(); ++t) {
        bool at_vortex = false;
        for (const auto& v : vortices) at_vortex = at_vortex || v.position == p[t];
        if (!at_vortex) {
          keep.push_back(p[t]);
          idx.push_back(t);
        }
      }
      const Evaluation part = field.evaluate(keep, cfg.fmm);
      Evaluation ev;
      ev.values.assign(p.size(), std::nan(""));
      ev.near_boundary.assign(p.size(), false);
      for (std::size_t t = 0; t < keep.size(); ++t) {
        ev.values[idx[t]] = part.values[t];
        ev.near_boundary[idx[t]] = part.near_boundary[t];
      }
      return ev;
    });
  }
  std::cout << "vortex: " << vortices.size() << " vortices, relative boundary residual " << num_short(rel) << "\n";
  return 0;
}

int cmd_selftest(const RunConfig& cfg) {
  (void)cfg;
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, double value) {
    std::cout << (ok ? "PASS" : "FAIL") << '\t' << name << '\t' << num_short(value) << "\n";
    if (!ok) ++failures;
  };

  {
    const auto eq = make_cap_circle(SpherePoint(0, 0, 1), 0.5 * kPi, 64);
    IslandDomain d;
    d.curves.push_back(eq);
    const Eigen::MatrixXd k = kernel_matrix(orient_and_validate(d));
    report("equator kernel vanishes", k.cwiseAbs().maxCoeff() <= 1e-13, k.cwiseAbs().maxCoeff());
  }
  {
    const auto c = make_cap_circle(SpherePoint(0.3, 0.2, -0.9), 0.7, 48);
    double worst = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) {
        if (i == j) continue;
        const double a = dlp_kernel(c.nodes[i], c.nodes[j], c.d_nodes[j]);
        const double b = dlp_kernel_sphere_oracle(stereo_inverse(c.nodes[i]).vec(), stereo_inverse(c.nodes[j]).vec(),
                                                  stereo_pushforward(c.nodes[j], c.d_nodes[j]));
        worst = std::max(worst, std::abs(a - b));
      }
    report("plane kernel matches sphere kernel", worst <= 1e-12, worst);
  }
  {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Complex> z(3000), q(3000);
    for (auto& v : z) v = {u(rng), u(rng)};
    for (auto& v : q) v = {u(rng), u(rng)};
    const auto a = cauchy_sum(z, q, {}, 1e-14, true);
    const auto b = cauchy_sum_direct(z, q, {}, true);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      err = std::max(err, std::abs(a[i] - b[i]));
      scale = std::max(scale, std::abs(b[i]));
    }
    report("fmm matches direct sum", err / scale <= 1e-12, err / scale);
  }
  {
    IslandDomain d;
    d.curves.push_back(make_cap_circle(SpherePoint(0.2, 0.1, -1.0), 0.8, 256));
    auto dom = std::make_shared<const IslandDomain>(orient_and_validate(d));
    const std::vector<Complex> poles{dom->anchors[0]};
    const Solution sol = solve_dirichlet(dom, [&](Complex z) { return exact_harmonic(z, poles); });
    const auto pts = interior_samples(*dom, 50, 0.1);
    const auto ev = evaluate_solution(sol, pts);
    double err = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) err = std::max(err, std::abs(ev.values[i] - exact_harmonic(pts[i], poles)));
    report("single cap exact solution", err <= 1e-10, err);
  }
  return failures == 0 ? 0 : 3;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Laplace-Beltrami Dirichlet solver on the sphere with islands"};
  app.require_subcommand(1);
  std::string config_path;
  std::string output_dir;
  bool serial = false;
  int threads = 0;
  std::vector<CLI::App*> subs;
  for (const char* name : {"solve", "study", "bench", "vortex", "selftest"}) {
    auto* s = app.add_subcommand(name);
    auto* opt = s->add_option("-c,--config", config_path, "JSON run configuration");
    if (std::string(name) != "selftest") opt->required();
    s->add_option("-o,--output-dir", output_dir, "directory for output tables");
    s->add_flag("--serial", serial, "single-threaded, reproducible run");
    s->add_option("--threads", threads, "worker threads");
    subs.push_back(s);
  }
  std::vector<std::string> argv_store = args;
  if (argv_store.empty() || argv_store.front().rfind("-", 0) == 0 || argv_store.front() == "solve" ||
      argv_store.front() == "study" || argv_store.front() == "bench" || argv_store.front() == "vortex" ||
      argv_store.front() == "selftest")
    argv_store.insert(argv_store.begin(), "lbsolve");
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << error_name(ErrorCode::ConfigInvalid) << ": " << e.what() << "\n";
    return 2;
  }
  if (serial) set_thread_count(1);
  else if (threads > 0) set_thread_count(threads);

  std::string command;
  for (auto* s : subs)
    if (s->parsed()) command = s->get_name();
  try {
    RunConfig cfg = config_path.empty() ? parse_config("{}") : load_config(config_path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (!cfg.command.empty() && cfg.command != command)
      invalid("config is for command '" + cfg.command + "', not '" + command + "'");
    cfg.command = command;
    if (command == "solve") return cmd_solve(cfg);
    if (command == "study") return cmd_study(cfg);
    if (command == "bench") return cmd_bench(cfg);
    if (command == "vortex") return cmd_vortex(cfg);
    return cmd_selftest(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << error_name(e.code()) << ": " << e.what() << "\n";
    return exit_status(e.code());
  } catch (const json::exception& e) {
    std::cerr << "error: " << error_name(ErrorCode::ConfigInvalid) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: INTERNAL: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace lbs
