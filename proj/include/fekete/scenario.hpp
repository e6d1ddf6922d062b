#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fekete/dynamics.hpp"
#include "fekete/flows.hpp"
#include "fekete/graphcalc.hpp"
#include "fekete/integrate.hpp"

namespace fekete {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline constexpr int kScenarioVersion = 1;

// ---- scenario description ----------------------------------------------------

struct CurveDesc {
  std::string type = "ellipse";  // "ellipse" (a, b) or "polar" (Fourier radius)
  double a = 1.0, b = 1.0;
  std::vector<double> cos_coeffs, sin_coeffs;  // r(t) = c0 + sum c_k cos kt + s_k sin kt
  int samples = kArcSamples;
  bool operator==(const CurveDesc&) const = default;

  std::function<Vec2(double)> gamma() const {
    if (type == "ellipse") {
      const double A = a, Bv = b;
      return [A, Bv](double t) { return Vec2(A * std::cos(2 * kPi * t), Bv * std::sin(2 * kPi * t)); };
    }
    const auto c = cos_coeffs;
    const auto s = sin_coeffs;
    return [c, s](double t) {
      const double th = 2 * kPi * t;
      double r = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) r += c[k] * std::cos(double(k) * th);
      for (std::size_t k = 0; k < s.size(); ++k) r += s[k] * std::sin(double(k + 1) * th);
      return Vec2(r * std::cos(th), r * std::sin(th));
    };
  }
};

struct ManifoldDesc {
  ManifoldKind kind = ManifoldKind::UnitCircle;
  double a = 1.0;
  AttitudeVariant variant = AttitudeVariant::FaceOrigin;
  CurveDesc curve;
  bool operator==(const ManifoldDesc&) const = default;

  ManifoldSpec build() const {
    switch (kind) {
      case ManifoldKind::UnitCircle: return ManifoldSpec::unit_circle();
      case ManifoldKind::Ellipse: return ManifoldSpec::ellipse(a);
      case ManifoldKind::UnitSphere: return ManifoldSpec::unit_sphere();
      case ManifoldKind::JordanCurve: return ManifoldSpec::jordan_curve(curve.gamma(), curve.samples);
      case ManifoldKind::SE2Circle: return ManifoldSpec::se2_circle(variant);
      case ManifoldKind::SE3Sphere: return ManifoldSpec::se3_sphere();
    }
    return {};
  }
  int dimension() const { return kind == ManifoldKind::UnitSphere || kind == ManifoldKind::SE3Sphere ? 3 : 2; }
  bool is_pose() const { return kind == ManifoldKind::SE2Circle || kind == ManifoldKind::SE3Sphere; }
};

struct WeightedEdge {
  int i, j;  // 1-based
  double w;
  bool operator==(const WeightedEdge&) const = default;
};

struct GraphDesc {
  std::string builder = "cycle";  // cycle | complete | line | thomsen | moser_spindle | explicit
  int n = 0;
  std::vector<WeightedEdge> edges;      // explicit builder
  std::vector<WeightedEdge> overrides;  // weight override block
  bool operator==(const GraphDesc&) const = default;

  WeightedGraph build() const {
    WeightedGraph g;
    if (builder == "cycle") g = WeightedGraph::cycle(n);
    else if (builder == "complete") g = WeightedGraph::complete(n);
    else if (builder == "line") g = WeightedGraph::path(n);
    else if (builder == "thomsen") g = WeightedGraph::thomsen();
    else if (builder == "moser_spindle") g = WeightedGraph::moser_spindle();
    else if (builder == "explicit") {
      g = WeightedGraph(n);
      for (const auto& e : edges) set(g, e, "graph.edges");
    } else {
      throw ValidationError("graph.builder", "unknown builder '" + builder + "'");
    }
    for (const auto& e : overrides) set(g, e, "graph.weights.edges");
    return g;
  }

  int vertex_count() const {
    if (builder == "thomsen") return 6;
    if (builder == "moser_spindle") return 7;
    return n;
  }

 private:
  static void set(WeightedGraph& g, const WeightedEdge& e, const char* field) {
    if (e.i < 1 || e.j < 1 || e.i > g.size() || e.j > g.size() || e.i == e.j)
      throw ValidationError(field, "edge endpoints must be distinct vertices in 1.." + std::to_string(g.size()));
    if (!(e.w >= 0.0) || !std::isfinite(e.w)) throw ValidationError(field, "weights must be finite and nonnegative");
    g.set_weight(e.i - 1, e.j - 1, e.w);
  }
};

struct InitDesc {
  std::uint64_t seed = 1;
  double r_min = 0.2, r_max = 1.8;
  std::string ordering = "random";  // random | sorted
  std::vector<int> cyclic_order;    // agents by counter-clockwise slot (sorted ordering)
  bool central_symmetry = false;    // slot k + n/2 is the antipode of slot k
  std::vector<std::vector<double>> states;     // explicit positions
  std::vector<std::vector<double>> attitudes;  // explicit: angle (SE2); heading or 9 row-major entries (SE3)
  bool operator==(const InitDesc&) const = default;
};

struct OutputDesc {
  bool trajectory = true;
  bool report = true;
  bool plot = true;
  int plot_stride = 10;
  bool operator==(const OutputDesc&) const = default;
};

struct Scenario {
  int version = kScenarioVersion;
  std::string name;
  std::string description;
  ManifoldDesc manifold;
  GraphDesc graph;
  InitDesc init;
  IntegratorSettings integrator;
  double capture_band = 0.01;
  OutputDesc outputs;
  bool operator==(const Scenario&) const = default;
};

// ---- JSON <-> Scenario -----------------------------------------------------------

namespace detail {

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ValidationError(where, "must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw ValidationError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(where.empty() ? key : where + "." + key, std::string("wrong type: ") + e.what());
  }
}

inline std::vector<WeightedEdge> parse_edges(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where, "must be an array of [i, j, w]");
  std::vector<WeightedEdge> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() < 2 || e.size() > 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
        (e.size() == 3 && !e[2].is_number()))
      throw ValidationError(where, "each edge is [i, j] or [i, j, weight] with 1-based integer endpoints");
    out.push_back({e[0].get<int>(), e[1].get<int>(), e.size() == 3 ? e[2].get<double>() : 1.0});
  }
  return out;
}

inline ManifoldKind parse_kind(const std::string& s) {
  for (auto k : {ManifoldKind::UnitCircle, ManifoldKind::Ellipse, ManifoldKind::UnitSphere,
                 ManifoldKind::JordanCurve, ManifoldKind::SE2Circle, ManifoldKind::SE3Sphere})
    if (s == to_string(k)) return k;
  throw ValidationError("manifold.kind", "unknown manifold '" + s + "'");
}

inline AttitudeVariant parse_variant(const std::string& s) {
  for (auto v : {AttitudeVariant::FaceOrigin, AttitudeVariant::FaceOutward, AttitudeVariant::TangentAligned})
    if (s == to_string(v)) return v;
  throw ValidationError("manifold.variant", "unknown variant '" + s + "'");
}

inline std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

inline void validate(const Scenario& s) {
  if (s.version != kScenarioVersion) throw ValidationError("version", "unsupported version " + std::to_string(s.version));
  if (s.name.empty()) throw ValidationError("name", "must be non-empty");
  for (char c : s.name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
      throw ValidationError("name", "only letters, digits, '_' and '-' are allowed");
  const auto& m = s.manifold;
  if (m.kind == ManifoldKind::Ellipse && !(m.a > 0.0 && std::isfinite(m.a)))
    throw ValidationError("manifold.a", "must be positive");
  if (m.kind == ManifoldKind::JordanCurve) {
    if (m.curve.type != "ellipse" && m.curve.type != "polar")
      throw ValidationError("manifold.curve.type", "must be 'ellipse' or 'polar'");
    if (m.curve.samples < 8) throw ValidationError("manifold.curve.samples", "must be at least 8");
    if (m.curve.type == "ellipse" && !(m.curve.a > 0.0 && m.curve.b > 0.0))
      throw ValidationError("manifold.curve", "semi-axes must be positive");
    if (m.curve.type == "polar" && m.curve.cos_coeffs.empty())
      throw ValidationError("manifold.curve.cos", "needs at least the constant term");
  }
  const int n = s.graph.vertex_count();
  if (n < 2) throw ValidationError("graph.n", "need at least two agents");
  WeightedGraph g = s.graph.build();
  (void)g;
  s.integrator.validate();
  if (!(s.capture_band >= 0.0)) throw ValidationError("integrator.capture_band", "must be nonnegative");
  const auto& in = s.init;
  if (!(in.r_min > 0.0 && in.r_max >= in.r_min)) throw ValidationError("init", "need 0 < r_min <= r_max");
  if (in.ordering != "random" && in.ordering != "sorted") throw ValidationError("init.ordering", "must be 'random' or 'sorted'");
  if ((in.ordering == "sorted" || in.central_symmetry || !in.cyclic_order.empty()) && m.dimension() != 2)
    throw ValidationError("init.ordering", "sorted, cyclic and symmetric initializations need a planar manifold");
  if (!in.cyclic_order.empty()) {
    std::vector<int> c = in.cyclic_order;
    std::sort(c.begin(), c.end());
    bool perm = int(c.size()) == n;
    for (int k = 0; perm && k < n; ++k) perm = c[k] == k + 1;
    if (!perm) throw ValidationError("init.cyclic_order", "must be a permutation of 1.." + std::to_string(n));
  }
  if (in.central_symmetry && n % 2) throw ValidationError("init.central_symmetry", "needs an even agent count");
  if (!in.states.empty()) {
    if (int(in.states.size()) != n)
      throw ValidationError("init.states", "graph has " + std::to_string(n) + " vertices but " +
                                               std::to_string(in.states.size()) + " states are given");
    for (const auto& x : in.states)
      if (int(x.size()) != m.dimension())
        throw ValidationError("init.states", "each state needs " + std::to_string(m.dimension()) + " coordinates");
  }
  if (!in.attitudes.empty()) {
    if (!m.is_pose()) throw ValidationError("init.attitudes", "only pose manifolds carry attitudes");
    if (in.states.empty()) throw ValidationError("init.attitudes", "explicit attitudes need explicit states");
    if (int(in.attitudes.size()) != n) throw ValidationError("init.attitudes", "one attitude per agent is required");
    for (const auto& r : in.attitudes) {
      if (m.dimension() == 2 && r.size() != 1) throw ValidationError("init.attitudes", "planar attitudes are single angles");
      if (m.dimension() == 3 && r.size() != 3 && r.size() != 9)
        throw ValidationError("init.attitudes", "spatial attitudes are a heading [x, y, z] or 9 row-major entries");
      if (r.size() == 3 && !(Vec3(r[0], r[1], r[2]).norm() > 0.0))
        throw ValidationError("init.attitudes", "heading must be nonzero");
      if (r.size() == 9) {
        Mat3 R;
        for (int k = 0; k < 9; ++k) R(k / 3, k % 3) = r[k];
        if (!is_rotation<3>(R, 1e-9)) throw ValidationError("init.attitudes", "matrix is not a rotation");
      }
    }
  }
  if (s.outputs.plot_stride < 1) throw ValidationError("outputs.plot_stride", "must be at least 1");
}

inline Scenario scenario_from_json(const json& j) {
  using detail::get;
  detail::only_keys(j, "", {"version", "name", "description", "manifold", "graph", "init", "integrator", "outputs"});
  Scenario s;
  if (!j.contains("version")) throw ValidationError("version", "missing");
  s.version = get<int>(j, "version", "", 0);
  s.name = get<std::string>(j, "name", "", "");
  s.description = get<std::string>(j, "description", "", "");

  if (!j.contains("manifold")) throw ValidationError("manifold", "missing");
  const json& m = j.at("manifold");
  detail::only_keys(m, "manifold", {"kind", "a", "variant", "curve"});
  s.manifold.kind = detail::parse_kind(get<std::string>(m, "kind", "manifold", ""));
  s.manifold.a = get<double>(m, "a", "manifold", 1.0);
  if (m.contains("variant")) s.manifold.variant = detail::parse_variant(get<std::string>(m, "variant", "manifold", ""));
  if (m.contains("curve")) {
    const json& c = m.at("curve");
    detail::only_keys(c, "manifold.curve", {"type", "a", "b", "cos", "sin", "samples"});
    s.manifold.curve.type = get<std::string>(c, "type", "manifold.curve", "ellipse");
    s.manifold.curve.a = get<double>(c, "a", "manifold.curve", 1.0);
    s.manifold.curve.b = get<double>(c, "b", "manifold.curve", 1.0);
    s.manifold.curve.cos_coeffs = get<std::vector<double>>(c, "cos", "manifold.curve", {});
    s.manifold.curve.sin_coeffs = get<std::vector<double>>(c, "sin", "manifold.curve", {});
    s.manifold.curve.samples = get<int>(c, "samples", "manifold.curve", kArcSamples);
  }

  if (!j.contains("graph")) throw ValidationError("graph", "missing");
  const json& g = j.at("graph");
  detail::only_keys(g, "graph", {"builder", "n", "edges", "weights"});
  s.graph.builder = get<std::string>(g, "builder", "graph", "");
  s.graph.n = get<int>(g, "n", "graph", 0);
  if (s.graph.builder == "thomsen") s.graph.n = get<int>(g, "n", "graph", 6);
  if (s.graph.builder == "moser_spindle") s.graph.n = get<int>(g, "n", "graph", 7);
  if ((s.graph.builder == "thomsen" && s.graph.n != 6) || (s.graph.builder == "moser_spindle" && s.graph.n != 7))
    throw ValidationError("graph.n", "does not match the fixed size of the named graph");
  if (g.contains("edges")) {
    if (s.graph.builder != "explicit") throw ValidationError("graph.edges", "only the explicit builder takes edges");
    s.graph.edges = detail::parse_edges(g.at("edges"), "graph.edges");
  }
  if (g.contains("weights")) {
    const json& w = g.at("weights");
    detail::only_keys(w, "graph.weights", {"edges"});
    if (w.contains("edges")) s.graph.overrides = detail::parse_edges(w.at("edges"), "graph.weights.edges");
  }

  if (j.contains("init")) {
    const json& in = j.at("init");
    detail::only_keys(in, "init", {"seed", "r_min", "r_max", "ordering", "cyclic_order", "central_symmetry", "states", "attitudes"});
    s.init.seed = get<std::uint64_t>(in, "seed", "init", 1);
    s.init.r_min = get<double>(in, "r_min", "init", 0.2);
    s.init.r_max = get<double>(in, "r_max", "init", 1.8);
    s.init.ordering = get<std::string>(in, "ordering", "init", "random");
    s.init.cyclic_order = get<std::vector<int>>(in, "cyclic_order", "init", {});
    s.init.central_symmetry = get<bool>(in, "central_symmetry", "init", false);
    s.init.states = get<std::vector<std::vector<double>>>(in, "states", "init", {});
    if (in.contains("attitudes")) {
      const json& a = in.at("attitudes");
      if (!a.is_array()) throw ValidationError("init.attitudes", "must be an array");
      for (const auto& r : a) {
        if (r.is_number()) s.init.attitudes.push_back({r.get<double>()});
        else if (r.is_array()) s.init.attitudes.push_back(get<std::vector<double>>(json{{"v", r}}, "v", "init.attitudes", {}));
        else throw ValidationError("init.attitudes", "entries are angles or arrays");
      }
    }
  }
  if (j.contains("integrator")) {
    const json& it = j.at("integrator");
    detail::only_keys(it, "integrator", {"h", "t_max", "stop_tol", "record_every", "max_repairs", "capture_band"});
    s.integrator.h = get<double>(it, "h", "integrator", 0.01);
    s.integrator.t_max = get<double>(it, "t_max", "integrator", 200.0);
    s.integrator.stop_tol = get<double>(it, "stop_tol", "integrator", 1e-9);
    s.integrator.record_every = get<int>(it, "record_every", "integrator", 1);
    s.integrator.max_repairs = get<int>(it, "max_repairs", "integrator", 8);
    s.capture_band = get<double>(it, "capture_band", "integrator", 0.01);
  }
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    detail::only_keys(o, "outputs", {"trajectory", "report", "plot", "plot_stride"});
    s.outputs.trajectory = get<bool>(o, "trajectory", "outputs", true);
    s.outputs.report = get<bool>(o, "report", "outputs", true);
    s.outputs.plot = get<bool>(o, "plot", "outputs", true);
    s.outputs.plot_stride = get<int>(o, "plot_stride", "outputs", 10);
  }
  validate(s);
  return s;
}

inline Scenario parse_scenario(const std::string& text, const std::string& where = "<scenario>") {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(where, line, col, e.what());
  }
  return scenario_from_json(j);
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.string());
}

inline ordered_json edges_to_json(const std::vector<WeightedEdge>& es) {
  ordered_json a = ordered_json::array();
  for (const auto& e : es) a.push_back({e.i, e.j, e.w});
  return a;
}

inline ordered_json scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["version"] = s.version;
  j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  ordered_json m;
  m["kind"] = to_string(s.manifold.kind);
  if (s.manifold.kind == ManifoldKind::Ellipse) m["a"] = s.manifold.a;
  if (s.manifold.kind == ManifoldKind::SE2Circle) m["variant"] = to_string(s.manifold.variant);
  if (s.manifold.kind == ManifoldKind::JordanCurve) {
    const auto& c = s.manifold.curve;
    ordered_json cj;
    cj["type"] = c.type;
    if (c.type == "ellipse") {
      cj["a"] = c.a;
      cj["b"] = c.b;
    } else {
      cj["cos"] = c.cos_coeffs;
      cj["sin"] = c.sin_coeffs;
    }
    cj["samples"] = c.samples;
    m["curve"] = cj;
  }
  j["manifold"] = m;
  ordered_json g;
  g["builder"] = s.graph.builder;
  g["n"] = s.graph.vertex_count();
  if (s.graph.builder == "explicit") g["edges"] = edges_to_json(s.graph.edges);
  if (!s.graph.overrides.empty()) g["weights"] = {{"edges", edges_to_json(s.graph.overrides)}};
  j["graph"] = g;
  ordered_json in;
  in["seed"] = s.init.seed;
  in["r_min"] = s.init.r_min;
  in["r_max"] = s.init.r_max;
  in["ordering"] = s.init.ordering;
  if (!s.init.cyclic_order.empty()) in["cyclic_order"] = s.init.cyclic_order;
  if (s.init.central_symmetry) in["central_symmetry"] = true;
  if (!s.init.states.empty()) in["states"] = s.init.states;
  if (!s.init.attitudes.empty()) {
    ordered_json a = ordered_json::array();
    for (const auto& r : s.init.attitudes) {
      if (r.size() == 1) a.push_back(r[0]);
      else a.push_back(r);
    }
    in["attitudes"] = a;
  }
  j["init"] = in;
  j["integrator"] = {{"h", s.integrator.h},
                     {"t_max", s.integrator.t_max},
                     {"stop_tol", s.integrator.stop_tol},
                     {"record_every", s.integrator.record_every},
                     {"max_repairs", s.integrator.max_repairs},
                     {"capture_band", s.capture_band}};
  j["outputs"] = {{"trajectory", s.outputs.trajectory},
                  {"report", s.outputs.report},
                  {"plot", s.outputs.plot},
                  {"plot_stride", s.outputs.plot_stride}};
  return j;
}

inline std::string write_scenario(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

// ---- initialization ----------------------------------------------------------------

struct InitialState {
  std::vector<Eigen::VectorXd> positions;
  std::vector<Eigen::MatrixXd> attitudes;  // empty unless pose manifold
};

namespace detail {

inline double min_retracted_distance(const ManifoldSpec& spec, const std::vector<Eigen::VectorXd>& x) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      double d;
      if (spec.dimension() == 2) d = geodesic_distance<2>(spec, Vec2(x[i]), Vec2(x[j])).value;
      else d = geodesic_distance<3>(spec, Vec3(x[i]), Vec3(x[j])).value;
      best = std::min(best, d);
    }
  return best;
}

// Planar point at angle th and radius r on the manifold's radial chart.
inline Eigen::VectorXd planar_point(const ManifoldDesc& m, double th, double r) {
  Eigen::VectorXd p(2);
  const double sx = m.kind == ManifoldKind::Ellipse ? m.a : 1.0;
  p << r * sx * std::cos(th), r * std::sin(th);
  return p;
}

}  // namespace detail

// Seeded sampling in the shell r_min <= |x| <= r_max (area/volume uniform),
// resampling until retracted agents are at least 0.05 apart.
inline InitialState initial_state(const Scenario& s) {
  const ManifoldSpec spec = s.manifold.build().position_manifold();
  const int n = s.graph.vertex_count();
  const int dim = s.manifold.dimension();
  InitialState out;
  std::mt19937_64 rng(s.init.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double lo = s.init.r_min, hi = s.init.r_max;
  auto radius = [&] {
    const double u = unit(rng);
    if (dim == 2) return std::sqrt(lo * lo + u * (hi * hi - lo * lo));
    return std::cbrt(lo * lo * lo + u * (hi * hi * hi - lo * lo * lo));
  };

  if (!s.init.states.empty()) {
    for (const auto& x : s.init.states) out.positions.push_back(Eigen::Map<const Eigen::VectorXd>(x.data(), Eigen::Index(x.size())));
  } else {
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw Error(ErrorKind::InvalidArgument, "could not sample a well separated configuration");
      out.positions.assign(n, Eigen::VectorXd());
      if (dim == 3) {
        for (int i = 0; i < n; ++i) {
          Vec3 g;
          do g = Vec3(gauss(rng), gauss(rng), gauss(rng));
          while (g.norm() < 1e-12);
          out.positions[i] = radius() * g.normalized();
        }
      } else {
        const int slots = s.init.central_symmetry ? n / 2 : n;
        std::vector<double> th(slots), rr(slots);
        for (int k = 0; k < slots; ++k) {
          th[k] = (s.init.central_symmetry ? kPi : 2 * kPi) * unit(rng);
          rr[k] = radius();
        }
        if (s.init.ordering == "sorted") std::sort(th.begin(), th.end());
        std::vector<int> order = s.init.cyclic_order;
        if (order.empty())
          for (int k = 1; k <= n; ++k) order.push_back(k);
        for (int k = 0; k < n; ++k) {
          const int slot = k % slots;
          const Eigen::VectorXd p = detail::planar_point(s.manifold, th[slot], rr[slot]);
          out.positions[order[k] - 1] = k < slots ? p : Eigen::VectorXd(-p);
        }
      }
      if (detail::min_retracted_distance(spec, out.positions) >= 0.05) break;
    }
  }

  if (s.manifold.is_pose()) {
    if (!s.init.attitudes.empty()) {
      for (const auto& r : s.init.attitudes) {
        if (dim == 2) out.attitudes.push_back(so2_exp(r[0]));
        else if (r.size() == 3) out.attitudes.push_back(sphere_inject(Vec3(r[0], r[1], r[2]).normalized()));
        else {
          Mat3 R;
          for (int k = 0; k < 9; ++k) R(k / 3, k % 3) = r[k];
          out.attitudes.push_back(R);
        }
      }
    } else {
      for (int i = 0; i < n; ++i) {
        if (dim == 2) out.attitudes.push_back(so2_exp(kPi * (2.0 * unit(rng) - 1.0)));
        else out.attitudes.push_back(so3_exp_vec(Vec3(Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized() * 2.5 * unit(rng))));
      }
    }
  }
  return out;
}

// ---- trajectory tables ------------------------------------------------------------------

// Recorded trajectory with per-agent rows flattened: positions is n x dim,
// attitudes is n x dim^2 (row-major) for pose scenarios.
struct TrajectoryTable {
  int dim = 2;
  bool has_attitude = false;
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> positions;
  std::vector<Eigen::MatrixXd> attitudes;
  std::vector<StepDiagnostics> diagnostics;

  int agents() const { return positions.empty() ? 0 : int(positions.front().rows()); }
};

template <int Dim>
TrajectoryTable to_table(const Trajectory<Configuration<Dim>>& tr) {
  TrajectoryTable t{Dim, false, tr.times, {}, {}, tr.diagnostics};
  for (const auto& cfg : tr.states) {
    Eigen::MatrixXd m(Eigen::Index(cfg.size()), Dim);
    for (std::size_t i = 0; i < cfg.size(); ++i) m.row(Eigen::Index(i)) = cfg[i].transpose();
    t.positions.push_back(std::move(m));
  }
  return t;
}

template <int Dim>
TrajectoryTable to_table(const Trajectory<std::vector<Pose<Dim>>>& tr) {
  TrajectoryTable t{Dim, true, tr.times, {}, {}, tr.diagnostics};
  for (const auto& st : tr.states) {
    Eigen::MatrixXd m(Eigen::Index(st.size()), Dim), r(Eigen::Index(st.size()), Dim * Dim);
    for (std::size_t i = 0; i < st.size(); ++i) {
      m.row(Eigen::Index(i)) = st[i].p.transpose();
      for (int a = 0; a < Dim; ++a)
        for (int b = 0; b < Dim; ++b) r(Eigen::Index(i), a * Dim + b) = st[i].R(a, b);
    }
    t.positions.push_back(std::move(m));
    t.attitudes.push_back(std::move(r));
  }
  return t;
}

inline std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_trajectory_csv(const TrajectoryTable& t, std::ostream& os) {
  os << "t,agent";
  for (int k = 1; k <= t.dim; ++k) os << ",x" << k;
  if (t.has_attitude)
    for (int a = 1; a <= t.dim; ++a)
      for (int b = 1; b <= t.dim; ++b) os << ",r" << a << b;
  os << "\n";
  for (std::size_t s = 0; s < t.times.size(); ++s)
    for (int i = 0; i < t.agents(); ++i) {
      os << fmt17(t.times[s]) << ',' << i + 1;
      for (int k = 0; k < t.dim; ++k) os << ',' << fmt17(t.positions[s](i, k));
      if (t.has_attitude)
        for (int k = 0; k < t.dim * t.dim; ++k) os << ',' << fmt17(t.attitudes[s](i, k));
      os << "\n";
    }
}

inline TrajectoryTable read_trajectory_csv(std::istream& in, const std::string& where = "<csv>") {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(where, 1, 1, "empty trajectory file");
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) head.push_back(c);
  }
  TrajectoryTable t;
  int nx = 0, nr = 0;
  for (std::size_t k = 2; k < head.size(); ++k) (head[k].rfind("x", 0) == 0 ? nx : nr)++;
  if (head.size() < 4 || head[0] != "t" || head[1] != "agent" || (nx != 2 && nx != 3) || (nr != 0 && nr != nx * nx))
    throw ParseError(where, 1, 1, "header must be t,agent,x1..xm[,r11..rmm]");
  t.dim = nx;
  t.has_attitude = nr > 0;
  std::map<double, std::vector<std::pair<int, std::vector<double>>>> rows;
  int lineno = 1;
  int max_agent = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string c;
    std::vector<double> v;
    try {
      while (std::getline(ss, c, ',')) v.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw ParseError(where, lineno, 1, "malformed number");
    }
    if (v.size() != head.size()) throw ParseError(where, lineno, 1, "wrong column count");
    const int agent = int(v[1]);
    if (agent < 1 || double(agent) != v[1]) throw ParseError(where, lineno, 1, "agent index must be a positive integer");
    max_agent = std::max(max_agent, agent);
    rows[v[0]].emplace_back(agent, std::vector<double>(v.begin() + 2, v.end()));
  }
  for (const auto& [time, rs] : rows) {
    if (int(rs.size()) != max_agent) throw ParseError(where, 0, 0, "time " + fmt17(time) + " lacks some agents");
    Eigen::MatrixXd p(max_agent, nx), r(max_agent, std::max(nr, 1));
    for (const auto& [agent, vals] : rs) {
      for (int k = 0; k < nx; ++k) p(agent - 1, k) = vals[k];
      for (int k = 0; k < nr; ++k) r(agent - 1, k) = vals[nx + k];
    }
    t.times.push_back(time);
    t.positions.push_back(p);
    if (t.has_attitude) t.attitudes.push_back(r);
  }
  if (t.times.empty()) throw ParseError(where, 2, 1, "no trajectory rows");
  return t;
}

// ---- statistics and reports -------------------------------------------------------------

struct WindowStats {
  bool available = false;
  double mean_gap = 0.0;
  double gap_min = 0.0;
  double gap_max = 0.0;
  double gap_spread = 0.0;
  double mean_angular_velocity = 0.0;
  double oscillation_amplitude = 0.0;
  std::vector<double> final_gaps;  // sorted counter-clockwise gaps of the final state
};

// Angles of the agents on the circle chart of a planar manifold.
inline std::vector<double> chart_angles(const ManifoldDesc& m, const Eigen::MatrixXd& pos) {
  std::vector<double> th(pos.rows());
  for (Eigen::Index i = 0; i < pos.rows(); ++i) {
    const double sx = m.kind == ManifoldKind::Ellipse ? m.a : 1.0;
    th[i] = std::atan2(pos(i, 1), pos(i, 0) / sx);
  }
  return th;
}

inline std::vector<double> sorted_gaps(std::vector<double> th) {
  std::sort(th.begin(), th.end());
  std::vector<double> g;
  for (std::size_t k = 0; k + 1 < th.size(); ++k) g.push_back(th[k + 1] - th[k]);
  if (!th.empty()) g.push_back(th.front() + 2 * kPi - th.back());
  return g;
}

inline WindowStats terminal_window_stats(const ManifoldDesc& m, const TrajectoryTable& t) {
  WindowStats w;
  if (m.dimension() != 2 || m.kind == ManifoldKind::JordanCurve || t.times.empty()) return w;
  w.available = true;
  const std::size_t N = t.times.size();
  const std::size_t first = N - std::min(N, std::max<std::size_t>(2, N / 10));
  const int n = t.agents();
  w.gap_min = std::numeric_limits<double>::infinity();
  w.gap_max = -std::numeric_limits<double>::infinity();
  std::vector<double> prev = chart_angles(m, t.positions[first]);
  std::vector<double> unwrapped = prev;
  std::vector<double> dev_min(n, std::numeric_limits<double>::infinity()), dev_max(n, -std::numeric_limits<double>::infinity());
  double gap_sum = 0.0;
  for (std::size_t s = first; s < N; ++s) {
    const auto th = chart_angles(m, t.positions[s]);
    if (s > first)
      for (int i = 0; i < n; ++i) unwrapped[i] += wrap_angle(th[i] - prev[i]);
    prev = th;
    const auto gaps = sorted_gaps(th);
    for (double g : gaps) {
      w.gap_min = std::min(w.gap_min, g);
      w.gap_max = std::max(w.gap_max, g);
      gap_sum += g;
    }
    double mean = 0.0;
    for (double u : unwrapped) mean += u / n;
    for (int i = 0; i < n; ++i) {
      dev_min[i] = std::min(dev_min[i], unwrapped[i] - mean);
      dev_max[i] = std::max(dev_max[i], unwrapped[i] - mean);
    }
  }
  w.mean_gap = gap_sum / double(n * (N - first));
  w.gap_spread = w.gap_max - w.gap_min;
  const double dt = t.times.back() - t.times[first];
  const auto th0 = chart_angles(m, t.positions[first]);
  if (dt > 0.0) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += (unwrapped[i] - th0[i]) / dt;
    w.mean_angular_velocity = v / n;
  }
  for (int i = 0; i < n; ++i) w.oscillation_amplitude = std::max(w.oscillation_amplitude, 0.5 * (dev_max[i] - dev_min[i]));
  w.final_gaps = sorted_gaps(chart_angles(m, t.positions.back()));
  std::sort(w.final_gaps.begin(), w.final_gaps.end());
  return w;
}

inline ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

inline ordered_json report_to_json(const EquilibriumReport& r) {
  ordered_json j;
  ordered_json angles = ordered_json::object();
  for (std::size_t k = 0; k < r.angles.edges.size(); ++k)
    angles[edge_label(r.angles.edges[k])] = r.angles.values(Eigen::Index(k));
  j["angles"] = angles;
  j["linear_residual"] = vector_json(r.linear_residual);
  j["realizability_residual"] = vector_json(r.realizability_residual);
  j["polynomial_residuals"] = vector_json(r.polynomial_residuals);
  j["eulerian"] = r.eulerian;
  j["cycle_dim"] = r.cycle_dim;
  j["status"] = r.status;
  j["branch_sensitive"] = r.branch_sensitive;
  return j;
}

enum class RunStatus { Converged, NonConverged, Error };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "CONVERGED";
    case RunStatus::NonConverged: return "NON_CONVERGED";
    case RunStatus::Error: return "ERROR";
  }
  return "?";
}

struct RunResult {
  std::string name;
  RunStatus status = RunStatus::Error;
  std::string error;
  std::filesystem::path output_dir;
  std::filesystem::path trajectory_path;
  std::optional<EquilibriumReport> report;
  std::string report_error;
  WindowStats window;
  double t_final = 0.0;
  double final_rhs_norm = 0.0;
  long steps = 0;
  int repairs = 0;
  TrajectoryTable trajectory;

  const Eigen::MatrixXd& final_positions() const { return trajectory.positions.back(); }
  Eigen::MatrixXd final_attitude(int i) const {
    const int d = trajectory.dim;
    Eigen::MatrixXd R(d, d);
    for (int k = 0; k < d * d; ++k) R(k / d, k % d) = trajectory.attitudes.back()(i, k);
    return R;
  }
};

// Report for planar runs: circle angles of the final (chart-rescaled) state.
inline EquilibriumReport planar_report(const ManifoldDesc& m, const WeightedGraph& g, const Eigen::MatrixXd& pos,
                                       const std::string& status) {
  Configuration<2> cfg(pos.rows());
  const double sx = m.kind == ManifoldKind::Ellipse ? m.a : 1.0;
  for (Eigen::Index i = 0; i < pos.rows(); ++i) cfg[i] = Vec2(pos(i, 0) / sx, pos(i, 1));
  if (m.kind == ManifoldKind::JordanCurve) {
    const ManifoldSpec spec = m.build();
    for (auto& x : cfg) {
      const double s = spec.curve->parameter_of(x);
      x = Vec2(std::cos(2 * kPi * s), std::sin(2 * kPi * s));
    }
  }
  return equilibrium_report(cfg, g, status);
}

inline ordered_json result_to_json(const RunResult& r) {
  ordered_json j;
  j["name"] = r.name;
  j["status"] = to_string(r.status);
  if (!r.error.empty()) j["error"] = r.error;
  j["t_final"] = r.t_final;
  j["final_rhs_norm"] = r.final_rhs_norm;
  j["steps"] = r.steps;
  j["repairs"] = r.repairs;
  if (!r.trajectory_path.empty()) j["trajectory"] = r.trajectory_path.string();
  if (r.window.available) {
    j["window"] = {{"mean_gap", r.window.mean_gap},
                   {"gap_min", r.window.gap_min},
                   {"gap_max", r.window.gap_max},
                   {"gap_spread", r.window.gap_spread},
                   {"mean_angular_velocity", r.window.mean_angular_velocity},
                   {"oscillation_amplitude", r.window.oscillation_amplitude},
                   {"final_gaps", r.window.final_gaps}};
  }
  if (r.report) j["report"] = report_to_json(*r.report);
  if (!r.report_error.empty()) j["report_error"] = r.report_error;
  return j;
}

// ---- plot data -------------------------------------------------------------------------------

struct PlotStyle {
  int stride = 10;
  double arrow_length = 0.18;
  int reference_samples = 361;
};

inline void emit_plot_data(const Scenario& s, const RunResult& r, const PlotStyle& style,
                           const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const auto& t = r.trajectory;
  if (t.times.empty()) return;
  fs::create_directories(dir);
  const int d = t.dim;
  auto coords_header = [&](std::ostream& os, const char* prefix) {
    for (int k = 1; k <= d; ++k) os << "," << prefix << k;
  };
  {
    std::ofstream os(dir / "paths.csv");
    os << "agent,t";
    coords_header(os, "x");
    os << "\n";
    for (int i = 0; i < t.agents(); ++i)
      for (std::size_t s2 = 0; s2 < t.times.size(); ++s2) {
        if (s2 % style.stride != 0 && s2 + 1 != t.times.size()) continue;
        os << i + 1 << ',' << fmt17(t.times[s2]);
        for (int k = 0; k < d; ++k) os << ',' << fmt17(t.positions[s2](i, k));
        os << "\n";
      }
  }
  {
    std::ofstream os(dir / "markers.csv");
    os << "kind,agent";
    coords_header(os, "x");
    os << "\n";
    for (auto [kind, idx] : {std::pair<const char*, std::size_t>{"initial", 0}, {"final", t.times.size() - 1}})
      for (int i = 0; i < t.agents(); ++i) {
        os << kind << ',' << i + 1;
        for (int k = 0; k < d; ++k) os << ',' << fmt17(t.positions[idx](i, k));
        os << "\n";
      }
  }
  {
    std::ofstream os(dir / "reference.csv");
    os << "curve";
    coords_header(os, "x");
    os << "\n";
    const int N = style.reference_samples;
    if (d == 2) {
      const ManifoldSpec spec = s.manifold.build();
      for (int k = 0; k < N; ++k) {
        const double th = 2 * kPi * k / (N - 1);
        Vec2 p;
        if (spec.kind == ManifoldKind::JordanCurve) p = (*spec.curve)(double(k) / (N - 1));
        else if (spec.kind == ManifoldKind::Ellipse) p = Vec2(spec.a * std::cos(th), std::sin(th));
        else p = Vec2(std::cos(th), std::sin(th));
        os << "1," << fmt17(p.x()) << ',' << fmt17(p.y()) << "\n";
      }
    } else {
      for (int c = 0; c < 3; ++c)
        for (int k = 0; k < N; ++k) {
          const double th = 2 * kPi * k / (N - 1);
          Vec3 p = Vec3::Zero();
          p((c + 0) % 3) = std::cos(th);
          p((c + 1) % 3) = std::sin(th);
          os << c + 1 << ',' << fmt17(p.x()) << ',' << fmt17(p.y()) << ',' << fmt17(p.z()) << "\n";
        }
    }
  }
  if (t.has_attitude) {
    std::ofstream os(dir / "arrows.csv");
    os << "kind,agent";
    coords_header(os, "x");
    coords_header(os, "d");
    os << "\n";
    const int axis = d == 2 ? 0 : 2;  // heading along e1 (planar) or e3 (spatial)
    for (auto [kind, idx] : {std::pair<const char*, std::size_t>{"initial", 0}, {"final", t.times.size() - 1}})
      for (int i = 0; i < t.agents(); ++i) {
        os << kind << ',' << i + 1;
        for (int k = 0; k < d; ++k) os << ',' << fmt17(t.positions[idx](i, k));
        for (int k = 0; k < d; ++k) os << ',' << fmt17(style.arrow_length * t.attitudes[idx](i, k * d + axis));
        os << "\n";
      }
  }
}

// ---- running --------------------------------------------------------------------------------

namespace detail {

template <int Dim>
Configuration<Dim> to_configuration(const std::vector<Eigen::VectorXd>& x) {
  Configuration<Dim> c;
  for (const auto& p : x) c.push_back(Point<Dim>(p));
  return c;
}

inline void write_outputs(const Scenario& s, RunResult& r, const std::filesystem::path& out_root) {
  namespace fs = std::filesystem;
  if (out_root.empty()) return;
  r.output_dir = out_root / s.name;
  fs::create_directories(r.output_dir);
  {
    std::ofstream os(r.output_dir / "scenario.json");
    os << write_scenario(s);
  }
  if (s.outputs.trajectory && !r.trajectory.times.empty()) {
    r.trajectory_path = r.output_dir / "trajectory.csv";
    std::ofstream os(r.trajectory_path);
    write_trajectory_csv(r.trajectory, os);
  }
  if (s.outputs.report) {
    ordered_json rep;
    if (r.report) rep = report_to_json(*r.report);
    else {
      rep["eulerian"] = has_eulerian(s.graph.build());
      rep["cycle_dim"] = cycle_space_basis(s.graph.build()).cols();
      rep["status"] = to_string(r.status);
      if (!r.report_error.empty()) rep["error"] = r.report_error;
    }
    std::ofstream os(r.output_dir / "report.json");
    os << rep.dump(2) << "\n";
  }
  if (s.outputs.plot) emit_plot_data(s, r, PlotStyle{s.outputs.plot_stride}, r.output_dir / "plot");
  std::ofstream os(r.output_dir / "result.json");
  os << result_to_json(r).dump(2) << "\n";
}

template <class Traj>
void absorb(RunResult& r, const Traj& tr) {
  r.trajectory = to_table(tr);
  r.status = tr.converged ? RunStatus::Converged : RunStatus::NonConverged;
  r.t_final = tr.times.back();
  r.final_rhs_norm = tr.final_rhs_norm;
  r.steps = tr.steps;
  r.repairs = tr.repairs;
}

}  // namespace detail

// Integrates a scenario with the specialized law of its manifold; errors are
// captured in the result. Files are written below out_root/<name>/ when
// out_root is non-empty.
inline RunResult run_scenario(const Scenario& s, const std::filesystem::path& out_root = {}) {
  RunResult r;
  r.name = s.name;
  try {
    validate(s);
    const ManifoldSpec spec = s.manifold.build();
    const WeightedGraph g = s.graph.build();
    const InitialState init = initial_state(s);
    const int dim = s.manifold.dimension();
    if (s.manifold.is_pose()) {
      if (dim == 2) {
        std::vector<Pose<2>> x0;
        for (std::size_t i = 0; i < init.positions.size(); ++i) x0.push_back({Mat2(init.attitudes[i]), Vec2(init.positions[i])});
        detail::absorb(r, integrate(PoseFlow<2>{g, spec, s.capture_band}, x0, s.integrator));
      } else {
        std::vector<Pose<3>> x0;
        for (std::size_t i = 0; i < init.positions.size(); ++i) x0.push_back({Mat3(init.attitudes[i]), Vec3(init.positions[i])});
        detail::absorb(r, integrate(PoseFlow<3>{g, spec, s.capture_band}, x0, s.integrator));
      }
    } else if (dim == 2) {
      detail::absorb(r, integrate(PointFlow<2>{g, spec, s.capture_band}, detail::to_configuration<2>(init.positions), s.integrator));
    } else {
      detail::absorb(r, integrate(PointFlow<3>{g, spec, s.capture_band}, detail::to_configuration<3>(init.positions), s.integrator));
    }
    r.window = terminal_window_stats(s.manifold, r.trajectory);
    if (dim == 2) {
      try {
        r.report = planar_report(s.manifold, g, r.final_positions(), to_string(r.status));
      } catch (const Error& e) {
        r.report_error = e.what();
      }
    }
  } catch (const Error& e) {
    r.status = RunStatus::Error;
    r.error = std::string("scenario '") + s.name + "': " + e.what();
  } catch (const std::exception& e) {
    r.status = RunStatus::Error;
    r.error = std::string("scenario '") + s.name + "': " + e.what();
  }
  try {
    detail::write_outputs(s, r, out_root);
  } catch (const std::exception& e) {
    r.status = RunStatus::Error;
    r.error += (r.error.empty() ? "" : "; ") + std::string("writing outputs: ") + e.what();
  }
  return r;
}

}  // namespace fekete
