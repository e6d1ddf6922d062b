#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "fekete/dynamics.hpp"
#include "fekete/integrate.hpp"

namespace fekete {

namespace detail {

// Moves agent j off a cut-locus partner i by kCutEpsilon, towards i on the
// sphere and counter-clockwise in the plane.
template <int Dim>
void nudge_off_cut(const ManifoldSpec& spec, Configuration<Dim>& x, int i, int j) {
  if constexpr (Dim == 2) {
    if (spec.kind == ManifoldKind::Ellipse) {
      const Vec2 y(x[j].x() / spec.a, x[j].y());
      const Vec2 z = so2_exp(kCutEpsilon) * y;
      x[j] = Vec2(spec.a * z.x(), z.y());
    } else {
      x[j] = so2_exp(kCutEpsilon) * x[j];
    }
  } else {
    Vec3 n = x[i].cross(x[j]);
    if (n.norm() < 1e-300) {
      int k;
      x[j].cwiseAbs().minCoeff(&k);
      n = x[j].cross(Vec3::Unit(k));
    }
    x[j] = so3_exp_vec(-kCutEpsilon * n.normalized()) * x[j];
  }
}

// Snaps a nearly antipodal sphere pair onto an exact antipodal pair when the
// remaining forces would keep it pinned there. Returns whether it snapped.
inline bool sphere_capture(Configuration<3>& x, const WeightedGraph& g, const Edge& e) {
  const Vec3 ri = x[e.i].normalized(), rj = x[e.j].normalized();
  const Vec3 u = (ri - rj).normalized();
  SphereForces f;
  try {
    f = sphere_forces(x, g, e.i, e.j, kCutEpsilon);
  } catch (const Error&) {
    return false;
  }
  if (!sphere_pair_slides(f.tangential[e.i], f.tangential[e.j], u, e.w)) return false;
  x[e.i] = x[e.i].norm() * u;
  x[e.j] = -x[e.j].norm() * u;
  return true;
}

inline void sphere_settle(Configuration<3>& x, const WeightedGraph& g, double band) {
  for (const Edge& e : g.edges()) {
    const double d = unit_angle<3>(x[e.i].normalized(), x[e.j].normalized());
    if (kPi - d < band) sphere_capture(x, g, e);
  }
}

template <int Dim>
bool repair_positions(const ManifoldSpec& spec, const WeightedGraph& g, Configuration<Dim>& x,
                      const Error& err) {
  const auto* pe = dynamic_cast<const PairError*>(&err);
  if (!pe || pe->second() < 0) return false;
  if (err.kind() != ErrorKind::CutLocus && err.kind() != ErrorKind::NearCutLocus) return false;
  const int i = pe->first(), j = pe->second();
  if constexpr (Dim == 3) {
    if (sphere_capture(x, g, {i, j, g.weight(i, j)})) return true;
  }
  nudge_off_cut<Dim>(spec, x, i, j);
  return true;
}

}  // namespace detail

// Agents as points in R^m driven by the specialized law of their manifold.
template <int Dim>
struct PointFlow {
  using State = Configuration<Dim>;
  WeightedGraph graph;
  ManifoldSpec spec;
  double capture_band = 0.01;  // sphere only: distance from pi that triggers capture

  Velocities<Dim> rhs(const State& x) const {
    if constexpr (Dim == 2) {
      switch (spec.kind) {
        case ManifoldKind::UnitCircle:
        case ManifoldKind::SE2Circle: return rhs_circle(x, graph);
        case ManifoldKind::Ellipse: return rhs_ellipse(x, graph, spec.a);
        default: return rhs_general<2>(x, graph, spec);
      }
    } else {
      return rhs_sphere(x, graph, kCutEpsilon);
    }
  }

  Eigen::VectorXd velocity(const State& x) const {
    const auto v = rhs(x);
    Eigen::VectorXd out(Dim * v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out.template segment<Dim>(Dim * i) = v[i];
    return out;
  }

  State advance(const State& x, const Eigen::VectorXd& v, double h) const {
    State y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += h * v.template segment<Dim>(Dim * i);
    return y;
  }

  StepDiagnostics diagnose(const State& x, const Eigen::VectorXd&) const {
    StepDiagnostics d;
    try {
      d.phi = phi<Dim>(x, graph, spec);
    } catch (const Error&) {
    }
    d.normal_norms = normal_norms<Dim>(x, spec);
    return d;
  }

  bool repair(State& x, const Error& err, int) const {
    return detail::repair_positions<Dim>(spec, graph, x, err);
  }

  void settle(State& x) const {
    if constexpr (Dim == 3) detail::sphere_settle(x, graph, capture_band);
  }
};

// Poses on SE(2) / SE(3); velocity layout per agent is [v (Dim), w (1 or 3)].
template <int Dim>
struct PoseFlow {
  using State = std::vector<Pose<Dim>>;
  static constexpr int kRot = Dim == 2 ? 1 : 3;
  static constexpr int kStride = Dim + kRot;
  WeightedGraph graph;
  ManifoldSpec spec;
  double capture_band = 0.01;

  Eigen::VectorXd velocity(const State& x) const {
    const auto v = rhs_se<Dim>(x, graph, spec, kCutEpsilon);
    Eigen::VectorXd out(kStride * v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.template segment<Dim>(kStride * i) = v[i].v;
      if constexpr (Dim == 2) out(kStride * i + 2) = so2_vee(v[i].omega);
      else out.template segment<3>(kStride * i + 3) = vee(v[i].omega);
    }
    return out;
  }

  State advance(const State& x, const Eigen::VectorXd& v, double h) const {
    State y = x;
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i].p += h * v.template segment<Dim>(kStride * i);
      if constexpr (Dim == 2) y[i].R = x[i].R * so2_exp(h * v(kStride * i + 2));
      else y[i].R = x[i].R * so3_exp_vec(Vec3(h * v.template segment<3>(kStride * i + 3)));
    }
    return y;
  }

  StepDiagnostics diagnose(const State& x, const Eigen::VectorXd&) const {
    StepDiagnostics d;
    const auto p = positions(x);
    try {
      d.phi = phi<Dim>(p, graph, spec);
    } catch (const Error&) {
    }
    d.normal_norms = normal_norms<Dim>(p, spec);
    return d;
  }

  bool repair(State& x, const Error& err, int) const {
    const auto* pe = dynamic_cast<const PairError*>(&err);
    if (pe && pe->second() < 0 && err.kind() == ErrorKind::NearCutLocus) {
      auto& R = x[pe->first()].R;
      if constexpr (Dim == 2) R = R * so2_exp(kCutEpsilon);
      else R = R * so3_exp_vec(Vec3(kCutEpsilon * Vec3::UnitX()));
      return true;
    }
    auto p = positions(x);
    if (!detail::repair_positions<Dim>(spec.position_manifold(), graph, p, err)) return false;
    for (std::size_t i = 0; i < x.size(); ++i) x[i].p = p[i];
    return true;
  }

  void settle(State& x) const {
    if constexpr (Dim == 3) {
      auto p = positions(x);
      detail::sphere_settle(p, graph, capture_band);
      for (std::size_t i = 0; i < x.size(); ++i) x[i].p = p[i];
    }
  }
};

}  // namespace fekete
