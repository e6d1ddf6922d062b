#pragma once

#include <cmath>
#include <vector>

#include "fekete/geometry.hpp"
#include "fekete/graph.hpp"
#include "fekete/potential.hpp"

namespace fekete {

template <int Dim>
using Velocities = std::vector<Point<Dim>>;

// x_i - r(x_i) per agent.
template <int Dim>
std::vector<Point<Dim>> normal_component(const Configuration<Dim>& cfg, const ManifoldSpec& spec) {
  const ManifoldSpec m = spec.position_manifold();
  std::vector<Point<Dim>> v(cfg.size());
  for (std::size_t i = 0; i < cfg.size(); ++i) v[i] = cfg[i] - retract<Dim>(m, cfg[i]);
  return v;
}

template <int Dim>
std::vector<double> normal_norms(const Configuration<Dim>& cfg, const ManifoldSpec& spec) {
  std::vector<double> out;
  for (const auto& v : normal_component<Dim>(cfg, spec)) out.push_back(v.norm());
  return out;
}

// r(x) - x + grad phi(r(x)), built from geodesic_velocity.
template <int Dim>
Velocities<Dim> rhs_general(const Configuration<Dim>& cfg, const WeightedGraph& g, const ManifoldSpec& spec) {
  const auto grad = grad_phi<Dim>(cfg, g, spec);
  Velocities<Dim> v(cfg.size());
  for (std::size_t i = 0; i < cfg.size(); ++i) v[i] = grad[i].base - cfg[i] + grad[i].vec;
  return v;
}

namespace detail {

// Signed angle alpha_ij from the SO(2) logarithm of the relative rotation of
// two unit vectors; +pi at exact antipodes.
inline double relative_angle(const Vec2& u, const Vec2& v) {
  const Mat2 W = omega();
  Mat2 M;
  M << u.dot(v), u.dot(W * v), v.dot(W * u), u.dot(v);
  // M = exp(alpha * omega) is a clockwise rotation by alpha.
  return so2_log(M.transpose());
}

inline Velocities<2> rhs_planar(const Configuration<2>& cfg, const WeightedGraph& g, double a) {
  check_size(cfg, g);
  const int n = int(cfg.size());
  const Mat2 W = omega();
  const Vec2 stretch(a, 1.0);
  std::vector<Vec2> y(n);
  std::vector<double> ny(n);
  Velocities<2> v(n);
  for (int i = 0; i < n; ++i) {
    y[i] = Vec2(cfg[i].x() / a, cfg[i].y());
    ny[i] = y[i].norm();
    if (!(ny[i] > 0.0)) throw PairError(ErrorKind::ZeroPoint, i, -1, "retraction undefined at the origin");
    v[i] = (1.0 - ny[i]) / ny[i] * cfg[i];
  }
  for (const Edge& e : g.edges()) {
    const Vec2 ui = y[e.i] / ny[e.i], uj = y[e.j] / ny[e.j];
    const double aij = relative_angle(ui, uj);
    const double aji = relative_angle(uj, ui);
    if (std::abs(aij) < kCoincident) throw PairError(ErrorKind::DiagonalConfiguration, e.i, e.j, "coincident agents");
    // log = alpha * omega, so its inverse is -omega / alpha; ascent takes the
    // negative of that vector field.
    v[e.i] += -e.w * stretch.cwiseProduct((-W / aij) * ui);
    v[e.j] += -e.w * stretch.cwiseProduct((-W / aji) * uj);
  }
  return v;
}

// Rotation frames of a pair on the unit sphere: R_i from the chart, R_j by
// transporting R_i along the connecting great circle.
inline std::pair<Mat3, Mat3> sphere_frames(const Vec3& ri, const Vec3& rj) {
  const Mat3 Ri = sphere_inject(ri);
  return {Ri, sphere_transport(ri, rj) * Ri};
}

// Tangential ascent term of edge (i, j) acting on agent i, from the log of the
// relative rotation and the trace identity 2 d^2 = -tr(L^2).
inline Vec3 sphere_edge_term(const Vec3& ri, const Vec3& rj, double w) {
  const auto [Ri, Rj] = sphere_frames(ri, rj);
  const Mat3 L = so3_log(Rj.transpose() * Ri);
  const double tr = (L * L).trace();
  return -2.0 * w / tr * (Ri * L * Ri.transpose() * ri);
}

// Directions antipodal to within `band` radians (rounding when band is 0);
// norms may differ.
inline bool antipodal(const Vec3& a, const Vec3& b, double band) {
  return a.dot(b) < 0.0 && a.cross(b).norm() <= std::max(4e-16, std::sin(band)) * a.norm() * b.norm();
}

}  // namespace detail

template <int Dim>
inline void check_nonzero(const Configuration<Dim>& cfg) {
  for (std::size_t i = 0; i < cfg.size(); ++i)
    if (!(cfg[i].norm() > 0.0)) throw PairError(ErrorKind::ZeroPoint, int(i), -1, "retraction undefined at the origin");
}

// Closed form for the unit circle.
inline Velocities<2> rhs_circle(const Configuration<2>& cfg, const WeightedGraph& g) {
  return detail::rhs_planar(cfg, g, 1.0);
}

// Circle law under the rescaling diag(1/a, 1); tangent vectors are mapped
// back with diag(a, 1).
inline Velocities<2> rhs_ellipse(const Configuration<2>& cfg, const WeightedGraph& g, double a) {
  if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "ellipse semi-axis must be positive");
  return detail::rhs_planar(cfg, g, a);
}

struct SphereForces {
  std::vector<Vec3> tangential;                 // smooth edge terms per agent
  std::vector<std::pair<int, int>> antipodal;   // edges with x_j parallel to -x_i
};

// Smooth tangential forces on the unit sphere, skipping exactly antipodal
// edges and optionally one further edge.
inline SphereForces sphere_forces(const Configuration<3>& cfg, const WeightedGraph& g, int skip_i = -1,
                                  int skip_j = -1, double band = 0.0) {
  detail::check_size(cfg, g);
  check_nonzero(cfg);
  SphereForces f{std::vector<Vec3>(cfg.size(), Vec3::Zero()), {}};
  for (const Edge& e : g.edges()) {
    if (e.i == skip_i && e.j == skip_j) continue;
    if (detail::antipodal(cfg[e.i], cfg[e.j], band)) {
      f.antipodal.emplace_back(e.i, e.j);
      continue;
    }
    const Vec3 ri = cfg[e.i].normalized(), rj = cfg[e.j].normalized();
    if (detail::unit_angle<3>(ri, rj) < kCoincident)
      throw PairError(ErrorKind::DiagonalConfiguration, e.i, e.j, "coincident agents");
    try {
      f.tangential[e.i] += detail::sphere_edge_term(ri, rj, e.w);
      f.tangential[e.j] += detail::sphere_edge_term(rj, ri, e.w);
    } catch (const Error& err) {
      throw PairError(ErrorKind::CutLocus, e.i, e.j, err.what());
    }
  }
  return f;
}

// Whether an antipodal pair stays pinned under the forces ti, tj from the
// rest of the graph: their common part must not exceed the kink strength.
inline bool sphere_pair_slides(const Vec3& ti, const Vec3& tj, const Vec3& axis, double w) {
  const Vec3 s = 0.5 * (ti + tj);
  const Vec3 st = s - s.dot(axis) * axis;
  return st.norm() <= w / kPi;
}

// Closed form for the unit sphere. Exactly antipodal edges use the
// minimum-norm selection of the kink of ln d at d = pi.
// A positive band treats pairs that close to antipodal the same way, which
// integrators need once a pair has been captured.
inline Velocities<3> rhs_sphere(const Configuration<3>& cfg, const WeightedGraph& g, double band = 0.0) {
  SphereForces f = sphere_forces(cfg, g, -1, -1, band);
  const int n = int(cfg.size());
  Velocities<3> v(n);
  std::vector<Vec3> tang = f.tangential;
  for (const auto& [i, j] : f.antipodal) {
    const Vec3 u = (cfg[i].normalized() - cfg[j].normalized()).normalized();
    const Vec3 s = 0.5 * (f.tangential[i] + f.tangential[j]);
    const Vec3 st = s - s.dot(u) * u;
    const double w = g.weight(i, j);
    if (st.norm() <= w / kPi) {
      tang[i] = 0.5 * (f.tangential[i] - f.tangential[j]);
      tang[j] = -tang[i];
    } else {
      tang[i] -= w / kPi * st.normalized();
      tang[j] -= w / kPi * st.normalized();
    }
  }
  for (int i = 0; i < n; ++i) {
    const double r = cfg[i].norm();
    v[i] = (1.0 - r) / r * cfg[i] + tang[i];
  }
  return v;
}

// ---- Poses -------------------------------------------------------------------

template <int Dim>
struct Pose {
  Rotation<Dim> R = Rotation<Dim>::Identity();
  Point<Dim> p = Point<Dim>::Zero();
};

template <int Dim>
struct PoseVelocity {
  Rotation<Dim> omega;  // body angular velocity, skew
  Point<Dim> v;
};

inline Mat2 se2_target(const Vec2& p, AttitudeVariant variant) {
  const double r = p.norm();
  if (!(r > 0.0)) throw Error(ErrorKind::ZeroPoint, "attitude target undefined at the origin");
  const Mat2 W = omega();
  Mat2 T;
  T.col(0) = -p / r;
  T.col(1) = W * p / r;
  switch (variant) {
    case AttitudeVariant::FaceOrigin: return T;
    case AttitudeVariant::FaceOutward: return -T;
    case AttitudeVariant::TangentAligned: return W * T;
  }
  return T;
}

inline Mat2 rhs_se2_orientation(const Pose<2>& pose, AttitudeVariant variant) {
  const double e = so2_log(pose.R.transpose() * se2_target(pose.p, variant));
  if (kPi - std::abs(e) < kCutEpsilon)
    throw Error(ErrorKind::NearCutLocus, "attitude is a half turn away from its target");
  return so2_hat(e);
}

inline Mat3 se3_target(const Vec3& p) {
  const double r = p.norm();
  if (!(r > 0.0)) throw Error(ErrorKind::ZeroPoint, "attitude target undefined at the origin");
  return sphere_inject(-p / r);
}

inline Mat3 rhs_se3_orientation(const Pose<3>& pose) {
  return so3_log(pose.R.transpose() * se3_target(pose.p));
}

template <int Dim>
Configuration<Dim> positions(const std::vector<Pose<Dim>>& poses) {
  Configuration<Dim> out;
  for (const auto& q : poses) out.push_back(q.p);
  return out;
}

// Pose flow on SE(2) or SE(3): the position law of the base manifold paired
// with the attitude law of the chosen variant.
template <int Dim>
std::vector<PoseVelocity<Dim>> rhs_se(const std::vector<Pose<Dim>>& poses, const WeightedGraph& g,
                                      const ManifoldSpec& spec, double band = 0.0) {
  if (!spec.is_pose() || spec.dimension() != Dim)
    throw Error(ErrorKind::InvalidArgument, "rhs_se needs an SE2Circle or SE3Sphere manifold");
  const Configuration<Dim> x = positions(poses);
  Velocities<Dim> pv;
  if constexpr (Dim == 2) pv = rhs_circle(x, g);
  else pv = rhs_sphere(x, g, band);
  std::vector<PoseVelocity<Dim>> out(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    try {
      if constexpr (Dim == 2) out[i].omega = rhs_se2_orientation(poses[i], spec.variant);
      else out[i].omega = rhs_se3_orientation(poses[i]);
    } catch (const Error& err) {
      throw PairError(err.kind(), int(i), -1, err.what());
    }
    out[i].v = pv[i];
  }
  return out;
}

}  // namespace fekete
