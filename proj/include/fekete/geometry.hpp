#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

#include "fekete/errors.hpp"

namespace fekete {

template <int Dim>
using Point = Eigen::Matrix<double, Dim, 1>;
template <int Dim>
using Rotation = Eigen::Matrix<double, Dim, Dim>;

using Vec2 = Point<2>;
using Vec3 = Point<3>;
using Mat2 = Rotation<2>;
using Mat3 = Rotation<3>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kCutEpsilon = 1e-6;     // NearCutLocus band below pi
inline constexpr double kPoleTolerance = 1e-10;  // chart singularity of sphere_inject
inline constexpr double kCoincident = 1e-9;      // distances below this count as equal points
inline constexpr int kArcSamples = 4096;

template <int Dim>
struct TangentVector {
  Point<Dim> base;
  Point<Dim> vec;
};

// Wraps into (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

// ---- SO(2) ----------------------------------------------------------------

// Infinitesimal generator used in the angle extraction: exp(a * omega()) is a
// clockwise rotation by a.
inline Mat2 omega() {
  Mat2 m;
  m << 0.0, 1.0, -1.0, 0.0;
  return m;
}

inline Mat2 so2_hat(double a) {
  Mat2 m;
  m << 0.0, -a, a, 0.0;
  return m;
}

inline double so2_vee(const Mat2& A) { return 0.5 * (A(1, 0) - A(0, 1)); }

inline Mat2 so2_exp(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

// Counter-clockwise rotation angle in (-pi, pi]; the half turn maps to +pi.
inline double so2_log(const Mat2& R) {
  const double a = std::atan2(R(1, 0) - R(0, 1), R(0, 0) + R(1, 1));
  return a <= -kPi ? kPi : a;
}

// ---- SO(3) ----------------------------------------------------------------

inline Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return m;
}

inline Vec3 vee(const Mat3& A) {
  return 0.5 * Vec3(A(2, 1) - A(1, 2), A(0, 2) - A(2, 0), A(1, 0) - A(0, 1));
}

inline Mat3 so3_exp_vec(const Vec3& w) {
  const double th2 = w.squaredNorm();
  const double th = std::sqrt(th2);
  const Mat3 K = hat(w);
  double a, b;
  if (th < 1e-6) {
    a = 1.0 - th2 / 6.0;
    b = 0.5 - th2 / 24.0;
  } else {
    a = std::sin(th) / th;
    b = (1.0 - std::cos(th)) / th2;
  }
  return Mat3::Identity() + a * K + b * K * K;
}

inline Mat3 so3_exp(const Mat3& A) { return so3_exp_vec(vee(A)); }

inline Vec3 so3_log_vec(const Mat3& R) {
  const Vec3 s = vee(R);  // sin(theta) * axis
  const double c = 0.5 * (R.trace() - 1.0);
  const double th = std::atan2(s.norm(), std::clamp(c, -1.0, 1.0));
  if (th > kPi - kCutEpsilon)
    throw Error(ErrorKind::NearCutLocus, "rotation angle within cut band of pi");
  if (th < 1e-8) return s;
  if (th < 2.5) return (th / std::sin(th)) * s;
  // Near pi the antisymmetric part loses precision; read the axis off the
  // symmetric part and take its sign from the antisymmetric one.
  const Mat3 S = 0.5 * (R + R.transpose()) - c * Mat3::Identity();
  int k;
  S.diagonal().maxCoeff(&k);
  Vec3 n = S.col(k) / std::sqrt(std::max(S(k, k), 1e-300));
  n.normalize();
  if (n.dot(s) < 0.0) n = -n;
  return th * n;
}

inline Mat3 so3_log(const Mat3& R) { return hat(so3_log_vec(R)); }

template <int Dim>
bool is_rotation(const Rotation<Dim>& R, double tol = 1e-12) {
  return (R.transpose() * R - Rotation<Dim>::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(R.determinant() - 1.0) <= tol;
}

// Rotation with third column p, built from the longitude/colatitude chart.
// At the poles the longitude is set to zero.
inline Mat3 sphere_inject(const Vec3& p) {
  if (!(std::abs(p.norm() - 1.0) <= 1e-10))
    throw Error(ErrorKind::InvalidArgument, "sphere_inject expects a unit vector");
  double c1 = 1.0, s1 = 0.0, c2, s2;
  if (std::abs(p.z()) > 1.0 - kPoleTolerance) {
    c2 = p.z() > 0.0 ? 1.0 : -1.0;
    s2 = 0.0;
  } else {
    s2 = std::hypot(p.x(), p.y());
    c2 = p.z();
    c1 = p.x() / s2;
    s1 = p.y() / s2;
  }
  Mat3 R;
  R << c2 * c1, -s1, s2 * c1,
       c2 * s1, c1, s2 * s1,
       -s2, 0.0, c2;
  return R;
}

// Minimal rotation carrying unit vector a onto unit vector b (not antipodal).
inline Mat3 sphere_transport(const Vec3& a, const Vec3& b) {
  const Vec3 c = a.cross(b);
  const double s = c.norm();
  if (s == 0.0) return Mat3::Identity();
  return so3_exp_vec(std::atan2(s, a.dot(b)) / s * c);
}

// ---- Jordan curves ---------------------------------------------------------

// Closed planar curve gamma: [0,1] -> R^2 sampled into a polyline with a
// cumulative arclength table.
class ArclengthCurve {
 public:
  struct Location {
    int segment;
    double fraction;
    Vec2 point;
  };

  explicit ArclengthCurve(std::function<Vec2(double)> gamma, int samples = kArcSamples)
      : gamma_(std::move(gamma)), n_(samples) {
    if (n_ < 8) throw Error(ErrorKind::InvalidArgument, "too few curve samples");
    pts_.resize(n_);
    for (int k = 0; k < n_; ++k) pts_[k] = gamma_(double(k) / n_);
    const Vec2 end = gamma_(1.0);
    double scale = 0.0;
    for (const auto& p : pts_) scale = std::max(scale, p.norm());
    if ((end - pts_[0]).norm() > 1e-9 * std::max(1.0, scale))
      throw Error(ErrorKind::InvalidArgument, "curve is not closed: gamma(0) != gamma(1)");
    cum_.assign(n_ + 1, 0.0);
    for (int k = 0; k < n_; ++k) {
      const double seg = (pts_[(k + 1) % n_] - pts_[k]).norm();
      if (seg == 0.0) throw Error(ErrorKind::InvalidArgument, "curve samples repeat");
      cum_[k + 1] = cum_[k] + seg;
    }
  }

  double length() const { return cum_.back(); }
  int samples() const { return n_; }
  Vec2 operator()(double t) const { return gamma_(t); }

  double arclength_at(double t) const {
    t -= std::floor(t);
    const double u = t * n_;
    const int k = std::min(int(u), n_ - 1);
    return cum_[k] + (u - k) * (cum_[k + 1] - cum_[k]);
  }

  double parameter_at_arclength(double s) const {
    const double L = length();
    s -= L * std::floor(s / L);
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    const int k = std::clamp(int(it - cum_.begin()) - 1, 0, n_ - 1);
    return (k + (s - cum_[k]) / (cum_[k + 1] - cum_[k])) / n_;
  }

  // Nearest point of the polyline.
  Location locate(const Vec2& p) const {
    Location best{0, 0.0, pts_[0]};
    double bd = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_; ++k) {
      const Vec2& a = pts_[k];
      const Vec2 e = pts_[(k + 1) % n_] - a;
      const double u = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
      const Vec2 q = a + u * e;
      const double d = (p - q).squaredNorm();
      if (d < bd) {
        bd = d;
        best = {k, u, q};
      }
    }
    return best;
  }

  // Parameter of the nearest polyline point, polished by Gauss-Newton on gamma
  // itself so points on the curve map back to their own parameter.
  double parameter_of(const Vec2& p) const {
    const Location l = locate(p);
    const double t0 = (l.segment + l.fraction) / n_;
    double t = t0;
    const double dt = 1e-4 / n_;
    for (int it = 0; it < 4; ++it) {
      const Vec2 d = (gamma_(t + dt) - gamma_(t - dt)) / (2 * dt);
      const double step = (gamma_(t) - p).dot(d) / d.squaredNorm();
      if (!std::isfinite(step)) break;
      t = std::clamp(t - step, t0 - 1.0 / n_, t0 + 1.0 / n_);
    }
    t -= std::floor(t);
    return t >= 1.0 ? 0.0 : t;
  }

  Vec2 tangent(const Location& l) const {
    return (pts_[(l.segment + 1) % n_] - pts_[l.segment]).normalized();
  }

 private:
  std::function<Vec2(double)> gamma_;
  int n_;
  std::vector<Vec2> pts_;
  std::vector<double> cum_;
};

// ---- Manifold description --------------------------------------------------

enum class ManifoldKind { UnitCircle, Ellipse, UnitSphere, JordanCurve, SE2Circle, SE3Sphere };
enum class AttitudeVariant { FaceOrigin, FaceOutward, TangentAligned };

struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::UnitCircle;
  double a = 1.0;
  AttitudeVariant variant = AttitudeVariant::FaceOrigin;
  std::shared_ptr<const ArclengthCurve> curve;

  static ManifoldSpec unit_circle() { return {}; }
  static ManifoldSpec ellipse(double a) {
    if (!(a > 0.0) || !std::isfinite(a))
      throw Error(ErrorKind::InvalidArgument, "ellipse semi-axis must be positive");
    return {ManifoldKind::Ellipse, a, AttitudeVariant::FaceOrigin, nullptr};
  }
  static ManifoldSpec unit_sphere() { return {ManifoldKind::UnitSphere, 1.0, {}, nullptr}; }
  static ManifoldSpec jordan_curve(std::function<Vec2(double)> gamma, int samples = kArcSamples) {
    return {ManifoldKind::JordanCurve, 1.0, {},
            std::make_shared<const ArclengthCurve>(std::move(gamma), samples)};
  }
  static ManifoldSpec se2_circle(AttitudeVariant v) { return {ManifoldKind::SE2Circle, 1.0, v, nullptr}; }
  static ManifoldSpec se3_sphere() { return {ManifoldKind::SE3Sphere, 1.0, {}, nullptr}; }

  int dimension() const {
    return kind == ManifoldKind::UnitSphere || kind == ManifoldKind::SE3Sphere ? 3 : 2;
  }
  bool is_pose() const { return kind == ManifoldKind::SE2Circle || kind == ManifoldKind::SE3Sphere; }
  bool is_planar_curve() const { return dimension() == 2; }

  // Manifold carrying the positions of a pose scenario.
  ManifoldSpec position_manifold() const {
    if (kind == ManifoldKind::SE2Circle) return unit_circle();
    if (kind == ManifoldKind::SE3Sphere) return unit_sphere();
    return *this;
  }
};

inline const char* to_string(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::UnitCircle: return "unit_circle";
    case ManifoldKind::Ellipse: return "ellipse";
    case ManifoldKind::UnitSphere: return "unit_sphere";
    case ManifoldKind::JordanCurve: return "jordan_curve";
    case ManifoldKind::SE2Circle: return "se2_circle";
    case ManifoldKind::SE3Sphere: return "se3_sphere";
  }
  return "?";
}

inline const char* to_string(AttitudeVariant v) {
  switch (v) {
    case AttitudeVariant::FaceOrigin: return "face_origin";
    case AttitudeVariant::FaceOutward: return "face_outward";
    case AttitudeVariant::TangentAligned: return "tangent_aligned";
  }
  return "?";
}

namespace detail {

template <int Dim>
void check_dim(const ManifoldSpec& spec) {
  if (spec.dimension() != Dim)
    throw Error(ErrorKind::InvalidArgument, std::string("point dimension does not match manifold ") +
                                                to_string(spec.kind));
}

inline Vec2 ellipse_scale(const ManifoldSpec& s, const Vec2& p) { return {p.x() / s.a, p.y()}; }
inline Vec2 ellipse_unscale(const ManifoldSpec& s, const Vec2& y) { return {s.a * y.x(), y.y()}; }

template <int Dim>
Point<Dim> normalize_or_throw(const Point<Dim>& p) {
  const double r = p.norm();
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorKind::ZeroPoint, "retraction undefined at the origin");
  return p / r;
}

// Angle between unit vectors, in [0, pi].
template <int Dim>
double unit_angle(const Point<Dim>& u, const Point<Dim>& v) {
  if constexpr (Dim == 2) {
    return std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
  } else {
    return std::atan2(u.cross(v).norm(), u.dot(v));
  }
}

// Unit initial velocity at u of the shortest great circle towards v.
template <int Dim>
Point<Dim> unit_direction(const Point<Dim>& u, const Point<Dim>& v) {
  const Point<Dim> w = v - u.dot(v) * u;
  return w / w.norm();
}

}  // namespace detail

template <int Dim>
Point<Dim> retract(const ManifoldSpec& spec, const Point<Dim>& p) {
  detail::check_dim<Dim>(spec);
  if (!p.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite point");
  if constexpr (Dim == 2) {
    switch (spec.kind) {
      case ManifoldKind::Ellipse:
        return detail::ellipse_unscale(spec, detail::normalize_or_throw<2>(detail::ellipse_scale(spec, p)));
      case ManifoldKind::JordanCurve:
        return spec.curve->locate(p).point;
      default:
        return detail::normalize_or_throw<2>(p);
    }
  } else {
    return detail::normalize_or_throw<3>(p);
  }
}

// Distance together with a flag marking pairs inside the cut band.
struct Distance {
  double value = 0.0;
  bool cut_locus = false;
  operator double() const { return value; }
};

template <int Dim>
Distance geodesic_distance(const ManifoldSpec& spec, const Point<Dim>& x, const Point<Dim>& y) {
  detail::check_dim<Dim>(spec);
  if constexpr (Dim == 2) {
    if (spec.kind == ManifoldKind::JordanCurve) {
      const auto& c = *spec.curve;
      const double L = c.length();
      double ds = c.arclength_at(c.parameter_of(y)) - c.arclength_at(c.parameter_of(x));
      ds -= L * std::floor(ds / L);
      const double d = std::min(ds, L - ds);
      return {d, 0.5 * L - d < kCutEpsilon * L / (2.0 * kPi)};
    }
    if (spec.kind == ManifoldKind::Ellipse) {
      const Vec2 u = detail::normalize_or_throw<2>(detail::ellipse_scale(spec, x));
      const Vec2 v = detail::normalize_or_throw<2>(detail::ellipse_scale(spec, y));
      const double d = detail::unit_angle<2>(u, v);
      return {d, kPi - d < kCutEpsilon};
    }
  }
  const double d = detail::unit_angle<Dim>(retract<Dim>(spec, x), retract<Dim>(spec, y));
  return {d, kPi - d < kCutEpsilon};
}

template <int Dim>
TangentVector<Dim> geodesic_velocity(const ManifoldSpec& spec, const Point<Dim>& x, const Point<Dim>& y) {
  const Distance d = geodesic_distance<Dim>(spec, x, y);
  if (d.value < kCoincident) throw Error(ErrorKind::CoincidentPoints, "geodesic velocity of coincident points");
  if (d.cut_locus) throw Error(ErrorKind::CutLocus, "shortest geodesic is not unique");
  const Point<Dim> base = retract<Dim>(spec, x);
  if constexpr (Dim == 2) {
    if (spec.kind == ManifoldKind::JordanCurve) {
      const auto& c = *spec.curve;
      const auto lx = c.locate(x);
      const double L = c.length();
      double ds = c.arclength_at(c.parameter_of(y)) - c.arclength_at((lx.segment + lx.fraction) / c.samples());
      ds -= L * std::floor(ds / L);
      const Vec2 t = c.tangent(lx);
      return {base, ds < 0.5 * L ? t : Vec2(-t)};
    }
    if (spec.kind == ManifoldKind::Ellipse) {
      const Vec2 u = detail::normalize_or_throw<2>(detail::ellipse_scale(spec, x));
      const Vec2 v = detail::normalize_or_throw<2>(detail::ellipse_scale(spec, y));
      return {base, detail::ellipse_unscale(spec, detail::unit_direction<2>(u, v))};
    }
  }
  return {base, detail::unit_direction<Dim>(base, retract<Dim>(spec, y))};
}

// Outward unit normal of M at an on-manifold point (planar curves and sphere).
template <int Dim>
Point<Dim> unit_normal(const ManifoldSpec& spec, const Point<Dim>& on_m) {
  if constexpr (Dim == 2) {
    if (spec.kind == ManifoldKind::Ellipse)
      return Vec2(on_m.x() / (spec.a * spec.a), on_m.y()).normalized();
    if (spec.kind == ManifoldKind::JordanCurve) {
      const Vec2 t = spec.curve->tangent(spec.curve->locate(on_m));
      return Vec2(t.y(), -t.x());
    }
  }
  return on_m.normalized();
}

}  // namespace fekete
