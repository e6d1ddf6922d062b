#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <vector>

#include "fekete/errors.hpp"
#include "fekete/potential.hpp"

namespace fekete {

struct IntegratorSettings {
  double h = 0.01;
  double t_max = 200.0;
  double stop_tol = 1e-9;
  int record_every = 1;
  int max_repairs = 8;  // per step

  void validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("integrator.h", "must be positive");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ValidationError("integrator.t_max", "must be positive");
    if (!(stop_tol >= 0.0)) throw ValidationError("integrator.stop_tol", "must be nonnegative");
    if (record_every < 1) throw ValidationError("integrator.record_every", "must be at least 1");
    if (max_repairs < 0) throw ValidationError("integrator.max_repairs", "must be nonnegative");
  }
  bool operator==(const IntegratorSettings&) const = default;
};

struct StepDiagnostics {
  double phi = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> normal_norms;
  double rhs_norm = 0.0;
};

template <class State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<StepDiagnostics> diagnostics;
  bool converged = false;
  double final_rhs_norm = std::numeric_limits<double>::infinity();
  long steps = 0;
  int repairs = 0;

  const State& final_state() const { return states.back(); }
};

// A flow exposes its state type, a flat velocity and a way to move a state
// along a velocity. Optional hooks: diagnose, repair (after an RHS error) and
// settle (after each accepted step).
template <class S>
concept FlowSystem = requires(const S& s, const typename S::State& x, const Eigen::VectorXd& v, double h) {
  { s.velocity(x) } -> std::convertible_to<Eigen::VectorXd>;
  { s.advance(x, v, h) } -> std::convertible_to<typename S::State>;
};

namespace detail {

template <class S>
StepDiagnostics diagnose(const S& sys, const typename S::State& x, const Eigen::VectorXd& v) {
  StepDiagnostics d;
  if constexpr (requires { sys.diagnose(x, v); }) d = sys.diagnose(x, v);
  d.rhs_norm = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  return d;
}

template <class S>
Eigen::VectorXd rk4_increment(const S& sys, const typename S::State& x, double h) {
  const Eigen::VectorXd k1 = sys.velocity(x);
  const Eigen::VectorXd k2 = sys.velocity(sys.advance(x, k1, 0.5 * h));
  const Eigen::VectorXd k3 = sys.velocity(sys.advance(x, k2, 0.5 * h));
  const Eigen::VectorXd k4 = sys.velocity(sys.advance(x, k3, h));
  return (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
}

}  // namespace detail

// Classical fixed-step RK4; group-valued states move through `advance`, so a
// geometric update R <- R exp(h w) keeps rotations exact.
template <FlowSystem S>
Trajectory<typename S::State> integrate(const S& sys, typename S::State x, const IntegratorSettings& st) {
  st.validate();
  Trajectory<typename S::State> tr;
  const long n_steps = std::lround(std::ceil(st.t_max / st.h - 1e-9));
  double t = 0.0;
  for (long k = 0;; ++k) {
    Eigen::VectorXd v;
    for (int attempt = 0;; ++attempt) {
      try {
        v = sys.velocity(x);
        break;
      } catch (const Error& err) {
        bool fixed = false;
        if constexpr (requires { sys.repair(x, err, attempt); })
          fixed = attempt < st.max_repairs && sys.repair(x, err, attempt);
        if (!fixed) throw StepFailure(t, err.what());
        ++tr.repairs;
      }
    }
    const double vnorm = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
    const bool done = vnorm < st.stop_tol || k >= n_steps;
    if (k % st.record_every == 0 || done) {
      tr.times.push_back(t);
      tr.states.push_back(x);
      tr.diagnostics.push_back(detail::diagnose(sys, x, v));
    }
    if (done) {
      tr.converged = vnorm < st.stop_tol;
      tr.final_rhs_norm = vnorm;
      tr.steps = k;
      return tr;
    }
    typename S::State next;
    for (int attempt = 0;; ++attempt) {
      try {
        next = sys.advance(x, detail::rk4_increment(sys, x, st.h), st.h);
        break;
      } catch (const Error& err) {
        bool fixed = false;
        if constexpr (requires { sys.repair(x, err, attempt); })
          fixed = attempt < st.max_repairs && sys.repair(x, err, attempt);
        if (!fixed) throw StepFailure(t, err.what());
        ++tr.repairs;
      }
    }
    if constexpr (requires { sys.settle(next); }) sys.settle(next);
    x = std::move(next);
    t = double(k + 1) * st.h;
  }
}

// Euclidean flow on a configuration driven by a plain right-hand side.
template <int Dim>
struct ConfigurationFlow {
  using State = Configuration<Dim>;
  std::function<std::vector<Point<Dim>>(const State&)> rhs;
  std::function<StepDiagnostics(const State&)> diagnostics;

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
    return diagnostics ? diagnostics(x) : StepDiagnostics{};
  }
};

template <int Dim, class Rhs>
  requires std::invocable<Rhs, const Configuration<Dim>&>
Trajectory<Configuration<Dim>> integrate(Rhs rhs, Configuration<Dim> x0, const IntegratorSettings& st) {
  ConfigurationFlow<Dim> sys{std::move(rhs), {}};
  return integrate(sys, std::move(x0), st);
}

}  // namespace fekete
