#pragma once

#include <cmath>
#include <vector>

#include "fekete/geometry.hpp"
#include "fekete/graph.hpp"

namespace fekete {

template <int Dim>
using Configuration = std::vector<Point<Dim>>;

namespace detail {

template <int Dim>
void check_size(const Configuration<Dim>& cfg, const WeightedGraph& g) {
  if (int(cfg.size()) != g.size())
    throw Error(ErrorKind::InvalidArgument, "configuration size does not match graph");
}

template <int Dim>
double edge_distance(const ManifoldSpec& spec, const Configuration<Dim>& cfg, const Edge& e) {
  const double d = geodesic_distance<Dim>(spec, cfg[e.i], cfg[e.j]).value;
  if (d < kCoincident) throw PairError(ErrorKind::DiagonalConfiguration, e.i, e.j, "coincident agents");
  return d;
}

}  // namespace detail

// Sum over edges of W_ij ln d(x_i, x_j), evaluated at retracted positions.
template <int Dim>
double phi(const Configuration<Dim>& cfg, const WeightedGraph& g, const ManifoldSpec& spec) {
  detail::check_size(cfg, g);
  const ManifoldSpec m = spec.position_manifold();
  double s = 0.0;
  for (const Edge& e : g.edges()) s += e.w * std::log(detail::edge_distance<Dim>(m, cfg, e));
  return s;
}

// Complete-graph sum of squared geodesic distances.
template <int Dim>
double sum_squared_distances(const Configuration<Dim>& cfg, const ManifoldSpec& spec) {
  const ManifoldSpec m = spec.position_manifold();
  double s = 0.0;
  for (std::size_t i = 0; i < cfg.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.size(); ++j) {
      const double d = geodesic_distance<Dim>(m, cfg[i], cfg[j]).value;
      s += d * d;
    }
  return s;
}

// Riemannian gradient of phi, agent by agent. Each edge pulls the pair apart
// along the connecting geodesic with speed W_ij / d.
template <int Dim>
std::vector<TangentVector<Dim>> grad_phi(const Configuration<Dim>& cfg, const WeightedGraph& g,
                                         const ManifoldSpec& spec) {
  detail::check_size(cfg, g);
  const ManifoldSpec m = spec.position_manifold();
  std::vector<TangentVector<Dim>> out(cfg.size());
  for (std::size_t i = 0; i < cfg.size(); ++i) out[i] = {retract<Dim>(m, cfg[i]), Point<Dim>::Zero()};
  for (const Edge& e : g.edges()) {
    const double d = detail::edge_distance<Dim>(m, cfg, e);
    try {
      out[e.i].vec -= e.w / d * geodesic_velocity<Dim>(m, cfg[e.i], cfg[e.j]).vec;
      out[e.j].vec -= e.w / d * geodesic_velocity<Dim>(m, cfg[e.j], cfg[e.i]).vec;
    } catch (const PairError&) {
      throw;
    } catch (const Error& err) {
      throw PairError(err.kind(), e.i, e.j, err.what());
    }
  }
  return out;
}

}  // namespace fekete
