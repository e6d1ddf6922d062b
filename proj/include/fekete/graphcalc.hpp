#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fekete/dynamics.hpp"
#include "fekete/geometry.hpp"
#include "fekete/graph.hpp"

namespace fekete {

// Dense matrix over GF(3) with entries stored as 0, 1, 2 (2 standing for -1).
class Gf3Matrix {
 public:
  Gf3Matrix() = default;
  Gf3Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(std::size_t(rows) * cols, 0) {}

  static Gf3Matrix from_real(const Eigen::MatrixXd& m) {
    Gf3Matrix g(int(m.rows()), int(m.cols()));
    for (int r = 0; r < g.rows_; ++r)
      for (int c = 0; c < g.cols_; ++c) {
        const long v = std::lround(m(r, c));
        if (double(v) != m(r, c)) throw Error(ErrorKind::InvalidArgument, "GF(3) entries must be integers");
        g.set(r, c, int(v));
      }
    return g;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int operator()(int r, int c) const { return a_[std::size_t(r) * cols_ + c]; }
  void set(int r, int c, int v) { a_[std::size_t(r) * cols_ + c] = std::uint8_t(((v % 3) + 3) % 3); }

  // Entries mapped to {-1, 0, 1}.
  Eigen::MatrixXd to_real() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) m(r, c) = (*this)(r, c) == 2 ? -1.0 : double((*this)(r, c));
    return m;
  }

  Gf3Matrix operator*(const Gf3Matrix& o) const {
    if (cols_ != o.rows_) throw Error(ErrorKind::InvalidArgument, "GF(3) product shape mismatch");
    Gf3Matrix p(rows_, o.cols_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < o.cols_; ++c) {
        int s = 0;
        for (int k = 0; k < cols_; ++k) s += (*this)(r, k) * o(k, c);
        p.set(r, c, s);
      }
    return p;
  }

  bool is_zero() const {
    for (auto v : a_)
      if (v) return false;
    return true;
  }

  bool operator==(const Gf3Matrix&) const = default;

  // Reduced row echelon form with pivots taken left to right; returns the
  // pivot columns.
  std::vector<int> rref() {
    std::vector<int> pivots;
    int row = 0;
    for (int c = 0; c < cols_ && row < rows_; ++c) {
      int p = row;
      while (p < rows_ && (*this)(p, c) == 0) ++p;
      if (p == rows_) continue;
      swap_rows(p, row);
      if ((*this)(row, c) == 2) scale_row(row, 2);  // 2 * 2 = 1 mod 3
      for (int r = 0; r < rows_; ++r)
        if (r != row && (*this)(r, c) != 0) add_row(r, row, 3 - (*this)(r, c));
      pivots.push_back(c);
      ++row;
    }
    return pivots;
  }

  int rank() const {
    Gf3Matrix t = *this;
    return int(t.rref().size());
  }

 private:
  void swap_rows(int a, int b) {
    if (a == b) return;
    for (int c = 0; c < cols_; ++c) std::swap(a_[std::size_t(a) * cols_ + c], a_[std::size_t(b) * cols_ + c]);
  }
  void scale_row(int r, int k) {
    for (int c = 0; c < cols_; ++c) set(r, c, (*this)(r, c) * k);
  }
  void add_row(int dst, int src, int k) {
    for (int c = 0; c < cols_; ++c) set(dst, c, (*this)(dst, c) + k * (*this)(src, c));
  }

  int rows_ = 0, cols_ = 0;
  std::vector<std::uint8_t> a_;
};

// Basis of the right nullspace, one column per free variable of the RREF.
inline Gf3Matrix gf3_nullspace(const Gf3Matrix& m) {
  Gf3Matrix r = m;
  const std::vector<int> piv = r.rref();
  std::vector<int> is_pivot(m.cols(), -1);
  for (int k = 0; k < int(piv.size()); ++k) is_pivot[piv[k]] = k;
  std::vector<int> free;
  for (int c = 0; c < m.cols(); ++c)
    if (is_pivot[c] < 0) free.push_back(c);
  Gf3Matrix basis(m.cols(), int(free.size()));
  for (int k = 0; k < int(free.size()); ++k) {
    const int f = free[k];
    basis.set(f, k, 1);
    for (int c = 0; c < m.cols(); ++c)
      if (is_pivot[c] >= 0) basis.set(c, k, -r(is_pivot[c], f));
  }
  return basis;
}

inline Gf3Matrix hconcat(const Gf3Matrix& a, const Gf3Matrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorKind::InvalidArgument, "row count mismatch");
  Gf3Matrix m(a.rows(), a.cols() + b.cols());
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) m.set(r, c, a(r, c));
    for (int c = 0; c < b.cols(); ++c) m.set(r, a.cols() + c, b(r, c));
  }
  return m;
}

// Column spans coincide.
inline bool same_span(const Gf3Matrix& a, const Gf3Matrix& b) {
  const int ra = a.rank(), rb = b.rank();
  return ra == rb && hconcat(a, b).rank() == ra;
}

struct IncidenceMatrix {
  Eigen::MatrixXd E;        // n x e, column (i,j) = W_ij (e_i - e_j)
  std::vector<Edge> edges;  // column order
};

inline IncidenceMatrix incidence_matrix(const WeightedGraph& g) {
  IncidenceMatrix m{Eigen::MatrixXd::Zero(g.size(), 0), g.edges()};
  m.E = Eigen::MatrixXd::Zero(g.size(), Eigen::Index(m.edges.size()));
  for (std::size_t k = 0; k < m.edges.size(); ++k) {
    m.E(m.edges[k].i, Eigen::Index(k)) = m.edges[k].w;
    m.E(m.edges[k].j, Eigen::Index(k)) = -m.edges[k].w;
  }
  return m;
}

inline Gf3Matrix unweighted_incidence_gf3(const WeightedGraph& g) {
  const auto es = g.edges();
  Gf3Matrix m(g.size(), int(es.size()));
  for (int k = 0; k < int(es.size()); ++k) {
    m.set(es[k].i, k, 1);
    m.set(es[k].j, k, -1);
  }
  return m;
}

// Cycle space: nullspace of the unweighted incidence matrix over GF(3).
inline Gf3Matrix cycle_space_basis(const WeightedGraph& g) { return gf3_nullspace(unweighted_incidence_gf3(g)); }

// Every vertex has even and positive degree (connectivity is not examined).
inline bool has_eulerian(const WeightedGraph& g) {
  for (int i = 0; i < g.size(); ++i) {
    const int d = g.degree(i);
    if (d == 0 || d % 2) return false;
  }
  return g.size() > 0;
}

struct AngleVector {
  std::vector<Edge> edges;
  Eigen::VectorXd values;   // alpha_ij in (-pi, pi], lexicographic edge order
  std::vector<bool> branch; // edge sits exactly at the +pi branch point
};

// Signed angles alpha_ij = angle of x_j seen from x_i (counter-clockwise
// positive) for every positive-weight edge of a circle configuration.
inline AngleVector angles_from_config(const Configuration<2>& cfg, const WeightedGraph& g) {
  detail::check_size(cfg, g);
  AngleVector a{g.edges(), {}, {}};
  a.values.resize(Eigen::Index(a.edges.size()));
  for (std::size_t k = 0; k < a.edges.size(); ++k) {
    const Edge& e = a.edges[k];
    const Vec2 u = retract<2>(ManifoldSpec::unit_circle(), cfg[e.i]);
    const Vec2 v = retract<2>(ManifoldSpec::unit_circle(), cfg[e.j]);
    const double al = detail::relative_angle(u, v);
    if (std::abs(al) < kCoincident) throw PairError(ErrorKind::DiagonalConfiguration, e.i, e.j, "coincident agents");
    a.values(Eigen::Index(k)) = al;
    a.branch.push_back(al == kPi);
  }
  return a;
}

namespace detail {
inline Eigen::VectorXd reciprocals(const Eigen::VectorXd& a) {
  Eigen::VectorXd r(a.size());
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (std::abs(a(k)) < 1e-300) throw Error(ErrorKind::ZeroAngle, "edge angle is zero");
    r(k) = 1.0 / a(k);
  }
  return r;
}
}  // namespace detail

// E * (1/alpha); zero exactly at equilibria of the circle law.
inline Eigen::VectorXd linear_residual(const IncidenceMatrix& E, const Eigen::VectorXd& alpha) {
  if (alpha.size() != E.E.cols()) throw Error(ErrorKind::InvalidArgument, "angle vector length mismatch");
  return E.E * detail::reciprocals(alpha);
}
inline Eigen::VectorXd linear_residual(const IncidenceMatrix& E, const AngleVector& alpha) {
  return linear_residual(E, alpha.values);
}

// B^T alpha reduced mod `period` into (-period/2, period/2].
inline Eigen::VectorXd realizability_residual(const Gf3Matrix& B, const Eigen::VectorXd& alpha,
                                              double period = 2.0 * kPi) {
  if (alpha.size() != B.rows()) throw Error(ErrorKind::InvalidArgument, "angle vector length mismatch");
  Eigen::VectorXd r = B.to_real().transpose() * alpha;
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    double w = std::remainder(r(k), period);
    if (w <= -0.5 * period) w += period;
    r(k) = w;
  }
  return r;
}
inline Eigen::VectorXd realizability_residual(const Gf3Matrix& B, const AngleVector& alpha) {
  return realizability_residual(B, alpha.values);
}

// Product of the angles of all edges incident to vertex p.
inline double incident_angle_product(const std::vector<Edge>& edges, const Eigen::VectorXd& alpha, int p) {
  double prod = 1.0;
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (edges[k].i == p || edges[k].j == p) prod *= alpha(Eigen::Index(k));
  return prod;
}

// p-th linear residual times the product of the incident angles.
inline Eigen::VectorXd polynomial_residuals(const WeightedGraph& g, const Eigen::VectorXd& alpha) {
  const IncidenceMatrix E = incidence_matrix(g);
  Eigen::VectorXd lin = linear_residual(E, alpha);
  for (int p = 0; p < g.size(); ++p) lin(p) *= incident_angle_product(E.edges, alpha, p);
  return lin;
}
inline Eigen::VectorXd polynomial_residuals(const WeightedGraph& g, const AngleVector& alpha) {
  return polynomial_residuals(g, alpha.values);
}

struct CurveResidual {
  std::vector<double> S;        // curve parameter of each retracted agent
  Eigen::VectorXd S_edge;       // shorter-way parameter differences, (-1/2, 1/2]
  std::vector<bool> halfway;    // difference exactly 1/2
  Eigen::VectorXd linear;       // E * (1 / S_edge)
  Eigen::VectorXd realizability;  // B^T S_edge mod 1
};

inline CurveResidual curve_parameter_residual(const Configuration<2>& cfg, const WeightedGraph& g,
                                              const ArclengthCurve& curve) {
  detail::check_size(cfg, g);
  CurveResidual out;
  for (const auto& x : cfg) out.S.push_back(curve.parameter_of(x));
  const auto edges = g.edges();
  out.S_edge.resize(Eigen::Index(edges.size()));
  for (std::size_t k = 0; k < edges.size(); ++k) {
    double d = out.S[edges[k].j] - out.S[edges[k].i];
    d -= std::floor(d);  // [0, 1)
    if (d > 0.5) d -= 1.0;
    if (std::abs(d) < 1e-12)
      throw PairError(ErrorKind::DiagonalConfiguration, edges[k].i, edges[k].j, "coincident agents");
    out.halfway.push_back(d == 0.5);
    out.S_edge(Eigen::Index(k)) = d;
  }
  out.linear = linear_residual(incidence_matrix(g), out.S_edge);
  out.realizability = realizability_residual(cycle_space_basis(g), out.S_edge, 1.0);
  return out;
}

struct EquilibriumReport {
  AngleVector angles;
  Eigen::VectorXd linear_residual;
  Eigen::VectorXd realizability_residual;
  Eigen::VectorXd polynomial_residuals;
  bool eulerian = false;
  int cycle_dim = 0;
  std::string status;
  std::vector<std::string> branch_sensitive;  // edges reported at the +pi branch
};

inline EquilibriumReport equilibrium_report(const WeightedGraph& g, const AngleVector& a, std::string status = {}) {
  EquilibriumReport r;
  r.angles = a;
  const Gf3Matrix B = cycle_space_basis(g);
  r.linear_residual = linear_residual(incidence_matrix(g), a);
  r.realizability_residual = realizability_residual(B, a);
  r.polynomial_residuals = polynomial_residuals(g, a);
  r.eulerian = has_eulerian(g);
  r.cycle_dim = B.cols();
  r.status = std::move(status);
  for (std::size_t k = 0; k < a.edges.size(); ++k)
    if (a.branch[k]) r.branch_sensitive.push_back(edge_label(a.edges[k]));
  return r;
}

inline EquilibriumReport equilibrium_report(const Configuration<2>& cfg, const WeightedGraph& g,
                                            std::string status = {}) {
  return equilibrium_report(g, angles_from_config(cfg, g), std::move(status));
}

}  // namespace fekete
