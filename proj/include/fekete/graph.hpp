#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "fekete/errors.hpp"

namespace fekete {

// 0-based endpoints with i < j.
struct Edge {
  int i;
  int j;
  double w;
};

class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(int n) : w_(Eigen::MatrixXd::Zero(n, n)) {
    if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative vertex count");
  }
  explicit WeightedGraph(Eigen::MatrixXd w) : w_(std::move(w)) {
    if (w_.rows() != w_.cols()) throw Error(ErrorKind::InvalidArgument, "weight matrix must be square");
    for (int i = 0; i < size(); ++i) {
      if (w_(i, i) != 0.0) throw Error(ErrorKind::InvalidArgument, "weight matrix diagonal must be zero");
      for (int j = 0; j < size(); ++j)
        if (!(w_(i, j) >= 0.0) || !std::isfinite(w_(i, j)) || w_(i, j) != w_(j, i))
          throw Error(ErrorKind::InvalidArgument, "weights must be finite, nonnegative and symmetric");
    }
  }

  int size() const { return int(w_.rows()); }
  double weight(int i, int j) const { return w_(i, j); }
  const Eigen::MatrixXd& weights() const { return w_; }

  void set_weight(int i, int j, double w) {
    if (i < 0 || j < 0 || i >= size() || j >= size() || i == j)
      throw Error(ErrorKind::InvalidArgument, "edge endpoints out of range");
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::InvalidArgument, "weight must be finite and nonnegative");
    w_(i, j) = w_(j, i) = w;
  }

  // Positive-weight edges in lexicographic order over (i, j), j > i.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (int i = 0; i < size(); ++i)
      for (int j = i + 1; j < size(); ++j)
        if (w_(i, j) > 0.0) out.push_back({i, j, w_(i, j)});
    return out;
  }

  int degree(int i) const {
    int d = 0;
    for (int j = 0; j < size(); ++j) d += w_(i, j) > 0.0;
    return d;
  }

  // Relabels vertex k as perm[k].
  WeightedGraph permuted(const std::vector<int>& perm) const {
    WeightedGraph g(size());
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < size(); ++j) g.w_(perm[i], perm[j]) = w_(i, j);
    return g;
  }

  bool operator==(const WeightedGraph& o) const { return w_ == o.w_; }

  static WeightedGraph from_edges(int n, const std::vector<Edge>& es) {
    WeightedGraph g(n);
    for (const auto& e : es) g.set_weight(e.i, e.j, e.w);
    return g;
  }

  static WeightedGraph cycle(int n) {
    if (n < 3) throw Error(ErrorKind::InvalidArgument, "cycle graph needs at least 3 vertices");
    WeightedGraph g(n);
    for (int i = 0; i < n; ++i) g.set_weight(i, (i + 1) % n, 1.0);
    return g;
  }

  static WeightedGraph complete(int n) {
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "complete graph needs at least 2 vertices");
    WeightedGraph g(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) g.set_weight(i, j, 1.0);
    return g;
  }

  static WeightedGraph path(int n) {
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "line graph needs at least 2 vertices");
    WeightedGraph g(n);
    for (int i = 0; i + 1 < n; ++i) g.set_weight(i, i + 1, 1.0);
    return g;
  }

  // K_{3,3} with parts {1,2,3} and {4,5,6}.
  static WeightedGraph thomsen() {
    WeightedGraph g(6);
    for (int i = 0; i < 3; ++i)
      for (int j = 3; j < 6; ++j) g.set_weight(i, j, 1.0);
    return g;
  }

  static WeightedGraph moser_spindle() {
    WeightedGraph g(7);
    const int es[11][2] = {{1, 2}, {1, 3}, {1, 7}, {2, 3}, {2, 4}, {3, 4},
                           {4, 5}, {4, 6}, {5, 6}, {5, 7}, {6, 7}};
    for (const auto& e : es) g.set_weight(e[0] - 1, e[1] - 1, 1.0);
    return g;
  }

 private:
  Eigen::MatrixXd w_;
};

inline std::string edge_label(const Edge& e) {
  return "(" + std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) + ")";
}

}  // namespace fekete
