#include <gtest/gtest.h>

#include <random>

#include "fekete/graphcalc.hpp"
#include "oracles.hpp"

using namespace fekete;

namespace {

Gf3Matrix gf3(const std::vector<std::vector<int>>& rows) {
  Gf3Matrix m(int(rows.size()), int(rows.front().size()));
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) m.set(r, c, rows[r][c]);
  return m;
}

// Incidence matrix and cycle basis as printed for the Moser spindle, columns
// ordered (1,2) (1,3) (1,7) (2,3) (2,4) (3,4) (4,5) (4,6) (5,6) (5,7) (6,7).
const std::vector<std::vector<int>> kMoserE = {
    {1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0},     {-1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0},
    {0, -1, 0, -1, 0, 1, 0, 0, 0, 0, 0},   {0, 0, 0, 0, -1, -1, 1, 1, 0, 0, 0},
    {0, 0, 0, 0, 0, 0, -1, 0, 1, 1, 0},    {0, 0, 0, 0, 0, 0, 0, -1, -1, 0, 1},
    {0, 0, -1, 0, 0, 0, 0, 0, 0, -1, -1}};
const std::vector<std::vector<int>> kMoserB = {
    {1, -1, 0, 1, 1}, {-1, 1, 0, 0, 0}, {0, 0, 0, -1, -1}, {1, 0, 0, 0, 0}, {0, -1, 0, 1, 1}, {0, 1, 0, 0, 0},
    {0, 0, 1, 1, 0},  {0, 0, -1, 0, 1}, {0, 0, 1, 0, 0},   {0, 0, 0, 1, 0}, {0, 0, 0, 0, 1}};

// Closed-form Moser spindle angles in edge order.
Eigen::VectorXd moser_angles() {
  const double s5 = std::sqrt(5.0);
  const double a12 = -2 * (5 + s5) * kPi / (11 * (3 + s5));
  const double a13 = (3 + s5) * a12 / 2;
  const double a17 = 2 * (kPi + a12 + a13);
  const double a23 = a13 - a12;
  Eigen::VectorXd a(11);
  //   12   13   17   23   24   34   45   46   56   57   67
  a << a12, a13, a17, a23, a13, a12, a12, a13, a23, a13, a12;
  return a;
}

Configuration<2> hexagon_clockwise() {
  Configuration<2> c;
  for (int k = 0; k < 6; ++k) c.push_back(oracle::on_circle(-2 * kPi * k / 6));
  return c;
}

}  // namespace

TEST(Gf3, Arithmetic) {
  Gf3Matrix m(1, 3);
  m.set(0, 0, -1);
  m.set(0, 1, 4);
  m.set(0, 2, -5);
  EXPECT_EQ(m(0, 0), 2);
  EXPECT_EQ(m(0, 1), 1);
  EXPECT_EQ(m(0, 2), 1);
  EXPECT_EQ(m.to_real()(0, 0), -1.0);
  EXPECT_EQ(Gf3Matrix::from_real(m.to_real()), m);
}

TEST(Gf3, NullspaceAnnihilatesAndHasRightDimension) {
  std::mt19937_64 rng(127);
  std::uniform_int_distribution<int> e(0, 2);
  for (int k = 0; k < 50; ++k) {
    Gf3Matrix m(4 + k % 3, 7);
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) m.set(r, c, e(rng));
    const Gf3Matrix N = gf3_nullspace(m);
    EXPECT_TRUE((m * N).is_zero());
    EXPECT_EQ(N.cols() + m.rank(), m.cols());
    EXPECT_EQ(N.rank(), N.cols());
  }
}

TEST(Incidence, TriangleColumns) {
  const auto E = incidence_matrix(WeightedGraph::cycle(3));
  Eigen::MatrixXd expected(3, 3);
  expected << 1, 1, 0, -1, 0, 1, 0, -1, -1;
  EXPECT_EQ(E.E, expected);
}

TEST(Incidence, CycleColumnOrder) {
  const int n = 7;
  const auto E = incidence_matrix(WeightedGraph::cycle(n));
  ASSERT_EQ(E.E.cols(), n);
  auto col = [&](int i, int j) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(i) = 1;
    v(j) = -1;
    return v;
  };
  EXPECT_EQ(Eigen::VectorXd(E.E.col(0)), col(0, 1));
  EXPECT_EQ(Eigen::VectorXd(E.E.col(1)), col(0, n - 1));
  EXPECT_EQ(Eigen::VectorXd(E.E.col(2)), col(1, 2));
  EXPECT_EQ(Eigen::VectorXd(E.E.col(3)), col(2, 3));
  for (int c = 0; c < E.E.cols(); ++c) EXPECT_EQ(E.E.col(c).sum(), 0.0);
  EXPECT_EQ(incidence_matrix(WeightedGraph(4)).E.cols(), 0);
}

TEST(Incidence, WeightsScaleColumns) {
  auto g = WeightedGraph::cycle(8);
  for (int k : {0, 2, 4, 6}) g.set_weight(k, k + 1, 0.25);
  const auto E = incidence_matrix(g);
  const auto U = incidence_matrix(WeightedGraph::cycle(8));
  // scaled columns are 1, 4, 6 and 8 in lexicographic order
  for (int c = 0; c < 8; ++c) {
    const double s = (c == 0 || c == 3 || c == 5 || c == 7) ? 0.25 : 1.0;
    EXPECT_EQ(Eigen::VectorXd(E.E.col(c)), Eigen::VectorXd(s * U.E.col(c))) << c;
  }
}

TEST(Incidence, MoserMatchesPrintedMatrix) {
  const auto E = incidence_matrix(WeightedGraph::moser_spindle());
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 11; ++c) EXPECT_EQ(E.E(r, c), kMoserE[r][c]) << r << "," << c;
}

TEST(CycleSpace, CycleGraph) {
  for (int n : {3, 4, 5, 10}) {
    const auto B = cycle_space_basis(WeightedGraph::cycle(n));
    ASSERT_EQ(B.cols(), 1);
    // (1, -1, 1, ..., 1) up to a GF(3) scalar
    Eigen::VectorXd expected = Eigen::VectorXd::Ones(n);
    expected(1) = -1;
    const Eigen::VectorXd b = B.to_real().col(0);
    EXPECT_TRUE(b == expected || b == -expected) << b.transpose();
  }
}

TEST(CycleSpace, MoserSpindle) {
  const auto g = WeightedGraph::moser_spindle();
  const auto B = cycle_space_basis(g);
  EXPECT_EQ(B.cols(), 5);
  EXPECT_TRUE((gf3(kMoserE) * B).is_zero());
  EXPECT_TRUE((gf3(kMoserE) * gf3(kMoserB)).is_zero());
  EXPECT_TRUE(same_span(B, gf3(kMoserB)));
  EXPECT_FALSE(same_span(B, cycle_space_basis(WeightedGraph::complete(5))));
}

TEST(CycleSpace, AcyclicGraphs) {
  EXPECT_EQ(cycle_space_basis(WeightedGraph::path(5)).cols(), 0);
  EXPECT_EQ(cycle_space_basis(WeightedGraph::from_edges(5, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {3, 4, 1}})).cols(), 0);
}

TEST(CycleSpace, DimensionIsEdgesMinusVerticesPlusComponents) {
  EXPECT_EQ(cycle_space_basis(WeightedGraph::complete(6)).cols(), 15 - 6 + 1);
  EXPECT_EQ(cycle_space_basis(WeightedGraph::thomsen()).cols(), 9 - 6 + 1);
  for (const auto& g : {WeightedGraph::complete(6), WeightedGraph::thomsen(), WeightedGraph::cycle(9)})
    EXPECT_TRUE((unweighted_incidence_gf3(g) * cycle_space_basis(g)).is_zero());
}

TEST(Eulerian, Predicate) {
  EXPECT_TRUE(has_eulerian(WeightedGraph::cycle(10)));
  EXPECT_FALSE(has_eulerian(WeightedGraph::complete(6)));
  EXPECT_FALSE(has_eulerian(WeightedGraph::thomsen()));
  EXPECT_TRUE(has_eulerian(WeightedGraph::complete(5)));
  EXPECT_FALSE(has_eulerian(WeightedGraph::path(4)));
  // two disjoint triangles pass: connectivity is not examined
  EXPECT_TRUE(has_eulerian(WeightedGraph::from_edges(6, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}})));
}

TEST(Angles, ClockwiseHexagon) {
  const auto a = angles_from_config(hexagon_clockwise(), WeightedGraph::complete(6));
  // edges (1,2) .. (1,6) come first
  EXPECT_NEAR(a.values(0), -2 * kPi / 6, 1e-14);
  EXPECT_NEAR(a.values(1), -2 * kPi / 3, 1e-14);
  EXPECT_NEAR(std::abs(a.values(2)), kPi, 1e-14);
  EXPECT_NEAR(a.values(3), 2 * kPi / 3, 1e-14);
  EXPECT_NEAR(a.values(4), 2 * kPi / 6, 1e-14);
}

TEST(Angles, ExactAntipodeTakesPositiveBranch) {
  const auto a = angles_from_config({Vec2(1, 0), Vec2(-1, 0)}, WeightedGraph::complete(2));
  EXPECT_EQ(a.values(0), kPi);
  EXPECT_TRUE(a.branch[0]);
  const auto r = equilibrium_report({Vec2(0, 1), Vec2(0, -1)}, WeightedGraph::complete(2));
  ASSERT_EQ(r.branch_sensitive.size(), 1u);
  EXPECT_EQ(r.branch_sensitive[0], "(1,2)");
}

TEST(Angles, AntisymmetricAndMatchOracle) {
  std::mt19937_64 rng(131);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int k = 0; k < 100; ++k) {
    const Vec2 a = oracle::on_circle(u(rng)), b = oracle::on_circle(u(rng));
    const auto ab = angles_from_config({a, b}, WeightedGraph::complete(2)).values(0);
    const auto ba = angles_from_config({b, a}, WeightedGraph::complete(2)).values(0);
    EXPECT_NEAR(ab, -ba, 1e-14);
    EXPECT_NEAR(ab, oracle::ccw_angle(a, b), 1e-14);
  }
}

TEST(Angles, CoincidentRejected) {
  try {
    angles_from_config({Vec2(1, 0), Vec2(3, 0), Vec2(0, 1)}, WeightedGraph::complete(3));
    FAIL();
  } catch (const PairError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DiagonalConfiguration);
  }
}

TEST(LinearResidual, EvenlySpacedCycle) {
  Configuration<2> c;
  for (int k = 0; k < 10; ++k) c.push_back(oracle::on_circle(2 * kPi * k / 10));
  const auto g = WeightedGraph::cycle(10);
  EXPECT_LT(linear_residual(incidence_matrix(g), angles_from_config(c, g)).norm(), 1e-12);
}

TEST(LinearResidual, HexagonUnderK6IsNonzero) {
  const auto g = WeightedGraph::complete(6);
  const auto a = angles_from_config(hexagon_clockwise(), g);
  const Eigen::VectorXd r = linear_residual(incidence_matrix(g), a);
  // row 1 is the plain sum of reciprocals of the five angles at agent 1
  const double s = -6 / (2 * kPi) - 3 / (2 * kPi) + 1 / kPi + 3 / (2 * kPi) + 6 / (2 * kPi);
  EXPECT_NEAR(r(0), s, 1e-12);
  EXPECT_GT(std::abs(r(0)), 0.1);
}

TEST(LinearResidual, WeightedEightCycle) {
  auto g = WeightedGraph::cycle(8);
  for (int k : {0, 2, 4, 6}) g.set_weight(k, k + 1, 0.25);
  // gaps alternate small, large with large = 4 * small and total 2 pi
  const double small = 2 * kPi / 20;
  Eigen::VectorXd a(8);
  // (1,2) (1,8) (2,3) (3,4) (4,5) (5,6) (6,7) (7,8)
  a << small, -4 * small, 4 * small, small, 4 * small, small, 4 * small, small;
  EXPECT_LT(linear_residual(incidence_matrix(g), a).norm(), 1e-14);
  EXPECT_LT(realizability_residual(cycle_space_basis(g), a).norm(), 1e-12);
}

TEST(LinearResidual, ZeroAngleRejected) {
  const auto g = WeightedGraph::cycle(3);
  try {
    linear_residual(incidence_matrix(g), Eigen::Vector3d(1, 0, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroAngle);
  }
}

TEST(Realizability, CyclePattern) {
  for (int n : {3, 5, 8}) {
    const auto g = WeightedGraph::cycle(n);
    const auto B = cycle_space_basis(g);
    // edge (1,n) carries -alpha, the others alpha
    Eigen::VectorXd a = Eigen::VectorXd::Constant(n, 2 * kPi / n);
    a(1) = -2 * kPi / n;
    EXPECT_LT(realizability_residual(B, a).norm(), 1e-12);
  }
  Eigen::VectorXd a(3);
  a << 1, -1, 1;
  EXPECT_GT(realizability_residual(cycle_space_basis(WeightedGraph::cycle(3)), a).norm(), 0.1);
}

TEST(Realizability, AnyConfigurationIsRealizable) {
  std::mt19937_64 rng(137);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (const auto& g : {WeightedGraph::moser_spindle(), WeightedGraph::complete(7), WeightedGraph::cycle(7)}) {
    const auto B = cycle_space_basis(g);
    for (int k = 0; k < 50; ++k) {
      Configuration<2> c;
      for (int i = 0; i < 7; ++i) c.push_back(oracle::on_circle(u(rng)));
      EXPECT_LT(realizability_residual(B, angles_from_config(c, g)).norm(), 1e-10);
    }
  }
}

TEST(Polynomial, MoserClosedFormIsEquilibrium) {
  const auto g = WeightedGraph::moser_spindle();
  const Eigen::VectorXd a = moser_angles();
  const Eigen::VectorXd p = polynomial_residuals(g, a);
  ASSERT_EQ(p.size(), 7);
  for (int k = 0; k < 7; ++k) EXPECT_LT(std::abs(p(k)), 1e-9) << k;
  EXPECT_LT(linear_residual(incidence_matrix(g), a).norm(), 1e-12);
  EXPECT_LT(realizability_residual(cycle_space_basis(g), a).norm(), 1e-12);
  for (int k = 0; k < 11; ++k) EXPECT_LT(std::abs(a(k)), kPi);
}

TEST(Polynomial, MoserPrintedPolynomials) {
  // vertex 1: a13 a17 + a12 a17 + a12 a13, evaluated on random angles
  std::mt19937_64 rng(139);
  std::uniform_real_distribution<double> u(-3, 3);
  const auto g = WeightedGraph::moser_spindle();
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd a(11);
    for (auto& v : a) v = u(rng);
    const double a12 = a(0), a13 = a(1), a17 = a(2), a23 = a(3), a24 = a(4), a34 = a(5), a57 = a(9), a67 = a(10);
    const Eigen::VectorXd p = polynomial_residuals(g, a);
    EXPECT_NEAR(p(0), a13 * a17 + a12 * a17 + a12 * a13, 1e-12);
    EXPECT_NEAR(p(1), -a23 * a24 + a12 * a24 + a12 * a23, 1e-12);
    EXPECT_NEAR(p(2), -a23 * a34 - a13 * a34 + a13 * a23, 1e-12);
    EXPECT_NEAR(p(6), -a57 * a67 - a17 * a67 - a17 * a57, 1e-12);
  }
}

TEST(Polynomial, AgreesWithLinearTimesProduct) {
  std::mt19937_64 rng(149);
  std::uniform_real_distribution<double> u(0.05, 3.1);
  std::bernoulli_distribution sign;
  const std::vector<WeightedGraph> graphs{WeightedGraph::moser_spindle(), WeightedGraph::complete(6),
                                          WeightedGraph::thomsen(), WeightedGraph::cycle(5)};
  for (int k = 0; k < 1000; ++k) {
    const auto& g = graphs[k % graphs.size()];
    const auto E = incidence_matrix(g);
    Eigen::VectorXd a(E.E.cols());
    for (auto& v : a) v = sign(rng) ? u(rng) : -u(rng);
    const Eigen::VectorXd lin = linear_residual(E, a), poly = polynomial_residuals(g, a);
    for (int p = 0; p < g.size(); ++p) {
      double prod = 1;
      for (std::size_t e = 0; e < E.edges.size(); ++e)
        if (E.edges[e].i == p || E.edges[e].j == p) prod *= a(Eigen::Index(e));
      ASSERT_NE(prod, 0.0);
      EXPECT_NEAR(poly(p), lin(p) * prod, 1e-9 * std::max(1.0, std::abs(lin(p) * prod)));
      EXPECT_EQ(poly(p) == 0.0, lin(p) == 0.0);
      if (std::abs(lin(p)) > 1e-9) {
        EXPECT_EQ(poly(p) > 0, (lin(p) > 0) == (prod > 0));
      }
    }
  }
}

TEST(Polynomial, SymmetricUnderNeighborPermutation) {
  // swapping the labels of two neighbours of vertex 1 permutes the incident
  // angles and leaves the vertex-1 residual unchanged
  const auto g = WeightedGraph::complete(5);
  std::mt19937_64 rng(151);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int k = 0; k < 20; ++k) {
    Configuration<2> c;
    for (int i = 0; i < 5; ++i) c.push_back(oracle::on_circle(u(rng)));
    Configuration<2> s = c;
    std::swap(s[2], s[4]);
    const double r = polynomial_residuals(g, angles_from_config(c, g))(0);
    const double rs = polynomial_residuals(g, angles_from_config(s, g))(0);
    EXPECT_NEAR(r, rs, 1e-12 * std::max(1.0, std::abs(r)));
  }
}

TEST(CurveResidual, CircleCurveMatchesAngles) {
  const auto spec = ManifoldSpec::jordan_curve([](double t) { return Vec2(std::cos(2 * kPi * t), std::sin(2 * kPi * t)); });
  const auto g = WeightedGraph::moser_spindle();
  std::mt19937_64 rng(157);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int k = 0; k < 20; ++k) {
    Configuration<2> c;
    for (int i = 0; i < 7; ++i) c.push_back(oracle::on_circle(u(rng)));
    const auto a = angles_from_config(c, g);
    const auto cr = curve_parameter_residual(c, g, *spec.curve);
    for (int e = 0; e < a.values.size(); ++e) EXPECT_NEAR(cr.S_edge(e), a.values(e) / (2 * kPi), 1e-6);
    EXPECT_LT(cr.realizability.norm(), 1e-10);
    EXPECT_LT((cr.linear - 2 * kPi * linear_residual(incidence_matrix(g), a)).norm(),
              1e-4 * std::max(1.0, cr.linear.norm()));
  }
}

TEST(CurveResidual, EvenParameterSpacingOnCurve) {
  auto gamma = [](double t) {
    return Vec2((1.4 + 0.3 * std::cos(4 * kPi * t)) * std::cos(2 * kPi * t), 0.8 * std::sin(2 * kPi * t));
  };
  const auto spec = ManifoldSpec::jordan_curve(gamma);
  const int n = 9;
  Configuration<2> c;
  for (int k = 0; k < n; ++k) c.push_back(gamma(double(k) / n));
  const auto cr = curve_parameter_residual(c, WeightedGraph::cycle(n), *spec.curve);
  EXPECT_LT(cr.linear.norm(), 1e-6);
  EXPECT_LT(cr.realizability.norm(), 1e-9);
  EXPECT_THROW(curve_parameter_residual({c[0], c[0], c[1]}, WeightedGraph::cycle(3), *spec.curve), PairError);
}

TEST(CurveResidual, HalfwayFlagged) {
  const auto spec = ManifoldSpec::jordan_curve([](double t) { return Vec2(std::cos(2 * kPi * t), std::sin(2 * kPi * t)); });
  const auto cr = curve_parameter_residual({Vec2(1, 0), Vec2(-1, 0)}, WeightedGraph::complete(2), *spec.curve);
  EXPECT_TRUE(cr.halfway[0]);
  EXPECT_EQ(cr.S_edge(0), 0.5);
}

TEST(Eulerian, EqualWeightedAngleEquilibriaExist) {
  // walk the Eulerian circuit 1 -> 2 -> ... -> n -> 1 with steps proportional to W
  auto build = [](const WeightedGraph& g) {
    const int n = g.size();
    double total = 0;
    for (int k = 0; k < n; ++k) total += g.weight(k, (k + 1) % n);
    Configuration<2> c;
    double th = 0;
    for (int k = 0; k < n; ++k) {
      c.push_back(oracle::on_circle(th));
      th += 2 * kPi * g.weight(k, (k + 1) % n) / total;
    }
    return c;
  };
  auto weighted = WeightedGraph::cycle(8);
  for (int k : {0, 2, 4, 6}) weighted.set_weight(k, k + 1, 0.25);
  for (const auto& g : {WeightedGraph::cycle(5), WeightedGraph::cycle(12), weighted}) {
    ASSERT_TRUE(has_eulerian(g));
    const auto a = angles_from_config(build(g), g);
    EXPECT_LT(linear_residual(incidence_matrix(g), a).norm(), 1e-12);
    const auto E = incidence_matrix(g);
    const double ratio = std::abs(E.edges[0].w / a.values(0));
    for (int e = 0; e < a.values.size(); ++e) EXPECT_NEAR(std::abs(E.edges[e].w / a.values(e)), ratio, 1e-12);
  }
}

TEST(Report, Contents) {
  Configuration<2> c;
  for (int k = 0; k < 10; ++k) c.push_back(oracle::on_circle(2 * kPi * k / 10));
  const auto r = equilibrium_report(c, WeightedGraph::cycle(10), "CONVERGED");
  EXPECT_EQ(r.cycle_dim, 1);
  EXPECT_TRUE(r.eulerian);
  EXPECT_LT(r.linear_residual.norm(), 1e-12);
  EXPECT_LT(r.realizability_residual.norm(), 1e-12);
  EXPECT_LT(r.polynomial_residuals.norm(), 1e-12);
  EXPECT_TRUE(r.branch_sensitive.empty());
  EXPECT_EQ(r.status, "CONVERGED");
}
