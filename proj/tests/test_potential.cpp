#include <gtest/gtest.h>

#include <random>

#include "fekete/potential.hpp"
#include "oracles.hpp"

using namespace fekete;

namespace {

const ManifoldSpec kCircle = ManifoldSpec::unit_circle();
const ManifoldSpec kSphere = ManifoldSpec::unit_sphere();

// Random sphere configuration with no pair closer than 0.2 or within 0.2 of antipodal.
Configuration<3> spread_sphere(std::mt19937_64& rng, int n) {
  for (;;) {
    Configuration<3> c;
    for (int i = 0; i < n; ++i) c.push_back(oracle::random_unit(rng));
    bool ok = true;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double d = oracle::great_circle_distance(c[i], c[j]);
        ok = ok && d > 0.2 && d < kPi - 0.2;
      }
    if (ok) return c;
  }
}

std::vector<double> spread_angles(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (;;) {
    std::vector<double> th(n);
    for (auto& t : th) t = u(rng);
    bool ok = true;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double d = std::abs(oracle::wrap(th[j] - th[i]));
        ok = ok && d > 0.1 && d < kPi - 0.1;
      }
    if (ok) return th;
  }
}

template <int Dim>
double fd_error(const Configuration<Dim>& x, const WeightedGraph& g, const ManifoldSpec& m,
                const std::vector<Point<Dim>>& basis_dirs_per_agent_flat) {
  // basis_dirs_per_agent_flat: for each agent, Dim-1 tangent directions
  const double h = 1e-5;
  const auto grad = grad_phi<Dim>(x, g, m);
  const int per = Dim - 1;
  Eigen::VectorXd fd(x.size() * per), an(x.size() * per);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int k = 0; k < per; ++k) {
      const Point<Dim>& u = basis_dirs_per_agent_flat[i * per + k];
      auto xp = x, xm = x;
      xp[i] += h * u;
      xm[i] -= h * u;
      fd(i * per + k) = (phi<Dim>(xp, g, m) - phi<Dim>(xm, g, m)) / (2 * h);
      an(i * per + k) = grad[i].vec.dot(u);
    }
  return (fd - an).norm() / an.norm();
}

}  // namespace

TEST(Phi, AntipodalPair) {
  const Configuration<2> c{Vec2(1, 0), Vec2(-1, 0)};
  EXPECT_NEAR(phi<2>(c, WeightedGraph::complete(2), kCircle), std::log(kPi), 1e-15);
}

TEST(Phi, EvenlySpacedTriangle) {
  const Configuration<2> c{oracle::on_circle(0), oracle::on_circle(2 * kPi / 3), oracle::on_circle(4 * kPi / 3)};
  EXPECT_NEAR(phi<2>(c, WeightedGraph::complete(3), kCircle), 3 * std::log(2 * kPi / 3), 1e-14);
}

TEST(Phi, CoincidentPairRejected) {
  const Configuration<2> c{Vec2(1, 0), Vec2(2, 0), Vec2(0, 1)};
  try {
    phi<2>(c, WeightedGraph::path(3), kCircle);
    FAIL();
  } catch (const PairError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DiagonalConfiguration);
    EXPECT_EQ(e.first(), 0);
    EXPECT_EQ(e.second(), 1);
  }
  // no edge between the coincident agents: fine
  EXPECT_NO_THROW(phi<2>(c, WeightedGraph::from_edges(3, {{1, 2, 1.0}}), kCircle));
}

TEST(Phi, MatchesAngleOracle) {
  std::mt19937_64 rng(41);
  const auto g = WeightedGraph::moser_spindle();
  for (int k = 0; k < 20; ++k) {
    const auto th = spread_angles(rng, 7);
    Configuration<2> c;
    for (double t : th) c.push_back(1.7 * oracle::on_circle(t));
    EXPECT_NEAR(phi<2>(c, g, kCircle), oracle::circle_phi(th, g), 1e-12);
  }
}

TEST(SumSquaredDistances, DegenerateAndSplay) {
  const Vec2 x1(1, 0);
  const Configuration<2> degenerate{x1, x1, -x1};
  EXPECT_NEAR(sum_squared_distances<2>(degenerate, kCircle), 2 * kPi * kPi, 1e-12);
  const Configuration<2> splay{oracle::on_circle(0), oracle::on_circle(2 * kPi / 3), oracle::on_circle(-2 * kPi / 3)};
  EXPECT_NEAR(sum_squared_distances<2>(splay, kCircle), 4 * kPi * kPi / 3, 1e-12);
  EXPECT_EQ(sum_squared_distances<2>({x1}, kCircle), 0.0);
}

TEST(GradPhi, EvenlySpacedCycleIsCritical) {
  for (int n : {3, 5, 10, 12}) {
    Configuration<2> c;
    for (int i = 0; i < n; ++i) c.push_back(oracle::on_circle(2 * kPi * i / n + 0.3));
    for (const auto& t : grad_phi<2>(c, WeightedGraph::cycle(n), kCircle)) EXPECT_LT(t.vec.norm(), 1e-12);
  }
}

TEST(GradPhi, QuarterTurnPair) {
  const Configuration<2> c{Vec2(1, 0), Vec2(0, 1)};
  const auto g = grad_phi<2>(c, WeightedGraph::complete(2), kCircle);
  EXPECT_LT((g[0].vec - Vec2(0, -2 / kPi)).norm(), 1e-15);
  EXPECT_LT((g[1].vec - Vec2(-2 / kPi, 0)).norm(), 1e-15);
  const auto o = oracle::circle_grad({0.0, kPi / 2}, WeightedGraph::complete(2));
  EXPECT_LT((g[0].vec - o[0]).norm(), 1e-15);
  EXPECT_LT((g[1].vec - o[1]).norm(), 1e-15);
}

TEST(GradPhi, MatchesAngleOracle) {
  std::mt19937_64 rng(43);
  const auto g = WeightedGraph::thomsen();
  for (int k = 0; k < 20; ++k) {
    const auto th = spread_angles(rng, 6);
    Configuration<2> c;
    for (double t : th) c.push_back(oracle::on_circle(t));
    const auto gr = grad_phi<2>(c, g, kCircle);
    const auto o = oracle::circle_grad(th, g);
    for (int i = 0; i < 6; ++i) EXPECT_LT((gr[i].vec - o[i]).norm(), 1e-12);
  }
}

TEST(GradPhi, ReflectionEquivariant) {
  std::mt19937_64 rng(47);
  const auto th = spread_angles(rng, 5);
  Configuration<2> c, r;
  for (double t : th) c.push_back(oracle::on_circle(t)), r.push_back(oracle::on_circle(-t));
  const auto g = WeightedGraph::complete(5);
  const auto gc = grad_phi<2>(c, g, kCircle), gr = grad_phi<2>(r, g, kCircle);
  for (int i = 0; i < 5; ++i) EXPECT_LT((gr[i].vec - Vec2(gc[i].vec.x(), -gc[i].vec.y())).norm(), 1e-13);
}

TEST(GradPhi, FiniteDifferenceCircle) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> rad(0.5, 1.5), w(0.2, 2.0);
  for (int k = 0; k < 50; ++k) {
    const int n = 3 + k % 5;
    auto g = WeightedGraph::complete(n);
    for (const auto& e : g.edges()) g.set_weight(e.i, e.j, w(rng));
    const auto th = spread_angles(rng, n);
    Configuration<2> x;
    std::vector<Vec2> dirs;
    for (double t : th) {
      x.push_back(oracle::on_circle(t));
      dirs.push_back(Vec2(-std::sin(t), std::cos(t)));
    }
    EXPECT_LT(fd_error<2>(x, g, kCircle, dirs), 1e-5) << "case " << k;
  }
}

TEST(GradPhi, FiniteDifferenceSphere) {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> w(0.2, 2.0);
  for (int k = 0; k < 50; ++k) {
    const int n = 3 + k % 4;
    auto g = WeightedGraph::complete(n);
    for (const auto& e : g.edges()) g.set_weight(e.i, e.j, w(rng));
    const auto x = spread_sphere(rng, n);
    std::vector<Vec3> dirs;
    for (const auto& p : x) {
      Vec3 a = p.unitOrthogonal();
      dirs.push_back(a);
      dirs.push_back(p.cross(a));
    }
    EXPECT_LT(fd_error<3>(x, g, kSphere, dirs), 1e-5) << "case " << k;
  }
}

TEST(GradPhi, Tangency) {
  std::mt19937_64 rng(61);
  for (int k = 0; k < 20; ++k) {
    auto x = spread_sphere(rng, 5);
    for (auto& p : x) p *= 1.3;
    for (const auto& t : grad_phi<3>(x, WeightedGraph::complete(5), kSphere))
      EXPECT_LT(std::abs(t.vec.dot(unit_normal<3>(kSphere, t.base))), 1e-10);
    const auto th = spread_angles(rng, 6);
    Configuration<2> c;
    for (double t : th) c.push_back(Vec2(2 * std::cos(t), std::sin(t)));
    const auto ell = ManifoldSpec::ellipse(2.0);
    for (const auto& t : grad_phi<2>(c, WeightedGraph::cycle(6), ell))
      EXPECT_LT(std::abs(t.vec.dot(unit_normal<2>(ell, t.base))), 1e-10);
  }
}

TEST(GradPhi, EdgeDeletionIsAdditive) {
  std::mt19937_64 rng(67);
  const auto x = spread_sphere(rng, 5);
  const auto full = WeightedGraph::complete(5);
  auto cut = full;
  cut.set_weight(1, 3, 0.0);
  const double d = oracle::great_circle_distance(x[1], x[3]);
  EXPECT_NEAR(phi<3>(x, full, kSphere) - phi<3>(x, cut, kSphere), std::log(d), 1e-12);
  const auto gf = grad_phi<3>(x, full, kSphere), gc = grad_phi<3>(x, cut, kSphere);
  for (int i : {0, 2, 4}) EXPECT_LT((gf[i].vec - gc[i].vec).norm(), 1e-14);
  EXPECT_LT((gf[1].vec - gc[1].vec + oracle::great_circle_direction(x[1], x[3]) / d).norm(), 1e-12);
  EXPECT_LT((gf[3].vec - gc[3].vec + oracle::great_circle_direction(x[3], x[1]) / d).norm(), 1e-12);
}

TEST(GradPhi, CutLocusReported) {
  const Configuration<3> x{Vec3(0, 0, 1), Vec3(0, 0, -1), Vec3(1, 0, 0)};
  try {
    grad_phi<3>(x, WeightedGraph::complete(3), kSphere);
    FAIL();
  } catch (const PairError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CutLocus);
    EXPECT_EQ(e.first(), 0);
    EXPECT_EQ(e.second(), 1);
  }
}
