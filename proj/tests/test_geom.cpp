#include <catch2/catch_amalgamated.hpp>

#include "funnelkit/geom.hpp"
#include "funnelkit/util/rng.hpp"

using namespace funnelkit;
using namespace funnelkit::geom;

namespace {
Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

Ellipsoid random_ellipsoid(Rng& rng, int n, double center_span = 1.0) {
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = rng.normal();
  Ellipsoid e;
  e.S = B * B.transpose() + 0.3 * Eigen::MatrixXd::Identity(n, n);
  e.center.resize(n);
  for (int i = 0; i < n; ++i) e.center[i] = rng.uniform(-center_span, center_span);
  return e;
}

// uniform-ish point inside an ellipsoid via gaussian direction + radial cdf
Eigen::VectorXd sample_inside(Rng& rng, const Ellipsoid& e) {
  int n = e.dim();
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = rng.normal();
  g.normalize();
  double r = std::pow(rng.uniform01(), 1.0 / n);
  Eigen::LLT<Eigen::MatrixXd> llt(e.S);
  Eigen::MatrixXd L = llt.matrixL();
  return e.center + r * L.transpose().triangularView<Eigen::Upper>().solve(g);
}
}  // namespace

TEST_CASE("project_ellipsoid closed forms") {
  Ellipsoid e;
  e.center = vec2(0, 0);
  e.S = Eigen::MatrixXd::Zero(2, 2);
  e.S.diagonal() << 1, 4;
  Eigen::MatrixXd P(1, 2);
  P << 1, 0;
  auto p = project_ellipsoid(e, P);
  REQUIRE(p.S(0, 0) == Catch::Approx(1.0).margin(1e-12));

  e.S << 2, 1, 1, 2;
  p = project_ellipsoid(e, P);
  REQUIRE(p.S(0, 0) == Catch::Approx(1.5).margin(1e-12));  // (S^-1)_00 = 2/3

  auto same = project_ellipsoid(e, Eigen::MatrixXd::Identity(2, 2));
  REQUIRE((same.S - e.S).lpNorm<Eigen::Infinity>() < 1e-10);

  Eigen::MatrixXd bad(2, 2);
  bad << 1, 0, 1, 0;
  REQUIRE_THROWS_AS(project_ellipsoid(e, bad), std::invalid_argument);
}

TEST_CASE("projection soundness: sampled points project inside") {
  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    int n = rng.uniform_int(2, 4);
    Ellipsoid e = random_ellipsoid(rng, n);
    int k = rng.uniform_int(1, n - 1);
    Eigen::MatrixXd P(k, n);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < n; ++j) P(i, j) = rng.normal();
    Ellipsoid proj = project_ellipsoid(e, P);
    for (int s = 0; s < 1000; ++s) {
      Eigen::VectorXd x = sample_inside(rng, e);
      REQUIRE(proj.mahalanobis(P * x) <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("contains_shifted: concentric balls") {
  Ellipsoid outer = Ellipsoid::ball(vec2(0, 0), 1.0);
  Ellipsoid inner = Ellipsoid::ball(vec2(0, 0), 0.5);
  auto r = contains_shifted(outer, inner, {});
  REQUIRE(r.feasible);
  REQUIRE(r.shift.norm() < 1e-9);
}

TEST_CASE("contains_shifted: displaced without slack is infeasible") {
  Ellipsoid outer = Ellipsoid::ball(vec2(0, 0), 1.0);
  Ellipsoid inner = Ellipsoid::ball(vec2(0.6, 0), 0.5);
  auto r = contains_shifted(outer, inner, {});
  REQUIRE_FALSE(r.feasible);
}

TEST_CASE("contains_shifted: free dimension rescues displacement") {
  Ellipsoid outer = Ellipsoid::ball(vec2(0, 0), 1.0);
  Ellipsoid inner = Ellipsoid::ball(vec2(0.6, 0), 0.5);
  auto r = contains_shifted(outer, inner, {0});
  REQUIRE(r.feasible);
  // any shift with |0.6 + d| <= 0.5 works; the max-margin answer centers it
  REQUIRE(r.shift[0] == Catch::Approx(-0.6).margin(1e-3));
  REQUIRE(std::abs(0.6 + r.shift[0]) <= 0.5 + 1e-6);
}

TEST_CASE("contains_shifted agrees with rejection sampling") {
  Rng rng(23);
  int feas = 0, infeas = 0;
  for (int t = 0; t < 30; ++t) {
    int n = rng.uniform_int(2, 3);
    Ellipsoid outer = random_ellipsoid(rng, n, 0.3);
    Ellipsoid inner = random_ellipsoid(rng, n, 0.8);
    inner.S *= rng.uniform(1.0, 8.0);  // shrink inner
    auto r = contains_shifted(outer, inner, {});
    if (r.feasible) {
      ++feas;
      for (int s = 0; s < 1000; ++s) {
        Eigen::VectorXd x = sample_inside(rng, inner);
        REQUIRE(outer.mahalanobis(x) <= 1.0 + 1e-6);
      }
    } else {
      ++infeas;
      // witness: maximize outer quadratic over inner boundary samples
      double worst = 0;
      for (int s = 0; s < 4000; ++s) {
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i) g[i] = rng.normal();
        Eigen::VectorXd x = inner.support(g);
        worst = std::max(worst, outer.mahalanobis(x));
      }
      REQUIRE(worst > 1.0 - 1e-9);
    }
  }
  REQUIRE(feas > 0);
  REQUIRE(infeas > 0);
}

TEST_CASE("collision_query: disk vs square") {
  auto disk = ConvexBody::ellipsoid(Ellipsoid::ball(vec2(0, 0), 1.0));
  auto square = ConvexBody::polytope(Polytope::box2(2, 3, -1, 1));
  auto r = collision_query(disk, square);
  REQUIRE_FALSE(r.intersecting);
  REQUIRE(r.distance == Catch::Approx(1.0).margin(1e-6));
  REQUIRE(r.normal.x() == Catch::Approx(1.0).margin(1e-6));
  REQUIRE(r.normal.y() == Catch::Approx(0.0).margin(1e-6));
  REQUIRE(r.witness_body.x() == Catch::Approx(1.0).margin(1e-6));
  REQUIRE(r.witness_obs.x() == Catch::Approx(2.0).margin(1e-6));
}

TEST_CASE("collision_query: intersecting square") {
  auto disk = ConvexBody::ellipsoid(Ellipsoid::ball(vec2(0, 0), 1.0));
  auto square = ConvexBody::polytope(Polytope::box2(0, 1, 0, 1));
  auto r = collision_query(disk, square);
  REQUIRE(r.intersecting);
}

TEST_CASE("collision_query: stadium vs point") {
  auto stadium = ConvexBody::hull(Ellipsoid::ball(vec2(0, 0), 1.0),
                                  Ellipsoid::ball(vec2(0, 4), 1.0));
  Polytope pt;
  pt.vertices.resize(2, 1);
  pt.vertices << 3, 2;
  auto r = collision_query(stadium, ConvexBody::polytope(pt));
  REQUIRE_FALSE(r.intersecting);
  REQUIRE(r.distance == Catch::Approx(2.0).margin(1e-6));
  REQUIRE(r.normal.x() == Catch::Approx(1.0).margin(1e-5));
}

TEST_CASE("collision distance is symmetric and matches boundary sampling") {
  Rng rng(31);
  for (int t = 0; t < 25; ++t) {
    Ellipsoid e = random_ellipsoid(rng, 2, 2.0);
    Polytope p;
    int nv = rng.uniform_int(3, 6);
    p.vertices.resize(2, nv);
    Eigen::Vector2d c(rng.uniform(-4, 4), rng.uniform(-4, 4));
    for (int i = 0; i < nv; ++i) {
      p.vertices(0, i) = c.x() + rng.uniform(-1, 1);
      p.vertices(1, i) = c.y() + rng.uniform(-1, 1);
    }
    auto body = ConvexBody::ellipsoid(e, rng.bernoulli(0.5) ? 0.2 : 0.0);
    auto obsb = ConvexBody::polytope(p);
    auto r1 = collision_query(body, obsb);
    auto r2 = collision_query(obsb, body);
    REQUIRE(r1.intersecting == r2.intersecting);
    if (r1.intersecting) continue;
    REQUIRE(r1.distance == Catch::Approx(r2.distance).margin(1e-6));

    // brute-force: dense boundary sampling of both bodies
    double best = 1e300;
    for (int i = 0; i < 720; ++i) {
      double th = i * M_PI / 360.0;
      Eigen::VectorXd u = vec2(std::cos(th), std::sin(th));
      Eigen::Vector2d pb = body.support(u);
      // distance from pb to polytope hull: sample its boundary segments
      for (int a = 0; a < nv; ++a)
        for (int bb = 0; bb < nv; ++bb)
          for (double s = 0; s <= 1.0; s += 0.05) {
            Eigen::Vector2d q =
                (1 - s) * p.vertices.col(a) + s * p.vertices.col(bb);
            best = std::min(best, (q - pb).norm());
          }
    }
    REQUIRE(r1.distance <= best + 1e-9);
    REQUIRE(r1.distance >= best - 2e-3);  // sampling resolution slack

    // the separating-normal guarantee: shifting the body along -normal by
    // any amount below the distance keeps the pair separated
    Eigen::Vector2d shift = -0.95 * r1.distance * r1.normal;
    auto shifted = body.shifted(shift);
    auto r3 = collision_query(shifted, obsb);
    REQUIRE_FALSE(r3.intersecting);
  }
}

TEST_CASE("bounding boxes") {
  auto ball = Ellipsoid::ball(vec2(0, 0), 1.0);
  auto b = bounding_box(ball);
  REQUIRE(b.lo[0] == Catch::Approx(-1.0));
  REQUIRE(b.hi[1] == Catch::Approx(1.0));

  Ellipsoid e;
  e.center = vec2(0, 0);
  e.S = Eigen::MatrixXd::Zero(2, 2);
  e.S.diagonal() << 4, 1;
  b = bounding_box(e);
  REQUIRE(b.lo[0] == Catch::Approx(-0.5));
  REQUIRE(b.hi[0] == Catch::Approx(0.5));
  REQUIRE(b.lo[1] == Catch::Approx(-1.0));
  REQUIRE(b.hi[1] == Catch::Approx(1.0));

  Polytope p;
  p.vertices.resize(2, 2);
  p.vertices << 0, 2, 0, 1;
  b = bounding_box(ConvexBody::polytope(p));
  REQUIRE(b.lo[0] == Catch::Approx(0.0));
  REQUIRE(b.hi[0] == Catch::Approx(2.0));
  REQUIRE(b.hi[1] == Catch::Approx(1.0));
}
