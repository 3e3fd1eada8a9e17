#include <catch2/catch_amalgamated.hpp>

#include "funnelkit/expr.hpp"
#include "funnelkit/poly.hpp"
#include "funnelkit/util/rng.hpp"

using namespace funnelkit;

namespace {
Polynomial random_poly(Rng& rng, int nvars, int deg, int nterms) {
  std::vector<VarId> vars;
  for (int i = 0; i < nvars; ++i) vars.push_back(i);
  auto basis = monomial_basis(vars, deg);
  Polynomial p;
  for (int i = 0; i < nterms; ++i) {
    const Monomial& m = basis[rng.uniform_int(0, static_cast<int>(basis.size()) - 1)];
    p.add_term(m, rng.uniform(-2.0, 2.0));
  }
  return p;
}
}  // namespace

TEST_CASE("eval basics") {
  // p = x^2 + 2xy at (1,2) -> 5
  Polynomial p = Polynomial::var(0) * Polynomial::var(0) +
                 2.0 * (Polynomial::var(0) * Polynomial::var(1));
  Eigen::VectorXd z(2);
  z << 1, 2;
  REQUIRE(p.eval(z) == Catch::Approx(5.0));

  Polynomial zero;
  REQUIRE(zero.eval(z) == 0.0);

  Polynomial x = Polynomial::var(0);
  Eigen::VectorXd z1(1);
  z1 << 3;
  REQUIRE(x.eval(z1) == Catch::Approx(3.0));

  // missing assignment
  Polynomial q = Polynomial::var(3);
  REQUIRE_THROWS_AS(q.eval(z1), std::out_of_range);
}

TEST_CASE("differentiate basics") {
  Polynomial x = Polynomial::var(0), y = Polynomial::var(1);
  REQUIRE((x * x).differentiate(0).near_equal(2.0 * x, 1e-15));
  REQUIRE(y.differentiate(0).is_zero());
  // d/dx (x^2 y + 3x) = 2xy + 3
  Polynomial p = x * x * y + 3.0 * x;
  REQUIRE(p.differentiate(0).near_equal(2.0 * x * y + Polynomial(3.0), 1e-15));
}

TEST_CASE("eval is a ring homomorphism on random polynomials") {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    Polynomial p = random_poly(rng, 3, 3, 6), q = random_poly(rng, 3, 3, 6);
    Eigen::VectorXd z(3);
    for (int i = 0; i < 3; ++i) z[i] = rng.uniform(-1.5, 1.5);
    double scale = std::max(1.0, std::abs(p.eval(z)) + std::abs(q.eval(z)));
    REQUIRE((p + q).eval(z) == Catch::Approx(p.eval(z) + q.eval(z)).margin(1e-12 * scale));
    double prod_scale = std::max(1.0, std::abs(p.eval(z) * q.eval(z)));
    REQUIRE((p * q).eval(z) == Catch::Approx(p.eval(z) * q.eval(z)).margin(1e-12 * prod_scale));
  }
}

TEST_CASE("product rule holds symbolically") {
  Rng rng(11);
  for (int t = 0; t < 30; ++t) {
    Polynomial p = random_poly(rng, 2, 3, 5), q = random_poly(rng, 2, 3, 5);
    Polynomial lhs = (p * q).differentiate(0);
    Polynomial rhs = p.differentiate(0) * q + p * q.differentiate(0);
    REQUIRE(lhs.near_equal(rhs, 1e-11 * std::max(1.0, lhs.max_abs_coeff())));
  }
}

TEST_CASE("monomial_basis counts and order") {
  auto b1 = monomial_basis({0, 1}, 1);
  REQUIRE(b1.size() == 3);
  REQUIRE(b1[0].is_one());
  REQUIRE(b1[1] == Monomial::var(0));
  REQUIRE(b1[2] == Monomial::var(1));

  auto b2 = monomial_basis({0}, 2);
  REQUIRE(b2.size() == 3);
  REQUIRE(b2[2] == Monomial::var(0, 2));

  REQUIRE(monomial_basis({0, 1}, 2).size() == 6);

  // C(n+d, d) for a few cases
  REQUIRE(monomial_basis({0, 1, 2}, 3).size() == 20);
  REQUIRE(monomial_basis({0, 1, 2, 3}, 2).size() == 15);

  // grlex is deterministic and sorted
  auto b = monomial_basis({0, 1, 2}, 3);
  for (std::size_t i = 1; i < b.size(); ++i) REQUIRE(b[i - 1] < b[i]);
}

TEST_CASE("taylor expansion of sin and cos") {
  Eigen::VectorXd c0 = Eigen::VectorXd::Zero(1);
  ExprPtr psi = Expr::var(0);

  Polynomial s3 = taylor_expand(Expr::sin(psi), c0, 3);
  Polynomial expect = Polynomial::var(0) - (1.0 / 6.0) * (Polynomial::var(0) * Polynomial::var(0) * Polynomial::var(0));
  REQUIRE(s3.near_equal(expect, 1e-14));

  Polynomial c2 = taylor_expand(Expr::cos(psi), c0, 2);
  Polynomial expect_c = Polynomial(1.0) - 0.5 * (Polynomial::var(0) * Polynomial::var(0));
  REQUIRE(c2.near_equal(expect_c, 1e-14));

  Polynomial k = taylor_expand(Expr::constant(5.0), c0, 4);
  REQUIRE(k.near_equal(Polynomial(5.0), 1e-15));
}

TEST_CASE("taylor matches value and finite-difference derivatives at center") {
  // f = sin(x) * cos(y) + x^2 * y about a nonzero center
  ExprPtr f = Expr::sin(Expr::var(0)) * Expr::cos(Expr::var(1)) +
              Expr::pow(Expr::var(0), 2) * Expr::var(1);
  Eigen::VectorXd c(2);
  c << 0.4, -0.3;
  Polynomial t = taylor_expand(f, c, 3);

  // value at center: deviation = 0
  REQUIRE(t.eval(Eigen::VectorXd::Zero(2)) == Catch::Approx(f->eval(c)).margin(1e-12));

  // first and second directional finite differences
  double h = 1e-4;
  for (int dim = 0; dim < 2; ++dim) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
    e[dim] = h;
    double fd1 = (f->eval(c + e) - f->eval(c - e)) / (2 * h);
    double td1 = (t.eval(e) - t.eval(-e)) / (2 * h);
    REQUIRE(td1 == Catch::Approx(fd1).margin(1e-6));
    double fd2 = (f->eval(c + e) - 2 * f->eval(c) + f->eval(c - e)) / (h * h);
    double td2 = (t.eval(e) - 2 * t.eval(Eigen::VectorXd::Zero(2)) + t.eval(-e)) / (h * h);
    REQUIRE(td2 == Catch::Approx(fd2).margin(1e-5));
  }
}

TEST_CASE("expr symbolic derivative matches finite differences") {
  ExprPtr f = Expr::sin(Expr::var(0) * Expr::var(1)) + Expr::pow(Expr::var(1), 3);
  ExprPtr df = f->derivative(1);
  Eigen::VectorXd z(2);
  z << 0.7, 1.2;
  double h = 1e-6;
  Eigen::VectorXd zp = z, zm = z;
  zp[1] += h;
  zm[1] -= h;
  REQUIRE(df->eval(z) == Catch::Approx((f->eval(zp) - f->eval(zm)) / (2 * h)).margin(1e-8));
}

TEST_CASE("substitute replaces a variable by a polynomial") {
  // p(x, u) = x^2 + u, substitute u = 2x: -> x^2 + 2x
  Polynomial p = Polynomial::var(0) * Polynomial::var(0) + Polynomial::var(1);
  Polynomial sub = p.substitute(1, 2.0 * Polynomial::var(0));
  REQUIRE(sub.near_equal(Polynomial::var(0) * Polynomial::var(0) + 2.0 * Polynomial::var(0), 1e-15));
  REQUIRE(p.substitute(1, 3.0).coeff(Monomial::one()) == Catch::Approx(3.0));
}
