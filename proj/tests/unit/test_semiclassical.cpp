#include <doctest.h>

#include <cmath>

#include "gindex/error.hpp"
#include "gindex/index.hpp"
#include "gindex/semiclassical.hpp"

using namespace gindex;

TEST_CASE("jet arithmetic") {
  const Jet x = Jet::variable(0.7, 6);
  const Jet e = x.exp();
  double fact = 1;
  for (int k = 0; k < 6; ++k) {
    if (k > 0) fact *= k;
    CHECK(std::abs(e[k] - std::exp(0.7) / fact) < 1e-14);
  }
  const Jet one = x * x.reciprocal();
  CHECK(std::abs(one[0] - 1.0) < 1e-15);
  for (int k = 1; k < 6; ++k) CHECK(std::abs(one[k]) < 1e-14);
  const Jet p = x.pow(-2.0);  // (0.7 + d)^-2 = sum (k+1)(-d)^k / 0.7^{k+2}
  for (int k = 0; k < 6; ++k) CHECK(std::abs(p[k] - (k + 1) * std::pow(-1.0, k) / std::pow(0.7, k + 2)) < 1e-11);
}

TEST_CASE("profile jets match finite differences") {
  for (const Profile& p : {Profile::gaussian(0.3, 1.2), Profile::inverse_power(3), Profile::bump(0.1, 2.0),
                           Profile::psi_plus(1.0)}) {
    for (double xi : {-0.4, 0.5, 1.4}) {
      const Jet j = p.jet(xi, 3);
      CHECK(std::abs(j[0].real() - p(xi)) < 1e-14);
      const double d = 1e-5;
      const double fd = (p(xi + d) - p(xi - d)) / (2 * d);
      CHECK(std::abs(j[1].real() - fd) < 1e-7);
    }
  }
}

TEST_CASE("Laurent fit and log-log slope recover exact data") {
  std::vector<double> h;
  std::vector<cplx> v;
  for (double x : default_h_grid()) {
    h.push_back(x);
    v.push_back(cplx(0.25, 0.0) / x + cplx(2.0, -1.0) + cplx(3.0, 0.0) * x * x);
  }
  const LaurentFit f = laurent_fit(h, v, -1, 2);
  CHECK(std::abs(f.coeff(-1) - 0.25) < 1e-9);
  CHECK(std::abs(f.coeff(0) - cplx(2.0, -1.0)) < 1e-8);
  CHECK(std::abs(f.coeff(1)) < 1e-6);
  CHECK(std::abs(f.coeff(2) - 3.0) < 1e-5);
  std::vector<double> y;
  for (double x : h) y.push_back(5 * x * x);
  CHECK(std::abs(loglog_slope(h, y) - 2.0) < 1e-12);
  CHECK(default_h_grid().size() == 8);
}

TEST_CASE("star product of a Fourier multiplier with e^{ix} is the exact shift") {
  // op(p(xi)) e^{ix} has symbol p(xi + h) e^{ix}, so the h^n term is p^(n)(xi)/n! e^{ix}.
  const auto act = make_action({GroupKind::trivial}, {});
  const PeriodicGrid g(16);
  const Lattice lat{0.1, 40, 16};
  SemiclassicalSymbol a, b;
  a.terms.push_back({PeriodicFunction::constant(g, 1.0), Profile::xi_times(Profile::gaussian(0, 1.0)), 0});
  b.terms.push_back({PeriodicFunction::mode(g, 1), Profile::constant(1.0), 0});
  const auto A = StarSeries::from_symbols(act, lat, 3, {{{}, a}});
  const auto B = StarSeries::from_symbols(act, lat, 3, {{{}, b}});
  const auto C = star_h(A, B);
  auto d1 = [](double xi) { return (1 - 2 * xi * xi) * std::exp(-xi * xi); };
  auto d2 = [](double xi) { return 0.5 * (4 * xi * xi * xi - 6 * xi) * std::exp(-xi * xi); };
  const auto& t1 = C.terms().at({GroupElement{}, 1});
  const auto& t2 = C.terms().at({GroupElement{}, 2});
  for (int k : {-7, 0, 5, 12}) {
    const double xi = lat.xi(k);
    for (int i : {0, 3, 9}) {
      const cplx e = std::polar(1.0, g.node(i));
      CHECK(std::abs(t1.at(k, 0, i) - d1(xi) * e) < 1e-12);
      CHECK(std::abs(t2.at(k, 0, i) - d2(xi) * e) < 1e-12);
    }
  }
}

TEST_CASE("trace power laws need trace-class symbols") {
  const auto act = make_action({GroupKind::trivial}, {});
  const PeriodicGrid g(64);
  SemiclassicalSymbol a;
  a.terms.push_back({PeriodicFunction::constant(g, 1.0), Profile::inverse_power(2), 0});
  bool threw = false;
  try {
    trace_power_law(act, {}, a, default_h_grid());
  } catch (const Error& e) {
    threw = e.kind() == ErrorKind::ResidualNotTraceClass;
  }
  CHECK(threw);
}

TEST_CASE("algebraic index of a winding symbol") {
  const auto act = make_action({GroupKind::trivial}, {});
  const PeriodicGrid g(64);
  const PrincipalSymbol s{PeriodicFunction::constant(g, 1.0), PeriodicFunction::mode(g, -1)};
  const BSymbol b{CrossedSymbol::delta(act, {}, s)};
  const auto r = algebraic_index(b, act->group().conjugacy_class({}), default_h_grid());
  CHECK(std::abs(r.c0 - cplx(kIndexSign * -1.0)) < 1e-2);
  CHECK_FALSE(r.negative_power_violation);
}

TEST_CASE("star products need isometric actions") {
  const auto act = make_action({GroupKind::cyclic, 3, 1.0, "r"}, {Realization::Kind::conjugated_rotation, 0.3});
  const Lattice lat{0.2, 16, 16};
  const auto u = StarSeries::unit(act, lat, 2);
  bool threw = false;
  try {
    star_h(u, u);
  } catch (const Error& e) {
    threw = e.kind() == ErrorKind::NonIsometricAction;
  }
  CHECK(threw);
}
