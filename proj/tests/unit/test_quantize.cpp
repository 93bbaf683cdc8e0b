#include <doctest.h>

#include "gindex/quantize.hpp"

using namespace gindex;

TEST_CASE("order zero multiplication symbols give Toeplitz matrices") {
  const PeriodicGrid g(32);
  auto f = [](double x) { return cplx(1 + 0.5 * std::cos(x), 0.25 * std::sin(2 * x)); };
  const auto pf = PeriodicFunction::from_function(g, f);
  const FrequencyWindow w(10);
  const Eigen::MatrixXcd A = op_classical(FullSymbol::from_principal({pf, pf}), w);
  // Fourier coefficients by a fine Riemann sum, exact for this trigonometric polynomial.
  auto coeff = [&](int m) {
    cplx s = 0;
    const int n = 256;
    for (int j = 0; j < n; ++j) s += f(kTwoPi * j / n) * std::polar(1.0, -m * kTwoPi * j / n);
    return s / double(n);
  };
  for (int j = -10; j <= 10; ++j) {
    for (int k = -10; k <= 10; ++k) CHECK(std::abs(A(w.index(j), w.index(k)) - coeff(j - k)) < 1e-13);
  }
}

TEST_CASE("sheets select the sign of the frequency") {
  const PeriodicGrid g(16);
  const PrincipalSymbol s{PeriodicFunction::constant(g, 2.0), PeriodicFunction::constant(g, -1.0)};
  const FrequencyWindow w(5);
  const Eigen::MatrixXcd A = op_classical(FullSymbol::from_principal(s), w);
  for (int k = -5; k <= 5; ++k) CHECK(A(w.index(k), w.index(k)) == cplx(k >= 0 ? 2.0 : -1.0));
}

TEST_CASE("graded products agree with dense products for monomial actions") {
  const auto act = make_action({GroupKind::dihedral, 3}, {Realization::Kind::rotation});
  const PeriodicGrid g(32);
  const FrequencyWindow w(16);
  auto cache = std::make_shared<const TransformCache>(act, w);
  auto sym = [&](double a, int k) {
    const auto f = PeriodicFunction::from_function(g, [=](double x) { return cplx(a + std::cos(k * x), 0.1 * k); });
    return FullSymbol::from_principal({f, f.scaled(0.5)});
  };
  const auto A = assemble(cache, {{{0, 0}, sym(2, 1)}, {{1, 1}, sym(0.3, 2)}});
  const auto B = assemble(cache, {{{2, 0}, sym(1, 3)}, {{0, 1}, sym(0.2, 1)}});
  const Eigen::MatrixXcd lhs = realize(labeled_multiply(A, B));
  const Eigen::MatrixXcd rhs = realize(A) * realize(B);
  CHECK((lhs - rhs).norm() < 1e-11 * rhs.norm());
}

TEST_CASE("op_h of separable symbols matches the sampled function") {
  const PeriodicGrid g(32);
  SemiclassicalSymbol a;
  a.terms.push_back({PeriodicFunction::mode(g, 1), Profile::gaussian(0.5, 1.0), 0});
  a.terms.push_back({PeriodicFunction::constant(g, 2.0), Profile::bump(0, 1.5), 1});
  const double h = 0.1;
  const FrequencyWindow w(64);
  const Eigen::MatrixXcd A = op_h(a, h, w);
  const Eigen::MatrixXcd B = op_h_function([&](double x, double xi) { return a(x, xi, h); }, h, w, 32);
  CHECK((A - B).norm() < 1e-12);
}
