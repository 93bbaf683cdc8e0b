#include <doctest.h>

#include "gindex/crossed_symbol.hpp"
#include "gindex/error.hpp"

using namespace gindex;

namespace {

PrincipalSymbol trig(const PeriodicGrid& g, double a, double b, int k) {
  auto f = [&](double s) {
    return PeriodicFunction::from_function(g, [=](double x) { return cplx(a + s * std::cos(x), b * std::sin(k * x)); });
  };
  return {f(0.3), f(-0.2)};
}

}  // namespace

TEST_CASE("crossed product is associative and has a unit") {
  const auto act = make_action({GroupKind::dihedral, 3}, {Realization::Kind::rotation});
  const PeriodicGrid g(32);
  CrossedSymbol a(act, g), b(act, g), c(act, g);
  a.set({0, 0}, trig(g, 2.0, 0.1, 1));
  a.set({1, 0}, trig(g, 0.2, 0.3, 2));
  b.set({0, 1}, trig(g, 1.0, 0.5, 1));
  b.set({2, 1}, trig(g, -0.4, 0.2, 3));
  c.set({1, 1}, trig(g, 0.7, 0.1, 2));
  c.set({0, 0}, trig(g, 1.0, 0.0, 1));
  const auto lhs = star_principal(star_principal(a, b), c);
  const auto rhs = star_principal(a, star_principal(b, c));
  CHECK(lhs.distance(rhs) < 1e-12);
  CHECK(star_principal(CrossedSymbol::unit(act, g), a).distance(a) < 1e-14);
}

TEST_CASE("invertible coefficients need not give an elliptic symbol") {
  const auto act = make_action({GroupKind::cyclic, 2, 1.0, "s"}, {Realization::Kind::reflection});
  const PeriodicGrid g(16);
  CrossedSymbol a(act, g);
  a.set({0, 0}, PrincipalSymbol::constant(g, 1.0));
  a.set({1, 0}, PrincipalSymbol::constant(g, 1.0));
  // 1 + delta_s is a multiple of a projection in C[Z/2].
  CHECK(is_elliptic(a).verdict == Verdict::not_elliptic);
  bool threw = false;
  try {
    invert_principal(a);
  } catch (const Error& e) {
    threw = e.kind() == ErrorKind::NotElliptic;
  }
  CHECK(threw);

  a.set({0, 0}, PrincipalSymbol::constant(g, 2.0));
  const auto r = is_elliptic(a);
  CHECK(r.verdict == Verdict::elliptic);
  CHECK(std::abs(r.min_value - 1.0) < 1e-12);  // singular values 3 and 1
}

TEST_CASE("principal inverse on a finite group") {
  const auto act = make_action({GroupKind::dihedral, 3}, {Realization::Kind::rotation});
  const PeriodicGrid g(32);
  CrossedSymbol a(act, g);
  a.set({0, 0}, trig(g, 3.0, 0.4, 1));
  a.set({1, 0}, trig(g, 0.3, 0.2, 2));
  a.set({1, 1}, trig(g, 0.2, 0.1, 1));
  const auto r = invert_principal(a);
  CHECK(star_principal(a, r).distance(CrossedSymbol::unit(act, g)) < 1e-10);
  CHECK(star_principal(r, a).distance(CrossedSymbol::unit(act, g)) < 1e-10);
}

TEST_CASE("Neumann inverse on the integer shift group") {
  const auto act = make_action({GroupKind::integer_shift, 1, 1.0}, {Realization::Kind::rotation});
  const PeriodicGrid g(32);
  CrossedSymbol a(act, g);
  a.set({0, 0}, PrincipalSymbol::constant(g, 2.0));
  a.set({1, 0}, PrincipalSymbol::constant(g, 0.2));
  const auto e = is_elliptic(a);
  CHECK(e.verdict == Verdict::elliptic);
  CHECK(std::abs(e.min_value - 1.8) < 1e-12);
  const auto r = invert_principal(a);
  CHECK(star_principal(a, r).distance(CrossedSymbol::unit(act, g)) < 1e-8);
}
