#include <doctest.h>

#include "gindex/error.hpp"
#include "gindex/index.hpp"

using namespace gindex;

namespace {

OperatorFactory factory(GroupActionPtr act, std::vector<std::pair<GroupElement, FullSymbol>> spec) {
  return [act, spec](const FrequencyWindow& w) {
    return assemble(std::make_shared<const TransformCache>(act, w), spec);
  };
}

}  // namespace

TEST_CASE("Toeplitz-type operators: index equals the winding difference") {
  const auto act = make_action({GroupKind::trivial}, {});
  const PeriodicGrid g(64);
  for (int w : {-2, 0, 3}) {
    // plus sheet does not wind (3 + e^{ix}), minus sheet winds w times
    const PrincipalSymbol s{PeriodicFunction::from_function(g, [](double x) { return 3.0 + std::polar(1.0, x); }),
                            PeriodicFunction::mode(g, w)};
    const auto fac = factory(act, {{GroupElement{}, FullSymbol::from_principal(s)}});
    const IndexReport r = numerical_index(fac, {32, 64});
    CHECK(r.index == kIndexSign * w);
    CHECK(r.sv_gap > 1e3);
    CHECK(winding_index_oracle(CrossedSymbol::delta(act, {}, s)) == r.index);
  }
}

TEST_CASE("localized indices sum to the Fredholm index on Z/2") {
  const auto act = make_action({GroupKind::cyclic, 2, 1.0, "s"}, {Realization::Kind::reflection});
  const PeriodicGrid g(64);
  CrossedSymbol a(act, g);
  a.set({0, 0}, {PeriodicFunction::constant(g, 2.0), PeriodicFunction::mode(g, 1).scaled(2.0)});
  a.set({1, 0}, PrincipalSymbol::constant(g, 1.0));
  std::vector<std::pair<GroupElement, FullSymbol>> spec;
  for (const auto& [el, s] : a.terms()) spec.push_back({el, FullSymbol::from_principal(s)});
  const auto fac = factory(act, spec);
  const auto rep = decomposition_check(fac, invert_principal(a), {32, 64}, {32, 64});
  CHECK(rep.fredholm_index == 1);
  CHECK(rep.residual < 1e-6);
  CHECK(rep.rounded_match);
  REQUIRE(rep.classes.size() == 2);
}

TEST_CASE("vanishing check needs a nonzero homomorphism") {
  const auto act = make_action({GroupKind::cyclic, 2, 1.0, "s"}, {Realization::Kind::reflection});
  const PeriodicGrid g(16);
  const auto a = CrossedSymbol::unit(act, g);
  const auto fac = factory(act, {{GroupElement{}, FullSymbol::from_principal(PrincipalSymbol::constant(g, 1.0))}});
  bool threw = false;
  try {
    prop7_check(fac, a, {1, 0}, {16, 32});
  } catch (const Error& e) {
    threw = e.kind() == ErrorKind::NoHomomorphism;
  }
  CHECK(threw);
}

TEST_CASE("localized traces of the identity count the window") {
  const auto act = make_action({GroupKind::trivial}, {});
  const FrequencyWindow w(10);
  const auto one = LabeledOperator::unit(std::make_shared<const TransformCache>(act, w));
  const cplx t = localized_trace(one, act->group().conjugacy_class({}), 4);
  CHECK(std::abs(t - 9.0) < 1e-14);
}
