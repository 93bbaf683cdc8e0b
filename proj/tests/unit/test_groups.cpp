#include <doctest.h>
#include <algorithm>

#include "gindex/error.hpp"
#include "gindex/groups.hpp"
#include "gindex/quantize.hpp"

using namespace gindex;

TEST_CASE("dihedral group axioms and classes") {
  const auto G = GroupSpec::build({GroupKind::dihedral, 3});
  const auto el = G.elements();
  REQUIRE(el.size() == 6);
  for (const auto& a : el) {
    CHECK(G.is_identity(G.multiply(a, G.inverse(a))));
    for (const auto& b : el) {
      for (const auto& c : el) CHECK(G.multiply(G.multiply(a, b), c) == G.multiply(a, G.multiply(b, c)));
    }
  }
  const auto classes = G.conjugacy_classes();
  std::vector<size_t> sizes;
  for (const auto& c : classes) sizes.push_back(c.members.size());
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<size_t>{1, 2, 3});
  CHECK(G.element_order({0, 1}) == 2);
  CHECK(G.element_order({1, 0}) == 3);
}

TEST_CASE("integer shift group") {
  const auto G = GroupSpec::build({GroupKind::integer_shift, 1, 1.0});
  CHECK_FALSE(G.is_finite());
  CHECK(G.chi({3, 0}) == 3);
  CHECK(G.element_order({2, 0}) == 0);
  const auto cls = G.conjugacy_class({2, 0});
  CHECK(cls.members.size() == 1);
  CHECK_FALSE(cls.torsion);
  CHECK(G.parse(G.name({-4, 0})) == GroupElement{-4, 0});
}

TEST_CASE("names round trip and unknown names are schema errors") {
  const auto G = GroupSpec::build({GroupKind::dihedral, 4});
  for (const auto& g : G.elements()) CHECK(G.parse(G.name(g)) == g);
  bool threw = false;
  try {
    G.parse("q7");
  } catch (const Error& e) {
    threw = e.kind() == ErrorKind::SchemaError;
  }
  CHECK(threw);
}

TEST_CASE("conjugated rotation is a diffeomorphism of finite order") {
  const auto a = CircleDiffeo::conjugated_rotation(kTwoPi / 3, 0.3);
  for (double x : {0.0, 1.0, 2.5, 5.9}) {
    const double y = a.forward(a.inverse(x));
    CHECK(std::abs(std::remainder(y - x, kTwoPi)) < 1e-12);
    const double fd = (a.forward(x + 1e-6) - a.forward(x - 1e-6)) / 2e-6;
    CHECK(std::abs(fd - a.derivative(x)) < 1e-6);
    const double z = a.forward(a.forward(a.forward(x)));
    CHECK(std::abs(std::remainder(z - x, kTwoPi)) < 1e-10);
  }
}

TEST_CASE("monomial transforms are unitary and respect the group law") {
  const auto act = make_action({GroupKind::dihedral, 3}, {Realization::Kind::rotation});
  const FrequencyWindow w(20);
  const auto& G = act->group();
  for (const auto& g : G.elements()) {
    const Eigen::MatrixXcd m = act->quantize(g, w).matrix();
    CHECK((m.adjoint() * m - Eigen::MatrixXcd::Identity(w.dim(), w.dim())).norm() < 1e-13);
    for (const auto& h : G.elements()) {
      const Eigen::MatrixXcd gh = act->quantize(G.multiply(g, h), w).matrix();
      CHECK((m * act->quantize(h, w).matrix() - gh).norm() < 1e-12);
    }
  }
}

TEST_CASE("rotations transport symbols exactly") {
  // Phi op(a) Phi^{-1} = op(a o C) for a rotation by a whole number of grid steps.
  const auto act = make_action({GroupKind::cyclic, 4, 1.0, "r"}, {Realization::Kind::rotation});
  const PeriodicGrid grid(64);
  const FrequencyWindow w(24);
  const PrincipalSymbol a{PeriodicFunction::from_function(grid, [](double x) { return cplx(2 + std::cos(x), std::sin(3 * x)); }),
                          PeriodicFunction::mode(grid, 2)};
  const GroupElement r{1, 0};
  const auto phi = act->quantize(r, w);
  const auto inv = act->quantize(act->group().inverse(r), w);
  const Eigen::MatrixXcd lhs = phi.conjugate(op_classical(FullSymbol::from_principal(a), w), inv);
  const Eigen::MatrixXcd rhs = op_classical(FullSymbol::from_principal(transport(a, act->transform(r))), w);
  CHECK((lhs - rhs).norm() < 1e-11);
}

TEST_CASE("incompatible realizations are rejected") {
  bool threw = false;
  try {
    make_action({GroupKind::cyclic, 3}, {Realization::Kind::half_wave});
  } catch (const Error& e) {
    threw = e.kind() == ErrorKind::InvalidParameter;
  }
  CHECK(threw);
}
