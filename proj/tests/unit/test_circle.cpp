#include <doctest.h>

#include <functional>
#include <random>

#include "gindex/circle.hpp"
#include "gindex/error.hpp"

using namespace gindex;

namespace {

std::vector<cplx> random_values(int m, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<cplx> v(static_cast<size_t>(m));
  for (auto& z : v) z = {u(rng), u(rng)};
  return v;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidParameter;
}

}  // namespace

TEST_CASE("centered dft matches the defining sum") {
  for (int m : {8, 9, 16}) {
    const auto v = random_values(m, 3u + static_cast<unsigned>(m));
    const auto c = dft(v);
    REQUIRE(c.size() == v.size());
    for (int i = 0; i < m; ++i) {
      const int k = lowest_mode(m) + i;
      cplx s = 0;
      for (int j = 0; j < m; ++j) s += v[static_cast<size_t>(j)] * std::polar(1.0, -k * kTwoPi * j / m);
      CHECK(std::abs(c[static_cast<size_t>(i)] - s / double(m)) < 1e-13);
    }
    const auto back = idft(c);
    for (int j = 0; j < m; ++j) CHECK(std::abs(back[static_cast<size_t>(j)] - v[static_cast<size_t>(j)]) < 1e-13);
  }
}

TEST_CASE("trigonometric interpolation is exact on band-limited functions") {
  const PeriodicGrid g(32);
  const std::vector<std::pair<int, cplx>> modes{{-3, {0.5, 0.1}}, {0, 1.0}, {5, {0, -2}}};
  const auto f = PeriodicFunction::from_modes(g, modes);
  for (double x : {0.1, 1.7, 4.0, 6.2}) {
    cplx want = 0;
    for (auto [k, c] : modes) want += c * std::polar(1.0, k * x);
    CHECK(std::abs(f(x) - want) < 1e-12);
  }
  CHECK(std::abs(f.coeff(5) - cplx(0, -2)) < 1e-14);
  CHECK(f.coeff(40) == cplx(0));
}

TEST_CASE("winding numbers") {
  const PeriodicGrid g(64);
  CHECK(winding_number(PeriodicFunction::mode(g, 3)).winding == 3);
  CHECK(winding_number(PeriodicFunction::mode(g, -2).conj()).winding == 2);
  const auto shifted = PeriodicFunction::from_function(g, [](double x) { return 2.0 + std::polar(1.0, x); });
  CHECK(winding_number(shifted).winding == 0);
  const auto through_zero = PeriodicFunction::from_function(g, [](double x) { return std::polar(1.0, x) - 1.0; });
  CHECK(kind_of([&] { winding_number(through_zero); }) == ErrorKind::NearZeroValue);
}

TEST_CASE("pointwise algebra") {
  const PeriodicGrid g(16);
  const auto f = PeriodicFunction::from_function(g, [](double x) { return cplx(2 + std::cos(x), std::sin(x)); });
  const auto one = f * reciprocal(f);
  for (int j = 0; j < g.size(); ++j) CHECK(std::abs(one.value(j) - 1.0) < 1e-14);
  CHECK(kind_of([&] { reciprocal(PeriodicFunction::constant(g, 0.0)); }) == ErrorKind::DivisionNearZero);
  CHECK(kind_of([&] { sum(f, PeriodicFunction::constant(PeriodicGrid(8), 1.0)); }) == ErrorKind::GridMismatch);
  const auto shifted = compose(PeriodicFunction::mode(g, 1), [](double x) { return x + 0.5; });
  CHECK(std::abs(shifted.value(3) - std::polar(1.0, g.node(3) + 0.5)) < 1e-13);
}
