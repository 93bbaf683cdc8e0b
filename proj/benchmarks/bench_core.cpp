#include <benchmark/benchmark.h>

#include <random>

#include "gindex/index.hpp"
#include "gindex/semiclassical.hpp"

using namespace gindex;

namespace {

void BM_dft(benchmark::State& st) {
  const int m = static_cast<int>(st.range(0));
  std::mt19937 rng(1);
  std::normal_distribution<double> n;
  std::vector<cplx> v(static_cast<size_t>(m));
  for (auto& z : v) z = {n(rng), n(rng)};
  for (auto _ : st) benchmark::DoNotOptimize(dft(v));
}
BENCHMARK(BM_dft)->Arg(64)->Arg(256)->Arg(1024);

void BM_op_classical(benchmark::State& st) {
  const PeriodicGrid g(64);
  const auto f = PeriodicFunction::from_function(g, [](double x) { return cplx(2 + std::cos(x), std::sin(2 * x)); });
  const auto a = FullSymbol::from_principal({f, f.conj()});
  const FrequencyWindow w(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(op_classical(a, w));
}
BENCHMARK(BM_op_classical)->Arg(128)->Arg(256)->Arg(512);

void BM_window_index(benchmark::State& st) {
  const auto act = make_action({GroupKind::trivial}, {});
  const PeriodicGrid g(64);
  const PrincipalSymbol s{PeriodicFunction::constant(g, 1.0), PeriodicFunction::mode(g, 1)};
  const std::vector<std::pair<GroupElement, FullSymbol>> spec{{GroupElement{}, FullSymbol::from_principal(s)}};
  const OperatorFactory fac = [&](const FrequencyWindow& w) {
    return assemble(std::make_shared<const TransformCache>(act, w), spec);
  };
  for (auto _ : st) benchmark::DoNotOptimize(window_index(fac, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_window_index)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_localized_z2(benchmark::State& st) {
  const auto act = make_action({GroupKind::cyclic, 2, 1.0, "s"}, {Realization::Kind::reflection});
  const PeriodicGrid g(64);
  CrossedSymbol a(act, g);
  a.set({0, 0}, {PeriodicFunction::constant(g, 2.0), PeriodicFunction::mode(g, 1).scaled(2.0)});
  a.set({1, 0}, PrincipalSymbol::constant(g, 1.0));
  std::vector<std::pair<GroupElement, FullSymbol>> spec;
  for (const auto& [el, s] : a.terms()) spec.push_back({el, FullSymbol::from_principal(s)});
  const OperatorFactory fac = [&](const FrequencyWindow& w) {
    return assemble(std::make_shared<const TransformCache>(act, w), spec);
  };
  const auto r = invert_principal(a);
  const int n = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(localized_indices(fac, r, {n / 2, n}));
}
BENCHMARK(BM_localized_z2)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_star_h(benchmark::State& st) {
  const auto act = make_action({GroupKind::dihedral, 3}, {Realization::Kind::rotation});
  const PeriodicGrid g(64);
  SemiclassicalSymbol a;
  a.terms.push_back({PeriodicFunction::mode(g, 1), Profile::gaussian(0.3, 1.0), 0});
  const Lattice lat{0.05, 80, 64};
  const int order = static_cast<int>(st.range(0));
  const auto A = StarSeries::from_symbols(act, lat, order, {{{0, 0}, a}, {{1, 1}, a}});
  for (auto _ : st) benchmark::DoNotOptimize(star_h(A, A));
}
BENCHMARK(BM_star_h)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_symbol_parametrix(benchmark::State& st) {
  const auto act = make_action({GroupKind::trivial}, {});
  const PeriodicGrid g(64);
  const PrincipalSymbol s{PeriodicFunction::constant(g, 1.0), PeriodicFunction::mode(g, 1)};
  const BSymbol b{CrossedSymbol::delta(act, {}, s)};
  const double h = 0.05;
  const Lattice lat{h, lattice_cutoff(6.0, h, 16), 64};
  for (auto _ : st) benchmark::DoNotOptimize(symbol_parametrix_h(b, lat, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_symbol_parametrix)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
