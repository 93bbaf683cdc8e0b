#include "gindex/lab.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <random>
#include <set>
#include <sstream>

#include "gindex/error.hpp"
#include "gindex/index.hpp"
#include "gindex/semiclassical.hpp"

#ifndef GINDEX_VERSION
#define GINDEX_VERSION "0.0.0"
#endif

namespace gindex::lab {

using nlohmann::json;

const char* version() noexcept { return GINDEX_VERSION; }

const char* to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::pass: return "PASS";
    case Outcome::undecided: return "UNDECIDED";
    case Outcome::fail: return "FAIL";
  }
  return "?";
}

int exit_code(Outcome o) noexcept {
  switch (o) {
    case Outcome::pass: return 0;
    case Outcome::fail: return 1;
    case Outcome::undecided: return 2;
  }
  return 1;
}

Outcome worst(Outcome a, Outcome b) noexcept { return a > b ? a : b; }

Outcome RunRecord::outcome() const noexcept {
  Outcome o = Outcome::pass;
  for (const auto& e : experiments) o = worst(o, e.outcome);
  return o;
}

namespace {

const std::set<std::string> kKinds{"ellipticity", "index",       "localized",        "algebraic",
                                   "egorov",      "trace_asymptotics", "full_pipeline"};

[[noreturn]] void schema(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::SchemaError, "field '" + field + "': " + what);
}

const json* member(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

template <class T>
T get_as(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    schema(field, std::string("wrong type (") + j.type_name() + ")");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& prefix) {
  if (const json* v = member(j, key)) out = get_as<T>(*v, prefix + key);
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) schema(where + k, "unknown field");
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// summaries only; reports keep full precision
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

GroupKind parse_group_kind(const std::string& s) {
  for (auto k : {GroupKind::trivial, GroupKind::cyclic, GroupKind::dihedral, GroupKind::integer_shift}) {
    if (s == to_string(k)) return k;
  }
  schema("group.kind", "unknown group kind '" + s + "'");
}

Realization::Kind parse_realization_kind(const std::string& s) {
  using K = Realization::Kind;
  for (auto k : {K::none, K::rotation, K::reflection, K::conjugated_rotation, K::half_wave}) {
    if (s == to_string(k)) return k;
  }
  schema("realization.kind", "unknown realization '" + s + "'");
}

PeriodicFunction parse_modes(const json& j, const PeriodicGrid& grid, const std::string& field) {
  if (j.is_number()) return PeriodicFunction::constant(grid, j.get<double>());
  if (!j.is_array()) schema(field, "expected a number or a list of [k, re, im]");
  std::vector<std::pair<int, cplx>> modes;
  for (const auto& m : j) {
    if (!m.is_array() || m.size() < 2 || m.size() > 3) schema(field, "mode entries are [k, re, im]");
    const int k = get_as<int>(m[0], field);
    const double re = get_as<double>(m[1], field);
    const double im = m.size() == 3 ? get_as<double>(m[2], field) : 0.0;
    if (std::abs(k) >= grid.size() / 2) schema(field, "mode " + std::to_string(k) + " beyond the grid");
    modes.emplace_back(k, cplx(re, im));
  }
  return PeriodicFunction::from_modes(grid, modes);
}

PrincipalSymbol parse_principal(const json& j, const PeriodicGrid& grid, const std::string& field) {
  if (j.is_string()) {
    if (j.get<std::string>() != "unit") schema(field, "only \"unit\" is accepted as a string");
    return PrincipalSymbol::constant(grid, 1.0);
  }
  if (!j.is_object()) schema(field, "expected {\"plus\": ..., \"minus\": ...}");
  reject_unknown(j, {"plus", "minus"}, field + ".");
  const json* p = member(j, "plus");
  const json* m = member(j, "minus");
  if (!p || !m) schema(field, "both sheets are required");
  return {parse_modes(*p, grid, field + ".plus"), parse_modes(*m, grid, field + ".minus")};
}

SemiclassicalSymbol parse_semiclassical(const json& j, const PeriodicGrid& grid,
                                        const std::string& field) {
  if (!j.is_array()) schema(field, "expected a list of terms");
  SemiclassicalSymbol s;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    const json& t = j[i];
    if (!t.is_object()) schema(f, "expected {\"x\": ..., \"xi\": {...}}");
    reject_unknown(t, {"x", "xi", "h_power"}, f + ".");
    const json* x = member(t, "x");
    const json* xi = member(t, "xi");
    if (!x || !xi) schema(f, "terms need x and xi");
    int hp = 0;
    read(t, "h_power", hp, f + ".");
    try {
      s.terms.push_back({parse_modes(*x, grid, f + ".x"), Profile::from_json(*xi), hp});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SchemaError) schema(f + ".xi", e.detail());
      throw;
    }
  }
  return s;
}

std::vector<double> h_grid_of(const Knobs& k) {
  return k.h_grid.empty() ? default_h_grid() : k.h_grid;
}

// Portable uniform double in [0, 1).
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

PrincipalSymbol random_principal(std::mt19937_64& rng, const PeriodicGrid& grid, const RandomSymbols& r) {
  auto sheet = [&] {
    std::vector<std::pair<int, cplx>> modes;
    std::vector<cplx> c;
    double total = 0.0;
    for (int k = -r.modes; k <= r.modes; ++k) {
      const cplx z(2.0 * uniform(rng) - 1.0, 2.0 * uniform(rng) - 1.0);
      c.push_back(z);
      total += std::abs(z);
    }
    // sup norm <= sum |c_k| = 0.95 amplitude
    const double s = total > 0 ? 0.95 * r.amplitude / total : 0.0;
    for (int k = -r.modes; k <= r.modes; ++k) modes.emplace_back(k, s * c[static_cast<size_t>(k + r.modes)]);
    return PeriodicFunction::from_modes(grid, modes);
  };
  PeriodicFunction plus = sheet();
  PeriodicFunction minus = sheet();
  return {std::move(plus), std::move(minus)};
}

std::vector<GroupElement> random_support(const GroupSpec& G) {
  if (G.is_finite()) return G.elements();
  return {G.identity(), {1, 0}, {-1, 0}};
}

std::vector<GroupElement> target_elements(const ExperimentConfig& c, const GroupSpec& G) {
  std::vector<GroupElement> out;
  if (!c.elements.empty()) {
    for (const auto& e : c.elements) out.push_back(G.parse(e));
    return out;
  }
  if (G.is_finite()) {
    for (const auto& g : G.elements()) {
      if (!G.is_identity(g)) out.push_back(g);
    }
  } else {
    out.push_back({1, 0});
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

json ExperimentConfig::canonical() const {
  json j;
  j["group"] = {{"kind", to_string(group.kind)},
                {"m", group.m},
                {"theta", group.theta},
                {"generator", group.generator}};
  j["realization"] = {{"kind", to_string(realization.kind)}, {"epsilon", realization.epsilon}};
  j["grid"] = grid_size;
  j["symbols"] = symbols;
  if (random) {
    j["random_symbols"] = {{"modes", random->modes},
                           {"amplitude", random->amplitude},
                           {"scale", random->scale},
                           {"winding", random->winding}};
  }
  j["semiclassical"] = semiclassical;
  j["kinds"] = kinds;
  j["elements"] = elements;
  j["knobs"] = {{"windows", knobs.windows},
                {"index_windows", knobs.index_windows},
                {"h_grid", h_grid_of(knobs)},
                {"order", knobs.order},
                {"prune_tol", knobs.prune_tol},
                {"eps", knobs.eps},
                {"fill", cjson(knobs.fill)},
                {"sc_grid", knobs.sc_grid},
                {"trace_min_cutoff", knobs.trace_min_cutoff},
                {"egorov_cutoff", knobs.egorov_cutoff},
                {"egorov_grid", knobs.egorov_grid}};
  j["tolerances"] = {{"min_gap", tol.min_gap},
                     {"zero_tol", tol.zero_tol},
                     {"drift", tol.drift},
                     {"decomposition", tol.decomposition},
                     {"independence", tol.independence},
                     {"chi_vanishing", tol.chi_vanishing},
                     {"c0", tol.c0},
                     {"negative_power", tol.negative_power},
                     {"fit_residual", tol.fit_residual},
                     {"power_slope", tol.power_slope},
                     {"empty_fixed_trace", tol.empty_fixed_trace},
                     {"isometric_egorov", tol.isometric_egorov},
                     {"egorov_slope_min", tol.egorov_slope_min},
                     {"egorov_slope_max", tol.egorov_slope_max}};
  j["seed"] = seed;
  return j;
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) schema("<root>", "config must be a JSON object");
  reject_unknown(j, {"group", "realization", "grid", "symbol", "symbols", "random_symbols", "semiclassical",
                     "kind", "kinds", "experiments", "elements", "knobs", "tolerances", "seed", "output"},
                 "");
  ExperimentConfig c;

  const json* g = member(j, "group");
  if (!g) schema("group", "required");
  if (g->is_string()) {
    c.group.kind = parse_group_kind(g->get<std::string>());
  } else if (g->is_object()) {
    reject_unknown(*g, {"kind", "m", "theta", "generator"}, "group.");
    const json* k = member(*g, "kind");
    if (!k) schema("group.kind", "required");
    c.group.kind = parse_group_kind(get_as<std::string>(*k, "group.kind"));
    read(*g, "m", c.group.m, "group.");
    read(*g, "theta", c.group.theta, "group.");
    read(*g, "generator", c.group.generator, "group.");
  } else {
    schema("group", "expected a kind name or an object");
  }
  if (c.group.kind == GroupKind::trivial) c.group.m = 1;
  if (c.group.kind == GroupKind::dihedral) c.group.generator = "r";

  if (const json* r = member(j, "realization")) {
    if (r->is_string()) {
      c.realization.kind = parse_realization_kind(r->get<std::string>());
    } else if (r->is_object()) {
      reject_unknown(*r, {"kind", "epsilon", "t"}, "realization.");
      if (const json* k = member(*r, "kind")) {
        c.realization.kind = parse_realization_kind(get_as<std::string>(*k, "realization.kind"));
      }
      read(*r, "epsilon", c.realization.epsilon, "realization.");
      // half-wave time is the group angle
      if (const json* t = member(*r, "t")) c.group.theta = get_as<double>(*t, "realization.t");
    } else {
      schema("realization", "expected a kind name or an object");
    }
  } else {
    using K = Realization::Kind;
    switch (c.group.kind) {
      case GroupKind::trivial: c.realization.kind = K::none; break;
      case GroupKind::cyclic:
      case GroupKind::dihedral:
      case GroupKind::integer_shift: c.realization.kind = K::rotation; break;
    }
  }

  read(j, "grid", c.grid_size, "");
  if (c.grid_size < 8 || c.grid_size > (1 << 16)) schema("grid", "must lie in [8, 65536]");

  GroupActionPtr action;
  try {
    action = make_action(c.group, c.realization);
  } catch (const Error& e) {
    schema("group/realization", e.detail());
  }
  const GroupSpec& G = action->group();
  const PeriodicGrid grid(c.grid_size);

  const json* sym = member(j, "symbols");
  if (!sym) sym = member(j, "symbol");
  if (sym) {
    if (sym->is_string()) {
      if (sym->get<std::string>() != "unit") schema("symbols", "only \"unit\" is accepted as a string");
      c.symbols = "unit";
    } else if (sym->is_object()) {
      for (const auto& [name, val] : sym->items()) {
        try {
          G.parse(name);
        } catch (const Error&) {
          schema("symbols." + name, "unknown group element");
        }
        parse_principal(val, grid, "symbols." + name);
      }
      c.symbols = *sym;
    } else {
      schema("symbols", "expected \"unit\" or an element table");
    }
  }
  if (const json* r = member(j, "random_symbols")) {
    if (!r->is_object()) schema("random_symbols", "expected an object");
    reject_unknown(*r, {"modes", "amplitude", "scale", "winding"}, "random_symbols.");
    RandomSymbols rs;
    read(*r, "modes", rs.modes, "random_symbols.");
    read(*r, "amplitude", rs.amplitude, "random_symbols.");
    read(*r, "scale", rs.scale, "random_symbols.");
    read(*r, "winding", rs.winding, "random_symbols.");
    if (rs.modes < 0 || 2 * rs.modes + 1 >= c.grid_size / 2) schema("random_symbols.modes", "out of range");
    if (!(rs.amplitude >= 0.0) || !(rs.scale > 0.0)) schema("random_symbols", "amplitude/scale out of range");
    c.random = rs;
  }

  if (const json* sc = member(j, "semiclassical")) {
    if (!sc->is_object()) schema("semiclassical", "expected an element table");
    for (const auto& [name, val] : sc->items()) {
      try {
        G.parse(name);
      } catch (const Error&) {
        schema("semiclassical." + name, "unknown group element");
      }
      parse_semiclassical(val, grid, "semiclassical." + name);
    }
    c.semiclassical = *sc;
  }

  const json* kinds = member(j, "kinds");
  if (!kinds) kinds = member(j, "experiments");
  if (!kinds) kinds = member(j, "kind");
  if (!kinds) schema("kind", "required");
  if (kinds->is_string()) {
    c.kinds.push_back(kinds->get<std::string>());
  } else {
    c.kinds = get_as<std::vector<std::string>>(*kinds, "kinds");
  }
  if (c.kinds.empty()) schema("kinds", "at least one experiment is required");
  for (const auto& k : c.kinds) {
    if (!kKinds.count(k)) schema("kind", "unknown experiment '" + k + "'");
  }

  read(j, "elements", c.elements, "");
  for (const auto& e : c.elements) {
    try {
      G.parse(e);
    } catch (const Error&) {
      schema("elements", "unknown group element '" + e + "'");
    }
  }

  if (const json* k = member(j, "knobs")) {
    if (!k->is_object()) schema("knobs", "expected an object");
    reject_unknown(*k, {"windows", "index_windows", "h_grid", "order", "prune_tol", "eps", "fill", "sc_grid",
                        "trace_min_cutoff", "egorov_cutoff", "egorov_grid"},
                   "knobs.");
    Knobs& n = c.knobs;
    read(*k, "windows", n.windows, "knobs.");
    read(*k, "index_windows", n.index_windows, "knobs.");
    if (const json* h = member(*k, "h_grid")) {
      if (h->is_object()) {
        reject_unknown(*h, {"max", "min", "count"}, "knobs.h_grid.");
        double hmax = 0.2, hmin = 0.02;
        int count = 8;
        read(*h, "max", hmax, "knobs.h_grid.");
        read(*h, "min", hmin, "knobs.h_grid.");
        read(*h, "count", count, "knobs.h_grid.");
        if (count < 2 || !(hmin > 0.0) || !(hmax > hmin)) schema("knobs.h_grid", "invalid range");
        n.h_grid.clear();
        for (int i = 0; i < count; ++i) {
          n.h_grid.push_back(hmax * std::pow(hmin / hmax, static_cast<double>(i) / (count - 1)));
        }
      } else {
        n.h_grid = get_as<std::vector<double>>(*h, "knobs.h_grid");
      }
      for (double h : n.h_grid) {
        if (!(h > 0.0 && h <= 1.0)) schema("knobs.h_grid", "h must lie in (0, 1]");
      }
    }
    read(*k, "order", n.order, "knobs.");
    read(*k, "prune_tol", n.prune_tol, "knobs.");
    read(*k, "eps", n.eps, "knobs.");
    if (const json* f = member(*k, "fill")) {
      if (f->is_number()) {
        n.fill = f->get<double>();
      } else {
        const auto v = get_as<std::vector<double>>(*f, "knobs.fill");
        if (v.size() != 2) schema("knobs.fill", "expected a number or [re, im]");
        n.fill = cplx(v[0], v[1]);
      }
    }
    read(*k, "sc_grid", n.sc_grid, "knobs.");
    read(*k, "trace_min_cutoff", n.trace_min_cutoff, "knobs.");
    read(*k, "egorov_cutoff", n.egorov_cutoff, "knobs.");
    read(*k, "egorov_grid", n.egorov_grid, "knobs.");
  }
  for (int w : c.knobs.windows) if (w < 8) schema("knobs.windows", "window cutoffs must be >= 8");
  for (int w : c.knobs.index_windows) if (w < 8) schema("knobs.index_windows", "window cutoffs must be >= 8");
  if (c.knobs.windows.empty() || c.knobs.index_windows.empty()) schema("knobs", "window lists must be non-empty");
  if (c.knobs.order < 1 || c.knobs.order > 12) schema("knobs.order", "must lie in [1, 12]");
  if (!(c.knobs.eps > 0.0)) schema("knobs.eps", "must be positive");
  if (!(c.knobs.prune_tol >= 0.0)) schema("knobs.prune_tol", "must be >= 0");
  if (c.knobs.sc_grid < 8 || c.knobs.egorov_grid < 8) schema("knobs", "grids must have >= 8 nodes");
  if (c.knobs.egorov_cutoff < 8) schema("knobs.egorov_cutoff", "must be >= 8");

  if (const json* t = member(j, "tolerances")) {
    if (!t->is_object()) schema("tolerances", "expected an object");
    reject_unknown(*t, {"min_gap", "zero_tol", "drift", "decomposition", "independence", "chi_vanishing", "c0",
                        "negative_power", "fit_residual", "power_slope", "empty_fixed_trace",
                        "isometric_egorov", "egorov_slope_min", "egorov_slope_max"},
                   "tolerances.");
    Tolerances& o = c.tol;
    read(*t, "min_gap", o.min_gap, "tolerances.");
    read(*t, "zero_tol", o.zero_tol, "tolerances.");
    read(*t, "drift", o.drift, "tolerances.");
    read(*t, "decomposition", o.decomposition, "tolerances.");
    read(*t, "independence", o.independence, "tolerances.");
    read(*t, "chi_vanishing", o.chi_vanishing, "tolerances.");
    read(*t, "c0", o.c0, "tolerances.");
    read(*t, "negative_power", o.negative_power, "tolerances.");
    read(*t, "fit_residual", o.fit_residual, "tolerances.");
    read(*t, "power_slope", o.power_slope, "tolerances.");
    read(*t, "empty_fixed_trace", o.empty_fixed_trace, "tolerances.");
    read(*t, "isometric_egorov", o.isometric_egorov, "tolerances.");
    read(*t, "egorov_slope_min", o.egorov_slope_min, "tolerances.");
    read(*t, "egorov_slope_max", o.egorov_slope_max, "tolerances.");
  }

  read(j, "seed", c.seed, "");
  read(j, "output", c.output, "");
  if (c.symbols.is_object() && c.symbols.empty() && !c.random) {
    const bool needs = std::any_of(c.kinds.begin(), c.kinds.end(), [](const std::string& k) {
      return k != "egorov" && k != "trace_asymptotics";
    });
    if (needs) schema("symbols", "required by " + c.kinds.front());
  }
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line / column
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " +
                                           std::to_string(col) + ": " + e.what());
  }
  return parse_config(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_hash(const ExperimentConfig& c) {
  const std::string s = c.canonical().dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Setup

Setup Setup::build(const ExperimentConfig& c) {
  GroupActionPtr action = make_action(c.group, c.realization);
  const GroupSpec& G = action->group();
  const PeriodicGrid grid(c.grid_size);
  CrossedSymbol sigma(action, grid);
  if (c.random) {
    std::mt19937_64 rng(c.seed);
    const RandomSymbols& r = *c.random;
    for (const auto& g : random_support(G)) {
      if (G.is_identity(g)) {
        sigma.set(g, {PeriodicFunction::constant(grid, r.scale),
                      PeriodicFunction::mode(grid, r.winding).scaled(r.scale)});
      } else {
        sigma.set(g, random_principal(rng, grid, r));
      }
    }
  }
  if (c.symbols.is_string()) {
    sigma.set(G.identity(), PrincipalSymbol::constant(grid, 1.0));
  } else {
    for (const auto& [name, val] : c.symbols.items()) {
      sigma.set(G.parse(name), parse_principal(val, grid, "symbols." + name));
    }
  }
  std::vector<std::pair<GroupElement, SemiclassicalSymbol>> sc;
  const PeriodicGrid sc_grid(c.knobs.sc_grid);
  for (const auto& [name, val] : c.semiclassical.items()) {
    sc.emplace_back(G.parse(name), parse_semiclassical(val, sc_grid, "semiclassical." + name));
  }
  return {std::move(action), std::move(sigma), std::move(sc)};
}

LabeledOperator Setup::assemble(const FrequencyWindow& w) const {
  std::vector<std::pair<GroupElement, FullSymbol>> spec;
  for (const auto& [g, s] : sigma.terms()) spec.emplace_back(g, FullSymbol::from_principal(s, 0));
  return gindex::assemble(std::make_shared<const TransformCache>(action, w), spec);
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

OperatorFactory factory_of(const Setup& s) {
  return [&s](const FrequencyWindow& w) { return s.assemble(w); };
}

Outcome outcome_of(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::NoSpectralGap:
    case ErrorKind::NonStabilized:
    case ErrorKind::IllConditionedFit:
      return Outcome::undecided;
    default:
      return Outcome::fail;
  }
}

IndexOptions index_options(const ExperimentConfig& c) {
  IndexOptions o;
  o.zero_tol = c.tol.zero_tol;
  o.min_gap = c.tol.min_gap;
  return o;
}

LocalizedOptions localized_options(const ExperimentConfig& c, int order) {
  LocalizedOptions o;
  o.order = order;
  o.drift_tol = c.tol.drift;
  o.prune_tol = c.knobs.prune_tol;
  return o;
}

void ellipticity(const ExperimentConfig&, const Setup& s, ExperimentReport& r) {
  const EllipticityReport e = is_elliptic(s.sigma);
  r.payload = {{"verdict", to_string(e.verdict)},
               {"min_value", e.min_value},
               {"sheet", e.sheet},
               {"x", e.x}};
  r.outcome = e.verdict == Verdict::elliptic       ? Outcome::pass
              : e.verdict == Verdict::not_elliptic ? Outcome::fail
                                                   : Outcome::undecided;
  r.summary = std::string(to_string(e.verdict)) + ", margin " + num(e.min_value) + " (tol 1e-06)";
}

void index_experiment(const ExperimentConfig& c, const Setup& s, ExperimentReport& r) {
  const IndexReport rep = numerical_index(factory_of(s), c.knobs.index_windows, index_options(c));
  Table t{"index_windows.csv", {"cutoff", "index", "kernel_dim", "cokernel_dim", "sv_gap", "sv_max"}, {}};
  json windows = json::array();
  for (const auto& w : rep.stabilization) {
    t.rows.push_back({std::to_string(w.cutoff), std::to_string(w.index), std::to_string(w.kernel_dim),
                      std::to_string(w.cokernel_dim), fmt(w.sv_gap), fmt(w.sv_max)});
    windows.push_back({{"cutoff", w.cutoff}, {"index", w.index}, {"sv_gap", w.sv_gap}});
  }
  r.tables.push_back(std::move(t));
  r.payload = {{"index", rep.index},
               {"kernel_dim", rep.kernel_dim},
               {"cokernel_dim", rep.cokernel_dim},
               {"sv_gap", rep.sv_gap},
               {"sign_convention", kIndexSign},
               {"windows", windows}};
  r.outcome = Outcome::pass;
  r.summary = "index " + std::to_string(rep.index) + ", sv_gap " + num(rep.sv_gap) + " (min " +
              num(c.tol.min_gap) + ")";
  const GroupSpec& G = s.sigma.group();
  if (G.kind() == GroupKind::trivial && s.sigma.find(G.identity())) {
    const int oracle = winding_index_oracle(s.sigma);
    r.payload["winding_oracle"] = oracle;
    r.summary += ", winding oracle " + std::to_string(oracle);
    if (oracle != rep.index) r.outcome = Outcome::fail;
  }
}

json classes_json(const GroupSpec& G, const ConjugacyClass& cls) {
  json m = json::array();
  for (const auto& g : cls.members) m.push_back(G.name(g));
  return m;
}

void localized_experiment(const ExperimentConfig& c, const Setup& s, ExperimentReport& r) {
  const GroupSpec& G = s.sigma.group();
  const CrossedSymbol rho = invert_principal(s.sigma);
  const OperatorFactory fac = factory_of(s);
  const LocalizedIndexReport d = decomposition_check(fac, rho, c.knobs.windows, c.knobs.index_windows,
                                                     localized_options(c, c.knobs.order), index_options(c));
  std::vector<ConjugacyClass> classes;
  for (const auto& v : d.classes) classes.push_back(v.cls);

  double independence = 0.0;
  std::vector<LocalizedValue> lower;
  if (c.knobs.order > 1) {
    lower = localized_indices(fac, rho, c.knobs.windows, classes, localized_options(c, c.knobs.order - 1));
    for (size_t i = 0; i < lower.size(); ++i) {
      independence = std::max(independence, std::abs(lower[i].value - d.classes[i].value));
    }
  }

  Table t{"index_localized.csv", {"class", "cutoff", "re", "im"}, {}};
  json cls = json::array();
  bool chi_ok = true;
  double chi_max = 0.0;
  for (size_t i = 0; i < d.classes.size(); ++i) {
    const auto& v = d.classes[i];
    const std::string name = G.name(v.cls.representative());
    for (const auto& [w, val] : v.per_window) {
      t.rows.push_back({name, std::to_string(w), fmt(val.real()), fmt(val.imag())});
    }
    json e = {{"class", classes_json(G, v.cls)},
              {"value", cjson(v.value)},
              {"drift", v.drift},
              {"torsion", v.cls.torsion}};
    if (!lower.empty()) e["value_order_minus_1"] = cjson(lower[i].value);
    if (G.chi(v.cls.representative()) != 0) {
      e["chi"] = G.chi(v.cls.representative());
      chi_max = std::max(chi_max, std::abs(v.value));
      chi_ok = chi_ok && std::abs(v.value) < c.tol.chi_vanishing;
    }
    cls.push_back(std::move(e));
  }
  r.tables.push_back(std::move(t));
  r.payload = {{"classes", cls},
               {"sum", cjson(d.sum)},
               {"fredholm_index", d.fredholm_index},
               {"residual", d.residual},
               {"rounded_match", d.rounded_match},
               {"parametrix_order", c.knobs.order},
               {"independence", independence}};
  const bool decomposition_ok = d.residual < c.tol.decomposition && d.rounded_match;
  const bool independence_ok = independence < c.tol.independence;
  r.outcome = decomposition_ok && independence_ok && chi_ok ? Outcome::pass : Outcome::fail;
  r.summary = "|sum ind_g - index| = " + num(d.residual) + " (tol " + num(c.tol.decomposition) +
              "), N vs N-1 " + num(independence) + " (tol " + num(c.tol.independence) + ")";
  if (!G.is_finite()) {
    r.payload["chi_nonzero_max"] = chi_max;
    r.summary += ", max |ind_g| with chi(g) != 0 " + num(chi_max) + " (tol " + num(c.tol.chi_vanishing) + ")";
  }
}

void algebraic_experiment(const ExperimentConfig& c, const Setup& s, ExperimentReport& r) {
  const GroupSpec& G = s.sigma.group();
  std::vector<ConjugacyClass> classes;
  if (G.is_finite()) {
    classes = G.conjugacy_classes();
  } else {
    classes.push_back(G.conjugacy_class(G.identity()));
  }
  const BSymbol b{s.sigma, c.knobs.eps, c.knobs.fill};
  AlgebraicIndexOptions opt;
  opt.order = c.knobs.order;
  opt.grid_size = c.knobs.sc_grid;
  opt.negative_power_tol = c.tol.negative_power;
  const auto alg = algebraic_indices(b, classes, h_grid_of(c.knobs), opt);

  const CrossedSymbol rho = invert_principal(s.sigma);
  const auto analytic =
      localized_indices(factory_of(s), rho, c.knobs.windows, classes, localized_options(c, c.knobs.order));
  const IndexReport svd = numerical_index(factory_of(s), c.knobs.index_windows, index_options(c));

  json out = json::array();
  bool ok = true;
  double worst_c0 = 0.0, worst_neg = 0.0, worst_res = 0.0;
  cplx c0_total{};
  for (size_t i = 0; i < alg.size(); ++i) {
    const auto& a = alg[i];
    const std::string name = G.name(a.cls.representative());
    Table t{"series_algebraic_" + name + ".csv", {"h", "re", "im"}, {}};
    for (size_t k = 0; k < a.series.h.size(); ++k) {
      t.rows.push_back({fmt(a.series.h[k]), fmt(a.series.values[k].real()), fmt(a.series.values[k].imag())});
    }
    r.tables.push_back(std::move(t));
    json coeffs = json::array();
    for (const auto& z : a.fit.coeffs) coeffs.push_back(cjson(z));
    const double dc0 = std::abs(a.c0 - analytic[i].value);
    worst_c0 = std::max(worst_c0, dc0);
    worst_neg = std::max(worst_neg, a.negative_power);
    worst_res = std::max(worst_res, a.fit.residual);
    if (a.cls.torsion) c0_total += a.c0;
    ok = ok && dc0 < c.tol.c0 && !a.negative_power_violation && a.fit.residual < c.tol.fit_residual;
    out.push_back({{"class", classes_json(G, a.cls)},
                   {"torsion", a.cls.torsion},
                   {"fit",
                    {{"j_min", a.fit.j_min},
                     {"j_max", a.fit.j_max},
                     {"coeffs", coeffs},
                     {"residual", a.fit.residual},
                     {"condition", a.fit.condition}}},
                   {"c_minus1", cjson(a.c_minus1)},
                   {"c0", cjson(a.c0)},
                   {"negative_power", a.negative_power},
                   {"analytic_ind", cjson(analytic[i].value)},
                   {"c0_minus_analytic", dc0}});
  }
  const bool total_ok = std::lround(c0_total.real()) == svd.index;
  r.payload = {{"eps", c.knobs.eps},
               {"order", c.knobs.order},
               {"classes", out},
               {"c0_torsion_total", cjson(c0_total)},
               {"fredholm_index", svd.index}};
  r.outcome = ok && total_ok ? Outcome::pass : Outcome::fail;
  r.summary = "max |c0 - ind_g| " + num(worst_c0) + " (tol " + num(c.tol.c0) + "), |c_-1| scale " +
              num(worst_neg) + " (tol " + num(c.tol.negative_power) + "), fit residual " + num(worst_res) +
              " (tol " + num(c.tol.fit_residual) + "), c0 total " + num(c0_total.real()) + " vs index " +
              std::to_string(svd.index);
}

const SemiclassicalSymbol& symbol_at_identity(const Setup& s) {
  const GroupSpec& G = s.action->group();
  for (const auto& [g, a] : s.sc) {
    if (G.is_identity(g)) return a;
  }
  throw Error(ErrorKind::SchemaError, "field 'semiclassical.e': egorov needs a symbol at e");
}

void egorov_experiment(const ExperimentConfig& c, const Setup& s, ExperimentReport& r) {
  const GroupSpec& G = s.action->group();
  const SemiclassicalSymbol& a = symbol_at_identity(s);
  json out = json::array();
  Outcome o = Outcome::pass;
  std::string summary;
  for (const auto& g : target_elements(c, G)) {
    const EgorovReport e = egorov_defect(s.action, g, a, h_grid_of(c.knobs), c.knobs.egorov_cutoff,
                                         c.knobs.egorov_grid);
    const std::string name = G.name(g);
    Table t{"series_egorov_" + name + ".csv", {"h", "defect"}, {}};
    for (size_t k = 0; k < e.h.size(); ++k) t.rows.push_back({fmt(e.h[k]), fmt(e.defect[k])});
    r.tables.push_back(std::move(t));
    const bool isometric = s.action->transform(g).is_isometric();
    const double max_defect = *std::max_element(e.defect.begin(), e.defect.end());
    bool ok;
    if (isometric) {
      ok = max_defect < c.tol.isometric_egorov;
      summary += name + ": max defect " + num(max_defect) + " (tol " + num(c.tol.isometric_egorov) + "); ";
    } else {
      ok = e.slope >= c.tol.egorov_slope_min && e.slope <= c.tol.egorov_slope_max;
      summary += name + ": slope " + num(e.slope) + " (range [" + num(c.tol.egorov_slope_min) + ", " +
                 num(c.tol.egorov_slope_max) + "]); ";
    }
    if (!ok) o = Outcome::fail;
    out.push_back({{"element", name},
                   {"isometric", isometric},
                   {"slope", e.slope},
                   {"max_defect", max_defect},
                   {"truncation_defect", e.truncation_defect}});
  }
  if (!summary.empty()) summary.resize(summary.size() - 2);
  r.payload = {{"elements", out}, {"cutoff", c.knobs.egorov_cutoff}};
  r.outcome = o;
  r.summary = summary;
}

void trace_experiment(const ExperimentConfig& c, const Setup& s, ExperimentReport& r) {
  const GroupSpec& G = s.action->group();
  if (s.sc.empty()) throw Error(ErrorKind::SchemaError, "field 'semiclassical': no symbols to trace");
  json out = json::array();
  Outcome o = Outcome::pass;
  std::string summary;
  for (const auto& [g, a] : s.sc) {
    const PowerLaw p = trace_power_law(s.action, g, a, h_grid_of(c.knobs), c.knobs.sc_grid,
                                       c.knobs.trace_min_cutoff, c.tol.power_slope);
    const std::string name = G.name(g);
    Table t{"series_trace_" + name + ".csv", {"h", "re", "im"}, {}};
    json values = json::array();
    for (size_t k = 0; k < p.h.size(); ++k) {
      t.rows.push_back({fmt(p.h[k]), fmt(p.values[k].real()), fmt(p.values[k].imag())});
    }
    r.tables.push_back(std::move(t));
    const bool empty_fixed = std::isnan(p.expected);
    bool pass = p.pass;
    if (empty_fixed) {
      double worst_small = 0.0;
      for (size_t k = 0; k < p.h.size(); ++k) {
        if (p.h[k] <= 0.05 + 1e-12) worst_small = std::max(worst_small, std::abs(p.values[k]));
      }
      pass = worst_small < c.tol.empty_fixed_trace;
      summary += name + ": max |trace| at h <= 0.05 " + num(worst_small) + " (tol " +
                 num(c.tol.empty_fixed_trace) + "); ";
    } else {
      summary += name + ": slope " + num(p.slope) + " expected " + num(p.expected) + " +- " +
                 num(c.tol.power_slope) + "; ";
    }
    if (!pass) o = Outcome::fail;
    out.push_back({{"element", name},
                   {"slope", p.slope},
                   {"expected", empty_fixed ? json(nullptr) : json(p.expected)},
                   {"max_abs", p.max_abs},
                   {"pass", pass}});
  }
  if (!summary.empty()) summary.resize(summary.size() - 2);
  r.payload = {{"elements", out}};
  r.outcome = o;
  r.summary = summary;
}

std::vector<std::string> expand(const std::vector<std::string>& kinds, const GroupAction& action) {
  std::vector<std::string> out;
  for (const auto& k : kinds) {
    if (k == "full_pipeline") {
      out.insert(out.end(), {"ellipticity", "index", "localized"});
      if (action.is_isometric()) out.push_back("algebraic");
    } else {
      out.push_back(k);
    }
  }
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& c, const Setup& s, const std::string& kind) {
  ExperimentReport r;
  r.kind = kind;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (kind == "ellipticity") {
      ellipticity(c, s, r);
    } else if (kind == "index") {
      index_experiment(c, s, r);
    } else if (kind == "localized") {
      localized_experiment(c, s, r);
    } else if (kind == "algebraic") {
      algebraic_experiment(c, s, r);
    } else if (kind == "egorov") {
      egorov_experiment(c, s, r);
    } else if (kind == "trace_asymptotics") {
      trace_experiment(c, s, r);
    } else {
      throw Error(ErrorKind::SchemaError, "unknown experiment '" + kind + "'");
    }
  } catch (const Error& e) {
    r.outcome = outcome_of(e);
    r.summary = e.what();
    r.payload = {{"error", to_string(e.kind())}, {"detail", e.detail()}};
    r.tables.clear();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

RunRecord run(const ExperimentConfig& c, int threads) {
  RunRecord rec;
  rec.config_hash = config_hash(c);
  rec.version = version();
  const Setup s = Setup::build(c);
  const auto kinds = expand(c.kinds, *s.action);
  rec.experiments.resize(kinds.size());
  if (threads <= 1) {
    for (size_t i = 0; i < kinds.size(); ++i) rec.experiments[i] = run_experiment(c, s, kinds[i]);
    return rec;
  }
  for (size_t start = 0; start < kinds.size(); start += static_cast<size_t>(threads)) {
    std::vector<std::future<ExperimentReport>> batch;
    const size_t end = std::min(kinds.size(), start + static_cast<size_t>(threads));
    for (size_t i = start; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, [&, i] { return run_experiment(c, s, kinds[i]); }));
    }
    for (size_t i = start; i < end; ++i) rec.experiments[i] = batch[i - start].get();
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + p.string());
}

std::string csv(const Table& t) {
  std::string s;
  for (size_t i = 0; i < t.header.size(); ++i) s += (i ? "," : "") + t.header[i];
  s += '\n';
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i];
    s += '\n';
  }
  return s;
}

}  // namespace

void emit_reports(const RunRecord& record, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());

  const json meta = {{"config_hash", record.config_hash},
                     {"version", record.version},
                     {"sign_convention", kIndexSign}};
  write_file(dir / "meta.json", meta.dump(2) + "\n");
  if (record.experiments.empty()) return;

  json exps = json::array();
  json timings = json::object();
  std::set<std::string> files;
  for (const auto& e : record.experiments) {
    json tables = json::array();
    for (const auto& t : e.tables) {
      if (!files.insert(t.file).second) continue;  // repeated experiment kinds
      write_file(dir / t.file, csv(t));
      tables.push_back(t.file);
    }
    exps.push_back({{"kind", e.kind},
                    {"verdict", to_string(e.outcome)},
                    {"summary", e.summary},
                    {"payload", e.payload},
                    {"tables", tables}});
    timings[e.kind] = e.seconds;
  }
  const json report = {{"config_hash", record.config_hash},
                       {"version", record.version},
                       {"verdict", to_string(record.outcome())},
                       {"experiments", exps}};
  write_file(dir / "report.json", report.dump(2) + "\n");
  write_file(dir / "timings.json", timings.dump(2) + "\n");
}

RunRecord calibrate_sign(const std::vector<int>& windows) {
  RunRecord rec;
  rec.version = version();
  rec.config_hash = "calibration";
  ExperimentReport r;
  r.kind = "calibrate_sign";
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const GroupActionPtr action = make_action({GroupKind::trivial}, {});
    const PeriodicGrid grid(64);
    Table t{"index_calibration.csv", {"w", "index", "winding_oracle", "sv_gap"}, {}};
    std::set<int> signs;
    bool oracle_ok = true;
    for (int w = -3; w <= 3; ++w) {
      const PrincipalSymbol s{PeriodicFunction::constant(grid, 1.0), PeriodicFunction::mode(grid, w)};
      const std::vector<std::pair<GroupElement, FullSymbol>> spec{{GroupElement{}, FullSymbol::from_principal(s)}};
      const OperatorFactory fac = [&](const FrequencyWindow& win) {
        return assemble(std::make_shared<const TransformCache>(action, win), spec);
      };
      const IndexReport rep = numerical_index(fac, windows);
      const int oracle = winding_index_oracle(CrossedSymbol::delta(action, {}, s));
      oracle_ok = oracle_ok && oracle == rep.index;
      // wind(minus) - wind(plus) = w
      if (w != 0) signs.insert(rep.index / w);
      t.rows.push_back({std::to_string(w), std::to_string(rep.index), std::to_string(oracle), fmt(rep.sv_gap)});
    }
    r.tables.push_back(std::move(t));
    const int sign = signs.size() == 1 ? *signs.begin() : 0;
    r.payload = {{"sign", sign},
                 {"formula", "index = sign * (wind(minus) - wind(plus))"},
                 {"windows", windows}};
    r.outcome = sign == kIndexSign && oracle_ok ? Outcome::pass : Outcome::fail;
    r.summary = "measured sign " + std::to_string(sign) + ", built-in " + std::to_string(kIndexSign);
  } catch (const Error& e) {
    r.outcome = outcome_of(e);
    r.summary = e.what();
    r.payload = {{"error", to_string(e.kind())}, {"detail", e.detail()}};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rec.experiments.push_back(std::move(r));
  return rec;
}

}  // namespace gindex::lab
