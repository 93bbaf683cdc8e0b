#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gindex/error.hpp"
#include "gindex/lab.hpp"

using namespace gindex;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"group": "trivial", "symbol": "unit", "kind": "index"})";

ErrorKind parse_error_kind(const std::string& text, std::string* what = nullptr) {
  try {
    lab::parse_config_text(text);
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.kind();
  }
  FAIL("config accepted");
  return ErrorKind::InvalidParameter;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gindex_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config hash tracks semantic fields only") {
  const auto a = lab::parse_config_text(kMinimal);
  const auto b = lab::parse_config_text(R"({"kind": "index", "symbol": "unit", "group": "trivial", "output": "x"})");
  CHECK(lab::config_hash(a) == lab::config_hash(b));
  CHECK(lab::config_hash(a).size() == 16);
  const auto c = lab::parse_config_text(R"({"group": "trivial", "symbol": "unit", "kind": "index", "seed": 2})");
  CHECK(lab::config_hash(a) != lab::config_hash(c));
  const auto d = lab::parse_config_text(
      R"({"group": "trivial", "symbol": "unit", "kind": "index", "tolerances": {"min_gap": 10}})");
  CHECK(lab::config_hash(a) != lab::config_hash(d));
}

TEST_CASE("schema and parse errors") {
  std::string what;
  CHECK(parse_error_kind(R"({"group": "trivial", "symbols": {"q": "unit"}, "kind": "index"})", &what) ==
        ErrorKind::SchemaError);
  CHECK(parse_error_kind(R"({"group": "trivial", "symbol": "unit", "kind": "index", "colour": 1})", &what) ==
        ErrorKind::SchemaError);
  CHECK(what.find("colour") != std::string::npos);
  CHECK(parse_error_kind(R"({"group": "trivial", "symbol": "unit", "kind": "nonsense"})") == ErrorKind::SchemaError);
  CHECK(parse_error_kind("{\"group\": \"trivial\",\n  \"kind\": }", &what) == ErrorKind::ParseError);
  CHECK(what.find("line 2") != std::string::npos);
}

TEST_CASE("exit codes follow the worst verdict") {
  using lab::Outcome;
  CHECK(lab::exit_code(Outcome::pass) == 0);
  CHECK(lab::exit_code(Outcome::fail) == 1);
  CHECK(lab::exit_code(Outcome::undecided) == 2);
  CHECK(lab::worst(Outcome::pass, Outcome::undecided) == Outcome::undecided);
  CHECK(lab::worst(Outcome::fail, Outcome::undecided) == Outcome::fail);
}

TEST_CASE("an empty record writes meta.json only") {
  const fs::path dir = scratch("empty");
  lab::RunRecord rec;
  rec.config_hash = "0000000000000000";
  rec.version = lab::version();
  lab::emit_reports(rec, dir);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path().filename().string());
  CHECK(files == std::vector<std::string>{"meta.json"});
  fs::remove_all(dir);
}

TEST_CASE("minimal run: index of the identity, one CSV row per window") {
  const auto cfg = lab::parse_config_text(kMinimal);
  const auto rec = lab::run(cfg);
  REQUIRE(rec.experiments.size() == 1);
  const auto& e = rec.experiments.front();
  CHECK(e.outcome == lab::Outcome::pass);
  CHECK(e.payload.at("index").get<int>() == 0);
  const fs::path dir = scratch("minimal");
  lab::emit_reports(rec, dir);
  std::ifstream csv(dir / "index_windows.csv");
  int lines = 0;
  for (std::string s; std::getline(csv, s);) ++lines;
  CHECK(lines == 1 + static_cast<int>(cfg.knobs.index_windows.size()));
  CHECK(fs::exists(dir / "report.json"));
  fs::remove_all(dir);
}

TEST_CASE("seeded random samples are reproducible") {
  const char* text = R"({"group": {"kind": "dihedral", "m": 3}, "realization": "rotation",
                         "random_symbols": {"modes": 2}, "seed": 5, "kind": "ellipticity"})";
  const auto a = lab::Setup::build(lab::parse_config_text(text));
  const auto b = lab::Setup::build(lab::parse_config_text(text));
  CHECK(a.sigma.distance(b.sigma) == 0.0);
  CHECK(a.sigma.support().size() > 1);
}
