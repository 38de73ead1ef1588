#include <doctest.h>

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <sstream>

#include "rabm/cli.hpp"
#include "rabm/config.hpp"
#include "rabm/error.hpp"
#include "rabm/io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace rabm;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() / ("rabm_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const char* kSmallConfig = R"(sites = generate
horizon_weeks = 30
seed = 5
mobility_exponent = 0.5
customers_per_agent = 50
unorganized.discount = M
unorganized.quality = H
unorganized.assortment = L
unorganized.service = H
organized.discount = H
organized.quality = H
organized.assortment = H
organized.service = M
epharm.discount = H
epharm.quality = H
epharm.assortment = H
epharm.service = L
town.households = 600
town.unorganized = 12
town.organized = 2
town.epharm = 1
town.extent_km = 3
)";

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("key-value parsing") {
  std::istringstream ok("# comment\n a = 1 \n\nb=two # trailing\n");
  const auto kv = parse_key_values(ok, "ok");
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("b") == "two");
  std::istringstream dup("a = 1\na = 2\n");
  CHECK_THROWS_WITH_AS(parse_key_values(dup, "dup.cfg"), doctest::Contains("dup.cfg:2"), ParseError);
  std::istringstream bare("a = 1\nnonsense\n");
  CHECK_THROWS_AS(parse_key_values(bare, "bare"), ParseError);
}

TEST_CASE("config validation") {
  TempDir tmp;
  const auto good = write_file(tmp.path / "good.cfg", kSmallConfig);
  const auto setup = load_setup(good);
  CHECK(setup.scenario.horizon_weeks == 30);
  CHECK(setup.town.households == 600);
  CHECK(setup.scenario.attributes[0].discount == Level::L2);

  std::string missing = kSmallConfig;
  missing.erase(missing.find("seed = 5\n"), 9);
  CHECK_THROWS_WITH(load_setup(write_file(tmp.path / "missing.cfg", missing)), doctest::Contains("seed"));

  CHECK_THROWS_WITH(load_setup(write_file(tmp.path / "unknown.cfg", std::string(kSmallConfig) + "colour = red\n")),
                    doctest::Contains("colour"));
  CHECK_THROWS(load_setup(write_file(tmp.path / "bad.cfg", std::string(kSmallConfig) + "round_trip = maybe\n")));

  const auto over = load_setup(good, KeyValues{{"horizon_weeks", "7"}});
  CHECK(over.scenario.horizon_weeks == 7);

  for (const auto& key : required_keys()) CHECK(setup.resolved.count(key) == 1);
}

TEST_CASE("bundled base config resolves") {
  const auto setup = load_setup(test::data_dir() / "base.cfg");
  CHECK(setup.town.households == 20000);
  CHECK(setup.town.unorganized == 159);
  CHECK(setup.scenario.horizon_weeks == 312);
}

TEST_CASE("gen-town") {
  TempDir tmp;
  const auto a = tmp.path / "a.csv", b = tmp.path / "b.csv";
  REQUIRE(cli({"gen-town", "--seed", "3", "--out", a.string()}).code == 0);
  REQUIRE(cli({"gen-town", "--seed", "3", "--out", b.string()}).code == 0);
  CHECK(line_count(a) == 20171);
  CHECK(read_text_file(a) == read_text_file(b));
  CHECK(cli({"gen-town", "--households", "-4", "--out", (tmp.path / "c.csv").string()}).code != 0);
  CHECK_FALSE(fs::exists(tmp.path / "c.csv"));
}

TEST_CASE("simulate writes the run directory") {
  TempDir tmp;
  const auto cfg = write_file(tmp.path / "small.cfg", kSmallConfig);
  const auto out = tmp.path / "run";
  const auto r = cli({"simulate", "--config", cfg.string(), "--out-dir", out.string(), "--horizon", "1"});
  REQUIRE(r.code == 0);
  CHECK(line_count(out / "weekly.csv") == 2);
  CHECK(fs::exists(out / "summary.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK_FALSE(fs::exists(tmp.path / "run.partial"));

  const auto again = tmp.path / "again";
  REQUIRE(cli({"simulate", "--config", cfg.string(), "--out-dir", again.string(), "--horizon", "1"}).code == 0);
  for (const char* f : {"weekly.csv", "summary.csv", "manifest.json"})
    CHECK(read_text_file(out / f) == read_text_file(again / f));
}

TEST_CASE("failed runs leave no partial output") {
  TempDir tmp;
  std::string broken = kSmallConfig;
  broken += "partworths_dir = nowhere\n";
  const auto cfg = write_file(tmp.path / "broken.cfg", broken);
  const auto out = tmp.path / "run";
  const auto r = cli({"simulate", "--config", cfg.string(), "--out-dir", out.string()});
  CHECK(r.code == 1);
  CHECK_FALSE(r.err.empty());
  CHECK_FALSE(fs::exists(out));
  CHECK_FALSE(fs::exists(tmp.path / "run.partial"));
}

TEST_CASE("anova command") {
  TempDir tmp;
  const auto d1 = test::data_dir() / "table_d1.csv";
  const auto r = cli({"anova", "--response", d1.string(), "--column", "shutdowns", "--factors", "discount"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("unorganized_discount") != std::string::npos);

  std::string column = "y\n";
  for (int i = 0; i < 26; ++i) column += "1\n";
  const auto short_file = write_file(tmp.path / "short.csv", column);
  CHECK(cli({"anova", "--response", short_file.string()}).code == 1);

  const auto flat = write_file(tmp.path / "flat.csv", column + "1\n");
  const auto f = cli({"anova", "--response", flat.string()});
  CHECK(f.code == 0);
}

TEST_CASE("argument errors exit with 2") {
  CHECK(cli({"sweep", "--config", (test::data_dir() / "base.cfg").string(), "--out-dir", "x", "--mode", "price"}).code == 2);
  CHECK(cli({"no-such-command"}).code == 2);
  CHECK(cli({}).code == 2);
}

TEST_CASE("conjoint commands") {
  TempDir tmp;
  const auto design = tmp.path / "design.csv", data = tmp.path / "data.csv", fit = tmp.path / "fit.csv";
  REQUIRE(cli({"conjoint", "design", "--seed", "42", "--out", design.string()}).code == 0);
  CHECK(line_count(design) == 65);
  REQUIRE(cli({"conjoint", "simulate", "--design", design.string(), "--respondents", "40", "--seed", "1", "--out",
               data.string()})
              .code == 0);
  CHECK(line_count(data) == 1 + 40 * 64);
  REQUIRE(cli({"conjoint", "fit", "--data", data.string(), "--out", fit.string()}).code == 0);
  CHECK(line_count(fit) == 16);
  const auto n = cli({"conjoint", "sample-size", "--levels", "3", "--alternatives", "4", "--tasks", "4"});
  CHECK(n.code == 0);
  CHECK(n.out.find("94") != std::string::npos);
}
