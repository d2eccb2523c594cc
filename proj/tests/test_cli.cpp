#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "anonsim/core.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = anonsim::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("anonsim_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Line graph a-b-c plus a long way round a-d-e-c.
void write_ripple_fixture(const fs::path& dir) {
  spit(dir / "graph.csv",
       "time,src,dst,capacity\n"
       "0,a,b,100\n0,b,c,100\n0,a,d,100\n0,d,e,100\n0,e,c,100\n");
  spit(dir / "payments.csv",
       "time,sender,receiver,value,currency\n"
       "1000,a,c,10,USD\n"
       "2000,d,c,5,USD\n"
       "3000,b,b,5,USD\n"
       "4000,a,c,95,USD\n"
       "5000,a,c,1,EUR\n");
}

void ingest_and_route(const fs::path& dir) {
  const auto work = (dir / "work").string();
  REQUIRE(run_cli({"ripple", "ingest", "--payments", (dir / "payments.csv").string(), "--graph",
                   (dir / "graph.csv").string(), "--out-dir", work, "--window-start", "500"})
              .code == 0);
  REQUIRE(run_cli({"ripple", "route", "--work-dir", work}).code == 0);
}

}  // namespace

TEST_CASE("generate is deterministic and writes a manifest") {
  const auto dir = scratch("gen");
  const std::vector<std::string> base{"generate", "--users", "100", "--lambda", "10", "--horizon", "1000", "--seed", "7"};
  auto a = base;
  a.insert(a.end(), {"--out", (dir / "a.csv").string()});
  auto b = base;
  b.insert(b.end(), {"--out", (dir / "b.csv").string()});
  REQUIRE(run_cli(a).code == 0);
  REQUIRE(run_cli(b).code == 0);
  const auto text = slurp(dir / "a.csv");
  CHECK(text == slurp(dir / "b.csv"));
  std::istringstream in(text);
  const auto payments = anonsim::read_payments_csv(in);
  REQUIRE(!payments.empty());
  for (const auto& p : payments) {
    CHECK(p.time >= 500);
    CHECK(p.time < 1000);
  }
  const auto m = nlohmann::json::parse(slurp(dir / "a.csv.manifest.json"));
  CHECK(m["seed"] == 7);
  CHECK(m["outputs"][0]["path"] == "a.csv");
}

TEST_CASE("default horizon covers at least 200 epochs of 10 ticks") {
  const auto dir = scratch("horizon");
  REQUIRE(run_cli({"generate", "--users", "50", "--lambda", "10", "--out", (dir / "p.csv").string()}).code == 0);
  std::ifstream in(dir / "p.csv");
  const auto payments = anonsim::read_payments_csv(in);
  REQUIRE(!payments.empty());
  CHECK(payments.back().time - payments.front().time + 1 >= 1990);
  CHECK((payments.back().time - 500) / 10 + 1 >= 200);
}

TEST_CASE("usage errors exit 2") {
  const auto dir = scratch("usage");
  CHECK(run_cli({"generate", "--users", "0", "--lambda", "10", "--out", (dir / "p.csv").string()}).code == 2);
  CHECK(run_cli({"generate", "--users", "5", "--lambda", "10", "--horizon", "10", "--out",
                 (dir / "p.csv").string()})
            .code == 2);
  CHECK(run_cli({"epoch-anon", "--users", "10", "--lambda", "10", "--epoch-ticks", "10", "--strategy", "bogus",
                 "--out-dir", dir.string()})
            .code == 2);
  CHECK(run_cli({"epoch-anon", "--users", "10", "--lambda", "10", "--out-dir", dir.string()}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({"ripple", "sweep", "--work-dir", dir.string(), "--hop-ticks", "2,3"}).code == 2);
}

TEST_CASE("empty input gives an empty report") {
  const auto dir = scratch("empty");
  spit(dir / "p.csv", "id,time,sender,receiver,value\n");
  const auto r = run_cli({"epoch-anon", "--in", (dir / "p.csv").string(), "--epoch-ticks", "10", "--out-dir",
                          (dir / "out").string()});
  CHECK(r.code == 0);
  CHECK(slurp(dir / "out" / "summary.csv").find('\n') == slurp(dir / "out" / "summary.csv").size() - 1);
  const auto j = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(j["rows"].empty());
}

TEST_CASE("malformed input exits 3") {
  const auto dir = scratch("bad");
  spit(dir / "p.csv", "id,time,sender,receiver,value\n0,0,1,2,x\n");
  const auto r = run_cli({"epoch-anon", "--in", (dir / "p.csv").string(), "--epoch-ticks", "10", "--out-dir",
                          (dir / "out").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("line 2") != std::string::npos);
  CHECK(run_cli({"epoch-anon", "--in", (dir / "missing.csv").string(), "--epoch-ticks", "10", "--out-dir",
                 (dir / "out").string()})
            .code == 3);
}

TEST_CASE("epoch-anon on a file reports sets and records") {
  const auto dir = scratch("epochfile");
  spit(dir / "p.csv",
       "id,time,sender,receiver,value\n"
       "0,0,1,2,10\n1,1,2,3,10\n2,2,3,1,99\n3,10,1,2,5\n");
  const auto r = run_cli({"epoch-anon", "--in", (dir / "p.csv").string(), "--epoch-ticks", "10", "--strategy",
                          "none,scaled-exp", "--records", "--pay-more", "--wait-cap", "20", "--format", "json",
                          "--out-dir", (dir / "out").string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["rows"].size() == 3);
  CHECK(fs::exists(dir / "out" / "records.csv"));
  CHECK(fs::exists(dir / "out" / "paymore.json"));
  const auto w = nlohmann::json::parse(slurp(dir / "out" / "wait.json"));
  CHECK(w["configs"][0]["payments"] == 4);
}

TEST_CASE("ripple stages") {
  const auto dir = scratch("ripple");
  write_ripple_fixture(dir);
  const auto work = dir / "work";

  SUBCASE("route before ingest names the stage") {
    const auto r = run_cli({"ripple", "route", "--work-dir", (dir / "nowhere").string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("ingest") != std::string::npos);
  }
  SUBCASE("anon before route names the stage") {
    REQUIRE(run_cli({"ripple", "ingest", "--payments", (dir / "payments.csv").string(), "--graph",
                     (dir / "graph.csv").string(), "--out-dir", work.string(), "--window-start", "500"})
                .code == 0);
    const auto r = run_cli({"ripple", "anon", "--work-dir", work.string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("route") != std::string::npos);
  }
  SUBCASE("full pipeline") {
    ingest_and_route(dir);
    const auto ing = nlohmann::json::parse(slurp(work / "ingest.json"));
    CHECK(ing["kept"] == 3);
    CHECK(ing["dropped_self"] == 1);
    CHECK(ing["dropped_currency"] == 1);
    // ids: a=0 b=1 c=2 d=3 e=4; the second a->c payment no longer fits a-b-c.
    CHECK(slurp(work / "routes.csv") ==
          "payment_id,path\n"
          "0,0|1|2\n"
          "1,3|4|2\n"
          "2,0|3|4|2\n");
    const auto rs = nlohmann::json::parse(slurp(work / "routing.json"));
    CHECK(rs["succeeded"] == 3);

    REQUIRE(run_cli({"ripple", "anon", "--work-dir", work.string(), "--hop-ticks", "4", "--out-dir",
                     (dir / "plain").string()})
                .code == 0);
    REQUIRE(run_cli({"ripple", "anon", "--work-dir", work.string(), "--hop-ticks", "4", "--allow-loops",
                     "--out-dir", (dir / "loops").string()})
                .code == 0);
    std::istringstream plain(slurp(dir / "plain" / "path_records.csv"));
    std::istringstream loops(slurp(dir / "loops" / "path_records.csv"));
    std::string a;
    std::string b;
    std::getline(plain, a);
    std::getline(loops, b);
    while (std::getline(plain, a) && std::getline(loops, b)) {
      auto field = [](const std::string& line, int k) {
        std::istringstream ss(line);
        std::string f;
        for (int i = 0; i <= k; ++i) std::getline(ss, f, ',');
        return std::stoll(f);
      };
      CHECK(field(b, 2) >= field(a, 2));
    }

    REQUIRE(run_cli({"ripple", "cover", "--work-dir", work.string(), "--hop-ticks", "1,4"}).code == 0);
    const auto cover = nlohmann::json::parse(slurp(work / "cover.json"));
    CHECK(cover["results"].size() == 4);

    REQUIRE(run_cli({"ripple", "sweep", "--work-dir", work.string(), "--hop-ticks", "1,2,4,8"}).code == 0);
    const auto sweep = nlohmann::json::parse(slurp(work / "sweep.json"));
    REQUIRE(sweep["hop_times"].size() == 4);
    double last = 0;
    for (const auto& p : sweep["hop_times"]) {
      const double med = p["metrics"]["path-max"]["q50"];
      CHECK(med >= last);
      last = med;
    }
  }
}

TEST_CASE("rerun reproduces outputs and detects changed inputs") {
  const auto dir = scratch("rerun");
  REQUIRE(run_cli({"epoch-anon", "--users", "200", "--lambda", "10", "--reps", "2", "--epochs", "5",
                   "--epoch-ticks", "5,10", "--strategy", "scaled-cheap", "--pay-more", "--wait-cap", "50",
                   "--wait-payments", "1000", "--out-dir", (dir / "first").string()})
              .code == 0);
  const auto r = run_cli({"rerun", (dir / "first" / "manifest.epoch-anon.json").string(), "--out-dir",
                          (dir / "second").string()});
  CHECK(r.code == 0);
  for (const char* f : {"summary.csv", "summary.json", "table.csv", "boxplot.csv", "paymore.json", "wait.json"}) {
    CHECK(slurp(dir / "first" / f) == slurp(dir / "second" / f));
  }

  write_ripple_fixture(dir);
  ingest_and_route(dir);
  CHECK(run_cli({"rerun", (dir / "work" / "manifest.route.json").string(), "--out-dir", (dir / "r2").string()})
            .code == 0);
  CHECK(slurp(dir / "work" / "routes.csv") == slurp(dir / "r2" / "routes.csv"));
  spit(dir / "work" / "payments.csv", "id,time,sender,receiver,value\n");
  const auto bad =
      run_cli({"rerun", (dir / "work" / "manifest.route.json").string(), "--out-dir", (dir / "r3").string()});
  CHECK(bad.code == 3);
  CHECK(bad.err.find("payments.csv") != std::string::npos);
}

TEST_CASE("ANONSIM_OUT_DIR overrides the output location") {
  const auto dir = scratch("env");
  ::setenv("ANONSIM_OUT_DIR", (dir / "env").string().c_str(), 1);
  const auto r = run_cli({"generate", "--users", "20", "--lambda", "10", "--horizon", "600", "--out",
                          (dir / "flag" / "p.csv").string()});
  ::unsetenv("ANONSIM_OUT_DIR");
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "env" / "p.csv"));
  CHECK(fs::exists(dir / "env" / "p.csv.manifest.json"));
  CHECK(!fs::exists(dir / "flag" / "p.csv"));
}
