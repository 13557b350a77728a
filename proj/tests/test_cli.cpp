#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "stepbunch/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("stepbunch_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path file(const std::string& name, const std::string& body) const {
    const auto p = dir / name;
    std::ofstream(p, std::ios::binary) << body;
    return p;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = stepbunch::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("cli minimize happy path") {
  Scratch s;
  const auto cfg = s.file("cfg.json", R"({"model":{"A":1,"epsilon":0.01,"m":0,"n":2},"grid":{"N":256},"init":"uniform"})");
  const std::string before = slurp(cfg);
  const auto r = call({"minimize", "--config", cfg.string(), "--out", (s.dir / "out").string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(s.dir / "out" / "profile.csv"));
  CHECK(fs::exists(s.dir / "out" / "result.json"));
  CHECK(slurp(cfg) == before);

  const auto summary = nlohmann::json::parse(r.out);
  CHECK(summary["status"] == "ok");
  CHECK(r.out.find('\n') == r.out.size() - 1);

  const auto report = nlohmann::json::parse(slurp(s.dir / "out" / "result.json"));
  CHECK(report["config"]["model"]["epsilon"].get<double>() == 0.01);
  CHECK(report["config"]["grid"]["N"].get<int>() == 256);
  CHECK(report["hash"] == summary["hash"]);
  CHECK(report["results"].contains("el_residual"));
  CHECK(report["results"].contains("R0"));
  CHECK(report["results"]["energy"].contains("total"));
}

TEST_CASE("cli validation and usage errors") {
  Scratch s;
  SUBCASE("m out of range") {
    const auto cfg = s.file("bad.json", R"({"model":{"A":1,"epsilon":0.01,"m":1.5,"n":2}})");
    const auto r = call({"minimize", "--config", cfg.string(), "--out", s.dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("-1 < m < 1 < n") != std::string::npos);
  }
  SUBCASE("unknown command") {
    const auto r = call({"frobnicate"});
    CHECK(r.code == 64);
    CHECK(r.err.find("usage") != std::string::npos);
  }
  SUBCASE("no command") { CHECK(call({}).code == 64); }
  SUBCASE("malformed json") {
    const auto cfg = s.file("mal.json", "{\n  \"model\": {\n    \"A\": 1,,\n  }\n}\n");
    const auto r = call({"minimize", "--config", cfg.string(), "--out", s.dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
    CHECK(r.err.find("column") != std::string::npos);
  }
  SUBCASE("both model and physical") {
    const auto cfg = s.file("two.json", R"({"model":{"epsilon":0.01,"m":0,"n":2},"physical":{"alpha1":1,"alpha2":1,"a":0.1,"m":0,"n":2}})");
    CHECK(call({"minimize", "--config", cfg.string(), "--out", s.dir.string()}).code == 2);
  }
  SUBCASE("grid not a power of two") {
    const auto cfg = s.file("grid.json", R"({"model":{"epsilon":0.01,"m":0,"n":2},"grid":{"N":1000}})");
    CHECK(call({"minimize", "--config", cfg.string(), "--out", s.dir.string()}).code == 2);
  }
  SUBCASE("missing config flag") { CHECK(call({"minimize"}).code == 2); }
}

TEST_CASE("cli scaling rerun is byte identical") {
  Scratch s;
  const auto cfg = s.file("sc.json", R"({"model":{"A":1,"gamma":1,"epsilon":0.01,"m":0,"n":2},"grid":{"N":512},"eps_list":[0.1,0.01],"seed":7})");
  const auto a = call({"scaling", "--config", cfg.string(), "--out", (s.dir / "a").string()});
  const auto b = call({"scaling", "--config", cfg.string(), "--out", (s.dir / "b").string(), "--threads", "2"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(slurp(s.dir / "a" / "scaling.csv") == slurp(s.dir / "b" / "scaling.csv"));
  CHECK(slurp(s.dir / "a" / "result.json") == slurp(s.dir / "b" / "result.json"));
  const auto csv = slurp(s.dir / "a" / "scaling.csv");
  CHECK(csv.rfind("epsilon,E_min,R0,iterations\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("cli kernel and quadrature outputs") {
  Scratch s;
  const auto cfg = s.file("k.json", R"({"model":{"epsilon":0.01,"m":0,"n":2},"grid":{"N":64}})");
  const auto r = call({"kernel", "dump", "--config", cfg.string(), "--out", s.dir.string()});
  REQUIRE(r.code == 0);
  const auto csv = slurp(s.dir / "kernel.csv");
  CHECK(csv.rfind("z,K,Kprime\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 65);

  const auto q = s.file("q.json", R"({"m":0.5,"p":1,"a_list":[0.0625,0.03125]})");
  REQUIRE(call({"quadrature", "--config", q.string(), "--out", s.dir.string()}).code == 0);
  CHECK(slurp(s.dir / "quadrature.csv").rfind("a,error,observed_order\n", 0) == 0);
}

TEST_CASE("cli energy round trip") {
  Scratch s;
  const auto cfg = s.file("m.json", R"({"model":{"A":1,"epsilon":0.01,"m":0,"n":2},"grid":{"N":128},"init":"ansatz"})");
  REQUIRE(call({"minimize", "--config", cfg.string(), "--out", s.dir.string()}).code == 0);
  const double e_min = nlohmann::json::parse(slurp(s.dir / "result.json"))["results"]["energy"]["total"];
  const auto ecfg = s.file("e.json", R"({"model":{"A":1,"epsilon":0.01,"m":0,"n":2},"profile":")" +
                                         (s.dir / "profile.csv").generic_string() + "\"}");
  const auto r = call({"energy", "--config", ecfg.string(), "--out", s.dir.string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["total"].get<double>() == doctest::Approx(e_min).epsilon(1e-13));
  for (const char* k : {"nonlocal_tilde", "null_lagrangian", "local", "total"}) CHECK(j.contains(k));
}

TEST_CASE("cli evolve-steps writes trajectory") {
  Scratch s;
  const auto cfg = s.file("s.json", R"({"physical":{"alpha1":1,"alpha2":1,"a":1,"m":0,"n":2},"steps":{"Ns":4,"spacing":3},"dynamics":{"t_end":1}})");
  REQUIRE(call({"evolve-steps", "--config", cfg.string(), "--out", s.dir.string()}).code == 0);
  const auto csv = slurp(s.dir / "trajectory.csv");
  CHECK(csv.rfind("t,x_0,x_1,x_2,x_3\n", 0) == 0);
}
