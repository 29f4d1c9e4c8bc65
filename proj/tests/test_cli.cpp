#include <doctest.h>

#include <sys/wait.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "run_config.hpp"
#include "stefan/errors.hpp"
#include "stefan/params_io.hpp"
#include "stefan/text_format.hpp"

using namespace stefan;
namespace fs = std::filesystem;

namespace {

const std::string kData = STEFAN_TEST_DATA;

struct Run {
  int code = -1;
  std::string out;
};

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("stefan_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

Run run(const TempDir& dir, const std::string& args) {
  const auto log = dir / "stdout.txt";
  const std::string cmd = std::string(STEFAN_CLI) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream buf;
  buf << in.rdbuf();
  r.out = buf.str();
  return r;
}

KeyValueMap read_kv(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  return read_key_values(in);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string ingest_args(const TempDir& dir) {
  return "ingest --quotes " + kData + "/quotes_single_market.csv --volumes " + kData +
         "/volumes_single_market.csv --out-dir " + dir.path().string();
}

}  // namespace

TEST_CASE("ingest calibrates the single-market example") {
  TempDir dir;
  const auto r = run(dir, ingest_args(dir));
  REQUIRE(r.code == 0);
  const auto kv = read_kv(dir / "params.txt");
  CHECK(parse_double(kv.at("alpha"), "alpha") == doctest::Approx(13338.8310338027).epsilon(1e-10));
  CHECK(parse_double(kv.at("alpha_in"), "alpha_in") == doctest::Approx(798.438528637261).epsilon(1e-10));
  CHECK(parse_double(kv.at("radius0.1"), "r") == doctest::Approx(0.0165578043922488).epsilon(1e-10));
  CHECK(kv.at("I") == "1");
  CHECK(fs::exists(dir / "config.resolved"));
  CHECK(r.out.find("avg_spread=2.45") != std::string::npos);
}

TEST_CASE("ingest with two markets averages their coefficients") {
  TempDir dir;
  std::ofstream q(dir / "q.csv");
  q << slurp(kData + "/quotes_single_market.csv");
  {
    std::istringstream first(slurp(kData + "/quotes_single_market.csv"));
    std::string line;
    std::getline(first, line);
    while (std::getline(first, line)) q << "2" << line.substr(1) << '\n';
  }
  q.close();
  std::ofstream v(dir / "v.csv");
  v << "market,asset,shares\n1,1,550\n1,2,750\n1,3,300\n2,1,1100\n2,2,1500\n2,3,600\n";
  v.close();
  const auto r = run(dir, "ingest --quotes " + (dir / "q.csv") + " --volumes " + (dir / "v.csv") + " --out-dir " +
                              dir.path().string());
  REQUIRE(r.code == 0);
  const auto kv = read_kv(dir / "params.txt");
  CHECK(kv.at("I") == "2");
  // Liquidity is linear in volume, so market 2 has twice the coefficients.
  CHECK(parse_double(kv.at("alpha"), "alpha") == doctest::Approx(1.5 * 13338.8310338027).epsilon(1e-10));
}

TEST_CASE("ingest error exits") {
  TempDir dir;
  std::ofstream(dir / "empty.csv") << "market,asset,time,ask,bid\n";
  auto r = run(dir, "ingest --quotes " + (dir / "empty.csv") + " --volumes " + kData + "/volumes_single_market.csv");
  CHECK(r.code == 2);
  CHECK(r.out.find("no samples") != std::string::npos);
  r = run(dir, "ingest --quotes " + (dir / "missing.csv") + " --volumes " + kData + "/volumes_single_market.csv");
  CHECK(r.code == 2);
  r = run(dir, "ingest --volumes x.csv");
  CHECK(r.code == 4);
}

TEST_CASE("unknown and conflicting configuration") {
  TempDir dir;
  auto r = run(dir, "simulate --params " + kData + "/unit_ball.params --set model.bogus=1 --out-dir " +
                        dir.path().string());
  CHECK(r.code == 4);
  CHECK(r.out.find("model.bogus") != std::string::npos);
  r = run(dir, "simulate --params " + kData + "/unit_ball.params --set model.order=1 --order 2 --out-dir " +
                   dir.path().string());
  CHECK(r.code == 4);
  r = run(dir, "simulate --out-dir " + dir.path().string());
  CHECK(r.code == 2);
  r = run(dir, "sde --params " + kData + "/unit_ball.params --order deterministic --out-dir " + dir.path().string());
  CHECK(r.code == 4);
}

TEST_CASE("resolved configuration round trips") {
  TempDir dir;
  const auto first = run(dir, "simulate --params " + kData + "/unit_ball.params --t-end 2 --set integrator.rel_tol=1e-9 " +
                                  "--out-dir " + dir.path().string());
  REQUIRE(first.code == 0);
  const auto echoed = slurp(dir / "config.resolved");
  const auto traj1 = slurp(dir / "trajectory.csv");
  fs::rename(dir / "config.resolved", dir / "again.cfg");
  const auto second = run(dir, "simulate --params " + kData + "/unit_ball.params --config " + (dir / "again.cfg") +
                                   " --out-dir " + dir.path().string());
  REQUIRE(second.code == 0);
  CHECK(slurp(dir / "config.resolved") == echoed);
  CHECK(slurp(dir / "trajectory.csv") == traj1);
  CHECK(echoed.find("time.t_end=2\n") != std::string::npos);
}

TEST_CASE("simulate keeps the unit ball at its fixed point") {
  TempDir dir;
  const auto r = run(dir, "simulate --params " + kData + "/unit_ball.params --t-end 15 --dt-out 1 --out-dir " +
                              dir.path().string());
  REQUIRE(r.code == 0);
  std::ifstream in(dir / "trajectory.csv");
  const auto table = stefan::read_trajectory_csv(in);
  REQUIRE(table.times.size() == 16);
  for (const auto& row : table.radii) CHECK(row[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("mc summary does not depend on threads") {
  TempDir a, b;
  const std::string common = "mc --params " + kData + "/unit_ball.params --t-end 0.5 --paths 6 --seed 3 ";
  REQUIRE(run(a, common + "--threads 1 --out-dir " + a.path().string()).code == 0);
  REQUIRE(run(b, common + "--threads 3 --trajectories --out-dir " + b.path().string()).code == 0);
  CHECK(slurp(a / "summary.txt") == slurp(b / "summary.txt"));
  CHECK(slurp(a / "scatter.csv") == slurp(b / "scatter.csv"));
  CHECK(fs::exists(b / "trajectories/path_5.csv"));
  CHECK(read_kv(a / "summary.txt").at("order") == "stochastic1");
}

TEST_CASE("density and scaling reports") {
  TempDir dir;
  auto r = run(dir, "density --params " + kData + "/unit_ball.params --at 2,0,0 --out-dir " + dir.path().string());
  REQUIRE(r.code == 0);
  // v_inf + (1 - R v_inf) / |x| with R = v_inf = 1.
  CHECK(r.out.find("density=1\n") != std::string::npos);
  r = run(dir, "density --params " + kData + "/unit_ball.params --at 0.5,0,0 --out-dir " + dir.path().string());
  CHECK(r.out.find("density=0\n") != std::string::npos);
  r = run(dir, "density --params " + kData + "/unit_ball.params --at 1,2 --out-dir " + dir.path().string());
  CHECK(r.code == 4);
  r = run(dir, "check-scaling --params " + kData + "/unit_ball.params --out-dir " + dir.path().string());
  REQUIRE(r.code == 0);
  // 1 * 1 / 100^(4/9)
  CHECK(r.out.find("rho=" + format_double(1.0 / std::pow(100.0, 4.0 / 9.0))) != std::string::npos);
  CHECK(r.out.find("status=warn") != std::string::npos);
}

TEST_CASE("portfolio command") {
  TempDir dir;
  std::ofstream(dir / "p.csv") << "asset,s0,p0,f,p\nAAA,100,10,0.5,12\nBBB,50,20,0,18\n";
  const auto r = run(dir, "portfolio --input " + (dir / "p.csv") + " --out-dir " + dir.path().string());
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "portfolio.csv").find("# remaining_value=1500") != std::string::npos);
  std::ofstream(dir / "bad.csv") << "asset,s0,p0,f,p\nAAA,100,10,1.5,12\n";
  CHECK(run(dir, "portfolio --input " + (dir / "bad.csv") + " --out-dir " + dir.path().string()).code == 2);
}

TEST_CASE("configuration precedence") {
  cli::ConfigSources s;
  s.command_defaults["model.order"] = "1";
  s.sets = {"time.t_end=3", "noise.dt=1e-3"};
  s.flags["time.t_end"] = "3";
  const auto cfg = cli::resolve_config(s);
  CHECK(cfg.get("model.order") == "1");
  CHECK(cfg.number("time.t_end") == 3.0);
  CHECK(cfg.number("noise.dt") == 1e-3);
  CHECK(cfg.get("sigma.c0") == "1");
  CHECK_FALSE(cfg.has_params);
  CHECK_THROWS_AS(cli::market_params(cfg), InputError);

  s.flags["time.t_end"] = "4";
  CHECK_THROWS_AS(cli::resolve_config(s), ConfigError);
  s.flags.clear();
  s.sets = {"noise.dt=abc"};
  CHECK_THROWS_AS(cli::resolve_config(s).number("noise.dt"), ConfigError);
  CHECK(cli::parse_point("1, 2,3") == std::vector<double>{1, 2, 3});
  CHECK_THROWS_AS(cli::parse_point("1,x"), ConfigError);
}
