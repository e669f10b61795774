#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kCli = PEAKCTL_CLI_PATH;
const char* kFixtures = PEAKCTL_FIXTURE_DIR;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliRun run_cli(const std::string& args, const fs::path& dir) {
  fs::create_directories(dir);
  fs::path out = dir / "stdout.txt";
  fs::path err = dir / "stderr.txt";
  std::string cmd = std::string(kCli) + " " + args + " > " + out.string() + " 2> " +
                    err.string();
  int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

json load_fixture(const std::string& name) {
  std::ifstream in(fs::path(kFixtures) / name);
  REQUIRE(in.good());
  return json::parse(in);
}

// Shrink a fixture to something a test can solve in well under a second.
json tiny_inventory(int n_steps = 80, int max_iterations = 20000) {
  json c = load_fixture("case-study-1.json");
  c["solver"]["n_steps"] = n_steps;
  c["solver"]["max_iterations"] = max_iterations;
  return c;
}

json tiny_queue(int n_steps = 100) {
  json c = load_fixture("queue-congestion.json");
  c["solver"]["n_steps"] = n_steps;
  return c;
}

fs::path write_config(const json& c, const fs::path& dir, const char* name = "config.json") {
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream out(p);
  out << c.dump(2) << "\n";
  return p;
}

fs::path scratch(const std::string& leaf) {
  fs::path dir = fs::path("cli_scratch") / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char ch : text)
    if (ch == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("print-defaults emits a parseable configuration") {
  fs::path dir = scratch("defaults");
  CliRun r = run_cli("print-defaults", dir);
  CHECK(r.code == 0);
  json c = json::parse(r.out);
  CHECK(c.at("application") == "inventory");
  CHECK(c.at("solver").at("n_steps").is_number_integer());
  CHECK(c.at("params").contains("smoothing"));

  CliRun rq = run_cli("print-defaults --application queue", dir);
  CHECK(rq.code == 0);
  CHECK(json::parse(rq.out).at("application") == "queue");

  CliRun bad = run_cli("print-defaults --application nope", dir);
  CHECK(bad.code == 3);
}

TEST_CASE("solve writes trajectory, summary, and a faithful echo") {
  fs::path dir = scratch("solve");
  json c = tiny_inventory();
  c["run"]["output_dir"] = (dir / "out1").string();
  fs::path cfg = write_config(c, dir);

  CliRun r = run_cli("solve --config " + cfg.string(), dir);
  REQUIRE(r.code == 0);

  std::string traj = slurp(dir / "out1" / "trajectory.csv");
  REQUIRE(!traj.empty());
  CHECK(traj.substr(0, traj.find('\n')) == "t,x,y,u,lambda_x,lambda_y,p");
  CHECK(count_lines(traj) == 80 + 2);  // header + one row per node

  json summary = json::parse(slurp(dir / "out1" / "summary.json"));
  CHECK(summary.at("objective").contains("total_smoothed"));
  CHECK(summary.at("diagnostics").contains("converged"));
  CHECK(summary.at("revenue").is_number());
  CHECK(summary.at("structural_checks").contains("terminal_shortage_ok"));

  // Re-running from the echoed effective configuration must reproduce the
  // trajectory byte for byte.
  json echo = summary.at("effective_config");
  echo["run"]["output_dir"] = (dir / "out2").string();
  fs::path cfg2 = write_config(echo, dir, "echo.json");
  CliRun r2 = run_cli("solve --config " + cfg2.string(), dir);
  REQUIRE(r2.code == 0);
  CHECK(slurp(dir / "out2" / "trajectory.csv") == traj);

  json s2 = json::parse(slurp(dir / "out2" / "summary.json"));
  json a = summary;
  json b = s2;
  a["effective_config"]["run"].erase("output_dir");
  b["effective_config"]["run"].erase("output_dir");
  CHECK(a == b);
}

TEST_CASE("reserved seed flag does not perturb results") {
  fs::path dir = scratch("seed");
  json c = tiny_inventory(60, 500);
  c["run"]["output_dir"] = (dir / "a").string();
  fs::path cfg = write_config(c, dir);
  CliRun r1 = run_cli("solve --config " + cfg.string(), dir);
  REQUIRE(r1.code == 0);
  CliRun r2 = run_cli("solve --config " + cfg.string() + " --seed 7 --out " +
                          (dir / "b").string(),
                      dir);
  REQUIRE(r2.code == 0);
  CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
}

TEST_CASE("iteration starvation still exits cleanly") {
  fs::path dir = scratch("starved");
  json c = tiny_inventory(80, 3);
  c["run"]["output_dir"] = (dir / "out").string();
  fs::path cfg = write_config(c, dir);
  CliRun r = run_cli("solve --config " + cfg.string(), dir);
  CHECK(r.code == 0);
  json summary = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary.at("diagnostics").at("converged") == false);
}

TEST_CASE("validation failures exit with status three") {
  fs::path dir = scratch("validation");

  json degenerate = tiny_inventory();
  degenerate["params"]["T"] = 0.0;
  fs::path cfg1 = write_config(degenerate, dir, "t0.json");
  CliRun r1 = run_cli("solve --config " + cfg1.string(), dir);
  CHECK(r1.code == 3);
  CHECK(!r1.err.empty());

  json stray = tiny_inventory();
  stray["paramz"] = 1;
  fs::path cfg2 = write_config(stray, dir, "stray.json");
  CliRun r2 = run_cli("solve --config " + cfg2.string(), dir);
  CHECK(r2.code == 3);
  CHECK(r2.err.find("unknown key") != std::string::npos);

  json negative = tiny_inventory();
  negative["params"]["beta"] = {{"kind", "sinusoid"}, {"base", 0.5}, {"amplitude", 2.0},
                                {"phase", 0.0},       {"angular_rate", 6.0}};
  fs::path cfg3 = write_config(negative, dir, "negbeta.json");
  CliRun r3 = run_cli("solve --config " + cfg3.string(), dir);
  CHECK(r3.code == 3);

  fs::path broken = dir / "broken.json";
  std::ofstream(broken) << "{ not json";
  CliRun r4 = run_cli("solve --config " + broken.string(), dir);
  CHECK(r4.code == 3);
  CHECK(r4.err.find("invalid JSON") != std::string::npos);
}

TEST_CASE("numerical blow-up exits with status two") {
  fs::path dir = scratch("blowup");
  json c = tiny_inventory(40, 50);
  c["params"]["x0"] = 1e308;  // terminal cost gradient overflows immediately
  c["run"]["output_dir"] = (dir / "out").string();
  fs::path cfg = write_config(c, dir);
  CliRun r = run_cli("solve --config " + cfg.string(), dir);
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
}

TEST_CASE("sigma sweep writes the frontier table") {
  fs::path dir = scratch("sweep");
  json c = tiny_inventory(60, 400);
  c["run"]["sweep_values"] = {0.0, 2.0};
  c["run"]["output_dir"] = (dir / "out").string();
  fs::path cfg = write_config(c, dir);
  CliRun r = run_cli("sweep --config " + cfg.string(), dir);
  REQUIRE(r.code == 0);
  std::string frontier = slurp(dir / "out" / "frontier.csv");
  CHECK(frontier.substr(0, frontier.find('\n')) == "sigma,revenue,peak,converged,iterations");
  CHECK(count_lines(frontier) == 3);
  json summary = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary.at("rows").size() == 2);
}

TEST_CASE("queue solve reports both cost integrals") {
  fs::path dir = scratch("queue");
  json c = tiny_queue();
  c["run"]["output_dir"] = (dir / "out").string();
  fs::path cfg = write_config(c, dir);
  CliRun r = run_cli("solve --config " + cfg.string(), dir);
  REQUIRE(r.code == 0);
  std::string traj = slurp(dir / "out" / "trajectory.csv");
  CHECK(traj.substr(0, traj.find('\n')) == "t,x,y,u,lambda_x,lambda_y");
  json summary = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary.at("integral_congestion").is_number());
  CHECK(summary.at("integral_utilization").is_number());
  CHECK(summary.at("state_above_neg_alpha") == true);
}

TEST_CASE("pareto run produces a weight frontier") {
  fs::path dir = scratch("pareto");
  json c = load_fixture("queue-frontier.json");
  c["solver"]["n_steps"] = 60;
  c["run"]["sweep_values"] = {0.0, 1.0};
  c["run"]["output_dir"] = (dir / "out").string();
  fs::path cfg = write_config(c, dir);
  CliRun r = run_cli("pareto --config " + cfg.string(), dir);
  REQUIRE(r.code == 0);
  std::string frontier = slurp(dir / "out" / "frontier.csv");
  CHECK(frontier.substr(0, frontier.find('\n')) ==
        "weight,peak,integral_congestion,integral_utilization,converged,iterations");
  CHECK(count_lines(frontier) == 3);
}

TEST_CASE("oracle comparison reports both objectives") {
  fs::path dir = scratch("oracle");
  json c = tiny_inventory(60, 20000);
  c["run"]["oracle"] = {{"n_segments", 2}, {"n_levels", 3}};
  c["run"]["output_dir"] = (dir / "out").string();
  fs::path cfg = write_config(c, dir);
  CliRun r = run_cli("oracle-compare --config " + cfg.string(), dir);
  REQUIRE(r.code == 0);
  json summary = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary.at("oracle").at("best").at("objective").at("total_smoothed").is_number());
  CHECK(summary.at("oracle").at("n_evaluated") == 9);
  CHECK(summary.at("fbs_projected").at("total_smoothed").is_number());
  CHECK(summary.at("projected_minus_oracle").is_number());
}

TEST_CASE("dn comparison reports the peak discrepancy") {
  fs::path dir = scratch("dn");
  json c = tiny_inventory(80, 20000);
  c["run"]["output_dir"] = (dir / "out").string();
  fs::path cfg = write_config(c, dir);
  CliRun r = run_cli("dn-compare --config " + cfg.string(), dir);
  REQUIRE(r.code == 0);
  json summary = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary.at("smooth").at("peak").is_number());
  CHECK(summary.at("dn").at("peak").is_number());
  CHECK(summary.at("peak_difference").is_number());
}
