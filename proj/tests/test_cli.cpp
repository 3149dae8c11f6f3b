#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace {

struct RunResult {
  int code = -1;
  std::string out;  // stdout and stderr, merged
};

RunResult run_cmd(const std::string& cmd) {
  RunResult res;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) res.out.append(buf, n);
  int status = pclose(pipe);
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string binary() {
  const char* bin = std::getenv("GIBBSGEOM_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

std::string scratch_dir() {
  static std::string root = [] {
    char tmpl[] = "/tmp/ggcliXXXXXX";
    char* got = mkdtemp(tmpl);
    REQUIRE(got != nullptr);
    return std::string(got);
  }();
  return root;
}

std::string write_config(const std::string& name, const std::string& body) {
  std::string path = scratch_dir() + "/" + name;
  std::ofstream f(path);
  REQUIRE(f.good());
  f << body;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const std::string kScanConfig =
    "experiment.dim = 2\n"
    "potential.kind = strauss\n"
    "potential.r = 1\n"
    "potential.a = 1\n"
    "model.tau = 0.05\n"
    "model.beta = 1\n"
    "score.kind = clique\n"
    "score.k = 1\n"
    "score.s = 0.7\n"
    "grid.lambdas = 50, 100\n"
    "mc.n_reps = 50\n"
    "mc.seed = 99\n";

}  // namespace

TEST_CASE("validation aborts near the critical regime with the margin") {
  auto cfg = write_config("hot.cfg",
                          "potential.kind = hard_core\n"
                          "potential.r = 1\n"
                          "model.tau = 0.1\n"
                          "model.beta = 1\n"
                          "grid.lambdas = 100\n");
  auto res = run_cmd(binary() + " variance-scan --config " + cfg +
                     " --out " + scratch_dir() + "/hot_out --validate-only");
  CHECK(res.code == 2);
  CHECK(res.out.find("1.2566370614359172") != std::string::npos);
  CHECK(res.out.find("validation failed") != std::string::npos);
  CHECK(res.out.find("--allow-near-critical") != std::string::npos);

  // The same interaction strength with beta = 0 is the free process: fine.
  auto cold = write_config("cold.cfg",
                           "potential.kind = hard_core\n"
                           "potential.r = 1\n"
                           "model.tau = 0.1\n"
                           "model.beta = 0\n"
                           "grid.lambdas = 100\n");
  auto ok = run_cmd(binary() + " variance-scan --config " + cold +
                    " --out " + scratch_dir() + "/cold_out --validate-only");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("ok") != std::string::npos);
  CHECK(ok.out.find("margin 1.2566370614359172") != std::string::npos);
}

TEST_CASE("unknown and missing keys are named with their line") {
  auto cfg = write_config("typo.cfg",
                          "potentail.kind = strauss\n"
                          "model.tau = 0.05\n");
  auto res = run_cmd(binary() + " variance-scan --config " + cfg + " --out " +
                     scratch_dir() + "/typo_out");
  CHECK(res.code == 2);
  CHECK(res.out.find("unknown key 'potentail.kind'") != std::string::npos);
  CHECK(res.out.find("line 1") != std::string::npos);

  auto missing = write_config("missing.cfg",
                              "potential.kind = strauss\n"
                              "potential.r = 1\n"
                              "potential.a = 1\n"
                              "model.tau = 0.05\n"
                              "model.beta = 1\n");
  auto res2 = run_cmd(binary() + " variance-scan --config " + missing +
                      " --out " + scratch_dir() + "/missing_out");
  CHECK(res2.code == 2);
  CHECK(res2.out.find("grid.lambdas") != std::string::npos);

  auto dup = write_config("dup.cfg",
                          "model.tau = 0.05\n"
                          "model.tau = 0.06\n"
                          "grid.lambdas = 100\n");
  auto res3 = run_cmd(binary() + " variance-scan --config " + dup + " --out " +
                      scratch_dir() + "/dup_out");
  CHECK(res3.code == 2);
  CHECK(res3.out.find("duplicate") != std::string::npos);

  auto res4 = run_cmd(binary() + " bogus-kind --config " + missing + " --out " +
                      scratch_dir() + "/bogus_out");
  CHECK(res4.code == 2);
}

TEST_CASE("variance scan emits a stable csv, invariant in threads and reruns") {
  auto cfg = write_config("scan.cfg", kScanConfig);
  std::string out1 = scratch_dir() + "/scan1";
  std::string out2 = scratch_dir() + "/scan2";
  std::string out3 = scratch_dir() + "/scan3";

  auto r1 = run_cmd(binary() + " variance-scan --config " + cfg + " --out " + out1);
  CHECK(r1.code == 0);
  CHECK(r1.out.find("margin ") != std::string::npos);
  CHECK(r1.out.find("rho ") != std::string::npos);

  auto r2 = run_cmd(binary() + " variance-scan --config " + cfg + " --out " + out2);
  CHECK(r2.code == 0);
  auto r3 = run_cmd(binary() + " variance-scan --config " + cfg + " --out " + out3 +
                    " --threads 4");
  CHECK(r3.code == 0);

  std::string csv1 = slurp(out1 + "/scan.csv");
  CHECK(csv1 == slurp(out2 + "/scan.csv"));
  CHECK(csv1 == slurp(out3 + "/scan.csv"));
  CHECK(csv1.rfind("lambda,n_reps,mean,var,var_se,var_over_lambda,d_k,mismatch\n",
                   0) == 0);
  // Two data rows follow the header.
  int lines = 0;
  for (char ch : csv1)
    if (ch == '\n') lines++;
  CHECK(lines == 3);

  std::string summary = slurp(out1 + "/summary.json");
  CHECK(summary.find("\"status\": \"ok\"") != std::string::npos);
  CHECK(summary.find("\"seed\": 99") != std::string::npos);
  // The config echo preserves the raw text of every key.
  CHECK(summary.find("\"model.tau\": \"0.05\"") != std::string::npos);
}

TEST_CASE("seed precedence is flag over environment over config") {
  auto cfg = write_config("seed.cfg",
                          "potential.kind = strauss\n"
                          "potential.r = 1\n"
                          "potential.a = 1\n"
                          "model.tau = 0.5\n"
                          "model.beta = 0\n"
                          "grid.lambdas = 50\n"
                          "mc.n_reps = 20\n"
                          "mc.seed = 11\n");
  std::string base = binary() + " variance-scan --config " + cfg;

  auto from_config = run_cmd(base + " --out " + scratch_dir() + "/s_cfg");
  CHECK(from_config.code == 0);
  CHECK(slurp(scratch_dir() + "/s_cfg/summary.json").find("\"seed\": 11") !=
        std::string::npos);

  auto from_env = run_cmd("GIBBSGEOM_SEED=22 " + base + " --out " +
                          scratch_dir() + "/s_env");
  CHECK(from_env.code == 0);
  CHECK(slurp(scratch_dir() + "/s_env/summary.json").find("\"seed\": 22") !=
        std::string::npos);

  auto from_flag = run_cmd("GIBBSGEOM_SEED=22 " + base + " --seed 33 --out " +
                           scratch_dir() + "/s_flag");
  CHECK(from_flag.code == 0);
  CHECK(slurp(scratch_dir() + "/s_flag/summary.json").find("\"seed\": 33") !=
        std::string::npos);

  auto bad_env = run_cmd("GIBBSGEOM_SEED=banana " + base + " --out " +
                         scratch_dir() + "/s_bad");
  CHECK(bad_env.code == 2);
}

TEST_CASE("oracle check needs no config and reports clean suites") {
  std::string out = scratch_dir() + "/oracle";
  auto res = run_cmd(binary() + " oracle-check --out " + out + " --seed 2026");
  CHECK(res.code == 0);
  std::string csv = slurp(out + "/oracle.csv");
  CHECK(csv.rfind("suite,cases,failures,max_err\n", 0) == 0);
  // Every row reports zero failures.
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    rows++;
    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 + 1);
    auto c3 = line.find(',', c2 + 1);
    CHECK(line.substr(c2 + 1, c3 - c2 - 1) == "0");
  }
  CHECK(rows == 7);
}

TEST_CASE("trivial score variance density comes out exact through the cli") {
  auto cfg = write_config("sig.cfg",
                          "potential.kind = strauss\n"
                          "potential.r = 1\n"
                          "potential.a = 1\n"
                          "model.tau = 0.5\n"
                          "model.beta = 0\n"
                          "mc.n_point = 400\n");
  std::string out = scratch_dir() + "/sig";
  auto res = run_cmd(binary() + " sigma2 --config " + cfg + " --out " + out);
  CHECK(res.code == 0);
  std::string csv = slurp(out + "/sigma2.csv");
  CHECK(csv.rfind("sigma2,se,tail_bound,", 0) == 0);
  auto nl = csv.find('\n');
  CHECK(csv.compare(nl + 1, 4, "1,0,") == 0);
}

TEST_CASE("unwritable output directory is an io failure") {
  std::string blocker = scratch_dir() + "/blocker";
  { std::ofstream f(blocker); f << "x"; }
  auto cfg = write_config("io.cfg",
                          "potential.kind = strauss\n"
                          "potential.r = 1\n"
                          "potential.a = 1\n"
                          "model.tau = 0.5\n"
                          "model.beta = 0\n"
                          "grid.lambdas = 50\n"
                          "mc.n_reps = 20\n");
  auto res = run_cmd(binary() + " variance-scan --config " + cfg + " --out " +
                     blocker + "/nested");
  CHECK(res.code == 4);
}
