#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end checks against the built binary (path injected by CMake).
#ifndef COXKL_CLI_PATH
#define COXKL_CLI_PATH "coxkl"
#endif

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(COXKL_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buf[512];
  while (fgets(buf, sizeof(buf), pipe)) result.output += buf;
  const int status = pclose(pipe);
  result.exit_code = WEXITSTATUS(status);
  return result;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("coxkl_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kTinyData =
    "id,time,status,z1,z2\n"
    "a,1,1,0.5,1\n"
    "b,2,1,-0.5,0\n"
    "c,3,0,0.25,1\n"
    "d,4,1,-1,0\n"
    "e,5,1,1.5,1\n"
    "f,6,0,0.75,0\n";

}  // namespace

TEST_CASE("help exits zero on every command") {
  for (const std::string cmd :
       {"", "fit", "cv", "simulate", "evaluate", "km"}) {
    const RunResult r = run(cmd + (cmd.empty() ? "--help" : " --help"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("--help") != std::string::npos);
  }
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("fit").exit_code == 2);                      // missing --data
  CHECK(run("nosuchcommand").exit_code == 2);
  CHECK(run("simulate --cell nope").exit_code == 2);     // unknown cell
  CHECK(run("simulate --cell nope").output.find("valid cells") !=
        std::string::npos);
}

TEST_CASE("fit, evaluate, km, baseline round trip") {
  TempDir tmp;
  write_file(tmp.path / "data.csv", kTinyData);
  const std::string data = (tmp.path / "data.csv").string();
  const std::string fit_json = (tmp.path / "fit.json").string();

  const RunResult fit = run("fit --data " + data + " --out " + fit_json +
                            " --baseline " + (tmp.path / "base.csv").string());
  CHECK(fit.exit_code == 0);
  CHECK(fit.output.find("converged=1") != std::string::npos);
  CHECK(fs::exists(fit_json));
  CHECK(fs::exists(tmp.path / "fit.json.manifest.json"));
  const std::string baseline = slurp(tmp.path / "base.csv");
  CHECK(baseline.rfind("t,value\n", 0) == 0);

  const RunResult eval = run("evaluate --fit " + fit_json + " --data " + data);
  CHECK(eval.exit_code == 0);
  CHECK(eval.output.find("c_index=") != std::string::npos);

  const RunResult km = run("km --data " + data + " --fit " + fit_json +
                           " --cuts 50 --out " + (tmp.path / "km.csv").string());
  CHECK(km.exit_code == 0);
  CHECK(slurp(tmp.path / "km.csv").rfind("group,t,survival\n", 0) == 0);
}

TEST_CASE("fit with scores at eta zero equals the no-scores fit") {
  TempDir tmp;
  write_file(tmp.path / "data.csv", kTinyData);
  write_file(tmp.path / "scores.csv",
             "id,score\na,0.9\nb,-0.2\nc,0.1\nd,-1\ne,2\nf,0\n");
  const std::string data = (tmp.path / "data.csv").string();

  REQUIRE(run("fit --data " + data + " --out " + (tmp.path / "f0.json").string())
              .exit_code == 0);
  REQUIRE(run("fit --data " + data + " --scores " +
              (tmp.path / "scores.csv").string() + " --eta 0 --out " +
              (tmp.path / "f1.json").string())
              .exit_code == 0);

  // Identical beta arrays (identical reduction path).
  const std::string f0 = slurp(tmp.path / "f0.json");
  const std::string f1 = slurp(tmp.path / "f1.json");
  const auto beta_of = [](const std::string& s) {
    const auto start = s.find("\"beta\"");
    return s.substr(start, s.find(']', start) - start);
  };
  CHECK(beta_of(f0) == beta_of(f1));

  // Misaligned ids are a hard error.
  write_file(tmp.path / "bad.csv",
             "id,score\nb,0.9\na,-0.2\nc,0.1\nd,-1\ne,2\nf,0\n");
  const RunResult bad = run("fit --data " + data + " --scores " +
                            (tmp.path / "bad.csv").string() + " --eta 1");
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("does not match") != std::string::npos);
}

TEST_CASE("lasso fit above lambda_max returns the zero vector, exit 0") {
  TempDir tmp;
  write_file(tmp.path / "data.csv", kTinyData);
  const RunResult fit =
      run("fit --data " + (tmp.path / "data.csv").string() +
          " --lasso --lambda 99 --out " + (tmp.path / "l.json").string());
  CHECK(fit.exit_code == 0);
  CHECK(fit.output.find("nonzeros=0") != std::string::npos);
}

TEST_CASE("nonconvergence exits 3 unless allowed") {
  TempDir tmp;
  // Monotone likelihood: larger covariate always fails first.
  write_file(tmp.path / "mono.csv", "id,time,status,z\na,1,1,1\nb,2,1,0\n");
  const std::string data = (tmp.path / "mono.csv").string();
  CHECK(run("fit --data " + data + " --out " + (tmp.path / "m.json").string())
            .exit_code == 3);
  CHECK(run("fit --data " + data + " --allow-nonconverged --out " +
            (tmp.path / "m.json").string())
            .exit_code == 0);
}

TEST_CASE("cv command writes a report and a summary line") {
  TempDir tmp;
  write_file(tmp.path / "data.csv", kTinyData);
  write_file(tmp.path / "scores.csv",
             "id,score\na,0.9\nb,-0.2\nc,0.1\nd,-1\ne,2\nf,0\n");
  const RunResult cv =
      run("cv --data " + (tmp.path / "data.csv").string() + " --scores " +
          (tmp.path / "scores.csv").string() +
          " --eta-grid 0,1,5 --folds 2 --seed 3 --out " +
          (tmp.path / "cv.json").string());
  CHECK(cv.exit_code == 0);
  CHECK(cv.output.find("selected_eta=") != std::string::npos);
  const std::string report = slurp(tmp.path / "cv.json");
  CHECK(report.find("\"cvpl\"") != std::string::npos);
  CHECK(report.find("\"fold_sizes\"") != std::string::npos);
}

TEST_CASE("simulate artifacts are byte-identical across reruns and jobs") {
  TempDir tmp;
  const std::string base = "simulate --cell n50_c30_E1 --reps 6 --seed 11 "
                           "--cv-grid 0,1,4 --sweep-grid 0,2 ";
  REQUIRE(run(base + "--out " + (tmp.path / "a").string()).exit_code == 0);
  REQUIRE(run(base + "--out " + (tmp.path / "b").string()).exit_code == 0);
  REQUIRE(run(base + "--jobs 8 --out " + (tmp.path / "c").string()).exit_code ==
          0);

  for (const char* name : {"report.json", "table.csv", "curves.csv"}) {
    CHECK(slurp(tmp.path / "a" / name) == slurp(tmp.path / "b" / name));
    CHECK(slurp(tmp.path / "a" / name) == slurp(tmp.path / "c" / name));
  }
  CHECK(slurp(tmp.path / "a" / "table.csv")
            .rfind("cell,method,bias,se,mse,c_index\n", 0) == 0);
  CHECK(slurp(tmp.path / "a" / "curves.csv")
            .rfind("eta,metric,value,method,cell\n", 0) == 0);
}
