#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct Result {
  int code = -1;
  std::string out;
};

/// Runs the CLI with `args`; stdout is captured, stderr discarded unless redirected in `args`.
Result run(const std::string& args) {
  const std::string command = std::string(DHL_CLI_PATH) + " " + args;
  Result r;
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0;) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const std::string kShortMf =
    "--method mf --params A --initial R_II --t-end 3 --dt 0.01 "
    "--set analysis.t_transient=0 --set analysis.min_window=1";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("evolve writes a CSV time series") {
    const Result r = run("evolve " + kShortMf + " --summary /dev/null");
    CHECK(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() > 2);
    CHECK(rows[0] == "t,xA,yA,zA,xB,yB,zB");
    CHECK(rows[1].rfind("0,", 0) == 0);
  }

  TEST_CASE("reruns are byte-identical") {
    const std::string args = "evolve --method cmop --z 150 " + kShortMf.substr(12) + " --summary /dev/null";
    CHECK(run(args).out == run(args).out);
    const std::string sweep =
        "zsweep --method cmop --params B --z-list 30,60 -n 2 --seed 9 --t-end 60 --dt 0.02 "
        "--set analysis.t_transient=20 --set analysis.min_window=20 2>/dev/null";
    const Result a = run(sweep), b = run(sweep);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(lines(a.out).size() == 3);
  }

  TEST_CASE("summary JSON for the free relaxation") {
    const std::string path = "dhl_cli_summary.json";
    const Result r = run(
        "evolve --method mf --set params.Jx=0 --set params.Jy=0 --set params.Jz=0 --set params.omega=1 "
        "--initial R_I --t-end 300 --dt 0.01 --csv /dev/null --summary " + path);
    CHECK(r.code == 0);
    const nlohmann::json s = nlohmann::json::parse(slurp(path));
    std::remove(path.c_str());
    CHECK(s["status"] == "complete");
    CHECK(s["summary"]["classification"] == "Stationary");
    const auto& a = s["summary"]["final_bloch"]["nA"];
    CHECK(std::abs(a[0].get<double>()) < 1e-6);
    CHECK(std::abs(a[1].get<double>() - 2.0 / 3.0) < 1e-6);
    CHECK(std::abs(a[2].get<double>() + 1.0 / 3.0) < 1e-6);
  }

  TEST_CASE("numerical abort truncates with exit 3") {
    const Result r = run(
        "evolve --method cmop --params A --z 1 --initial R_II --t-end 50 --dt 0.4 "
        "--set analysis.t_transient=0 --summary /dev/null");
    CHECK(r.code == 3);
    const auto rows = lines(r.out);
    REQUIRE_FALSE(rows.empty());
    CHECK(rows.back().rfind("# truncated", 0) == 0);
  }

  TEST_CASE("configuration errors exit 2") {
    CHECK(run("evolve --method exact 2>/dev/null").code == 2);
    CHECK(run("evolve --method cmop --params A --initial R_I 2>/dev/null").code == 2);  // z missing
    CHECK(run("evolve " + kShortMf + " --set integration.dt=-1 2>/dev/null").code == 2);
    CHECK(run("zsweep --method cmop --params A --z-list 10,x 2>/dev/null").code == 2);
  }

  TEST_CASE("zsweep with one sample has zero error") {
    const Result r = run(
        "zsweep --method cmop --params A --z-list 40 -n 1 --seed 3 --t-end 60 --dt 0.02 "
        "--set analysis.t_transient=20 --set analysis.min_window=20 2>/dev/null");
    CHECK(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "z,p_stationary,std_err,mean_frequency,freq_err,n_excluded");
    std::stringstream ss(rows[1]);
    std::string z, p, err;
    std::getline(ss, z, ',');
    std::getline(ss, p, ',');
    std::getline(ss, err, ',');
    CHECK(z == "40");
    CHECK((p == "0" || p == "1"));
    CHECK(err == "0");
  }

  TEST_CASE("phase diagram has one row per grid point") {
    const Result r = run(
        "phasediagram --method mf --params A --axis1 Jx:-1:1:2 --axis2 Omega:0.5:1:3 -n 2 "
        "--t-end 300 --set analysis.t_transient=200 2>/dev/null");
    CHECK(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 1 + 2 * 3);
    CHECK(rows[0] == "Jx,Omega,phase");
    CHECK(rows[1].rfind("-1,0.5,", 0) == 0);
    CHECK(rows[2].rfind("-1,0.75,", 0) == 0);
    CHECK(rows[6].rfind("1,1,", 0) == 0);
    CHECK(run("phasediagram --method mf --params A --axis1 Q:0:1:2 --axis2 Jx:0:1:2 2>/dev/null").code == 2);
  }

  TEST_CASE("oracle-check exit codes") {
    const Result good = run("oracle-check");
    CHECK(good.code == 0);
    CHECK(good.out.find("FAIL") == std::string::npos);
    const Result bad = run("oracle-check --corrupt-pauli");
    CHECK(bad.code > 0);
    CHECK(bad.out.find("FAIL") != std::string::npos);
  }
}
