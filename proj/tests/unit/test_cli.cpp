#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "ergo/io.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

std::string cli_path() {
  const char* env = std::getenv("ERGO_CLI");
  REQUIRE(env != nullptr);  // set by ctest; point ERGO_CLI at the built binary
  return env;
}

std::string golden_dir() {
  const char* env = std::getenv("ERGO_GOLDEN_DIR");
  REQUIRE(env != nullptr);
  return env;
}

RunResult run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
  RunResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    result.output.append(buf.data(), n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string fixture(const std::string& name) { return golden_dir() + "/" + name; }

}  // namespace

TEST_CASE("cli golden: validate") {
  const RunResult r = run_cli("validate " + fixture("swap_f10.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.output == read_file(fixture("validate_swap.golden")));
}

TEST_CASE("cli golden: check maximal") {
  const RunResult r = run_cli("check maximal " + fixture("swap_f10.json") +
                              " --lambda 3/5 --N inf");
  CHECK(r.exit_code == 0);
  CHECK(r.output == read_file(fixture("check_maximal_swap.golden")));
}

TEST_CASE("cli golden: decompose --trace") {
  const RunResult r = run_cli("decompose " + fixture("swap_f2545.json") +
                              " --x 0 --N 2 --m 5 --lambda 1/2 --trace");
  CHECK(r.exit_code == 0);
  CHECK(r.output == read_file(fixture("decompose_swap.golden")));
}

TEST_CASE("cli exit codes: pass, check failure, input error") {
  CHECK(run_cli("validate " + fixture("swap_f10.json")).exit_code == 0);
  CHECK(run_cli("validate " + fixture("bad_weights.json")).exit_code == 1);
  CHECK(run_cli("validate " + fixture("malformed.json")).exit_code == 2);
  CHECK(run_cli("validate /nonexistent.json").exit_code == 2);
  // Other commands need a valid system up front.
  CHECK(run_cli("check ergodic " + fixture("bad_weights.json")).exit_code == 2);
  CHECK(run_cli("average " + fixture("swap_f10.json") + " --x 7 --k 2").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("validate " + fixture("swap_f10.json") + " --no-such-flag").exit_code == 2);
}

TEST_CASE("cli average and maximal values") {
  const RunResult avg = run_cli("average " + fixture("swap_f10.json") + " --x 0 --k 3");
  CHECK(avg.exit_code == 0);
  CHECK(avg.output.find("\"value\": \"2/3\"") != std::string::npos);

  const RunResult sup = run_cli("maximal " + fixture("swap_f10.json") + " --x 1 --N inf");
  CHECK(sup.exit_code == 0);
  CHECK(sup.output.find("\"value\": \"1/2\"") != std::string::npos);
  CHECK(sup.output.find("\"attained\": true") != std::string::npos);
}

TEST_CASE("cli converge emits the hand-computed series") {
  const RunResult r =
      run_cli("converge " + fixture("swap_f10.json") + " --x 0 --K 6 --stride 1");
  CHECK(r.exit_code == 0);
  CHECK(r.output ==
        "k,average,exact\n"
        "1,1,1\n"
        "2,0.5,1/2\n"
        "3,0.666666666667,2/3\n"
        "4,0.5,1/2\n"
        "5,0.6,3/5\n"
        "6,0.5,1/2\n");
}

TEST_CASE("cli converge on the golden rotation decays to the limit") {
  const auto tmp = std::filesystem::temp_directory_path() / "ergo_rotation.json";
  {
    std::ofstream out(tmp);
    out << R"({"type":"rotation","alpha":0.6180339887498949,"observable":"cos2pi"})" << "\n";
  }
  const RunResult r = run_cli("converge " + tmp.string() + " --x 0 --K 1000000 --stride 10000");
  std::filesystem::remove(tmp);
  REQUIRE(r.exit_code == 0);
  // Final row: k = 10^6; the average has magnitude well below 2e-6.
  const std::size_t last_line = r.output.rfind('\n', r.output.size() - 2);
  const std::string row = r.output.substr(last_line + 1);
  REQUIRE(row.rfind("1000000,", 0) == 0);
  const double value = std::stod(row.substr(row.find(',') + 1));
  CHECK(std::fabs(value) <= 2e-6);
  // 100 data rows plus the header.
  CHECK(std::count(r.output.begin(), r.output.end(), '\n') == 101);
}

TEST_CASE("cli report is canonical and idempotent") {
  const RunResult first = run_cli("report " + fixture("swap_f10.json"));
  REQUIRE(first.exit_code == 0);
  const auto tmp = std::filesystem::temp_directory_path() / "ergo_report_roundtrip.json";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << first.output;
  }
  const RunResult second = run_cli("report " + tmp.string());
  CHECK(second.exit_code == 0);
  CHECK(second.output == first.output);
  std::filesystem::remove(tmp);

  // The reported file parses back to the same exact system.
  const ergo::SystemDescription desc = ergo::system_from_json(ergo::Json::parse(first.output));
  CHECK(desc.finite().weights == std::vector<ergo::Rational>({ergo::Rational(1, 2),
                                                              ergo::Rational(1, 2)}));
}

TEST_CASE("cli doubling file: exact average through the rational path") {
  const auto tmp = std::filesystem::temp_directory_path() / "ergo_doubling.json";
  {
    std::ofstream out(tmp);
    out << R"({"type":"doubling","observable":"indicator_lower_half"})" << "\n";
  }
  const RunResult avg = run_cli("average " + tmp.string() + " --x 1/11 --k 10");
  CHECK(avg.exit_code == 0);
  CHECK(avg.output.find("\"value\": \"1/2\"") != std::string::npos);
  std::filesystem::remove(tmp);
}

TEST_CASE("cli fuzz summary") {
  const RunResult r = run_cli("fuzz --trials 40 --size-bound 12 --seed 9");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"verdict\": \"pass\"") != std::string::npos);
  CHECK(r.output.find("\"passed\": \"40\"") != std::string::npos);
}
