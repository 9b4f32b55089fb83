#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

// End-to-end tests of the command-line tool.  The binary path arrives in the
// SAPSK_CLI environment variable (set by the build system for this target).

namespace {

namespace fs = std::filesystem;

std::string cli() {
  const char* path = std::getenv("SAPSK_CLI");
  REQUIRE_MESSAGE(path != nullptr, "SAPSK_CLI must point at the binary");
  return std::string("\"") + path + "\"";
}

fs::path scratch() {
  const fs::path dir = fs::current_path() / "cli_scratch";
  fs::create_directories(dir);
  return dir;
}

// Runs `<cli> <args>` through the shell and returns the process exit code.
int run(const std::string& args, const std::string& redirect = " >/dev/null 2>&1") {
  const int status = std::system((cli() + " " + args + redirect).c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Data rows: everything that is not a `# ` comment, split into doubles.
std::vector<std::vector<double>> parse_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::vector<double> row;
    double value = 0.0;
    while (fields >> value) row.push_back(value);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

TEST_CASE("constellation export is structured and deterministic") {
  const fs::path a = scratch() / "const_a.txt";
  const fs::path b = scratch() / "const_b.txt";
  const std::string args =
      "constellation --family sapsk --m 64 --gamma 8 --out ";
  REQUIRE(run(args + a.string()) == 0);
  REQUIRE(run(args + b.string()) == 0);
  const std::string text = slurp(a);
  CHECK(text == slurp(b));
  CHECK(text.find("# command constellation") != std::string::npos);
  CHECK(text.find("# columns ring position amplitude phase in_phase "
                  "quadrature") != std::string::npos);
  const auto rows = parse_rows(text);
  REQUIRE(rows.size() == 64);
  for (const auto& row : rows) {
    REQUIRE(row.size() == 6);
    // in_phase/quadrature must be consistent with amplitude/phase (both
    // sides pass through 9-significant-digit text).
    CHECK(std::abs(row[2] * std::cos(row[3]) - row[4]) < 5e-8);
    CHECK(std::abs(row[2] * std::sin(row[3]) - row[5]) < 5e-8);
  }
}

TEST_CASE("simulate exports are reproducible and carry a manifest") {
  const fs::path a = scratch() / "sim_a.txt";
  const fs::path b = scratch() / "sim_b.txt";
  const fs::path c = scratch() / "sim_c.txt";
  const std::string common =
      "simulate --family sapsk --m 16 --gamma 2 --detector gapd "
      "--sigma-phi2 1e-3 --snr 10:5:20 --target-errors 50 "
      "--max-trials 65536 --workers 2 --extended --out ";
  REQUIRE(run(common + a.string() + " --seed 7") == 0);
  REQUIRE(run(common + b.string() + " --seed 7") == 0);
  REQUIRE(run(common + c.string() + " --seed 8") == 0);
  const std::string text = slurp(a);
  CHECK(text == slurp(b));                    // same seed: byte-identical
  CHECK(text != slurp(c));                    // seed is load-bearing
  CHECK(text.find("# command simulate") != std::string::npos);
  CHECK(text.find("# kernels ") != std::string::npos);
  CHECK(text.find("# seed 7") != std::string::npos);
  REQUIRE(parse_rows(text).size() == 3);      // 10, 15, 20 dB
  for (const auto& row : parse_rows(text)) REQUIRE(row.size() == 6);

  // The sidecar manifest repeats the header block exactly.
  const std::string manifest = slurp(a.string() + ".manifest");
  CHECK(manifest == slurp(b.string() + ".manifest"));
  CHECK(manifest.find("# command simulate") == 0);
  CHECK(manifest.find("# family sapsk") != std::string::npos);
  CHECK(manifest.find("# detector gapd") != std::string::npos);
  CHECK(text.find(manifest.substr(manifest.find("# family"))) !=
        std::string::npos);
}

TEST_CASE("exit codes separate success, domain errors, and usage errors") {
  CHECK(run("--help") == 0);
  CHECK(run("constellation --help") == 0);

  // Domain error: 48 is not a perfect square, so the QAM builder refuses.
  const fs::path never = scratch() / "never_written.txt";
  fs::remove(never);
  CHECK(run("constellation --family qam --m 48 --out " + never.string()) == 1);
  CHECK_FALSE(fs::exists(never));  // no partial output on failure

  // Usage errors: contradictory or malformed invocations.
  CHECK(run("constellation --family qam --m 16 --gamma 2") == 2);
  CHECK(run("constellation --family sapsk --m 16") == 2);  // gamma required
  CHECK(run("constellation --no-such-flag") == 2);
  CHECK(run("") == 2);                                      // no subcommand
  CHECK(run("simulate --family qam --m 16 --detector fast --snr 20") == 2);
  CHECK(run("simulate --family sapsk --m 16 --gamma 2 --snr 20:bogus") == 2);
}

TEST_CASE("stdout output matches the file output byte for byte") {
  const fs::path via_file = scratch() / "stdout_a.txt";
  const fs::path via_pipe = scratch() / "stdout_b.txt";
  REQUIRE(run("constellation --family qam --m 16 --out " + via_file.string()) ==
          0);
  REQUIRE(run("constellation --family qam --m 16",
              " > " + via_pipe.string() + " 2>/dev/null") == 0);
  CHECK(slurp(via_file) == slurp(via_pipe));
}

TEST_CASE("closed-form subcommands print the model values") {
  const fs::path analyze = scratch() / "analyze.txt";
  REQUIRE(run("analyze --m 4096 --gamma 512 --sigma-phi2 1e-2 --snr 56 "
              "--out " +
              analyze.string()) == 0);
  const auto sep_rows = parse_rows(slurp(analyze));
  REQUIRE(sep_rows.size() == 1);
  REQUIRE(sep_rows[0].size() == 2);
  CHECK(sep_rows[0][0] == 56.0);
  CHECK(sep_rows[0][1] == doctest::Approx(0.03689007062).epsilon(1e-8));

  const fs::path optimize = scratch() / "optimize.txt";
  REQUIRE(run("optimize --m 64 --sigma-phi2 1e-2 --snr 14:16:30 --extended "
              "--out " +
              optimize.string()) == 0);
  const auto opt_rows = parse_rows(slurp(optimize));
  REQUIRE(opt_rows.size() == 2);
  REQUIRE(opt_rows[0].size() == 3);
  CHECK(opt_rows[0][0] == 14.0);
  CHECK(opt_rows[0][1] == 8.0);
  CHECK(opt_rows[0][2] == doctest::Approx(4.595286346e-01).epsilon(1e-8));
  CHECK(opt_rows[1][0] == 30.0);
  CHECK(opt_rows[1][1] == 16.0);
}

TEST_CASE("noiseless channel simulates to an exact zero error rate") {
  const fs::path out = scratch() / "noiseless.txt";
  REQUIRE(run("simulate --family sapsk --m 16 --gamma 2 --detector eucd "
              "--sigma-phi2 0 --zero-awgn --snr 20 --target-errors 0 "
              "--max-trials 65536 --extended --out " +
              out.string()) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("# zero_awgn 1") != std::string::npos);
  const auto rows = parse_rows(text);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0][1] == 0.0);       // sep
  CHECK(rows[0][3] == 0.0);       // errors
  CHECK(rows[0][4] == 65536.0);   // trials: the full budget ran
}

TEST_CASE("environment variables supply the seed and kernel choice") {
  const fs::path out = scratch() / "env.txt";
  const std::string args =
      "simulate --family sapsk --m 16 --gamma 2 --snr 10 --target-errors 10 "
      "--max-trials 65536 --out " +
      out.string();
  const int status = std::system(
      ("SAPSK_SEED=99 SAPSK_KERNELS=scalar " + cli() + " " + args +
       " >/dev/null 2>&1")
          .c_str());
  REQUIRE(WIFEXITED(status));
  REQUIRE(WEXITSTATUS(status) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("# seed 99") != std::string::npos);
  CHECK(text.find("# kernels scalar") != std::string::npos);
}

TEST_CASE("bench produces a timing row per configuration") {
  const fs::path out = scratch() / "bench.txt";
  REQUIRE(run("bench --m 64 --detectors eucd fast --trials 2000 --snr 20 "
              "--sigma-phi2 1e-4 --out " +
              out.string()) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("# command bench") != std::string::npos);
  CHECK(text.find("# columns order rings detector trials mean_ns "
                  "msymbols_per_s") != std::string::npos);
  CHECK(text.find(" eucd ") != std::string::npos);
  CHECK(text.find(" fast ") != std::string::npos);
  std::istringstream lines(text);
  std::string line;
  size_t data_rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    unsigned order = 0, rings = 0;
    char name[16] = {0};
    unsigned long long trials = 0;
    double mean_ns = 0.0, throughput = 0.0;
    REQUIRE(std::sscanf(line.c_str(), "%u %u %15s %llu %lf %lf", &order,
                        &rings, name, &trials, &mean_ns, &throughput) == 6);
    CHECK(order == 64);
    CHECK(trials == 2000);
    CHECK(mean_ns > 0.0);
    CHECK(throughput > 0.0);
    ++data_rows;
  }
  CHECK(data_rows == 2);
  CHECK(run("bench --m 64 --detectors eucd --trials 0 --snr 20") == 2);
}
