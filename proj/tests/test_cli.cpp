#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qtester/cli.hpp"
#include "qtester/io.hpp"
#include "qtester/ncomb.hpp"
#include "qtester/scenarios.hpp"

using namespace qtester;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("/tmp/qtester_test_" + name) {
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

}  // namespace

TEST_CASE("demo tv-th prints the maximal robustness and exits 0") {
  std::string text;
  int code = run_cli({"demo", "tv-th"}, &text);
  CHECK(code == cli::kExitSuccess);
  CHECK(text.find("0.500000") != std::string::npos);
  CHECK(text.find("NormalizationMismatch") != std::string::npos);
  CHECK(text.find("commuting:        true") != std::string::npos);
}

TEST_CASE("robustness state on orthogonal pure qubits prints 0.500000") {
  Matrix v0 = Matrix::Zero(2, 2), v1 = Matrix::Zero(2, 2);
  v0(0, 0) = 1;
  v1(1, 1) = 1;
  TempFile f0("rho0.json",
              io::state_to_json(DensityOperator(ComplexOperator(DimSignature({2}), v0))).dump());
  TempFile f1("rho1.json",
              io::state_to_json(DensityOperator(ComplexOperator(DimSignature({2}), v1))).dump());
  std::string text;
  int code = run_cli({"robustness", "state", f0.path, f1.path}, &text);
  CHECK(code == cli::kExitSuccess);
  CHECK(text.find("lambda: 0.500000") != std::string::npos);
}

TEST_CASE("compat on the Busch pair at 0.8 exits 1") {
  auto objs = scenarios::named_testers("busch", {0.8, 0.8, 2, 2});
  TempFile fa("busch_p8.json", io::povm_to_json(objs.povms[0]).dump());
  TempFile fb("busch_q8.json", io::povm_to_json(objs.povms[1]).dump());
  std::string text;
  int code = run_cli({"compat", fa.path, fb.path}, &text);
  CHECK(code == cli::kExitNegative);
  CHECK(text.find("incompatible") != std::string::npos);

  auto inside = scenarios::named_testers("busch", {0.5, 0.5, 2, 2});
  TempFile fc("busch_p5.json", io::povm_to_json(inside.povms[0]).dump());
  TempFile fd("busch_q5.json", io::povm_to_json(inside.povms[1]).dump());
  code = run_cli({"compat", fc.path, fd.path}, &text);
  CHECK(code == cli::kExitSuccess);
}

TEST_CASE("validate: good tester exits 0, malformed JSON exits 2, invalid tester exits 1") {
  auto tv = scenarios::named_testers("t_v").testers.front();
  TempFile good("tv.json", io::tester_to_json(tv).dump());
  std::string text;
  CHECK(run_cli({"validate", good.path}, &text) == cli::kExitSuccess);
  CHECK(text.find("ancilla_free: true") != std::string::npos);

  TempFile broken("broken.json", "{ not json");
  CHECK(run_cli({"validate", broken.path}, &text) == cli::kExitUsage);
  CHECK(text.find("malformed JSON") != std::string::npos);

  auto j = io::tester_to_json(tv);
  j["elements"][0]["entries"][0][0] = 0.3;
  TempFile invalid("bad_tester.json", j.dump());
  CHECK(run_cli({"validate", invalid.path}, &text) == cli::kExitNegative);
}

TEST_CASE("usage errors exit 2") {
  std::string text;
  CHECK(run_cli({"robustness", "nonsense"}, &text) == cli::kExitUsage);
  CHECK(run_cli({"frobnicate"}, &text) == cli::kExitUsage);
}

TEST_CASE("sweep emits the pinned CSV header and is reproducible") {
  std::string a, b;
  CHECK(run_cli({"sweep", "--theta-steps", "2", "--phi-steps", "2"}, &a) == cli::kExitSuccess);
  CHECK(run_cli({"sweep", "--theta-steps", "2", "--phi-steps", "2"}, &b) == cli::kExitSuccess);
  CHECK(a == b);
  CHECK(a.rfind("theta,phi,in_m,lambda_state_bound,lambda_closed_form,lambda_sdp,"
                "lambda_measurement_upper\n",
                0) == 0);
  // 9 rows + header + trailing newline
  int lines = 0;
  for (char c : a)
    if (c == '\n') ++lines;
  CHECK(lines == 10);
}

TEST_CASE("demo polarization honors --degrees") {
  std::string rad, deg;
  CHECK(run_cli({"demo", "polarization", "--theta", "1.5707963267948966", "--phi",
                 "1.5707963267948966"},
                &rad) == cli::kExitSuccess);
  CHECK(run_cli({"demo", "polarization", "--degrees", "--theta", "90", "--phi", "90"}, &deg) ==
        cli::kExitSuccess);
  CHECK(rad.find("0.414214") != std::string::npos);
  CHECK(deg.find("0.414214") != std::string::npos);
}

TEST_CASE("robustness tester via files, both methods") {
  auto pair = scenarios::polarization_pair(M_PI / 2, M_PI / 2);
  TempFile fa("pol_a.json", io::tester_to_json(pair.a).dump());
  TempFile fb("pol_b.json", io::tester_to_json(pair.b).dump());
  std::string text;
  CHECK(run_cli({"robustness", "tester", fa.path, fb.path}, &text) == cli::kExitSuccess);
  CHECK(text.find("lambda: 0.414214") != std::string::npos);
  CHECK(run_cli({"robustness", "tester", "--method", "bisection", fa.path, fb.path}, &text) ==
        cli::kExitSuccess);
  CHECK(text.find("lambda: 0.414") != std::string::npos);
  CHECK(text.find("method: bisection") != std::string::npos);

  CHECK(run_cli({"compat", fa.path, fb.path}, &text) == cli::kExitNegative);
  CHECK(text.find("NormalizationMismatch") != std::string::npos);
}

TEST_CASE("validate accepts comb files") {
  auto comb = ncomb_from_choi(ChoiOperator::identity_channel(2));
  TempFile f("comb.json", io::ncomb_to_json(comb).dump());
  std::string text;
  CHECK(run_cli({"validate", f.path}, &text) == cli::kExitSuccess);
  CHECK(text.find("steps: 1") != std::string::npos);
}

TEST_CASE("sweep golden first data row") {
  std::string csv;
  CHECK(run_cli({"sweep", "--theta-steps", "2", "--phi-steps", "2"}, &csv) ==
        cli::kExitSuccess);
  CHECK(csv.find("\n0.000000,0.000000,1,0.000000,0.000000,0.000000,0.000000\n") !=
        std::string::npos);
}

TEST_CASE("demo mub reports the computed ceiling") {
  std::string text;
  CHECK(run_cli({"demo", "mub"}, &text) == cli::kExitSuccess);
  CHECK(text.find("0.250000") != std::string::npos);
}
