#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "../tools/commands.hpp"
#include "doctest.h"
#include "qpflow/io.hpp"

using qpflow::cli::run_cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string bundled(const std::string& name) { return std::string(QPFLOW_SYSTEMS_DIR) + "/" + name; }

class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() / "qpflow_cli_test") {
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name, const std::string& content) const {
    const std::string p = (path_ / name).string();
    qpflow::write_file_atomic(p, content);
    return p;
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace

TEST_CASE("solve writes a CSV trajectory") {
  const Result r = invoke({"solve", "--system", bundled("logistic.qp"), "--t-end", "2"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("t,x1\n0,0.5\n", 0) == 0);
  CHECK(r.err.find("accepted=") != std::string::npos);

  // byte-identical across runs
  CHECK(invoke({"solve", "--system", bundled("logistic.qp"), "--t-end", "2"}).out == r.out);

  const Result j = invoke({"solve", "--system", bundled("predator_prey.qp"), "--t-end", "1", "--format", "json"});
  CHECK(j.code == 0);
  CHECK(j.out.find("\"meta\"") != std::string::npos);
}

TEST_CASE("solve to a file") {
  TempDir dir;
  const std::string out = dir.path("traj.csv");
  const Result r = invoke({"solve", "--system", bundled("logistic.qp"), "--t-end", "1", "--out", out});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(qpflow::read_file(out).rfind("t,x1\n", 0) == 0);
}

TEST_CASE("input errors exit with 2") {
  TempDir dir;
  const Result missing = invoke({"solve", "--system", dir.path("none.qp"), "--t-end", "1"});
  CHECK(missing.code == 2);
  CHECK(missing.err.rfind("error[IoError]: ", 0) == 0);

  const Result syntax = invoke({"solve", "--system", dir.file("bad.qp", "x' = x +\n"), "--t-end", "1"});
  CHECK(syntax.code == 2);
  CHECK(syntax.err.rfind("error[SyntaxError]: ", 0) == 0);

  const Result notqp = invoke({"solve", "--system", dir.file("f.qp", "x' = sin(x); x(0) = 1\n"), "--t-end", "1"});
  CHECK(notqp.code == 2);
  CHECK(notqp.err.rfind("error[NotQuasiPolynomial]: ", 0) == 0);

  CHECK(invoke({"solve", "--system", bundled("logistic.qp"), "--t-end", "1", "--tol", "-1"}).code == 2);
  CHECK(invoke({"solve", "--system", bundled("logistic.qp"), "--t-end", "1", "--order", "2"}).code == 2);
  CHECK(invoke({"solve", "--system", bundled("logistic.qp"), "--t-end", "1", "--format", "xml"}).code == 2);
  CHECK(invoke({"solve", "--t-end", "1"}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
}

TEST_CASE("numerical failures exit with 3") {
  TempDir dir;
  const Result blow = invoke({"solve", "--system", dir.file("sq.qp", "x' = x^2; x(0) = 1\n"), "--t-end", "2"});
  CHECK(blow.code == 3);
  CHECK(blow.err.rfind("error[StepUnderflow]: ", 0) == 0);

  const std::string singular = dir.file("sing.qp", "x' = x^2*y; y' = 2*x^2*y^3; x(0)=1; y(0)=1\n");
  const Result sq = invoke({"canonicalize", "--system", singular, "--square"});
  CHECK(sq.code == 3);
  CHECK(sq.err.rfind("error[SingularB]: ", 0) == 0);
}

TEST_CASE("canonicalize matches the stored fixtures") {
  for (const std::string name : {"logistic", "predator_prey", "nonsquare"}) {
    CAPTURE(name);
    const Result r = invoke({"canonicalize", "--system", bundled(name + ".qp")});
    CHECK(r.code == 0);
    CHECK(r.out == qpflow::read_file(bundled("expected/" + name + ".lv.json")));
  }
  const Result sq = invoke({"canonicalize", "--system", bundled("predator_prey.qp"), "--square"});
  CHECK(sq.code == 2);
  CHECK(sq.err.rfind("error[NotSquare]: ", 0) == 0);
}

TEST_CASE("verify reports pass") {
  const Result r = invoke({"verify", "--system", bundled("logistic.qp"), "--t-end", "5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("result=pass") != std::string::npos);
}

TEST_CASE("tensor enumeration") {
  const Result r = invoke({"tensor", "--N", "2", "--k", "2", "--i", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("i,i1,i2,j1,j2,value\n", 0) == 0);
  CHECK(r.out.find("1,1,1,1,1,2\n") != std::string::npos);
  CHECK(r.err.find("row_sum_check=pass") != std::string::npos);
  CHECK(invoke({"tensor", "--N", "2", "--k", "2", "--i", "3"}).code == 2);
}

TEST_CASE("coeffs and the oracle budget") {
  const Result r = invoke({"coeffs", "--system", bundled("predator_prey.qp"), "--k", "4"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("form,i,k,series,oracle,rel_dev\n", 0) == 0);
  CHECK(r.out.find("NA") == std::string::npos);

  setenv("QPFLOW_BUDGET", "10", 1);
  const Result capped = invoke({"coeffs", "--system", bundled("predator_prey.qp"), "--k", "4"});
  unsetenv("QPFLOW_BUDGET");
  CHECK(capped.code == 0);
  CHECK(capped.out.find("NA") != std::string::npos);
}
