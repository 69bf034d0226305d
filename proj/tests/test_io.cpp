#include <filesystem>

#include "doctest.h"
#include "qpflow/error.hpp"
#include "qpflow/io.hpp"
#include "qpflow/parser.hpp"
#include "test_support.hpp"

using namespace qpflow;
using qpflow::testing::Random;

namespace {

ErrorCode json_error(std::string_view text) {
  try {
    system_from_json(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error for: " << text);
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("system JSON round trip is exact") {
  Random rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    const QpSystem sys = rng.system(rng.integer(1, 3), rng.integer(1, 4));
    const QpSystem back = system_from_json(system_to_json(sys));
    CHECK(back.A() == sys.A());
    CHECK(back.B() == sys.B());
    CHECK(back.x0() == sys.x0());
  }
}

TEST_CASE("system JSON validation") {
  CHECK(json_error(R"({"n":1,"N":1,"A":[[1]],"B":[[1]],"x0":[1],"extra":0})") == ErrorCode::SyntaxError);
  CHECK(json_error(R"({"n":1,"N":1,"A":[[1]],"B":[[1]]})") == ErrorCode::SyntaxError);
  CHECK(json_error(R"({"n":1,"N":2,"A":[[1]],"B":[[1]],"x0":[1]})") == ErrorCode::DimensionMismatch);
  CHECK(json_error(R"({"n":1,"N":1,"A":[["a"]],"B":[[1]],"x0":[1]})") == ErrorCode::SyntaxError);
  CHECK(json_error(R"({"n":1,"N":1,"A":[[1]],"B":[[1]],"x0":[0]})") == ErrorCode::NonPositiveInitialCondition);
  CHECK(json_error("[1, 2]") == ErrorCode::SyntaxError);
  CHECK(json_error("{ not json") == ErrorCode::SyntaxError);
}

TEST_CASE("series JSON round trip") {
  const SeriesBundle s(0.25, 2, {SeriesRow{1.0, -0.5, 1.0 / 3.0}, SeriesRow{2.0, 0.0, 1e-300}});
  const SeriesBundle back = series_from_json(series_to_json(s));
  CHECK(back.t0() == 0.25);
  CHECK(back.order() == 2);
  CHECK(back.coeffs() == s.coeffs());
}

TEST_CASE("trajectory CSV") {
  Trajectory traj;
  traj.times = {0.0, 0.1};
  traj.states = {Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(1.0 / 3.0, 2.5)};
  CHECK(trajectory_to_csv(traj) ==
        "t,x1,x2\n0,1,2\n0.10000000000000001,0.33333333333333331,2.5\n");
}

TEST_CASE("atomic write replaces the target") {
  const auto dir = std::filesystem::temp_directory_path() / "qpflow_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.txt").string();
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  CHECK(!std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);

  try {
    read_file("/nonexistent/qpflow/file");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}
