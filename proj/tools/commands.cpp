#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "qpflow/error.hpp"
#include "qpflow/integrate.hpp"
#include "qpflow/io.hpp"
#include "qpflow/oracle.hpp"
#include "qpflow/parser.hpp"
#include "qpflow/qp_core.hpp"
#include "qpflow/rk_reference.hpp"
#include "qpflow/series.hpp"

namespace qpflow::cli {

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveState:
    case ErrorCode::SingularTransform:
    case ErrorCode::SingularB:
    case ErrorCode::Overflow:
    case ErrorCode::StepUnderflow:
    case ErrorCode::PositivityLoss:
      return kNumericalFailure;
    default:
      return kInputError;
  }
}

void report_error(std::ostream& err, std::string_view code, std::string message) {
  std::replace(message.begin(), message.end(), '\n', ' ');
  err << "error[" << code << "]: " << message << "\n";
}

void emit(const RunConfig& cfg, std::ostream& out, const std::string& data) {
  if (cfg.out_path.empty()) {
    out << data;
  } else {
    write_file_atomic(cfg.out_path, data);
  }
}

std::uint64_t oracle_budget() {
  const char* env = std::getenv("QPFLOW_BUDGET");
  if (env == nullptr || *env == '\0') return kDefaultBudget;
  std::uint64_t value = 0;
  const std::string_view text(env);
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidArgument, "QPFLOW_BUDGET must be a non-negative integer");
  }
  return value;
}

ParsedSystem load_system(const RunConfig& cfg) {
  if (cfg.system_path.empty()) throw Error(ErrorCode::InvalidArgument, "--system is required");
  return parse_named_system(read_file(cfg.system_path));
}

void require_t_end(const RunConfig& cfg) {
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) {
    throw Error(ErrorCode::InvalidArgument, "--t-end must be a positive number");
  }
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_t_end(cfg);
  const ParsedSystem parsed = load_system(cfg);
  const TaylorSolution sol = taylor_solve(parsed.system, cfg.t_end, TaylorOptions{cfg.tol, cfg.order});
  const Trajectory& traj = sol.trajectory();
  emit(cfg, out, cfg.format == "json" ? trajectory_to_json(traj) : trajectory_to_csv(traj));
  err << fmt::format("first_radius={} accepted={} rejected={} order={} tol={}\n",
                     std::isinf(traj.meta.first_radius) ? std::string("unbounded")
                                                        : fmt::format("{:.6g}", traj.meta.first_radius),
                     traj.meta.accepted, traj.meta.rejected, traj.meta.order, traj.meta.tol);
  return kSuccess;
}

int cmd_canonicalize(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const ParsedSystem parsed = load_system(cfg);
  const LvEmbedding emb = to_lotka_volterra(parsed.system);
  auto doc = nlohmann::ordered_json::parse(lv_to_json(emb));
  if (cfg.square) {
    doc["square"] = nlohmann::ordered_json::parse(system_to_json(square_canonicalize(parsed.system)));
  }
  emit(cfg, out, doc.dump(2) + "\n");
  return kSuccess;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require_t_end(cfg);
  const ParsedSystem parsed = load_system(cfg);
  const Trajectory rk = rk_reference(parsed.system, cfg.t_end, RkOptions{cfg.tol});
  const TaylorSolution taylor =
      taylor_solve(parsed.system, cfg.t_end, TaylorOptions{cfg.tol, cfg.order});

  double worst = 0.0;
  double worst_t = 0.0;
  for (std::size_t s = 0; s < rk.size(); ++s) {
    const Vector xt = taylor.evaluate(rk.times[s]);
    for (Eigen::Index i = 0; i < xt.size(); ++i) {
      const double ref = rk.states[s][i];
      const double dev = std::abs(xt[i] - ref) / std::abs(ref);
      if (dev > worst) {
        worst = dev;
        worst_t = rk.times[s];
      }
    }
  }
  const double threshold = 10.0 * cfg.tol;
  const bool pass = worst < threshold;
  out << fmt::format(
      "max_rel_deviation={:.3e} at_t={:.6g} threshold={:.3e} rk_samples={} taylor_steps={} "
      "result={}\n",
      worst, worst_t, threshold, rk.size(), taylor.trajectory().meta.accepted,
      pass ? "pass" : "fail");
  return pass ? kSuccess : kVerificationFailure;
}

int cmd_tensor(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.N < 1) throw Error(ErrorCode::InvalidArgument, "--N must be >= 1");
  if (cfg.k < 0) throw Error(ErrorCode::InvalidArgument, "--k must be >= 0");
  if (cfg.i < 1 || cfg.i > cfg.N) throw Error(ErrorCode::InvalidArgument, "--i must be in 1..N");
  const std::uint64_t budget = oracle_budget();

  std::string csv = "i";
  for (int m = 1; m <= cfg.k; ++m) csv += fmt::format(",i{}", m);
  for (int m = 1; m <= cfg.k; ++m) csv += fmt::format(",j{}", m);
  csv += ",value\n";

  std::map<std::vector<int>, std::uint64_t> row_sums;
  std::uint64_t count = 0;
  tensor_nonzero_enumerate(
      cfg.N, cfg.k, cfg.i - 1,
      [&](const TensorIndex& idx, std::uint64_t value) {
        csv += std::to_string(idx.i + 1);
        for (int v : idx.upper) csv += "," + std::to_string(v + 1);
        for (int v : idx.lower) csv += "," + std::to_string(v + 1);
        csv += "," + std::to_string(value) + "\n";
        row_sums[idx.upper] += value;
        ++count;
      },
      budget);
  emit(cfg, out, csv);

  const std::uint64_t expected = factorial(cfg.k);
  const bool pass = std::all_of(row_sums.begin(), row_sums.end(),
                                [&](const auto& kv) { return kv.second == expected; }) &&
                    row_sums.size() == static_cast<std::size_t>(std::pow(cfg.N, cfg.k));
  err << fmt::format("nonzero_entries={} upper_tuples={} row_sum_check={} (k! = {})\n", count,
                     row_sums.size(), pass ? "pass" : "fail", expected);
  return pass ? kSuccess : kVerificationFailure;
}

std::string deviation_cell(std::optional<double> oracle, double series) {
  if (!oracle) return "NA,NA";
  const double scale = std::max(std::abs(*oracle), std::abs(series));
  const double dev = scale == 0.0 ? 0.0 : std::abs(series - *oracle) / scale;
  return format_double(*oracle) + "," + fmt::format("{:.3e}", dev);
}

int cmd_coeffs(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.k < 0) throw Error(ErrorCode::InvalidArgument, "--k must be >= 0");
  const std::uint64_t budget = oracle_budget();
  const ParsedSystem parsed = load_system(cfg);
  const QpSystem& sys = parsed.system;
  const LvEmbedding emb = to_lotka_volterra(sys);
  const SeriesBundle lv = lv_taylor_coefficients(emb.lv, cfg.k);
  const SeriesBundle qp = qp_taylor_coefficients(sys, cfg.k);

  auto try_oracle = [](auto&& fn) -> std::optional<double> {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BudgetExceeded) throw;
      return std::nullopt;
    }
  };

  std::string csv = "form,i,k,series,oracle,rel_dev\n";
  for (int i = 0; i < emb.lv.N(); ++i) {
    for (int k = 0; k <= cfg.k; ++k) {
      const double series = lv.coeff(i, k) * static_cast<double>(factorial(k));
      const auto oracle = try_oracle(
          [&] { return direct_lv_coefficient(emb.lv.M(), emb.lv.u0(), i, k, budget); });
      csv += fmt::format("lv,{},{},{},{}\n", i + 1, k, format_double(series),
                         deviation_cell(oracle, series));
    }
  }
  for (int i = 0; i < sys.n(); ++i) {
    for (int k = 0; k <= cfg.k; ++k) {
      const double series = qp.coeff(i, k) * static_cast<double>(factorial(k));
      const auto oracle = try_oracle(
          [&] { return direct_qp_coefficient(sys.A(), sys.B(), sys.x0(), i, k, budget); });
      csv += fmt::format("qp,{},{},{},{}\n", i + 1, k, format_double(series),
                         deviation_cell(oracle, series));
    }
  }
  emit(cfg, out, csv);
  return kSuccess;
}

void validate(const RunConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "--tol must be positive");
  if (cfg.order < 4 || cfg.order > 60) {
    throw Error(ErrorCode::InvalidArgument, "--order must be in 4..60");
  }
  if (cfg.format != "csv" && cfg.format != "json") {
    throw Error(ErrorCode::InvalidArgument, "--format must be csv or json");
  }
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
    if (cfg.command == "solve") return cmd_solve(cfg, out, err);
    if (cfg.command == "canonicalize") return cmd_canonicalize(cfg, out, err);
    if (cfg.command == "verify") return cmd_verify(cfg, out, err);
    if (cfg.command == "tensor") return cmd_tensor(cfg, out, err);
    if (cfg.command == "coeffs") return cmd_coeffs(cfg, out, err);
    throw Error(ErrorCode::InvalidArgument, "unknown command '" + cfg.command + "'");
  } catch (const Error& e) {
    report_error(err, to_string(e.code()), e.what());
    return exit_code_for(e.code());
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Taylor-series solver for quasi-polynomial ODE systems", "qpflow"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_system = [&](CLI::App* sub) {
    sub->add_option("--system", cfg.system_path, "system file (text or JSON)")->required();
  };
  auto add_numeric = [&](CLI::App* sub, bool t_end_required) {
    auto* t = sub->add_option("--t-end", cfg.t_end, "final time");
    if (t_end_required) t->required();
    sub->add_option("--tol", cfg.tol, "tolerance")->capture_default_str();
    sub->add_option("--order", cfg.order, "Taylor order (4..60)")->capture_default_str();
  };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out_path, "output file (default: stdout)");
  };

  auto* solve = app.add_subcommand("solve", "integrate a system by Taylor stepping");
  add_system(solve);
  add_numeric(solve, true);
  add_out(solve);
  solve->add_option("--format", cfg.format, "csv or json")->capture_default_str();

  auto* canon = app.add_subcommand("canonicalize", "Lotka-Volterra canonical form");
  add_system(canon);
  add_out(canon);
  canon->add_flag("--square", cfg.square, "also apply the C = B^-1 transform");

  auto* verify = app.add_subcommand("verify", "compare Taylor and Runge-Kutta solutions");
  add_system(verify);
  add_numeric(verify, true);

  auto* tensor = app.add_subcommand("tensor", "enumerate nonzero factorial tensor entries");
  tensor->add_option("--N", cfg.N, "dimension")->required();
  tensor->add_option("--k", cfg.k, "order")->required();
  tensor->add_option("--i", cfg.i, "first index (1-based)")->required();
  add_out(tensor);

  auto* coeffs = app.add_subcommand("coeffs", "series coefficients against the direct formulas");
  add_system(coeffs);
  coeffs->add_option("--k", cfg.k, "highest order")->required();
  add_out(coeffs);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kSuccess;
    }
    report_error(err, "InvalidArgument", e.what());
    return kInputError;
  }

  for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
  return run(cfg, out, err);
}

}  // namespace qpflow::cli
