#include "qpflow/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "qpflow/error.hpp"

namespace qpflow {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

ordered_json matrix_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json vector_json(const Vector& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json parse_object(std::string_view text, const std::set<std::string>& allowed) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::SyntaxError, "JSON document must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (allowed.count(key) == 0) throw Error(ErrorCode::SyntaxError, "unknown key '" + key + "'");
  }
  for (const auto& key : allowed) {
    if (!doc.contains(key)) throw Error(ErrorCode::SyntaxError, "missing key '" + key + "'");
  }
  return doc;
}

double number_at(const json& v, const char* what) {
  if (!v.is_number()) throw Error(ErrorCode::SyntaxError, std::string(what) + " entries must be numbers");
  return v.get<double>();
}

int int_at(const json& v, const char* what) {
  if (!v.is_number_integer()) throw Error(ErrorCode::SyntaxError, std::string(what) + " must be an integer");
  return v.get<int>();
}

Matrix matrix_at(const json& v, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != rows) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("{} must have {} rows", what, rows));
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::DimensionMismatch,
                  fmt::format("{} row {} must have {} entries", what, i, cols));
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = number_at(row[static_cast<std::size_t>(j)], what);
  }
  return m;
}

Vector vector_at(const json& v, Eigen::Index size, const char* what) {
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != size) {
    throw Error(ErrorCode::DimensionMismatch, fmt::format("{} must have {} entries", what, size));
  }
  Vector out(size);
  for (Eigen::Index i = 0; i < size; ++i) out[i] = number_at(v[static_cast<std::size_t>(i)], what);
  return out;
}

}  // namespace

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string system_to_json(const QpSystem& sys) {
  ordered_json doc;
  doc["n"] = sys.n();
  doc["N"] = sys.N();
  doc["A"] = matrix_json(sys.A());
  doc["B"] = matrix_json(sys.B());
  doc["x0"] = vector_json(sys.x0());
  return doc.dump(2) + "\n";
}

QpSystem system_from_json(std::string_view text) {
  const json doc = parse_object(text, {"n", "N", "A", "B", "x0"});
  const int n = int_at(doc["n"], "n");
  const int N = int_at(doc["N"], "N");
  if (n < 1 || N < 1) throw Error(ErrorCode::DimensionMismatch, "n and N must be positive");
  return QpSystem(matrix_at(doc["A"], n, N, "A"), matrix_at(doc["B"], N, n, "B"),
                  vector_at(doc["x0"], n, "x0"));
}

std::string lv_to_json(const LvEmbedding& emb) {
  ordered_json doc;
  doc["N"] = emb.lv.N();
  doc["M"] = matrix_json(emb.lv.M());
  doc["u0"] = vector_json(emb.lv.u0());
  doc["invariant_BA"] = matrix_json(invariant_matrix(emb.source));
  return doc.dump(2) + "\n";
}

std::string series_to_json(const SeriesBundle& s) {
  ordered_json doc;
  doc["t0"] = s.t0();
  doc["order"] = s.order();
  ordered_json rows = ordered_json::array();
  for (const auto& row : s.coeffs()) rows.push_back(row);
  doc["coeffs"] = std::move(rows);
  return doc.dump(2) + "\n";
}

SeriesBundle series_from_json(std::string_view text) {
  const json doc = parse_object(text, {"t0", "order", "coeffs"});
  const double t0 = number_at(doc["t0"], "t0");
  const int order = int_at(doc["order"], "order");
  if (order < 0) throw Error(ErrorCode::SyntaxError, "order must be >= 0");
  const json& rows = doc["coeffs"];
  if (!rows.is_array() || rows.empty()) throw Error(ErrorCode::SyntaxError, "coeffs must be a non-empty array");
  std::vector<SeriesRow> coeffs;
  for (const auto& row : rows) {
    const Vector v = vector_at(row, order + 1, "coeffs");
    coeffs.emplace_back(v.data(), v.data() + v.size());
  }
  return SeriesBundle(t0, order, std::move(coeffs));
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out = "t";
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  for (Eigen::Index i = 1; i <= n; ++i) out += fmt::format(",x{}", i);
  out += "\n";
  for (std::size_t s = 0; s < traj.size(); ++s) {
    out += format_double(traj.times[s]);
    for (Eigen::Index i = 0; i < n; ++i) out += "," + format_double(traj.states[s][i]);
    out += "\n";
  }
  return out;
}

std::string trajectory_to_json(const Trajectory& traj) {
  ordered_json doc;
  ordered_json meta;
  meta["method"] = traj.meta.method;
  meta["order"] = traj.meta.order;
  meta["tol"] = traj.meta.tol;
  meta["accepted"] = traj.meta.accepted;
  meta["rejected"] = traj.meta.rejected;
  doc["meta"] = std::move(meta);
  doc["t"] = traj.times;
  ordered_json states = ordered_json::array();
  for (const auto& x : traj.states) states.push_back(vector_json(x));
  doc["x"] = std::move(states);
  return doc.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::IoError, "write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move output into '" + path + "'");
  }
}

}  // namespace qpflow
