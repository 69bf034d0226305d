#pragma once

// File formats:
//   system JSON   {"n", "N", "A" (n rows of N), "B" (N rows of n), "x0"}
//   LV JSON       {"N", "M", "u0", "invariant_BA"}
//   series JSON   {"t0", "order", "coeffs"}
//   trajectory    CSV with header t,x1,...,xn at 17 significant digits

#include <string>
#include <string_view>

#include "qpflow/integrate.hpp"
#include "qpflow/qp_core.hpp"
#include "qpflow/series.hpp"

namespace qpflow {

std::string system_to_json(const QpSystem& sys);
// Rejects unknown keys; throws SyntaxError or DimensionMismatch.
QpSystem system_from_json(std::string_view text);

std::string lv_to_json(const LvEmbedding& emb);

std::string series_to_json(const SeriesBundle& s);
SeriesBundle series_from_json(std::string_view text);

std::string trajectory_to_csv(const Trajectory& traj);
std::string trajectory_to_json(const Trajectory& traj);

std::string format_double(double v);

std::string read_file(const std::string& path);
// Writes to a sibling temporary and renames it over path.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace qpflow
