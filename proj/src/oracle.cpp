#include "qpflow/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qpflow/error.hpp"

namespace qpflow {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

std::uint64_t saturating_pow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int e = 0; e < exp; ++e) r = saturating_mul(r, base);
  return r;
}

void charge(std::uint64_t terms, std::uint64_t budget) {
  if (terms > budget) {
    throw Error(ErrorCode::BudgetExceeded,
                (terms == kSaturated ? std::string("more than 2^64")
                                     : std::to_string(terms)) +
                    " terms exceed the enumeration budget of " + std::to_string(budget));
  }
}

void require_index(int value, int N, const char* what) {
  if (value < 0 || value >= N) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " index " +
                                                std::to_string(value) + " is outside 0.." +
                                                std::to_string(N - 1));
  }
}

void require_order(int k) {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "order k must be >= 0");
}

// Advances a base-N odometer; returns false after the last tuple.
bool next_tuple(std::vector<int>& digits, int N) {
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (++*it < N) return true;
    *it = 0;
  }
  return false;
}

// Depth-first evaluation of
//   sum_{i_1..i_k} prod_m (lead(i_m) + sum_{l<m} M(i_l, i_m)) * w(i_1)...w(i_k)
// where lead is row `lead_row` of `lead`.
struct NestedSum {
  const Matrix& lead;
  int lead_row;
  const Matrix& M;
  const Vector& w;
  int k;
  std::vector<int> chosen;

  double run(int depth, double partial) {
    if (depth == k) return partial;
    double total = 0.0;
    const auto N = static_cast<int>(M.rows());
    for (int c = 0; c < N; ++c) {
      double factor = lead(lead_row, c);
      for (int l = 0; l < depth; ++l) factor += M(chosen[static_cast<std::size_t>(l)], c);
      chosen[static_cast<std::size_t>(depth)] = c;
      total += run(depth + 1, partial * factor * w[c]);
    }
    return total;
  }
};

}  // namespace

std::uint64_t factorial(int k) {
  std::uint64_t r = 1;
  for (int m = 2; m <= k; ++m) r = saturating_mul(r, static_cast<std::uint64_t>(m));
  return r;
}

double direct_lv_coefficient(const Matrix& M, const Vector& u0, int i, int k,
                             std::uint64_t budget) {
  if (M.rows() != M.cols() || u0.size() != M.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "M must be square and match u0");
  }
  const auto N = static_cast<int>(M.rows());
  require_index(i, N, "component");
  require_order(k);
  charge(saturating_pow(static_cast<std::uint64_t>(N), k), budget);
  if (k == 0) return u0[i];
  NestedSum sum{M, i, M, u0, k, std::vector<int>(static_cast<std::size_t>(k), 0)};
  return u0[i] * sum.run(0, 1.0);
}

double direct_qp_coefficient(const Matrix& A, const Matrix& B, const Vector& x0, int i, int k,
                             std::uint64_t budget) {
  if (B.rows() != A.cols() || B.cols() != A.rows() || x0.size() != A.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "A, B and x0 dimensions are inconsistent");
  }
  const auto n = static_cast<int>(A.rows());
  const auto N = static_cast<int>(A.cols());
  require_index(i, n, "component");
  require_order(k);
  charge(saturating_pow(static_cast<std::uint64_t>(N), k), budget);
  if (k == 0) return x0[i];

  const Matrix M = B * A;
  Vector u0(N);
  for (int j = 0; j < N; ++j) {
    double p = 1.0;
    for (int l = 0; l < n; ++l) p *= std::pow(x0[l], B(j, l));
    u0[j] = p;
  }
  NestedSum sum{A, i, M, u0, k, std::vector<int>(static_cast<std::size_t>(k), 0)};
  return x0[i] * sum.run(0, 1.0);
}

void validate(const TensorIndex& idx, int N) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "tensor dimension N must be >= 1");
  if (idx.upper.size() != idx.lower.size()) {
    throw Error(ErrorCode::InvalidArgument, "upper and lower tuples differ in length");
  }
  require_index(idx.i, N, "i");
  for (int v : idx.upper) require_index(v, N, "upper");
  for (int v : idx.lower) require_index(v, N, "lower");
}

std::uint64_t factorial_tensor_entry(const TensorIndex& idx) {
  if (idx.upper.size() != idx.lower.size()) {
    throw Error(ErrorCode::InvalidArgument, "upper and lower tuples differ in length");
  }
  std::uint64_t value = 1;
  for (std::size_t m = 0; m < idx.lower.size(); ++m) {
    const int j = idx.lower[m];
    std::uint64_t factor = (idx.i == j) ? 1 : 0;
    for (std::size_t l = 0; l < m; ++l) factor += (idx.upper[l] == j) ? 1 : 0;
    if (factor == 0) return 0;
    value *= factor;
  }
  return value;
}

ContractedProduct contracted_product_check(const Matrix& M, const Vector& u0, int i, int k,
                                           std::uint64_t budget) {
  if (M.rows() != M.cols() || u0.size() != M.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "M must be square and match u0");
  }
  const auto N = static_cast<int>(M.rows());
  require_index(i, N, "component");
  require_order(k);
  const std::uint64_t per_side = saturating_pow(static_cast<std::uint64_t>(N), k);
  charge(saturating_mul(per_side, per_side), budget);

  const auto len = static_cast<std::size_t>(k);
  TensorIndex idx{i, std::vector<int>(len, 0), std::vector<int>(len, 0)};
  double lhs = 0.0;
  double rhs = 0.0;
  do {
    double weight = u0[i];
    for (int c : idx.upper) weight *= u0[c];

    double product = 1.0;
    for (std::size_t m = 0; m < len; ++m) {
      double factor = M(i, idx.upper[m]);
      for (std::size_t l = 0; l < m; ++l) factor += M(idx.upper[l], idx.upper[m]);
      product *= factor;
    }
    lhs += product * weight;

    std::fill(idx.lower.begin(), idx.lower.end(), 0);
    double doubled = 0.0;
    do {
      const std::uint64_t t = factorial_tensor_entry(idx);
      if (t == 0) continue;
      double contraction = static_cast<double>(t);
      for (std::size_t m = 0; m < len; ++m) contraction *= M(idx.lower[m], idx.upper[m]);
      doubled += contraction;
    } while (next_tuple(idx.lower, N));
    rhs += doubled * weight;
  } while (next_tuple(idx.upper, N));
  return {lhs, rhs};
}

std::uint64_t tensor_sum_over_lower(int i, const std::vector<int>& upper, int N,
                                    std::uint64_t budget) {
  TensorIndex idx{i, upper, std::vector<int>(upper.size(), 0)};
  validate(idx, N);
  charge(saturating_pow(static_cast<std::uint64_t>(N), idx.k()), budget);
  std::uint64_t total = 0;
  do {
    total += factorial_tensor_entry(idx);
  } while (next_tuple(idx.lower, N));
  return total;
}

void tensor_nonzero_enumerate(int N, int k, int i, const TensorVisitor& visit,
                              std::uint64_t budget) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "tensor dimension N must be >= 1");
  require_index(i, N, "i");
  require_order(k);
  // Each upper tuple admits at most k! nonzero lower tuples.
  charge(saturating_mul(saturating_pow(static_cast<std::uint64_t>(N), k), factorial(k)),
         budget);

  const auto len = static_cast<std::size_t>(k);
  TensorIndex idx{i, std::vector<int>(len, 0), std::vector<int>(len, 0)};

  // j_m must be one of {i, i_1, ..., i_{m-1}}; its factor is the multiplicity.
  std::function<void(std::size_t, std::uint64_t)> lower = [&](std::size_t m,
                                                              std::uint64_t value) {
    if (m == len) {
      visit(idx, value);
      return;
    }
    for (int j = 0; j < N; ++j) {
      std::uint64_t mult = (j == i) ? 1 : 0;
      for (std::size_t l = 0; l < m; ++l) mult += (idx.upper[l] == j) ? 1 : 0;
      if (mult == 0) continue;
      idx.lower[m] = j;
      lower(m + 1, value * mult);
    }
  };
  do {
    lower(0, 1);
  } while (next_tuple(idx.upper, N));
}

std::vector<std::pair<TensorIndex, std::uint64_t>> tensor_nonzero_entries(int N, int k, int i,
                                                                          std::uint64_t budget) {
  std::vector<std::pair<TensorIndex, std::uint64_t>> out;
  tensor_nonzero_enumerate(
      N, k, i, [&out](const TensorIndex& idx, std::uint64_t v) { out.emplace_back(idx, v); },
      budget);
  return out;
}

}  // namespace qpflow
