#pragma once

// Brute-force enumeration of the closed-form Taylor coefficients and of the
// generalized factorial tensor
//
//   T(i; i_1..i_k; j_1..j_k) = d(i,j_1) (d(i,j_2) + d(i_1,j_2)) ...
//                              (d(i,j_k) + d(i_1,j_k) + ... + d(i_{k-1},j_k)).
//
// These are ground-truth oracles with cost N^k (or N^2k); every entry point
// takes an enumeration budget and throws BudgetExceeded above it. Indices in
// this API are 0-based; the CLI prints them 1-based.

#include <cstdint>
#include <functional>
#include <vector>

#include "qpflow/qp_core.hpp"

namespace qpflow {

inline constexpr std::uint64_t kDefaultBudget = 100'000'000;

struct TensorIndex {
  int i = 0;
  std::vector<int> upper;  // i_1..i_k
  std::vector<int> lower;  // j_1..j_k

  int k() const noexcept { return static_cast<int>(upper.size()); }
};

// c_i(k) = u0_i * sum_{i_1..i_k} M_{i i_1} (M_{i i_2} + M_{i_1 i_2}) ...
//          (M_{i i_k} + ... + M_{i_{k-1} i_k}) * u0_{i_1} ... u0_{i_k}
double direct_lv_coefficient(const Matrix& M, const Vector& u0, int i, int k,
                             std::uint64_t budget = kDefaultBudget);

// C_i(k) = x0_i * sum_{i_1..i_k} A_{i i_1} (A_{i i_2} + M_{i_1 i_2}) ...
//          (A_{i i_k} + M_{i_1 i_k} + ... + M_{i_{k-1} i_k}) * u0_{i_1} ... u0_{i_k}
// with M = BA and u0_j = prod_l x0_l^B_jl.
double direct_qp_coefficient(const Matrix& A, const Matrix& B, const Vector& x0, int i, int k,
                             std::uint64_t budget = kDefaultBudget);

// Throws InvalidArgument unless every index is in 0..N-1 and the tuples have
// equal length.
void validate(const TensorIndex& idx, int N);

std::uint64_t factorial_tensor_entry(const TensorIndex& idx);

struct ContractedProduct {
  double lhs;  // product form, summed over i_1..i_k
  double rhs;  // doubled-sum form with tensor entries, summed over i_*, j_*
};

ContractedProduct contracted_product_check(const Matrix& M, const Vector& u0, int i, int k,
                                           std::uint64_t budget = kDefaultBudget);

// Sum of the tensor over all lower tuples; equals k! for every (i, upper).
std::uint64_t tensor_sum_over_lower(int i, const std::vector<int>& upper, int N,
                                    std::uint64_t budget = kDefaultBudget);

using TensorVisitor = std::function<void(const TensorIndex&, std::uint64_t)>;

// Visits every nonzero entry with first index i in lexicographic order of
// (upper, lower).
void tensor_nonzero_enumerate(int N, int k, int i, const TensorVisitor& visit,
                              std::uint64_t budget = kDefaultBudget);

std::vector<std::pair<TensorIndex, std::uint64_t>> tensor_nonzero_entries(
    int N, int k, int i, std::uint64_t budget = kDefaultBudget);

std::uint64_t factorial(int k);

}  // namespace qpflow
