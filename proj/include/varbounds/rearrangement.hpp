#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "varbounds/margins.hpp"

namespace varbounds {

enum class MatrixKind { lower, upper };

/// N x d matrix of discretized marginal quantiles, stored by column.
struct QuantileMatrix {
    std::size_t n = 0;
    std::size_t d = 0;
    double alpha = 0.0;
    MatrixKind kind = MatrixKind::lower;
    std::vector<double> levels;               ///< nominal probability level per row
    std::vector<std::vector<double>> columns; ///< d columns of n entries each
};

/// Discretizes the upper tail [alpha, 1) of each margin on an N-point grid.
/// Lower kind uses levels alpha + (1-alpha)(i-1)/N; upper kind uses
/// alpha + (1-alpha)i/N, with the top cell of any column whose quantile is
/// unbounded at 1 replaced by the level alpha + (1-alpha)(N-1/2)/N.
QuantileMatrix build_matrix(const std::vector<MarginalModel>& margins, double alpha, std::size_t n,
                            MatrixKind kind);

/// Counterpart over [0, alpha) used by the best-VaR variant: lower kind uses
/// levels alpha(i-1)/N, upper kind alpha i/N. All levels stay at or below
/// alpha < 1, so no top-cell adjustment is needed.
QuantileMatrix build_matrix_best(const std::vector<MarginalModel>& margins, double alpha,
                                 std::size_t n, MatrixKind kind);

/// Returns the permutation of `column` that is oppositely ordered to
/// `other_sum`: the largest value is aligned with the smallest other_sum.
/// Ties in other_sum keep their relative input order; equal column values
/// are interchangeable.
std::vector<double> oppositely_order(const std::vector<double>& column,
                                     const std::vector<double>& other_sum);

/// Checks (a_i - a_j)(b_i - b_j) <= 0 for all i, j in O(n log n).
bool oppositely_ordered(const std::vector<double>& a, const std::vector<double>& b);

enum class ToleranceKind { absolute, relative };
enum class Objective { maximize_min_row_sum, minimize_max_row_sum };

struct RearrangeConfig {
    /// Change threshold on the tracked row-sum extreme between rearrangements
    /// of the same column; empty means iterate until every column is
    /// oppositely ordered to the sum of the others.
    std::optional<double> tolerance = 0.0;
    ToleranceKind tolerance_kind = ToleranceKind::absolute;
    std::size_t max_column_rearrangements = 0; ///< 0 means 10 * d
    std::uint64_t seed = 42;
    /// Check termination only after full passes over all columns instead of
    /// after every column rearrangement.
    bool full_pass_only = false;
    Objective objective = Objective::maximize_min_row_sum;
};

struct RearrangeOutcome {
    double bound = 0.0; ///< final minimal (or, for minimax, maximal) row sum
    std::vector<double> row_sums;
    std::size_t columns_rearranged = 0;
    std::size_t opp_ordered_columns = 0;
    bool tolerance_reached = false;
    QuantileMatrix final_matrix;
    /// Tracked row-sum extreme: entry 0 is the value after the initial random
    /// permutation, entry k the value after the k-th column rearrangement.
    std::vector<double> min_row_sum_trace;
};

/// Core engine: randomly permutes each column (seeded), then cyclically
/// rearranges columns to be oppositely ordered to the sum of the others,
/// terminating per the configured tolerance.
RearrangeOutcome rearrange(const QuantileMatrix& matrix, const RearrangeConfig& cfg);

/// Number of columns oppositely ordered to the sum of all other columns.
std::size_t count_opp_ordered(const QuantileMatrix& matrix);

/// Exact maximum over all column permutations (first column fixed) of the
/// minimal row sum. Test oracle; refuses matrices beyond n <= 6, d <= 4.
double brute_force_maximin(const QuantileMatrix& matrix);

struct RAResult {
    RearrangeOutcome lower;
    RearrangeOutcome upper;
    double relative_range; ///< |(s_upper - s_lower) / s_upper|
};

/// Rearrangement bounds (s_lower, s_upper) for the worst VaR_alpha at a fixed
/// number of discretization points, with absolute tolerance semantics.
RAResult ra(const std::vector<MarginalModel>& margins, double alpha, std::size_t n,
            double epsilon_abs, std::uint64_t seed, std::size_t max_column_rearrangements = 0);

/// Best-VaR counterpart: discretizes [0, alpha) and tracks the maximal row
/// sum, which opposite ordering drives down. Follows the companion of the
/// worst-VaR construction; bounds are (t_lower, t_upper) with
/// relative range |(t_upper - t_lower) / t_upper|.
RAResult ra_best(const std::vector<MarginalModel>& margins, double alpha, std::size_t n,
                 double epsilon_abs, std::uint64_t seed,
                 std::size_t max_column_rearrangements = 0);

struct ARAConfig {
    std::vector<int> k_exponents = {8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
    double eps_individual = 0.0; ///< relative change threshold per matrix
    double eps_joint = 0.01;     ///< relative gap threshold between the bounds
    std::size_t max_column_rearrangements = 0; ///< per k; 0 means 10 * d
    std::uint64_t seed = 42;
};

struct ARAResult {
    RearrangeOutcome lower;
    RearrangeOutcome upper;
    std::size_t n_used = 0;
    int k_used = 0;
    bool joint_converged = false;
    double relative_range = 0.0;
};

/// Adaptive variant: grows N = 2^k over the configured exponents until both
/// matrices terminate by the individual relative tolerance and the bounds
/// satisfy the joint relative tolerance. Exhausting the exponents returns the
/// last outcomes flagged as not jointly converged.
ARAResult ara(const std::vector<MarginalModel>& margins, double alpha, const ARAConfig& cfg);

/// Deterministic seed derivation for independent streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

} // namespace varbounds
