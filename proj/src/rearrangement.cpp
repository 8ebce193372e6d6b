#include "varbounds/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace varbounds {

namespace {

void check_matrix_inputs(std::size_t n, std::size_t d, double alpha, const char* what) {
    if (n < 2) throw std::domain_error(std::string(what) + ": need N >= 2");
    if (d < 2) throw std::domain_error(std::string(what) + ": need d >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error(std::string(what) + ": alpha outside (0, 1)");
    }
}

QuantileMatrix build_from_levels(const std::vector<MarginalModel>& margins, double alpha,
                                 std::size_t n, MatrixKind kind, const std::vector<double>& levels,
                                 double adjusted_top_level) {
    QuantileMatrix m;
    m.n = n;
    m.d = margins.size();
    m.alpha = alpha;
    m.kind = kind;
    m.levels = levels;
    m.columns.resize(m.d);
    for (std::size_t j = 0; j < m.d; ++j) {
        auto& col = m.columns[j];
        col.resize(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = margins[j].quantile(levels[i]);
        if (!std::isfinite(col[n - 1]) && adjusted_top_level > 0.0) {
            col[n - 1] = margins[j].quantile(adjusted_top_level);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(col[i])) {
                throw std::domain_error("build_matrix: margin " + std::to_string(j) +
                                        " produced a non-finite quantile at level " +
                                        std::to_string(levels[i]));
            }
        }
    }
    return m;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Bounded draw by rejection so shuffles do not depend on the standard
// library's distribution implementation.
std::uint64_t bounded_rand(std::mt19937_64& gen, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
        draw = gen();
    } while (draw >= limit);
    return draw % bound;
}

void shuffle_column(std::vector<double>& v, std::mt19937_64& gen) {
    for (std::size_t i = v.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(bounded_rand(gen, i + 1));
        std::swap(v[i], v[j]);
    }
}

double extreme_row_sum(const std::vector<double>& row_sums, Objective objective) {
    if (objective == Objective::maximize_min_row_sum) {
        return *std::min_element(row_sums.begin(), row_sums.end());
    }
    return *std::max_element(row_sums.begin(), row_sums.end());
}

} // namespace

QuantileMatrix build_matrix(const std::vector<MarginalModel>& margins, double alpha, std::size_t n,
                            MatrixKind kind) {
    check_matrix_inputs(n, margins.size(), alpha, "build_matrix");
    const double nn = static_cast<double>(n);
    std::vector<double> levels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double step = (kind == MatrixKind::lower) ? static_cast<double>(i)
                                                        : static_cast<double>(i + 1);
        levels[i] = alpha + (1.0 - alpha) * step / nn;
    }
    const double adjusted =
        (kind == MatrixKind::upper) ? alpha + (1.0 - alpha) * (nn - 0.5) / nn : 0.0;
    return build_from_levels(margins, alpha, n, kind, levels, adjusted);
}

QuantileMatrix build_matrix_best(const std::vector<MarginalModel>& margins, double alpha,
                                 std::size_t n, MatrixKind kind) {
    check_matrix_inputs(n, margins.size(), alpha, "build_matrix_best");
    const double nn = static_cast<double>(n);
    std::vector<double> levels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double step = (kind == MatrixKind::lower) ? static_cast<double>(i)
                                                        : static_cast<double>(i + 1);
        levels[i] = alpha * step / nn;
    }
    return build_from_levels(margins, alpha, n, kind, levels, 0.0);
}

std::vector<double> oppositely_order(const std::vector<double>& column,
                                     const std::vector<double>& other_sum) {
    if (column.size() != other_sum.size()) {
        throw std::domain_error("oppositely_order: length mismatch");
    }
    const std::size_t n = column.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (other_sum[a] != other_sum[b]) return other_sum[a] < other_sum[b];
        return a < b; // stable on ties
    });
    std::vector<double> sorted_desc = column;
    std::sort(sorted_desc.begin(), sorted_desc.end(), std::greater<>());
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[order[k]] = sorted_desc[k];
    return out;
}

bool oppositely_ordered(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::domain_error("oppositely_ordered: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) return true;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return b[i] < b[j]; });
    // Group rows by equal b; within a group the condition is vacuous, and
    // across groups (b strictly increasing) every a of the earlier group must
    // dominate every a of the later one. Checking consecutive groups suffices
    // because min >= max chains through.
    std::size_t i = 0;
    double prev_min = std::numeric_limits<double>::infinity();
    while (i < n) {
        std::size_t j = i;
        double group_min = std::numeric_limits<double>::infinity();
        double group_max = -std::numeric_limits<double>::infinity();
        while (j < n && b[order[j]] == b[order[i]]) {
            group_min = std::fmin(group_min, a[order[j]]);
            group_max = std::fmax(group_max, a[order[j]]);
            ++j;
        }
        if (group_max > prev_min) return false;
        prev_min = group_min;
        i = j;
    }
    return true;
}

RearrangeOutcome rearrange(const QuantileMatrix& matrix, const RearrangeConfig& cfg) {
    const std::size_t n = matrix.n;
    const std::size_t d = matrix.d;
    if (n == 0 || d == 0 || matrix.columns.size() != d) {
        throw std::domain_error("rearrange: malformed matrix");
    }
    for (const auto& col : matrix.columns) {
        if (col.size() != n) throw std::domain_error("rearrange: ragged matrix");
        for (double v : col) {
            if (!std::isfinite(v)) throw std::domain_error("rearrange: non-finite entry");
        }
    }
    const std::size_t cap =
        cfg.max_column_rearrangements == 0 ? 10 * d : cfg.max_column_rearrangements;
    if (cap < d) throw std::domain_error("rearrange: max_column_rearrangements below d");
    if (cfg.tolerance && !(*cfg.tolerance >= 0.0)) {
        throw std::domain_error("rearrange: tolerance must be >= 0");
    }

    QuantileMatrix work = matrix;
    std::mt19937_64 gen(cfg.seed);
    for (auto& col : work.columns) shuffle_column(col, gen);

    // The column multisets never change, so the descending values used by the
    // opposite ordering are sorted once.
    std::vector<std::vector<double>> sorted_desc(d);
    for (std::size_t j = 0; j < d; ++j) {
        sorted_desc[j] = work.columns[j];
        std::sort(sorted_desc[j].begin(), sorted_desc[j].end(), std::greater<>());
    }

    std::vector<double> row_sums(n, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) row_sums[i] += work.columns[j][i];
    }

    std::vector<double> trace;
    trace.reserve(cap + 1);
    trace.push_back(extreme_row_sum(row_sums, cfg.objective));

    std::vector<double> other(n);
    std::vector<double> newcol(n);
    std::vector<std::size_t> order(n);
    std::vector<char> changed_ring(d, 1);
    std::size_t steps = 0;
    bool reached = false;

    while (steps < cap) {
        const std::size_t j = steps % d;
        auto& col = work.columns[j];
        for (std::size_t i = 0; i < n; ++i) other[i] = row_sums[i] - col[i];

        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (other[a] != other[b]) return other[a] < other[b];
            return a < b;
        });
        const auto& desc = sorted_desc[j];
        for (std::size_t k = 0; k < n; ++k) newcol[order[k]] = desc[k];

        const bool changed = (newcol != col);
        double s_now;
        if (changed) {
            col = newcol;
            for (std::size_t i = 0; i < n; ++i) row_sums[i] = other[i] + col[i];
            s_now = extreme_row_sum(row_sums, cfg.objective);
        } else {
            s_now = trace.back();
        }
        ++steps;
        trace.push_back(s_now);
        changed_ring[j] = changed ? 1 : 0;

        if (cfg.tolerance) {
            const bool due = cfg.full_pass_only ? (steps >= d && steps % d == 0) : (steps >= d);
            if (due) {
                const double s_old = trace[steps - d];
                double delta = std::fabs(s_now - s_old);
                if (cfg.tolerance_kind == ToleranceKind::relative && s_old != 0.0) {
                    delta /= std::fabs(s_old);
                }
                if (delta <= *cfg.tolerance) {
                    reached = true;
                    break;
                }
            }
        } else if (steps >= d &&
                   std::none_of(changed_ring.begin(), changed_ring.end(),
                                [](char c) { return c != 0; })) {
            // A full pass without any column change: every column is now
            // oppositely ordered to the sum of the others.
            reached = true;
            break;
        }
    }

    RearrangeOutcome out;
    out.bound = trace.back();
    out.row_sums = std::move(row_sums);
    out.columns_rearranged = steps;
    out.tolerance_reached = reached;
    out.final_matrix = std::move(work);
    out.min_row_sum_trace = std::move(trace);
    out.opp_ordered_columns = count_opp_ordered(out.final_matrix);
    return out;
}

std::size_t count_opp_ordered(const QuantileMatrix& matrix) {
    const std::size_t n = matrix.n;
    const std::size_t d = matrix.d;
    std::vector<double> row_sums(n, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) row_sums[i] += matrix.columns[j][i];
    }
    std::size_t count = 0;
    std::vector<double> other(n);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) other[i] = row_sums[i] - matrix.columns[j][i];
        if (oppositely_ordered(matrix.columns[j], other)) ++count;
    }
    return count;
}

namespace {

double maximin_recurse(const QuantileMatrix& m, std::size_t col, std::vector<double>& partial) {
    const std::size_t n = m.n;
    if (col == m.d) {
        return *std::min_element(partial.begin(), partial.end());
    }
    std::vector<double> perm = m.columns[col];
    std::sort(perm.begin(), perm.end());
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> next(n);
    do {
        for (std::size_t i = 0; i < n; ++i) next[i] = partial[i] + perm[i];
        best = std::fmax(best, maximin_recurse(m, col + 1, next));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace

double brute_force_maximin(const QuantileMatrix& matrix) {
    if (matrix.n > 6 || matrix.d > 4) {
        throw std::domain_error("brute_force_maximin: refusing N > 6 or d > 4");
    }
    if (matrix.n == 0 || matrix.d == 0) {
        throw std::domain_error("brute_force_maximin: empty matrix");
    }
    std::vector<double> partial = matrix.columns[0]; // first column fixed
    return maximin_recurse(matrix, 1, partial);
}

namespace {

RAResult ra_run(const std::vector<MarginalModel>& margins, double alpha, std::size_t n,
                double epsilon_abs, std::uint64_t seed, std::size_t max_column_rearrangements,
                bool best_variant) {
    if (!(epsilon_abs >= 0.0)) throw std::domain_error("ra: epsilon must be >= 0");
    const auto lower_matrix = best_variant ? build_matrix_best(margins, alpha, n, MatrixKind::lower)
                                           : build_matrix(margins, alpha, n, MatrixKind::lower);
    const auto upper_matrix = best_variant ? build_matrix_best(margins, alpha, n, MatrixKind::upper)
                                           : build_matrix(margins, alpha, n, MatrixKind::upper);
    RearrangeConfig cfg;
    cfg.tolerance = epsilon_abs;
    cfg.tolerance_kind = ToleranceKind::absolute;
    cfg.max_column_rearrangements = max_column_rearrangements;
    cfg.objective =
        best_variant ? Objective::minimize_max_row_sum : Objective::maximize_min_row_sum;
    RAResult out{RearrangeOutcome{}, RearrangeOutcome{}, 0.0};
    cfg.seed = derive_seed(seed, 0);
    out.lower = rearrange(lower_matrix, cfg);
    cfg.seed = derive_seed(seed, 1);
    out.upper = rearrange(upper_matrix, cfg);
    out.relative_range = out.upper.bound != 0.0
                             ? std::fabs((out.upper.bound - out.lower.bound) / out.upper.bound)
                             : 0.0;
    return out;
}

} // namespace

RAResult ra(const std::vector<MarginalModel>& margins, double alpha, std::size_t n,
            double epsilon_abs, std::uint64_t seed, std::size_t max_column_rearrangements) {
    return ra_run(margins, alpha, n, epsilon_abs, seed, max_column_rearrangements, false);
}

RAResult ra_best(const std::vector<MarginalModel>& margins, double alpha, std::size_t n,
                 double epsilon_abs, std::uint64_t seed, std::size_t max_column_rearrangements) {
    return ra_run(margins, alpha, n, epsilon_abs, seed, max_column_rearrangements, true);
}

ARAResult ara(const std::vector<MarginalModel>& margins, double alpha, const ARAConfig& cfg) {
    if (cfg.k_exponents.empty()) throw std::domain_error("ara: empty exponent vector");
    for (std::size_t i = 1; i < cfg.k_exponents.size(); ++i) {
        if (cfg.k_exponents[i] <= cfg.k_exponents[i - 1]) {
            throw std::domain_error("ara: exponents must be strictly increasing");
        }
    }
    if (!(cfg.eps_individual >= 0.0)) throw std::domain_error("ara: eps_individual must be >= 0");
    if (!(cfg.eps_joint > 0.0)) throw std::domain_error("ara: eps_joint must be > 0");

    ARAResult out;
    for (int k : cfg.k_exponents) {
        if (k < 1 || k > 30) throw std::domain_error("ara: exponent out of range");
        const std::size_t n = std::size_t{1} << k;
        RearrangeConfig rc;
        rc.tolerance = cfg.eps_individual;
        rc.tolerance_kind = ToleranceKind::relative;
        rc.max_column_rearrangements = cfg.max_column_rearrangements;

        rc.seed = derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(k));
        out.lower = rearrange(build_matrix(margins, alpha, n, MatrixKind::lower), rc);
        rc.seed = derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(k) + 1);
        out.upper = rearrange(build_matrix(margins, alpha, n, MatrixKind::upper), rc);

        out.n_used = n;
        out.k_used = k;
        out.relative_range =
            out.upper.bound != 0.0
                ? std::fabs((out.upper.bound - out.lower.bound) / out.upper.bound)
                : 0.0;
        if (out.lower.tolerance_reached && out.upper.tolerance_reached &&
            out.relative_range <= cfg.eps_joint) {
            out.joint_converged = true;
            return out;
        }
    }
    out.joint_converged = false;
    return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 0x9e3779b97f4a7c15ULL));
}

} // namespace varbounds
