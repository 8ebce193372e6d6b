#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "varbounds/margins.hpp"
#include "varbounds/rearrangement.hpp"

namespace varbounds {

/// Pareto portfolio families used by the simulation studies. The shape
/// parameters form equidistant sequences (inclusive of both end points):
///   HH : 0.6 .. 0.4          (all heavy-tailed)
///   LH : 1.5 .. 0.5          (light to very heavy)
///   LL : 1.6 .. 1.4          (all comparably light-tailed)
///   LH1: 1.6 .. 1.4 over the first d-1 margins, then 0.5
enum class CaseId { HH, LH, LL, LH1 };

std::string to_string(CaseId id);
CaseId parse_case_id(const std::string& text);

struct CaseSpec {
    CaseId id;
    std::size_t d;
};

/// Shape vector for a case; d >= 2 (d >= 3 for LH1).
std::vector<double> case_thetas(const CaseSpec& spec);
std::vector<MarginalModel> case_margins(const CaseSpec& spec);

/// One simulation run: either an RA replication (study "1"/"2") or an ARA
/// replication (study "ara-grid"). Fields that do not apply stay empty.
struct ReplicationRecord {
    std::string study;
    std::string case_id;
    std::size_t d = 0;
    std::optional<std::size_t> n;
    std::optional<double> abstol;
    std::optional<double> eps1;
    std::optional<double> eps2;
    std::size_t replication = 0;
    double s_lower = std::numeric_limits<double>::quiet_NaN();
    double s_upper = std::numeric_limits<double>::quiet_NaN();
    double relative_range = std::numeric_limits<double>::quiet_NaN();
    double runtime_seconds = std::numeric_limits<double>::quiet_NaN();
    std::optional<std::size_t> columns_rearranged_lower;
    std::optional<std::size_t> columns_rearranged_upper;
    std::optional<std::size_t> opp_ordered_lower;
    std::optional<std::size_t> opp_ordered_upper;
    std::optional<std::size_t> n_used;
    std::optional<bool> joint_converged;
    std::string error; ///< nonempty when the run failed; numeric fields NaN
};

/// Per-cell aggregate over the non-failed replications: means plus empirical
/// 95% confidence bounds (2.5 / 97.5 percentiles).
struct SummaryRow {
    std::string study;
    std::string case_id;
    std::size_t d = 0;
    std::optional<std::size_t> n;
    std::optional<double> abstol;
    std::optional<double> eps1;
    std::optional<double> eps2;
    std::size_t b_count = 0;
    std::size_t error_count = 0;
    double s_lower_mean = 0, s_lower_q025 = 0, s_lower_q975 = 0;
    double s_upper_mean = 0, s_upper_q025 = 0, s_upper_q975 = 0;
    double relative_range_mean = 0, relative_range_q025 = 0, relative_range_q975 = 0;
    double runtime_seconds_mean = 0, runtime_seconds_q025 = 0, runtime_seconds_q975 = 0;
    double runtime_seconds_median = 0;
    double columns_rearranged_lower_mean = 0, columns_rearranged_upper_mean = 0;
    double opp_ordered_lower_mean = 0, opp_ordered_upper_mean = 0;
    std::optional<double> n_used_mean;
    std::optional<std::size_t> joint_converged_count;
};

/// Replicated RA study. Study 1 varies N at fixed d; study 2 varies d at
/// fixed N. Per-replication seeds derive deterministically from base_seed.
struct StudySpec {
    int study_id = 1;
    std::size_t d = 20;                ///< study 1
    std::vector<std::size_t> n_grid;   ///< study 1
    std::size_t n = 256;               ///< study 2
    std::vector<std::size_t> d_grid;   ///< study 2
    double alpha = 0.99;
    double epsilon_abs = 0.0;
    std::size_t replications = 10;
    std::uint64_t base_seed = 20150819;
    std::size_t jobs = 1;
    std::size_t max_column_rearrangements = 0;

    static StudySpec desk(int study_id);
    static StudySpec full(int study_id);
};

std::vector<ReplicationRecord> run_study(const StudySpec& spec, const std::vector<CaseId>& cases);

/// ARA scenario grid over cases x dimensions x joint tolerances x individual
/// tolerances. Replication seeds depend only on (case, d, replication) so
/// that scenarios differing in tolerances share the same randomizations.
struct AraGridSpec {
    std::vector<CaseId> cases = {CaseId::HH, CaseId::LH, CaseId::LL, CaseId::LH1};
    std::vector<std::size_t> d_list = {20, 100};
    std::vector<double> eps2_list = {0.005, 0.01, 0.02};
    std::vector<double> eps1_list = {0.0, 0.001};
    std::vector<int> k_exponents = {8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
    double alpha = 0.99;
    std::size_t replications = 10;
    std::uint64_t base_seed = 20150819;
    std::size_t jobs = 1;
    std::size_t max_column_rearrangements = 0;

    static AraGridSpec desk();
    static AraGridSpec full();
};

std::vector<ReplicationRecord> run_ara_grid(const AraGridSpec& spec);

std::vector<SummaryRow> summarize(const std::vector<ReplicationRecord>& records);

void write_records_csv(const std::string& path, const std::vector<ReplicationRecord>& records);
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);

/// Formats a double with 15 significant digits (the precision used for all
/// numeric output).
std::string format_g15(double value);

/// RFC-4180 field quoting (quotes fields containing commas, quotes or
/// newlines).
std::string csv_escape(const std::string& field);

} // namespace varbounds
