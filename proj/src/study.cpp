#include "varbounds/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace varbounds {

std::string to_string(CaseId id) {
    switch (id) {
        case CaseId::HH: return "HH";
        case CaseId::LH: return "LH";
        case CaseId::LL: return "LL";
        case CaseId::LH1: return "LH1";
    }
    throw std::logic_error("to_string: unknown case id");
}

CaseId parse_case_id(const std::string& text) {
    if (text == "HH") return CaseId::HH;
    if (text == "LH") return CaseId::LH;
    if (text == "LL") return CaseId::LL;
    if (text == "LH1") return CaseId::LH1;
    throw std::domain_error("unknown case id '" + text + "' (expected HH, LH, LL or LH1)");
}

namespace {

std::vector<double> equidistant(double from, double to, std::size_t count) {
    std::vector<double> out(count);
    const double step = (to - from) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = from + step * static_cast<double>(i);
    out.back() = to;
    return out;
}

} // namespace

std::vector<double> case_thetas(const CaseSpec& spec) {
    if (spec.d < 2) throw std::domain_error("case_thetas: need d >= 2");
    switch (spec.id) {
        case CaseId::HH: return equidistant(0.6, 0.4, spec.d);
        case CaseId::LH: return equidistant(1.5, 0.5, spec.d);
        case CaseId::LL: return equidistant(1.6, 1.4, spec.d);
        case CaseId::LH1: {
            if (spec.d < 3) throw std::domain_error("case_thetas: LH1 needs d >= 3");
            auto thetas = equidistant(1.6, 1.4, spec.d - 1);
            thetas.push_back(0.5);
            return thetas;
        }
    }
    throw std::logic_error("case_thetas: unknown case id");
}

std::vector<MarginalModel> case_margins(const CaseSpec& spec) {
    return pareto_margins(case_thetas(spec));
}

namespace {

void parallel_for(std::size_t n_tasks, std::size_t jobs,
                  const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || n_tasks <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const std::size_t n_workers = std::min(jobs, n_tasks);
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n_tasks) return;
                body(i);
            }
        });
    }
    for (auto& t : workers) t.join();
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double mean(const std::vector<double>& values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

} // namespace

StudySpec StudySpec::desk(int study_id) {
    StudySpec s;
    s.study_id = study_id;
    s.replications = 10;
    if (study_id == 1) {
        for (int k = 7; k <= 12; ++k) s.n_grid.push_back(std::size_t{1} << k);
    } else if (study_id == 2) {
        for (int k = 2; k <= 6; ++k) s.d_grid.push_back(std::size_t{1} << k);
    } else {
        throw std::domain_error("StudySpec: study id must be 1 or 2");
    }
    return s;
}

StudySpec StudySpec::full(int study_id) {
    StudySpec s;
    s.study_id = study_id;
    s.replications = 100;
    if (study_id == 1) {
        for (int k = 7; k <= 17; ++k) s.n_grid.push_back(std::size_t{1} << k);
    } else if (study_id == 2) {
        for (int k = 2; k <= 10; ++k) s.d_grid.push_back(std::size_t{1} << k);
    } else {
        throw std::domain_error("StudySpec: study id must be 1 or 2");
    }
    return s;
}

std::vector<ReplicationRecord> run_study(const StudySpec& spec, const std::vector<CaseId>& cases) {
    if (cases.empty()) throw std::domain_error("run_study: no cases");
    if (spec.replications < 1) throw std::domain_error("run_study: need B >= 1");
    const bool vary_n = spec.study_id == 1;
    if (vary_n && spec.n_grid.empty()) throw std::domain_error("run_study: empty N grid");
    if (!vary_n && spec.d_grid.empty()) throw std::domain_error("run_study: empty d grid");

    struct Cell {
        CaseId case_id;
        std::size_t d;
        std::size_t n;
        std::size_t index;
    };
    std::vector<Cell> cells;
    const auto& grid = vary_n ? spec.n_grid : spec.d_grid;
    for (CaseId c : cases) {
        for (std::size_t g : grid) {
            const std::size_t d = vary_n ? spec.d : g;
            const std::size_t n = vary_n ? g : spec.n;
            cells.push_back({c, d, n, cells.size()});
        }
    }

    std::vector<ReplicationRecord> records(cells.size() * spec.replications);
    parallel_for(records.size(), spec.jobs, [&](std::size_t task) {
        const Cell& cell = cells[task / spec.replications];
        const std::size_t b = task % spec.replications;
        ReplicationRecord& rec = records[task];
        rec.study = std::to_string(spec.study_id);
        rec.case_id = to_string(cell.case_id);
        rec.d = cell.d;
        rec.n = cell.n;
        rec.abstol = spec.epsilon_abs;
        rec.replication = b;
        try {
            const auto margins = case_margins({cell.case_id, cell.d});
            const std::uint64_t seed = derive_seed(derive_seed(spec.base_seed, cell.index), b);
            const auto t0 = std::chrono::steady_clock::now();
            const RAResult result = ra(margins, spec.alpha, cell.n, spec.epsilon_abs, seed,
                                       spec.max_column_rearrangements);
            const auto t1 = std::chrono::steady_clock::now();
            rec.runtime_seconds = std::chrono::duration<double>(t1 - t0).count();
            rec.s_lower = result.lower.bound;
            rec.s_upper = result.upper.bound;
            rec.relative_range = result.relative_range;
            rec.columns_rearranged_lower = result.lower.columns_rearranged;
            rec.columns_rearranged_upper = result.upper.columns_rearranged;
            rec.opp_ordered_lower = result.lower.opp_ordered_columns;
            rec.opp_ordered_upper = result.upper.opp_ordered_columns;
        } catch (const std::exception& ex) {
            rec.error = ex.what();
        }
    });
    return records;
}

AraGridSpec AraGridSpec::desk() {
    AraGridSpec s;
    s.d_list = {20};
    s.k_exponents = {8, 9, 10, 11, 12, 13, 14};
    s.replications = 10;
    return s;
}

AraGridSpec AraGridSpec::full() {
    AraGridSpec s;
    s.replications = 100;
    return s;
}

std::vector<ReplicationRecord> run_ara_grid(const AraGridSpec& spec) {
    if (spec.cases.empty() || spec.d_list.empty() || spec.eps1_list.empty() ||
        spec.eps2_list.empty()) {
        throw std::domain_error("run_ara_grid: empty scenario axis");
    }
    if (spec.replications < 1) throw std::domain_error("run_ara_grid: need B >= 1");

    struct Scenario {
        CaseId case_id;
        std::size_t d;
        double eps2;
        double eps1;
    };
    std::vector<Scenario> scenarios;
    for (CaseId c : spec.cases) {
        for (std::size_t d : spec.d_list) {
            for (double e2 : spec.eps2_list) {
                for (double e1 : spec.eps1_list) scenarios.push_back({c, d, e2, e1});
            }
        }
    }

    std::vector<ReplicationRecord> records(scenarios.size() * spec.replications);
    parallel_for(records.size(), spec.jobs, [&](std::size_t task) {
        const Scenario& sc = scenarios[task / spec.replications];
        const std::size_t b = task % spec.replications;
        ReplicationRecord& rec = records[task];
        rec.study = "ara-grid";
        rec.case_id = to_string(sc.case_id);
        rec.d = sc.d;
        rec.eps1 = sc.eps1;
        rec.eps2 = sc.eps2;
        rec.replication = b;
        try {
            const auto margins = case_margins({sc.case_id, sc.d});
            ARAConfig cfg;
            cfg.k_exponents = spec.k_exponents;
            cfg.eps_individual = sc.eps1;
            cfg.eps_joint = sc.eps2;
            cfg.max_column_rearrangements = spec.max_column_rearrangements;
            // Seed by (case, d, replication) only: scenarios differing in the
            // tolerances see identical initial randomizations.
            const std::uint64_t stream =
                static_cast<std::uint64_t>(sc.case_id) * 1000003ULL + sc.d;
            cfg.seed = derive_seed(derive_seed(spec.base_seed, stream), b);
            const auto t0 = std::chrono::steady_clock::now();
            const ARAResult result = ara(margins, spec.alpha, cfg);
            const auto t1 = std::chrono::steady_clock::now();
            rec.runtime_seconds = std::chrono::duration<double>(t1 - t0).count();
            rec.s_lower = result.lower.bound;
            rec.s_upper = result.upper.bound;
            rec.relative_range = result.relative_range;
            rec.columns_rearranged_lower = result.lower.columns_rearranged;
            rec.columns_rearranged_upper = result.upper.columns_rearranged;
            rec.opp_ordered_lower = result.lower.opp_ordered_columns;
            rec.opp_ordered_upper = result.upper.opp_ordered_columns;
            rec.n_used = result.n_used;
            rec.joint_converged = result.joint_converged;
        } catch (const std::exception& ex) {
            rec.error = ex.what();
        }
    });
    return records;
}

std::vector<SummaryRow> summarize(const std::vector<ReplicationRecord>& records) {
    using Key = std::tuple<std::string, std::string, std::size_t, std::size_t, double, double,
                           double>;
    auto key_of = [](const ReplicationRecord& r) {
        return Key{r.study,
                   r.case_id,
                   r.d,
                   r.n.value_or(0),
                   r.abstol.value_or(std::numeric_limits<double>::quiet_NaN()),
                   r.eps1.value_or(std::numeric_limits<double>::quiet_NaN()),
                   r.eps2.value_or(std::numeric_limits<double>::quiet_NaN())};
    };
    // Cells keep first-appearance order.
    std::vector<Key> order;
    std::map<Key, std::vector<const ReplicationRecord*>> groups;
    for (const auto& r : records) {
        const Key k = key_of(r);
        auto [it, inserted] = groups.try_emplace(k);
        if (inserted) order.push_back(k);
        it->second.push_back(&r);
    }

    std::vector<SummaryRow> rows;
    rows.reserve(order.size());
    for (const Key& k : order) {
        const auto& group = groups[k];
        SummaryRow row;
        const ReplicationRecord& first = *group.front();
        row.study = first.study;
        row.case_id = first.case_id;
        row.d = first.d;
        row.n = first.n;
        row.abstol = first.abstol;
        row.eps1 = first.eps1;
        row.eps2 = first.eps2;
        row.b_count = group.size();

        std::vector<double> s_lo, s_hi, rel, rt, cl, cu, ol, ou, nu;
        std::size_t converged = 0;
        bool any_ara = false;
        for (const auto* r : group) {
            if (!r->error.empty()) {
                ++row.error_count;
                continue;
            }
            s_lo.push_back(r->s_lower);
            s_hi.push_back(r->s_upper);
            rel.push_back(r->relative_range);
            rt.push_back(r->runtime_seconds);
            if (r->columns_rearranged_lower) cl.push_back(static_cast<double>(*r->columns_rearranged_lower));
            if (r->columns_rearranged_upper) cu.push_back(static_cast<double>(*r->columns_rearranged_upper));
            if (r->opp_ordered_lower) ol.push_back(static_cast<double>(*r->opp_ordered_lower));
            if (r->opp_ordered_upper) ou.push_back(static_cast<double>(*r->opp_ordered_upper));
            if (r->n_used) {
                nu.push_back(static_cast<double>(*r->n_used));
                any_ara = true;
            }
            if (r->joint_converged && *r->joint_converged) ++converged;
        }
        row.s_lower_mean = mean(s_lo);
        row.s_lower_q025 = percentile(s_lo, 0.025);
        row.s_lower_q975 = percentile(s_lo, 0.975);
        row.s_upper_mean = mean(s_hi);
        row.s_upper_q025 = percentile(s_hi, 0.025);
        row.s_upper_q975 = percentile(s_hi, 0.975);
        row.relative_range_mean = mean(rel);
        row.relative_range_q025 = percentile(rel, 0.025);
        row.relative_range_q975 = percentile(rel, 0.975);
        row.runtime_seconds_mean = mean(rt);
        row.runtime_seconds_q025 = percentile(rt, 0.025);
        row.runtime_seconds_q975 = percentile(rt, 0.975);
        row.runtime_seconds_median = percentile(rt, 0.5);
        row.columns_rearranged_lower_mean = mean(cl);
        row.columns_rearranged_upper_mean = mean(cu);
        row.opp_ordered_lower_mean = mean(ol);
        row.opp_ordered_upper_mean = mean(ou);
        if (any_ara) {
            row.n_used_mean = mean(nu);
            row.joint_converged_count = converged;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_g15(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", value);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

namespace {

std::string opt_size(const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : std::string();
}

std::string opt_g15(const std::optional<double>& v) {
    return v ? format_g15(*v) : std::string();
}

void join_row(std::ofstream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

} // namespace

void write_records_csv(const std::string& path, const std::vector<ReplicationRecord>& records) {
    auto out = open_for_write(path);
    join_row(out, {"study", "case_id", "d", "n", "abstol", "eps1", "eps2", "replication",
                   "s_lower", "s_upper", "relative_range", "runtime_seconds",
                   "columns_rearranged_lower", "columns_rearranged_upper", "opp_ordered_lower",
                   "opp_ordered_upper", "n_used", "joint_converged", "error"});
    for (const auto& r : records) {
        join_row(out, {r.study, r.case_id, std::to_string(r.d), opt_size(r.n), opt_g15(r.abstol),
                       opt_g15(r.eps1), opt_g15(r.eps2), std::to_string(r.replication),
                       format_g15(r.s_lower), format_g15(r.s_upper), format_g15(r.relative_range),
                       format_g15(r.runtime_seconds), opt_size(r.columns_rearranged_lower),
                       opt_size(r.columns_rearranged_upper), opt_size(r.opp_ordered_lower),
                       opt_size(r.opp_ordered_upper), opt_size(r.n_used),
                       r.joint_converged ? (*r.joint_converged ? "1" : "0") : "", r.error});
    }
    if (!out) throw std::runtime_error("write failure on '" + path + "'");
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
    auto out = open_for_write(path);
    join_row(out, {"study", "case_id", "d", "n", "abstol", "eps1", "eps2", "b_count",
                   "error_count", "s_lower_mean", "s_lower_q025", "s_lower_q975", "s_upper_mean",
                   "s_upper_q025", "s_upper_q975", "relative_range_mean", "relative_range_q025",
                   "relative_range_q975", "runtime_seconds_mean", "runtime_seconds_q025",
                   "runtime_seconds_q975", "runtime_seconds_median",
                   "columns_rearranged_lower_mean", "columns_rearranged_upper_mean",
                   "opp_ordered_lower_mean", "opp_ordered_upper_mean", "n_used_mean",
                   "joint_converged_count"});
    for (const auto& r : rows) {
        join_row(out,
                 {r.study, r.case_id, std::to_string(r.d), opt_size(r.n), opt_g15(r.abstol),
                  opt_g15(r.eps1), opt_g15(r.eps2), std::to_string(r.b_count),
                  std::to_string(r.error_count), format_g15(r.s_lower_mean),
                  format_g15(r.s_lower_q025), format_g15(r.s_lower_q975),
                  format_g15(r.s_upper_mean), format_g15(r.s_upper_q025),
                  format_g15(r.s_upper_q975), format_g15(r.relative_range_mean),
                  format_g15(r.relative_range_q025), format_g15(r.relative_range_q975),
                  format_g15(r.runtime_seconds_mean), format_g15(r.runtime_seconds_q025),
                  format_g15(r.runtime_seconds_q975), format_g15(r.runtime_seconds_median),
                  format_g15(r.columns_rearranged_lower_mean),
                  format_g15(r.columns_rearranged_upper_mean),
                  format_g15(r.opp_ordered_lower_mean), format_g15(r.opp_ordered_upper_mean),
                  opt_g15(r.n_used_mean), opt_size(r.joint_converged_count)});
    }
    if (!out) throw std::runtime_error("write failure on '" + path + "'");
}

} // namespace varbounds
