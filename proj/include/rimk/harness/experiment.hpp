#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rimk/baselines.hpp"
#include "rimk/errors.hpp"
#include "rimk/is_krylov.hpp"
#include "rimk/rim_as.hpp"
#include "rimk/solver.hpp"

namespace rimk {

enum class SolverKind { Reference, Efficient, Krylov, Rabk, Scg, Cgne };

inline std::string_view to_string(SolverKind k) noexcept {
    switch (k) {
        case SolverKind::Reference: return "reference";
        case SolverKind::Efficient: return "efficient";
        case SolverKind::Krylov: return "krylov";
        case SolverKind::Rabk: return "rabk";
        case SolverKind::Scg: return "scg";
        case SolverKind::Cgne: return "cgne";
    }
    return "?";
}

inline SolverKind parse_solver_kind(std::string_view name) {
    for (const auto k : {SolverKind::Reference, SolverKind::Efficient, SolverKind::Krylov, SolverKind::Rabk,
                         SolverKind::Scg, SolverKind::Cgne}) {
        if (to_string(k) == name) return k;
    }
    throw UsageError("unknown solver '" + std::string(name) + "'");
}

inline RunRecord run_solver(SolverKind kind, const SolverConfig& config, const LinearSystem& system) {
    switch (kind) {
        case SolverKind::Reference: return run_rim_as(config, system, RimVariant::Reference);
        case SolverKind::Efficient: return run_rim_as(config, system, RimVariant::Efficient);
        case SolverKind::Krylov: return run_is_krylov(config, system);
        case SolverKind::Rabk: return run_rabk(config, system);
        case SolverKind::Scg: return run_scg(config, system);
        case SolverKind::Cgne: return run_cgne(config, system);
    }
    throw UsageError("unknown solver");
}

/// A solver failure annotated with the trial that raised it; keeps the original exit code.
class TrialError : public Error {
public:
    TrialError(std::size_t trial, const Error& cause)
        : Error("trial " + std::to_string(trial) + ": " + cause.what()), code_(cause.exit_code()), trial_(trial) {}

    [[nodiscard]] ExitCode exit_code() const noexcept override { return code_; }
    [[nodiscard]] std::size_t trial() const noexcept { return trial_; }

private:
    ExitCode code_;
    std::size_t trial_;
};

/// Per-iteration order statistics of RSE across trials. Traces that stopped early
/// are extended with their final value.
struct RseSummary {
    std::vector<double> min;
    std::vector<double> q25;
    std::vector<double> median;
    std::vector<double> q75;
    std::vector<double> max;
};

/// Linear interpolation between order statistics; `sorted` must be ascending.
inline double quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline RseSummary summarize(const std::vector<RunRecord>& records) {
    RseSummary s;
    std::size_t len = 0;
    for (const auto& r : records) len = std::max(len, r.rse.size());
    std::vector<double> column(records.size());
    for (std::size_t k = 0; k < len; ++k) {
        for (std::size_t t = 0; t < records.size(); ++t) {
            const auto& rse = records[t].rse;
            column[t] = k < rse.size() ? rse[k] : rse.back();
        }
        std::sort(column.begin(), column.end());
        s.min.push_back(column.front());
        s.q25.push_back(quantile(column, 0.25));
        s.median.push_back(quantile(column, 0.5));
        s.q75.push_back(quantile(column, 0.75));
        s.max.push_back(column.back());
    }
    return s;
}

/// Median of the per-trial iteration counts.
inline double median_iterations(const std::vector<RunRecord>& records) {
    std::vector<double> its;
    for (const auto& r : records) its.push_back(static_cast<double>(r.iterations));
    std::sort(its.begin(), its.end());
    return quantile(its, 0.5);
}

struct ExperimentResult {
    SolverKind solver = SolverKind::Krylov;
    std::vector<RunRecord> records;
    RseSummary summary;
};

/// Runs `trials` independent trials; trial i uses seed config.seed + i.
inline ExperimentResult run_experiment(const SolverConfig& config, const LinearSystem& system, SolverKind solver,
                                       std::size_t trials) {
    if (trials < 1) throw UsageError("trials must be at least 1");
    ExperimentResult out;
    out.solver = solver;
    out.records.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        SolverConfig trial_config = config;
        trial_config.seed = config.seed + t;
        try {
            out.records.push_back(run_solver(solver, trial_config, system));
        } catch (const Error& e) {
            throw TrialError(t, e);
        }
    }
    out.summary = summarize(out.records);
    return out;
}

}  // namespace rimk
