#pragma once

// Configuration, run records and the outer iteration loop shared by every solver.

#include <algorithm>
#include <chrono>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rimk/errors.hpp"
#include "rimk/linalg.hpp"
#include "rimk/random.hpp"
#include "rimk/sketch.hpp"

namespace rimk {

/// Memory parameter value meaning "keep every iterate".
inline constexpr std::size_t kUnboundedMemory = std::numeric_limits<std::size_t>::max();

struct SolverConfig {
    std::size_t memory = 10;  // l, number of recent iterates retained; kUnboundedMemory for infinity
    std::size_t block_size = 1;  // q
    SketchKind sketch = SketchKind::Partition;
    double tolerance = 1e-12;  // on RSE
    std::size_t max_iterations = 100000;
    std::uint64_t seed = 0;

    void validate() const {
        if (memory < 1) throw UsageError("memory must be at least 1");
        if (!(tolerance > 0.0)) throw UsageError("tolerance must be positive");
        if (max_iterations < 1) throw UsageError("max_iterations must be at least 1");
        if (block_size < 1) throw UsageError("block size must be at least 1");
    }
};

/// Window width (stored columns) for a run: l-1, or min(m, n, max_iterations) when unbounded.
inline std::size_t window_columns(const SolverConfig& config, const Matrix& A) {
    if (config.memory == kUnboundedMemory) return std::min({A.rows(), A.cols(), config.max_iterations});
    return config.memory - 1;
}

enum class Termination { ToleranceReached, MaxIterations, Converged };

inline std::string_view to_string(Termination t) noexcept {
    switch (t) {
        case Termination::ToleranceReached: return "tolerance_reached";
        case Termination::MaxIterations: return "max_iterations";
        case Termination::Converged: return "converged";
    }
    return "?";
}

struct RunRecord {
    std::string solver;
    SolverConfig config;
    std::uint64_t seed = 0;               // trial seed
    std::vector<double> rse;              // rse[k] for x^k, k = 0..iterations
    std::vector<double> elapsed_seconds;  // cumulative since solver start, aligned with rse
    Termination termination = Termination::MaxIterations;
    std::size_t iterations = 0;
    std::size_t restarts = 0;
    double final_residual = 0.0;  // ||A x - b||_2 at exit
    double flops = 0.0;           // per-step model, sketch application excluded
};

/// Stored reference if present, else A^+ b by dense SVD.
inline Vector resolve_reference(const LinearSystem& system) {
    if (system.reference_solution) return *system.reference_solution;
    try {
        return minnorm_solution(system.A, system.b);
    } catch (const CapacityExceeded& e) {
        throw ConfigError(std::string("no reference solution supplied and ") + e.what());
    }
}

/// ||x - ref||^2 / ||x0 - ref||^2, taken as 0 when x0 already equals ref.
class RseMeter {
public:
    RseMeter(Vector reference, std::span<const double> x0)
        : reference_(std::move(reference)), initial_(squared(x0)) {}

    [[nodiscard]] double operator()(std::span<const double> x) const {
        return initial_ > 0.0 ? squared(x) / initial_ : 0.0;
    }

    [[nodiscard]] const Vector& reference() const noexcept { return reference_; }

private:
    [[nodiscard]] double squared(std::span<const double> x) const {
        const double d = distance(x, reference_);
        return d * d;
    }

    Vector reference_;
    double initial_;
};

/// Anything that advances an iterate from a sketch draw.
template <class S>
concept Stepper = requires(S s, const S cs, const SketchDraw& d) {
    { cs.x() } -> std::convertible_to<std::span<const double>>;
    s.step(d);
    { cs.restarts() } -> std::convertible_to<std::size_t>;
    { cs.flops() } -> std::convertible_to<double>;
};

/// Outer loop: check RSE, draw, step; until tolerance, iteration cap, or exhausted draws.
template <Stepper S>
RunRecord drive(S& stepper, DrawSource& source, const LinearSystem& system, const RseMeter& meter,
                const SolverConfig& config, std::string_view solver_name) {
    using clock = std::chrono::steady_clock;
    RunRecord rec;
    rec.solver = std::string(solver_name);
    rec.config = config;
    rec.seed = config.seed;
    const auto start = clock::now();
    auto record = [&](std::span<const double> x) {
        rec.rse.push_back(meter(x));
        rec.elapsed_seconds.push_back(std::chrono::duration<double>(clock::now() - start).count());
    };
    record(stepper.x());
    for (;;) {
        if (rec.rse.back() < config.tolerance) {
            rec.termination = Termination::ToleranceReached;
            break;
        }
        if (rec.iterations >= config.max_iterations) {
            rec.termination = Termination::MaxIterations;
            break;
        }
        auto draw = source.next(stepper.x());
        if (!draw) {
            rec.termination = Termination::Converged;
            break;
        }
        stepper.step(*draw);
        ++rec.iterations;
        record(stepper.x());
    }
    rec.restarts = stepper.restarts();
    rec.flops = stepper.flops();
    rec.final_residual = norm2(residual(system.A, stepper.x(), system.b));
    return rec;
}

/// Builds the family and draw stream of a seeded run and drives the stepper from x0 = 0.
template <class MakeStepper>
RunRecord run_sketched(const SolverConfig& config, const LinearSystem& system, MakeStepper&& make,
                       std::string_view solver_name) {
    config.validate();
    if (system.b.size() != system.A.rows()) throw UsageError("right-hand side length must equal m");
    RseMeter meter(resolve_reference(system), Vector(system.A.cols(), 0.0));
    Rng family_rng(config.seed, stream::kFamily);
    const auto family = SketchFamily::make(config.sketch, system.A, config.block_size, family_rng);
    DrawSource source(family, system, Rng(config.seed, stream::kDraws));
    auto stepper = make(Vector(system.A.cols(), 0.0));
    return drive(stepper, source, system, meter, config, solver_name);
}

}  // namespace rimk
