#pragma once

// Comparison solvers, written independently of the windowed solvers so that
// their reduction identities are checked against separate code:
//   RABK  x' = x + (gamma / ||d||^2) d
//   SCG   one-term conjugation of consecutive sketched directions
//   CGNE  conjugate gradient on the normal equations, no sketching

#include <chrono>
#include <cstddef>
#include <span>
#include <string_view>

#include "rimk/errors.hpp"
#include "rimk/linalg.hpp"
#include "rimk/sketch.hpp"
#include "rimk/solver.hpp"

namespace rimk {

enum class BaselineKind { RABK, SCG, CGNE };

/// x' = x + (gamma / ||d||^2) d
inline Vector rabk_step(std::span<const double> x, const SketchDraw& draw) {
    Vector out(x.begin(), x.end());
    axpy(draw.gamma / squared_norm(draw.direction), draw.direction, out);
    return out;
}

class RabkSolver {
public:
    explicit RabkSolver(Vector x0) : x_(std::move(x0)) {}

    [[nodiscard]] std::span<const double> x() const noexcept { return x_; }
    [[nodiscard]] std::size_t restarts() const noexcept { return 0; }
    [[nodiscard]] double flops() const noexcept { return 0.0; }

    void step(const SketchDraw& draw) { x_ = rabk_step(x_, draw); }

private:
    Vector x_;
};

struct ScgState {
    Vector x;
    Vector p;  // empty before the first step
};

/// Conjugates the new direction against the previous one, then takes the step.
/// The first call (empty p) is a RABK step.
inline ScgState scg_step(const ScgState& state, const SketchDraw& draw, bool* restarted = nullptr) {
    constexpr double kDeflation = 1e-28;
    ScgState next{state.x, draw.direction};
    if (!state.p.empty()) {
        const double pp = squared_norm(state.p);
        const double eta = dot(draw.direction, state.p) / pp;
        axpy(-eta, state.p, next.p);
        if (squared_norm(next.p) <= kDeflation * squared_norm(draw.direction)) {
            next.p = draw.direction;
            if (restarted != nullptr) *restarted = true;
        }
    }
    const double delta = draw.gamma / squared_norm(next.p);
    axpy(delta, next.p, next.x);
    return next;
}

class ScgSolver {
public:
    explicit ScgSolver(Vector x0) : state_{std::move(x0), {}} {}

    [[nodiscard]] std::span<const double> x() const noexcept { return state_.x; }
    [[nodiscard]] const Vector& direction() const noexcept { return state_.p; }
    [[nodiscard]] std::size_t restarts() const noexcept { return restarts_; }
    [[nodiscard]] double flops() const noexcept { return 0.0; }

    void step(const SketchDraw& draw) {
        bool restarted = false;
        state_ = scg_step(state_, draw, &restarted);
        if (restarted) ++restarts_;
    }

private:
    ScgState state_;
    std::size_t restarts_ = 0;
};

struct CgneState {
    Vector x;
    Vector r;  // A x - b
    Vector p;
};

inline CgneState cgne_start(const Matrix& A, std::span<const double> b, Vector x0) {
    CgneState s;
    s.r = residual(A, x0, b);
    s.p = transpose_matvec(A, s.r);
    for (auto& v : s.p) v = -v;
    s.x = std::move(x0);
    return s;
}

/// One CGNE step:
///   delta = ||r||^2/||p||^2, x += delta p, r += delta A p,
///   tau = ||r'||^2/||r||^2, p' = -A^T r' + tau p.
inline CgneState cgne_step(const Matrix& A, const CgneState& s) {
    const double rr = squared_norm(s.r);
    const double pp = squared_norm(s.p);
    if (!(pp > 0.0)) throw UsageError("cgne_step: zero search direction");
    const double delta = rr / pp;
    CgneState next{s.x, s.r, {}};
    axpy(delta, s.p, next.x);
    axpy(delta, matvec(A, s.p), next.r);
    const double tau = squared_norm(next.r) / rr;
    next.p = transpose_matvec(A, next.r);
    for (std::size_t i = 0; i < next.p.size(); ++i) next.p[i] = -next.p[i] + tau * s.p[i];
    return next;
}

inline RunRecord run_rabk(const SolverConfig& config, const LinearSystem& system) {
    return run_sketched(config, system, [](Vector x0) { return RabkSolver(std::move(x0)); }, "rabk");
}

inline RunRecord run_scg(const SolverConfig& config, const LinearSystem& system) {
    return run_sketched(config, system, [](Vector x0) { return ScgSolver(std::move(x0)); }, "scg");
}

/// Stops on tolerance, the iteration cap, or a residual at the zero threshold (Converged).
inline RunRecord run_cgne(const SolverConfig& config, const LinearSystem& system) {
    using clock = std::chrono::steady_clock;
    config.validate();
    const auto n = system.A.cols();
    RseMeter meter(resolve_reference(system), Vector(n, 0.0));
    const double tau = zero_threshold(system.b);
    RunRecord rec;
    rec.solver = "cgne";
    rec.config = config;
    rec.seed = config.seed;
    const auto start = clock::now();
    auto state = cgne_start(system.A, system.b, Vector(n, 0.0));
    auto record = [&] {
        rec.rse.push_back(meter(state.x));
        rec.elapsed_seconds.push_back(std::chrono::duration<double>(clock::now() - start).count());
    };
    record();
    for (;;) {
        if (rec.rse.back() < config.tolerance) {
            rec.termination = Termination::ToleranceReached;
            break;
        }
        if (rec.iterations >= config.max_iterations) {
            rec.termination = Termination::MaxIterations;
            break;
        }
        if (squared_norm(state.r) <= tau) {
            rec.termination = Termination::Converged;
            break;
        }
        state = cgne_step(system.A, state);
        ++rec.iterations;
        record();
    }
    rec.final_residual = norm2(residual(system.A, state.x, system.b));
    return rec;
}

}  // namespace rimk
