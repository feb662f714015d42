#pragma once

// Iterative-sketching Krylov solver.
//
// p_k is d_k orthogonalized against the last l-1 directions, x^{k+1} = x^k + delta_k p_k
// with delta_k = gamma_k / ||p_k||^2. Normalized directions live in a fixed n x (l-1)
// ring; a new direction overwrites the oldest column in place.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "rimk/errors.hpp"
#include "rimk/linalg.hpp"
#include "rimk/sketch.hpp"
#include "rimk/solver.hpp"

namespace rimk {

class KrylovSolver {
public:
    static constexpr double kDeflationTolerance = 1e-28;  // on ||p||^2 / ||d||^2
    static constexpr double kReorthogonalizeBelow = 0.5;  // on ||p|| / ||d||

    KrylovSolver(Vector x0, std::size_t window_columns)
        : n_(x0.size()), x_(std::move(x0)), capacity_(window_columns), columns_(n_ * window_columns) {}

    [[nodiscard]] std::span<const double> x() const noexcept { return x_; }
    [[nodiscard]] std::size_t restarts() const noexcept { return restarts_; }
    [[nodiscard]] double flops() const noexcept { return flops_; }
    [[nodiscard]] std::size_t iteration() const noexcept { return k_; }
    [[nodiscard]] std::size_t width() const noexcept { return size_; }
    [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }

    /// Ring column in storage order (not age order).
    [[nodiscard]] std::span<const double> column(std::size_t slot) const {
        return {columns_.data() + slot * n_, n_};
    }

    /// Slot that the next stored direction will occupy.
    [[nodiscard]] std::size_t next_slot() const noexcept { return next_slot_; }

    /// Unnormalized direction and step length of the last step.
    [[nodiscard]] const Vector& last_direction() const noexcept { return p_; }
    [[nodiscard]] double last_step_length() const noexcept { return delta_; }

    void step(const SketchDraw& draw) {
        if (!(draw.gamma > 0.0)) throw UsageError("step_krylov: draw has zero sketched residual");
        orthogonalize(draw.direction);
        const double pp = squared_norm(p_);
        delta_ = draw.gamma / pp;
        axpy(delta_, p_, x_);
        const auto q = static_cast<double>(draw.sketched_residual.size());
        flops_ += (4 * q + 4 * static_cast<double>(size_) + 1) * static_cast<double>(n_) + 2 * q - 1;
        store(std::sqrt(pp));
        ++k_;
    }

private:
    // p = d - P P^T d, with a second pass when more than half of d cancels.
    void orthogonalize(std::span<const double> d) {
        p_.assign(d.begin(), d.end());
        if (size_ == 0) return;
        const double dd = squared_norm(d);
        project_out();
        double pp = squared_norm(p_);
        if (pp < kReorthogonalizeBelow * kReorthogonalizeBelow * dd) {
            project_out();
            pp = squared_norm(p_);
        }
        if (pp <= kDeflationTolerance * dd) {
            size_ = 0;
            next_slot_ = 0;
            ++restarts_;
            p_.assign(d.begin(), d.end());
        }
    }

    void project_out() {
        coeff_.resize(size_);
        for (std::size_t i = 0; i < size_; ++i) coeff_[i] = dot(column(i), p_);
        for (std::size_t i = 0; i < size_; ++i) axpy(-coeff_[i], column(i), p_);
    }

    void store(double pnorm) {
        if (capacity_ == 0) return;
        auto target = columns_.begin() + static_cast<std::ptrdiff_t>(next_slot_ * n_);
        std::transform(p_.begin(), p_.end(), target, [pnorm](double v) { return v / pnorm; });
        size_ = std::min(size_ + 1, capacity_);
        next_slot_ = (next_slot_ + 1) % capacity_;
    }

    std::size_t n_;
    Vector x_;
    std::size_t capacity_;
    std::vector<double> columns_;  // capacity_ unit columns of n_ values
    std::size_t size_ = 0;
    std::size_t next_slot_ = 0;
    Vector p_;
    Vector coeff_;
    double delta_ = 0.0;
    std::size_t k_ = 0;
    std::size_t restarts_ = 0;
    double flops_ = 0.0;
};

inline RunRecord run_is_krylov(const SolverConfig& config, const LinearSystem& system) {
    const std::size_t columns = window_columns(config, system.A);
    return run_sketched(
        config, system, [&](Vector x0) { return KrylovSolver(std::move(x0), columns); }, "krylov");
}

}  // namespace rimk
