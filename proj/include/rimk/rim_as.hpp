#pragma once

// Randomized iterative method with affine subspace search.
//
// Each step moves x^k to the orthogonal projection of A^+ b onto
//   aff{x^{j_k}, ..., x^{k-1}, x^k, x^k + d_k},   j_k = max(k - l + 1, 0).
// ReferenceRim solves the (w+1)x(w+1) normal equations M^T M s = gamma e_last
// every step. EfficientRim uses the closed-form tridiagonal inverse of V^T V
// built from the scalars alpha_i = gamma_i * s_i, one per stored iterate.
//
// Both variants span the hull with consecutive steps x^{t+1} - x^t rather than
// x^t - x^k. The span is the same, but after a very short step two columns
// x^t - x^k and x^{t+1} - x^k are nearly parallel and the Gram matrix squares
// that, costing about half the digits. Consecutive steps are mutually
// orthogonal in exact arithmetic, so the normal equations stay well conditioned.

#include <cstddef>
#include <deque>
#include <span>
#include <string_view>
#include <vector>

#include "rimk/errors.hpp"
#include "rimk/linalg.hpp"
#include "rimk/sketch.hpp"
#include "rimk/solver.hpp"

namespace rimk {

/// h = C(alpha) w through the tridiagonal stencil, O(w).
///
/// C(alpha) is the inverse of sum_j alpha_j 1_j 1_j^T where 1_j has ones in the
/// first j positions; with alphas ordered oldest first it is the inverse of the
/// Gram matrix V^T V of the difference window.
inline Vector apply_c_matrix(std::span<const double> alpha, std::span<const double> w) {
    const std::size_t n = alpha.size();
    if (w.size() != n) throw UsageError("apply_c_matrix: window width mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(alpha[i] > 0.0)) throw NumericalBreakdown("apply_c_matrix: non-positive ring scalar", i);
    }
    Vector h(n);
    if (n == 0) return h;
    if (n == 1) {
        h[0] = w[0] / alpha[0];
        return h;
    }
    h[0] = (w[0] - w[1]) / alpha[0];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        h[i] = -w[i - 1] / alpha[i - 1] + w[i] * (1.0 / alpha[i - 1] + 1.0 / alpha[i]) - w[i + 1] / alpha[i];
    }
    h[n - 1] = -w[n - 2] / alpha[n - 2] + w[n - 1] * (1.0 / alpha[n - 2] + 1.0 / alpha[n - 1]);
    return h;
}

enum class RimVariant { Reference, Efficient };

/// Algorithm with dense normal equations; the window keeps raw iterates.
class ReferenceRim {
public:
    ReferenceRim(Vector x0, std::size_t window_columns) : x_(std::move(x0)), capacity_(window_columns) {}

    [[nodiscard]] std::span<const double> x() const noexcept { return x_; }
    [[nodiscard]] std::size_t restarts() const noexcept { return restarts_; }
    [[nodiscard]] double flops() const noexcept { return flops_; }
    [[nodiscard]] std::size_t iteration() const noexcept { return k_; }
    /// Previous iterates x^{j_k}, ..., x^{k-1}, oldest first.
    [[nodiscard]] const std::deque<Vector>& window() const noexcept { return window_; }

    void step(const SketchDraw& draw) {
        if (!(draw.gamma > 0.0)) throw UsageError("step_reference: draw has zero sketched residual");
        Vector s;
        try {
            s = solve_spd(gram(draw.direction), last_unit(draw.gamma));
        } catch (const NumericalBreakdown&) {
            window_.clear();
            ++restarts_;
            s = solve_spd(gram(draw.direction), last_unit(draw.gamma));
        }
        const std::size_t w = window_.size();
        Vector next = x_;
        for (std::size_t i = 0; i < w; ++i) {
            const auto& from = window_[i];
            const auto& to = i + 1 < w ? window_[i + 1] : x_;
            for (std::size_t t = 0; t < x_.size(); ++t) next[t] += s[i] * (to[t] - from[t]);
        }
        axpy(s[w], draw.direction, next);
        flops_ += static_cast<double>(x_.size()) * static_cast<double>((w + 1) * (w + 2) + 2 * (w + 1));
        if (capacity_ > 0) {
            window_.push_back(std::move(x_));
            if (window_.size() > capacity_) window_.pop_front();
        }
        x_ = std::move(next);
        ++k_;
    }

private:
    // M^T M for M = (x^{j+1} - x^j, ..., x^k - x^{k-1}, d); both triangles computed by the same expression.
    [[nodiscard]] SquareMatrix gram(std::span<const double> d) const {
        const std::size_t w = window_.size();
        std::vector<Vector> cols;
        cols.reserve(w + 1);
        for (std::size_t i = 0; i < w; ++i) cols.push_back(difference(i + 1 < w ? window_[i + 1] : x_, window_[i]));
        cols.emplace_back(d.begin(), d.end());
        SquareMatrix G(w + 1);
        for (std::size_t i = 0; i <= w; ++i) {
            for (std::size_t j = i; j <= w; ++j) {
                G(i, j) = dot(cols[i], cols[j]);
                G(j, i) = G(i, j);
            }
        }
        return G;
    }

    [[nodiscard]] Vector last_unit(double gamma) const {
        Vector e(window_.size() + 1, 0.0);
        e.back() = gamma;
        return e;
    }

    Vector x_;
    std::size_t capacity_;
    std::deque<Vector> window_;
    std::size_t k_ = 0;
    std::size_t restarts_ = 0;
    double flops_ = 0.0;
};

/// Limited-memory variant: O((w+1) n) per step, no linear solves.
///
/// The ring holds the steps delta_t = x^{t+1} - x^t with alpha_t = gamma_t * s_t. With
/// g_t = (x^t - x^{t+1})^T d, which is w_t - w_{t+1} for w = V^T d (w_last = g_last),
/// the C(alpha) stencil reads h_t = g_t / alpha_t - g_{t-1} / alpha_{t-1}, so
///   w^T h = sum_t g_t^2 / alpha_t   and   V h = sum_t (g_t / alpha_t) (x^t - x^{t+1}).
/// Evaluating it on g avoids forming w_t - w_{t+1} by cancellation.
class EfficientRim {
public:
    EfficientRim(Vector x0, std::size_t window_columns)
        : n_(x0.size()), x_(std::move(x0)), capacity_(window_columns), steps_(n_ * window_columns),
          alpha_(window_columns) {}

    [[nodiscard]] std::span<const double> x() const noexcept { return x_; }
    [[nodiscard]] std::size_t restarts() const noexcept { return restarts_; }
    [[nodiscard]] double flops() const noexcept { return flops_; }
    [[nodiscard]] std::size_t iteration() const noexcept { return k_; }
    [[nodiscard]] std::size_t width() const noexcept { return size_; }

    /// Stored step x^{j_k + i + 1} - x^{j_k + i} (i = 0 is the oldest).
    [[nodiscard]] std::span<const double> stored_step(std::size_t i) const {
        return {steps_.data() + slot(i) * n_, n_};
    }

    /// Ring scalars gamma_i * s_i, oldest first.
    [[nodiscard]] Vector ring_scalars() const {
        Vector out(size_);
        for (std::size_t i = 0; i < size_; ++i) out[i] = alpha_[slot(i)];
        return out;
    }

    /// Columns x^{j} - x^k of V_k, oldest first.
    [[nodiscard]] std::vector<Vector> window_matrix() const {
        std::vector<Vector> cols(size_, Vector(n_, 0.0));
        Vector suffix(n_, 0.0);
        for (std::size_t i = size_; i-- > 0;) {
            axpy(-1.0, stored_step(i), suffix);
            cols[i] = suffix;
        }
        return cols;
    }

    void step(const SketchDraw& draw) {
        if (!(draw.gamma > 0.0)) throw UsageError("step_efficient: draw has zero sketched residual");
        const auto& d = draw.direction;
        const double c = squared_norm(d);
        // ratio_t = g_t / alpha_t; positivity of alpha is the same guard apply_c_matrix enforces.
        Vector ratio(size_);
        double wh = 0.0;
        for (std::size_t i = 0; i < size_; ++i) {
            const double a = alpha_[slot(i)];
            if (!(a > 0.0)) throw NumericalBreakdown("step_efficient: non-positive ring scalar", i);
            const double g = -dot(stored_step(i), d);
            ratio[i] = g / a;
            wh += g * ratio[i];
        }
        double denom = c - wh;
        if (!(denom > kDenominatorTolerance * c)) {
            clear();
            ++restarts_;
            ratio.clear();
            denom = c;
        }
        const double s = draw.gamma / denom;
        // x^{k+1} - x^k = -s (V h - d) = s (d + sum_t ratio_t delta_t)
        Vector delta(d.begin(), d.end());
        for (std::size_t i = 0; i < ratio.size(); ++i) axpy(ratio[i], stored_step(i), delta);
        for (auto& v : delta) v *= s;
        axpy(1.0, delta, x_);
        const auto width = static_cast<double>(ratio.size());
        const auto q = static_cast<double>(draw.sketched_residual.size());
        // Per-step count of the published algorithm, kept for benchmark parity.
        flops_ += (4 * q + 5 * width + 3) * static_cast<double>(n_) + 2 * q + 2 * width * width - 1;
        push(delta, draw.gamma * s);
        ++k_;
    }

    static constexpr double kDenominatorTolerance = 1e-14;

private:
    [[nodiscard]] std::size_t slot(std::size_t i) const noexcept { return (head_ + i) % capacity_; }

    // Stores the step with its scalar, evicting the oldest when full.
    void push(const Vector& delta, double alpha) {
        if (capacity_ == 0) return;
        std::size_t target;
        if (size_ < capacity_) {
            target = slot(size_);
            ++size_;
        } else {
            target = head_;
            head_ = (head_ + 1) % capacity_;
        }
        std::copy(delta.begin(), delta.end(), steps_.begin() + static_cast<std::ptrdiff_t>(target * n_));
        alpha_[target] = alpha;
    }

    void clear() noexcept {
        size_ = 0;
        head_ = 0;
    }

    std::size_t n_;
    Vector x_;
    std::size_t capacity_;
    std::vector<double> steps_;  // capacity_ slots of n_ values
    Vector alpha_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
    std::size_t k_ = 0;
    std::size_t restarts_ = 0;
    double flops_ = 0.0;
};

inline RunRecord run_rim_as(const SolverConfig& config, const LinearSystem& system, RimVariant variant) {
    const std::size_t columns = window_columns(config, system.A);
    if (variant == RimVariant::Reference) {
        return run_sketched(
            config, system, [&](Vector x0) { return ReferenceRim(std::move(x0), columns); }, "reference");
    }
    return run_sketched(
        config, system, [&](Vector x0) { return EfficientRim(std::move(x0), columns); }, "efficient");
}

}  // namespace rimk
