#pragma once

// Sketch operator families and the draw loop that feeds every solver.
//
// A draw realizes one sketch S (m x q) and evaluates, at the current x,
//   sketched residual  s = S^T (A x - b)
//   gamma              = ||s||^2
//   direction          d = -A^T S s
// Draws with gamma at or below the zero threshold are rejected and redrawn.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rimk/errors.hpp"
#include "rimk/linalg.hpp"
#include "rimk/random.hpp"

namespace rimk {

enum class SketchKind { Partition, CountSketch, Gaussian, SRHT };

inline std::string_view to_string(SketchKind k) noexcept {
    switch (k) {
        case SketchKind::Partition: return "partition";
        case SketchKind::CountSketch: return "countsketch";
        case SketchKind::Gaussian: return "gaussian";
        case SketchKind::SRHT: return "srht";
    }
    return "?";
}

inline SketchKind parse_sketch_kind(std::string_view name) {
    if (name == "partition") return SketchKind::Partition;
    if (name == "countsketch") return SketchKind::CountSketch;
    if (name == "gaussian") return SketchKind::Gaussian;
    if (name == "srht") return SketchKind::SRHT;
    throw UsageError("unknown sketch family '" + std::string(name) + "'");
}

/// In-place unnormalized fast Walsh-Hadamard transform; size must be a power of two.
inline void fwht(std::span<double> v) noexcept {
    const std::size_t len = v.size();
    for (std::size_t h = 1; h < len; h *= 2) {
        for (std::size_t i = 0; i < len; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double a = v[j];
                const double b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
    }
}

/// One realized sketch matrix.
struct SketchSample {
    SketchKind kind = SketchKind::Partition;
    std::size_t block = 0;             // Partition: block index
    std::vector<std::size_t> indices;  // CountSketch / SRHT: sampled row set J
    std::vector<double> signs;         // CountSketch: q signs; SRHT: m' signs
    std::vector<double> gaussian;      // Gaussian: S^T, q x m row-major
    double scale = 1.0;                // S is multiplied by this factor
    std::uint64_t stream_position = 0;
};

struct SketchDraw {
    Vector sketched_residual;  // S^T (A x - b)
    double gamma = 0.0;        // ||S^T (A x - b)||^2
    Vector direction;          // -A^T S S^T (A x - b)
    SketchSample sample;
};

/// 16 eps (1 + ||b||): sketched residuals with gamma at or below this are zero.
inline double zero_threshold(std::span<const double> b) noexcept {
    return 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + norm2(b));
}

/// Immutable after construction; draws take a caller-owned Rng.
class SketchFamily {
public:
    /// Random row partition into ceil(m/q) blocks sampled by Frobenius mass.
    static SketchFamily partition(const Matrix& A, std::size_t q, Rng& rng) {
        const auto order = rng.permutation(A.rows());
        return partition_with_order(A, q, order);
    }

    /// Partition built from an explicit row order (the permutation), cut into contiguous blocks.
    static SketchFamily partition_with_order(const Matrix& A, std::size_t q, std::span<const std::size_t> order) {
        SketchFamily f(SketchKind::Partition, A, q);
        if (order.size() != A.rows()) throw UsageError("partition: order must list every row");
        const std::size_t t = (A.rows() + q - 1) / q;
        f.blocks_.reserve(t);
        for (std::size_t i = 0; i < t; ++i) {
            const auto first = order.begin() + static_cast<std::ptrdiff_t>(i * q);
            const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(A.rows(), (i + 1) * q));
            f.blocks_.emplace_back(first, last);
        }
        f.weights_ = row_block_norms(A, f.blocks_);
        const double total = std::accumulate(f.weights_.begin(), f.weights_.end(), 0.0);
        f.cumulative_.resize(t);
        double running = 0.0;
        for (std::size_t i = 0; i < t; ++i) {
            f.weights_[i] = total > 0.0 ? f.weights_[i] / total : 0.0;
            running += f.weights_[i];
            f.cumulative_[i] = running;
            if (f.weights_[i] > 0.0) ++f.live_blocks_;
        }
        f.block_matrices_.reserve(t);
        for (const auto& block : f.blocks_) f.block_matrices_.push_back(A.select_rows(block));
        return f;
    }

    /// Uniform sampling of q distinct rows; with_signs adds the CountSketch sign diagonal.
    static SketchFamily count_sketch(const Matrix& A, std::size_t q, bool with_signs = true) {
        SketchFamily f(SketchKind::CountSketch, A, q);
        f.with_signs_ = with_signs;
        return f;
    }

    /// Standard normal entries, no 1/sqrt(q) scaling.
    static SketchFamily gaussian(const Matrix& A, std::size_t q) { return SketchFamily(SketchKind::Gaussian, A, q); }

    /// sqrt(m/q) I_J H D on the zero-padded row space of size m' = 2^ceil(log2 m).
    static SketchFamily srht(const Matrix& A, std::size_t q) {
        SketchFamily f(SketchKind::SRHT, A, q);
        f.padded_rows_ = std::bit_ceil(A.rows());
        return f;
    }

    static SketchFamily make(SketchKind kind, const Matrix& A, std::size_t q, Rng& rng) {
        switch (kind) {
            case SketchKind::Partition: return partition(A, q, rng);
            case SketchKind::CountSketch: return count_sketch(A, q);
            case SketchKind::Gaussian: return gaussian(A, q);
            case SketchKind::SRHT: return srht(A, q);
        }
        throw UsageError("unknown sketch family");
    }

    [[nodiscard]] SketchKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t sketch_size() const noexcept { return q_; }
    [[nodiscard]] std::size_t rows() const noexcept { return m_; }
    [[nodiscard]] std::size_t cols() const noexcept { return n_; }
    [[nodiscard]] std::size_t padded_rows() const noexcept { return padded_rows_; }
    [[nodiscard]] bool applies_signs() const noexcept { return with_signs_; }
    [[nodiscard]] const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }
    [[nodiscard]] const Vector& weights() const noexcept { return weights_; }

    /// Number of output rows of S^T for this sample.
    [[nodiscard]] std::size_t output_size(const SketchSample& s) const {
        return kind_ == SketchKind::Partition ? blocks_[s.block].size() : q_;
    }

    SketchSample sample(Rng& rng) const {
        SketchSample s;
        s.kind = kind_;
        s.stream_position = rng.position();
        switch (kind_) {
            case SketchKind::Partition: s.block = sample_block(rng); break;
            case SketchKind::CountSketch:
                s.indices = rng.sample_without_replacement(m_, q_);
                // Signs are always consumed so signed and unsigned families replay identical index sets.
                s.signs.resize(q_);
                for (auto& v : s.signs) v = rng.sign();
                if (!with_signs_) std::fill(s.signs.begin(), s.signs.end(), 1.0);
                break;
            case SketchKind::Gaussian:
                s.gaussian.resize(q_ * m_);
                rng.fill_normal(s.gaussian);
                break;
            case SketchKind::SRHT:
                s.signs.resize(padded_rows_);
                for (auto& v : s.signs) v = rng.sign();
                s.indices = rng.sample_without_replacement(padded_rows_, q_);
                break;
        }
        return s;
    }

    /// S^T v for v of length m.
    [[nodiscard]] Vector apply_transpose(const SketchSample& s, std::span<const double> v) const {
        if (v.size() != m_) throw UsageError("apply_transpose: vector length must equal m");
        Vector out(output_size(s));
        switch (kind_) {
            case SketchKind::Partition: {
                const auto& rows = blocks_[s.block];
                for (std::size_t i = 0; i < rows.size(); ++i) out[i] = s.scale * v[rows[i]];
                break;
            }
            case SketchKind::CountSketch:
                for (std::size_t i = 0; i < q_; ++i) out[i] = s.scale * s.signs[i] * v[s.indices[i]];
                break;
            case SketchKind::Gaussian:
                for (std::size_t i = 0; i < q_; ++i) {
                    out[i] = s.scale * dot(std::span<const double>(s.gaussian.data() + i * m_, m_), v);
                }
                break;
            case SketchKind::SRHT: out = srht_apply(s, v); break;
        }
        return out;
    }

    /// S u for u of length output_size(s); result has length m.
    [[nodiscard]] Vector apply(const SketchSample& s, std::span<const double> u) const {
        if (u.size() != output_size(s)) throw UsageError("apply: vector length must equal sketch size");
        Vector out(m_, 0.0);
        switch (kind_) {
            case SketchKind::Partition: {
                const auto& rows = blocks_[s.block];
                for (std::size_t i = 0; i < rows.size(); ++i) out[rows[i]] = s.scale * u[i];
                break;
            }
            case SketchKind::CountSketch:
                for (std::size_t i = 0; i < q_; ++i) out[s.indices[i]] = s.scale * s.signs[i] * u[i];
                break;
            case SketchKind::Gaussian:
                for (std::size_t i = 0; i < q_; ++i) {
                    axpy(s.scale * u[i], std::span<const double>(s.gaussian.data() + i * m_, m_), out);
                }
                break;
            case SketchKind::SRHT: {
                Vector padded(padded_rows_, 0.0);
                for (std::size_t i = 0; i < q_; ++i) padded[s.indices[i]] = u[i];
                fwht(padded);
                const double c = s.scale * srht_factor();
                for (std::size_t i = 0; i < m_; ++i) out[i] = c * s.signs[i] * padded[i];
                break;
            }
        }
        return out;
    }

    /// sqrt(m/q) (H_{m'} D v)_J by the fast transform; v is zero-padded to m'.
    [[nodiscard]] Vector srht_apply(const SketchSample& s, std::span<const double> v) const {
        if (kind_ != SketchKind::SRHT) throw UsageError("srht_apply: family is not SRHT");
        Vector work(padded_rows_, 0.0);
        for (std::size_t i = 0; i < v.size() && i < padded_rows_; ++i) work[i] = s.signs[i] * v[i];
        fwht(work);
        const double c = s.scale * srht_factor();
        Vector out(q_);
        for (std::size_t i = 0; i < q_; ++i) out[i] = c * work[s.indices[i]];
        return out;
    }

    /// Sketched residual, gamma and direction of sample s at x.
    [[nodiscard]] SketchDraw evaluate(SketchSample s, const Matrix& A, std::span<const double> b,
                                      std::span<const double> x) const {
        SketchDraw d;
        d.direction.assign(n_, 0.0);
        switch (kind_) {
            case SketchKind::Partition: {
                const auto& rows = blocks_[s.block];
                const auto& sub = block_matrices_[s.block];
                d.sketched_residual.resize(rows.size());
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    d.sketched_residual[i] = s.scale * (sub.row_dot(i, x) - b[rows[i]]);
                }
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    sub.add_row_to(i, -s.scale * d.sketched_residual[i], d.direction);
                }
                break;
            }
            case SketchKind::CountSketch: {
                d.sketched_residual.resize(q_);
                for (std::size_t i = 0; i < q_; ++i) {
                    const auto row = s.indices[i];
                    d.sketched_residual[i] = s.scale * s.signs[i] * (A.row_dot(row, x) - b[row]);
                }
                for (std::size_t i = 0; i < q_; ++i) {
                    A.add_row_to(s.indices[i], -s.scale * s.signs[i] * d.sketched_residual[i], d.direction);
                }
                break;
            }
            case SketchKind::Gaussian:
            case SketchKind::SRHT: {
                const auto r = residual(A, x, b);
                d.sketched_residual = apply_transpose(s, r);
                const auto pulled = apply(s, d.sketched_residual);
                transpose_matvec(A, pulled, d.direction);
                for (auto& v : d.direction) v = -v;
                break;
            }
        }
        d.gamma = squared_norm(d.sketched_residual);
        d.sample = std::move(s);
        return d;
    }

    /// Samples until gamma > tau. std::nullopt means the family is exhausted of nonzero
    /// draws at x, i.e. the system is solved to within the threshold.
    [[nodiscard]] std::optional<SketchDraw> draw(const Matrix& A, std::span<const double> b, std::span<const double> x,
                                                 Rng& rng, double tau, double scale = 1.0) const {
        check_shape(A, b, x);
        if (kind_ == SketchKind::Partition) return draw_partition(A, b, x, rng, tau, scale);
        const std::size_t limit = 50 * ((m_ + q_ - 1) / q_);
        for (std::size_t attempt = 0; attempt < limit; ++attempt) {
            auto s = sample(rng);
            s.scale = scale;
            auto d = evaluate(std::move(s), A, b, x);
            if (d.gamma > tau) return d;
        }
        return std::nullopt;
    }

    [[nodiscard]] std::optional<SketchDraw> draw(const Matrix& A, std::span<const double> b,
                                                 std::span<const double> x, Rng& rng) const {
        return draw(A, b, x, rng, zero_threshold(b));
    }

private:
    SketchFamily(SketchKind kind, const Matrix& A, std::size_t q)
        : kind_(kind), q_(q), m_(A.rows()), n_(A.cols()), padded_rows_(A.rows()) {
        if (q < 1 || q > A.rows()) {
            throw UsageError("sketch size q=" + std::to_string(q) + " must satisfy 1 <= q <= m=" +
                             std::to_string(A.rows()));
        }
    }

    [[nodiscard]] double srht_factor() const noexcept {
        return std::sqrt(static_cast<double>(m_) / static_cast<double>(q_));
    }

    void check_shape(const Matrix& A, std::span<const double> b, std::span<const double> x) const {
        if (A.rows() != m_ || A.cols() != n_ || b.size() != m_ || x.size() != n_) {
            throw UsageError("sketch draw: family was built for a different shape");
        }
    }

    std::size_t sample_block(Rng& rng) const {
        if (live_blocks_ == 0) return 0;
        const double u = rng.uniform01() * cumulative_.back();
        auto idx = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
                                            cumulative_.begin());
        idx = std::min(idx, cumulative_.size() - 1);
        while (weights_[idx] == 0.0) --idx;  // only reachable through rounding at the top end
        return idx;
    }

    // Rejected blocks are tracked until every live block has been seen zero once
    // since the last accepted draw; past 4t consecutive rejections the untested
    // blocks are swept in order.
    std::optional<SketchDraw> draw_partition(const Matrix& A, std::span<const double> b, std::span<const double> x,
                                             Rng& rng, double tau, double scale) const {
        if (live_blocks_ == 0) return std::nullopt;
        std::vector<char> tested(blocks_.size(), 0);
        std::size_t distinct = 0;
        const std::size_t sweep_after = 4 * blocks_.size();
        for (std::size_t attempt = 0; distinct < live_blocks_; ++attempt) {
            SketchSample s;
            if (attempt < sweep_after) {
                s = sample(rng);
            } else {
                s.kind = kind_;
                s.stream_position = rng.position();
                s.block = 0;
                while (tested[s.block] != 0 || weights_[s.block] == 0.0) ++s.block;
            }
            s.scale = scale;
            const auto block = s.block;
            auto d = evaluate(std::move(s), A, b, x);
            if (d.gamma > tau) return d;
            if (tested[block] == 0) {
                tested[block] = 1;
                ++distinct;
            }
        }
        return std::nullopt;
    }

    SketchKind kind_;
    std::size_t q_;
    std::size_t m_;
    std::size_t n_;
    std::size_t padded_rows_;
    bool with_signs_ = true;
    std::vector<std::vector<std::size_t>> blocks_;
    std::vector<Matrix> block_matrices_;
    Vector weights_;
    Vector cumulative_;
    std::size_t live_blocks_ = 0;
};

/// Binds a family to a system and an Rng stream; next(x) is the rejection-loop draw.
class DrawSource {
public:
    DrawSource(const SketchFamily& family, const LinearSystem& system, Rng rng, double scale = 1.0)
        : family_(&family), system_(&system), rng_(rng), tau_(zero_threshold(system.b)), scale_(scale) {}

    std::optional<SketchDraw> next(std::span<const double> x) {
        return family_->draw(system_->A, system_->b, x, rng_, tau_, scale_);
    }

    /// Re-evaluates a previous draw's sketch at another point.
    [[nodiscard]] SketchDraw replay(const SketchSample& s, std::span<const double> x) const {
        return family_->evaluate(s, system_->A, system_->b, x);
    }

    [[nodiscard]] double threshold() const noexcept { return tau_; }
    [[nodiscard]] const SketchFamily& family() const noexcept { return *family_; }

private:
    const SketchFamily* family_;
    const LinearSystem* system_;
    Rng rng_;
    double tau_;
    double scale_;
};

}  // namespace rimk
