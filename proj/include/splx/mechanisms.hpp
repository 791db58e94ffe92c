#pragma once

// Mechanism checks tied to architectural interventions: rotary score shift
// equivariance, absolute positional tables, tied vs untied readout
// expressivity, and the idealized polar-factor (Muon) step.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "numkernel.hpp"

namespace splx::mechanisms {

// ---------------------------------------------------------------------------
// Positional scores

/// Block-diagonal rotation family R_t: pair (2k, 2k+1) is rotated by t * theta_k.
/// R_{s+t} = R_s R_t and R_0 = I hold by construction.
class RotaryFamily {
public:
    explicit RotaryFamily(std::size_t dim, double base = 10000.0) : dim_(dim) {
        check_dim(dim);
        frequencies_.resize(dim / 2);
        for (std::size_t k = 0; k < dim / 2; ++k) {
            frequencies_[k] = std::pow(base, -2.0 * static_cast<double>(k) / static_cast<double>(dim));
        }
    }

    RotaryFamily(std::size_t dim, std::vector<double> frequencies) : dim_(dim), frequencies_(std::move(frequencies)) {
        check_dim(dim);
        if (frequencies_.size() != dim / 2) { throw ShapeError("rotary family needs dim/2 frequencies"); }
    }

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<double> &frequencies() const noexcept { return frequencies_; }

    std::vector<double> apply(std::int64_t position, std::span<const double> v) const {
        if (v.size() != dim_) { throw ShapeError("rotary input has wrong dimension"); }
        std::vector<double> out(dim_);
        for (std::size_t k = 0; k < dim_ / 2; ++k) {
            const double angle = static_cast<double>(position) * frequencies_[k];
            const double c = std::cos(angle);
            const double s = std::sin(angle);
            out[2 * k] = c * v[2 * k] - s * v[2 * k + 1];
            out[2 * k + 1] = s * v[2 * k] + c * v[2 * k + 1];
        }
        return out;
    }

    DenseMatrix matrix(std::int64_t position) const {
        DenseMatrix r(dim_, dim_);
        for (std::size_t k = 0; k < dim_ / 2; ++k) {
            const double angle = static_cast<double>(position) * frequencies_[k];
            r(2 * k, 2 * k) = std::cos(angle);
            r(2 * k, 2 * k + 1) = -std::sin(angle);
            r(2 * k + 1, 2 * k) = std::sin(angle);
            r(2 * k + 1, 2 * k + 1) = std::cos(angle);
        }
        return r;
    }

private:
    static void check_dim(std::size_t dim) {
        if (dim == 0 || dim % 2 != 0) { throw ShapeError("rotary dimension must be even and positive"); }
    }

    std::size_t dim_;
    std::vector<double> frequencies_;
};

/// Finite window of a bi-infinite sequence: row k of `tokens` is x_{start + k}.
/// Shifting by tau (S_tau x)_t = x_{t - tau} moves the window start by tau.
struct Sequence {
    std::int64_t start = 0;
    DenseMatrix tokens;

    std::int64_t end() const noexcept { return start + static_cast<std::int64_t>(tokens.rows()); }
    bool contains(std::int64_t t) const noexcept { return t >= start && t < end(); }

    std::span<const double> at(std::int64_t t) const {
        if (!contains(t)) { throw ShapeError("position " + std::to_string(t) + " outside the sequence window"); }
        return tokens.row(static_cast<std::size_t>(t - start));
    }

    Sequence shifted(std::int64_t tau) const { return Sequence{start + tau, tokens}; }
};

/// Absolute positional table p_t for t in [start, start + rows).
struct PositionalTable {
    std::int64_t start = 0;
    DenseMatrix entries;

    std::span<const double> at(std::int64_t t) const {
        if (t < start || t >= start + static_cast<std::int64_t>(entries.rows())) {
            throw ShapeError("position " + std::to_string(t) + " outside the positional table");
        }
        return entries.row(static_cast<std::size_t>(t - start));
    }
};

struct ScoreProbe {
    DenseMatrix query;  // d x m
    DenseMatrix key;    // d x m
    std::optional<PositionalTable> positional;

    void validate() const {
        if (query.rows() != key.rows() || query.cols() != key.cols()) {
            throw ShapeError("query and key projections must share a shape");
        }
        if (positional && positional->entries.cols() != query.cols()) {
            throw ShapeError("positional table width must match the input dimension");
        }
    }
};

/// a_ij(x) = <R_i W_q x_i, R_j W_k x_j>.
inline double rope_score(const ScoreProbe &probe, const RotaryFamily &rotary, const Sequence &x, std::int64_t i,
                         std::int64_t j) {
    probe.validate();
    if (probe.query.rows() != rotary.dim()) { throw ShapeError("projection height must equal rotary dimension"); }
    if (x.tokens.cols() != probe.query.cols()) { throw ShapeError("token width must match projection width"); }
    const auto q = rotary.apply(i, matvec(probe.query, x.at(i)));
    const auto k = rotary.apply(j, matvec(probe.key, x.at(j)));
    return dot(q, k);
}

/// b_ij(x) = <W_q (x_i + p_i), W_k (x_j + p_j)>.
inline double absolute_score(const ScoreProbe &probe, const Sequence &x, std::int64_t i, std::int64_t j) {
    probe.validate();
    if (!probe.positional) { throw ShapeError("absolute score needs a positional table"); }
    if (x.tokens.cols() != probe.query.cols()) { throw ShapeError("token width must match projection width"); }
    auto add = [](std::span<const double> a, std::span<const double> b) {
        std::vector<double> s(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) { s[k] = a[k] + b[k]; }
        return s;
    };
    const auto qi = matvec(probe.query, add(x.at(i), probe.positional->at(i)));
    const auto kj = matvec(probe.key, add(x.at(j), probe.positional->at(j)));
    return dot(qi, kj);
}

using ScoreFn = std::function<double(const Sequence &, std::int64_t, std::int64_t)>;

/// max |a_{i+tau, j+tau}(S_tau x) - a_ij(x)| over every sample and every index
/// pair inside each sample's window.
inline double shift_equivariance_residual(const ScoreFn &score, std::span<const Sequence> sequences,
                                          std::int64_t tau) {
    double worst = 0.0;
    for (const auto &x : sequences) {
        const Sequence shifted = x.shifted(tau);
        for (std::int64_t i = x.start; i < x.end(); ++i) {
            for (std::int64_t j = x.start; j < x.end(); ++j) {
                const double moved = score(shifted, i + tau, j + tau);
                worst = std::max(worst, std::abs(moved - score(x, i, j)));
            }
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Tied vs untied readout

namespace detail {

constexpr double kMaxCondition = 1e8;

struct EmbeddingFactors {
    DenseMatrix row_basis;  // V x d, orthonormal basis of col(E^T)
    SvdResult factors;      // SVD of E (d x V): U (d x d), sigma, V (V x d)
};

inline EmbeddingFactors factor_embedding(const DenseMatrix &e) {
    if (e.rows() >= e.cols()) { throw DomainError("embedding must satisfy d < V"); }
    SvdResult f = svd(e);
    const double smax = f.singular.front();
    const double smin = f.singular.back();
    if (!(smax > 0.0) || !(smin > 0.0) || smax / smin > kMaxCondition) {
        throw DomainError("embedding is rank deficient or too ill-conditioned");
    }
    DenseMatrix basis = f.v;
    return EmbeddingFactors{std::move(basis), std::move(f)};
}

/// E^+ = V diag(1/sigma) U^T (V x d), so that E E^+ = I_d.
inline DenseMatrix right_pseudo_inverse(const EmbeddingFactors &f) {
    const std::size_t v_dim = f.factors.v.rows();
    const std::size_t d = f.factors.u.rows();
    DenseMatrix pinv(v_dim, d);
    for (std::size_t i = 0; i < v_dim; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) { s += f.factors.v(i, k) * f.factors.u(j, k) / f.factors.singular[k]; }
            pinv(i, j) = s;
        }
    }
    return pinv;
}

/// P X with P the projector onto the span of the orthonormal columns of `basis`.
inline DenseMatrix project_left(const DenseMatrix &basis, const DenseMatrix &x) {
    return basis * (basis.transpose() * x);
}

inline DenseMatrix project_right(const DenseMatrix &x, const DenseMatrix &basis) {
    return (x * basis) * basis.transpose();
}

inline void require_square_target(const DenseMatrix &target, const DenseMatrix &e) {
    if (!target.square() || target.rows() != e.cols()) {
        throw ShapeError("target map must be V x V with V = embedding width");
    }
}

}  // namespace detail

/// Lower bound ||(I - P_out) T*||_F on the error of any tied readout, with
/// P_out the projector onto col(E^T).
inline double tied_projection_residual(const DenseMatrix &target, const DenseMatrix &embedding) {
    detail::require_square_target(target, embedding);
    const auto f = detail::factor_embedding(embedding);
    return (target - detail::project_left(f.row_basis, target)).frobenius_norm();
}

struct TiedFit {
    DenseMatrix core;  // A, d x d
    double residual = 0.0;
};

/// Least-squares A minimizing ||E^T A E - T*||_F: A = (E^T)^+ T* E^+.
inline TiedFit best_tied_fit(const DenseMatrix &target, const DenseMatrix &embedding) {
    detail::require_square_target(target, embedding);
    const auto f = detail::factor_embedding(embedding);
    const DenseMatrix pinv = detail::right_pseudo_inverse(f);
    DenseMatrix core = pinv.transpose() * target * pinv;
    const DenseMatrix fitted = embedding.transpose() * core * embedding;
    return TiedFit{std::move(core), (fitted - target).frobenius_norm()};
}

struct UntiedFit {
    DenseMatrix head;  // B, V x d
    double residual = 0.0;
};

/// Least-squares B minimizing ||B E - T*||_F: B = T* E^+.
inline UntiedFit untied_fit(const DenseMatrix &target, const DenseMatrix &embedding) {
    detail::require_square_target(target, embedding);
    const auto f = detail::factor_embedding(embedding);
    const DenseMatrix pinv = detail::right_pseudo_inverse(f);
    DenseMatrix head = target * pinv;
    const DenseMatrix fitted = head * embedding;
    return UntiedFit{std::move(head), (fitted - target).frobenius_norm()};
}

// ---------------------------------------------------------------------------
// Idealized Muon

struct DescentCheck {
    double initial = 0.0;  // f(W0)
    double lhs = 0.0;      // f(W+)
    double rhs = 0.0;      // f(W0) - eta ||G||_* + L eta^2 r / 2
    double nuclear = 0.0;  // ||G||_*
    std::size_t rank = 0;

    bool holds(double rel_tol = 1e-12) const {
        return lhs <= rhs + rel_tol * std::max({std::abs(rhs), std::abs(initial), 1.0});
    }
    /// Step sizes below this give strict descent.
    double strict_descent_bound(double smoothness) const {
        return 2.0 * nuclear / (smoothness * static_cast<double>(rank));
    }
};

/// One polar-factor step on f(W) = (L/2) ||W - W*||_F^2 from W0.
inline DescentCheck muon_descent_check(const DenseMatrix &w0, const DenseMatrix &w_star, double smoothness,
                                       double eta) {
    if (!(smoothness > 0.0)) { throw DomainError("smoothness must be positive"); }
    if (!(eta > 0.0)) { throw DomainError("step size must be positive"); }
    auto f = [&](const DenseMatrix &w) {
        const double n = (w - w_star).frobenius_norm();
        return 0.5 * smoothness * n * n;
    };
    const DenseMatrix grad = smoothness * (w0 - w_star);
    if (grad.max_abs() == 0.0) { throw DegenerateInput("zero gradient: W0 equals W*"); }
    const SvdResult s = svd(grad);
    const std::size_t r = s.rank();
    double nuclear = 0.0;
    for (std::size_t k = 0; k < r; ++k) { nuclear += s.singular[k]; }
    const DenseMatrix step = w0 - eta * polar_factor(grad);
    DescentCheck out;
    out.initial = f(w0);
    out.lhs = f(step);
    out.nuclear = nuclear;
    out.rank = r;
    out.rhs = out.initial - eta * nuclear + 0.5 * smoothness * eta * eta * static_cast<double>(r);
    return out;
}

/// <G, Q(G)>, which equals the nuclear norm of G.
inline double nuclear_maximizer_check(const DenseMatrix &g) { return inner(g, polar_factor(g)); }

}  // namespace splx::mechanisms
