#pragma once

// Dense numerical primitives: symmetric eigensolver, SVD, polar factor and
// log-log least-squares slope.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"

namespace splx {

struct EigenResult {
    std::vector<double> eigenvalues;  // descending
    DenseMatrix eigenvectors;         // column j pairs with eigenvalues[j]
};

struct SvdResult {
    DenseMatrix u;                     // m x k, orthonormal columns
    std::vector<double> singular;      // k = min(m, n), descending, >= 0
    DenseMatrix v;                     // n x k, orthonormal columns

    std::size_t rank(double rel_tol = 1e-12) const {
        if (singular.empty() || singular.front() == 0.0) { return 0; }
        const double cut = rel_tol * singular.front();
        return static_cast<std::size_t>(
            std::count_if(singular.begin(), singular.end(), [cut](double s) { return s > cut; }));
    }
};

struct SlopeFit {
    double slope = 0.0;
    double residual = 0.0;  // RMS residual in log space
};

namespace detail {

/// Stable descending order; ties keep original index order.
inline std::vector<std::size_t> descending_order(std::span<const double> values) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    return idx;
}

inline double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) { s += x * x; }
    return std::sqrt(s);
}

/// Extends `basis` (orthonormal, each of length n) to `target` vectors with
/// modified Gram-Schmidt over the standard basis.
inline void complete_orthonormal(std::vector<std::vector<double>> &basis, std::size_t n, std::size_t target) {
    for (std::size_t e = 0; e < n && basis.size() < target; ++e) {
        std::vector<double> cand(n, 0.0);
        cand[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto &b : basis) {
                const double proj = dot(b, cand);
                for (std::size_t k = 0; k < n; ++k) { cand[k] -= proj * b[k]; }
            }
        }
        const double nrm = norm2(cand);
        if (nrm > 1e-8) {
            for (double &x : cand) { x /= nrm; }
            basis.push_back(std::move(cand));
        }
    }
}

/// One-sided Jacobi SVD for a tall matrix (rows >= cols).
inline SvdResult svd_tall(const DenseMatrix &g) {
    const std::size_t m = g.rows();
    const std::size_t n = g.cols();
    std::vector<std::vector<double>> a(n, std::vector<double>(m));
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) { a[j][i] = g(i, j); }
        v[j][j] = 1.0;
    }

    constexpr int kMaxSweeps = 80;
    constexpr double kOrthTol = 1e-15;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += a[p][i] * a[p][i];
                    beta += a[q][i] * a[q][i];
                    gamma += a[p][i] * a[q][i];
                }
                if (gamma == 0.0 || std::abs(gamma) <= kOrthTol * std::sqrt(alpha * beta)) { continue; }
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double ap = a[p][i], aq = a[q][i];
                    a[p][i] = c * ap - s * aq;
                    a[q][i] = s * ap + c * aq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v[p][i], vq = v[q][i];
                    v[p][i] = c * vp - s * vq;
                    v[q][i] = s * vp + c * vq;
                }
            }
        }
        if (!rotated) { break; }
    }

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) { sigma[j] = norm2(a[j]); }
    const auto order = descending_order(sigma);
    const double smax = sigma[order.front()];
    const double cut = 1e-12 * smax;

    SvdResult out{DenseMatrix(m, n), std::vector<double>(n, 0.0), DenseMatrix(n, n)};
    std::vector<std::vector<double>> ucols;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        for (std::size_t i = 0; i < n; ++i) { out.v(i, k) = v[j][i]; }
        if (smax > 0.0 && sigma[j] > cut) {
            out.singular[k] = sigma[j];
            std::vector<double> u(m);
            for (std::size_t i = 0; i < m; ++i) { u[i] = a[j][i] / sigma[j]; }
            ucols.push_back(std::move(u));
        }
    }
    complete_orthonormal(ucols, m, n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < m; ++i) { out.u(i, k) = ucols[k][i]; }
    }
    return out;
}

}  // namespace detail

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Iterates until the off-diagonal Frobenius mass drops below 1e-12 * ||A||_F.
/// Eigenvalues come back descending; equal eigenvalues keep the order in which
/// the diagonal produced them.
inline EigenResult sym_eig(const DenseMatrix &input) {
    if (!input.square()) { throw ShapeError("sym_eig needs a square matrix, got " + input.shape_string()); }
    const std::size_t n = input.rows();
    const double scale = std::max(input.max_abs(), 1e-300);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(input(i, j) - input(j, i)) > 1e-12 * scale) {
                throw ShapeError("sym_eig input is not symmetric");
            }
        }
    }

    DenseMatrix a = input;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = avg;
            a(j, i) = avg;
        }
    }
    DenseMatrix vecs = DenseMatrix::identity(n);
    const double norm_f = a.frobenius_norm();

    auto off_mass = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j) { s += a(i, j) * a(i, j); }
            }
        }
        return std::sqrt(s);
    };

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps && norm_f > 0.0; ++sweep) {
        if (off_mass() < 1e-12 * norm_f) { break; }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) { continue; }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vecs(k, p), vkq = vecs(k, q);
                    vecs(k, p) = c * vkp - s * vkq;
                    vecs(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) { diag[i] = a(i, i); }
    const auto order = detail::descending_order(diag);
    EigenResult out{std::vector<double>(n), DenseMatrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = diag[order[k]];
        for (std::size_t i = 0; i < n; ++i) { out.eigenvectors(i, k) = vecs(i, order[k]); }
    }
    return out;
}

/// Compact SVD G = U diag(sigma) V^T with k = min(rows, cols) factors.
/// Singular values below 1e-12 * sigma_max are reported as exactly zero.
inline SvdResult svd(const DenseMatrix &g) {
    if (g.rows() >= g.cols()) { return detail::svd_tall(g); }
    SvdResult t = detail::svd_tall(g.transpose());
    return SvdResult{std::move(t.v), std::move(t.singular), std::move(t.u)};
}

inline double nuclear_norm(const DenseMatrix &g) {
    const auto s = svd(g).singular;
    return std::accumulate(s.begin(), s.end(), 0.0);
}

/// Polar factor Q(G) = U V^T restricted to singular directions whose value
/// exceeds rank_tol * sigma_max.
inline DenseMatrix polar_factor(const DenseMatrix &g, double rank_tol = 1e-12) {
    const SvdResult f = svd(g);
    if (f.singular.front() == 0.0) { throw DegenerateInput("polar factor of an all-zero matrix"); }
    const std::size_t r = f.rank(rank_tol);
    DenseMatrix q(g.rows(), g.cols());
    for (std::size_t k = 0; k < r; ++k) {
        for (std::size_t i = 0; i < g.rows(); ++i) {
            const double uik = f.u(i, k);
            for (std::size_t j = 0; j < g.cols(); ++j) { q(i, j) += uik * f.v(j, k); }
        }
    }
    return q;
}

/// Ordinary least-squares slope of (ln rank, ln value) with RMS residual.
inline SlopeFit loglog_slope(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 2) { throw ShapeError("loglog_slope needs at least 2 points"); }
    const double n = static_cast<double>(pairs.size());
    double mx = 0.0, my = 0.0;
    std::vector<double> xs, ys;
    xs.reserve(pairs.size());
    ys.reserve(pairs.size());
    for (const auto &[rank, value] : pairs) {
        if (!(rank > 0.0)) { throw DomainError("rank must be positive"); }
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw DomainError("nonpositive value at rank " + std::to_string(static_cast<long long>(rank)));
        }
        xs.push_back(std::log(rank));
        ys.push_back(std::log(value));
        mx += xs.back();
        my += ys.back();
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    if (sxx == 0.0) { throw ShapeError("loglog_slope needs at least 2 distinct ranks"); }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    const double intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double r = ys[k] - (intercept + fit.slope * xs[k]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

}  // namespace splx
