#pragma once

// Independent reference computations used to cross-check the closed forms and
// kernels: fixed-step RK4, scalar bisection, characteristic-polynomial roots,
// power iteration with deflation and counting-based ranks. None of these call
// into the routines they are meant to check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "matrix.hpp"

namespace splx::oracles {

using State = std::vector<double>;

/// Classical RK4 for an autonomous system y' = f(y), landing exactly on `t`
/// with steps no longer than `max_step`. `f(y, dy)` writes the derivative.
template<typename Rhs>
State rk4(Rhs f, State y, double t, double max_step) {
    if (!(t >= 0.0) || !(max_step > 0.0)) { throw DomainError("rk4 needs t >= 0 and a positive step"); }
    if (t == 0.0) { return y; }
    const auto steps = static_cast<std::size_t>(std::ceil(t / max_step));
    const double h = t / static_cast<double>(steps);
    const std::size_t n = y.size();
    State tmp(n), k1(n), k2(n), k3(n), k4(n);
    for (std::size_t s = 0; s < steps; ++s) {
        f(y, k1);
        for (std::size_t i = 0; i < n; ++i) { tmp[i] = y[i] + 0.5 * h * k1[i]; }
        f(tmp, k2);
        for (std::size_t i = 0; i < n; ++i) { tmp[i] = y[i] + 0.5 * h * k2[i]; }
        f(tmp, k3);
        for (std::size_t i = 0; i < n; ++i) { tmp[i] = y[i] + h * k3[i]; }
        f(tmp, k4);
        for (std::size_t i = 0; i < n; ++i) { y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]); }
    }
    return y;
}

/// a' = kappa (beta - a), integrated numerically.
inline State one_layer_rk4(const dynamics::OneLayerConfig &cfg, double t, double max_step) {
    State y0;
    for (const auto &m : cfg.modes) { y0.push_back(m.a0); }
    auto rhs = [&](const State &a, State &d) {
        for (std::size_t r = 0; r < a.size(); ++r) { d[r] = cfg.modes[r].kappa * (cfg.modes[r].beta - a[r]); }
    };
    return rk4(rhs, std::move(y0), t, max_step);
}

/// m' = 2 m (beta - m), integrated numerically.
inline State two_layer_rk4(const dynamics::TwoLayerConfig &cfg, double t, double max_step) {
    State y0;
    for (const auto &m : cfg.modes) { y0.push_back(m.m0); }
    auto rhs = [&](const State &m, State &d) {
        for (std::size_t r = 0; r < m.size(); ++r) { d[r] = 2.0 * m[r] * (cfg.modes[r].beta - m[r]); }
    };
    return rk4(rhs, std::move(y0), t, max_step);
}

/// Root of a monotone f on [lo, hi] (f(lo), f(hi) of opposite sign).
inline double bisect(const std::function<double(double)> &f, double lo, double hi, double rel_tol = 1e-15) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) { return lo; }
    if (fhi == 0.0) { return hi; }
    if ((flo > 0.0) == (fhi > 0.0)) { throw DomainError("bisection bracket does not change sign"); }
    for (int it = 0; it < 2000 && (hi - lo) > rel_tol * std::max(std::abs(lo), std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) { return mid; }
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Grows hi geometrically until f changes sign relative to f(lo).
inline double bisect_expanding(const std::function<double(double)> &f, double lo, double hi) {
    const bool sign_lo = f(lo) > 0.0;
    for (int k = 0; k < 2000 && (f(hi) > 0.0) == sign_lo; ++k) { hi *= 2.0; }
    return bisect(f, lo, hi);
}

/// Smallest t at which every integer rank r <= R has 1 - exp(-eta r^-q t) >= 1 - delta,
/// found by bisection on the worst mode over all ranks.
inline double band_recruitment_bisection(double eta, double q, std::size_t cutoff, double delta) {
    auto worst = [&](double t) {
        double w = 1.0;
        for (std::size_t r = 1; r <= cutoff; ++r) {
            w = std::min(w, 1.0 - std::exp(-eta * std::pow(static_cast<double>(r), -q) * t));
        }
        return w - (1.0 - delta);
    };
    return bisect_expanding(worst, 0.0, 1.0);
}

/// Head-matched recruitment time computed from scratch: eta is bisected so the
/// anchor reaches progress xi at t0, then the band time is bisected.
inline double head_matched_bisection(double q, std::size_t anchor, double xi, double t0, std::size_t cutoff,
                                     double delta) {
    const double ra = static_cast<double>(anchor);
    auto anchor_gap = [&](double eta) { return 1.0 - std::exp(-eta * std::pow(ra, -q) * t0) - xi; };
    const double eta = bisect_expanding(anchor_gap, 0.0, 1.0);
    return band_recruitment_bisection(eta, q, cutoff, delta);
}

// ---------------------------------------------------------------------------
// Eigenvalue oracles

/// Coefficients c_0..c_n of det(lambda I - A) = sum c_k lambda^k via
/// Faddeev-LeVerrier. Only sensible for small n.
inline std::vector<double> characteristic_polynomial(const DenseMatrix &a) {
    if (!a.square()) { throw ShapeError("characteristic polynomial needs a square matrix"); }
    const std::size_t n = a.rows();
    std::vector<double> c(n + 1, 0.0);
    c[n] = 1.0;
    DenseMatrix m(n, n, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        DenseMatrix next = a * m;
        for (std::size_t i = 0; i < n; ++i) { next(i, i) += c[n - k + 1]; }
        m = next;
        const DenseMatrix am = a * m;
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i) { tr += am(i, i); }
        c[n - k] = -tr / static_cast<double>(k);
    }
    return c;
}

/// All roots of a monic polynomial by Durand-Kerner iteration.
inline std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs) {
    const std::size_t n = coeffs.size() - 1;
    if (n == 0) { return {}; }
    auto eval = [&](std::complex<double> z) {
        std::complex<double> v = coeffs[n];
        for (std::size_t k = n; k-- > 0;) { v = v * z + coeffs[k]; }
        return v;
    };
    double radius = 0.0;
    for (std::size_t k = 0; k < n; ++k) { radius = std::max(radius, std::abs(coeffs[k])); }
    radius = 1.0 + radius;
    std::vector<std::complex<double>> z(n);
    const std::complex<double> seed(0.4, 0.9);
    for (std::size_t k = 0; k < n; ++k) { z[k] = radius * std::pow(seed, static_cast<double>(k)); }
    for (int it = 0; it < 5000; ++it) {
        double move = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<double> denom = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) { denom *= z[i] - z[j]; }
            }
            const std::complex<double> delta = eval(z[i]) / denom;
            z[i] -= delta;
            move = std::max(move, std::abs(delta));
        }
        if (move < 1e-15 * radius) { break; }
    }
    return z;
}

/// Eigenvalues of a small symmetric matrix as real parts of the
/// characteristic-polynomial roots, sorted descending.
inline std::vector<double> symmetric_eigenvalues_charpoly(const DenseMatrix &a) {
    const auto roots = polynomial_roots(characteristic_polynomial(a));
    std::vector<double> out;
    for (const auto &z : roots) { out.push_back(z.real()); }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

/// Top-k eigenvalues of a positive semidefinite matrix by power iteration with
/// Hotelling deflation.
inline std::vector<double> psd_top_eigenvalues(DenseMatrix a, std::size_t k, std::uint64_t seed,
                                               std::size_t iterations = 4000) {
    if (!a.square()) { throw ShapeError("power iteration needs a square matrix"); }
    const std::size_t n = a.rows();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> out;
    for (std::size_t e = 0; e < std::min(k, n); ++e) {
        std::vector<double> v(n);
        for (auto &x : v) { x = gauss(rng); }
        double lambda = 0.0;
        for (std::size_t it = 0; it < iterations; ++it) {
            std::vector<double> w = matvec(a, v);
            const double nw = std::sqrt(dot(w, w));
            if (nw == 0.0) {
                lambda = 0.0;
                break;
            }
            for (std::size_t i = 0; i < n; ++i) { v[i] = w[i] / nw; }
            lambda = nw;
        }
        out.push_back(lambda);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) { a(i, j) -= lambda * v[i] * v[j]; }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rank statistics

/// Average 1-based ranks by counting: #(smaller) + (#(equal) + 1) / 2.
inline std::vector<double> counting_ranks(std::span<const double> v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0.0, equal = 0.0;
        for (double x : v) {
            if (x < v[i]) { less += 1.0; }
            if (x == v[i]) { equal += 1.0; }
        }
        r[i] = less + 0.5 * (equal + 1.0);
    }
    return r;
}

/// Spearman correlation from counting ranks, centering on the exact mean rank
/// (n + 1) / 2.
inline double spearman_counting(std::span<const double> x, std::span<const double> y) {
    const auto rx = counting_ranks(x);
    const auto ry = counting_ranks(y);
    const double mean = 0.5 * static_cast<double>(x.size() + 1);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mean) * (ry[i] - mean);
        sxx += (rx[i] - mean) * (rx[i] - mean);
        syy += (ry[i] - mean) * (ry[i] - mean);
    }
    return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Random witnesses

inline DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::mt19937_64 &rng, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) { m(i, j) = gauss(rng); }
    }
    return m;
}

/// Random n x n orthogonal matrix from modified Gram-Schmidt on Gaussian columns.
inline DenseMatrix random_orthogonal(std::size_t n, std::mt19937_64 &rng) {
    DenseMatrix g = gaussian_matrix(n, n, rng);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double proj = 0.0;
            for (std::size_t i = 0; i < n; ++i) { proj += g(i, j) * g(i, k); }
            for (std::size_t i = 0; i < n; ++i) { g(i, j) -= proj * g(i, k); }
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) { norm += g(i, j) * g(i, j); }
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) { g(i, j) /= norm; }
    }
    return g;
}

inline DenseMatrix random_symmetric(std::size_t n, std::mt19937_64 &rng) {
    const DenseMatrix g = gaussian_matrix(n, n, rng);
    return 0.5 * (g + g.transpose());
}

}  // namespace splx::oracles
