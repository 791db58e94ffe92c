#pragma once

// Activation/gradient spectral measurements: centered covariance spectra,
// trace normalization, band-restricted power-law exponents, RankMe,
// per-sample gradient spectra and spectral Jensen-Shannon divergence.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "numkernel.hpp"

namespace splx {

inline std::vector<double> trace_normalize(std::span<const double> values);

/// Sorted nonnegative spectrum. The trace-normalized form exists only when the
/// trace is positive; asking for it on a zero spectrum raises DegenerateSpectrum.
class Spectrum {
public:
    explicit Spectrum(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) { throw ShapeError("spectrum must have at least one value"); }
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (!(values_[k] >= 0.0) || !std::isfinite(values_[k])) {
                throw DomainError("spectrum values must be finite and nonnegative (index " + std::to_string(k) + ")");
            }
            if (k > 0 && values_[k] > values_[k - 1]) { throw DomainError("spectrum values must be descending"); }
        }
        trace_ = std::accumulate(values_.begin(), values_.end(), 0.0);
        if (trace_ > 0.0) { normalized_ = trace_normalize(values_); }
    }

    /// Sorts a copy descending before constructing.
    static Spectrum from_unsorted(std::vector<double> values) {
        std::stable_sort(values.begin(), values.end(), std::greater<>());
        return Spectrum(std::move(values));
    }

    const std::vector<double> &values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double trace() const noexcept { return trace_; }
    bool has_normalized() const noexcept { return normalized_.has_value(); }

    const std::vector<double> &normalized() const {
        if (!normalized_) { throw DegenerateSpectrum("spectrum has zero trace"); }
        return *normalized_;
    }

private:
    std::vector<double> values_;
    double trace_ = 0.0;
    std::optional<std::vector<double>> normalized_;
};

/// 1-based inclusive rank window.
struct RankWindow {
    std::size_t lo = 1;
    std::size_t hi = 2;

    friend bool operator==(const RankWindow &, const RankWindow &) = default;
};

struct TailFit {
    RankWindow window;
    double alpha = 0.0;
    double residual = 0.0;
};

struct ScaleTier {
    std::string name;
    std::size_t layers = 0;
};

inline std::vector<double> trace_normalize(std::span<const double> values) {
    double total = 0.0;
    for (double v : values) {
        if (v < 0.0) { throw DomainError("trace_normalize expects nonnegative values"); }
        total += v;
    }
    if (!(total > 0.0)) { throw DegenerateSpectrum("zero trace"); }
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [total](double v) { return v / total; });
    return out;
}

/// Eigenvalues of the centered covariance (1/(N-1)) sum (h_i - mean)(h_i - mean)^T.
/// Roundoff negatives down to -1e-12 * trace are clamped to zero; anything
/// more negative is reported as a DomainError.
inline Spectrum covariance_spectrum(const DenseMatrix &h) {
    const std::size_t n = h.rows();
    const std::size_t d = h.cols();
    if (n < 2) { throw ShapeError("covariance needs at least 2 rows"); }
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = h.row(i);
        for (std::size_t j = 0; j < d; ++j) { mean[j] += r[j]; }
    }
    for (double &m : mean) { m /= static_cast<double>(n); }

    DenseMatrix cov(d, d);
    std::vector<double> centered(d);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = h.row(i);
        for (std::size_t j = 0; j < d; ++j) { centered[j] = r[j] - mean[j]; }
        for (std::size_t a = 0; a < d; ++a) {
            const double ca = centered[a];
            if (ca == 0.0) { continue; }
            for (std::size_t b = a; b < d; ++b) { cov(a, b) += ca * centered[b]; }
        }
    }
    const double inv = 1.0 / static_cast<double>(n - 1);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            cov(a, b) *= inv;
            cov(b, a) = cov(a, b);
        }
    }

    double trace = 0.0;
    for (std::size_t a = 0; a < d; ++a) { trace += cov(a, a); }
    auto eig = sym_eig(cov).eigenvalues;
    for (double &v : eig) {
        if (v < 0.0) {
            if (v < -1e-12 * std::max(trace, 0.0) && v < -1e-300) {
                throw DomainError("covariance has a significantly negative eigenvalue");
            }
            v = 0.0;
        }
    }
    return Spectrum(std::move(eig));
}

/// alpha(I) = -slope of (ln j, ln normalized_j) over the window.
inline TailFit band_alpha(const Spectrum &spec, RankWindow window) {
    if (window.lo < 1 || window.lo >= window.hi || window.hi > spec.size()) {
        throw ShapeError("window [" + std::to_string(window.lo) + "," + std::to_string(window.hi) +
                         "] invalid for spectrum of length " + std::to_string(spec.size()));
    }
    const auto &norm = spec.normalized();
    std::vector<std::pair<double, double>> pts;
    pts.reserve(window.hi - window.lo + 1);
    for (std::size_t j = window.lo; j <= window.hi; ++j) {
        const double v = norm[j - 1];
        if (!(v > 0.0)) { throw DomainError("zero eigenvalue inside fit window at rank " + std::to_string(j)); }
        pts.emplace_back(static_cast<double>(j), v);
    }
    const SlopeFit fit = loglog_slope(pts);
    return TailFit{window, -fit.slope, fit.residual};
}

/// Tail window assigned to a model scale: d12 -> [100,200], d36 -> [200,400], d48 -> [400,800].
inline RankWindow select_window(const ScaleTier &tier) {
    if (tier.name == "d12") { return {100, 200}; }
    if (tier.name == "d36") { return {200, 400}; }
    if (tier.name == "d48") { return {400, 800}; }
    throw ConfigError("unknown scale tier '" + tier.name + "' (expected d12, d36 or d48)");
}

inline RankWindow select_window(const std::string &tier_name) { return select_window(ScaleTier{tier_name, 0}); }

/// Entropy effective rank exp(-sum p ln p), with 0 ln 0 = 0.
inline double rankme(const Spectrum &spec) {
    const auto &p = spec.normalized();
    double h = 0.0;
    for (double pj : p) {
        if (pj > 0.0) { h -= pj * std::log(pj); }
    }
    return std::exp(h);
}

/// Singular values of the M x P per-sample gradient stack. The normalized form
/// divides by the sum of singular values.
inline Spectrum gradient_spectrum(const DenseMatrix &stack) { return Spectrum(svd(stack).singular); }

inline Spectrum gradient_spectrum(const std::vector<std::vector<double>> &rows) {
    if (rows.empty()) { throw ShapeError("gradient stack needs at least one row"); }
    const std::size_t p = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * p);
    for (const auto &r : rows) {
        if (r.size() != p) { throw ShapeError("ragged per-sample gradient rows"); }
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return gradient_spectrum(DenseMatrix(rows.size(), p, std::move(flat)));
}

/// Jensen-Shannon divergence (natural log) between two normalized spectra; the
/// shorter one is padded with zeros.
inline double js_divergence(const Spectrum &a, const Spectrum &b) {
    const auto &p = a.normalized();
    const auto &q = b.normalized();
    const std::size_t n = std::max(p.size(), q.size());
    double js = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double pk = k < p.size() ? p[k] : 0.0;
        const double qk = k < q.size() ? q[k] : 0.0;
        const double mk = 0.5 * (pk + qk);
        const double tp = pk > 0.0 ? pk * std::log(pk / mk) : 0.0;
        const double tq = qk > 0.0 ? qk * std::log(qk / mk) : 0.0;
        js += 0.5 * (tp + tq);  // commutative per term, so js(a, b) == js(b, a) exactly
    }
    return std::clamp(js, 0.0, std::log(2.0));
}

}  // namespace splx
