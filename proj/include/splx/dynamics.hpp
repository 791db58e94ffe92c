#pragma once

// Closed-form Fourier-mode learning dynamics for the cyclic toy task:
// one-layer linearized gradient flow, smooth power-law spectra, recruitment
// laws, activation/gradient crossovers and the balanced two-layer factor model.
//
// Fourier characters are never materialized; everything is stated on real
// per-mode coefficients, energies and rates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "spectra.hpp"

namespace splx::dynamics {

// ---------------------------------------------------------------------------
// Cyclic task

struct CyclicTask {
    std::int64_t cycle = 2;   // c >= 2
    std::int64_t step = 1;    // 0 <= step < c
    std::int64_t offset = 0;  // o
    std::size_t length = 1;   // L >= 1

    void validate() const {
        if (cycle < 2) { throw DomainError("cycle length must be >= 2"); }
        if (step < 0 || step >= cycle) { throw DomainError("step must lie in [0, c)"); }
        if (length < 1) { throw DomainError("context length must be >= 1"); }
    }
};

struct CyclicSample {
    std::vector<std::int64_t> tokens;
    std::int64_t target = 0;
};

/// x_j = o + (a + j d mod c) for j < L, target o + (a + L d mod c).
inline CyclicSample cyclic_sequence(const CyclicTask &task, std::int64_t phase) {
    task.validate();
    if (phase < 0 || phase >= task.cycle) { throw DomainError("phase must lie in [0, c)"); }
    CyclicSample out;
    out.tokens.reserve(task.length);
    for (std::size_t j = 0; j < task.length; ++j) {
        const auto jj = static_cast<std::int64_t>(j);
        out.tokens.push_back(task.offset + (phase + jj * task.step) % task.cycle);
    }
    const auto len = static_cast<std::int64_t>(task.length);
    out.target = task.offset + (phase + len * task.step) % task.cycle;
    return out;
}

// ---------------------------------------------------------------------------
// One-layer linearized model

struct Mode {
    double beta = 0.0;   // teacher coefficient
    double kappa = 0.0;  // kernel eigenvalue (rate), >= 0
    double a0 = 0.0;     // initial coefficient
};

struct OneLayerConfig {
    std::vector<Mode> modes;

    void validate() const {
        if (modes.empty()) { throw DomainError("one-layer config needs at least one mode"); }
        for (const auto &m : modes) {
            if (!std::isfinite(m.beta) || !std::isfinite(m.kappa) || !std::isfinite(m.a0)) {
                throw DomainError("mode parameters must be finite");
            }
            if (m.kappa < 0.0) { throw DomainError("mode rates must be nonnegative"); }
        }
    }

    double max_rate() const {
        double k = 0.0;
        for (const auto &m : modes) { k = std::max(k, m.kappa); }
        return k;
    }

    double min_rate() const {
        double k = std::numeric_limits<double>::infinity();
        for (const auto &m : modes) { k = std::min(k, m.kappa); }
        return k;
    }
};

namespace detail {

inline void require_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) { throw DomainError("time must be finite and >= 0"); }
}

/// Solves f(t) = target for a strictly decreasing f on [0, inf). The upper
/// bracket doubles from 1 until f drops to or below target; bisection stops at
/// 1e-12 relative width.
inline double solve_decreasing(const std::function<double(double)> &f, double target) {
    double lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    while (f(hi) > target) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 1100) { throw DomainError("target level is never reached"); }
    }
    for (int it = 0; it < 400 && (hi - lo) > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// a_r(t) = beta_r + (a_r(0) - beta_r) exp(-kappa_r t).
inline std::vector<double> one_layer_state(const OneLayerConfig &cfg, double t) {
    cfg.validate();
    detail::require_time(t);
    std::vector<double> a;
    a.reserve(cfg.modes.size());
    for (const auto &m : cfg.modes) { a.push_back(m.beta + (m.a0 - m.beta) * std::exp(-m.kappa * t)); }
    return a;
}

struct ModeEnergies {
    std::vector<double> activation;  // |a_r|^2
    std::vector<double> gradient;    // kappa_r^2 |beta_r - a_r|^2
};

/// Second-moment energies per mode, in mode order.
inline ModeEnergies mode_energies(const OneLayerConfig &cfg, double t) {
    const auto a = one_layer_state(cfg, t);
    ModeEnergies e;
    e.activation.reserve(a.size());
    e.gradient.reserve(a.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
        const auto &m = cfg.modes[r];
        const double resid = m.beta - a[r];
        e.activation.push_back(a[r] * a[r]);
        e.gradient.push_back(m.kappa * m.kappa * resid * resid);
    }
    return e;
}

/// Centered-covariance energies: the DC mode only shifts the mean, so its entry
/// is dropped from both lists.
inline ModeEnergies centered_mode_energies(const OneLayerConfig &cfg, double t, std::size_t dc_mode) {
    if (dc_mode >= cfg.modes.size()) { throw DomainError("DC mode index out of range"); }
    ModeEnergies e = mode_energies(cfg, t);
    e.activation.erase(e.activation.begin() + static_cast<std::ptrdiff_t>(dc_mode));
    e.gradient.erase(e.gradient.begin() + static_cast<std::ptrdiff_t>(dc_mode));
    return e;
}

/// L(t) = 1/2 sum_r |a_r(t) - beta_r|^2.
inline double loss(const OneLayerConfig &cfg, double t) {
    const auto a = one_layer_state(cfg, t);
    double s = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r) {
        const double d = a[r] - cfg.modes[r].beta;
        s += d * d;
    }
    return 0.5 * s;
}

/// Loss floor as t -> inf: frozen (kappa = 0) modes keep their residual.
inline double loss_limit(const OneLayerConfig &cfg) {
    double s = 0.0;
    for (const auto &m : cfg.modes) {
        if (m.kappa == 0.0) { s += (m.a0 - m.beta) * (m.a0 - m.beta); }
    }
    return 0.5 * s;
}

/// Unique t with loss(cfg, t) == level, for level strictly between the
/// asymptotic floor and the initial loss.
inline double matched_loss_time(const OneLayerConfig &cfg, double level) {
    cfg.validate();
    const double initial = loss(cfg, 0.0);
    const double floor = loss_limit(cfg);
    if (!(level < initial) || !(level > floor)) {
        throw DomainError("loss level " + std::to_string(level) + " outside (" + std::to_string(floor) + ", " +
                          std::to_string(initial) + ")");
    }
    return detail::solve_decreasing([&](double t) { return loss(cfg, t); }, level);
}

/// P(t) = |a_1|^2 / sum_r |a_r|^2.
inline double leading_mode_share(const OneLayerConfig &cfg, double t) {
    const auto a = one_layer_state(cfg, t);
    double total = 0.0;
    for (double x : a) { total += x * x; }
    if (!(total > 0.0)) { throw DegenerateInput("zero total activation mass"); }
    return a.front() * a.front() / total;
}

// ---------------------------------------------------------------------------
// Two-band early prediction

/// Fast-band share of activation mass at t0 for k fast modes (rate kappa_bar)
/// out of m, the rest slow (rate kappa_s). Equal rates return k/m.
inline double band_concentration(std::size_t k, std::size_t m, double kappa_bar, double kappa_s, double t0) {
    if (!(k > 0 && k < m)) { throw DomainError("band sizes need 0 < k < m"); }
    if (!(t0 > 0.0)) { throw DomainError("early time must be positive"); }
    if (!(kappa_s > 0.0) || kappa_s > kappa_bar) { throw DomainError("rates need 0 < kappa_s <= kappa_bar"); }
    if (kappa_s == kappa_bar) { return static_cast<double>(k) / static_cast<double>(m); }
    const double fast = -std::expm1(-kappa_bar * t0);
    const double slow = -std::expm1(-kappa_s * t0);
    const double a = static_cast<double>(k) * fast * fast;
    const double b = static_cast<double>(m - k) * slow * slow;
    return a / (a + b);
}

/// Unique T with 1/2 (k e^{-2 kbar T} + (m-k) e^{-2 ks T}) = eps.
inline double time_to_target(std::size_t k, std::size_t m, double kappa_bar, double kappa_s, double eps) {
    if (!(k > 0 && k <= m)) { throw DomainError("band sizes need 0 < k <= m"); }
    if (!(kappa_bar > 0.0)) { throw DomainError("fast rate must be positive"); }
    if (k < m && !(kappa_s > 0.0)) { throw DomainError("slow rate must be positive"); }
    const double half_m = 0.5 * static_cast<double>(m);
    if (!(eps > 0.0) || !(eps < half_m)) { throw DomainError("target loss must lie in (0, m/2)"); }
    const double kf = static_cast<double>(k);
    const double ks = static_cast<double>(m - k);
    auto f = [&](double t) {
        double v = kf * std::exp(-2.0 * kappa_bar * t);
        if (ks > 0.0) { v += ks * std::exp(-2.0 * kappa_s * t); }
        return 0.5 * v;
    };
    return detail::solve_decreasing(f, eps);
}

// ---------------------------------------------------------------------------
// Smooth power-law specialization

struct SmoothSpectrumConfig {
    double scale = 1.0;      // C
    double teacher_exp = 1.0;  // p
    double rate = 1.0;       // eta
    double rate_exp = 0.5;   // q
    std::size_t ranks = 100;

    void validate() const {
        if (!(scale > 0.0) || !(teacher_exp > 0.0) || !(rate > 0.0)) {
            throw DomainError("C, p and eta must be positive");
        }
        if (!(rate_exp >= 0.0)) { throw DomainError("q must be nonnegative"); }
        if (ranks < 1) { throw DomainError("ranks must be >= 1"); }
    }

    /// kappa_r = eta r^{-q}
    double mode_rate(double r) const { return rate * std::pow(r, -rate_exp); }
};

/// lambda_r = C r^{-p} (1 - exp(-eta t r^{-q}))^2 for r = 1..ranks.
inline Spectrum smooth_act_spectrum(const SmoothSpectrumConfig &cfg, double t) {
    cfg.validate();
    detail::require_time(t);
    std::vector<double> values(cfg.ranks);
    for (std::size_t i = 0; i < cfg.ranks; ++i) {
        const double r = static_cast<double>(i + 1);
        const double learned = -std::expm1(-cfg.rate * t * std::pow(r, -cfg.rate_exp));
        values[i] = cfg.scale * std::pow(r, -cfg.teacher_exp) * learned * learned;
    }
    return Spectrum::from_unsorted(std::move(values));
}

/// r_* = (eta t)^{1/q}
inline double crossover_rank(const SmoothSpectrumConfig &cfg, double t) {
    if (!(cfg.rate_exp > 0.0)) { throw DomainError("no crossover rank when q = 0"); }
    if (!(t > 0.0)) { throw DomainError("crossover rank needs t > 0"); }
    return std::pow(cfg.rate * t, 1.0 / cfg.rate_exp);
}

/// Tail exponent p + 2q of the unresolved zone.
inline double tail_alpha(const SmoothSpectrumConfig &cfg) { return cfg.teacher_exp + 2.0 * cfg.rate_exp; }

/// Time for every mode up to rank R to reach (1 - delta) of its teacher
/// coefficient: log(1/delta) R^q / eta.
inline double band_recruitment_time(const SmoothSpectrumConfig &cfg, double cutoff_rank, double delta) {
    cfg.validate();
    if (!(cutoff_rank >= 1.0)) { throw DomainError("cutoff rank must be >= 1"); }
    if (!(delta > 0.0 && delta < 1.0)) { throw DomainError("delta must lie in (0, 1)"); }
    return std::log(1.0 / delta) / cfg.rate * std::pow(cutoff_rank, cfg.rate_exp);
}

/// eta recovered from a head anchor: a_{r_h}(t0) = xi beta_{r_h}.
inline double implied_rate(double rate_exp, double anchor_rank, double xi, double t0) {
    if (!(xi > 0.0 && xi < 1.0)) { throw DomainError("anchor progress must lie in (0, 1)"); }
    if (!(t0 > 0.0)) { throw DomainError("early time must be positive"); }
    if (!(anchor_rank >= 1.0)) { throw DomainError("anchor rank must be >= 1"); }
    return -std::pow(anchor_rank, rate_exp) * std::log1p(-xi) / t0;
}

/// Band-recruitment time after matching head progress at t0; only q is taken
/// from cfg (eta is implied by the anchor).
inline double head_matched_time(const SmoothSpectrumConfig &cfg, double anchor_rank, double xi, double t0,
                                double cutoff_rank, double delta) {
    if (!(cutoff_rank > anchor_rank)) { throw DomainError("cutoff rank must exceed the anchor rank"); }
    if (!(anchor_rank >= 1.0)) { throw DomainError("anchor rank must be >= 1"); }
    if (!(xi > 0.0 && xi < 1.0)) { throw DomainError("anchor progress must lie in (0, 1)"); }
    if (!(t0 > 0.0)) { throw DomainError("early time must be positive"); }
    if (!(delta > 0.0 && delta < 1.0)) { throw DomainError("delta must lie in (0, 1)"); }
    return std::log(1.0 / delta) / (-std::log1p(-xi)) * t0 * std::pow(cutoff_rank / anchor_rank, cfg.rate_exp);
}

/// Time at which the update-side energies of modes i and j (kappa_i > kappa_j) cross.
inline double grad_crossover_time(double kappa_i, double kappa_j) {
    if (!(kappa_j > 0.0) || !(kappa_i > kappa_j)) { throw DomainError("need kappa_i > kappa_j > 0"); }
    return std::log(kappa_i / kappa_j) / (kappa_i - kappa_j);
}

// ---------------------------------------------------------------------------
// Balanced two-layer factor model

struct FactorMode {
    double beta = 0.0;  // >= 0
    double m0 = 0.0;    // u_r(0) v_r(0) = u_r(0)^2 > 0
};

struct TwoLayerConfig {
    std::vector<FactorMode> modes;

    void validate() const {
        if (modes.empty()) { throw DomainError("two-layer config needs at least one mode"); }
        for (const auto &m : modes) {
            if (!(m.beta >= 0.0) || !std::isfinite(m.beta)) { throw DomainError("teacher coefficients must be >= 0"); }
            if (!(m.m0 > 0.0) || !std::isfinite(m.m0)) { throw DomainError("initial products must be positive"); }
        }
    }
};

/// Products m_r(t) under m' = 2 m (beta - m).
inline std::vector<double> two_layer_state(const TwoLayerConfig &cfg, double t) {
    cfg.validate();
    detail::require_time(t);
    std::vector<double> out;
    out.reserve(cfg.modes.size());
    for (const auto &m : cfg.modes) {
        if (m.beta > 0.0) {
            out.push_back(m.beta / (1.0 + (m.beta / m.m0 - 1.0) * std::exp(-2.0 * m.beta * t)));
        } else {
            out.push_back(m.m0 / (1.0 + 2.0 * m.m0 * t));
        }
    }
    return out;
}

/// H_S = sum_{r in S} m_r / sum_r m_r.
inline double band_statistic(std::span<const double> values, std::span<const std::size_t> band) {
    if (band.empty()) { throw DomainError("band must be nonempty"); }
    std::set<std::size_t> seen;
    double in_band = 0.0;
    for (std::size_t r : band) {
        if (r >= values.size()) { throw DomainError("band index out of range"); }
        if (seen.insert(r).second) { in_band += values[r]; }
    }
    const double total = std::accumulate(values.begin(), values.end(), 0.0);
    if (!(total > 0.0)) { throw DegenerateInput("zero total mass"); }
    return in_band / total;
}

}  // namespace splx::dynamics
