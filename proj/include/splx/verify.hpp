#pragma once

// Named verification suites. Each suite checks one result of the toolkit
// against an independent oracle (RK4, bisection, characteristic polynomial,
// counting ranks) or an exact construction, and reports pass/fail per check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "efficiency.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "mechanisms.hpp"
#include "numkernel.hpp"
#include "oracles.hpp"
#include "spectra.hpp"

namespace splx::verify {

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct Report {
    std::string result;
    std::vector<Check> checks;

    bool passed() const {
        return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check &c) { return c.passed; });
    }
    void add(std::string name, bool ok, std::string detail) {
        checks.push_back({std::move(name), ok, std::move(detail)});
    }
};

struct Options {
    std::uint64_t seed = 42;
};

namespace detail {

inline std::string sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline double uniform(std::mt19937_64 &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t uniform_int(std::mt19937_64 &rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Strictly descending rates in [lo, hi] with adjacent ratio at least `gap`.
inline std::vector<double> ordered_rates(std::mt19937_64 &rng, std::size_t m, double lo, double hi, double gap) {
    for (;;) {
        std::vector<double> k(m);
        for (auto &x : k) { x = uniform(rng, lo, hi); }
        std::sort(k.begin(), k.end(), std::greater<>());
        bool ok = true;
        for (std::size_t i = 1; i < m; ++i) { ok = ok && k[i - 1] >= gap * k[i]; }
        if (ok) { return k; }
    }
}

inline double max_rel_diff(const std::vector<double> &a, const std::vector<double> &b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
    }
    return worst;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline Report closed_form_rk4(const Options &opt) {
    using namespace dynamics;
    Report rep{"closed-form-rk4", {}};
    std::mt19937_64 rng(opt.seed);
    const auto start = std::chrono::steady_clock::now();
    double worst_one = 0.0, worst_two = 0.0;
    constexpr std::size_t kCases = 50;
    constexpr int kTimes = 8;
    for (std::size_t c = 0; c < kCases; ++c) {
        OneLayerConfig one;
        const std::size_t m = detail::uniform_int(rng, 2, 8);
        for (std::size_t r = 0; r < m; ++r) {
            one.modes.push_back({detail::uniform(rng, -2.0, 2.0), detail::uniform(rng, 0.5, 5.0),
                                 detail::uniform(rng, -1.0, 1.0)});
        }
        const double horizon = 10.0 / one.min_rate();
        const double step = 1e-3 / one.max_rate();
        std::vector<double> state;
        for (const auto &md : one.modes) { state.push_back(md.a0); }
        double t_prev = 0.0;
        for (int k = 0; k <= kTimes; ++k) {
            const double t = horizon * k / kTimes;
            OneLayerConfig shifted = one;
            for (std::size_t r = 0; r < m; ++r) { shifted.modes[r].a0 = state[r]; }
            state = oracles::one_layer_rk4(shifted, t - t_prev, step);
            t_prev = t;
            worst_one = std::max(worst_one, detail::max_rel_diff(one_layer_state(one, t), state));
        }

        TwoLayerConfig two;
        double stiff = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const double beta = detail::uniform(rng, 0.5, 2.0);
            const double m0 = detail::uniform(rng, 0.01, 2.0);
            two.modes.push_back({beta, m0});
            stiff = std::max(stiff, 2.0 * beta + 4.0 * m0);
        }
        double beta_min = two.modes.front().beta;
        for (const auto &md : two.modes) { beta_min = std::min(beta_min, md.beta); }
        const double horizon2 = 10.0 / (2.0 * beta_min);
        const double step2 = 1e-3 / stiff;
        std::vector<double> prod;
        for (const auto &md : two.modes) { prod.push_back(md.m0); }
        t_prev = 0.0;
        for (int k = 0; k <= kTimes; ++k) {
            const double t = horizon2 * k / kTimes;
            TwoLayerConfig shifted = two;
            for (std::size_t r = 0; r < m; ++r) { shifted.modes[r].m0 = prod[r]; }
            prod = oracles::two_layer_rk4(shifted, t - t_prev, step2);
            t_prev = t;
            worst_two = std::max(worst_two, detail::max_rel_diff(two_layer_state(two, t), prod));
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.add("one-layer closed form vs RK4 (50 configs)", worst_one <= 1e-8, "max error " + detail::sci(worst_one));
    rep.add("two-layer closed form vs RK4 (50 configs)", worst_two <= 1e-8, "max error " + detail::sci(worst_two));
    rep.add("runtime under 5 s", secs < 5.0, detail::sci(secs) + " s");
    return rep;
}

inline Report matched_loss(const Options &opt) {
    using namespace dynamics;
    Report rep{"matched-loss", {}};
    std::mt19937_64 rng(opt.seed);
    double min_margin = std::numeric_limits<double>::infinity();
    double worst_level = 0.0, worst_iso = 0.0;
    const std::vector<double> fractions{0.9, 0.6, 0.3, 0.1, 0.01};
    for (std::size_t c = 0; c < 20; ++c) {
        const std::size_t m = detail::uniform_int(rng, 2, 8);
        OneLayerConfig aniso;
        for (double k : detail::ordered_rates(rng, m, 0.1, 5.0, 1.02)) { aniso.modes.push_back({1.0, k, 0.0}); }
        OneLayerConfig iso;
        const double kappa = detail::uniform(rng, 0.1, 5.0);
        for (std::size_t r = 0; r < m; ++r) { iso.modes.push_back({1.0, kappa, 0.0}); }
        const double inv_m = 1.0 / static_cast<double>(m);
        for (double f : fractions) {
            const double level = f * 0.5 * static_cast<double>(m);
            const double tb = matched_loss_time(aniso, level);
            const double oracle_t = oracles::bisect_expanding([&](double t) { return loss(aniso, t) - level; }, 0.0, 1.0);
            worst_level = std::max(worst_level, std::abs(tb - oracle_t) / oracle_t);
            min_margin = std::min(min_margin, leading_mode_share(aniso, tb) - inv_m);
            const double ta = matched_loss_time(iso, level);
            worst_iso = std::max(worst_iso, std::abs(leading_mode_share(iso, ta) - inv_m));
        }
    }
    rep.add("matched time agrees with bisection oracle", worst_level <= 1e-9, "max rel diff " + detail::sci(worst_level));
    rep.add("anisotropic leading share exceeds 1/m", min_margin > 0.0, "min margin " + detail::sci(min_margin));
    rep.add("isotropic leading share equals 1/m", worst_iso <= 1e-12, "max deviation " + detail::sci(worst_iso));
    return rep;
}

inline Report three_zone(const Options &) {
    using namespace dynamics;
    Report rep{"three-zone", {}};
    constexpr double kCrossover = 1e4;
    const std::size_t ranks = static_cast<std::size_t>(400 * kCrossover);
    const RankWindow head{1, static_cast<std::size_t>(kCrossover / 1000)};
    const RankWindow tail{static_cast<std::size_t>(200 * kCrossover), ranks};
    for (double p : {0.5, 1.0}) {
        for (double q : {0.25, 0.5, 1.0}) {
            SmoothSpectrumConfig cfg{1.0, p, 1.0, q, ranks};
            const double t = std::pow(kCrossover, q);
            const Spectrum spec = smooth_act_spectrum(cfg, t);
            const double a_head = band_alpha(spec, head).alpha;
            const double a_tail = band_alpha(spec, tail).alpha;
            const double e_head = std::abs(a_head - p) / p;
            const double e_tail = std::abs(a_tail - tail_alpha(cfg)) / tail_alpha(cfg);
            char label[64];
            std::snprintf(label, sizeof label, "p=%.2f q=%.2f", p, q);
            rep.add(std::string(label) + " head alpha within 5% of p", e_head <= 0.05,
                    "alpha " + detail::sci(a_head) + ", rel err " + detail::sci(e_head));
            rep.add(std::string(label) + " deep-tail alpha within 5% of p+2q", e_tail <= 0.05,
                    "alpha " + detail::sci(a_tail) + " vs " + detail::sci(tail_alpha(cfg)) + ", rel err " +
                        detail::sci(e_tail));
        }
    }
    return rep;
}

inline Report band_recruitment(const Options &) {
    using namespace dynamics;
    Report rep{"band-recruitment", {}};
    double worst = 0.0;
    std::size_t cases = 0;
    for (double eta : {0.1, 1.0, 3.0, 10.0}) {
        for (double q : {0.25, 0.5, 1.0, 2.0}) {
            for (std::size_t cutoff : {2u, 16u, 128u, 1024u}) {
                for (double delta : {0.5, std::exp(-1.0), 0.01}) {
                    SmoothSpectrumConfig cfg{1.0, 1.0, eta, q, cutoff};
                    const double closed = band_recruitment_time(cfg, static_cast<double>(cutoff), delta);
                    const double oracle = oracles::band_recruitment_bisection(eta, q, cutoff, delta);
                    worst = std::max(worst, std::abs(closed - oracle) / oracle);
                    ++cases;
                }
            }
        }
    }
    rep.add("closed form vs bisection on " + std::to_string(cases) + " cases", worst <= 1e-9,
            "max rel diff " + detail::sci(worst));
    return rep;
}

inline Report efficiency_ordering(const Options &) {
    using namespace dynamics;
    Report rep{"efficiency-ordering", {}};
    const double xi = 0.5, t0 = 1.0, delta = 0.01;
    const std::vector<std::pair<double, double>> pairs{{0.25, 0.5}, {0.5, 1.0}, {0.25, 1.0}, {0.3, 0.7}};
    bool ordered = true;
    double worst = 0.0;
    for (std::size_t anchor : {1u, 4u}) {
        for (std::size_t ratio : {2u, 4u, 8u, 16u}) {
            const std::size_t cutoff = anchor * ratio;
            for (const auto &[q1, q2] : pairs) {
                const SmoothSpectrumConfig c1{1.0, 1.0, 1.0, q1, cutoff};
                const SmoothSpectrumConfig c2{1.0, 1.0, 1.0, q2, cutoff};
                const double ra = static_cast<double>(anchor), rc = static_cast<double>(cutoff);
                const double t1 = head_matched_time(c1, ra, xi, t0, rc, delta);
                const double t2 = head_matched_time(c2, ra, xi, t0, rc, delta);
                ordered = ordered && t1 < t2;
                for (const auto &[q, t] : {std::pair{q1, t1}, std::pair{q2, t2}}) {
                    const double o = oracles::head_matched_bisection(q, anchor, xi, t0, cutoff, delta);
                    worst = std::max(worst, std::abs(t - o) / o);
                }
            }
        }
    }
    rep.add("q1 < q2 implies earlier head-matched time for R/r_h in {2,4,8,16}", ordered, "");
    rep.add("head-matched time vs bisection oracle", worst <= 1e-9, "max rel diff " + detail::sci(worst));
    return rep;
}

inline Report crossover_complementarity(const Options &opt) {
    using namespace dynamics;
    Report rep{"crossover-complementarity", {}};
    std::mt19937_64 rng(opt.seed);
    bool single_flip = true, located = true, act_ordered = true;
    double worst_time = 0.0;
    constexpr std::size_t kGrid = 2000;
    for (std::size_t c = 0; c < 20; ++c) {
        const auto k = detail::ordered_rates(rng, 2, 0.1, 5.0, 1.05);
        const OneLayerConfig cfg{{{1.0, k[0], 0.0}, {1.0, k[1], 0.0}}};
        const double tij = grad_crossover_time(k[0], k[1]);
        const double oracle = oracles::bisect(
            [&](double t) { return k[0] * k[0] * std::exp(-2 * k[0] * t) - k[1] * k[1] * std::exp(-2 * k[1] * t); },
            1e-12, 10.0 * tij);
        worst_time = std::max(worst_time, std::abs(tij - oracle) / oracle);
        const double h = 3.0 * tij / kGrid;
        int flips = 0;
        int last_sign = 0;
        double flip_at = 0.0;
        for (std::size_t g = 1; g <= kGrid; ++g) {
            const double t = h * static_cast<double>(g);
            const auto e = mode_energies(cfg, t);
            act_ordered = act_ordered && e.activation[0] > e.activation[1];
            const double gap = e.gradient[0] - e.gradient[1];
            const int sign = gap > 0.0 ? 1 : (gap < 0.0 ? -1 : 0);
            if (sign == 0) { continue; }
            if (last_sign != 0 && sign != last_sign) {
                ++flips;
                flip_at = t;
            }
            last_sign = sign;
        }
        single_flip = single_flip && flips == 1;
        located = located && std::abs(flip_at - tij) <= 2.0 * h;
    }
    rep.add("crossover time matches bisection", worst_time <= 1e-9, "max rel diff " + detail::sci(worst_time));
    rep.add("gradient-energy gap flips sign exactly once", single_flip, "20 rate pairs");
    rep.add("flip located at t_ij within grid resolution", located, "");
    rep.add("activation ordering never flips", act_ordered, "");
    return rep;
}

inline Report monotone_band(const Options &opt) {
    using namespace dynamics;
    Report rep{"monotone-band", {}};
    std::mt19937_64 rng(opt.seed);
    bool increasing = true;
    double min_step = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < 20; ++c) {
        const std::size_t m = detail::uniform_int(rng, 3, 10);
        const std::size_t band_size = detail::uniform_int(rng, 1, m - 1);
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<std::size_t> band(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(band_size));
        TwoLayerConfig cfg;
        cfg.modes.resize(m);
        double beta_min = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < m; ++r) {
            const bool on = std::find(band.begin(), band.end(), r) != band.end();
            if (on) {
                const double beta = detail::uniform(rng, 0.5, 2.0);
                cfg.modes[r] = {beta, beta * detail::uniform(rng, 0.01, 0.9)};
                beta_min = std::min(beta_min, beta);
            } else {
                cfg.modes[r] = {0.0, detail::uniform(rng, 0.01, 1.0)};
            }
        }
        const double horizon = 10.0 / beta_min;
        double prev = -1.0;
        for (std::size_t g = 0; g < 1000; ++g) {
            const double t = horizon * static_cast<double>(g) / 999.0;
            const auto mt = two_layer_state(cfg, t);
            double off = 0.0;
            for (std::size_t r = 0; r < m; ++r) {
                if (std::find(band.begin(), band.end(), r) == band.end()) { off += mt[r]; }
            }
            if (!(off > 1e-12)) { break; }
            const double hs = band_statistic(mt, band);
            if (g > 0) {
                increasing = increasing && hs > prev;
                min_step = std::min(min_step, hs - prev);
            }
            prev = hs;
        }
    }
    rep.add("H_S strictly increasing on 1000-point grids", increasing, "min increment " + detail::sci(min_step));
    return rep;
}

inline Report rope_equivariance(const Options &opt) {
    using namespace mechanisms;
    Report rep{"rope-equivariance", {}};
    std::mt19937_64 rng(opt.seed);
    double worst = 0.0, worst_relative = 0.0;
    for (std::size_t c = 0; c < 100; ++c) {
        const std::size_t d = 2 * detail::uniform_int(rng, 1, 4);
        const std::size_t width = detail::uniform_int(rng, 1, 6);
        const std::size_t len = detail::uniform_int(rng, 2, 8);
        const auto start = static_cast<std::int64_t>(detail::uniform_int(rng, 0, 40)) - 20;
        const auto tau = static_cast<std::int64_t>(detail::uniform_int(rng, 0, 100)) - 50;
        const ScoreProbe probe{oracles::gaussian_matrix(d, width, rng), oracles::gaussian_matrix(d, width, rng), {}};
        const RotaryFamily rot(d, 100.0);
        const Sequence x{start, oracles::gaussian_matrix(len, width, rng)};
        const auto i = start + static_cast<std::int64_t>(detail::uniform_int(rng, 0, len - 1));
        const auto j = start + static_cast<std::int64_t>(detail::uniform_int(rng, 0, len - 1));
        const double base = rope_score(probe, rot, x, i, j);
        const double moved = rope_score(probe, rot, x.shifted(tau), i + tau, j + tau);
        worst = std::max(worst, std::abs(moved - base));
        // Relative-offset form <W_q x_i, R_{j-i} W_k x_j>.
        const auto qv = matvec(probe.query, x.at(i));
        const auto kv = matvec(rot.matrix(j - i), matvec(probe.key, x.at(j)));
        worst_relative = std::max(worst_relative, std::abs(dot(qv, kv) - base));
    }
    rep.add("RoPE shift residual <= 1e-10 over 100 cases", worst <= 1e-10, "max residual " + detail::sci(worst));
    rep.add("score depends only on the offset j - i", worst_relative <= 1e-10,
            "max deviation " + detail::sci(worst_relative));

    // Absolute table witness: full-row-rank projections, nonconstant table.
    const std::size_t d = 2, width = 3, len = 6;
    const std::int64_t tau = 1;
    DenseMatrix wq = oracles::gaussian_matrix(d, width, rng);
    DenseMatrix wk = oracles::gaussian_matrix(d, width, rng);
    const bool full_rank = svd(wq).rank() == d && svd(wk).rank() == d;
    const PositionalTable table{0, oracles::gaussian_matrix(len + static_cast<std::size_t>(tau), width, rng)};
    const ScoreProbe probe{wq, wk, table};
    const std::vector<Sequence> xs{Sequence{0, oracles::gaussian_matrix(len, width, rng)}};
    const double resid = shift_equivariance_residual(
        [&](const Sequence &s, std::int64_t i, std::int64_t j) { return absolute_score(probe, s, i, j); }, xs, tau);
    rep.add("absolute-table witness breaks equivariance (> 1e-3)", full_rank && resid > 1e-3,
            "residual " + detail::sci(resid));
    return rep;
}

inline Report untied_expressivity(const Options &opt) {
    using namespace mechanisms;
    Report rep{"untied-expressivity", {}};
    std::mt19937_64 rng(opt.seed);
    bool bound_ok = true, inclusion_ok = true;
    double worst_gap = std::numeric_limits<double>::infinity();
    std::size_t done = 0;
    while (done < 20) {
        const std::size_t d = detail::uniform_int(rng, 1, 8);
        const std::size_t v = detail::uniform_int(rng, d + 1, 32);
        const DenseMatrix e = oracles::gaussian_matrix(d, v, rng);
        const DenseMatrix target = oracles::gaussian_matrix(v, v, rng);
        double tied = 0.0, lower = 0.0, untied = 0.0;
        try {
            tied = best_tied_fit(target, e).residual;
            lower = tied_projection_residual(target, e);
            untied = untied_fit(target, e).residual;
        } catch (const DomainError &) {
            continue;  // ill-conditioned draw
        }
        bound_ok = bound_ok && tied >= lower - 1e-9;
        inclusion_ok = inclusion_ok && untied <= tied + 1e-9;
        worst_gap = std::min(worst_gap, tied - lower);
        ++done;
    }
    rep.add("tied residual >= projection lower bound - 1e-9", bound_ok, "min gap " + detail::sci(worst_gap));
    rep.add("untied residual <= tied residual", inclusion_ok, "20 random (E, T*)");

    // Witness: u orthogonal to col(E^T), T* = u c^T E is untied-realizable.
    const std::size_t d = 4, v = 12;
    const DenseMatrix e = oracles::gaussian_matrix(d, v, rng);
    const DenseMatrix basis = svd(e).v;  // V x d
    std::vector<double> u(v);
    for (auto &x : u) { x = std::normal_distribution<double>(0.0, 1.0)(rng); }
    for (std::size_t k = 0; k < d; ++k) {
        double proj = 0.0;
        for (std::size_t i = 0; i < v; ++i) { proj += basis(i, k) * u[i]; }
        for (std::size_t i = 0; i < v; ++i) { u[i] -= proj * basis(i, k); }
    }
    std::vector<double> c(d);
    for (auto &x : c) { x = std::normal_distribution<double>(0.0, 1.0)(rng); }
    DenseMatrix cte(1, v);
    for (std::size_t j = 0; j < v; ++j) {
        for (std::size_t k = 0; k < d; ++k) { cte(0, j) += c[k] * e(k, j); }
    }
    DenseMatrix target(v, v);
    for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t j = 0; j < v; ++j) { target(i, j) = u[i] * cte(0, j); }
    }
    const double untied = untied_fit(target, e).residual;
    const double tied = best_tied_fit(target, e).residual;
    rep.add("witness: untied residual <= 1e-9", untied <= 1e-9, "residual " + detail::sci(untied));
    rep.add("witness: tied residual >= 0.9 ||T*||", tied >= 0.9 * target.frobenius_norm(),
            detail::sci(tied) + " vs " + detail::sci(target.frobenius_norm()));
    return rep;
}

inline Report idealized_muon(const Options &opt) {
    using namespace mechanisms;
    Report rep{"idealized-muon", {}};
    std::mt19937_64 rng(opt.seed);
    double worst_scale = 0.0, worst_nuclear = 0.0, worst_oracle = 0.0;
    for (std::size_t c = 0; c < 20; ++c) {
        const std::size_t m = detail::uniform_int(rng, 1, 6);
        const std::size_t n = detail::uniform_int(rng, 1, 6);
        const DenseMatrix g = oracles::gaussian_matrix(m, n, rng);
        const DenseMatrix q = polar_factor(g);
        for (double s : {0.1, 2.0, 1000.0}) { worst_scale = std::max(worst_scale, (polar_factor(s * g) - q).max_abs()); }
        const double sum_sigma = nuclear_norm(g);
        worst_nuclear = std::max(worst_nuclear, std::abs(nuclear_maximizer_check(g) - sum_sigma));
        // Singular values from the characteristic polynomial of the smaller Gram matrix.
        const DenseMatrix gram = m <= n ? g * g.transpose() : g.transpose() * g;
        double oracle = 0.0;
        for (double lam : oracles::symmetric_eigenvalues_charpoly(gram)) { oracle += std::sqrt(std::max(lam, 0.0)); }
        worst_oracle = std::max(worst_oracle, std::abs(oracle - sum_sigma) / sum_sigma);
    }
    rep.add("Q(cG) = Q(G) for c in {0.1, 2, 1000}", worst_scale <= 1e-10, "max diff " + detail::sci(worst_scale));
    rep.add("<G, Q(G)> = sum sigma", worst_nuclear <= 1e-10, "max diff " + detail::sci(worst_nuclear));
    rep.add("sum sigma matches Gram characteristic-polynomial oracle", worst_oracle <= 1e-8,
            "max rel diff " + detail::sci(worst_oracle));

    bool holds = true, strict = true;
    for (std::size_t c = 0; c < 20; ++c) {
        const std::size_t m = detail::uniform_int(rng, 1, 6);
        const std::size_t n = detail::uniform_int(rng, 1, 6);
        const DenseMatrix w0 = oracles::gaussian_matrix(m, n, rng);
        const DenseMatrix ws = oracles::gaussian_matrix(m, n, rng);
        const double smooth = detail::uniform(rng, 0.5, 5.0);
        const double bound = muon_descent_check(w0, ws, smooth, 1.0).strict_descent_bound(smooth);
        for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const auto chk = muon_descent_check(w0, ws, smooth, frac * bound);
            holds = holds && chk.holds();
            strict = strict && chk.lhs < chk.initial;
        }
    }
    rep.add("descent inequality on 20 quadratics x 5 step sizes", holds, "");
    rep.add("strict descent below the step bound", strict, "");
    return rep;
}

inline Report measurement_stack(const Options &opt) {
    Report rep{"measurement-stack", {}};
    std::mt19937_64 rng(opt.seed);

    // RankMe.
    bool bounds = true;
    for (std::size_t c = 0; c < 50; ++c) {
        const std::size_t n = detail::uniform_int(rng, 1, 40);
        std::vector<double> v(n);
        for (auto &x : v) { x = detail::uniform(rng, 0.0, 1.0); }
        v[0] += 1e-3;
        const double rm = rankme(Spectrum::from_unsorted(v));
        bounds = bounds && rm >= 1.0 - 1e-12 && rm <= static_cast<double>(n) * (1.0 + 1e-12);
    }
    const double uni = rankme(Spectrum(std::vector<double>(17, 0.3)));
    std::vector<double> one(9, 0.0);
    one[0] = 2.5;
    const double r1 = rankme(Spectrum(one));
    rep.add("RankMe within [1, n]", bounds, "50 random spectra");
    rep.add("RankMe uniform = n, rank-one = 1", std::abs(uni - 17.0) <= 1e-12 * 17.0 && std::abs(r1 - 1.0) <= 1e-15,
            "uniform " + detail::sci(uni) + ", rank-one " + detail::sci(r1));

    // band_alpha on exact power laws.
    double worst_alpha = 0.0;
    for (std::size_t c = 0; c < 20; ++c) {
        const double a = detail::uniform(rng, 0.2, 3.0);
        const std::size_t n = detail::uniform_int(rng, 20, 500);
        std::vector<double> v(n);
        for (std::size_t r = 0; r < n; ++r) { v[r] = 3.0 * std::pow(static_cast<double>(r + 1), -a); }
        const std::size_t lo = detail::uniform_int(rng, 1, n / 2);
        const std::size_t hi = detail::uniform_int(rng, lo + 1, n);
        worst_alpha = std::max(worst_alpha, std::abs(band_alpha(Spectrum(v), {lo, hi}).alpha - a));
    }
    rep.add("band_alpha exact on r^-a spectra", worst_alpha <= 1e-10, "max error " + detail::sci(worst_alpha));

    // Covariance spectrum invariances and eigensolver oracle.
    double worst_perm = 0.0, worst_shift = 0.0, worst_charpoly = 0.0;
    for (std::size_t c = 0; c < 10; ++c) {
        const std::size_t n = detail::uniform_int(rng, 3, 20);
        const std::size_t d = detail::uniform_int(rng, 2, 6);
        const DenseMatrix h = oracles::gaussian_matrix(n, d, rng);
        const auto base = covariance_spectrum(h).values();
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        DenseMatrix hp(n, d), hs(n, d);
        std::vector<double> shift(d);
        for (auto &x : shift) { x = detail::uniform(rng, -10.0, 10.0); }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                hp(i, j) = h(perm[i], j);
                hs(i, j) = h(i, j) + shift[j];
            }
        }
        const auto vp = covariance_spectrum(hp).values();
        const auto vs = covariance_spectrum(hs).values();
        for (std::size_t k = 0; k < base.size(); ++k) {
            worst_perm = std::max(worst_perm, std::abs(vp[k] - base[k]) / base.front());
            worst_shift = std::max(worst_shift, std::abs(vs[k] - base[k]) / base.front());
        }
        const DenseMatrix a = oracles::random_symmetric(d, rng);
        const auto lib = sym_eig(a).eigenvalues;
        const auto ref = oracles::symmetric_eigenvalues_charpoly(a);
        for (std::size_t k = 0; k < d; ++k) {
            worst_charpoly = std::max(worst_charpoly, std::abs(lib[k] - ref[k]) / std::max(1.0, a.max_abs()));
        }
    }
    rep.add("covariance spectrum invariant under row permutation", worst_perm <= 1e-12,
            "max rel diff " + detail::sci(worst_perm));
    rep.add("covariance spectrum invariant under constant-row shift", worst_shift <= 1e-10,
            "max rel diff " + detail::sci(worst_shift));
    rep.add("sym_eig matches characteristic-polynomial roots", worst_charpoly <= 1e-9,
            "max diff " + detail::sci(worst_charpoly));

    // JSD axioms.
    bool sym = true, nonneg = true, bounded = true, self_zero = true;
    for (std::size_t c = 0; c < 50; ++c) {
        auto draw = [&] {
            std::vector<double> v(detail::uniform_int(rng, 1, 30));
            for (auto &x : v) { x = detail::uniform(rng, 0.0, 1.0); }
            v[0] += 1e-3;
            return Spectrum::from_unsorted(v);
        };
        const Spectrum a = draw(), b = draw();
        const double ab = js_divergence(a, b), ba = js_divergence(b, a);
        sym = sym && std::abs(ab - ba) <= 1e-15;
        nonneg = nonneg && ab >= 0.0;
        bounded = bounded && ab <= std::log(2.0);
        self_zero = self_zero && js_divergence(a, a) == 0.0;
    }
    rep.add("JSD symmetric", sym, "50 random pairs");
    rep.add("JSD nonnegative and zero on identical spectra", nonneg && self_zero, "");
    rep.add("JSD bounded by ln 2", bounded, "");
    return rep;
}

inline Report rank_statistics(const Options &opt) {
    Report rep{"rank-statistics", {}};
    std::mt19937_64 rng(opt.seed);
    double worst = 0.0;
    std::size_t patterns = 0;
    bool constant_rejected = true;
    for (std::size_t n = 2; n <= 6; ++n) {
        std::size_t total = 1;
        for (std::size_t k = 0; k < n; ++k) { total *= n; }
        std::vector<double> x(n), y(n);
        for (std::size_t code = 0; code < total; ++code) {
            std::size_t rest = code;
            for (std::size_t k = 0; k < n; ++k) {
                x[k] = static_cast<double>(rest % n);
                rest /= n;
            }
            const bool x_const = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
            for (int rep_y = 0; rep_y < 2; ++rep_y) {
                for (auto &v : y) { v = static_cast<double>(detail::uniform_int(rng, 0, n - 1)); }
                const bool y_const = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
                if (x_const || y_const) {
                    try {
                        (void)efficiency::spearman(x, y);
                        constant_rejected = false;
                    } catch (const DegenerateInput &) {
                    }
                    continue;
                }
                worst = std::max(worst, std::abs(efficiency::spearman(x, y) - oracles::spearman_counting(x, y)));
                ++patterns;
            }
        }
    }
    rep.add("spearman equals counting-rank oracle on all tie patterns n <= 6", worst <= 1e-12,
            std::to_string(patterns) + " pairs, max diff " + detail::sci(worst));
    rep.add("constant input rejected as degenerate", constant_rejected, "");

    auto family = [&](const std::string &name, bool co) {
        std::vector<efficiency::RunRecord> runs;
        const std::vector<std::int64_t> tiers{8, 16, 32, 64, 128};
        for (std::size_t k = 0; k < tiers.size(); ++k) {
            const double a = 1.0 + 0.1 * static_cast<double>(k) + detail::uniform(rng, 0.0, 0.01);
            const double t = co ? 1e9 * (1.0 + static_cast<double>(k)) : 1e9 * (10.0 - static_cast<double>(k));
            runs.push_back({name, tiers[k], t, std::nullopt, a, "final"});
        }
        return runs;
    };
    auto co = family("co-a", true);
    auto co_b = family("co-b", true);
    co.insert(co.end(), co_b.begin(), co_b.end());
    const auto t_co = efficiency::early_prediction_table(co);
    bool co_ok = t_co.mean_within && *t_co.mean_within == 1.0;
    for (const auto &f : t_co.families) { co_ok = co_ok && f.rho && *f.rho == 1.0; }
    // Pooled rho: a power-of-two rescaled copy normalizes to bit-identical
    // points, so the pooled ranks agree exactly.
    auto pooled_runs = family("pool-a", true);
    for (std::size_t k = 0, n = pooled_runs.size(); k < n; ++k) {
        auto r = pooled_runs[k];
        r.family = "pool-b";
        r.early_alpha = 2.0 * *r.early_alpha;
        r.tokens_to_target = 4.0 * *r.tokens_to_target;
        pooled_runs.push_back(r);
    }
    const auto t_pool = efficiency::early_prediction_table(pooled_runs);
    rep.add("pooled rho = 1 for families with a shared normalized shape", t_pool.pooled && *t_pool.pooled == 1.0, "");
    auto anti = family("anti-a", false);
    const auto t_anti = efficiency::early_prediction_table(anti);
    const bool anti_ok = t_anti.families.size() == 1 && t_anti.families[0].rho && *t_anti.families[0].rho == -1.0;
    rep.add("co-monotone families give rho = 1", co_ok, "");
    rep.add("anti-monotone family gives rho = -1", anti_ok, "");
    return rep;
}

// ---------------------------------------------------------------------------

using Suite = std::function<Report(const Options &)>;

inline const std::map<std::string, Suite> &registry() {
    static const std::map<std::string, Suite> suites{
        {"closed-form-rk4", closed_form_rk4},
        {"matched-loss", matched_loss},
        {"three-zone", three_zone},
        {"band-recruitment", band_recruitment},
        {"efficiency-ordering", efficiency_ordering},
        {"crossover-complementarity", crossover_complementarity},
        {"monotone-band", monotone_band},
        {"rope-equivariance", rope_equivariance},
        {"untied-expressivity", untied_expressivity},
        {"idealized-muon", idealized_muon},
        {"measurement-stack", measurement_stack},
        {"rank-statistics", rank_statistics},
    };
    return suites;
}

inline std::vector<std::string> names() {
    std::vector<std::string> out;
    for (const auto &[name, suite] : registry()) { out.push_back(name); }
    return out;
}

/// Throws ConfigError for an unknown name.
inline Report run(const std::string &name, const Options &opt = {}) {
    const auto &reg = registry();
    auto it = reg.find(name);
    if (it == reg.end()) { throw ConfigError("unknown verification target '" + name + "'"); }
    return it->second(opt);
}

}  // namespace splx::verify
