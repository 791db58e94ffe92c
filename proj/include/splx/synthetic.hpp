#pragma once

// Synthetic artifacts driven by the dynamics engine: activation matrices with a
// prescribed covariance spectrum, gradient stacks with prescribed singular
// values, and manifest families whose tiers map to rate exponents q_B.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "ingest.hpp"
#include "matrix.hpp"
#include "oracles.hpp"
#include "report.hpp"

namespace splx::synthetic {

/// 2d x d activation matrix whose centered covariance (N - 1 normalization) has
/// exactly the given eigenvalues: rows +-s_j q_j with q_j the columns of a
/// random orthogonal matrix (identity when seed is 0).
inline DenseMatrix activation_with_spectrum(std::span<const double> eigenvalues, std::uint64_t seed) {
    const std::size_t d = eigenvalues.size();
    if (d == 0) { throw ShapeError("need at least one eigenvalue"); }
    std::mt19937_64 rng(seed);
    const DenseMatrix q = seed == 0 ? DenseMatrix::identity(d) : oracles::random_orthogonal(d, rng);
    const double n_minus_1 = static_cast<double>(2 * d - 1);
    DenseMatrix h(2 * d, d);
    for (std::size_t j = 0; j < d; ++j) {
        if (!(eigenvalues[j] >= 0.0)) { throw DomainError("eigenvalues must be nonnegative"); }
        const double s = std::sqrt(0.5 * eigenvalues[j] * n_minus_1);
        for (std::size_t c = 0; c < d; ++c) {
            h(2 * j, c) = s * q(c, j);
            h(2 * j + 1, c) = -s * q(c, j);
        }
    }
    return h;
}

/// d x d stack diag(sigma) Q^T with singular values sigma.
inline DenseMatrix gradient_with_singular_values(std::span<const double> sigma, std::uint64_t seed) {
    const std::size_t d = sigma.size();
    if (d == 0) { throw ShapeError("need at least one singular value"); }
    std::mt19937_64 rng(seed);
    const DenseMatrix q = seed == 0 ? DenseMatrix::identity(d) : oracles::random_orthogonal(d, rng);
    DenseMatrix g(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t c = 0; c < d; ++c) { g(i, c) = sigma[i] * q(c, i); }
    }
    return g;
}

struct FamilySpec {
    std::string family = "synthetic";
    std::string scale = "d12";
    std::vector<std::int64_t> tiers{8, 16, 32, 64};
    std::vector<double> rate_exps{0.25, 0.4, 0.55, 0.7};  // q_B per tier
    double teacher_exp = 1.0;                              // p
    double scale_c = 1.0;                                  // C
    std::size_t dims = 256;
    double anchor_progress = 1.0 - std::exp(-2.0);         // xi at rank 1
    double early_time = 1.0;                               // t0
    double tokens_per_time = 1.0e6;
    double target_fraction = 0.1;                          // target = fraction * L(0)
    std::size_t grid_points = 1500;
    std::uint64_t seed = 42;
};

/// One-layer modes for tier k: beta_r^2 = C r^-p, zero init, head-anchored eta.
inline dynamics::OneLayerConfig tier_modes(const FamilySpec &spec, std::size_t k) {
    const double q = spec.rate_exps.at(k);
    const double eta = dynamics::implied_rate(q, 1.0, spec.anchor_progress, spec.early_time);
    dynamics::OneLayerConfig cfg;
    for (std::size_t r = 1; r <= spec.dims; ++r) {
        const double rr = static_cast<double>(r);
        cfg.modes.push_back({std::sqrt(spec.scale_c * std::pow(rr, -spec.teacher_exp)), eta * std::pow(rr, -q), 0.0});
    }
    return cfg;
}

inline double family_target_loss(const FamilySpec &spec) {
    return spec.target_fraction * dynamics::loss(tier_modes(spec, 0), 0.0);
}

/// Writes one manifest per tier (plus dumps) into `dir`; returns manifest paths
/// in tier order. The early checkpoint sits at t0; the final checkpoint also
/// carries activation and gradient dumps.
inline std::vector<std::filesystem::path> write_family(const FamilySpec &spec, const std::filesystem::path &dir,
                                                       std::optional<std::vector<double>> throughputs = {}) {
    if (spec.tiers.size() != spec.rate_exps.size()) { throw ShapeError("one rate exponent per tier"); }
    std::filesystem::create_directories(dir);
    const double target = family_target_loss(spec);

    double t_max = spec.early_time;
    for (std::size_t k = 0; k < spec.tiers.size(); ++k) {
        t_max = std::max(t_max, dynamics::matched_loss_time(tier_modes(spec, k), target));
    }
    t_max *= 1.5;
    std::vector<double> grid;
    const double t_min = spec.early_time / 4.0;
    const double ratio = std::pow(t_max / t_min, 1.0 / static_cast<double>(spec.grid_points - 1));
    bool early_added = false;
    for (std::size_t g = 0; g < spec.grid_points; ++g) {
        const double t = t_min * std::pow(ratio, static_cast<double>(g));
        if (!early_added && t >= spec.early_time) {
            if (t > spec.early_time) { grid.push_back(spec.early_time); }
            early_added = true;
        }
        grid.push_back(t);
    }

    std::vector<std::filesystem::path> out;
    for (std::size_t k = 0; k < spec.tiers.size(); ++k) {
        const auto cfg = tier_modes(spec, k);
        const std::string stem = spec.family + "_B" + std::to_string(spec.tiers[k]);
        const std::uint64_t seed = spec.seed + 7919 * (k + 1);

        auto write_act = [&](double t, const std::string &tag) {
            std::vector<double> lam = dynamics::mode_energies(cfg, t).activation;
            const auto path = dir / (stem + "_" + tag + "_act.splx");
            ingest::write_dump(activation_with_spectrum(lam, seed), ingest::DumpKind::Activation,
                               ingest::DumpDtype::Float64, path);
            return path;
        };
        auto write_grad = [&](double t, const std::string &tag) {
            std::vector<double> sigma;
            for (double e : dynamics::mode_energies(cfg, t).gradient) { sigma.push_back(std::sqrt(e)); }
            std::stable_sort(sigma.begin(), sigma.end(), std::greater<>());
            const auto path = dir / (stem + "_" + tag + "_grad.splx");
            ingest::write_dump(gradient_with_singular_values(sigma, seed + 1), ingest::DumpKind::Gradient,
                               ingest::DumpDtype::Float64, path);
            return path;
        };

        ingest::RunManifest m;
        m.family = spec.family;
        m.tier = spec.tiers[k];
        m.scale = spec.scale;
        m.target_loss = target;
        m.layer = "final";
        if (throughputs) { m.throughput = throughputs->at(k); }
        for (std::size_t g = 0; g < grid.size(); ++g) {
            ingest::Checkpoint c;
            c.step = static_cast<std::int64_t>(g);
            c.tokens = std::round(grid[g] * spec.tokens_per_time);
            c.loss = dynamics::loss(cfg, grid[g]);
            if (grid[g] == spec.early_time) { c.activation_dump = write_act(grid[g], "early"); }
            if (g + 1 == grid.size()) {
                c.activation_dump = write_act(grid[g], "final");
                c.gradient_dump = write_grad(grid[g], "final");
            }
            m.checkpoints.push_back(std::move(c));
        }
        const auto path = dir / (stem + ".json");
        report::write_text(path, ingest::manifest_to_json(m, dir));
        out.push_back(path);
    }
    return out;
}

}  // namespace splx::synthetic
