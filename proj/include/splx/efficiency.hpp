#pragma once

// Run-level analytics: within-family token ratios, transition gains, rank
// correlations, early-prediction tables and the four-way transition taxonomy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace splx::efficiency {

struct RunRecord {
    std::string family;
    std::int64_t tier = 0;  // effective batch size B
    std::optional<double> tokens_to_target;
    std::optional<double> throughput;
    std::optional<double> early_alpha;
    std::string layer;
};

/// eps_tok(B) = T(B) / min_B' T(B') over records that reached the target.
inline std::map<std::int64_t, double> token_ratio(std::span<const RunRecord> records) {
    std::map<std::int64_t, double> tokens;
    std::optional<std::string> family;
    for (const auto &r : records) {
        if (family && *family != r.family) { throw DomainError("token_ratio expects records of a single family"); }
        family = r.family;
        if (r.tier <= 0) { throw DomainError("tier must be positive"); }
        if (!r.tokens_to_target) { continue; }
        if (!(*r.tokens_to_target > 0.0)) { throw DomainError("tokens_to_target must be positive"); }
        if (!tokens.emplace(r.tier, *r.tokens_to_target).second) {
            throw DomainError("duplicate tier " + std::to_string(r.tier) + " in family");
        }
    }
    if (tokens.empty()) { throw EmptyFamily("no run in the family reached the target"); }
    double best = tokens.begin()->second;
    for (const auto &[tier, t] : tokens) { best = std::min(best, t); }
    std::map<std::int64_t, double> out;
    for (const auto &[tier, t] : tokens) { out[tier] = t == best ? 1.0 : t / best; }
    return out;
}

struct Gains {
    double tok_gain = 0.0;  // T(a)/T(b) - 1
    double thr_gain = 0.0;  // Q(b)/Q(a) - 1
    double g_tok = 0.0;     // ln(T(a)/T(b))
    double g_thr = 0.0;     // ln(Q(b)/Q(a))
};

inline Gains transition_gains(double tokens_a, double tokens_b, double throughput_a, double throughput_b) {
    if (!(tokens_a > 0.0) || !(tokens_b > 0.0) || !(throughput_a > 0.0) || !(throughput_b > 0.0)) {
        throw DomainError("token counts and throughputs must be positive");
    }
    Gains g;
    g.tok_gain = tokens_a / tokens_b - 1.0;
    g.thr_gain = throughput_b / throughput_a - 1.0;
    g.g_tok = std::log(tokens_a / tokens_b);
    g.g_thr = std::log(throughput_b / throughput_a);
    return g;
}

/// Average ranks (1-based); tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t k = 0;
    while (k < idx.size()) {
        std::size_t end = k + 1;
        while (end < idx.size() && v[idx[end]] == v[idx[k]]) { ++end; }
        const double avg = 0.5 * static_cast<double>(k + 1 + end);
        for (std::size_t m = k; m < end; ++m) { ranks[idx[m]] = avg; }
        k = end;
    }
    return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (sxx == 0.0 || syy == 0.0) { throw DegenerateInput("correlation of a constant vector is undefined"); }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) { throw ShapeError("spearman inputs must have equal length"); }
    if (x.size() < 2) { throw ShapeError("spearman needs at least 2 points"); }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

/// (v - min) / (max - min).
inline std::vector<double> minmax_normalize(std::span<const double> values) {
    if (values.empty()) { throw DegenerateInput("nothing to normalize"); }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double span = *hi - *lo;
    if (!(span > 0.0)) { throw DegenerateInput("min-max normalization of constant values"); }
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return (v - *lo) / span; });
    return out;
}

struct FamilyPrediction {
    std::string family;
    std::size_t tiers = 0;  // runs with both early_alpha and tokens_to_target
    std::optional<double> rho;
    bool skipped = false;
    std::string reason;
    std::vector<std::int64_t> tier_ids;
    std::vector<double> early_alpha;
    std::vector<double> token_ratio;
};

struct PredictionTable {
    std::vector<FamilyPrediction> families;  // sorted by family name
    std::optional<double> mean_within;
    std::optional<double> pooled;
};

/// Within-family rho(early_alpha, eps_tok), their mean, and the pooled rho over
/// per-family min-max normalized (early_alpha, eps_tok) pairs.
inline PredictionTable early_prediction_table(std::span<const RunRecord> records) {
    std::map<std::string, std::vector<RunRecord>> grouped;
    for (const auto &r : records) { grouped[r.family].push_back(r); }

    PredictionTable table;
    std::vector<double> pooled_x, pooled_y;
    double rho_sum = 0.0;
    std::size_t rho_count = 0;
    for (auto &[family, runs] : grouped) {
        FamilyPrediction row;
        row.family = family;
        std::vector<RunRecord> complete;
        for (const auto &r : runs) {
            if (r.early_alpha && r.tokens_to_target) { complete.push_back(r); }
        }
        std::sort(complete.begin(), complete.end(), [](const auto &a, const auto &b) { return a.tier < b.tier; });
        row.tiers = complete.size();
        if (complete.size() < 2) {
            row.skipped = true;
            row.reason = "fewer than 2 complete tiers";
            table.families.push_back(std::move(row));
            continue;
        }
        try {
            const auto ratios = token_ratio(complete);
            for (const auto &r : complete) {
                row.tier_ids.push_back(r.tier);
                row.early_alpha.push_back(*r.early_alpha);
                row.token_ratio.push_back(ratios.at(r.tier));
            }
            row.rho = spearman(row.early_alpha, row.token_ratio);
            const auto nx = minmax_normalize(row.early_alpha);
            const auto ny = minmax_normalize(row.token_ratio);
            pooled_x.insert(pooled_x.end(), nx.begin(), nx.end());
            pooled_y.insert(pooled_y.end(), ny.begin(), ny.end());
            rho_sum += *row.rho;
            ++rho_count;
        } catch (const Error &e) {
            row.skipped = true;
            row.rho.reset();
            row.reason = e.what();
        }
        table.families.push_back(std::move(row));
    }
    if (rho_count > 0) { table.mean_within = rho_sum / static_cast<double>(rho_count); }
    if (pooled_x.size() >= 2) {
        try {
            table.pooled = spearman(pooled_x, pooled_y);
        } catch (const DegenerateInput &) {
            table.pooled.reset();
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Taxonomy

enum class TransitionLabel { ActivationLed, GradientLed, ThroughputLeaning, Mixed, None };

inline const char *to_string(TransitionLabel label) {
    switch (label) {
        case TransitionLabel::ActivationLed: return "activation-led";
        case TransitionLabel::GradientLed: return "gradient-led";
        case TransitionLabel::ThroughputLeaning: return "throughput-leaning";
        case TransitionLabel::Mixed: return "mixed";
        case TransitionLabel::None: return "none";
    }
    return "none";
}

struct TaxonomyThresholds {
    double tau_tok = 0.02;
    double tau_thr = 0.02;
    double rho_dom = 1.0;
};

struct TransitionRecord {
    std::string from_variant;
    std::string to_variant;
    Gains gains;
    std::optional<double> activation_delta;  // |delta alpha_head|
    std::optional<double> gradient_delta;    // |delta top-sigma share|
    std::optional<TransitionLabel> label;
};

/// First matching rule wins: mixed, activation-led, gradient-led,
/// throughput-leaning; otherwise none.
inline TransitionLabel classify_transition(const TransitionRecord &rec, const TaxonomyThresholds &th = {}) {
    if (!rec.activation_delta || !rec.gradient_delta) {
        throw IncompleteRecord("transition " + rec.from_variant + " -> " + rec.to_variant + " lacks spectral deltas");
    }
    const double tok = rec.gains.tok_gain;
    const double thr = rec.gains.thr_gain;
    const double act = *rec.activation_delta;
    const double grad = *rec.gradient_delta;
    if ((tok > th.tau_tok && thr < -th.tau_thr) || (thr > th.tau_thr && tok < -th.tau_tok)) {
        return TransitionLabel::Mixed;
    }
    if (tok > th.tau_tok && act >= grad * th.rho_dom) { return TransitionLabel::ActivationLed; }
    if (tok > th.tau_tok && grad > act * th.rho_dom) { return TransitionLabel::GradientLed; }
    if (thr > th.tau_thr && tok <= th.tau_tok) { return TransitionLabel::ThroughputLeaning; }
    return TransitionLabel::None;
}

}  // namespace splx::efficiency
