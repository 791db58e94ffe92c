#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "splx/dynamics.hpp"
#include "splx/oracles.hpp"
#include "splx/spectra.hpp"

using namespace splx;
using namespace splx::dynamics;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("cyclic_sequence examples", "[dynamics]") {
    const auto a = cyclic_sequence({5, 1, 0, 3}, 0);
    CHECK(a.tokens == std::vector<std::int64_t>{0, 1, 2});
    CHECK(a.target == 3);

    const auto flat = cyclic_sequence({7, 0, 4, 5}, 2);
    CHECK(flat.tokens == std::vector<std::int64_t>(5, 6));
    CHECK(flat.target == 6);

    const auto b = cyclic_sequence({4, 3, 10, 2}, 2);
    CHECK(b.tokens == std::vector<std::int64_t>{12, 11});
    CHECK(b.target == 10);

    REQUIRE_THROWS_AS(cyclic_sequence({4, 1, 0, 2}, 4), DomainError);
    REQUIRE_THROWS_AS(cyclic_sequence({1, 0, 0, 2}, 0), DomainError);
}

TEST_CASE("cyclic_sequence phase increment shifts along the orbit", "[dynamics]") {
    for (std::int64_t c = 2; c <= 9; ++c) {
        for (std::int64_t d = 0; d < c; ++d) {
            const CyclicTask task{c, d, 3, 6};
            for (std::int64_t a = 0; a < c; ++a) {
                const auto s = cyclic_sequence(task, a);
                const auto next = cyclic_sequence(task, (a + 1) % c);
                for (std::size_t j = 0; j < task.length; ++j) {
                    CHECK(next.tokens[j] - task.offset == (s.tokens[j] - task.offset + 1) % c);
                }
                CHECK(next.target - task.offset == (s.target - task.offset + 1) % c);
            }
        }
    }
}

TEST_CASE("one_layer_state examples", "[dynamics]") {
    const OneLayerConfig cfg{{{1.0, 1.0, 0.0}, {2.0, 0.0, 0.5}}};
    CHECK(one_layer_state(cfg, 0.0) == std::vector<double>{0.0, 0.5});
    const auto a = one_layer_state(cfg, std::log(2.0));
    CHECK_THAT(a[0], WithinAbs(0.5, 1e-15));
    CHECK(a[1] == 0.5);
    REQUIRE_THROWS_AS(one_layer_state(cfg, -1.0), DomainError);

    const auto rk = oracles::one_layer_rk4(cfg, std::log(2.0), 1e-3);
    CHECK_THAT(rk[0], WithinAbs(0.5, 1e-8));
}

TEST_CASE("one_layer_state matches RK4 on random configs", "[dynamics]") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> beta(-2.0, 2.0), kappa(0.5, 3.0);
    for (int rep = 0; rep < 5; ++rep) {
        OneLayerConfig cfg;
        for (int r = 0; r < 4; ++r) { cfg.modes.push_back({beta(rng), kappa(rng), beta(rng)}); }
        const double horizon = 10.0 / cfg.min_rate();
        const auto closed = one_layer_state(cfg, horizon);
        const auto rk = oracles::one_layer_rk4(cfg, horizon, 1e-3 / cfg.max_rate());
        for (std::size_t r = 0; r < closed.size(); ++r) { CHECK_THAT(rk[r], WithinAbs(closed[r], 1e-8)); }
    }
}

TEST_CASE("mode_energies examples", "[dynamics]") {
    const OneLayerConfig cfg{{{1.0, 2.0, 0.0}, {3.0, 0.5, 0.0}}};
    const auto e0 = mode_energies(cfg, 0.0);
    CHECK(e0.activation == std::vector<double>{0.0, 0.0});
    CHECK(e0.gradient == std::vector<double>{4.0, 2.25});

    const OneLayerConfig unit{{{1.0, 1.0, 0.0}}};
    const auto half = mode_energies(unit, std::log(2.0));
    CHECK_THAT(half.activation[0], WithinAbs(0.25, 1e-15));
    CHECK_THAT(half.gradient[0], WithinAbs(0.25, 1e-15));

    const auto late = mode_energies(unit, 50.0);
    CHECK_THAT(late.activation[0], WithinAbs(1.0, 1e-20));
    CHECK(late.gradient[0] < 1e-20);

    const auto centered = centered_mode_energies(cfg, 1.0, 0);
    CHECK(centered.activation.size() == 1);
    CHECK(centered.activation[0] == mode_energies(cfg, 1.0).activation[1]);
}

TEST_CASE("loss examples and monotonicity", "[dynamics]") {
    const OneLayerConfig cfg{{{1.0, 1.0, 0.0}, {1.0, 1.0, 0.0}}};
    CHECK(loss(cfg, 0.0) == 1.0);
    CHECK_THAT(loss(cfg, 1.0), WithinRel(std::exp(-2.0), 1e-14));

    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        OneLayerConfig c;
        for (int r = 0; r < 3; ++r) {
            const double b = 2.0 * u(rng) - 1.0;
            c.modes.push_back({b, 3.0 * u(rng), b * u(rng)});
        }
        double prev = loss(c, 0.0);
        for (int k = 1; k <= 50; ++k) {
            const double cur = loss(c, 0.2 * k);
            CHECK(cur <= prev);
            prev = cur;
        }
    }
}

TEST_CASE("matched_loss_time examples", "[dynamics]") {
    const OneLayerConfig iso{{{1.0, 1.0, 0.0}, {1.0, 1.0, 0.0}}};
    CHECK_THAT(matched_loss_time(iso, std::exp(-2.0)), WithinRel(1.0, 1e-11));
    REQUIRE_THROWS_AS(matched_loss_time(iso, loss(iso, 0.0)), DomainError);
    REQUIRE_THROWS_AS(matched_loss_time(iso, 0.0), DomainError);

    const OneLayerConfig aniso{{{1.0, 2.0, 0.0}, {1.0, 1.0, 0.0}}};
    for (double level : {0.9, 0.5, 0.1, 0.01}) {
        const double t = matched_loss_time(aniso, level);
        CHECK_THAT(loss(aniso, t), WithinRel(level, 1e-10));
        CHECK(leading_mode_share(aniso, t) > 0.5);
        CHECK_THAT(leading_mode_share(iso, matched_loss_time(iso, level)), WithinAbs(0.5, 1e-15));
    }
}

TEST_CASE("leading_mode_share examples", "[dynamics]") {
    const OneLayerConfig single{{{2.0, 1.0, 0.0}}};
    CHECK(leading_mode_share(single, 0.3) == 1.0);

    const OneLayerConfig aniso{{{1.0, 2.0, 0.0}, {1.0, 1.0, 0.0}}};
    const double f = 1.0 - std::exp(-2.0), s = 1.0 - std::exp(-1.0);
    CHECK_THAT(leading_mode_share(aniso, 1.0), WithinAbs(f * f / (f * f + s * s), 1e-15));
    CHECK_THAT(leading_mode_share(aniso, 1.0), WithinAbs(0.6517, 1e-4));

    const auto rk = oracles::one_layer_rk4(aniso, 1.0, 1e-4);
    CHECK_THAT(rk[0] * rk[0] / (rk[0] * rk[0] + rk[1] * rk[1]), WithinAbs(0.6517, 1e-4));

    REQUIRE_THROWS_AS(leading_mode_share(single, 0.0), DegenerateInput);
}

TEST_CASE("band_concentration examples", "[dynamics]") {
    CHECK_THAT(band_concentration(1, 2, 1.0, 0.5, 1.0), WithinAbs(0.7207, 1e-4));
    CHECK(band_concentration(3, 8, 1.0, 1.0, 2.0) == 3.0 / 8.0);
    REQUIRE_THROWS_AS(band_concentration(1, 2, 1.0, 2.0, 1.0), DomainError);
    REQUIRE_THROWS_AS(band_concentration(0, 2, 1.0, 0.5, 1.0), DomainError);

    double prev = 1.0;
    for (int k = 1; k < 100; ++k) {
        const double c = band_concentration(2, 5, 1.0, 0.01 * k, 1.5);
        CHECK(c < prev);
        prev = c;
    }
}

TEST_CASE("time_to_target examples", "[dynamics]") {
    CHECK_THAT(time_to_target(1, 1, 1.0, 0.0, 0.5 * std::exp(-2.0)), WithinRel(1.0, 1e-11));
    REQUIRE_THROWS_AS(time_to_target(1, 2, 1.0, 0.5, 1.0), DomainError);

    // Slower slow band: higher early concentration and a later target.
    double prev_t = std::numeric_limits<double>::infinity();
    double prev_c = 1.0;
    for (int k = 1; k < 50; ++k) {
        const double ks = 0.02 * k;
        const double t = time_to_target(1, 4, 1.0, ks, 0.05);
        const double c = band_concentration(1, 4, 1.0, ks, 0.5);
        CHECK(t < prev_t);
        CHECK(c < prev_c);
        prev_t = t;
        prev_c = c;
    }
}

TEST_CASE("smooth_act_spectrum examples", "[dynamics]") {
    SmoothSpectrumConfig cfg;
    cfg.scale = 1.0;
    cfg.teacher_exp = 1.0;
    cfg.rate = 1.0;
    cfg.rate_exp = 1.0;
    cfg.ranks = 5;
    const Spectrum zero = smooth_act_spectrum(cfg, 0.0);
    for (double v : zero.values()) { CHECK(v == 0.0); }
    const double first = smooth_act_spectrum(cfg, 1.0).values().front();
    CHECK_THAT(first, WithinAbs(0.39958, 1e-5));
}

TEST_CASE("three-zone windows at q = 1", "[dynamics]") {
    // The head and tail windows sit one decade from r_*; the corrections fall
    // below 5% only for q near 1 (see the larger-separation verify suite).
    SmoothSpectrumConfig cfg;
    cfg.teacher_exp = 1.0;
    cfg.rate_exp = 1.0;
    cfg.rate = 1000.0;
    const double r_star = crossover_rank(cfg, 1.0);
    REQUIRE_THAT(r_star, WithinRel(1000.0, 1e-12));
    cfg.ranks = static_cast<std::size_t>(400.0 * r_star);
    const Spectrum s = smooth_act_spectrum(cfg, 1.0);
    const auto head = band_alpha(s, {1, static_cast<std::size_t>(std::floor(r_star / 10.0))}).alpha;
    const auto tail = band_alpha(s, {static_cast<std::size_t>(std::ceil(10.0 * r_star)),
                                     static_cast<std::size_t>(std::ceil(20.0 * r_star))})
                          .alpha;
    CHECK(std::abs(head - cfg.teacher_exp) <= 0.05 * cfg.teacher_exp);
    CHECK(std::abs(tail - tail_alpha(cfg)) <= 0.05 * tail_alpha(cfg));
}

TEST_CASE("crossover_rank and tail_alpha", "[dynamics]") {
    SmoothSpectrumConfig cfg;
    cfg.rate = 16.0;
    cfg.rate_exp = 2.0;
    CHECK_THAT(crossover_rank(cfg, 1.0), WithinAbs(4.0, 1e-14));
    CHECK_THAT(crossover_rank(cfg, 2.0) / crossover_rank(cfg, 1.0), WithinRel(std::pow(2.0, 0.5), 1e-14));
    cfg.rate = 1.0;
    cfg.rate_exp = 0.7;
    CHECK_THAT(crossover_rank(cfg, 1.0), WithinAbs(1.0, 1e-15));
    cfg.rate_exp = 0.0;
    REQUIRE_THROWS_AS(crossover_rank(cfg, 1.0), DomainError);
    CHECK(tail_alpha(cfg) == cfg.teacher_exp);
    cfg.teacher_exp = 1.0;
    cfg.rate_exp = 0.5;
    CHECK(tail_alpha(cfg) == 2.0);
}

TEST_CASE("band_recruitment_time closed form and oracle", "[dynamics]") {
    SmoothSpectrumConfig cfg;
    cfg.rate = 1.0;
    cfg.rate_exp = 0.5;
    CHECK_THAT(band_recruitment_time(cfg, 4.0, std::exp(-1.0)), WithinRel(2.0, 1e-14));
    CHECK_THAT(band_recruitment_time(cfg, 1.0, 0.1), WithinRel(std::log(10.0), 1e-14));
    CHECK_THAT(band_recruitment_time(cfg, 64.0, 0.1) / band_recruitment_time(cfg, 32.0, 0.1),
               WithinRel(std::pow(2.0, 0.5), 1e-14));
    REQUIRE_THROWS_AS(band_recruitment_time(cfg, 4.0, 1.0), DomainError);
    REQUIRE_THROWS_AS(band_recruitment_time(cfg, 0.5, 0.1), DomainError);

    for (double eta : {0.3, 2.0}) {
        for (double q : {0.25, 1.5}) {
            cfg.rate = eta;
            cfg.rate_exp = q;
            for (std::size_t r : {3u, 50u}) {
                const double ref = oracles::band_recruitment_bisection(eta, q, r, 0.05);
                CHECK_THAT(band_recruitment_time(cfg, static_cast<double>(r), 0.05), WithinRel(ref, 1e-9));
            }
        }
    }
}

TEST_CASE("head_matched_time examples", "[dynamics]") {
    SmoothSpectrumConfig cfg;
    cfg.rate_exp = 0.5;
    const double xi = 1.0 - std::exp(-1.0);
    CHECK_THAT(head_matched_time(cfg, 1.0, xi, 1.0, 4.0, std::exp(-1.0)), WithinRel(2.0, 1e-14));
    REQUIRE_THROWS_AS(head_matched_time(cfg, 2.0, xi, 1.0, 2.0, 0.1), DomainError);

    SmoothSpectrumConfig flat = cfg;
    flat.rate_exp = 0.25;
    for (double r : {2.0, 10.0, 1000.0}) {
        CHECK(head_matched_time(flat, 1.0, 0.5, 1.0, r, 0.01) < head_matched_time(cfg, 1.0, 0.5, 1.0, r, 0.01));
    }

    // eta implied by the anchor reproduces the plain recruitment time.
    SmoothSpectrumConfig implied = cfg;
    implied.rate = implied_rate(cfg.rate_exp, 3.0, 0.4, 2.0);
    CHECK_THAT(band_recruitment_time(implied, 30.0, 0.02),
               WithinRel(head_matched_time(cfg, 3.0, 0.4, 2.0, 30.0, 0.02), 1e-13));
    CHECK_THAT(oracles::head_matched_bisection(0.5, 3, 0.4, 2.0, 30, 0.02),
               WithinRel(head_matched_time(cfg, 3.0, 0.4, 2.0, 30.0, 0.02), 1e-9));
}

TEST_CASE("grad_crossover_time examples", "[dynamics]") {
    CHECK_THAT(grad_crossover_time(2.0, 1.0), WithinAbs(0.693147, 1e-6));
    CHECK_THAT(grad_crossover_time(4.0, 2.0), WithinAbs(0.346574, 1e-6));
    REQUIRE_THROWS_AS(grad_crossover_time(1.0, 1.0), DomainError);
    REQUIRE_THROWS_AS(grad_crossover_time(1.0, 2.0), DomainError);

    auto g = [](double k, double t) { return k * k * std::exp(-2.0 * k * t); };
    const double tij = grad_crossover_time(3.0, 0.7);
    const double ref = oracles::bisect([&](double t) { return g(3.0, t) - g(0.7, t); }, 0.0, 10.0);
    CHECK_THAT(tij, WithinRel(ref, 1e-10));

    // Activations stay ordered on either side of the crossover.
    const OneLayerConfig cfg{{{1.0, 3.0, 0.0}, {1.0, 0.7, 0.0}}};
    for (int k = 1; k <= 100; ++k) {
        const auto e = mode_energies(cfg, 0.05 * k);
        CHECK(e.activation[0] > e.activation[1]);
    }
}

TEST_CASE("two_layer_state examples", "[dynamics]") {
    const TwoLayerConfig cfg{{{0.0, 0.5}, {1.0, 0.5}}};
    CHECK(two_layer_state(cfg, 0.0) == std::vector<double>{0.5, 0.5});
    const auto m = two_layer_state(cfg, 0.5);
    CHECK_THAT(m[0], WithinAbs(1.0 / 3.0, 1e-15));
    CHECK_THAT(m[1], WithinAbs(1.0 / (1.0 + std::exp(-1.0)), 1e-15));

    const auto rk = oracles::two_layer_rk4(cfg, 0.5, 1e-3 / 2.0);
    CHECK_THAT(rk[0], WithinAbs(m[0], 1e-8));
    CHECK_THAT(rk[1], WithinAbs(m[1], 1e-8));

    double prev0 = 0.5, prev1 = 0.5;
    for (int k = 1; k <= 40; ++k) {
        const auto s = two_layer_state(cfg, 0.1 * k);
        CHECK(s[0] < prev0);
        CHECK(s[1] > prev1);
        CHECK(s[1] < 1.0);
        prev0 = s[0];
        prev1 = s[1];
    }
    REQUIRE_THROWS_AS(two_layer_state(cfg, -0.1), DomainError);
    REQUIRE_THROWS_AS(two_layer_state(TwoLayerConfig{{{1.0, 0.0}}}, 0.1), DomainError);
}

TEST_CASE("band_statistic examples and monotonicity", "[dynamics]") {
    const std::vector<double> all{0.3, 0.7};
    const std::vector<std::size_t> both{0, 1};
    CHECK(band_statistic(all, both) == 1.0);
    const std::vector<double> split{0.6, 0.4};
    const std::vector<std::size_t> first{0};
    CHECK_THAT(band_statistic(split, first), WithinAbs(0.6, 1e-15));
    const std::vector<double> none{0.0, 0.0};
    REQUIRE_THROWS_AS(band_statistic(none, first), DegenerateInput);

    const TwoLayerConfig cfg{{{1.0, 0.1}, {0.8, 0.05}, {0.0, 0.2}, {0.0, 0.1}}};
    const std::vector<std::size_t> band{0, 1};
    double prev = band_statistic(two_layer_state(cfg, 0.0), band);
    for (int k = 1; k <= 100; ++k) {
        const double h = band_statistic(two_layer_state(cfg, 0.05 * k), band);
        CHECK(h > prev);
        prev = h;
    }
}
