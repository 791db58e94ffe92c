#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "splx/dynamics.hpp"
#include "splx/oracles.hpp"
#include "splx/spectra.hpp"

using namespace splx;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DenseMatrix assembled_covariance(const DenseMatrix &h) {
    const std::size_t n = h.rows(), d = h.cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) { mean[j] += h(i, j) / static_cast<double>(n); }
    }
    DenseMatrix c(d, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) {
                c(a, b) += (h(i, a) - mean[a]) * (h(i, b) - mean[b]) / static_cast<double>(n - 1);
            }
        }
    }
    return c;
}

Spectrum power_law(std::size_t n, double exponent, double scale = 1.0) {
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) { v[j] = scale * std::pow(static_cast<double>(j + 1), -exponent); }
    return Spectrum(v);
}

}  // namespace

TEST_CASE("Spectrum validates ordering and sign", "[spectra]") {
    REQUIRE_THROWS_AS(Spectrum(std::vector<double>{}), ShapeError);
    REQUIRE_THROWS_AS(Spectrum(std::vector<double>{1.0, 2.0}), DomainError);
    REQUIRE_THROWS_AS(Spectrum(std::vector<double>{1.0, -1.0}), DomainError);
    const Spectrum s = Spectrum::from_unsorted({1.0, 3.0, 2.0});
    CHECK(s.values() == std::vector<double>{3.0, 2.0, 1.0});

    const Spectrum zero(std::vector<double>{0.0, 0.0});
    CHECK_FALSE(zero.has_normalized());
    REQUIRE_THROWS_AS(zero.normalized(), DegenerateSpectrum);
}

TEST_CASE("covariance_spectrum examples", "[spectra]") {
    const DenseMatrix two{{1.0, 0.0}, {-1.0, 0.0}};
    const Spectrum s = covariance_spectrum(two);
    CHECK(s.values() == std::vector<double>{2.0, 0.0});

    const DenseMatrix same{{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}};
    const Spectrum z = covariance_spectrum(same);
    CHECK(z.values() == std::vector<double>{0.0, 0.0});
    REQUIRE_THROWS_AS(rankme(z), DegenerateSpectrum);

    REQUIRE_THROWS_AS(covariance_spectrum(DenseMatrix(1, 3)), ShapeError);
}

TEST_CASE("covariance_spectrum equals eigenvalues of the assembled covariance", "[spectra]") {
    std::mt19937_64 rng(29);
    const DenseMatrix h = oracles::gaussian_matrix(64, 8, rng);
    const auto ref = oracles::symmetric_eigenvalues_charpoly(assembled_covariance(h));
    const auto got = covariance_spectrum(h).values();
    for (std::size_t k = 0; k < 8; ++k) { CHECK_THAT(got[k], WithinAbs(ref[k], 1e-10)); }
}

TEST_CASE("covariance_spectrum invariances", "[spectra]") {
    std::mt19937_64 rng(31);
    const DenseMatrix h = oracles::gaussian_matrix(40, 6, rng);
    const auto base = covariance_spectrum(h).values();

    // Row permutation.
    std::vector<std::size_t> perm(h.rows());
    for (std::size_t i = 0; i < perm.size(); ++i) { perm[i] = i; }
    std::shuffle(perm.begin(), perm.end(), rng);
    DenseMatrix permuted(h.rows(), h.cols());
    for (std::size_t i = 0; i < h.rows(); ++i) {
        for (std::size_t j = 0; j < h.cols(); ++j) { permuted(i, j) = h(perm[i], j); }
    }
    const auto p = covariance_spectrum(permuted).values();

    // Constant shift of every row (DC component).
    DenseMatrix shifted = h;
    for (std::size_t i = 0; i < h.rows(); ++i) {
        for (std::size_t j = 0; j < h.cols(); ++j) { shifted(i, j) += 3.0 + static_cast<double>(j); }
    }
    const auto sh = covariance_spectrum(shifted).values();

    double variance = 0.0;
    const DenseMatrix c = assembled_covariance(h);
    for (std::size_t j = 0; j < h.cols(); ++j) { variance += c(j, j); }
    double trace = 0.0;
    for (std::size_t k = 0; k < base.size(); ++k) {
        CHECK_THAT(p[k], WithinAbs(base[k], 1e-10));
        CHECK_THAT(sh[k], WithinAbs(base[k], 1e-10));
        trace += base[k];
    }
    CHECK_THAT(trace, WithinRel(variance, 1e-10));
}

TEST_CASE("trace_normalize examples", "[spectra]") {
    const std::vector<double> v{2.0, 1.0, 1.0};
    CHECK(trace_normalize(v) == std::vector<double>{0.5, 0.25, 0.25});
    const std::vector<double> one{7.0};
    CHECK(trace_normalize(one) == std::vector<double>{1.0});
    const std::vector<double> scaled{6.0, 3.0, 3.0};
    const auto a = trace_normalize(v), b = trace_normalize(scaled);
    for (std::size_t k = 0; k < 3; ++k) { CHECK_THAT(a[k], WithinAbs(b[k], 1e-16)); }
    const std::vector<double> zero{0.0, 0.0};
    REQUIRE_THROWS_AS(trace_normalize(zero), DegenerateSpectrum);
}

TEST_CASE("band_alpha on exact and flat spectra", "[spectra]") {
    const auto fit = band_alpha(power_law(300, 2.0), {100, 200});
    CHECK_THAT(fit.alpha, WithinAbs(2.0, 1e-10));
    CHECK(fit.window == RankWindow{100, 200});

    const Spectrum flat(std::vector<double>(50, 1.0));
    CHECK_THAT(band_alpha(flat, {10, 40}).alpha, WithinAbs(0.0, 1e-12));

    // Raw scale does not matter.
    CHECK_THAT(band_alpha(power_law(300, 1.3, 1e5), {100, 200}).alpha,
               WithinAbs(band_alpha(power_law(300, 1.3), {100, 200}).alpha, 1e-12));
}

TEST_CASE("band_alpha rejects bad windows and zeros", "[spectra]") {
    const Spectrum s = power_law(10, 1.0);
    REQUIRE_THROWS_AS(band_alpha(s, {5, 5}), ShapeError);
    REQUIRE_THROWS_AS(band_alpha(s, {0, 5}), ShapeError);
    REQUIRE_THROWS_AS(band_alpha(s, {5, 11}), ShapeError);
    const Spectrum gap(std::vector<double>{3.0, 2.0, 1.0, 0.0});
    try {
        band_alpha(gap, {2, 4});
        FAIL("expected DomainError");
    } catch (const DomainError &e) {
        CHECK(std::string(e.what()).find("rank 4") != std::string::npos);
    }
}

TEST_CASE("band_alpha recovers the deep tail of a three-zone spectrum", "[spectra]") {
    dynamics::SmoothSpectrumConfig cfg;
    cfg.teacher_exp = 1.0;
    cfg.rate_exp = 0.5;
    cfg.rate = 10.0;  // r_* = 100 at t = 1
    cfg.ranks = 40000;
    const Spectrum s = dynamics::smooth_act_spectrum(cfg, 1.0);
    const double alpha = band_alpha(s, {20000, 40000}).alpha;
    CHECK(std::abs(alpha - 2.0) <= 0.05 * 2.0);
}

TEST_CASE("select_window maps the tier bank", "[spectra]") {
    CHECK(select_window("d12") == RankWindow{100, 200});
    CHECK(select_window("d36") == RankWindow{200, 400});
    CHECK(select_window(ScaleTier{"d48", 48}) == RankWindow{400, 800});
    REQUIRE_THROWS_AS(select_window("d24"), ConfigError);
}

TEST_CASE("rankme examples and bounds", "[spectra]") {
    CHECK_THAT(rankme(Spectrum(std::vector<double>{0.5, 0.5})), WithinAbs(2.0, 1e-14));
    CHECK_THAT(rankme(Spectrum(std::vector<double>{1.0, 0.0, 0.0})), WithinAbs(1.0, 1e-15));
    CHECK_THAT(rankme(Spectrum(std::vector<double>{0.75, 0.25})), WithinAbs(1.7548, 1e-4));

    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> v(12);
        for (double &x : v) { x = u(rng); }
        const double r = rankme(Spectrum::from_unsorted(v));
        CHECK(r >= 1.0);
        CHECK(r < 12.0);
    }
    CHECK_THAT(rankme(Spectrum(std::vector<double>(12, 3.0))), WithinAbs(12.0, 1e-12));
}

TEST_CASE("gradient_spectrum examples", "[spectra]") {
    const std::vector<std::vector<double>> one{{3.0, 4.0}};
    CHECK_THAT(gradient_spectrum(one).values().front(), WithinAbs(5.0, 1e-14));

    const std::vector<std::vector<double>> same{{1.0, 2.0, 2.0}, {1.0, 2.0, 2.0}, {1.0, 2.0, 2.0}};
    const auto v = gradient_spectrum(same).values();
    CHECK(v[0] > 0.0);
    CHECK(v[1] == 0.0);
    CHECK(v[2] == 0.0);

    const std::vector<std::vector<double>> ragged{{1.0, 2.0}, {1.0}};
    REQUIRE_THROWS_AS(gradient_spectrum(ragged), ShapeError);
}

TEST_CASE("gradient_spectrum squares match the Gram matrix eigenvalues", "[spectra]") {
    std::mt19937_64 rng(41);
    const DenseMatrix g = oracles::gaussian_matrix(8, 32, rng);
    const auto ref = oracles::symmetric_eigenvalues_charpoly(g * g.transpose());
    const Spectrum s = gradient_spectrum(g);
    double total = 0.0;
    for (std::size_t k = 0; k < 8; ++k) {
        CHECK_THAT(s.values()[k] * s.values()[k], WithinAbs(ref[k], 1e-9));
        total += s.values()[k];
    }
    // Normalized by the singular-value sum.
    CHECK_THAT(s.normalized()[0], WithinAbs(s.values()[0] / total, 1e-15));
}

TEST_CASE("js_divergence axioms", "[spectra]") {
    const Spectrum a(std::vector<double>{0.6, 0.3, 0.1});
    CHECK(js_divergence(a, a) == 0.0);

    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x(6), y(4);
        for (double &v : x) { v = u(rng); }
        for (double &v : y) { v = u(rng); }
        const Spectrum sx = Spectrum::from_unsorted(x), sy = Spectrum::from_unsorted(y);
        const double d = js_divergence(sx, sy);
        CHECK(d >= 0.0);
        CHECK(d <= std::log(2.0));
        CHECK(d == js_divergence(sy, sx));
    }
    REQUIRE_THROWS_AS(js_divergence(a, Spectrum(std::vector<double>{0.0})), DegenerateSpectrum);
}

TEST_CASE("js_divergence with zero padding", "[spectra]") {
    // (1) is padded to (1, 0) against (0.5, 0.5); m = (0.75, 0.25).
    const Spectrum p(std::vector<double>{1.0});
    const Spectrum q(std::vector<double>{1.0, 1.0});
    const double expected = 0.5 * std::log(1.0 / 0.75) + 0.5 * (0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25));
    CHECK_THAT(js_divergence(p, q), WithinAbs(expected, 1e-15));
}
