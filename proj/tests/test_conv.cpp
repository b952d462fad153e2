#include <doctest.h>

#include <random>

#include "saftlab/conv.hpp"
#include "saftlab/saft.hpp"

using namespace saftlab;

namespace {

GridFn gauss(const GridSpec& g, std::vector<double> c = {}, std::vector<double> sc = {}) {
    return sample_generator({.name = "gaussian", .center = std::move(c), .scale = std::move(sc)}, g);
}

SeqFn random_seq(int n, int count, int reach, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> k(-reach, reach);
    std::normal_distribution<double> v;
    SeqFn s(n);
    for (int i = 0; i < count; ++i) {
        IntVec x(n);
        for (auto& c : x) c = k(rng);
        s.set(x, {v(rng), v(rng)});
    }
    return s;
}

double value_at(const GridFn& f, double x) {
    const auto i = f.spec.index_of(RVec::Constant(1, x), 1e-6);
    REQUIRE(i.has_value());
    return std::abs(f.values[*i]);
}

} // namespace

TEST_CASE("conv_cc") {
    const auto g1 = GridSpec::aligned(1, 6.0, 16);
    SUBCASE("Fourier preset: Gaussian * Gaussian is the widened Gaussian") {
        const auto h = conv_cc(presets::fourier(1), gauss(g1), gauss(g1));
        double err = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double t = h.spec.point(i)[0];
            err = std::max(err, std::abs(h.values[i] - cplx(std::exp(-kPi * t * t / 2.0) / std::sqrt(2.0))));
        }
        CHECK(err < 1e-6);
    }
    SUBCASE("commutative") {
        std::mt19937_64 rng(3);
        const auto p = random_params(1, rng);
        const auto ga = GridSpec::over(RMat::Identity(1, 1), {-5.0}, {1.0 / 16}, {150});
        const auto f = gauss(g1, {0.4}), g = gauss(ga, {-0.2}, {0.7});
        const auto a = conv_cc(p, f, g), b = conv_cc(p, g, f);
        REQUIRE(a.spec.same_layout(b.spec, 1e-12));
        CHECK(max_abs_diff(a.values, b.values) < 1e-12);
    }
    SUBCASE("theorem on random parameters") {
        std::mt19937_64 rng(5);
        for (int t = 0; t < 4; ++t) {
            const int n = 1 + t % 2;
            const auto p = random_params(n, rng);
            const auto g = GridSpec::aligned(n, n == 1 ? 6.0 : 5.0, n == 1 ? 16 : 8);
            const auto r = cc_theorem_residual(p, gauss(g, {0.3}), gauss(g, {-0.5}, {0.8}), verification_points(p, 2.0, n == 1 ? 17 : 5));
            CHECK(r.rel < 1e-6);
        }
    }
    SUBCASE("spacing mismatch is structural") {
        const auto other = GridSpec::aligned(1, 6.0, 8);
        CHECK_THROWS_AS(conv_cc(presets::fourier(1), gauss(g1), gauss(other)), StructuralError);
    }
}

TEST_CASE("conv_sd") {
    std::mt19937_64 rng(7);
    const auto g = GridSpec::aligned(1, 6.0, 16);
    const auto phi = gauss(g, {0.2}, {0.8});
    SUBCASE("delta gives phi / sqrt|det B|") {
        const auto p = random_params(1, rng);
        const auto h = conv_sd(p, SeqFn::delta(1, {0}), phi);
        REQUIRE(h.spec.same_layout(phi.spec, 1e-12));
        std::vector<cplx> want(phi.values);
        for (auto& v : want) v *= p.amplitude();
        CHECK(max_abs_diff(h.values, want) < 1e-14);
    }
    SUBCASE("Fourier preset is the plain semidiscrete convolution") {
        const auto s = random_seq(1, 3, 2, rng);
        const auto h = conv_sd(presets::fourier(1), s, phi);
        for (std::size_t i = 0; i < h.size(); i += 7) {
            const double t = h.spec.point(i)[0];
            cplx want{};
            for (const auto& [k, v] : s.entries()) {
                const double x = t - double(k[0]) - 0.2;
                if (std::abs(t - double(k[0])) < 6.0) want += v * std::exp(-kPi * x * x / 0.64);
            }
            CHECK(std::abs(h.values[i] - want) < 1e-14);
        }
    }
    SUBCASE("theorem on random parameters") {
        for (int t = 0; t < 4; ++t) {
            const auto p = random_params(1, rng);
            CHECK(sd_theorem_residual(p, random_seq(1, 3, 2, rng), phi, verification_points(p, 2.0, 33)).rel < 1e-6);
        }
    }
    SUBCASE("misaligned grid is structural") {
        const auto bad = GridSpec::centered(1, 3.0, 19);
        CHECK_THROWS_AS(conv_sd(presets::fourier(1), SeqFn::delta(1, {1}), gauss(bad)), StructuralError);
    }
}

TEST_CASE("conv_dd") {
    std::mt19937_64 rng(11);
    const auto p = random_params(2, rng);
    const auto s = random_seq(2, 6, 3, rng), c = random_seq(2, 5, 3, rng), e = random_seq(2, 4, 2, rng);
    SUBCASE("delta is the identity up to the amplitude") {
        const auto h = conv_dd(p, s, SeqFn::delta(2, {0, 0}));
        REQUIRE(h.support_size() == s.support_size());
        for (const auto& [k, v] : s.entries()) CHECK(std::abs(h(k) - v * p.amplitude()) < 1e-14);
    }
    SUBCASE("Fourier preset is the plain discrete convolution") {
        const auto h = conv_dd(presets::fourier(2), s, c);
        std::map<IntVec, cplx> want;
        for (const auto& [k, a] : s.entries())
            for (const auto& [j, b] : c.entries()) want[{k[0] + j[0], k[1] + j[1]}] += a * b;
        for (const auto& [l, v] : want) CHECK(std::abs(h(l) - v) < 1e-14);
    }
    SUBCASE("support lies in the Minkowski sum") {
        const auto h = conv_dd(p, s, c);
        for (const auto& [l, v] : h.entries()) {
            bool found = false;
            for (const auto& [k, a] : s.entries())
                if (c.entries().count({l[0] - k[0], l[1] - k[1]})) found = true;
            CHECK(found);
        }
    }
    SUBCASE("theorem is exact") {
        for (int t = 0; t < 5; ++t) {
            const auto q = random_params(1 + t % 2, rng);
            const auto a = random_seq(q.n(), 5, 4, rng), b = random_seq(q.n(), 4, 4, rng);
            CHECK(dd_theorem_residual(q, a, b, verification_points(q, 2.0, q.n() == 1 ? 33 : 7)).rel < 1e-12);
        }
    }
    SUBCASE("associative") {
        const auto left = conv_dd(p, conv_dd(p, s, c), e), right = conv_dd(p, s, conv_dd(p, c, e));
        const auto w = verification_points(p, 1.5, 6);
        const auto L = dtsaft_at(p, left, w), R = dtsaft_at(p, right, w);
        CHECK(compare(L, R).rel < 1e-12);
    }
}

TEST_CASE("commutation") {
    const auto g = GridSpec::aligned(1, 6.0, 16);
    const auto f = gauss(g, {0.3}), phi = gauss(g, {-0.4}, {0.9});
    std::mt19937_64 rng(13);
    SUBCASE("delta") { CHECK(commute_check(random_params(1, rng), f, SeqFn::delta(1, {0}), phi).rel < 1e-12); }
    SUBCASE("Fourier preset") { CHECK(commute_check(presets::fourier(1), f, random_seq(1, 3, 2, rng), phi).rel < 1e-8); }
    SUBCASE("random LCT") {
        const auto p = random_params(1, rng, {.offsets = false});
        CHECK(commute_check(p, f, random_seq(1, 3, 2, rng), phi).rel < 1e-6);
    }
}

TEST_CASE("conv_power") {
    const auto g = GridSpec::aligned(1, 6.0, 16);
    const auto a = gauss(g, {}, {0.6});
    SUBCASE("j = 1 is the filter itself, j = 0 is refused") {
        const auto one = conv_power(presets::fourier(1), a, 1);
        CHECK(one.values == a.values);
        CHECK_THROWS_AS(conv_power(presets::fourier(1), a, 0), StructuralError);
    }
    SUBCASE("Fourier preset doubles the variance") {
        // exp(-pi t^2 / s^2) convolved with itself: (s / sqrt 2) exp(-pi t^2 / (2 s^2))
        const auto a2 = conv_power(presets::fourier(1), a, 2);
        for (double t : {0.0, 0.5, -1.25}) CHECK(value_at(a2, t) == doctest::Approx(0.6 / std::sqrt(2.0) * std::exp(-kPi * t * t / 0.72)).epsilon(1e-10));
    }
    SUBCASE("power theorem for j = 2, 3") {
        std::mt19937_64 rng(17);
        const auto p = random_params(1, rng);
        for (int j : {2, 3}) CHECK(power_theorem_residual(p, a, j, verification_points(p, 2.0, 17)).rel < 1e-6);
    }
}

TEST_CASE("restrict_to") {
    const auto g = GridSpec::aligned(1, 2.0, 4);
    GridFn f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = double(i);
    const auto sub = restrict_to(f, GridSpec::over(RMat::Identity(1, 1), {-1.125}, {0.25}, {20}));
    CHECK(sub.values[0] == f.values[4]);
    CHECK(sub.values[19] == cplx{});  // past the end of f
    CHECK_THROWS_AS(restrict_to(f, GridSpec::over(RMat::Identity(1, 1), {-1.1}, {0.25}, {4})), StructuralError);
}

TEST_CASE("filter kind names") {
    CHECK(parse_filter_kind("chirped") == FilterKind::chirped);
    CHECK(parse_filter_kind("classical") == FilterKind::classical);
    CHECK_THROWS_AS(parse_filter_kind("other"), StructuralError);
}
