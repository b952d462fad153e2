#include <doctest.h>

#include <random>

#include "saftlab/meyer.hpp"
#include "saftlab/saft.hpp"
#include "saftlab/sis.hpp"

using namespace saftlab;

namespace {

SpectrumFn meyer_spectrum(const SaftParams& p) {
    return [p](const RVec& w) {
        const RVec xi = p.B_inv() * w - p.input_shift();
        return cplx(meyer::psi(xi[0]) * meyer::psi(xi[1]));
    };
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

} // namespace

TEST_CASE("synthesize") {
    const auto g = GridSpec::aligned(2, 4.0, 8);
    const auto phi = sample_generator({.name = "meyer_phi"}, g);
    const auto ft = presets::fourier(2);
    const auto model = make_sis_model(ft, meyer_spectrum(ft), phi, 2);

    SUBCASE("delta") {
        std::mt19937_64 rng(1);
        const auto p = random_params(2, rng);
        const auto h = synthesize(make_sis_model(p, meyer_spectrum(p), phi, 2), SeqFn::delta(2, {0, 0}));
        std::vector<cplx> want(phi.values);
        for (auto& v : want) v *= p.amplitude();
        CHECK(max_abs_diff(h.values, want) < 1e-14);
    }
    SUBCASE("worked-example coefficients in the Fourier case") {
        SeqFn c(2);
        c.set({1, 0}, 1.0);
        c.set({0, 1}, 2.0);
        const auto f = synthesize(model, c, g);
        for (std::size_t i = 0; i < f.size(); i += 97) {
            const RVec x = g.point(i);
            const bool in1 = x[0] - 1.0 >= -4.0, in2 = x[1] - 1.0 >= -4.0;
            double want = 0.0;
            if (in1) want += meyer::psi_check(x[0] - 1.0) * meyer::psi_check(x[1]);
            if (in2) want += 2.0 * meyer::psi_check(x[0]) * meyer::psi_check(x[1] - 1.0);
            CHECK(std::abs(f.values[i] - cplx(want)) < 1e-14);
        }
    }
    SUBCASE("linear in s") {
        std::mt19937_64 rng(2);
        const auto s1 = random_seq(2, 4, 2, rng), s2 = random_seq(2, 4, 2, rng);
        const cplx a(1.5, -0.5), b(-0.25, 2.0);
        SeqFn mix(2);
        for (const auto& [k, v] : s1.entries()) mix.add(k, a * v);
        for (const auto& [k, v] : s2.entries()) mix.add(k, b * v);
        const auto F1 = synthesize(model, s1, g), F2 = synthesize(model, s2, g), M = synthesize(model, mix, g);
        std::vector<cplx> want(M.size());
        for (std::size_t i = 0; i < M.size(); ++i) want[i] = a * F1.values[i] + b * F2.values[i];
        CHECK(max_abs_diff(M.values, want) < 1e-12);
    }
}

TEST_CASE("grammian") {
    SUBCASE("Meyer window is a partition of unity") {
        const auto ft = presets::fourier(2);
        const auto m = make_sis_model(ft, meyer_spectrum(ft), std::nullopt, 2);
        for (const auto& w : fundamental_points(ft.B(), 16)) CHECK(std::abs(grammian(m, w).squared - 1.0) < 1e-8);
    }
    SUBCASE("zero generator") {
        const auto m = make_sis_model(presets::fourier(1), [](const RVec&) { return cplx{}; }, std::nullopt, 3);
        CHECK(grammian(m, RVec::Zero(1)).squared == 0.0);
    }
    SUBCASE("Gaussian at w = 0 by brute force") {
        const auto g = GridSpec::aligned(1, 8.0, 32);
        const auto m = make_sis_model(presets::fourier(1), sample_generator({.name = "gaussian"}, g), 6);
        double want = 0.0;
        for (int k = -6; k <= 6; ++k) want += std::exp(-2.0 * kPi * k * k);
        CHECK(grammian(m, RVec::Zero(1)).squared == doctest::Approx(want).epsilon(1e-12));
        CHECK(want == doctest::Approx(1.0037348854877393).epsilon(1e-15));
    }
    SUBCASE("B-periodic on random parameters") {
        std::mt19937_64 rng(3);
        const auto p = random_params(1, rng);
        const auto g = GridSpec::aligned(1, 8.0, 32);
        const auto m = make_sis_model(p, sample_generator({.name = "gaussian", .center = {0.3}}, g), 8);
        for (const auto& w : fundamental_points(p.B(), 5))
            for (int l : {-2, 1, 3}) {
                const RVec ws = w + p.B() * RVec::Constant(1, l);
                CHECK(std::abs(grammian(m, ws).squared - grammian(m, w).squared) < 1e-8);
            }
    }
    SUBCASE("slow decay is refused") {
        const auto g = GridSpec::aligned(1, 8.0, 32);
        CHECK_THROWS_AS(make_sis_model(presets::fourier(1), sample_generator({.name = "gaussian"}, g), 1), ValidationError);
    }
}

TEST_CASE("riesz bounds") {
    const auto ft = presets::fourier(2);
    SUBCASE("Meyer window") {
        const auto r = riesz_bounds(make_sis_model(ft, meyer_spectrum(ft), std::nullopt, 2), fundamental_points(ft.B(), 16));
        CHECK(r.pass);
        CHECK(r.eta1 == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(r.eta2 == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("spectral gap on a line") {
        auto base = meyer_spectrum(ft);
        const auto gap = [base](const RVec& w) { return base(w) * std::sin(kPi * w[0]); };
        const auto r = riesz_bounds(make_sis_model(ft, gap, std::nullopt, 2), fundamental_points(ft.B(), 8));
        CHECK_FALSE(r.pass);
        CHECK(r.verdict == "fail (lower bound vanishes)");
        CHECK(r.argmin[0] == 0.0);
    }
    SUBCASE("unchanged by a unit-modulus factor on the spectrum") {
        std::mt19937_64 rng(4);
        const auto p = random_params(2, rng);
        auto base = meyer_spectrum(p);
        const auto twisted = [base](const RVec& w) { return base(w) * unit_phase(3.0 * w.squaredNorm() + w[1]); };
        const auto pts = fundamental_points(p.B(), 8);
        const auto a = riesz_bounds(make_sis_model(p, base, std::nullopt, 2), pts);
        const auto b = riesz_bounds(make_sis_model(p, twisted, std::nullopt, 2), pts);
        CHECK(a.pass == b.pass);
        CHECK(a.eta1 == doctest::Approx(b.eta1).epsilon(1e-14));
        CHECK(a.eta2 == doctest::Approx(b.eta2).epsilon(1e-14));
    }
}

TEST_CASE("frame inequality") {
    std::mt19937_64 rng(5);
    const auto g = GridSpec::aligned(1, 8.0, 16);
    const auto phi = sample_generator({.name = "gaussian", .scale = {0.8}}, g);
    for (const auto& p : {presets::fourier(1), random_params(1, rng)}) {
        const auto m = make_sis_model(p, phi, 6);
        const auto bounds = riesz_bounds(m, fundamental_points(p.B(), 64));
        REQUIRE(bounds.pass);
        std::vector<SeqFn> seqs;
        for (int i = 0; i < 50; ++i) seqs.push_back(random_seq(1, 4, 3, rng));
        const auto fc = frame_check(m, seqs, bounds, g);
        CHECK(fc.violations == 0);
        CHECK(fc.min_ratio >= bounds.eta1 * (1.0 - 1e-6));
        CHECK(fc.max_ratio <= bounds.eta2 * (1.0 + 1e-6));
    }
}

TEST_CASE("parseval") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 4; ++t) {
        const int n = 1 + t % 2;
        const auto p = random_params(n, rng);
        CHECK(parseval_residual(p, random_seq(n, 6, 3, rng), n == 1 ? 64 : 24) < 1e-8);
    }
}

TEST_CASE("wiener norm") {
    const auto g = GridSpec::aligned(1, 2.0, 8);
    const auto tent = sample_generator({.name = "tent"}, g);
    CHECK(wiener_norm(tent, 1.0) == doctest::Approx(1.0));
    CHECK(wiener_norm(GridFn(g), 2.0) == 0.0);

    const auto g2 = GridSpec::aligned(2, 6.0, 8);
    const auto phi = sample_generator({.name = "meyer_phi"}, g2);
    std::map<IntVec, double> cells;
    for (std::size_t i = 0; i < g2.size(); ++i) {
        const auto idx = g2.unflatten(i);
        IntVec k = {std::int64_t(idx[0] / 8) - 6, std::int64_t(idx[1] / 8) - 6};
        cells[k] = std::max(cells[k], std::abs(phi.values[i]));
    }
    double want = 0.0;
    for (const auto& [k, m] : cells) want += m;
    CHECK(wiener_norm(phi, 1.0) == doctest::Approx(want).epsilon(1e-13));

    GridFn half(g2);
    for (std::size_t i = 0; i < g2.size(); ++i) half.values[i] = 0.5 * phi.values[i] * unit_phase(double(i));
    CHECK(wiener_norm(half, 1.5) <= wiener_norm(phi, 1.5));
    CHECK_THROWS_AS(wiener_norm(phi, 0.5), StructuralError);
    CHECK_THROWS_AS(wiener_norm(sample_generator({.name = "tent"}, GridSpec::aligned(1, 2.0, 4)), 1.0), StructuralError);
}
