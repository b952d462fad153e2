#include <doctest.h>

#include <random>

#include "saftlab/fft.hpp"
#include "saftlab/grid.hpp"
#include "saftlab/meyer.hpp"
#include "saftlab/parallel.hpp"

using namespace saftlab;

namespace {

GridFn gaussian(const GridSpec& g) { return sample_generator({.name = "gaussian"}, g); }

double energy(const GridFn& f) {
    double e = 0.0;
    for (const auto& v : f.values) e += std::norm(v);
    return e * f.spec.cell_volume();
}

cplx at_point(const GeneratorSpec& gen, std::vector<double> x) {
    const std::size_t n = x.size();
    std::vector<double> lo(n);
    for (std::size_t a = 0; a < n; ++a) lo[a] = x[a] - 0.5e-3;
    return sample_generator(gen, GridSpec::over(RMat::Identity(n, n), lo, std::vector<double>(n, 1e-3),
                                                std::vector<std::size_t>(n, 1)))
        .values[0];
}

} // namespace

TEST_CASE("fft::transform matches the direct sum") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    for (std::size_t N : {1u, 2u, 8u, 12u, 64u, 97u}) {
        std::vector<cplx> x(N);
        for (auto& v : x) v = {nd(rng), nd(rng)};
        for (int sign : {-1, 1}) {
            std::vector<cplx> want(N);
            for (std::size_t j = 0; j < N; ++j)
                for (std::size_t k = 0; k < N; ++k)
                    want[j] += x[k] * unit_phase(sign * kTwoPi * double(k * j % N) / double(N));
            auto got = x;
            fft::transform(got, sign);
            CHECK(max_abs_diff(got, want) < 1e-12 * double(N));
        }
    }
    CHECK(fft::is_pow2(64));
    CHECK_FALSE(fft::is_pow2(96));
    CHECK(fft::next_pow2(97) == 128);
}

TEST_CASE("grid spec") {
    const auto g = GridSpec::centered(2, 8.0, 16);
    CHECK(g.size() == 256);
    CHECK(g.cell_volume() == doctest::Approx(1.0));
    CHECK(g.coord(0, 0) == doctest::Approx(-7.5));
    const auto a = GridSpec::aligned(1, 2.0, 4);
    // every integer in [-2, 2) is a grid point
    for (int k = -2; k < 2; ++k) CHECK(a.index_of(RVec::Constant(1, k)).has_value());
    CHECK_FALSE(a.index_of(RVec::Constant(1, 0.1)).has_value());
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.flatten(g.unflatten(i)) == i);

    GridSpec bad = g;
    bad.spacing[1] = 0.0;
    CHECK_THROWS_AS(bad.check(), StructuralError);
    bad = g;
    bad.origin.pop_back();
    CHECK_THROWS_AS(bad.check(), StructuralError);
    CHECK_THROWS_AS(GridFn(g, std::vector<cplx>(3)), StructuralError);
}

TEST_CASE("integrate") {
    for (std::size_t N : {1u, 7u, 32u}) {
        GridFn one(GridSpec::over(RMat::Identity(2, 2), {0.0, 0.0}, {1.0 / double(N), 1.0 / double(N)}, {N, N}));
        for (auto& v : one.values) v = 1.0;
        CHECK(std::abs(integrate(one) - cplx(1.0)) < 1e-13);
    }
    const auto g = gaussian(GridSpec::centered(1, 8.0, 512));
    CHECK(std::abs(integrate(g) - cplx(1.0)) < 1e-10);

    GridFn odd(GridSpec::centered(1, 5.0, 200));
    for (std::size_t i = 0; i < odd.size(); ++i) {
        const double x = odd.spec.point(i)[0];
        odd.values[i] = x * std::exp(-x * x);
    }
    CHECK(std::abs(integrate(odd)) < 1e-12);
}

TEST_CASE("midpoint rule converges at second order") {
    // int_0^1 x^2 dx = 1/3; error of the midpoint rule is h^2 / 12
    auto err = [](std::size_t N) {
        GridFn f(GridSpec::over(RMat::Identity(1, 1), {0.0}, {1.0 / double(N)}, {N}));
        for (std::size_t i = 0; i < N; ++i) {
            const double x = f.spec.point(i)[0];
            f.values[i] = x * x;
        }
        return std::abs(integrate(f).real() - 1.0 / 3.0);
    };
    for (std::size_t N : {8u, 16u, 32u}) CHECK(err(N) / err(2 * N) == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("dft") {
    SUBCASE("Gaussian is a fixed point") {
        const auto g = gaussian(GridSpec::centered(1, 8.0, 512));
        const auto G = dft(g, -1);
        std::vector<cplx> want(G.size());
        for (std::size_t i = 0; i < G.size(); ++i) {
            const double w = G.spec.point(i)[0];
            want[i] = std::exp(-kPi * w * w);
        }
        CHECK(rel_l2(G.values, want) < 1e-8);
    }
    SUBCASE("single sample gives a flat modulus") {
        GridFn d(GridSpec::centered(1, 4.0, 64));
        d.values[17] = 1.0;
        const auto D = dft(d, -1);
        for (const auto& v : D.values) CHECK(std::abs(v) == doctest::Approx(d.spec.cell_volume()));
    }
    SUBCASE("inversion and Parseval on random data") {
        std::mt19937_64 rng(2);
        std::normal_distribution<double> nd;
        for (const auto& spec : {GridSpec::centered(1, 3.0, 100), GridSpec::centered(2, 2.0, 32),
                                 GridSpec::over(RMat::Identity(2, 2), {-1.3, 0.2}, {0.1, 0.07}, {24, 20})}) {
            GridFn f(spec);
            for (auto& v : f.values) v = {nd(rng), nd(rng)};
            const auto F = dft(f, -1);
            CHECK(energy(F) == doctest::Approx(energy(f)).epsilon(1e-12));
            const auto back = dft(F, +1, spec.origin);
            CHECK(back.spec.same_layout(spec, 1e-12));
            CHECK(rel_l2(back.values, f.values) < 1e-12);
        }
    }
    SUBCASE("bit-reproducible for a fixed thread count and stable across counts") {
        std::mt19937_64 rng(4);
        std::normal_distribution<double> nd;
        GridFn f(GridSpec::centered(2, 4.0, 64));
        for (auto& v : f.values) v = {nd(rng), nd(rng)};
        set_thread_count(3);
        const auto a = dft(f, -1), b = dft(f, -1);
        set_thread_count(1);
        const auto c = dft(f, -1);
        set_thread_count(0);
        CHECK(a.values == b.values);
        CHECK(rel_l2(a.values, c.values) < 1e-13);
    }
}

TEST_CASE("sample_generator") {
    CHECK(at_point({.name = "gaussian"}, {0.0, 0.0}) == cplx(1.0));
    CHECK(at_point({.name = "meyer2d"}, {0.0, 0.0}) == cplx(1.0));
    CHECK(std::abs(at_point({.name = "meyer2d"}, {2.0 / 3.0, 0.0})) < 1e-15);
    CHECK(at_point({.name = "tent"}, {0.5}) == cplx(1.0));
    CHECK(std::abs(at_point({.name = "meyer_phi"}, {0.0, 0.0}).real() - meyer::psi_check(0.0) * meyer::psi_check(0.0)) <
          1e-15);
    const cplx c = at_point({.name = "chirped_gaussian", .chirp = 0.5}, {1.0});
    CHECK(std::abs(c - std::exp(-kPi) * unit_phase(0.5 * kPi)) < 1e-15);
    CHECK_THROWS_AS(sample_generator({.name = "nope"}, GridSpec::centered(1, 1.0, 4)), StructuralError);
}

TEST_CASE("meyer window") {
    CHECK(meyer::v(0.0) == 0.0);
    CHECK(meyer::v(1.0) == 1.0);
    double dev = 0.0, pair = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double x = i / 1000.0;
        dev = std::max(dev, std::abs(meyer::v(x) + meyer::v(1.0 - x) - 1.0));
        const double y = 1.0 / 3.0 + x / 3.0;
        pair = std::max(pair, std::abs(meyer::psi(y) * meyer::psi(y) + meyer::psi(1.0 - y) * meyer::psi(1.0 - y) - 1.0));
    }
    CHECK(dev < 1e-14);
    CHECK(pair < 1e-14);
    CHECK(meyer::psi(0.0) == 1.0);
    CHECK(meyer::psi(1.0 / 3.0) == 1.0);
    CHECK(std::abs(meyer::psi(2.0 / 3.0)) < 1e-16);
    CHECK(meyer::psi(0.9) == 0.0);
    // psi_check(0) is the integral of psi
    double integral = 0.0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) integral += meyer::psi(-1.0 + (i + 0.5) * 2.0 / N) * 2.0 / N;
    CHECK(meyer::psi_check(0.0) == doctest::Approx(integral).epsilon(1e-10));
}

TEST_CASE("sequences") {
    SeqFn s(2);
    s.set({1, 2}, {1.0, -1.0});
    s.add({1, 2}, {-1.0, 1.0});
    CHECK(s.empty());
    s.set({0, 0}, 3.0);
    s.set({0, 0}, 0.0);
    CHECK(s.empty());
    s.set({4, -1}, 1e-20);
    s.set({2, 2}, 2.0);
    s.prune(1e-15);
    CHECK(s.support_size() == 1);
    CHECK(s.norm2() == 4.0);

    auto box = SeqBox::centered(2, 2);
    CHECK(box.size() == 25);
    CHECK(box.index_point(0) == IntVec{-2, -2});
    box.values[12] = 5.0;
    const auto q = box.to_seq();
    REQUIRE(q.support_size() == 1);
    CHECK(q(IntVec{0, 0}) == cplx(5.0));
}
