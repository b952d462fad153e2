#include <doctest.h>

#include <random>

#include "saftlab/params.hpp"

using namespace saftlab;

namespace {

SaftMatrices block(int n) {
    SaftMatrices m;
    m.A = RMat::Zero(n, n);
    m.B = RMat::Identity(n, n);
    m.C = -RMat::Identity(n, n);
    m.D = RMat::Zero(n, n);
    m.P = RVec::Zero(n);
    m.Q = RVec::Zero(n);
    return m;
}

double dist(const RMat& a, const RMat& b) { return (a - b).cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("validate: table entry A=D=P=Q=0, B=-C=I passes") {
    const auto r = validate(block(2));
    CHECK(r.pass);
    CHECK(r.unit_ad == 0.0);
    CHECK(r.det_b == doctest::Approx(1.0));
}

TEST_CASE("validate: singular B fails") {
    auto m = block(2);
    m.B = RMat::Zero(2, 2);
    const auto r = validate(m);
    CHECK_FALSE(r.pass);
    CHECK(r.b_singular);
    CHECK_THROWS_AS(SaftParams::from_matrices(m), ValidationError);
}

TEST_CASE("validate: broken AB^T symmetry fails") {
    auto m = block(2);
    m.A << 0, 1, 0, 0;
    const auto r = validate(m);
    CHECK_FALSE(r.pass);
    CHECK(r.sym_ab == doctest::Approx(1.0));
}

TEST_CASE("validate: mismatched block sizes are structural") {
    auto m = block(2);
    m.C = RMat::Identity(3, 3);
    CHECK_THROWS_AS(validate(m), StructuralError);
    auto k = block(2);
    k.P = RVec::Zero(1);
    CHECK_THROWS_AS(validate(k), StructuralError);
}

TEST_CASE("presets") {
    SUBCASE("fourier") {
        const auto p = presets::fourier(2);
        CHECK(dist(p.A(), RMat::Zero(2, 2)) == 0.0);
        CHECK(dist(p.B(), RMat::Identity(2, 2)) == 0.0);
        CHECK(dist(p.C(), -RMat::Identity(2, 2)) == 0.0);
        CHECK(dist(p.D(), RMat::Zero(2, 2)) == 0.0);
        CHECK_FALSE(p.has_offsets());
    }
    SUBCASE("frft at pi/2 is the Fourier preset") {
        const auto f = presets::fractional({kPi / 2, kPi / 2});
        const auto ft = presets::fourier(2);
        CHECK(dist(f.A(), ft.A()) < 1e-15);
        CHECK(dist(f.B(), ft.B()) < 1e-15);
        CHECK(dist(f.C(), ft.C()) < 1e-15);
        CHECK(dist(f.D(), ft.D()) < 1e-15);
    }
    SUBCASE("degenerate arguments") {
        CHECK_THROWS_AS(presets::lorentz({0.0, 0.0}), ValidationError);
        CHECK_THROWS_AS(presets::fractional({0.0}), ValidationError);
        CHECK_THROWS_AS(presets::separable_fresnel({0.0, 1.0}), ValidationError);
    }
    SUBCASE("all families validate at 1e-12") {
        RMat B(2, 2);
        B << 1.0, 0.3, 0.3, 0.8;
        const std::vector<SaftParams> all = {
            presets::fourier(3),
            presets::fractional({0.3, 1.1}),
            presets::separable_lct({1.2, 0.5}, {0.7, 2.0}, {-0.4, -0.25}, {0.6, 1.0}),
            presets::fresnel(B),
            presets::separable_fresnel({0.5, 2.0}),
            presets::lorentz({0.6, -0.2}),
        };
        for (const auto& p : all) CHECK(validate(p.matrices(), 1e-12).pass);
    }
}

TEST_CASE("inverse_params") {
    SUBCASE("1-D Fourier") {
        const auto q = inverse_params(presets::fourier(1));
        CHECK(q.A()(0, 0) == 0.0);
        CHECK(q.B()(0, 0) == -1.0);
        CHECK(q.C()(0, 0) == 1.0);
        CHECK(q.D()(0, 0) == 0.0);
        CHECK(q.P()(0) == 0.0);
        CHECK(q.Q()(0) == 0.0);
    }
    SUBCASE("involution on an LCT") {
        const auto p = presets::separable_lct({1.0}, {1.0}, {0.0}, {1.0});
        const auto q = inverse_params(inverse_params(p));
        CHECK(dist(q.A(), p.A()) == 0.0);
        CHECK(dist(q.B(), p.B()) == 0.0);
        CHECK(dist(q.C(), p.C()) == 0.0);
        CHECK(dist(q.D(), p.D()) == 0.0);
    }
    SUBCASE("involution and validity on 100 random sets") {
        std::mt19937_64 rng(7);
        for (int i = 0; i < 100; ++i) {
            const auto p = random_params(1 + i % 3, rng);
            const auto q = inverse_params(p);
            CHECK(validate(q.matrices(), 1e-9).pass);
            const auto r = inverse_params(q);
            CHECK(dist(r.A(), p.A()) < 1e-12);
            CHECK(dist(r.B(), p.B()) < 1e-12);
            CHECK(dist(r.C(), p.C()) < 1e-12);
            CHECK(dist(r.D(), p.D()) < 1e-12);
            CHECK((r.P() - p.P()).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((r.Q() - p.Q()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("zero offsets stay zero") {
        const auto q = inverse_params(presets::fractional({0.4, 0.9}));
        CHECK_FALSE(q.has_offsets());
    }
}

TEST_CASE("chirp and modulation") {
    const auto ft = presets::fourier(2);
    RVec t(2);
    t << 0.3, -1.7;
    CHECK(ft.chirp(t) == cplx(1.0, 0.0));
    CHECK(ft.modulation(t) == cplx(1.0, 0.0));
    CHECK(ft.chirp(RVec::Zero(2)) == cplx(1.0, 0.0));

    // A = 1, B = 1, C = 0, D = 1: lambda(1) = exp(i pi)
    const auto lens = presets::separable_lct({1.0}, {1.0}, {0.0}, {1.0});
    const cplx l1 = lens.chirp(RVec::Ones(1));
    CHECK(l1.real() == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(l1.imag()) < 1e-15);

    // D = 1, B = 1, P = 0, Q = 1: eta(1) = exp(i pi + 2 i pi)
    SaftMatrices m;
    m.A = RMat::Zero(1, 1);
    m.B = RMat::Ones(1, 1);
    m.C = -RMat::Ones(1, 1);
    m.D = RMat::Ones(1, 1);
    m.P = RVec::Zero(1);
    m.Q = RVec::Ones(1);
    const auto p = SaftParams::from_matrices(m);
    const cplx e1 = p.modulation(RVec::Ones(1));
    CHECK(e1.real() == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(e1.imag()) < 1e-14);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 5.0);
    for (int i = 0; i < 50; ++i) {
        const auto q = random_params(2, rng);
        RVec x(2);
        x << nd(rng), nd(rng);
        CHECK(std::abs(std::abs(q.chirp(x)) - 1.0) < 1e-15);
        CHECK(std::abs(std::abs(q.modulation(x)) - 1.0) < 1e-15);
    }
}

TEST_CASE("derived quantities") {
    std::mt19937_64 rng(11);
    const auto p = random_params(2, rng);
    CHECK(dist(p.B_inv() * p.B(), RMat::Identity(2, 2)) < 1e-12);
    CHECK(dist(p.chirp_matrix(), p.chirp_matrix().transpose()) < 1e-12);
    CHECK(p.amplitude() == doctest::Approx(1.0 / std::sqrt(std::abs(p.det_b()))));
    CHECK((p.input_shift() - p.B_inv() * p.P()).cwiseAbs().maxCoeff() < 1e-14);
}
