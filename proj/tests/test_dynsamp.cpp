#include <doctest.h>

#include <random>
#include <set>

#include "saftlab/dynsamp.hpp"
#include "saftlab/parallel.hpp"
#include "saftlab/saft.hpp"

using namespace saftlab;

namespace {

// One-dimensional two-channel setup: wide Gaussian generator, shifted narrow
// Gaussian filter, M = 2.
struct Setup {
    SaftParams p;
    GridFn phi, a;
    IMat M = IMat::Constant(1, 1, 2);
    int K = 4;
    std::size_t W = 16;

    explicit Setup(SaftParams params)
        : p(std::move(params)),
          phi(sample_generator({.name = "gaussian"}, GridSpec::aligned(1, 12.0, 16))),
          a(sample_generator({.name = "gaussian", .center = {0.5}, .scale = {0.4}}, GridSpec::aligned(1, 3.0, 16))) {}

    SisModel model() const { return make_sis_model(p, phi, K, 1e-6); }
    ChannelModel channels() const { return make_channel_model(p, phi, &a, M, 2, FilterKind::chirped, K); }
};

SeqFn random_seq(int count, int reach, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> k(-reach, reach);
    std::normal_distribution<double> v;
    SeqFn s(1);
    for (int i = 0; i < count; ++i) s.set({k(rng)}, {v(rng), v(rng)});
    return s;
}

MeasurementSet combine(const SaftParams& p, const SamplingLattice& lat, const MeasurementSet& x, cplx a,
                       const MeasurementSet& y, cplx b) {
    std::vector<SeqFn> out;
    for (std::size_t j = 0; j < x.y.size(); ++j) {
        SeqFn s(lat.n());
        for (const auto& [k, v] : x.y[j].entries()) s.add(k, a * v);
        for (const auto& [k, v] : y.y[j].entries()) s.add(k, b * v);
        out.push_back(std::move(s));
    }
    return make_measurements(p, lat, std::move(out));
}

MatrixField constant_field(CMat m, std::size_t count) {
    MatrixField f;
    f.label = "T";
    for (std::size_t i = 0; i < count; ++i) {
        f.points.push_back(RVec::Constant(1, double(i) / double(count)));
        f.entries.push_back(m);
    }
    f.shape = {count};
    return f;
}

} // namespace

TEST_CASE("measurements") {
    std::mt19937_64 rng(1);
    SUBCASE("delta, level 0, Fourier preset") {
        Setup su(presets::fourier(1));
        const auto ms = measure(su.model(), SeqFn::delta(1, {0}), &su.a, su.M, 2);
        for (const auto& [k, v] : ms.y[0].entries())
            CHECK(std::abs(v - std::exp(-kPi * 4.0 * double(k[0] * k[0]))) < 1e-14);
        // no chirps: v_j = y_j
        for (int j = 0; j < 2; ++j)
            for (const auto& [k, v] : ms.y[j].entries()) CHECK(ms.v[j](k) == v);
    }
    SUBCASE("grid pipeline against the generator samples") {
        for (const auto& p : {presets::fourier(1), random_params(1, rng)}) {
            Setup su(p);
            const auto s = random_seq(6, 3, rng);
            const auto ch = su.channels();
            const auto ms = measure(su.model(), s, &su.a, su.M, 2);
            const auto alt = measure_channels(ch, s, ms.window);
            for (int j = 0; j < 2; ++j) CHECK(seq_rel_error(alt.y[j], ms.y[j]) < 1e-12);
            CHECK(v_chain_residual(ch, s, ms).sup < 1e-8);
            CHECK(b_system_residual(ch, s, ms, su.W).sup < 1e-8);
            CHECK(d_system_residual(ch, s, ms, su.W).sup < 1e-6);
        }
    }
    SUBCASE("classical filter kind refuses the generator route with chirps") {
        const auto p = random_params(1, rng);
        Setup su(p);
        const auto ch = make_channel_model(p, su.phi, &su.a, su.M, 2, FilterKind::classical, su.K);
        CHECK_THROWS_AS(measure_channels(ch, SeqFn::delta(1, {0}), 4), StructuralError);
    }
}

TEST_CASE("channel model construction") {
    Setup su(presets::fourier(1));
    CHECK_THROWS_AS(make_channel_model(su.p, su.phi, nullptr, su.M, 2), StructuralError);
    CHECK_THROWS_AS(make_channel_model(su.p, su.phi, &su.a, su.M, 0), StructuralError);
    const auto off = sample_generator({.name = "gaussian"}, GridSpec::centered(1, 4.0, 30));
    CHECK_THROWS_AS(make_channel_model(su.p, off, nullptr, IMat::Identity(1, 1), 1), StructuralError);

    // j = 0, l = 0, M = I: the plain samples of phi
    const auto ch = make_channel_model(su.p, su.phi, nullptr, IMat::Identity(1, 1), 1);
    const auto g = chirped_generator_samples(ch, 0, 0);
    for (int r = -5; r <= 5; ++r) CHECK(std::abs(g(IntVec{r}) - std::exp(-kPi * r * r)) < 1e-15);
    // l != 0 samples the same function on the shifted lattice
    const auto two = su.channels();
    const auto g1 = chirped_generator_samples(two, 0, 1);
    for (int r = -3; r <= 3; ++r) {
        const double x = 2.0 * r - 1.0;
        CHECK(std::abs(g1(IntVec{r}) - std::exp(-kPi * x * x)) < 1e-15);
    }
}

TEST_CASE("stability report") {
    SUBCASE("identity field") {
        const auto r = stability_report(constant_field(CMat::Identity(1, 1), 8));
        CHECK(r.pass);
        CHECK(r.min_abs_det == 1.0);
        CHECK(r.max_cond == doctest::Approx(1.0));
    }
    SUBCASE("a zero matrix somewhere") {
        auto f = constant_field(CMat::Identity(2, 2), 8);
        f.entries[5] = CMat::Zero(2, 2);
        const auto r = stability_report(f);
        CHECK_FALSE(r.pass);
        CHECK(r.min_abs_det == 0.0);
        CHECK(r.argmin[0] == doctest::Approx(5.0 / 8.0));
    }
    SUBCASE("zero filter") {
        Setup su(presets::fourier(1));
        const GridFn zero(su.a.spec);
        const auto ch = make_channel_model(su.p, su.phi, &zero, su.M, 2, FilterKind::chirped, su.K);
        CHECK_FALSE(stability_report(build_D(ch, 8)).pass);
        CHECK_FALSE(stability_report(build_B(ch, 8)).pass);
        for (const auto& e : build_D(ch, 8).entries) CHECK(e.row(1).cwiseAbs().maxCoeff() == 0.0);
        const auto ms = measure(su.model(), SeqFn::delta(1, {0}), &zero, su.M, 2);
        CHECK_THROWS_AS(recover_discrete(ch, ms, 8), ValidationError);
        CHECK_THROWS_AS(recover_continuous(ch, ms, 8), ValidationError);
    }
    SUBCASE("determinants are continuous under refinement") {
        std::mt19937_64 rng(2);
        Setup su(random_params(1, rng));
        const auto ch = su.channels();
        for (auto build : {build_B, build_D}) {
            const double coarse = max_det_jump(build(ch, 16)), fine = max_det_jump(build(ch, 32));
            CHECK(fine < 0.7 * coarse);
        }
    }
}

TEST_CASE("recovery") {
    std::mt19937_64 rng(3);
    SUBCASE("m = 1, no filter, delta") {
        Setup su(presets::fourier(1));
        const IMat I = IMat::Identity(1, 1);
        const auto ch = make_channel_model(su.p, su.phi, nullptr, I, 1, FilterKind::chirped, su.K);
        const auto ms = measure(su.model(), SeqFn::delta(1, {0}), nullptr, I, 1);
        const auto d = recover_discrete(ch, ms, 16), c = recover_continuous(ch, ms, 16);
        CHECK(seq_rel_error(d.s, SeqFn::delta(1, {0})) < 1e-8);
        CHECK(seq_rel_error(c.s, SeqFn::delta(1, {0})) < 1e-8);
        // scalar field: B(w) is the single generator spectrum entry
        const auto B = build_B(ch, 16);
        REQUIRE(B.entries[0].rows() == 1);
    }
    SUBCASE("two channels, both paths") {
        for (const auto& p : {presets::fourier(1), random_params(1, rng), random_params(1, rng)}) {
            Setup su(p);
            const auto s = random_seq(6, 3, rng);
            const auto ch = su.channels();
            const auto ms = measure(su.model(), s, &su.a, su.M, 2);
            const auto d = recover_discrete(ch, ms, su.W);
            const auto c = recover_continuous(ch, ms, su.W);
            CHECK(d.stability.pass);
            CHECK(seq_rel_error(d.s, s) < 1e-6);
            CHECK(seq_rel_error(c.s, s) < 1e-6);
            CHECK(seq_rel_error(c.s, d.s) < 1e-6);
        }
    }
    SUBCASE("zero data gives zero") {
        Setup su(random_params(1, rng));
        const auto ch = su.channels();
        const auto ms = make_measurements(su.p, ch.lat, {SeqFn(1), SeqFn(1)});
        CHECK(recover_discrete(ch, ms, su.W).s.norm2() == 0.0);
        CHECK(recover_continuous(ch, ms, su.W).s.norm2() == 0.0);
    }
    SUBCASE("linear in the data") {
        Setup su(random_params(1, rng));
        const auto ch = su.channels();
        const auto model = su.model();
        const auto m1 = measure(model, random_seq(5, 3, rng), &su.a, su.M, 2);
        const auto m2 = measure(model, random_seq(5, 3, rng), &su.a, su.M, 2);
        const cplx a(0.7, -1.2), b(-2.0, 0.3);
        const auto mix = combine(su.p, ch.lat, m1, a, m2, b);
        for (auto rec : {recover_discrete, recover_continuous}) {
            const auto r1 = rec(ch, m1, su.W, {}).s, r2 = rec(ch, m2, su.W, {}).s, rm = rec(ch, mix, su.W, {}).s;
            SeqFn want(1);
            for (const auto& [k, v] : r1.entries()) want.add(k, a * v);
            for (const auto& [k, v] : r2.entries()) want.add(k, b * v);
            double err = 0.0;
            for (const auto& k : recovery_indices(ch.lat, su.W)) err = std::max(err, std::abs(rm(k) - want(k)));
            CHECK(err < 1e-10);
        }
    }
    SUBCASE("thread count does not change the result beyond rounding") {
        Setup su(random_params(1, rng));
        const auto s = random_seq(6, 3, rng);
        const auto ch = su.channels();
        const auto ms = measure(su.model(), s, &su.a, su.M, 2);
        set_thread_count(1);
        const auto one = recover_discrete(ch, ms, su.W).s;
        set_thread_count(4);
        const auto four = recover_discrete(ch, ms, su.W).s, again = recover_discrete(ch, ms, su.W).s;
        set_thread_count(0);
        CHECK(four.entries() == again.entries());
        double diff = 0.0;
        for (const auto& k : recovery_indices(ch.lat, su.W)) diff = std::max(diff, std::abs(one(k) - four(k)));
        CHECK(diff <= 1e-12);
    }
}

TEST_CASE("recovery index set") {
    IMat M(2, 2);
    M << 1, 1, -1, 1;
    const auto lat = build_lattice(M);
    const auto idx = recovery_indices(lat, 4);
    CHECK(idx.size() == 2 * 16);
    const std::set<IntVec> uniq(idx.begin(), idx.end());
    CHECK(uniq.size() == idx.size());
    // distinct modulo W M^T Z^2
    std::set<IntVec> classes;
    for (const auto& k : idx) {
        const auto d = decompose(lat, k);
        classes.insert({(d.r[0] % 4 + 4) % 4, (d.r[1] % 4 + 4) % 4, std::int64_t(d.j)});
    }
    CHECK(classes.size() == idx.size());
}
