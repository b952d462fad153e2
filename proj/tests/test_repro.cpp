#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "saftlab/meyer.hpp"
#include "saftlab/repro.hpp"

using namespace saftlab;
namespace fs = std::filesystem;

namespace {

const repro::Scenario& default_scenario() {
    static const repro::Scenario sc{repro::Config{}};
    return sc;
}

const repro::Report& default_report() {
    static const repro::Report r = repro::run(default_scenario());
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

RVec v2(double a, double b) { return (RVec(2) << a, b).finished(); }

} // namespace

TEST_CASE("scenario closed forms") {
    const auto& sc = default_scenario();
    SUBCASE("coefficients") {
        const auto& c = sc.coefficients();
        CHECK(c.support_size() == 2);
        CHECK(c(IntVec{1, 0}) == cplx(1.0));
        CHECK(c(IntVec{0, 1}) == cplx(2.0));
    }
    SUBCASE("generator and channels in the Fourier case") {
        for (const auto& x : {v2(0.0, 0.0), v2(0.3, -1.2), v2(2.5, 1.5)}) {
            CHECK(sc.phi_tilde(x) == doctest::Approx(meyer::psi_check(x[0]) * meyer::psi_check(x[1])).epsilon(1e-15));
            CHECK(std::abs(sc.channel(0, x) - cplx(sc.phi_tilde(x))) < 1e-15);
            const cplx want = 1.0 * sc.phi_tilde(x + v2(1, 1)) + 0.5 * sc.phi_tilde(x + v2(1, 2));
            CHECK(std::abs(sc.unchirped_channel(1, x) - want) < 1e-15);
            const cplx f = sc.phi_tilde(x - v2(1, 0)) + 2.0 * sc.phi_tilde(x - v2(0, 1));
            CHECK(std::abs(sc.filtered_signal(0, x) - f) < 1e-14);
        }
    }
    SUBCASE("filter symbol and mask") {
        const RVec xi = v2(0.1, 0.25);
        const cplx b = 1.0 * unit_phase(kTwoPi * 0.35) + 0.5 * unit_phase(kTwoPi * 0.6);
        CHECK(std::abs(sc.filter_symbol(xi) - b) < 1e-15);
        CHECK(sc.masked_filter(xi) == sc.filter_symbol(xi));
        CHECK(sc.masked_filter(v2(0.7, 0.0)) == cplx{});
        CHECK(sc.masked_filter(v2(0.0, -0.9)) == cplx{});
    }
    SUBCASE("measurements sample the filtered signals at 2k") {
        const auto ms = sc.measurements();
        REQUIRE(ms.y.size() == 4);
        for (const IntVec& k : {IntVec{0, 0}, IntVec{1, -1}, IntVec{-2, 3}})
            for (int j = 0; j < 4; ++j)
                CHECK(std::abs(ms.y[j](k) - sc.filtered_signal(j, v2(2.0 * k[0], 2.0 * k[1]))) < 1e-14);
    }
}

TEST_CASE("worked example report") {
    const auto& r = default_report();
    CHECK(r.verdict == "pass");
    CHECK(r.recovered);
    CHECK(r.partition_dev < 1e-12);
    CHECK(r.psi_pair_dev < 1e-14);
    CHECK(r.grammian_min >= 1.0 - 1e-8);
    CHECK(r.grammian_max <= 1.0 + 1e-8);
    CHECK(r.mask_residual < 1e-10);
    CHECK(r.mask_outside == 0.0);
    CHECK(r.min_phi0 > 0.0);
    CHECK(r.phi1_factor_residual < 1e-8);
    CHECK(r.factor_residual < 1e-8);
    CHECK(r.factor_residual_2x2 < 1e-8);
    CHECK(r.min_det_D > 0.0);
    CHECK(r.min_det_E > 0.0);
    CHECK(r.stability_D.pass);
    CHECK(r.stability_B.pass);
    CHECK(r.measurement_crosscheck < 1e-8);
    CHECK(r.error_discrete < 1e-6);
    CHECK(r.error_continuous < 1e-6);
    CHECK(r.agreement < 1e-6);
    CHECK(std::abs(r.recovered_discrete(IntVec{1, 0}) - cplx(1.0)) < 1e-6);
    CHECK(std::abs(r.recovered_discrete(IntVec{0, 1}) - cplx(2.0)) < 1e-6);
    CHECK(std::abs(r.recovered_continuous(IntVec{0, 1}) - cplx(2.0)) < 1e-6);
    // Vandermonde in x + y, -(x + y), y - x, x - y: |det E| = 64 |x|^2 |y|^2 |x^2 - y^2| >= 16 (1 - 1/4)
    CHECK(r.min_det_E == doctest::Approx(12.0).epsilon(1e-6));
}

TEST_CASE("report json and figure files") {
    const auto& sc = default_scenario();
    const auto& r = default_report();
    const auto j = repro::report_json(sc, r);
    for (const char* key : {"verdict", "min_det_E", "min_det_D", "recovery_error", "grid_sizes", "checks", "stability"})
        CHECK(j.contains(key));
    CHECK(j["verdict"] == "pass");

    const fs::path base = fs::temp_directory_path() / "saftlab_test_repro";
    fs::remove_all(base);
    repro::write_outputs(sc, r, (base / "a").string());
    repro::write_outputs(sc, r, (base / "b").string());
    const std::vector<std::string> names = {
        "fig01_psi.csv",          "fig02_f_real.csv",         "fig03_f_imag.csv",   "fig04_f_samples_real.csv",
        "fig05_f_samples_imag.csv", "fig06_SPhi0_real.csv",   "fig07_SPhi0_imag.csv", "fig08_filtered_generator.csv",
        "fig09_samples_real.csv", "fig10_samples_imag.csv",   "report.json"};
    for (const auto& n : names) {
        REQUIRE(fs::exists(base / "a" / n));
        CHECK(slurp(base / "a" / n) == slurp(base / "b" / n));
    }
    fs::remove_all(base);
}

TEST_CASE("degenerate filters fail") {
    repro::Config small;
    small.window = 32;
    small.radius = 64;
    SUBCASE("c1 = c2 = 0") {
        auto cfg = small;
        cfg.c1 = cfg.c2 = 0.0;
        const auto r = repro::run(repro::Scenario(cfg));
        CHECK_FALSE(r.recovered);
        CHECK(r.verdict.rfind("fail", 0) == 0);
        CHECK(r.error_discrete == -1.0);
    }
    SUBCASE("|c1| = |c2|") {
        auto cfg = small;
        cfg.c1 = 1.0;
        cfg.c2 = -1.0;
        const auto r = repro::run(repro::Scenario(cfg));
        CHECK_FALSE(r.recovered);
        CHECK(r.min_det_E < 1e-8);
    }
}

TEST_CASE("chirped parameters") {
    std::mt19937_64 rng(9);
    repro::Config cfg;
    cfg.params = random_params(2, rng);
    const auto r = repro::run(repro::Scenario(cfg));
    CHECK(r.verdict == "pass");
    CHECK(r.error_discrete < 1e-6);
    CHECK(r.error_continuous < 1e-6);
    CHECK(r.factor_residual < 1e-8);
}
