#include "saftlab/selftest.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "saftlab/cli.hpp"
#include "saftlab/dynsamp.hpp"
#include "saftlab/io.hpp"
#include "saftlab/meyer.hpp"
#include "saftlab/repro.hpp"
#include "saftlab/saft.hpp"
#include "saftlab/sis.hpp"

namespace saftlab::selftest {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SeqFn random_seq(int n, std::mt19937_64& rng, int count, int range) {
    std::uniform_int_distribution<int> ki(-range, range);
    std::normal_distribution<double> nd;
    SeqFn s(n);
    for (int i = 0; i < count; ++i) {
        IntVec k(static_cast<std::size_t>(n));
        for (auto& x : k) x = ki(rng);
        s.set(k, cplx(nd(rng), nd(rng)));
    }
    return s;
}

GridFn random_gaussian(const GridSpec& grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> c(-0.4, 0.4), sc(0.8, 1.2);
    GeneratorSpec g;
    g.name = "gaussian";
    for (int a = 0; a < grid.n(); ++a) {
        g.center.push_back(c(rng));
        g.scale.push_back(sc(rng));
    }
    return sample_generator(g, grid);
}

// Grids for the convolution trials: every integer is a grid point.
GridSpec trial_grid(int n) { return GridSpec::aligned(n, n == 1 ? 8.0 : 4.0, n == 1 ? 32 : 8); }

std::vector<RVec> unit_points(const SaftParams& p, std::size_t per_axis) {
    std::vector<RVec> pts;
    for (const auto& z : grid_points(GridSpec::centered(p.n(), 0.5, per_axis))) pts.push_back(p.B() * (z + RVec::Constant(p.n(), 0.5)));
    return pts;
}

} // namespace

const std::vector<std::string>& theorems() {
    static const std::vector<std::string> names{"cc",           "sd",          "dd",       "commute",  "power",
                                                "poisson",      "downsampling", "periodicity", "parseval", "roundtrip"};
    return names;
}

Trial run_trial(const std::string& theorem, int n, std::mt19937_64& rng, const std::optional<SaftParams>& given) {
    if (n < 1 || n > 3) throw StructuralError("trial: dimension must be 1, 2 or 3");
    const SaftParams p = given ? *given : random_params(n, rng);
    if (p.n() != n) throw StructuralError("trial: parameter dimension does not match n");
    Trial t{theorem, n, {}, 0.0};
    const auto w = verification_points(p, 2.0, n == 1 ? 33 : 9);

    if (theorem == "cc" || theorem == "sd" || theorem == "commute" || theorem == "power") {
        const auto grid = trial_grid(n);
        const GridFn f = random_gaussian(grid, rng), g = random_gaussian(grid, rng);
        const SeqFn s = random_seq(n, rng, 3, 2);
        if (theorem == "cc") t.residual = cc_theorem_residual(p, f, g, w);
        else if (theorem == "sd") t.residual = sd_theorem_residual(p, s, f, w);
        else if (theorem == "commute") t.residual = commute_check(p, f, s, g);
        else t.residual = power_theorem_residual(p, f, 3, w);
        t.value = t.residual.rel;
    } else if (theorem == "dd") {
        const SeqFn s = random_seq(n, rng, 4, 3), c = random_seq(n, rng, 5, 3);
        t.residual = dd_theorem_residual(p, s, c, w);
        t.value = t.residual.rel;
    } else if (theorem == "poisson") {
        const auto grid = GridSpec::aligned(n, n == 1 ? 8.0 : 4.0, n == 1 ? 32 : 16);
        const GridFn g = random_gaussian(grid, rng);
        const auto rep = poisson_check(p, g, unit_points(p, n == 1 ? 17 : 5));
        t.residual = compare(rep.lhs, rep.rhs);
        t.value = rep.residual;
    } else if (theorem == "downsampling") {
        const auto lat = build_lattice(IMat::Identity(n, n) * 2);
        const SeqFn c = random_seq(n, rng, 6, 4);
        const auto rep = downsampling_check(p, lat, c, unit_points(p, n == 1 ? 17 : 7));
        t.residual.sup = rep.residual;
        t.residual.scale = rep.scale;
        t.value = rep.residual;
    } else if (theorem == "periodicity") {
        const SeqFn s = random_seq(n, rng, 5, 3);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<RVec> base;
        for (int i = 0; i < 4; ++i) {
            RVec z(n);
            for (int a = 0; a < n; ++a) z[a] = u(rng);
            base.push_back(p.B() * z);
        }
        std::vector<RVec> shifted, ref;
        IntVec l(static_cast<std::size_t>(n), -3);
        while (true) {
            for (const auto& b : base) {
                RVec lr(n);
                for (int a = 0; a < n; ++a) lr[a] = static_cast<double>(l[static_cast<std::size_t>(a)]);
                shifted.push_back(b + p.B() * lr);
                ref.push_back(b);
            }
            int a = n - 1;
            while (a >= 0 && ++l[static_cast<std::size_t>(a)] > 3) l[static_cast<std::size_t>(a--)] = -3;
            if (a < 0) break;
        }
        const auto S1 = dtsaft_at(p, s, shifted), S0 = dtsaft_at(p, s, ref);
        for (std::size_t i = 0; i < S1.size(); ++i) t.value = std::max(t.value, std::abs(std::abs(S1[i]) - std::abs(S0[i])));
        t.residual.sup = t.value;
    } else if (theorem == "parseval") {
        const SeqFn s = random_seq(n, rng, 6, 3);
        t.value = parseval_residual(p, s, n == 1 ? 16 : 12);
        t.residual.rel = t.value;
    } else if (theorem == "roundtrip") {
        const auto grid = GridSpec::centered(n, 8.0, n == 1 ? 512 : (n == 2 ? 256 : 32));
        const GridFn f = random_gaussian(grid, rng);
        const auto plan = make_plan(p, grid);
        const GridFn back = saft_inverse(plan, saft_forward(plan, f));
        t.value = rel_l2(back.values, f.values);
        t.residual.rel = t.value;
    } else {
        throw StructuralError("unknown theorem '" + theorem + "'");
    }
    return t;
}

namespace {

struct Worst {
    double value = 0.0;
    std::string where;
    void update(double v, const std::string& label) {
        if (v > value || where.empty()) {
            value = std::max(value, v);
            where = label;
        }
    }
};

std::vector<std::pair<std::string, SaftParams>> presets_1d() {
    SaftMatrices offset;
    offset.A = RMat::Constant(1, 1, 0.8);
    offset.B = RMat::Constant(1, 1, 0.9);
    offset.C = RMat::Constant(1, 1, -0.2);
    offset.D = RMat::Constant(1, 1, (1.0 + 0.9 * -0.2) / 0.8);
    offset.P = RVec::Constant(1, 0.3);
    offset.Q = RVec::Constant(1, -0.2);
    return {{"ft", presets::fourier(1)},
            {"frft", presets::fractional({0.7})},
            {"fresnel", presets::separable_fresnel({0.8})},
            {"lct", presets::separable_lct({1.2}, {0.7}, {-0.4}, {0.6})},
            {"lorentz", presets::lorentz({0.6})},
            {"saft", presets::custom(offset)}};
}

CheckResult transform_check(const Options& opt) {
    std::mt19937_64 rng(opt.seed + 1);
    auto params = presets_1d();
    for (int i = 0; i < 20; ++i) params.emplace_back("random" + std::to_string(i), random_params(1, rng));
    const auto grid = GridSpec::centered(1, 8.0, 256);
    std::vector<GeneratorSpec> corpus{{"gaussian", {0.0}, {1.0}, 0.0, ""},
                                      {"gaussian", {0.7}, {0.6}, 0.0, ""},
                                      {"chirped_gaussian", {-0.4}, {0.8}, 0.5, ""}};
    Worst worst;
    for (const auto& [name, p] : params) {
        const auto fast = make_plan(p, grid);
        const SaftPlan quad{p, fast.input, fast.output, Backend::quadrature};
        for (const auto& g : corpus) {
            const GridFn f = sample_generator(g, grid);
            worst.update(rel_l2(saft_forward(fast, f).values, saft_forward(quad, f).values), name + "/" + g.name);
        }
    }
    CheckResult r;
    r.value = worst.value;
    r.threshold = 1e-6;
    r.detail = std::to_string(params.size()) + " parameter sets x 3 inputs, worst " + worst.where;
    r.pass = r.value < r.threshold;
    return r;
}

CheckResult inversion_check(const Options& opt) {
    std::mt19937_64 rng(opt.seed + 2);
    Worst worst;
    for (int i = 0; i < 5; ++i) {
        const auto p = i == 0 ? presets::fourier(1) : random_params(1, rng);
        worst.update(run_trial("roundtrip", 1, rng, p).value, "n=1 #" + std::to_string(i));
    }
    for (int i = 0; i < 2; ++i) {
        const auto p = i == 0 ? presets::fourier(2) : random_params(2, rng);
        worst.update(run_trial("roundtrip", 2, rng, p).value, "n=2 #" + std::to_string(i));
    }
    CheckResult r;
    r.value = worst.value;
    r.threshold = 1e-6;
    r.detail = "N=512 (5 sets), N=256^2 (2 sets), worst " + worst.where;
    r.pass = r.value < r.threshold;
    return r;
}

CheckResult trials_check(const Options& opt, std::uint64_t salt, const std::vector<std::pair<std::string, double>>& spec,
                         int trials, bool alternate_n, int n_fixed = 1) {
    CheckResult r;
    r.pass = true;
    std::ostringstream detail;
    for (const auto& [thm, tol] : spec) {
        std::mt19937_64 rng(opt.seed + salt);
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            const int n = alternate_n ? 1 + t % 2 : n_fixed;
            std::optional<SaftParams> p;
            if (thm == "poisson" && t == 0) p = presets::fourier(n);
            worst = std::max(worst, run_trial(thm, n, rng, p).value);
        }
        r.pass = r.pass && worst < tol;
        r.value = std::max(r.value, worst / tol);
        detail << thm << " " << worst << " (< " << tol << ") ";
    }
    r.threshold = 1.0;
    r.detail = detail.str() + "over " + std::to_string(trials) + " trials; value is worst/tolerance";
    return r;
}

CheckResult grammian_check() {
    CheckResult r;
    double part = 0.0;
    for (int i = 0; i < 1024; ++i) {
        const double w = static_cast<double>(i) / 1024.0;
        double s = 0.0;
        for (int k = -2; k <= 2; ++k) s += std::pow(meyer::psi(w + k), 2);
        part = std::max(part, std::abs(s - 1.0));
    }
    const auto p = presets::fourier(2);
    SpectrumFn spec = [](const RVec& w) { return cplx(meyer::psi(w[0]) * meyer::psi(w[1])); };
    const auto model = make_sis_model(p, spec, std::nullopt, 2);
    double gdev = 0.0;
    for (const auto& g : grammian_at(model, fundamental_points(p.B(), 64))) gdev = std::max(gdev, std::abs(g.squared - 1.0));
    r.value = std::max(part / 1e-12, gdev / 1e-8);
    r.threshold = 1.0;
    r.pass = part < 1e-12 && gdev < 1e-8;
    char buf[160];
    std::snprintf(buf, sizeof buf, "partition dev %.2e (< 1e-12) on 1024 points, grammian dev %.2e (< 1e-8) on 64^2", part, gdev);
    r.detail = buf;
    return r;
}

CheckResult worked_example_check() {
    repro::Scenario sc(repro::Config{});
    const auto rep = repro::run(sc);
    CheckResult r;
    r.value = std::max({rep.error_discrete, rep.error_continuous, rep.agreement});
    r.threshold = 1e-6;
    r.pass = rep.recovered && rep.stability_D.pass && rep.min_det_D > 0.0 && rep.factor_residual < 1e-8 &&
             rep.error_discrete >= 0.0 && r.value < 1e-6 && rep.seconds < 120.0;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "min|det D| %.4g, min|det E| %.4g, factor residual %.2e, errors %.2e / %.2e, agreement %.2e, verdict %s",
                  rep.min_det_D, rep.min_det_E, rep.factor_residual, rep.error_discrete, rep.error_continuous,
                  rep.agreement, rep.verdict.c_str());
    r.detail = buf;
    return r;
}

int cli_exit(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    return cli::run(args, out, err);
}

CheckResult failure_check(const Options& opt) {
    namespace fs = std::filesystem;
    CheckResult r;
    std::ostringstream detail;
    bool ok = true;

    // Zero filter: every filtered channel vanishes, so the field is singular.
    const auto p = presets::fourier(2);
    const auto grid = GridSpec::aligned(2, 6.0, 8);
    const GridFn phi = sample_generator({"gaussian", {}, {}, 0.0, ""}, grid);
    const GridFn zero(GridSpec::aligned(2, 2.0, 8));
    const IMat M = IMat::Identity(2, 2) * 2;
    const auto ch = make_channel_model(p, phi, &zero, M, 4, FilterKind::chirped, 3);
    const auto st = stability_report(build_D(ch, 4));
    bool threw = false;
    try {
        const auto model = make_sis_model(p, phi, 3, 1e-6);
        recover_continuous(ch, measure(model, SeqFn::delta(2, {0, 0}), &zero, M, 4), 4);
    } catch (const ValidationError& e) {
        threw = std::string(e.what()).rfind("recovery refused", 0) == 0;
    }
    ok = ok && !st.pass && threw;
    detail << "a=0: " << (st.pass ? "pass" : "fail") << (threw ? ", recovery refused" : ", recovery ran") << "; ";

    // b = 0 in the worked example.
    repro::Config cfg;
    cfg.c1 = cfg.c2 = 0.0;
    cfg.window = 32;
    cfg.radius = 64;
    const auto rep = repro::run(repro::Scenario(cfg));
    ok = ok && !rep.recovered && rep.verdict.rfind("fail", 0) == 0;
    detail << "c1=c2=0: " << (rep.recovered ? "recovered" : "fail") << "; ";

    // The same two cases through the command line.
    const fs::path dir = opt.workdir.empty() ? fs::temp_directory_path() / ("saftlab_selftest_" + std::to_string(opt.seed))
                                             : fs::path(opt.workdir);
    fs::create_directories(dir);
    io::write_json((dir / "ft2.json").string(), io::json{{"preset", "ft"}, {"n", 2}});
    io::write_grid((dir / "phi.grid").string(), phi);
    io::write_grid((dir / "zero.grid").string(), zero);
    const int code_a = cli_exit({"saftlab", "dynsamp", "check", "--params", (dir / "ft2.json").string(), "--phi",
                                 (dir / "phi.grid").string(), "--filter", (dir / "zero.grid").string(), "--M",
                                 "[[2,0],[0,2]]", "--W", "4", "--K", "3", "--out", (dir / "field.csv").string()});
    const int code_b = cli_exit({"saftlab", "repro", "section5", "--c1", "0", "--c2", "0", "--window", "32", "--radius",
                                 "64", "--outdir", (dir / "figs").string()});
    ok = ok && code_a == 2 && code_b == 2;
    detail << "exit codes " << code_a << ", " << code_b << " (expect 2, 2)";
    r.pass = ok;
    r.value = ok ? 0.0 : 1.0;
    r.threshold = 0.5;
    r.detail = detail.str();
    return r;
}

const char* kNames[kCriteria] = {"transform: chirp-DFT vs quadrature",
                                 "inversion round trip",
                                 "convolution theorems",
                                 "DT-SAFT modulus periodicity",
                                 "Poisson summation",
                                 "downsampling identity",
                                 "commutation",
                                 "Parseval",
                                 "Meyer partition and Grammian",
                                 "worked example end to end",
                                 "failure detection"};

} // namespace

CheckResult run_check(int id, const Options& opt) {
    if (id < 1 || id > kCriteria) throw StructuralError("selftest: criterion id out of range");
    const auto t0 = Clock::now();
    CheckResult r;
    switch (id) {
        case 1: r = transform_check(opt); break;
        case 2: r = inversion_check(opt); break;
        case 3: r = trials_check(opt, 3, {{"cc", 1e-6}, {"sd", 1e-6}, {"dd", 1e-12}}, 20, true); break;
        case 4: r = trials_check(opt, 4, {{"periodicity", 1e-12}}, 20, true); break;
        case 5: r = trials_check(opt, 5, {{"poisson", 1e-6}}, 6, false, 1); break;
        case 6: r = trials_check(opt, 6, {{"downsampling", 1e-10}}, 10, false, 2); break;
        case 7: r = trials_check(opt, 7, {{"commute", 1e-6}}, 10, true); break;
        case 8: r = trials_check(opt, 8, {{"parseval", 1e-8}}, 10, true); break;
        case 9: r = grammian_check(); break;
        case 10: r = worked_example_check(); break;
        case 11: r = failure_check(opt); break;
    }
    r.id = id;
    r.name = kNames[id - 1];
    r.seconds = since(t0);
    const double limit = id == 1 ? 30.0 : id == 2 ? 60.0 : id == 10 ? 120.0 : 0.0;
    if (limit > 0.0 && r.seconds > limit) {
        r.pass = false;
        r.detail += "; exceeded the " + std::to_string(static_cast<int>(limit)) + " s budget";
    }
    return r;
}

std::vector<CheckResult> run_all(const Options& opt) {
    std::vector<CheckResult> out;
    for (int id = 1; id <= kCriteria; ++id) out.push_back(run_check(id, opt));
    return out;
}

std::string format(const CheckResult& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "[%s] %02d %-38s value=%.3e (< %.1e)  %.2f s  %s", r.pass ? "PASS" : "FAIL", r.id,
                  r.name.c_str(), r.value, r.threshold, r.seconds, r.detail.c_str());
    return buf;
}

} // namespace saftlab::selftest
