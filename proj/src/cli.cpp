#include "saftlab/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "saftlab/conv.hpp"
#include "saftlab/dynsamp.hpp"
#include "saftlab/io.hpp"
#include "saftlab/parallel.hpp"
#include "saftlab/repro.hpp"
#include "saftlab/saft.hpp"
#include "saftlab/selftest.hpp"
#include "saftlab/sis.hpp"

namespace saftlab::cli {

namespace {

struct Globals {
    unsigned threads = 0;
    double tol = 1e-6;
    double param_tol = kDefaultConstraintTol;
    std::uint64_t seed = 20260601;
    std::string out;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

cplx parse_complex(const std::string& text) {
    std::string t = text;
    for (char& c : t)
        if (c == ',') c = ' ';
    std::istringstream is(t);
    double re = 0.0, im = 0.0;
    if (!(is >> re)) throw StructuralError("cannot parse complex value '" + text + "' (expected re or re,im)");
    is >> im;
    return {re, im};
}

// Writes through `path` when given, otherwise to `out`.
template <class Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
    if (path.empty()) {
        fn(out);
        return;
    }
    std::ofstream os(path);
    if (!os) throw StructuralError("cannot open '" + path + "' for writing");
    fn(os);
}

void write_field_csv(std::ostream& os, const MatrixField& field) {
    if (field.entries.empty()) return;
    const auto n = field.points.front().size();
    const auto rows = field.entries.front().rows(), cols = field.entries.front().cols();
    const char* coord = field.label == "B" ? "w" : "theta";
    for (Eigen::Index a = 0; a < n; ++a) os << coord << a + 1 << ',';
    for (Eigen::Index j = 0; j < rows; ++j)
        for (Eigen::Index v = 0; v < cols; ++v) os << "re_" << j << v << ",im_" << j << v << ',';
    os << "absdet,cond\n";
    for (std::size_t q = 0; q < field.entries.size(); ++q) {
        const CMat& A = field.entries[q];
        for (Eigen::Index a = 0; a < n; ++a) os << num(field.points[q][a]) << ',';
        for (Eigen::Index j = 0; j < rows; ++j)
            for (Eigen::Index v = 0; v < cols; ++v) os << num(A(j, v).real()) << ',' << num(A(j, v).imag()) << ',';
        double det = 0.0, cond = std::numeric_limits<double>::infinity();
        if (rows == cols) {
            det = std::abs(A.determinant());
            Eigen::JacobiSVD<CMat> svd(A);
            const auto& sv = svd.singularValues();
            if (sv[sv.size() - 1] > 0.0) cond = sv[0] / sv[sv.size() - 1];
        }
        os << num(det) << ',' << num(cond) << '\n';
    }
}

std::string stability_summary(const StabilityReport& s) {
    std::ostringstream os;
    os << "min|det| " << s.min_abs_det << ", max cond " << s.max_cond << ", min hadamard ratio " << s.min_hadamard
       << ": " << s.verdict;
    return os.str();
}

// Options shared by the dynsamp subcommands.
struct ChannelArgs {
    std::string params, phi, filter, M = "[[2,0],[0,2]]", kind = "chirped";
    int J = 0, K = 8;
    std::size_t W = 8;
    double det_rel = 1e-8, cond_max = 1e8;

    void add(CLI::App* app, bool needs_phi = true) {
        app->add_option("--params", params, "SAFT parameter JSON")->required();
        auto* o = app->add_option("--phi", phi, "generator grid");
        if (needs_phi) o->required();
        app->add_option("--filter", filter, "filter grid (required for J > 1)");
        app->add_option("--M", M, "sampling matrix as JSON, e.g. [[2,0],[0,2]]");
        app->add_option("--J", J, "number of channels (default m = |det M|)");
        app->add_option("--kind", kind, "filter composition: chirped or classical");
        app->add_option("--W", W, "solve grid points per axis");
        app->add_option("--K", K, "lattice truncation of the spectral sums");
        app->add_option("--det-rel", det_rel, "determinant threshold relative to the row-norm product");
        app->add_option("--cond-max", cond_max, "condition number threshold");
    }

    StabilityOptions stability() const { return {det_rel, cond_max}; }
};

struct Loaded {
    SaftParams params;
    GridFn phi;
    std::optional<GridFn> filter;
    IMat M;
    int J;
    FilterKind kind;
};

Loaded load_channels(const ChannelArgs& a, const Globals& g) {
    const IMat M = io::parse_int_matrix(a.M);
    const auto lat = build_lattice(M);
    Loaded L{io::read_params(a.params, g.param_tol), io::read_grid(a.phi), std::nullopt, M,
             a.J > 0 ? a.J : static_cast<int>(lat.m), parse_filter_kind(a.kind)};
    if (!a.filter.empty()) L.filter = io::read_grid(a.filter);
    return L;
}

ChannelModel channel_model(const Loaded& L, int K) {
    return make_channel_model(L.params, L.phi, L.filter ? &*L.filter : nullptr, L.M, L.J, L.kind, K);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"saftlab: special affine Fourier transforms, SAFT convolutions and dynamical sampling"};
    app.name(args.empty() ? "saftlab" : args.front());
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
    app.add_option("--tol", g.tol, "pass/fail tolerance for verify and conv checks");
    app.add_option("--param-tol", g.param_tol, "tolerance of the parameter constraints");
    app.add_option("--seed", g.seed, "seed for random trials");
    app.add_option("--out", g.out, "output file (default: standard output)");

    // transform / inverse
    std::string params, in, backend = "fast", wgrid, target;
    auto* transform = app.add_subcommand("transform", "SAFT of a sampled function");
    transform->add_option("--params", params, "SAFT parameter JSON")->required();
    transform->add_option("--in", in, "input grid")->required();
    transform->add_option("--backend", backend, "fast (chirp-DFT) or quad (quadrature)");
    transform->add_option("--wgrid", wgrid, "grid file defining the output points");

    auto* inverse = app.add_subcommand("inverse", "inverse SAFT of a transformed grid");
    inverse->add_option("--params", params, "SAFT parameter JSON of the forward transform")->required();
    inverse->add_option("--in", in, "transformed grid")->required();
    inverse->add_option("--grid", target, "grid file defining the output points");

    // dtsaft
    std::string seq;
    std::size_t points = 64;
    double half_width = 0.5;
    auto* dts = app.add_subcommand("dtsaft", "DT-SAFT of a finite sequence");
    dts->add_option("--params", params, "SAFT parameter JSON")->required();
    dts->add_option("--seq", seq, "sequence CSV (k1..kn,re,im)")->required();
    dts->add_option("--wgrid", wgrid, "grid file defining the output points");
    dts->add_option("--points", points, "points per axis of the default w = B zeta grid");
    dts->add_option("--half-width", half_width, "zeta range [-h, h) of the default grid");

    // conv
    std::string kind = "cc", f_path, g_path, phi_path, seq2, filter_kind = "chirped";
    auto* conv = app.add_subcommand("conv", "SAFT convolutions");
    conv->add_option("--kind", kind, "cc, sd or dd");
    conv->add_option("--params", params, "SAFT parameter JSON")->required();
    conv->add_option("--f", f_path, "first grid (cc)");
    conv->add_option("--g", g_path, "second grid (cc)");
    conv->add_option("--seq", seq, "sequence (sd, dd)");
    conv->add_option("--seq2", seq2, "second sequence (dd)");
    conv->add_option("--phi", phi_path, "generator grid (sd)");
    conv->add_option("--filter-kind", filter_kind, "chirped or classical");

    // verify
    std::string theorem;
    int trials = 20, dim = 1;
    auto* verify = app.add_subcommand("verify", "seeded residual trials of the transform identities");
    verify->add_option("--theorem", theorem, "cc, sd, dd, commute, power, poisson, downsampling, periodicity, parseval, roundtrip")
        ->required();
    verify->add_option("--params", params, "fixed SAFT parameter JSON (default: random per trial)");
    verify->add_option("--trials", trials, "number of trials");
    verify->add_option("--n", dim, "dimension");

    // sis
    std::string report;
    int K = 8;
    double threshold = 1e-8, decay_tol = 1e-10;
    std::size_t per_axis = 32;
    auto* sis = app.add_subcommand("sis", "Grammian and Riesz bounds of a generator");
    sis->add_option("--params", params, "SAFT parameter JSON")->required();
    sis->add_option("--phi", phi_path, "generator grid")->required();
    sis->add_option("--report", report, "Grammian CSV (default: --out or standard output)");
    sis->add_option("--points", per_axis, "points per axis over the fundamental cell");
    sis->add_option("--K", K, "lattice truncation");
    sis->add_option("--threshold", threshold, "lower Riesz bound threshold");
    sis->add_option("--decay-tol", decay_tol, "required spectral decay on the truncation shell");

    // dynsamp
    auto* dyn = app.add_subcommand("dynsamp", "dynamical sampling: channel fields, measurements and recovery");
    dyn->require_subcommand(1);
    ChannelArgs ca;
    std::string field = "D";
    auto* check = dyn->add_subcommand("check", "channel matrix field and stability verdict");
    ca.add(check);
    check->add_option("--field", field, "D (continuous) or B (discrete)");
    auto* measure_cmd = dyn->add_subcommand("measure", "samples of the filtered signals");
    ca.add(measure_cmd);
    measure_cmd->add_option("--seq", seq, "coefficient sequence")->required();
    std::string meas, method = "discrete";
    auto* recover = dyn->add_subcommand("recover", "recover the coefficients from measurements");
    ca.add(recover);
    recover->add_option("--measurements", meas, "measurement CSV (j,k1..kn,re,im)")->required();
    recover->add_option("--method", method, "discrete or continuous");

    // repro
    auto* repro_cmd = app.add_subcommand("repro", "reproduce the worked example");
    repro_cmd->require_subcommand(1);
    std::string c1 = "1", c2 = "0.5", outdir = "worked_example";
    repro::Config rc;
    auto* ex = repro_cmd->add_subcommand("section5", "two-dimensional Meyer-window example with M = 2I");
    ex->alias("example");
    ex->add_option("--c1", c1, "filter coefficient c1 (re or re,im)");
    ex->add_option("--c2", c2, "filter coefficient c2 (re or re,im)");
    ex->add_option("--params", params, "SAFT parameter JSON (default: Fourier)");
    ex->add_option("--outdir", outdir, "directory for figure CSVs and report.json");
    ex->add_option("--W", rc.W, "solve grid points per axis");
    ex->add_option("--window", rc.window, "measurement window |k|_inf");
    ex->add_option("--radius", rc.radius, "generator sample radius");
    ex->add_option("--figure-points", rc.figure_points, "figure grid points per axis");

    // selftest
    int criterion = 0;
    std::string workdir;
    auto* self = app.add_subcommand("selftest", "run the acceptance suite");
    self->add_option("--criterion", criterion, "run a single criterion (1-11)");
    self->add_option("--workdir", workdir, "scratch directory");

    try {
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        if (argv.empty()) argv.push_back("saftlab");
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        set_thread_count(g.threads);

        if (transform->parsed()) {
            const auto p = io::read_params(params, g.param_tol);
            const GridFn f = io::read_grid(in);
            const Backend b = parse_backend(backend);
            std::optional<GridSpec> outgrid;
            if (!wgrid.empty()) outgrid = io::read_grid(wgrid).spec;
            const auto plan = make_plan(p, f.spec, outgrid, b);
            const GridFn F = saft_forward(plan, f);
            emit(g.out, out, [&](std::ostream& os) { io::write_grid(os, F); });
            return kOk;
        }

        if (inverse->parsed()) {
            const auto p = io::read_params(params, g.param_tol);
            const GridFn F = io::read_grid(in);
            GridSpec t;
            if (!target.empty()) {
                t = io::read_grid(target).spec;
            } else {
                // Identity-frame midpoint grid, symmetric about 0, reciprocal to the
                // xi = B^{-1} w lattice of F.
                t = F.spec;
                t.frame = RMat::Identity(F.n(), F.n());
                for (std::size_t a = 0; a < t.shape.size(); ++a) {
                    t.spacing[a] = 1.0 / (static_cast<double>(t.shape[a]) * F.spec.spacing[a]);
                    t.origin[a] = -0.5 * static_cast<double>(t.shape[a]) * t.spacing[a];
                }
            }
            const Backend b = fast_path_sign(p, t, F.spec) != 0 ? Backend::chirp_dft : Backend::quadrature;
            const GridFn f = saft_inverse(SaftPlan{p, t, F.spec, b}, F);
            emit(g.out, out, [&](std::ostream& os) { io::write_grid(os, f); });
            return kOk;
        }

        if (dts->parsed()) {
            const auto p = io::read_params(params, g.param_tol);
            const SeqFn s = io::read_seq(seq, p.n());
            GridSpec w;
            if (!wgrid.empty()) {
                w = io::read_grid(wgrid).spec;
            } else {
                if (points == 0) throw StructuralError("dtsaft: --points must be positive");
                w = GridSpec::over(p.B(), std::vector<double>(static_cast<std::size_t>(p.n()), -half_width),
                                   std::vector<double>(static_cast<std::size_t>(p.n()), 2.0 * half_width / static_cast<double>(points)),
                                   std::vector<std::size_t>(static_cast<std::size_t>(p.n()), points));
            }
            const GridFn S = dtsaft(p, s, w);
            emit(g.out, out, [&](std::ostream& os) { io::write_grid(os, S); });
            return kOk;
        }

        if (conv->parsed()) {
            const auto p = io::read_params(params, g.param_tol);
            const FilterKind fk = parse_filter_kind(filter_kind);
            auto need = [](const std::string& v, const char* flag) {
                if (v.empty()) throw StructuralError(std::string("conv: missing ") + flag);
            };
            if (kind == "cc") {
                need(f_path, "--f");
                need(g_path, "--g");
                const GridFn h = conv_cc(p, io::read_grid(f_path), io::read_grid(g_path), std::nullopt, fk);
                emit(g.out, out, [&](std::ostream& os) { io::write_grid(os, h); });
            } else if (kind == "sd") {
                need(seq, "--seq");
                need(phi_path, "--phi");
                const GridFn h = conv_sd(p, io::read_seq(seq, p.n()), io::read_grid(phi_path), std::nullopt, fk);
                emit(g.out, out, [&](std::ostream& os) { io::write_grid(os, h); });
            } else if (kind == "dd") {
                need(seq, "--seq");
                need(seq2, "--seq2");
                const SeqFn h = conv_dd(p, io::read_seq(seq, p.n()), io::read_seq(seq2, p.n()));
                emit(g.out, out, [&](std::ostream& os) { io::write_seq(os, h); });
            } else {
                throw StructuralError("conv: --kind must be cc, sd or dd");
            }
            return kOk;
        }

        if (verify->parsed()) {
            if (trials < 1) throw StructuralError("verify: --trials must be positive");
            std::optional<SaftParams> fixed;
            if (!params.empty()) {
                fixed = io::read_params(params, g.param_tol);
                dim = fixed->n();
            }
            std::mt19937_64 rng(g.seed);
            int failures = 0;
            emit(g.out, out, [&](std::ostream& os) {
                os << "# seed=" << g.seed << " theorem=" << theorem << " n=" << dim << " tol=" << g.tol << '\n';
                os << "trial,value,rel,sup,pass\n";
                for (int t = 0; t < trials; ++t) {
                    const auto tr = selftest::run_trial(theorem, dim, rng, fixed);
                    const bool ok = tr.value < g.tol;
                    failures += ok ? 0 : 1;
                    os << t << ',' << num(tr.value) << ',' << num(tr.residual.rel) << ',' << num(tr.residual.sup) << ','
                       << (ok ? 1 : 0) << '\n';
                }
            });
            if (failures > 0) {
                err << "verify: " << failures << " of " << trials << " trials exceeded tol " << g.tol << '\n';
                return kValidation;
            }
            return kOk;
        }

        if (sis->parsed()) {
            const auto p = io::read_params(params, g.param_tol);
            const auto model = make_sis_model(p, io::read_grid(phi_path), K, decay_tol);
            const auto pts = fundamental_points(p.B(), per_axis);
            const auto G = grammian_at(model, pts);
            const auto rb = riesz_bounds(model, pts, threshold);
            emit(report.empty() ? g.out : report, out, [&](std::ostream& os) {
                for (int a = 0; a < p.n(); ++a) os << 'w' << a + 1 << ',';
                os << "G,G_unsquared\n";
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    for (int a = 0; a < p.n(); ++a) os << num(pts[i][a]) << ',';
                    os << num(G[i].squared) << ',' << num(G[i].unsquared) << '\n';
                }
            });
            (report.empty() && g.out.empty() ? err : out)
                << "riesz bounds " << rb.eta1 << " .. " << rb.eta2 << ", shell decay " << model.decay_margin << ": "
                << rb.verdict << '\n';
            return rb.pass ? kOk : kValidation;
        }

        if (check->parsed()) {
            const auto L = load_channels(ca, g);
            const auto ch = channel_model(L, ca.K);
            if (field != "D" && field != "B") throw StructuralError("dynsamp check: --field must be D or B");
            const MatrixField mf = field == "D" ? build_D(ch, ca.W) : build_B(ch, ca.W);
            emit(g.out, out, [&](std::ostream& os) { write_field_csv(os, mf); });
            const auto st = stability_report(mf, ca.stability());
            (g.out.empty() ? err : out) << "field " << field << ": " << stability_summary(st) << '\n';
            return st.pass ? kOk : kValidation;
        }

        if (measure_cmd->parsed()) {
            const auto L = load_channels(ca, g);
            const auto model = make_sis_model(L.params, L.phi, ca.K, 1.0);
            const auto ms = measure(model, io::read_seq(seq, L.params.n()), L.filter ? &*L.filter : nullptr, L.M, L.J, L.kind);
            if (g.out.empty()) throw StructuralError("dynsamp measure: --out is required");
            io::write_measurements(g.out, ms.y);
            return kOk;
        }

        if (recover->parsed()) {
            const auto L = load_channels(ca, g);
            const auto ch = channel_model(L, ca.K);
            const auto ms = make_measurements(L.params, ch.lat, io::read_measurements(meas));
            Recovery rec = [&] {
                if (method == "discrete") return recover_discrete(ch, ms, ca.W, ca.stability());
                if (method == "continuous") return recover_continuous(ch, ms, ca.W, ca.stability());
                throw StructuralError("dynsamp recover: --method must be discrete or continuous");
            }();
            emit(g.out, out, [&](std::ostream& os) { io::write_seq(os, rec.s); });
            (g.out.empty() ? err : out) << "recovered " << rec.s.support_size() << " coefficients; "
                                        << stability_summary(rec.stability) << "; max solve residual "
                                        << rec.max_solve_residual << '\n';
            return kOk;
        }

        if (ex->parsed()) {
            rc.c1 = parse_complex(c1);
            rc.c2 = parse_complex(c2);
            if (!params.empty()) rc.params = io::read_params(params, g.param_tol);
            const repro::Scenario sc(rc);
            const auto rep = repro::run(sc);
            repro::write_outputs(sc, rep, outdir);
            out << "min|det E| " << rep.min_det_E << ", min|det D| " << rep.min_det_D << ", factor residual "
                << rep.factor_residual << '\n';
            if (rep.recovered)
                out << "recovery error discrete " << rep.error_discrete << ", continuous " << rep.error_continuous
                    << ", agreement " << rep.agreement << '\n';
            out << "verdict: " << rep.verdict << " (" << outdir << ")\n";
            return rep.recovered ? kOk : kValidation;
        }

        if (self->parsed()) {
            selftest::Options opt{g.seed, workdir};
            std::vector<selftest::CheckResult> results;
            if (criterion != 0) results.push_back(selftest::run_check(criterion, opt));
            else
                for (int id = 1; id <= selftest::kCriteria; ++id) {
                    results.push_back(selftest::run_check(id, opt));
                    out << selftest::format(results.back()) << std::endl;
                }
            if (criterion != 0) out << selftest::format(results.back()) << '\n';
            int failed = 0;
            for (const auto& r : results) failed += r.pass ? 0 : 1;
            out << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
            return failed == 0 ? kOk : kValidation;
        }
    } catch (const ValidationError& e) {
        err << "validation failure: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kStructural;
    }
    err << app.help();
    return kUsage;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace saftlab::cli
