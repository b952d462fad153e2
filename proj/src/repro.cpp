#include "saftlab/repro.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "saftlab/fft.hpp"
#include "saftlab/grid.hpp"
#include "saftlab/meyer.hpp"
#include "saftlab/parallel.hpp"
#include "saftlab/sis.hpp"

namespace saftlab::repro {

using io::json;

namespace {

constexpr int kChannels = 4;

RVec vec2(double a, double b) {
    RVec v(2);
    v << a, b;
    return v;
}

RVec to_real(const IntVec& k) { return vec2(static_cast<double>(k[0]), static_cast<double>(k[1])); }

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

double psi2(const RVec& xi) { return meyer::psi(xi[0]) * meyer::psi(xi[1]); }

// sum_n psi(x + n) per axis; psi vanishes beyond 2/3 so three terms cover it.
double periodized_psi(double x) {
    const double r = x - std::floor(x);
    return meyer::psi(r) + meyer::psi(r - 1.0) + meyer::psi(r + 1.0);
}

double periodized_psi2(const RVec& x) { return periodized_psi(x[0]) * periodized_psi(x[1]); }

// U-transform phase lambda(x) exp(2 pi i p^T x).
cplx unchirp_phase(const SaftParams& p, const RVec& x) {
    return unit_phase(p.chirp_phase(std::span<const double>(x.data(), 2)) + kTwoPi * p.input_shift().dot(x));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

struct Scenario::Closed {
    SaftParams params;
    cplx c1, c2;
    std::int64_t radius = 0;
    std::int64_t table_radius = 0;
    std::vector<double> table;

    double at(std::int64_t t) const {
        if (std::abs(t) > table_radius) return 0.0;
        return table[static_cast<std::size_t>(t + table_radius)];
    }

    // sum_a C(j, a) c1^a c2^(j - a) phi~(x1 + j, x2 + 2j - a), with phi~ from `eval`.
    template <class F>
    cplx unchirped(int j, F&& eval) const {
        cplx acc{};
        for (int a = 0; a <= j; ++a)
            acc += binomial(j, a) * std::pow(c1, a) * std::pow(c2, j - a) * eval(j, 2 * j - a);
        return acc;
    }

    cplx unchirped_int(int j, const IntVec& x) const {
        return unchirped(j, [&](int s1, int s2) { return at(x[0] + s1) * at(x[1] + s2); });
    }

    cplx unchirped_real(int j, const RVec& x) const {
        return unchirped(j, [&](int s1, int s2) { return meyer::psi_check(x[0] + s1) * meyer::psi_check(x[1] + s2); });
    }

    cplx symbol(const RVec& xi) const {
        return c1 * unit_phase(kTwoPi * (xi[0] + xi[1])) + c2 * unit_phase(kTwoPi * (xi[0] + 2.0 * xi[1]));
    }

    cplx spectrum(int j, const RVec& w) const {
        const RVec xi = params.B_inv() * w;
        const double win = psi2(xi);
        if (win == 0.0) return {};
        return params.amplitude() * params.modulation(w) * std::pow(symbol(xi), j) * win;
    }
};

Scenario::Scenario(Config cfg)
    : cfg_(std::move(cfg)), coef_(2), channels_{cfg_.params, build_lattice(IMat::Identity(2, 2) * 2), kChannels,
                                                FilterKind::chirped, {}, {}, 0, 2} {
    if (cfg_.params.n() != 2) throw StructuralError("worked example: the example is two-dimensional");
    if (cfg_.W < 2) throw StructuralError("worked example: solve grid needs W >= 2");
    if (cfg_.window < 1 || cfg_.radius < 1) throw StructuralError("worked example: window and radius must be positive");
    coef_.set({1, 0}, 1.0);
    coef_.set({0, 1}, 2.0);

    auto closed = std::make_shared<Closed>(Closed{cfg_.params, cfg_.c1, cfg_.c2, cfg_.radius, 0, {}});
    closed->table_radius = std::max(cfg_.radius, 2 * cfg_.window + 4) + 2 * kChannels + 2;
    closed->table.resize(static_cast<std::size_t>(2 * closed->table_radius + 1));
    parallel_for(closed->table.size(), [&](std::size_t i) {
        closed->table[i] = meyer::psi_check(static_cast<double>(static_cast<std::int64_t>(i) - closed->table_radius));
    });
    closed_ = closed;

    channels_.radius = cfg_.radius;
    channels_.generator = [closed](int j, const IntVec& x) -> cplx {
        if (std::max(std::abs(x[0]), std::abs(x[1])) > closed->radius) return {};
        const RVec xr = to_real(x);
        return std::conj(unchirp_phase(closed->params, xr)) * closed->unchirped_int(j, x);
    };
    channels_.spectrum = [closed](int j, const std::vector<RVec>& w) {
        std::vector<cplx> out(w.size());
        parallel_for(w.size(), [&](std::size_t i) { out[i] = closed->spectrum(j, w[i]); });
        return out;
    };
}

cplx Scenario::filter_symbol(const RVec& xi) const { return closed_->symbol(xi); }

cplx Scenario::masked_filter(const RVec& xi) const {
    const double e = 2.0 / 3.0;
    if (std::abs(xi[0]) > e || std::abs(xi[1]) > e) return {};
    return closed_->symbol(xi);
}

double Scenario::phi_tilde(const RVec& x) const { return meyer::psi_check(x[0]) * meyer::psi_check(x[1]); }

cplx Scenario::unchirped_channel(int j, const RVec& x) const { return closed_->unchirped_real(j, x); }

cplx Scenario::channel(int j, const RVec& x) const {
    return std::conj(unchirp_phase(cfg_.params, x)) * closed_->unchirped_real(j, x);
}

cplx Scenario::filtered_signal(int j, const RVec& x) const {
    const auto& p = cfg_.params;
    cplx acc{};
    for (const auto& [n, v] : coef_.entries()) {
        const RVec nr = to_real(n);
        acc += unchirp_phase(p, nr) * v * closed_->unchirped_real(j, x - nr);
    }
    return p.amplitude() * std::conj(unchirp_phase(p, x)) * acc;
}

MeasurementSet Scenario::measurements() const {
    const auto& p = cfg_.params;
    const std::int64_t Wn = cfg_.window;
    const std::size_t side = static_cast<std::size_t>(2 * Wn + 1);
    std::vector<std::pair<IntVec, cplx>> terms;
    for (const auto& [n, v] : coef_.entries()) terms.emplace_back(n, unchirp_phase(p, to_real(n)) * v);
    std::vector<std::vector<cplx>> vals(kChannels, std::vector<cplx>(side * side));
    parallel_for(side * side, [&](std::size_t i) {
        const IntVec k{static_cast<std::int64_t>(i / side) - Wn, static_cast<std::int64_t>(i % side) - Wn};
        const IntVec x{2 * k[0], 2 * k[1]};
        const cplx front = p.amplitude() * std::conj(unchirp_phase(p, to_real(x)));
        for (int j = 0; j < kChannels; ++j) {
            cplx acc{};
            for (const auto& [n, w] : terms) acc += w * closed_->unchirped_int(j, {x[0] - n[0], x[1] - n[1]});
            vals[static_cast<std::size_t>(j)][i] = front * acc;
        }
    });
    std::vector<SeqFn> y(kChannels, SeqFn(2));
    for (int j = 0; j < kChannels; ++j)
        for (std::size_t i = 0; i < side * side; ++i)
            y[static_cast<std::size_t>(j)].set({static_cast<std::int64_t>(i / side) - Wn, static_cast<std::int64_t>(i % side) - Wn},
                                               vals[static_cast<std::size_t>(j)][i]);
    auto ms = make_measurements(p, channels_.lat, std::move(y));
    ms.window = Wn;
    return ms;
}

namespace {

double window_checks(Report& r) {
    const int N = 1024;
    for (int i = 0; i < N; ++i) {
        const double w = static_cast<double>(i) / N;
        double s = 0.0;
        for (int k = -2; k <= 2; ++k) s += std::pow(meyer::psi(w + k), 2);
        r.partition_dev = std::max(r.partition_dev, std::abs(s - 1.0));
        const double x = 1.0 / 3.0 + (1.0 / 3.0) * i / (N - 1);
        r.psi_pair_dev = std::max(r.psi_pair_dev, std::abs(std::pow(meyer::psi(x), 2) + std::pow(meyer::psi(1.0 - x), 2) - 1.0));
    }
    return r.partition_dev;
}

// phi~ by a 256^2 inverse DFT of psi psi sampled on [-8, 8]^2, against the quadrature values.
double idft_check(const Scenario& sc) {
    const std::size_t N = 256;
    const auto spec = GridSpec::centered(2, 8.0, N);
    GridFn F(spec);
    for (std::size_t i = 0; i < F.size(); ++i) F.values[i] = psi2(spec.point(i));
    const double h = spec.spacing[0];
    const double o = dual_centered_origin(N, h);
    const GridFn f = dft(F, +1, std::vector<double>{o, o});
    double dev = 0.0;
    // Only the central part is compared; the periodic image contaminates the edges.
    for (std::size_t i = 0; i < f.size(); ++i) {
        const RVec x = f.spec.point(i);
        if (x.cwiseAbs().maxCoeff() > 4.0) continue;
        dev = std::max(dev, std::abs(f.values[i] - sc.phi_tilde(x)));
    }
    return dev;
}

void mask_check(const Scenario& sc, Report& r) {
    const int N = 33;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            const RVec xi = vec2(static_cast<double>(a) / N, static_cast<double>(b) / N);
            const cplx bw = sc.filter_symbol(xi);
            for (int n1 = -2; n1 <= 2; ++n1)
                for (int n2 = -2; n2 <= 2; ++n2) {
                    const RVec y = xi + vec2(n1, n2);
                    const double win = psi2(y);
                    const cplx lhs = sc.masked_filter(y) * win, rhs = bw * win;
                    if (win == 0.0) r.mask_outside = std::max({r.mask_outside, std::abs(lhs), std::abs(rhs)});
                    else r.mask_residual = std::max(r.mask_residual, std::abs(lhs - rhs));
                }
        }
}

// sum_q U phi_j(q) exp(-2 pi i q^T theta) over the sample box, at each theta.
std::vector<cplx> sample_dtft(const ChannelModel& ch, const SaftParams& p, int j, const std::vector<RVec>& theta) {
    const std::int64_t R = ch.radius;
    std::vector<std::pair<RVec, cplx>> samples;
    for (std::int64_t a = -R; a <= R; ++a)
        for (std::int64_t b = -R; b <= R; ++b) {
            const IntVec x{a, b};
            const RVec xr = to_real(x);
            const cplx v = ch.generator(j, x) * unchirp_phase(p, xr);
            if (v != cplx{}) samples.emplace_back(xr, v);
        }
    std::vector<cplx> out(theta.size());
    parallel_for(theta.size(), [&](std::size_t t) {
        cplx acc{};
        for (const auto& [x, v] : samples) acc += v * unit_phase(-kTwoPi * x.dot(theta[t]));
        out[t] = acc;
    });
    return out;
}

} // namespace

Report run(const Scenario& sc) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& cfg = sc.config();
    const auto& p = cfg.params;
    const auto& ch = sc.channels();
    const auto& lat = ch.lat;
    const std::size_t m = static_cast<std::size_t>(lat.m);
    Report r;

    window_checks(r);
    {
        auto spectrum = [&ch](const RVec& w) { return ch.spectrum(0, {w})[0]; };
        const auto model = make_sis_model(p, spectrum, std::nullopt, 2);
        const auto g = grammian_at(model, fundamental_points(p.B(), 32));
        r.grammian_min = std::numeric_limits<double>::infinity();
        for (const auto& v : g) {
            r.grammian_min = std::min(r.grammian_min, v.squared);
            r.grammian_max = std::max(r.grammian_max, v.squared);
        }
    }
    r.idft_deviation = idft_check(sc);
    mask_check(sc, r);

    const MatrixField D = build_D(ch, cfg.W);
    const MatrixField B = build_B(ch, cfg.W);
    const RMat Minv = lat.M_real().inverse();

    // Points theta_{q,v} = M^{-1}(theta_q + gamma_v), column-major in v.
    std::vector<RVec> nodes;
    for (const auto& th : D.points)
        for (std::size_t v = 0; v < m; ++v) nodes.push_back(Minv * (th + to_real(lat.gamma[v])));

    const auto dtft0 = sample_dtft(ch, p, 0, nodes);
    const auto dtft1 = sample_dtft(ch, p, 1, nodes);
    r.min_phi0 = std::numeric_limits<double>::infinity();
    r.min_det_E = r.min_det_E2 = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < D.points.size(); ++q) {
        CMat E(kChannels, static_cast<Eigen::Index>(m));
        CVec phi0(static_cast<Eigen::Index>(m));
        for (std::size_t v = 0; v < m; ++v) {
            const RVec& x = nodes[q * m + v];
            const auto vi = static_cast<Eigen::Index>(v);
            phi0[vi] = periodized_psi2(x);
            r.min_phi0 = std::min(r.min_phi0, phi0[vi].real());
            const cplx b = sc.filter_symbol(x);
            for (int j = 0; j < kChannels; ++j) E(j, vi) = std::pow(b, j);
            r.phi0_poisson_residual = std::max(r.phi0_poisson_residual, std::abs(dtft0[q * m + v] - D.entries[q](0, vi)));
            r.phi1_factor_residual = std::max(r.phi1_factor_residual, std::abs(dtft1[q * m + v] - b * phi0[vi]));
        }
        const CMat DE = E * phi0.asDiagonal();
        r.factor_residual = std::max(r.factor_residual, (D.entries[q] - DE).cwiseAbs().maxCoeff());
        r.min_det_E = std::min(r.min_det_E, std::abs(E.determinant()));

        // The printed two-column form with gamma_0 and gamma_1 only.
        CMat E2(2, 2), D2 = D.entries[q].topLeftCorner(2, 2);
        E2 << 1.0, 1.0, E(1, 0), E(1, 1);
        r.min_det_E2 = std::min(r.min_det_E2, std::abs(E2.determinant()));
        r.factor_residual_2x2 = std::max(r.factor_residual_2x2,
                                         std::abs(D2.determinant() - E2.determinant() * phi0[0] * phi0[1]));
    }

    const MeasurementSet ms = sc.measurements();
    {
        const MeasurementSet alt = measure_channels(ch, sc.coefficients(), cfg.window);
        for (std::size_t j = 0; j < ms.y.size(); ++j)
            r.measurement_crosscheck = std::max(r.measurement_crosscheck, seq_rel_error(alt.y[j], ms.y[j]));
    }

    r.stability_D = stability_report(D, cfg.stability);
    r.stability_B = stability_report(B, cfg.stability);
    r.min_det_D = r.stability_D.min_abs_det;
    r.min_det_B = r.stability_B.min_abs_det;
    if (!r.stability_D.pass || !r.stability_B.pass) {
        r.verdict = !r.stability_D.pass ? "fail: field D " + r.stability_D.verdict : "fail: field B " + r.stability_B.verdict;
    } else {
        try {
            r.recovered_discrete = recover_discrete(ch, ms, cfg.W, cfg.stability).s;
            r.recovered_continuous = recover_continuous(ch, ms, cfg.W, cfg.stability).s;
            r.error_discrete = seq_rel_error(r.recovered_discrete, sc.coefficients());
            r.error_continuous = seq_rel_error(r.recovered_continuous, sc.coefficients());
            r.agreement = seq_rel_error(r.recovered_discrete, r.recovered_continuous);
            r.recovered_discrete.prune(1e-9);
            r.recovered_continuous.prune(1e-9);
            r.recovered = true;
            r.verdict = "pass";
        } catch (const ValidationError& e) {
            r.verdict = std::string("fail: ") + e.what();
        }
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

namespace {

using Row = std::vector<double>;

void write_csv(const std::filesystem::path& path, const std::string& header, const std::vector<Row>& rows) {
    std::ofstream os(path);
    if (!os) throw StructuralError("cannot write " + path.string());
    os << header << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i]);
        os << '\n';
    }
}

std::vector<RVec> figure_grid(std::size_t N, double half_width) {
    std::vector<RVec> pts;
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = 0; b < N; ++b) {
            const double x = -half_width + 2.0 * half_width * static_cast<double>(a) / static_cast<double>(N - 1);
            const double y = -half_width + 2.0 * half_width * static_cast<double>(b) / static_cast<double>(N - 1);
            pts.push_back(vec2(x, y));
        }
    return pts;
}

template <class F>
std::vector<cplx> evaluate(const std::vector<RVec>& pts, F&& f) {
    std::vector<cplx> out(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { out[i] = f(pts[i]); });
    return out;
}

std::vector<Row> surface(const std::vector<RVec>& pts, const std::vector<cplx>& v, int part) {
    std::vector<Row> rows;
    for (std::size_t i = 0; i < pts.size(); ++i)
        rows.push_back({pts[i][0], pts[i][1], part == 0 ? v[i].real() : v[i].imag()});
    return rows;
}

json seq_json(const SeqFn& s) {
    json out = json::array();
    for (const auto& [k, v] : s.entries()) out.push_back({{"k", k}, {"re", v.real()}, {"im", v.imag()}});
    return out;
}

json stability_json(const StabilityReport& s) {
    return {{"min_abs_det", s.min_abs_det},
            {"argmin", std::vector<double>(s.argmin.data(), s.argmin.data() + s.argmin.size())},
            {"max_cond", s.max_cond},
            {"min_hadamard", s.min_hadamard},
            {"pass", s.pass},
            {"verdict", s.verdict}};
}

} // namespace

io::json report_json(const Scenario& sc, const Report& r) {
    const auto& cfg = sc.config();
    json j;
    j["verdict"] = r.verdict;
    j["c1"] = {cfg.c1.real(), cfg.c1.imag()};
    j["c2"] = {cfg.c2.real(), cfg.c2.imag()};
    j["params"] = io::params_to_json(cfg.params);
    j["min_det_E"] = r.min_det_E;
    j["min_det_D"] = r.min_det_D;
    j["min_det_B"] = r.min_det_B;
    j["recovery_error"] = r.recovered ? json(std::max(r.error_discrete, r.error_continuous)) : json(nullptr);
    j["recovery_error_discrete"] = r.recovered ? json(r.error_discrete) : json(nullptr);
    j["recovery_error_continuous"] = r.recovered ? json(r.error_continuous) : json(nullptr);
    j["path_agreement"] = r.recovered ? json(r.agreement) : json(nullptr);
    j["grid_sizes"] = {{"measurement_window", cfg.window},
                       {"measurements_per_channel", (2 * cfg.window + 1) * (2 * cfg.window + 1)},
                       {"generator_radius", cfg.radius},
                       {"solve_grid", {cfg.W, cfg.W}},
                       {"figure_grid", {cfg.figure_points, cfg.figure_points}},
                       {"idft_grid", {256, 256}}};
    j["checks"] = {{"partition_dev", r.partition_dev},
                   {"psi_pair_dev", r.psi_pair_dev},
                   {"grammian_min", r.grammian_min},
                   {"grammian_max", r.grammian_max},
                   {"idft_deviation", r.idft_deviation},
                   {"mask_residual", r.mask_residual},
                   {"mask_outside", r.mask_outside},
                   {"min_phi0", r.min_phi0},
                   {"phi0_poisson_residual", r.phi0_poisson_residual},
                   {"phi1_factor_residual", r.phi1_factor_residual},
                   {"factor_residual", r.factor_residual},
                   {"min_det_E2", r.min_det_E2},
                   {"factor_residual_2x2", r.factor_residual_2x2},
                   {"measurement_crosscheck", r.measurement_crosscheck}};
    j["stability"] = {{"D", stability_json(r.stability_D)}, {"B", stability_json(r.stability_B)}};
    if (r.recovered) {
        j["recovered"] = {{"discrete", seq_json(r.recovered_discrete)}, {"continuous", seq_json(r.recovered_continuous)}};
    }
    return j;
}

void write_outputs(const Scenario& sc, const Report& r, const std::string& outdir) {
    namespace fs = std::filesystem;
    const auto& cfg = sc.config();
    const auto& p = cfg.params;
    const fs::path dir(outdir);
    fs::create_directories(dir);
    const std::size_t N = cfg.figure_points;
    if (N < 2) throw StructuralError("worked example: figure grid needs at least two points per axis");

    const auto unit = figure_grid(N, 1.0);
    write_csv(dir / "fig01_psi.csv", "xi1,xi2,value", surface(unit, evaluate(unit, [](const RVec& x) { return cplx(psi2(x)); }), 0));

    const auto space = figure_grid(N, cfg.figure_half_width);
    const auto f = evaluate(space, [&](const RVec& x) { return sc.filtered_signal(0, x); });
    write_csv(dir / "fig02_f_real.csv", "x1,x2,value", surface(space, f, 0));
    write_csv(dir / "fig03_f_imag.csv", "x1,x2,value", surface(space, f, 1));

    const std::int64_t K = 8;
    std::vector<RVec> ks;
    for (std::int64_t a = -K; a <= K; ++a)
        for (std::int64_t b = -K; b <= K; ++b) ks.push_back(vec2(static_cast<double>(a), static_cast<double>(b)));
    const auto samples = evaluate(ks, [&](const RVec& k) { return sc.filtered_signal(0, 2.0 * k); });
    write_csv(dir / "fig04_f_samples_real.csv", "k1,k2,value", surface(ks, samples, 0));
    write_csv(dir / "fig05_f_samples_imag.csv", "k1,k2,value", surface(ks, samples, 1));

    // Periodized generator spectrum over w = B zeta, zeta in [-1, 1]^2.
    std::vector<RVec> ws;
    for (const auto& z : unit) ws.push_back(p.B() * z);
    const auto sphi = evaluate(ws, [&](const RVec& w) {
        return p.amplitude() * p.modulation(w) * periodized_psi2(p.B_inv() * w);
    });
    write_csv(dir / "fig06_SPhi0_real.csv", "w1,w2,value", surface(ws, sphi, 0));
    write_csv(dir / "fig07_SPhi0_imag.csv", "w1,w2,value", surface(ws, sphi, 1));

    const auto aphi = evaluate(space, [&](const RVec& x) { return sc.channel(1, x); });
    std::vector<Row> rows;
    for (std::size_t i = 0; i < space.size(); ++i) rows.push_back({space[i][0], space[i][1], aphi[i].real(), aphi[i].imag()});
    write_csv(dir / "fig08_filtered_generator.csv", "x1,x2,re,im", rows);
    const auto astem = evaluate(ks, [&](const RVec& k) { return sc.channel(1, 2.0 * k); });
    write_csv(dir / "fig09_samples_real.csv", "k1,k2,value", surface(ks, astem, 0));
    write_csv(dir / "fig10_samples_imag.csv", "k1,k2,value", surface(ks, astem, 1));

    auto j = report_json(sc, r);
    j.erase("seconds");
    io::write_json((dir / "report.json").string(), j);
}

} // namespace saftlab::repro
