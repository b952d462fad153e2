#include "saftlab/saft.hpp"

#include <cmath>

#include "saftlab/fft.hpp"
#include "saftlab/parallel.hpp"

namespace saftlab {

namespace {

std::span<const double> as_span(const RVec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// f(x) lambda(x) exp(2 pi i p^T x): the integrand before the Fourier kernel.
std::vector<cplx> premodulate(const SaftParams& p, const GridFn& f) {
    std::vector<cplx> g(f.size());
    const RVec& shift = p.input_shift();
    parallel_for(f.size(), [&](std::size_t i) {
        const RVec x = f.spec.point(i);
        g[i] = f.values[i] * unit_phase(p.chirp_phase(as_span(x)) + kTwoPi * shift.dot(x));
    });
    return g;
}

void check_input(const SaftParams& p, const GridSpec& g) {
    g.check();
    if (g.n() != p.n()) throw StructuralError("grid dimension does not match the SAFT parameters");
}

} // namespace

Backend parse_backend(const std::string& name) {
    if (name == "quad" || name == "quadrature") return Backend::quadrature;
    if (name == "fast" || name == "chirp-dft" || name == "chirp_dft") return Backend::chirp_dft;
    throw StructuralError("unknown backend '" + name + "' (expected quad or fast)");
}

GridSpec default_output_grid(const SaftParams& p, const GridSpec& in) {
    check_input(p, in);
    std::vector<double> origin, spacing;
    for (std::size_t a = 0; a < in.shape.size(); ++a) {
        origin.push_back(dual_centered_origin(in.shape[a], in.spacing[a]));
        spacing.push_back(1.0 / (static_cast<double>(in.shape[a]) * in.spacing[a]));
    }
    const RMat frame = p.B() * in.frame.inverse().transpose();
    return GridSpec::over(frame, origin, spacing, in.shape);
}

int fast_path_sign(const SaftParams& p, const GridSpec& in, const GridSpec& out) {
    if (in.shape != out.shape || in.n() != p.n() || out.n() != p.n()) return 0;
    for (std::size_t a = 0; a < in.shape.size(); ++a) {
        const double want = 1.0 / (static_cast<double>(in.shape[a]) * in.spacing[a]);
        if (std::abs(out.spacing[a] - want) > 1e-9 * want) return 0;
    }
    const RMat K = in.frame.transpose() * p.B_inv() * out.frame;
    const RMat I = RMat::Identity(p.n(), p.n());
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    if ((K - I).cwiseAbs().maxCoeff() <= 1e-9 * scale) return 1;
    if ((K + I).cwiseAbs().maxCoeff() <= 1e-9 * scale) return -1;
    return 0;
}

SaftPlan make_plan(const SaftParams& p, const GridSpec& in, std::optional<GridSpec> out, Backend backend) {
    check_input(p, in);
    GridSpec o = out ? *out : default_output_grid(p, in);
    check_input(p, o);
    if (backend == Backend::chirp_dft && fast_path_sign(p, in, o) == 0)
        throw StructuralError(
            "chirp-DFT backend: output grid is not B times the DFT frequency grid of the input "
            "(need frame_out = +-B frame_in^{-T}, spacing 1/(N h), equal shapes)");
    return SaftPlan{p, in, std::move(o), backend};
}

cplx saft_kernel(const SaftParams& p, const RVec& t, const RVec& w) {
    const double phase = p.chirp_phase(as_span(t)) + p.modulation_phase(as_span(w)) +
                         kTwoPi * (p.input_shift().dot(t) - t.dot(p.B_inv() * w));
    return p.amplitude() * unit_phase(phase);
}

std::vector<RVec> grid_points(const GridSpec& g) {
    std::vector<RVec> pts(g.size());
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = g.point(i);
    return pts;
}

std::vector<cplx> saft_at(const SaftParams& p, const GridFn& f, const std::vector<RVec>& points) {
    check_input(p, f.spec);
    const std::size_t N = f.size();
    const double vol = f.spec.cell_volume();
    const RMat binv_t = p.B_inv().transpose();
    std::vector<RVec> y(N);   // B^{-T} x, so x^T B^{-1} w = y . w
    std::vector<double> base(N);
    for (std::size_t i = 0; i < N; ++i) {
        const RVec x = f.spec.point(i);
        y[i] = binv_t * x;
        base[i] = p.chirp_phase(as_span(x)) + kTwoPi * p.input_shift().dot(x);
    }
    std::vector<cplx> out(points.size());
    parallel_for(points.size(), [&](std::size_t j) {
        const RVec& w = points[j];
        if (w.size() != p.n()) throw StructuralError("saft_at: frequency has wrong dimension");
        cplx acc{};
        for (std::size_t i = 0; i < N; ++i) {
            if (f.values[i] == cplx{}) continue;
            acc += f.values[i] * unit_phase(base[i] - kTwoPi * y[i].dot(w));
        }
        out[j] = acc * vol * p.amplitude() * p.modulation(w);
    });
    return out;
}

GridFn saft_forward(const SaftPlan& plan, const GridFn& f) {
    const auto& p = plan.params;
    if (!f.spec.same_layout(plan.input, 1e-12)) throw StructuralError("saft_forward: input grid differs from the plan");
    if (plan.backend == Backend::quadrature) return GridFn(plan.output, saft_at(p, f, grid_points(plan.output)));

    const int s = fast_path_sign(p, plan.input, plan.output);
    if (s == 0) throw StructuralError("saft_forward: plan grids are incompatible with the chirp-DFT backend");
    const auto g = premodulate(p, f);
    auto values = fft::rect_dft(g, plan.input.shape, plan.input.origin, plan.input.spacing, plan.output.origin, -s);
    const double scale = std::abs(plan.input.frame.determinant()) * p.amplitude();
    parallel_for(values.size(), [&](std::size_t j) {
        const RVec w = plan.output.point(j);
        values[j] *= scale * p.modulation(w);
    });
    return GridFn(plan.output, std::move(values));
}

GridFn saft_inverse(const SaftPlan& plan, const GridFn& F) {
    if (!F.spec.same_layout(plan.output, 1e-12)) throw StructuralError("saft_inverse: input grid differs from the plan's output");
    const SaftPlan back{inverse_params(plan.params), plan.output, plan.input, plan.backend};
    if (back.backend == Backend::chirp_dft && fast_path_sign(back.params, back.input, back.output) == 0)
        throw StructuralError("saft_inverse: plan grids are incompatible with the chirp-DFT backend");
    return saft_forward(back, F);
}

std::vector<cplx> dtsaft_at(const SaftParams& p, const SeqFn& s, const std::vector<RVec>& points) {
    if (s.n() != p.n()) throw StructuralError("dtsaft: sequence dimension does not match the parameters");
    struct Term {
        RVec y;       // B^{-T} k
        cplx weight;  // s(k) lambda(k) exp(2 pi i p^T k)
    };
    std::vector<Term> terms;
    terms.reserve(s.support_size());
    const RMat binv_t = p.B_inv().transpose();
    for (const auto& [k, v] : s.entries()) {
        RVec x(p.n());
        for (int a = 0; a < p.n(); ++a) x[a] = static_cast<double>(k[static_cast<std::size_t>(a)]);
        terms.push_back({binv_t * x, v * unit_phase(p.chirp_phase(as_span(x)) + kTwoPi * p.input_shift().dot(x))});
    }
    std::vector<cplx> out(points.size());
    parallel_for(points.size(), [&](std::size_t j) {
        const RVec& w = points[j];
        cplx acc{};
        for (const auto& t : terms) acc += t.weight * unit_phase(-kTwoPi * t.y.dot(w));
        out[j] = acc * p.amplitude() * p.modulation(w);
    });
    return out;
}

GridFn dtsaft(const SaftParams& p, const SeqFn& s, const GridSpec& wgrid) {
    check_input(p, wgrid);
    return GridFn(wgrid, dtsaft_at(p, s, grid_points(wgrid)));
}

namespace {

std::vector<IntVec> cube_shell(int n, int lo, int hi) {
    // All integer vectors with lo <= |v|_inf <= hi.
    std::vector<IntVec> out;
    if (hi < 0 || lo > hi) return out;
    IntVec v(static_cast<std::size_t>(n), -hi);
    while (true) {
        std::int64_t m = 0;
        for (auto c : v) m = std::max<std::int64_t>(m, std::abs(c));
        if (m >= lo) out.push_back(v);
        int a = n - 1;
        while (a >= 0) {
            if (++v[static_cast<std::size_t>(a)] <= hi) break;
            v[static_cast<std::size_t>(a)] = -hi;
            --a;
        }
        if (a < 0) break;
    }
    return out;
}

RVec to_real(const IntVec& k) {
    RVec x(static_cast<Eigen::Index>(k.size()));
    for (std::size_t a = 0; a < k.size(); ++a) x[static_cast<Eigen::Index>(a)] = static_cast<double>(k[a]);
    return x;
}

// sum over n in the shell of conj(eta(base + step n)) S g(base + step n).
void periodized_sum(const SaftParams& p, const GridFn& g, const std::vector<RVec>& base, const RMat& step,
                    const std::vector<IntVec>& shell, std::vector<cplx>& acc, double& shell_max) {
    std::vector<RVec> pts;
    pts.reserve(base.size() * shell.size());
    for (const auto& w : base)
        for (const auto& n : shell) pts.push_back(w + step * to_real(n));
    const auto vals = saft_at(p, g, pts);
    shell_max = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        for (std::size_t s = 0; s < shell.size(); ++s) {
            const std::size_t idx = i * shell.size() + s;
            const cplx term = std::conj(p.modulation(pts[idx])) * vals[idx];
            acc[i] += term;
            shell_max = std::max(shell_max, std::abs(term));
        }
    }
}

} // namespace

PoissonReport poisson_check(const SaftParams& p, const GridFn& g, const std::vector<RVec>& w,
                            const TruncationPolicy& trunc) {
    check_input(p, g.spec);
    const int n = p.n();
    PoissonReport rep;

    // Integer samples g(k) straight from the grid.
    SeqFn samples(n);
    double gmax = 0.0, edge = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        gmax = std::max(gmax, std::abs(g.values[i]));
        const auto idx = g.spec.unflatten(i);
        for (std::size_t a = 0; a < idx.size(); ++a)
            if (idx[a] == 0 || idx[a] + 1 == g.spec.shape[a]) edge = std::max(edge, std::abs(g.values[i]));
        const RVec x = g.spec.point(i);
        IntVec k(static_cast<std::size_t>(n));
        bool integral = true;
        for (int a = 0; a < n && integral; ++a) {
            const double r = std::round(x[a]);
            integral = std::abs(x[a] - r) < 1e-9;
            k[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(r);
        }
        if (integral) samples.set(k, g.values[i]);
    }
    if (samples.empty() && gmax > 0.0) throw StructuralError("poisson_check: grid contains no integer points");
    rep.decay_warning = edge > 1e-12 * gmax;

    // |det B|^{-1/2} sum_k g(k) lambda(k) eta(w) e^{...}, times conj(eta(w)).
    rep.lhs = dtsaft_at(p, samples, w);
    for (std::size_t i = 0; i < w.size(); ++i) rep.lhs[i] *= std::conj(p.modulation(w[i]));

    std::vector<RVec> xi(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) xi[i] = p.B_inv() * w[i];
    const RMat I = RMat::Identity(n, n);

    rep.rhs.assign(w.size(), cplx{});
    rep.rhs_literal.assign(w.size(), cplx{});
    // The quadrature spectrum of g repeats with period 1/h in B^{-1} w - p, so
    // shells are kept inside the alias-free band.
    double reach = 0.0, hmax = 0.0;
    for (const auto& x : xi) reach = std::max(reach, (x - p.input_shift()).cwiseAbs().maxCoeff());
    for (double h : g.spec.spacing) hmax = std::max(hmax, h);
    const int alias_free = std::max(1, static_cast<int>(std::floor(0.5 / hmax - reach)) - 1);
    const int kmax = std::min(trunc.max, alias_free);
    int K = std::min(trunc.start, kmax);
    double smax = 0.0, lmax = 0.0;
    periodized_sum(p, g, w, p.B(), cube_shell(n, 0, K - 1), rep.rhs, smax);
    periodized_sum(p, g, xi, I, cube_shell(n, 0, K - 1), rep.rhs_literal, lmax);
    periodized_sum(p, g, w, p.B(), cube_shell(n, K, K), rep.rhs, smax);
    periodized_sum(p, g, xi, I, cube_shell(n, K, K), rep.rhs_literal, lmax);
    auto running = [](const std::vector<cplx>& v) {
        double m = 0.0;
        for (const auto& x : v) m = std::max(m, std::abs(x));
        return m;
    };
    // Growth is driven by the corrected sum; the literal one rides along.
    while (K < kmax && smax > trunc.rel_tol * running(rep.rhs)) {
        const int next = std::min(kmax, K + 4);
        periodized_sum(p, g, w, p.B(), cube_shell(n, K + 1, next - 1), rep.rhs, smax);
        periodized_sum(p, g, xi, I, cube_shell(n, K + 1, next - 1), rep.rhs_literal, lmax);
        periodized_sum(p, g, w, p.B(), cube_shell(n, next, next), rep.rhs, smax);
        periodized_sum(p, g, xi, I, cube_shell(n, next, next), rep.rhs_literal, lmax);
        K = next;
    }
    rep.K = K;
    for (std::size_t i = 0; i < w.size(); ++i) {
        rep.residual = std::max(rep.residual, std::abs(rep.lhs[i] - rep.rhs[i]));
        rep.literal_residual = std::max(rep.literal_residual, std::abs(rep.lhs[i] - rep.rhs_literal[i]));
    }
    return rep;
}

SeqFn downsample(const SamplingLattice& lat, const SeqFn& c) {
    if (c.n() != lat.n()) throw StructuralError("downsample: dimension mismatch");
    SeqFn out(lat.n());
    for (const auto& [k, v] : c.entries()) {
        const auto ci = decompose(lat, k, LatticeSide::MT);
        if (ci.j == 0) out.set(ci.r, v);
    }
    return out;
}

SeqFn downsample_chirped(const SaftParams& p, const SamplingLattice& lat, const SeqFn& c) {
    if (c.n() != lat.n() || p.n() != lat.n()) throw StructuralError("downsample: dimension mismatch");
    SeqFn out(lat.n());
    for (const auto& [k, v] : c.entries()) {
        const auto ci = decompose(lat, k, LatticeSide::MT);
        if (ci.j != 0) continue;
        const RVec x = to_real(k), r = to_real(ci.r);
        const double phase = p.chirp_phase(as_span(x)) - p.chirp_phase(as_span(r)) +
                             kTwoPi * p.input_shift().dot(x - r);
        out.set(ci.r, v * unit_phase(phase));
    }
    return out;
}

DownsamplingReport downsampling_check(const SaftParams& p, const SamplingLattice& lat, const SeqFn& c,
                                      const std::vector<RVec>& w) {
    if (p.n() != lat.n()) throw StructuralError("downsampling_check: dimension mismatch");
    const RMat BMinv = p.B() * lat.M_real().inverse();
    const auto m = static_cast<double>(lat.m);

    std::vector<RVec> u;
    u.reserve(w.size() * lat.gamma.size());
    for (const auto& x : w)
        for (const auto& g : lat.gamma) u.push_back(BMinv * (x + to_real(g)));
    const auto Su = dtsaft_at(p, c, u);

    std::vector<RVec> Bw(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) Bw[i] = p.B() * w[i];
    const auto general = dtsaft_at(p, downsample_chirped(p, lat, c), Bw);
    const auto literal = dtsaft_at(p, downsample(lat, c), w);

    DownsamplingReport rep;
    for (std::size_t i = 0; i < w.size(); ++i) {
        cplx lhs{};
        for (std::size_t v = 0; v < lat.gamma.size(); ++v) {
            const std::size_t idx = i * lat.gamma.size() + v;
            lhs += std::conj(p.modulation(u[idx])) * Su[idx];
        }
        const cplx rg = m * std::conj(p.modulation(Bw[i])) * general[i];
        const cplx rl = m * std::conj(p.modulation(w[i])) * literal[i];
        rep.scale = std::max(rep.scale, std::abs(lhs));
        rep.residual = std::max(rep.residual, std::abs(lhs - rg));
        rep.literal_residual = std::max(rep.literal_residual, std::abs(lhs - rl));
    }
    return rep;
}

} // namespace saftlab
