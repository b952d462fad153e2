#include "saftlab/sis.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "saftlab/parallel.hpp"
#include "saftlab/saft.hpp"

namespace saftlab {

namespace {

std::vector<IntVec> cube(int n, int K) {
    std::vector<IntVec> out;
    IntVec v(static_cast<std::size_t>(n), -K);
    while (true) {
        out.push_back(v);
        int a = n - 1;
        while (a >= 0) {
            if (++v[static_cast<std::size_t>(a)] <= K) break;
            v[static_cast<std::size_t>(a)] = -K;
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

// Representative of w modulo B Z^n nearest to the spectral centre B B^{-1}P; the
// truncated lattice sums are only accurate around it.
RVec centred(const SaftParams& p, const RVec& w) {
    RVec theta = p.B_inv() * w - p.input_shift();
    for (Eigen::Index a = 0; a < theta.size(); ++a) theta[a] -= std::round(theta[a]);
    return p.B() * (theta + p.input_shift());
}

double shell_margin(const SisModel& m) {
    const int n = m.params.n();
    double peak = 0.0, shell = 0.0;
    for (const auto& w0 : fundamental_points(m.params.B(), 4)) {
        const RVec w = centred(m.params, w0);
        for (const auto& k : cube(n, m.K)) {
            std::int64_t inf = 0;
            for (auto c : k) inf = std::max<std::int64_t>(inf, std::abs(c));
            const double v = std::abs(m.spectrum(w + m.params.B() * to_real(k)));
            peak = std::max(peak, v);
            if (inf == m.K) shell = std::max(shell, v);
        }
    }
    return peak > 0.0 ? shell / peak : 0.0;
}

void check_decay(SisModel& m, double tol) {
    m.decay_margin = shell_margin(m);
    if (m.decay_margin > tol)
        throw ValidationError("generator spectrum has not decayed on the truncation shell (relative size " +
                              std::to_string(m.decay_margin) + "); enlarge K or the grid");
}

} // namespace

SisModel make_sis_model(const SaftParams& p, const GridFn& phi, int K, double decay_tol) {
    if (phi.n() != p.n()) throw StructuralError("sis: generator dimension does not match the parameters");
    auto shared = std::make_shared<GridFn>(phi);
    SpectrumFn spec = [p, shared](const RVec& w) { return saft_at(p, *shared, {w})[0]; };
    SisModel m{p, phi, std::move(spec), K, 0.0};
    check_decay(m, decay_tol);
    return m;
}

SisModel make_sis_model(const SaftParams& p, SpectrumFn spectrum, std::optional<GridFn> phi, int K, double decay_tol) {
    if (phi && phi->n() != p.n()) throw StructuralError("sis: generator dimension does not match the parameters");
    SisModel m{p, std::move(phi), std::move(spectrum), K, 0.0};
    check_decay(m, decay_tol);
    return m;
}

GridFn synthesize(const SisModel& model, const SeqFn& s, std::optional<GridSpec> out) {
    if (!model.phi) throw StructuralError("synthesize: model has no sampled generator");
    return conv_sd(model.params, s, *model.phi, std::move(out));
}

GrammianValue grammian(const SisModel& model, const RVec& w0) {
    const RVec w = centred(model.params, w0);
    GrammianValue g;
    for (const auto& k : cube(model.params.n(), model.K)) {
        const double v = std::abs(model.spectrum(w + model.params.B() * to_real(k)));
        g.squared += v * v;
        g.unsquared += v;
    }
    return g;
}

std::vector<GrammianValue> grammian_at(const SisModel& model, const std::vector<RVec>& w) {
    std::vector<GrammianValue> out(w.size());
    parallel_for(w.size(), [&](std::size_t i) { out[i] = grammian(model, w[i]); });
    return out;
}

std::vector<RVec> fundamental_points(const RMat& B, std::size_t per_axis) {
    const auto n = B.rows();
    std::size_t total = 1;
    for (Eigen::Index a = 0; a < n; ++a) total *= per_axis;
    std::vector<RVec> pts(total);
    for (std::size_t i = 0; i < total; ++i) {
        RVec z(n);
        std::size_t rem = i;
        for (Eigen::Index a = n; a-- > 0;) {
            z[a] = static_cast<double>(rem % per_axis) / static_cast<double>(per_axis);
            rem /= per_axis;
        }
        pts[i] = B * z;
    }
    return pts;
}

RieszReport riesz_bounds(const SisModel& model, const std::vector<RVec>& wgrid, double threshold) {
    if (wgrid.empty()) throw StructuralError("riesz_bounds: empty frequency grid");
    const auto G = grammian_at(model, wgrid);
    RieszReport r;
    r.threshold = threshold;
    r.eta1 = G[0].squared;
    r.eta2 = G[0].squared;
    r.argmin = wgrid[0];
    for (std::size_t i = 1; i < G.size(); ++i) {
        if (G[i].squared < r.eta1) {
            r.eta1 = G[i].squared;
            r.argmin = wgrid[i];
        }
        r.eta2 = std::max(r.eta2, G[i].squared);
    }
    r.pass = r.eta1 > threshold;
    r.verdict = r.pass ? "pass" : "fail (lower bound vanishes)";
    return r;
}

FrameCheck frame_check(const SisModel& model, const std::vector<SeqFn>& seqs, const RieszReport& bounds,
                       const GridSpec& grid, double slack) {
    FrameCheck fc;
    fc.trials = seqs.size();
    fc.min_ratio = std::numeric_limits<double>::infinity();
    fc.max_ratio = 0.0;
    const auto plan = make_plan(model.params, grid);
    for (const auto& s : seqs) {
        const double s2 = s.norm2();
        if (s2 == 0.0) continue;
        const GridFn f = synthesize(model, s, grid);
        const GridFn F = saft_forward(plan, f);
        double e = 0.0;
        for (const auto& v : F.values) e += std::norm(v);
        e *= F.spec.cell_volume();
        const double ratio = e / s2;
        fc.min_ratio = std::min(fc.min_ratio, ratio);
        fc.max_ratio = std::max(fc.max_ratio, ratio);
        if (ratio < bounds.eta1 * (1.0 - slack) || ratio > bounds.eta2 * (1.0 + slack)) ++fc.violations;
    }
    return fc;
}

double parseval_residual(const SaftParams& p, const SeqFn& s, std::size_t per_axis) {
    const double s2 = s.norm2();
    auto pts = fundamental_points(p.B(), per_axis);
    // Shift to cell centres; each cell has volume |det B| / per_axis^n.
    RVec half = RVec::Constant(p.n(), 0.5 / static_cast<double>(per_axis));
    for (auto& w : pts) w += p.B() * half;
    const auto S = dtsaft_at(p, s, pts);
    double acc = 0.0;
    for (const auto& v : S) acc += std::norm(v);
    acc *= std::abs(p.det_b()) / static_cast<double>(pts.size());
    if (s2 == 0.0) return acc;
    return std::abs(acc - s2) / s2;
}

double wiener_norm(const GridFn& f, double p) {
    if (!(p >= 1.0)) throw StructuralError("wiener_norm: p must be at least 1");
    if (!f.spec.identity_frame()) throw StructuralError("wiener_norm: grid must have an identity frame");
    for (double h : f.spec.spacing)
        if (1.0 / h < 8.0 - 1e-9) throw StructuralError("wiener_norm: need at least 8 samples per unit cell");
    std::map<IntVec, double> cell_max;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const RVec x = f.spec.point(i);
        IntVec k(static_cast<std::size_t>(x.size()));
        for (Eigen::Index a = 0; a < x.size(); ++a) k[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(std::floor(x[a] + 1e-12));
        auto& m = cell_max[k];
        m = std::max(m, std::abs(f.values[i]));
    }
    double acc = 0.0;
    for (const auto& [k, m] : cell_max) acc += std::pow(m, p);
    return acc;
}

} // namespace saftlab
