#include "saftlab/dynsamp.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "saftlab/fft.hpp"
#include "saftlab/parallel.hpp"
#include "saftlab/saft.hpp"

namespace saftlab {

namespace {

std::span<const double> as_span(const RVec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

RVec to_real(const IntVec& k) {
    RVec x(static_cast<Eigen::Index>(k.size()));
    for (std::size_t a = 0; a < k.size(); ++a) x[static_cast<Eigen::Index>(a)] = static_cast<double>(k[a]);
    return x;
}

IntVec mt_times(const SamplingLattice& lat, const IntVec& k) { return compose(lat, k, 0, LatticeSide::MT); }

std::vector<std::size_t> cube_shape(int n, std::size_t W) { return std::vector<std::size_t>(static_cast<std::size_t>(n), W); }

std::size_t cube_size(int n, std::size_t W) {
    std::size_t t = 1;
    for (int a = 0; a < n; ++a) t *= W;
    return t;
}

// Multi-index of flat position q in [0, W)^n (row-major).
IntVec cube_index(int n, std::size_t W, std::size_t flat) {
    IntVec q(static_cast<std::size_t>(n));
    for (int a = n; a-- > 0;) {
        q[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(flat % W);
        flat /= W;
    }
    return q;
}

std::size_t wrap_index(const IntVec& k, std::size_t W) {
    std::size_t flat = 0;
    const auto w = static_cast<std::int64_t>(W);
    for (auto c : k) flat = flat * W + static_cast<std::size_t>(((c % w) + w) % w);
    return flat;
}

// sum_k c(k) exp(sign 2 pi i k^T q / W) for q in [0, W)^n: fold modulo W, then FFT.
std::vector<cplx> periodic_dft(std::vector<cplx> folded, int n, std::size_t W, int sign) {
    const auto shape = cube_shape(n, W);
    for (std::size_t a = 0; a < shape.size(); ++a)
        fft::for_each_line(folded, shape, a, [sign](std::span<cplx> l) { fft::transform(l, sign); });
    return folded;
}

void for_each_in_box(int n, std::int64_t R, const std::function<void(const IntVec&)>& fn) {
    IntVec x(static_cast<std::size_t>(n), -R);
    while (true) {
        fn(x);
        int a = n - 1;
        while (a >= 0) {
            if (++x[static_cast<std::size_t>(a)] <= R) break;
            x[static_cast<std::size_t>(a)] = -R;
            --a;
        }
        if (a < 0) break;
    }
}

std::int64_t grid_radius(const GridSpec& g) {
    double r = 0.0;
    for (std::size_t a = 0; a < g.shape.size(); ++a) {
        r = std::max(r, std::abs(g.coord(a, 0)));
        r = std::max(r, std::abs(g.coord(a, g.shape[a] - 1)));
    }
    return static_cast<std::int64_t>(std::ceil(r));
}

void require_integer_aligned(const GridSpec& g, const char* who) {
    if (!g.identity_frame()) throw StructuralError(std::string(who) + ": grids must have identity frames");
    for (std::size_t a = 0; a < g.shape.size(); ++a) {
        const double u = 1.0 / g.spacing[a];
        const double first = g.coord(a, 0) / g.spacing[a];
        if (std::abs(u - std::round(u)) > 1e-9 * u || std::abs(first - std::round(first)) > 1e-6)
            throw StructuralError(std::string(who) + ": grid points must include the integers (spacing 1/N, aligned origin)");
    }
}

cplx lookup(const GridFn& f, const IntVec& x) {
    const auto idx = f.spec.index_of(to_real(x), 1e-6);
    return idx ? f.values[*idx] : cplx{};
}

std::vector<GridFn> filter_chain(const SaftParams& p, const GridFn& base, const GridFn* a, int J, FilterKind kind) {
    if (J < 1) throw StructuralError("filter chain: J must be at least 1");
    if (J > 1 && a == nullptr) throw StructuralError("filter chain: J > 1 needs a filter");
    std::vector<GridFn> out{base};
    for (int j = 1; j < J; ++j) out.push_back(conv_cc(p, out.back(), *a, std::nullopt, kind));
    return out;
}

void check_square(const ChannelModel& ch, const char* who) {
    if (ch.J != static_cast<int>(ch.lat.m))
        throw StructuralError(std::string(who) + ": need J = m channels (got J = " + std::to_string(ch.J) +
                              ", m = " + std::to_string(ch.lat.m) + ")");
}

std::string format_point(const RVec& w) {
    std::ostringstream os;
    os << '(';
    for (Eigen::Index a = 0; a < w.size(); ++a) os << (a ? ", " : "") << w[a];
    os << ')';
    return os.str();
}

} // namespace

ChannelModel make_channel_model(const SaftParams& p, const GridFn& phi, const GridFn* a, const IMat& M, int J,
                                FilterKind kind, int K) {
    if (phi.n() != p.n()) throw StructuralError("channel model: generator dimension does not match the parameters");
    require_integer_aligned(phi.spec, "channel model");
    if (a) require_integer_aligned(a->spec, "channel model");
    auto chain = std::make_shared<std::vector<GridFn>>(filter_chain(p, phi, a, J, kind));
    ChannelModel ch{p, build_lattice(M), J, kind, {}, {}, 0, K};
    for (const auto& g : *chain) ch.radius = std::max(ch.radius, grid_radius(g.spec));
    ch.generator = [chain](int j, const IntVec& x) { return lookup((*chain)[static_cast<std::size_t>(j)], x); };
    ch.spectrum = [chain, p](int j, const std::vector<RVec>& w) {
        return saft_at(p, (*chain)[static_cast<std::size_t>(j)], w);
    };
    return ch;
}

MeasurementSet make_measurements(const SaftParams& p, const SamplingLattice& lat, std::vector<SeqFn> y) {
    MeasurementSet ms;
    for (const auto& yj : y) {
        if (yj.n() != lat.n()) throw StructuralError("measurements: dimension mismatch");
        SeqFn vj(lat.n());
        for (const auto& [k, val] : yj.entries()) {
            const RVec x = to_real(mt_times(lat, k));
            vj.set(k, val * p.chirp(x) * std::conj(p.chirp(to_real(k))));
            for (auto c : k) ms.window = std::max<std::int64_t>(ms.window, std::abs(c));
        }
        ms.v.push_back(std::move(vj));
    }
    ms.y = std::move(y);
    return ms;
}

MeasurementSet measure(const SisModel& model, const SeqFn& s, const GridFn* a, const IMat& M, int J, FilterKind kind) {
    const auto& p = model.params;
    if (!model.phi) throw StructuralError("measure: model has no sampled generator");
    require_integer_aligned(model.phi->spec, "measure");
    const auto lat = build_lattice(M);
    const GridFn f = synthesize(model, s);
    const auto chain = filter_chain(p, f, a, J, kind);
    const std::int64_t R = grid_radius(chain.back().spec);
    const RMat MTinv = lat.M_real().transpose().inverse();
    const auto window = static_cast<std::int64_t>(std::ceil(R * MTinv.cwiseAbs().rowwise().sum().maxCoeff())) + 1;
    std::vector<SeqFn> y(static_cast<std::size_t>(J), SeqFn(p.n()));
    for_each_in_box(p.n(), window, [&](const IntVec& k) {
        const IntVec x = mt_times(lat, k);
        for (int j = 0; j < J; ++j) y[static_cast<std::size_t>(j)].set(k, lookup(chain[static_cast<std::size_t>(j)], x));
    });
    auto ms = make_measurements(p, lat, std::move(y));
    ms.window = window;
    return ms;
}

MeasurementSet measure_channels(const ChannelModel& ch, const SeqFn& s, std::int64_t window) {
    const auto& p = ch.params;
    if (ch.kind == FilterKind::classical && p.chirp_matrix().cwiseAbs().maxCoeff() != 0.0)
        throw StructuralError("measure_channels: classical filters only factor through the generators when A = 0");
    std::vector<std::pair<IntVec, cplx>> terms;  // (n, lambda(n) s(n))
    for (const auto& [n, v] : s.entries()) terms.emplace_back(n, v * p.chirp(to_real(n)));
    std::vector<SeqFn> y(static_cast<std::size_t>(ch.J), SeqFn(p.n()));
    std::vector<IntVec> ks;
    for_each_in_box(p.n(), window, [&](const IntVec& k) { ks.push_back(k); });
    std::vector<std::vector<cplx>> vals(static_cast<std::size_t>(ch.J), std::vector<cplx>(ks.size()));
    parallel_for(ks.size(), [&](std::size_t i) {
        const IntVec x = mt_times(ch.lat, ks[i]);
        const RVec xr = to_real(x);
        for (int j = 0; j < ch.J; ++j) {
            cplx acc{};
            for (const auto& [n, w] : terms) {
                IntVec d(x.size());
                for (std::size_t a = 0; a < x.size(); ++a) d[a] = x[a] - n[a];
                acc += w * p.chirp(to_real(d)) * ch.generator(j, d);
            }
            vals[static_cast<std::size_t>(j)][i] = acc * p.amplitude() * std::conj(p.chirp(xr));
        }
    });
    for (int j = 0; j < ch.J; ++j)
        for (std::size_t i = 0; i < ks.size(); ++i) y[static_cast<std::size_t>(j)].set(ks[i], vals[static_cast<std::size_t>(j)][i]);
    auto ms = make_measurements(p, ch.lat, std::move(y));
    ms.window = window;
    return ms;
}

SeqFn chirped_generator_samples(const ChannelModel& ch, int j, std::size_t l) {
    if (j < 0 || j >= ch.J || l >= ch.lat.eta.size()) throw StructuralError("generator samples: index out of range");
    SeqFn out(ch.params.n());
    for_each_in_box(ch.params.n(), ch.radius, [&](const IntVec& x) {
        IntVec neg(x.size());
        for (std::size_t a = 0; a < x.size(); ++a) neg[a] = -x[a];
        const auto ci = decompose(ch.lat, neg, LatticeSide::MT);  // -x = M^T r + eta_l
        if (ci.j != l) return;
        const cplx v = ch.generator(j, x) * ch.params.chirp(to_real(x));
        if (std::abs(v) < 1e-14) return;
        IntVec q(ci.r.size());
        for (std::size_t a = 0; a < q.size(); ++a) q[a] = -ci.r[a];
        out.set(q, v);
    });
    return out;
}

MatrixField build_B(const ChannelModel& ch, std::size_t W) {
    const auto& p = ch.params;
    const int n = p.n();
    const std::size_t m = ch.lat.eta.size();
    const std::size_t Q = cube_size(n, W);
    MatrixField field{"B", {}, std::vector<CMat>(Q, CMat::Zero(ch.J, static_cast<Eigen::Index>(m))), cube_shape(n, W)};
    for (std::size_t q = 0; q < Q; ++q)
        field.points.push_back(p.B() * (to_real(cube_index(n, W, q)) / static_cast<double>(W) + p.input_shift()));

    // Lattice decomposition of every sample position, shared by all channels.
    std::vector<IntVec> xs;
    for_each_in_box(n, ch.radius, [&](const IntVec& x) { xs.push_back(x); });
    std::vector<std::size_t> coset(xs.size()), slot(xs.size());
    std::vector<cplx> chirp(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        IntVec neg(xs[i].size());
        for (std::size_t a = 0; a < neg.size(); ++a) neg[a] = -xs[i][a];
        const auto ci = decompose(ch.lat, neg, LatticeSide::MT);
        IntVec q(ci.r.size());
        for (std::size_t a = 0; a < q.size(); ++a) q[a] = -ci.r[a];
        coset[i] = ci.j;
        slot[i] = wrap_index(q, W);
        chirp[i] = p.chirp(to_real(xs[i]));
    }
    for (int j = 0; j < ch.J; ++j) {
        std::vector<cplx> samples(xs.size());
        parallel_for(xs.size(), [&](std::size_t i) { samples[i] = ch.generator(j, xs[i]) * chirp[i]; });
        std::vector<std::vector<cplx>> folded(m, std::vector<cplx>(Q));
        for (std::size_t i = 0; i < xs.size(); ++i) folded[coset[i]][slot[i]] += samples[i];
        for (std::size_t l = 0; l < m; ++l) {
            const auto F = periodic_dft(std::move(folded[l]), n, W, -1);
            for (std::size_t q = 0; q < Q; ++q) field.entries[q](j, static_cast<Eigen::Index>(l)) = p.amplitude() * F[q];
        }
    }
    return field;
}

MatrixField build_D(const ChannelModel& ch, std::size_t W) {
    const auto& p = ch.params;
    const int n = p.n();
    const std::size_t m = ch.lat.gamma.size();
    const std::size_t Q = cube_size(n, W);
    const RMat Minv = ch.lat.M_real().inverse();
    MatrixField field{"D", {}, std::vector<CMat>(Q, CMat::Zero(ch.J, static_cast<Eigen::Index>(m))), cube_shape(n, W)};
    std::vector<IntVec> shifts;
    for_each_in_box(n, ch.K, [&](const IntVec& s) { shifts.push_back(s); });

    std::vector<RVec> pts;
    pts.reserve(Q * m * shifts.size());
    for (std::size_t q = 0; q < Q; ++q) {
        const RVec theta = to_real(cube_index(n, W, q)) / static_cast<double>(W);
        field.points.push_back(theta);
        for (std::size_t v = 0; v < m; ++v) {
            const RVec x = Minv * (theta + to_real(ch.lat.gamma[v]));
            for (const auto& s : shifts) pts.push_back(p.B() * (x + to_real(s)));
        }
    }
    std::vector<cplx> weight(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { weight[i] = std::conj(p.modulation(pts[i])); });
    const double root = std::sqrt(std::abs(p.det_b()));
    for (int j = 0; j < ch.J; ++j) {
        const auto S = ch.spectrum(j, pts);
        parallel_for(Q, [&](std::size_t q) {
            for (std::size_t v = 0; v < m; ++v) {
                cplx acc{};
                const std::size_t base = (q * m + v) * shifts.size();
                for (std::size_t s = 0; s < shifts.size(); ++s) acc += weight[base + s] * S[base + s];
                field.entries[q](j, static_cast<Eigen::Index>(v)) = root * acc;
            }
        });
    }
    return field;
}

std::vector<CVec> continuous_data(const ChannelModel& ch, const MeasurementSet& ms, std::size_t W) {
    const auto& p = ch.params;
    const int n = p.n();
    const std::size_t Q = cube_size(n, W);
    const int J = static_cast<int>(ms.y.size());
    std::vector<CVec> out(Q, CVec::Zero(J));
    for (int j = 0; j < J; ++j) {
        std::vector<cplx> folded(Q);
        for (const auto& [k, val] : ms.y[static_cast<std::size_t>(j)].entries()) {
            const RVec x = to_real(mt_times(ch.lat, k));
            folded[wrap_index(k, W)] += val * unit_phase(p.chirp_phase(as_span(x)) + kTwoPi * p.input_shift().dot(x));
        }
        const auto H = periodic_dft(std::move(folded), n, W, -1);
        for (std::size_t q = 0; q < Q; ++q) out[q][j] = static_cast<double>(ch.lat.m) * H[q];
    }
    return out;
}

StabilityReport stability_report(const MatrixField& field, const StabilityOptions& opt) {
    StabilityReport r;
    if (field.entries.empty()) throw StructuralError("stability_report: empty field");
    r.min_abs_det = std::numeric_limits<double>::infinity();
    r.min_hadamard = std::numeric_limits<double>::infinity();
    bool det_ok = true;
    for (std::size_t i = 0; i < field.entries.size(); ++i) {
        const CMat& A = field.entries[i];
        if (A.rows() != A.cols()) throw StructuralError("stability_report: field matrices must be square");
        const double det = std::abs(A.determinant());
        double rows = 1.0;
        for (Eigen::Index k = 0; k < A.rows(); ++k) rows *= A.row(k).norm();
        const double had = rows > 0.0 ? det / rows : 0.0;
        Eigen::JacobiSVD<CMat> svd(A);
        const auto& sv = svd.singularValues();
        const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
        if (det < r.min_abs_det) {
            r.min_abs_det = det;
            r.argmin = field.points[i];
        }
        r.min_hadamard = std::min(r.min_hadamard, had);
        r.max_cond = std::max(r.max_cond, cond);
        if (!(det > opt.det_rel * rows) || rows == 0.0) det_ok = false;
    }
    r.pass = det_ok && r.max_cond < opt.cond_max;
    if (r.pass) {
        r.verdict = "pass";
    } else {
        std::ostringstream os;
        os << "fail: ";
        if (!det_ok) os << "determinant vanishes (min |det| = " << r.min_abs_det << " at " << format_point(r.argmin) << ")";
        else os << "condition number " << r.max_cond << " exceeds " << opt.cond_max;
        r.verdict = os.str();
    }
    return r;
}

double max_det_jump(const MatrixField& field) {
    std::vector<double> det(field.entries.size());
    for (std::size_t i = 0; i < det.size(); ++i) det[i] = std::abs(field.entries[i].determinant());
    const auto& shape = field.shape;
    double jump = 0.0;
    std::size_t stride = 1;
    for (std::size_t a = shape.size(); a-- > 0;) {
        for (std::size_t i = 0; i < det.size(); ++i) {
            const std::size_t k = (i / stride) % shape[a];
            if (k + 1 < shape[a]) jump = std::max(jump, std::abs(det[i + stride] - det[i]));
        }
        stride *= shape[a];
    }
    return jump;
}

std::vector<IntVec> recovery_indices(const SamplingLattice& lat, std::size_t W) {
    const int n = lat.n();
    const auto lo = -static_cast<std::int64_t>(W / 2);
    std::vector<IntVec> out;
    const std::size_t Q = cube_size(n, W);
    for (std::size_t l = 0; l < lat.eta.size(); ++l) {
        for (std::size_t q = 0; q < Q; ++q) {
            IntVec r = cube_index(n, W, q);
            for (auto& c : r) c += lo;
            out.push_back(compose(lat, r, l, LatticeSide::MT));
        }
    }
    return out;
}

std::vector<SeqFn> rechirped_split(const SaftParams& p, const SamplingLattice& lat, const SeqFn& s) {
    auto parts = split_sequence(lat, s);
    for (std::size_t l = 0; l < parts.size(); ++l) {
        SeqFn out(lat.n());
        for (const auto& [r, v] : parts[l].entries()) {
            const RVec k = to_real(compose(lat, r, l, LatticeSide::MT));
            out.set(r, v * p.chirp(k) * std::conj(p.chirp(to_real(r))));
        }
        parts[l] = std::move(out);
    }
    return parts;
}

namespace {

Recovery finish(const MatrixField& field, const std::vector<CVec>& rhs, const StabilityOptions& opt,
                std::vector<CVec>& sol) {
    Recovery rec;
    rec.stability = stability_report(field, opt);
    if (!rec.stability.pass) throw ValidationError("recovery refused, channel field " + field.label + " " + rec.stability.verdict);
    sol.assign(rhs.size(), CVec());
    std::vector<double> res(rhs.size());
    parallel_for(rhs.size(), [&](std::size_t q) {
        Eigen::PartialPivLU<CMat> lu(field.entries[q]);
        sol[q] = lu.solve(rhs[q]);
        res[q] = (field.entries[q] * sol[q] - rhs[q]).cwiseAbs().maxCoeff();
    });
    for (double r : res) rec.max_solve_residual = std::max(rec.max_solve_residual, r);
    return rec;
}

} // namespace

Recovery recover_discrete(const ChannelModel& ch, const MeasurementSet& ms, std::size_t W, const StabilityOptions& opt) {
    check_square(ch, "recover_discrete");
    if (static_cast<int>(ms.y.size()) != ch.J) throw StructuralError("recover_discrete: measurement levels differ from J");
    const auto& p = ch.params;
    const int n = p.n();
    const std::size_t Q = cube_size(n, W);
    const std::size_t m = ch.lat.eta.size();

    // hat V_j(q) = sum_k y_j(k) lambda(M^T k) exp(-2 pi i k^T q / W)
    std::vector<CVec> rhs(Q, CVec::Zero(ch.J));
    for (int j = 0; j < ch.J; ++j) {
        std::vector<cplx> folded(Q);
        for (const auto& [k, val] : ms.y[static_cast<std::size_t>(j)].entries())
            folded[wrap_index(k, W)] += val * p.chirp(to_real(mt_times(ch.lat, k)));
        const auto V = periodic_dft(std::move(folded), n, W, -1);
        for (std::size_t q = 0; q < Q; ++q) rhs[q][j] = V[q];
    }
    const MatrixField field = build_B(ch, W);
    std::vector<CVec> sol;
    Recovery rec = finish(field, rhs, opt, sol);

    rec.s = SeqFn(n);
    const auto lo = -static_cast<std::int64_t>(W / 2);
    for (std::size_t l = 0; l < m; ++l) {
        std::vector<cplx> spec(Q);
        for (std::size_t q = 0; q < Q; ++q) spec[q] = sol[q][static_cast<Eigen::Index>(l)];
        const auto sigma = periodic_dft(std::move(spec), n, W, +1);
        for (std::size_t q = 0; q < Q; ++q) {
            IntVec r = cube_index(n, W, q);
            for (auto& c : r) c += lo;
            const IntVec k = compose(ch.lat, r, l, LatticeSide::MT);
            const cplx val = sigma[wrap_index(r, W)] / static_cast<double>(Q);
            rec.s.set(k, val * std::conj(p.chirp(to_real(k))));
        }
    }
    return rec;
}

Recovery recover_continuous(const ChannelModel& ch, const MeasurementSet& ms, std::size_t W, const StabilityOptions& opt) {
    check_square(ch, "recover_continuous");
    if (static_cast<int>(ms.y.size()) != ch.J) throw StructuralError("recover_continuous: measurement levels differ from J");
    const auto& p = ch.params;
    const int n = p.n();
    const std::size_t m = ch.lat.gamma.size();
    const RMat Minv = ch.lat.M_real().inverse();

    const auto rhs = continuous_data(ch, ms, W);
    const MatrixField field = build_D(ch, W);
    std::vector<CVec> sol;
    Recovery rec = finish(field, rhs, opt, sol);

    // Us(n) = (1 / (m W^n)) sum_{q,v} (C_v(q) / beta) exp(2 pi i n^T theta_{q,v}).
    std::vector<RVec> theta;
    std::vector<cplx> coef;
    for (std::size_t q = 0; q < field.points.size(); ++q) {
        for (std::size_t v = 0; v < m; ++v) {
            theta.push_back(Minv * (field.points[q] + to_real(ch.lat.gamma[v])));
            coef.push_back(sol[q][static_cast<Eigen::Index>(v)] / p.amplitude());
        }
    }
    const auto idx = recovery_indices(ch.lat, W);
    std::vector<cplx> vals(idx.size());
    const double norm = 1.0 / static_cast<double>(theta.size());
    parallel_for(idx.size(), [&](std::size_t i) {
        const RVec k = to_real(idx[i]);
        cplx acc{};
        for (std::size_t t = 0; t < theta.size(); ++t) acc += coef[t] * unit_phase(kTwoPi * k.dot(theta[t]));
        vals[i] = acc * norm * std::conj(p.chirp(k)) * unit_phase(-kTwoPi * p.input_shift().dot(k));
    });
    rec.s = SeqFn(n);
    for (std::size_t i = 0; i < idx.size(); ++i) rec.s.set(idx[i], vals[i]);
    return rec;
}

Residual v_chain_residual(const ChannelModel& ch, const SeqFn& s, const MeasurementSet& ms) {
    const auto& p = ch.params;
    const auto parts = rechirped_split(p, ch.lat, s);
    std::vector<cplx> lhs, rhs;
    for (int j = 0; j < static_cast<int>(ms.v.size()); ++j) {
        SeqFn h(p.n());
        for (std::size_t l = 0; l < parts.size(); ++l) {
            if (parts[l].empty()) continue;
            SeqFn g(p.n());
            const SeqFn phi_l = chirped_generator_samples(ch, j, l);
            for (const auto& [q, v] : phi_l.entries()) g.set(q, v * std::conj(p.chirp(to_real(q))));
            const SeqFn term = conv_dd(p, parts[l], g);
            for (const auto& [k, v] : term.entries()) h.add(k, v);
        }
        const auto& vj = ms.v[static_cast<std::size_t>(j)];
        for_each_in_box(p.n(), ms.window, [&](const IntVec& k) {
            lhs.push_back(vj(k));
            rhs.push_back(h(k));
        });
    }
    return compare(lhs, rhs);
}

Residual b_system_residual(const ChannelModel& ch, const SeqFn& s, const MeasurementSet& ms, std::size_t W) {
    const auto field = build_B(ch, W);
    const auto parts = rechirped_split(ch.params, ch.lat, s);
    std::vector<std::vector<cplx>> Ss;
    for (const auto& part : parts) Ss.push_back(dtsaft_at(ch.params, part, field.points));
    std::vector<cplx> lhs, rhs;
    for (std::size_t j = 0; j < ms.v.size(); ++j) {
        const auto Sv = dtsaft_at(ch.params, ms.v[j], field.points);
        for (std::size_t q = 0; q < field.points.size(); ++q) {
            cplx acc{};
            for (std::size_t l = 0; l < parts.size(); ++l) acc += field.entries[q](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) * Ss[l][q];
            lhs.push_back(Sv[q]);
            rhs.push_back(acc);
        }
    }
    return compare(lhs, rhs);
}

Residual d_system_residual(const ChannelModel& ch, const SeqFn& s, const MeasurementSet& ms, std::size_t W) {
    const auto& p = ch.params;
    const auto field = build_D(ch, W);
    const auto data = continuous_data(ch, ms, W);
    const RMat BMinv = p.B() * ch.lat.M_real().inverse();
    const std::size_t m = ch.lat.gamma.size();
    std::vector<RVec> wv;
    for (const auto& theta : field.points)
        for (std::size_t v = 0; v < m; ++v) wv.push_back(BMinv * (theta + to_real(ch.lat.gamma[v])));
    const auto Ss = dtsaft_at(p, s, wv);
    std::vector<cplx> lhs, rhs;
    for (std::size_t q = 0; q < field.points.size(); ++q) {
        CVec C(static_cast<Eigen::Index>(m));
        for (std::size_t v = 0; v < m; ++v) C[static_cast<Eigen::Index>(v)] = std::conj(p.modulation(wv[q * m + v])) * Ss[q * m + v];
        const CVec DC = field.entries[q] * C;
        for (Eigen::Index j = 0; j < DC.size(); ++j) {
            lhs.push_back(data[q][j]);
            rhs.push_back(DC[j]);
        }
    }
    return compare(lhs, rhs);
}

double seq_rel_error(const SeqFn& got, const SeqFn& want) {
    double num = 0.0;
    for (const auto& [k, v] : got.entries()) num += std::norm(v - want(k));
    for (const auto& [k, v] : want.entries())
        if (got(k) == cplx{}) num += std::norm(v);
    const double den = want.norm2();
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

} // namespace saftlab
