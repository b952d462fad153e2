#include "saftlab/conv.hpp"

#include <cmath>

#include "saftlab/fft.hpp"
#include "saftlab/parallel.hpp"
#include "saftlab/saft.hpp"

namespace saftlab {

namespace {

RVec to_real(const IntVec& k) {
    RVec x(static_cast<Eigen::Index>(k.size()));
    for (std::size_t a = 0; a < k.size(); ++a) x[static_cast<Eigen::Index>(a)] = static_cast<double>(k[a]);
    return x;
}

void require_plain(const GridSpec& g, const char* who) {
    if (!g.identity_frame()) throw StructuralError(std::string(who) + ": grids must have identity frames");
}

void require_same_spacing(const GridSpec& a, const GridSpec& b, const char* who) {
    if (a.n() != b.n()) throw StructuralError(std::string(who) + ": dimension mismatch");
    for (std::size_t i = 0; i < a.spacing.size(); ++i)
        if (std::abs(a.spacing[i] - b.spacing[i]) > 1e-12 * a.spacing[i])
            throw StructuralError(std::string(who) + ": grids must share the same spacing");
}

// Integer offset (b.origin - a.origin) / h per axis; throws if not integral.
std::vector<std::int64_t> lattice_offset(const GridSpec& a, const GridSpec& b, const char* who) {
    std::vector<std::int64_t> d(a.shape.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double x = (b.origin[i] - a.origin[i]) / a.spacing[i];
        const double r = std::round(x);
        if (std::abs(x - r) > 1e-6) throw StructuralError(std::string(who) + ": target grid is not on the source lattice");
        d[i] = static_cast<std::int64_t>(r);
    }
    return d;
}

std::vector<cplx> chirped(const SaftParams& p, const GridFn& f, FilterKind kind) {
    if (kind == FilterKind::classical) return f.values;
    std::vector<cplx> out(f.size());
    parallel_for(f.size(), [&](std::size_t i) {
        const RVec x = f.spec.point(i);
        out[i] = f.values[i] * p.chirp(x);
    });
    return out;
}

// Linear convolution of two row-major arrays via zero-padded FFTs.
std::vector<cplx> linear_convolve(const std::vector<cplx>& a, const std::vector<std::size_t>& sa,
                                  const std::vector<cplx>& b, const std::vector<std::size_t>& sb,
                                  std::vector<std::size_t>& shape_out) {
    const std::size_t d = sa.size();
    std::vector<std::size_t> pad(d);
    shape_out.resize(d);
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) {
        shape_out[i] = sa[i] + sb[i] - 1;
        pad[i] = fft::next_pow2(shape_out[i]);
        total *= pad[i];
    }
    auto embed = [&](const std::vector<cplx>& src, const std::vector<std::size_t>& s) {
        std::vector<cplx> buf(total);
        std::vector<std::size_t> idx(d, 0);
        for (std::size_t flat = 0; flat < src.size(); ++flat) {
            std::size_t rem = flat, pos = 0;
            for (std::size_t i = d; i-- > 0;) {
                idx[i] = rem % s[i];
                rem /= s[i];
            }
            for (std::size_t i = 0; i < d; ++i) pos = pos * pad[i] + idx[i];
            buf[pos] = src[flat];
        }
        return buf;
    };
    auto A = embed(a, sa);
    auto B = embed(b, sb);
    for (std::size_t ax = 0; ax < d; ++ax) {
        fft::for_each_line(A, pad, ax, [](std::span<cplx> l) { fft::transform(l, -1); });
        fft::for_each_line(B, pad, ax, [](std::span<cplx> l) { fft::transform(l, -1); });
    }
    for (std::size_t i = 0; i < total; ++i) A[i] *= B[i];
    for (std::size_t ax = 0; ax < d; ++ax)
        fft::for_each_line(A, pad, ax, [](std::span<cplx> l) { fft::transform(l, 1); });
    std::size_t count = 1;
    for (auto s : shape_out) count *= s;
    std::vector<cplx> out(count);
    const double inv = 1.0 / static_cast<double>(total);
    std::vector<std::size_t> idx(d);
    for (std::size_t flat = 0; flat < count; ++flat) {
        std::size_t rem = flat, pos = 0;
        for (std::size_t i = d; i-- > 0;) {
            idx[i] = rem % shape_out[i];
            rem /= shape_out[i];
        }
        for (std::size_t i = 0; i < d; ++i) pos = pos * pad[i] + idx[i];
        out[flat] = A[pos] * inv;
    }
    return out;
}

} // namespace

FilterKind parse_filter_kind(const std::string& name) {
    if (name == "chirped" || name == "saft") return FilterKind::chirped;
    if (name == "classical") return FilterKind::classical;
    throw StructuralError("unknown filter kind '" + name + "' (expected chirped or classical)");
}

GridFn restrict_to(const GridFn& f, const GridSpec& target) {
    require_plain(f.spec, "restrict");
    require_plain(target, "restrict");
    require_same_spacing(f.spec, target, "restrict");
    const auto off = lattice_offset(f.spec, target, "restrict");
    GridFn out(target);
    const std::size_t d = target.shape.size();
    parallel_for(out.size(), [&](std::size_t i) {
        const auto idx = target.unflatten(i);
        std::size_t pos = 0;
        for (std::size_t a = 0; a < d; ++a) {
            const auto j = static_cast<std::int64_t>(idx[a]) + off[a];
            if (j < 0 || j >= static_cast<std::int64_t>(f.spec.shape[a])) return;
            pos = pos * f.spec.shape[a] + static_cast<std::size_t>(j);
        }
        out.values[i] = f.values[pos];
    });
    return out;
}

GridFn conv_cc(const SaftParams& p, const GridFn& f, const GridFn& g, std::optional<GridSpec> out, FilterKind kind) {
    require_plain(f.spec, "conv_cc");
    require_plain(g.spec, "conv_cc");
    require_same_spacing(f.spec, g.spec, "conv_cc");
    if (f.n() != p.n()) throw StructuralError("conv_cc: grid dimension does not match the parameters");

    std::vector<std::size_t> shape;
    auto values = linear_convolve(chirped(p, f, kind), f.spec.shape, chirped(p, g, kind), g.spec.shape, shape);
    std::vector<double> origin(shape.size());
    double cell = 1.0;
    for (std::size_t a = 0; a < shape.size(); ++a) {
        origin[a] = f.spec.origin[a] + g.spec.origin[a] + 0.5 * f.spec.spacing[a];
        cell *= f.spec.spacing[a];
    }
    GridFn full(GridSpec::over(f.spec.frame, origin, f.spec.spacing, shape), std::move(values));
    const double scale = kind == FilterKind::chirped ? cell * p.amplitude() : cell;
    parallel_for(full.size(), [&](std::size_t i) {
        if (kind == FilterKind::chirped) {
            const RVec t = full.spec.point(i);
            full.values[i] *= scale * std::conj(p.chirp(t));
        } else {
            full.values[i] *= scale;
        }
    });
    if (!out) return full;
    return restrict_to(full, *out);
}

GridFn conv_sd(const SaftParams& p, const SeqFn& s, const GridFn& phi, std::optional<GridSpec> out, FilterKind kind) {
    require_plain(phi.spec, "conv_sd");
    const std::size_t d = phi.spec.shape.size();
    if (s.n() != static_cast<int>(d) || p.n() != static_cast<int>(d))
        throw StructuralError("conv_sd: dimension mismatch");
    std::vector<std::int64_t> per_unit(d);
    for (std::size_t a = 0; a < d; ++a) {
        const double u = 1.0 / phi.spec.spacing[a];
        per_unit[a] = std::llround(u);
        if (per_unit[a] < 1 || std::abs(u - static_cast<double>(per_unit[a])) > 1e-9 * u)
            throw StructuralError("conv_sd: grid spacing must divide 1 so integer shifts land on grid points");
    }

    GridSpec target;
    if (out) {
        target = *out;
        require_plain(target, "conv_sd");
        require_same_spacing(phi.spec, target, "conv_sd");
    } else {
        IntVec lo(d, 0), hi(d, 0);
        bool first = true;
        for (const auto& [k, v] : s.entries()) {
            for (std::size_t a = 0; a < d; ++a) {
                lo[a] = first ? k[a] : std::min(lo[a], k[a]);
                hi[a] = first ? k[a] : std::max(hi[a], k[a]);
            }
            first = false;
        }
        std::vector<double> origin(d);
        std::vector<std::size_t> shape(d);
        for (std::size_t a = 0; a < d; ++a) {
            origin[a] = phi.spec.origin[a] + static_cast<double>(lo[a]);
            shape[a] = phi.spec.shape[a] + static_cast<std::size_t>((hi[a] - lo[a]) * per_unit[a]);
        }
        target = GridSpec::over(phi.spec.frame, origin, phi.spec.spacing, shape);
    }
    const auto off = lattice_offset(phi.spec, target, "conv_sd");

    struct Shift {
        std::vector<std::int64_t> idx;  // index shift k / h
        RVec k;
        cplx weight;                    // lambda(k) s(k)
    };
    std::vector<Shift> shifts;
    for (const auto& [k, v] : s.entries()) {
        Shift sh{std::vector<std::int64_t>(d), to_real(k), v};
        for (std::size_t a = 0; a < d; ++a) sh.idx[a] = k[a] * per_unit[a];
        if (kind == FilterKind::chirped) sh.weight *= p.chirp(sh.k);
        shifts.push_back(std::move(sh));
    }

    GridFn h(target);
    parallel_for(h.size(), [&](std::size_t i) {
        const auto idx = target.unflatten(i);
        const RVec t = target.point(i);
        cplx acc{};
        for (const auto& sh : shifts) {
            std::size_t pos = 0;
            bool inside = true;
            for (std::size_t a = 0; a < d && inside; ++a) {
                const auto j = static_cast<std::int64_t>(idx[a]) + off[a] - sh.idx[a];
                inside = j >= 0 && j < static_cast<std::int64_t>(phi.spec.shape[a]);
                pos = pos * phi.spec.shape[a] + static_cast<std::size_t>(std::max<std::int64_t>(j, 0));
            }
            if (!inside) continue;
            cplx term = sh.weight * phi.values[pos];
            if (kind == FilterKind::chirped) {
                const RVec x = t - sh.k;
                term *= p.chirp(x);
            }
            acc += term;
        }
        if (kind == FilterKind::chirped) acc *= p.amplitude() * std::conj(p.chirp(t));
        h.values[i] = acc;
    });
    return h;
}

SeqFn conv_dd(const SaftParams& p, const SeqFn& s, const SeqFn& c) {
    if (s.n() != p.n() || c.n() != p.n()) throw StructuralError("conv_dd: dimension mismatch");
    // Accumulate in a map first so cancellations do not disturb the support.
    std::map<IntVec, cplx> acc;
    for (const auto& [k, a] : s.entries()) {
        const cplx sa = a * p.chirp(to_real(k));
        for (const auto& [j, b] : c.entries()) {
            IntVec l(k.size());
            for (std::size_t i = 0; i < k.size(); ++i) l[i] = k[i] + j[i];
            acc[l] += sa * b * p.chirp(to_real(j));
        }
    }
    SeqFn h(p.n());
    for (const auto& [l, v] : acc) h.set(l, v * p.amplitude() * std::conj(p.chirp(to_real(l))));
    return h;
}

GridFn conv_power(const SaftParams& p, const GridFn& a, int j, std::optional<GridSpec> out, FilterKind kind) {
    if (j < 1) throw StructuralError("conv_power: j must be at least 1 (the j = 0 level is the identity action)");
    GridFn acc = a;
    for (int i = 1; i < j; ++i) acc = conv_cc(p, acc, a, std::nullopt, kind);
    if (!out) return acc;
    return restrict_to(acc, *out);
}

Residual compare(const std::vector<cplx>& lhs, const std::vector<cplx>& rhs) {
    if (lhs.size() != rhs.size()) throw StructuralError("compare: length mismatch");
    Residual r;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        const double e = std::abs(lhs[i] - rhs[i]);
        num += e * e;
        den += std::norm(rhs[i]);
        r.sup = std::max(r.sup, e);
        r.scale = std::max(r.scale, std::abs(rhs[i]));
    }
    r.rel = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    return r;
}

Residual cc_theorem_residual(const SaftParams& p, const GridFn& f, const GridFn& g, const std::vector<RVec>& w) {
    const auto lhs = saft_at(p, conv_cc(p, f, g), w);
    const auto Sf = saft_at(p, f, w);
    const auto Sg = saft_at(p, g, w);
    std::vector<cplx> rhs(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) rhs[i] = std::conj(p.modulation(w[i])) * Sf[i] * Sg[i];
    return compare(lhs, rhs);
}

Residual sd_theorem_residual(const SaftParams& p, const SeqFn& s, const GridFn& phi, const std::vector<RVec>& w) {
    const auto lhs = saft_at(p, conv_sd(p, s, phi), w);
    const auto Ss = dtsaft_at(p, s, w);
    const auto Sphi = saft_at(p, phi, w);
    std::vector<cplx> rhs(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) rhs[i] = std::conj(p.modulation(w[i])) * Ss[i] * Sphi[i];
    return compare(lhs, rhs);
}

Residual dd_theorem_residual(const SaftParams& p, const SeqFn& s, const SeqFn& c, const std::vector<RVec>& w) {
    const auto lhs = dtsaft_at(p, conv_dd(p, s, c), w);
    const auto Ss = dtsaft_at(p, s, w);
    const auto Sc = dtsaft_at(p, c, w);
    std::vector<cplx> rhs(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) rhs[i] = std::conj(p.modulation(w[i])) * Ss[i] * Sc[i];
    return compare(lhs, rhs);
}

Residual power_theorem_residual(const SaftParams& p, const GridFn& a, int j, const std::vector<RVec>& w) {
    const auto lhs = saft_at(p, conv_power(p, a, j), w);
    const auto Sa = saft_at(p, a, w);
    std::vector<cplx> rhs(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        rhs[i] = std::pow(std::conj(p.modulation(w[i])), j - 1) * std::pow(Sa[i], j);
    return compare(lhs, rhs);
}

Residual commute_check(const SaftParams& p, const GridFn& f, const SeqFn& s, const GridFn& g) {
    const GridFn lhs = conv_cc(p, f, conv_sd(p, s, g));
    const GridFn rhs = conv_sd(p, s, conv_cc(p, f, g), lhs.spec);
    return compare(lhs.values, rhs.values);
}

std::vector<RVec> verification_points(const SaftParams& p, double half_width, std::size_t per_axis) {
    const auto spec = GridSpec::centered(p.n(), half_width, per_axis);
    std::vector<RVec> pts(spec.size());
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = p.B() * spec.point(i);
    return pts;
}

} // namespace saftlab
