#include "saftlab/grid.hpp"

#include <cmath>
#include <numeric>

#include "saftlab/fft.hpp"
#include "saftlab/io.hpp"
#include "saftlab/meyer.hpp"

namespace saftlab {

std::size_t GridSpec::size() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

double GridSpec::cell_volume() const {
    double v = std::abs(frame.determinant());
    for (double h : spacing) v *= h;
    return v;
}

bool GridSpec::identity_frame() const {
    return (frame - RMat::Identity(n(), n())).cwiseAbs().maxCoeff() == 0.0;
}

std::vector<std::size_t> GridSpec::unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(shape.size());
    for (std::size_t a = shape.size(); a-- > 0;) {
        idx[a] = flat % shape[a];
        flat /= shape[a];
    }
    return idx;
}

std::size_t GridSpec::flatten(std::span<const std::size_t> idx) const {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < shape.size(); ++a) flat = flat * shape[a] + idx[a];
    return flat;
}

RVec GridSpec::rect_point(std::size_t flat) const {
    RVec u(n());
    for (std::size_t a = shape.size(); a-- > 0;) {
        u[static_cast<Eigen::Index>(a)] = coord(a, flat % shape[a]);
        flat /= shape[a];
    }
    return u;
}

RVec GridSpec::point(std::size_t flat) const {
    if (identity_frame()) return rect_point(flat);
    return frame * rect_point(flat);
}

std::optional<std::size_t> GridSpec::index_of(const RVec& x, double tol) const {
    const RVec u = identity_frame() ? x : RVec(frame.lu().solve(x));
    std::vector<std::size_t> idx(shape.size());
    for (std::size_t a = 0; a < shape.size(); ++a) {
        const double k = (u[static_cast<Eigen::Index>(a)] - origin[a]) / spacing[a] - 0.5;
        const double r = std::round(k);
        if (std::abs(k - r) > tol || r < 0 || r >= static_cast<double>(shape[a])) return std::nullopt;
        idx[a] = static_cast<std::size_t>(r);
    }
    return flatten(idx);
}

bool GridSpec::contains(const RVec& x) const {
    const RVec u = identity_frame() ? x : RVec(frame.lu().solve(x));
    for (std::size_t a = 0; a < shape.size(); ++a) {
        const double k = (u[static_cast<Eigen::Index>(a)] - origin[a]) / spacing[a];
        if (k < 0 || k > static_cast<double>(shape[a])) return false;
    }
    return true;
}

void GridSpec::check() const {
    const auto d = shape.size();
    if (d == 0) throw StructuralError("grid: dimension must be positive");
    if (origin.size() != d || spacing.size() != d)
        throw StructuralError("grid: shape, origin and spacing must have the same length");
    if (frame.rows() != static_cast<Eigen::Index>(d) || frame.cols() != static_cast<Eigen::Index>(d))
        throw StructuralError("grid: frame must be n x n");
    for (std::size_t a = 0; a < d; ++a) {
        if (shape[a] == 0) throw StructuralError("grid: every axis needs at least one sample");
        if (!(spacing[a] > 0.0)) throw StructuralError("grid: spacing must be positive");
    }
}

GridSpec GridSpec::centered(int n, double half_width, std::size_t N) {
    const auto d = static_cast<std::size_t>(n);
    return over(RMat::Identity(n, n), std::vector<double>(d, -half_width),
                std::vector<double>(d, 2.0 * half_width / static_cast<double>(N)), std::vector<std::size_t>(d, N));
}

GridSpec GridSpec::aligned(int n, double half_width, std::size_t samples_per_unit) {
    const auto d = static_cast<std::size_t>(n);
    const double h = 1.0 / static_cast<double>(samples_per_unit);
    const auto N = static_cast<std::size_t>(std::llround(2.0 * half_width * static_cast<double>(samples_per_unit)));
    return over(RMat::Identity(n, n), std::vector<double>(d, -half_width - 0.5 * h), std::vector<double>(d, h),
                std::vector<std::size_t>(d, N));
}

GridSpec GridSpec::over(const RMat& frame, std::vector<double> lo, std::vector<double> spacing,
                        std::vector<std::size_t> shape) {
    GridSpec s{std::move(shape), std::move(lo), std::move(spacing), frame};
    s.check();
    return s;
}

bool GridSpec::same_layout(const GridSpec& o, double tol) const {
    if (shape != o.shape || frame.rows() != o.frame.rows()) return false;
    for (std::size_t a = 0; a < shape.size(); ++a) {
        if (std::abs(origin[a] - o.origin[a]) > tol * std::max(1.0, std::abs(origin[a]))) return false;
        if (std::abs(spacing[a] - o.spacing[a]) > tol * spacing[a]) return false;
    }
    return (frame - o.frame).cwiseAbs().maxCoeff() <= tol;
}

GridFn::GridFn(GridSpec s, std::vector<cplx> v) : spec(std::move(s)), values(std::move(v)) {
    spec.check();
    if (values.size() != spec.size()) throw StructuralError("grid: value count does not match shape");
}

cplx SeqFn::operator()(const IntVec& k) const {
    const auto it = entries_.find(k);
    return it == entries_.end() ? cplx{} : it->second;
}

void SeqFn::set(const IntVec& k, cplx v) {
    if (static_cast<int>(k.size()) != n_) throw StructuralError("sequence: index dimension mismatch");
    if (v == cplx{}) entries_.erase(k);
    else entries_[k] = v;
}

void SeqFn::add(const IntVec& k, cplx v) { set(k, (*this)(k) + v); }

void SeqFn::prune(double threshold) {
    std::erase_if(entries_, [threshold](const auto& e) { return std::abs(e.second) <= threshold; });
}

double SeqFn::norm2() const {
    double acc = 0.0;
    for (const auto& [k, v] : entries_) acc += std::norm(v);
    return acc;
}

SeqFn SeqFn::delta(int n, const IntVec& at) {
    SeqFn s(n);
    s.set(at, 1.0);
    return s;
}

IntVec SeqBox::index_point(std::size_t flat) const {
    IntVec k(shape.size());
    for (std::size_t a = shape.size(); a-- > 0;) {
        k[a] = lo[a] + static_cast<std::int64_t>(flat % shape[a]);
        flat /= shape[a];
    }
    return k;
}

SeqBox SeqBox::zeros(IntVec lo, std::vector<std::size_t> shape) {
    if (lo.size() != shape.size()) throw StructuralError("sequence box: lo and shape differ in length");
    SeqBox b{std::move(lo), std::move(shape), {}};
    b.values.assign(std::accumulate(b.shape.begin(), b.shape.end(), std::size_t{1}, std::multiplies<>()), cplx{});
    return b;
}

SeqBox SeqBox::centered(int n, std::int64_t radius) {
    const auto d = static_cast<std::size_t>(n);
    return zeros(IntVec(d, -radius), std::vector<std::size_t>(d, static_cast<std::size_t>(2 * radius + 1)));
}

SeqFn SeqBox::to_seq(double threshold) const {
    SeqFn s(n());
    for (std::size_t i = 0; i < values.size(); ++i)
        if (std::abs(values[i]) > threshold) s.set(index_point(i), values[i]);
    return s;
}

cplx integrate(const GridFn& f) {
    cplx acc{};
    for (const auto& v : f.values) acc += v;
    return acc * f.spec.cell_volume();
}

double dual_centered_origin(std::size_t N, double spacing) {
    const double dz = 1.0 / (static_cast<double>(N) * spacing);
    return -(static_cast<double>(N / 2) + 0.5) * dz;
}

GridFn dft(const GridFn& f, int sign, std::optional<std::vector<double>> out_origin) {
    const auto& s = f.spec;
    std::vector<double> oo;
    if (out_origin) {
        if (out_origin->size() != s.shape.size()) throw StructuralError("dft: output origin has wrong length");
        oo = *out_origin;
    } else {
        for (std::size_t a = 0; a < s.shape.size(); ++a) oo.push_back(dual_centered_origin(s.shape[a], s.spacing[a]));
    }
    std::vector<double> osp;
    for (std::size_t a = 0; a < s.shape.size(); ++a) osp.push_back(1.0 / (static_cast<double>(s.shape[a]) * s.spacing[a]));
    auto values = fft::rect_dft(f.values, s.shape, s.origin, s.spacing, oo, sign >= 0 ? 1 : -1);
    const double det = std::abs(s.frame.determinant());
    if (det != 1.0)
        for (auto& v : values) v *= det;
    const RMat oframe = s.identity_frame() ? s.frame : RMat(s.frame.inverse().transpose());
    return GridFn(GridSpec::over(oframe, oo, osp, s.shape), std::move(values));
}

namespace {

std::vector<double> fill(const std::vector<double>& v, std::size_t n, double dflt, const char* what) {
    if (v.empty()) return std::vector<double>(n, dflt);
    if (v.size() == 1) return std::vector<double>(n, v[0]);
    if (v.size() != n) throw StructuralError(std::string("generator: ") + what + " has wrong length");
    return v;
}

} // namespace

GridFn sample_generator(const GeneratorSpec& gen, const GridSpec& spec) {
    spec.check();
    const auto d = spec.shape.size();
    if (gen.name == "file") {
        GridFn f = io::read_grid(gen.path);
        if (!f.spec.same_layout(spec, 1e-9))
            throw StructuralError("generator file '" + gen.path + "' does not match the requested grid");
        return f;
    }
    const bool tent = gen.name == "tent";
    const auto c = fill(gen.center, d, tent ? 0.5 : 0.0, "center");
    const auto sc = fill(gen.scale, d, tent ? 0.5 : 1.0, "scale");
    std::function<cplx(const RVec&)> eval;
    if (gen.name == "gaussian" || gen.name == "chirped_gaussian") {
        const double chirp = gen.name == "chirped_gaussian" ? gen.chirp : 0.0;
        eval = [&, chirp](const RVec& x) {
            double e = 0.0, r2 = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                const double y = x[static_cast<Eigen::Index>(a)] - c[a];
                e += (y / sc[a]) * (y / sc[a]);
                r2 += y * y;
            }
            return std::exp(-kPi * e) * unit_phase(kPi * chirp * r2);
        };
    } else if (tent) {
        eval = [&](const RVec& x) {
            double p = 1.0;
            for (std::size_t a = 0; a < d; ++a)
                p *= std::max(0.0, 1.0 - std::abs(x[static_cast<Eigen::Index>(a)] - c[a]) / sc[a]);
            return cplx(p);
        };
    } else if (gen.name == "meyer2d") {
        eval = [&](const RVec& x) {
            double p = 1.0;
            for (std::size_t a = 0; a < d; ++a) p *= meyer::psi((x[static_cast<Eigen::Index>(a)] - c[a]) / sc[a]);
            return cplx(p);
        };
    } else if (gen.name == "meyer_phi") {
        eval = [&](const RVec& x) {
            double p = 1.0;
            for (std::size_t a = 0; a < d; ++a) p *= meyer::psi_check(x[static_cast<Eigen::Index>(a)] - c[a]);
            return cplx(p);
        };
    } else {
        throw StructuralError("unknown generator '" + gen.name +
                              "' (expected gaussian, chirped_gaussian, tent, meyer2d, meyer_phi or file)");
    }
    GridFn f(spec);
    for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = eval(spec.point(i));
    return f;
}

double rel_l2(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw StructuralError("rel_l2: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw StructuralError("max_abs_diff: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace saftlab
