#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saftlab/types.hpp"

namespace saftlab {

/// Uniform grid of cell centres.
///
/// Rectangular coordinates are u_a(k) = origin_a + (k + 1/2) spacing_a; the
/// physical point is frame * u. Plain grids have frame = I. SAFT outputs live
/// on grids whose frame is B (w = B xi with xi on a DFT-native grid).
/// Storage is row-major (last axis fastest).
struct GridSpec {
    std::vector<std::size_t> shape;
    std::vector<double> origin;
    std::vector<double> spacing;
    RMat frame;

    int n() const { return static_cast<int>(shape.size()); }
    std::size_t size() const;
    double cell_volume() const;
    bool identity_frame() const;

    double coord(std::size_t axis, std::size_t k) const {
        return origin[axis] + (static_cast<double>(k) + 0.5) * spacing[axis];
    }
    std::vector<std::size_t> unflatten(std::size_t flat) const;
    std::size_t flatten(std::span<const std::size_t> idx) const;
    RVec rect_point(std::size_t flat) const;
    RVec point(std::size_t flat) const;

    /// Flat index of the grid point at physical location x, if x is a grid
    /// point to within `tol` cells.
    std::optional<std::size_t> index_of(const RVec& x, double tol = 1e-7) const;
    /// True if x lies inside the grid's bounding cells (frame coordinates).
    bool contains(const RVec& x) const;

    /// Throws StructuralError on inconsistent sizes or non-positive spacing.
    void check() const;

    /// Cell-centred grid on [-half_width, half_width]^n with N points per axis.
    static GridSpec centered(int n, double half_width, std::size_t N);
    /// Grid whose points are -half_width + k / samples_per_unit, so every
    /// integer point in [-half_width, half_width) is a grid point.
    static GridSpec aligned(int n, double half_width, std::size_t samples_per_unit);
    /// Cell-centred grid over frame * [lo, lo + count * spacing).
    static GridSpec over(const RMat& frame, std::vector<double> lo, std::vector<double> spacing,
                         std::vector<std::size_t> shape);

    bool same_layout(const GridSpec& other, double tol = 1e-12) const;
};

/// Complex function sampled on a GridSpec.
struct GridFn {
    GridSpec spec;
    std::vector<cplx> values;

    GridFn() = default;
    explicit GridFn(GridSpec s) : spec(std::move(s)), values(spec.size(), cplx{}) { spec.check(); }
    GridFn(GridSpec s, std::vector<cplx> v);

    int n() const { return spec.n(); }
    std::size_t size() const { return values.size(); }
};

/// Finitely supported sequence on Z^n.
class SeqFn {
public:
    explicit SeqFn(int n = 1) : n_(n) {}

    int n() const { return n_; }
    cplx operator()(const IntVec& k) const;
    /// Overwrites; assigning exactly zero erases the entry.
    void set(const IntVec& k, cplx v);
    void add(const IntVec& k, cplx v);

    const std::map<IntVec, cplx>& entries() const { return entries_; }
    std::size_t support_size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    /// Drops entries with |value| <= threshold.
    void prune(double threshold);
    double norm2() const;  // sum |s(k)|^2

    static SeqFn delta(int n, const IntVec& at);

private:
    int n_;
    std::map<IntVec, cplx> entries_;
};

/// Dense sequence on a box lo + [0, shape). Used where supports are large.
struct SeqBox {
    IntVec lo;
    std::vector<std::size_t> shape;
    std::vector<cplx> values;

    int n() const { return static_cast<int>(shape.size()); }
    std::size_t size() const { return values.size(); }
    IntVec index_point(std::size_t flat) const;

    static SeqBox zeros(IntVec lo, std::vector<std::size_t> shape);
    /// Box [-radius, radius]^n.
    static SeqBox centered(int n, std::int64_t radius);
    SeqFn to_seq(double threshold = 0.0) const;
};

/// Midpoint rule: cell volume times the sum of the values (row-major order).
cplx integrate(const GridFn& f);

/// Default DFT-dual axis origin: frequencies (j - N/2) / (N h).
double dual_centered_origin(std::size_t N, double spacing);

/// Riemann-sum Fourier transform onto the reciprocal grid,
///   F(xi) = vol * sum_x f(x) exp(sign * 2 pi i x^T xi),
/// with xi on the grid frame^{-T} (out_origin + (j + 1/2) / (N h)). With
/// `out_origin` matching the original origin, dft(dft(f, -1), +1) == f and
/// the L2 energy (with cell volumes) is preserved.
GridFn dft(const GridFn& f, int sign, std::optional<std::vector<double>> out_origin = std::nullopt);

/// Analytic generator description for sample_generator.
struct GeneratorSpec {
    std::string name;               // gaussian, chirped_gaussian, tent, meyer2d, meyer_phi, file
    std::vector<double> center;     // defaults to 0 (tent: 1/2)
    std::vector<double> scale;      // defaults to 1 (tent: 1/2)
    double chirp = 0.0;             // chirped_gaussian: exp(i pi chirp |x - c|^2)
    std::string path;               // file
};

/// Evaluates the generator at every cell centre. Throws StructuralError for
/// unknown names.
GridFn sample_generator(const GeneratorSpec& gen, const GridSpec& spec);

/// Relative L2 distance |a - b| / |b| over equal-length value arrays.
double rel_l2(std::span<const cplx> a, std::span<const cplx> b);
double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b);

} // namespace saftlab
