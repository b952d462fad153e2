#pragma once

#include <optional>
#include <vector>

#include "saftlab/grid.hpp"
#include "saftlab/lattice.hpp"
#include "saftlab/params.hpp"

namespace saftlab {

enum class Backend { quadrature, chirp_dft };

Backend parse_backend(const std::string& name);  // "quad" | "fast"

/// Forward transform plan: input grid (t) and output grid (w).
///
/// The chirp-DFT backend needs frame_out = s B frame_in^{-T} with s = +-1 and
/// output spacing 1/(N h) per axis, so that B^{-1} w lands on the native DFT
/// frequencies of the input grid. The quadrature backend accepts any output.
struct SaftPlan {
    SaftParams params;
    GridSpec input;
    GridSpec output;
    Backend backend = Backend::chirp_dft;
};

/// w-grid matched to `in` for the fast path: frame B frame_in^{-T}, spacing
/// 1/(N h), frequencies centred on B^{-1} w = 0.
GridSpec default_output_grid(const SaftParams& p, const GridSpec& in);

/// Throws StructuralError when the chirp-DFT backend cannot serve `out`.
SaftPlan make_plan(const SaftParams& p, const GridSpec& in, std::optional<GridSpec> out = std::nullopt,
                   Backend backend = Backend::chirp_dft);

/// +1 or -1 if the fast path applies between the two grids, 0 otherwise.
int fast_path_sign(const SaftParams& p, const GridSpec& in, const GridSpec& out);

/// Integral kernel |det B|^{-1/2} lambda(t) eta(w) exp(2 pi i [(B^{-1}P)^T t - t^T B^{-1} w]).
cplx saft_kernel(const SaftParams& p, const RVec& t, const RVec& w);

GridFn saft_forward(const SaftPlan& plan, const GridFn& f);

/// Transform with inverse_params from plan.output back onto plan.input.
GridFn saft_inverse(const SaftPlan& plan, const GridFn& F);

/// Quadrature of the defining integral at arbitrary frequencies.
std::vector<cplx> saft_at(const SaftParams& p, const GridFn& f, const std::vector<RVec>& points);

/// Exact DT-SAFT of a finite sequence.
std::vector<cplx> dtsaft_at(const SaftParams& p, const SeqFn& s, const std::vector<RVec>& points);
GridFn dtsaft(const SaftParams& p, const SeqFn& s, const GridSpec& wgrid);

std::vector<RVec> grid_points(const GridSpec& g);

/// Lattice-sum truncation: grow K from `start` until the largest term in the
/// outermost shell is below rel_tol of the running sum (or max is reached).
struct TruncationPolicy {
    int start = 8;
    int max = 32;
    double rel_tol = 1e-12;
};

struct PoissonReport {
    std::vector<cplx> lhs;              // |det B|^{-1/2} sum_k g(k) lambda(k) exp(2 pi i [p^T k - k^T B^{-1} w])
    std::vector<cplx> rhs;              // sum_n conj(eta(w + B n)) S g(w + B n)
    std::vector<cplx> rhs_literal;      // sum_n conj(eta(B^{-1}w + n)) S g(B^{-1}w + n)
    double residual = 0.0;              // sup |lhs - rhs|
    double literal_residual = 0.0;      // sup |lhs - rhs_literal|
    int K = 0;
    bool decay_warning = false;         // g not small at the grid edge
};

/// g must sit on a grid whose points include every integer in its span.
PoissonReport poisson_check(const SaftParams& p, const GridFn& g, const std::vector<RVec>& w,
                            const TruncationPolicy& trunc = {});

/// (D_M c)(k) = c(M^T k)
SeqFn downsample(const SamplingLattice& lat, const SeqFn& c);

/// Chirp-aware variant: c(M^T k) lambda(M^T k) conj(lambda(k)) exp(2 pi i p^T (M^T k - k)),
/// with p = B^{-1} P. Equal to downsample when A = 0 and P = 0.
SeqFn downsample_chirped(const SaftParams& p, const SamplingLattice& lat, const SeqFn& c);

struct DownsamplingReport {
    // General identity, exact for all valid parameters:
    //   sum_v conj(eta(u_v)) S c(u_v) = m conj(eta(B w)) S[downsample_chirped c](B w),
    //   u_v = B M^{-1} (w + gamma_v).
    double residual = 0.0;
    // Literal form, m conj(eta(w)) S[D_M c](w) on the right; holds in the
    // Fourier case and is reported for comparison.
    double literal_residual = 0.0;
    double scale = 0.0;  // sup of |lhs|
};

DownsamplingReport downsampling_check(const SaftParams& p, const SamplingLattice& lat, const SeqFn& c,
                                      const std::vector<RVec>& w);

} // namespace saftlab
