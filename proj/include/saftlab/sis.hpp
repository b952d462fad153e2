#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "saftlab/conv.hpp"
#include "saftlab/grid.hpp"
#include "saftlab/params.hpp"

namespace saftlab {

using SpectrumFn = std::function<cplx(const RVec&)>;

/// Shift-invariant space V(phi) = {s *_sd phi}.
///
/// The generator spectrum S phi is either evaluated by quadrature over phi's
/// grid or supplied in closed form (used when phi decays too slowly for a
/// finite grid to reach the required accuracy).
struct SisModel {
    SaftParams params;
    std::optional<GridFn> phi;
    SpectrumFn spectrum;
    int K = 8;                  // lattice truncation |k|_inf <= K
    double decay_margin = 0.0;  // max |S phi| on the shell |k|_inf = K, relative to the peak
};

/// Spectrum by quadrature over phi. Throws ValidationError if |S phi| is not
/// below `decay_tol` (relative) on the truncation shell.
SisModel make_sis_model(const SaftParams& p, const GridFn& phi, int K = 8, double decay_tol = 1e-10);
/// Closed-form spectrum; `phi` (optional) is only used for synthesis.
SisModel make_sis_model(const SaftParams& p, SpectrumFn spectrum, std::optional<GridFn> phi = std::nullopt,
                        int K = 8, double decay_tol = 1e-10);

GridFn synthesize(const SisModel& model, const SeqFn& s, std::optional<GridSpec> out = std::nullopt);

struct GrammianValue {
    double squared = 0.0;    // sum_k |S phi(w + B k)|^2
    double unsquared = 0.0;  // sum_k |S phi(w + B k)|
};

GrammianValue grammian(const SisModel& model, const RVec& w);
std::vector<GrammianValue> grammian_at(const SisModel& model, const std::vector<RVec>& w);

/// w = B zeta, zeta_a = j / N for j in [0, N): a grid over the fundamental
/// parallelepiped B [0,1)^n that includes w = 0.
std::vector<RVec> fundamental_points(const RMat& B, std::size_t per_axis);

struct RieszReport {
    double eta1 = 0.0;
    double eta2 = 0.0;
    RVec argmin;
    bool pass = false;
    double threshold = 0.0;
    std::string verdict;
};

RieszReport riesz_bounds(const SisModel& model, const std::vector<RVec>& wgrid, double threshold = 1e-8);

struct FrameCheck {
    std::size_t trials = 0;
    std::size_t violations = 0;
    double min_ratio = 0.0;  // min over trials of |S f|^2 / |s|^2
    double max_ratio = 0.0;
};

/// eta1 |s|^2 <= |S f|^2 <= eta2 |s|^2 for f = s *_sd phi, with |S f|^2
/// computed by quadrature of the fast transform of f on `grid`.
FrameCheck frame_check(const SisModel& model, const std::vector<SeqFn>& seqs, const RieszReport& bounds,
                       const GridSpec& grid, double slack = 1e-6);

/// |int_{B[0,1)^n} |S s|^2 dw - |s|^2| / |s|^2 with the midpoint rule on
/// per_axis^n points (exact once per_axis exceeds twice the support span).
double parseval_residual(const SaftParams& p, const SeqFn& s, std::size_t per_axis);

/// sum over unit cells k + [0,1)^n of (max of |f| over the samples in the cell)^p.
/// Needs at least 8 samples per unit along every axis.
double wiener_norm(const GridFn& f, double p);

} // namespace saftlab
