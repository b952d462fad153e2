#pragma once

#include <functional>
#include <string>
#include <vector>

#include "saftlab/conv.hpp"
#include "saftlab/lattice.hpp"
#include "saftlab/params.hpp"
#include "saftlab/sis.hpp"

namespace saftlab {

/// The filtered generators phi_j (phi_0 = phi, phi_j = a^j applied to phi)
/// seen through two evaluators: samples at integer points and the SAFT
/// spectrum. Either can come from grids or from closed forms.
struct ChannelModel {
    SaftParams params;
    SamplingLattice lat;
    int J = 1;
    FilterKind kind = FilterKind::chirped;
    /// phi_j(x) for integer x; zero is assumed for |x|_inf > radius.
    std::function<cplx(int j, const IntVec& x)> generator;
    /// S phi_j at each point.
    std::function<std::vector<cplx>(int j, const std::vector<RVec>& w)> spectrum;
    std::int64_t radius = 0;
    int K = 8;  // truncation of the lattice sum in the continuous field
};

/// phi_j from grids: phi_0 = phi, phi_{j+1} = phi_j (*_c or *) a. Grids must
/// be aligned with the integers. Passing a == nullptr for J > 1 throws.
ChannelModel make_channel_model(const SaftParams& p, const GridFn& phi, const GridFn* a, const IMat& M, int J,
                                FilterKind kind = FilterKind::chirped, int K = 8);

/// Raw samples y_j(k) = f_j(M^T k), f_j = a^j applied to f, and the
/// chirp-corrected v_j(k) = y_j(k) lambda(M^T k) conj(lambda(k)).
struct MeasurementSet {
    std::vector<SeqFn> y;
    std::vector<SeqFn> v;
    std::int64_t window = 0;  // |k|_inf <= window
};

MeasurementSet make_measurements(const SaftParams& p, const SamplingLattice& lat, std::vector<SeqFn> y);

/// f = s *_sd phi on `grid`, then the filter chain applied to f directly on
/// grids and sampled on M^T Z^n. Independent of the channel evaluators.
MeasurementSet measure(const SisModel& model, const SeqFn& s, const GridFn* a, const IMat& M, int J,
                       FilterKind kind = FilterKind::chirped);

/// y_j(k) = (s *_sd phi_j)(M^T k) from the generator samples, |k|_inf <= window.
MeasurementSet measure_channels(const ChannelModel& ch, const SeqFn& s, std::int64_t window);

/// phi_l^j(r) = phi_j(M^T r - eta_l) lambda(M^T r - eta_l), entries below 1e-14 dropped.
SeqFn chirped_generator_samples(const ChannelModel& ch, int j, std::size_t l);

/// Per-point m x m matrices over one period of the solve grid.
struct MatrixField {
    std::string label;               // "B", "D" or "E"
    std::vector<RVec> points;        // w for B, theta for D and E
    std::vector<CMat> entries;
    std::vector<std::size_t> shape;  // per-axis point counts
};

/// B_{jl}(w) = conj(eta(w)) S[conj(lambda) phi_l^j](w) at w_q = B (q / W + B^{-1} P).
/// With this field, S v_j(w) = sum_l B_{jl}(w) S s~_l(w) where
/// s~_l(r) = conj(lambda(r)) lambda(M^T r + eta_l) s(M^T r + eta_l).
MatrixField build_B(const ChannelModel& ch, std::size_t W);

/// D_{jv}(theta) = Phi_j(M^{-1}(theta + gamma_v)) at theta_q = q / W, with
///   Phi_j(x) = |det B|^{1/2} sum_n conj(eta(B(x + n))) S phi_j(B(x + n)).
MatrixField build_D(const ChannelModel& ch, std::size_t W);

/// Continuous-path data: m H_j(theta) = sum_v D_{jv}(theta) C_v(theta), where
///   H_j(theta) = sum_k lambda(M^T k) exp(2 pi i p^T M^T k) y_j(k) exp(-2 pi i k^T theta)
///   C_v(theta) = conj(eta(w_v)) S s(w_v),  w_v = B M^{-1}(theta + gamma_v).
std::vector<CVec> continuous_data(const ChannelModel& ch, const MeasurementSet& ms, std::size_t W);

struct StabilityReport {
    double min_abs_det = 0.0;
    RVec argmin;
    double max_cond = 0.0;
    double min_hadamard = 0.0;  // min over points of |det| / prod of row norms
    bool pass = false;
    std::string verdict;
};

struct StabilityOptions {
    double det_rel = 1e-8;   // |det| must exceed det_rel * prod of row norms
    double cond_max = 1e8;
};

StabilityReport stability_report(const MatrixField& field, const StabilityOptions& opt = {});

/// Largest |det| change between neighbouring points of the field's grid.
double max_det_jump(const MatrixField& field);

struct Recovery {
    SeqFn s;
    StabilityReport stability;
    double max_solve_residual = 0.0;  // max |A x - b| over solve points
};

/// Solves S v = B S s~ on the W^n solve grid and inverts the DT-SAFT per
/// coset. Recovers s on {M^T r + eta_l : r in [-W/2, W/2)^n}, i.e. modulo
/// W M^T Z^n. Throws ValidationError if the field fails the stability test.
Recovery recover_discrete(const ChannelModel& ch, const MeasurementSet& ms, std::size_t W,
                          const StabilityOptions& opt = {});

/// Solves m H = D C on the W^n grid and inverts on the same index set.
Recovery recover_continuous(const ChannelModel& ch, const MeasurementSet& ms, std::size_t W,
                            const StabilityOptions& opt = {});

/// The index set shared by both recovery paths.
std::vector<IntVec> recovery_indices(const SamplingLattice& lat, std::size_t W);

/// Sub-sequences s~_l entering the discrete system.
std::vector<SeqFn> rechirped_split(const SaftParams& p, const SamplingLattice& lat, const SeqFn& s);

/// max |v_j(k) - sum_l (s~_l *_d g_l^j)(k)| with g_l^j = conj(lambda) phi_l^j.
Residual v_chain_residual(const ChannelModel& ch, const SeqFn& s, const MeasurementSet& ms);
/// S v(w_q) against B(w_q) S s~(w_q), every side by direct sums.
Residual b_system_residual(const ChannelModel& ch, const SeqFn& s, const MeasurementSet& ms, std::size_t W);
/// m H(theta_q) against D(theta_q) C(theta_q) with C from the true s.
Residual d_system_residual(const ChannelModel& ch, const SeqFn& s, const MeasurementSet& ms, std::size_t W);

/// Relative l2 distance on the union of supports.
double seq_rel_error(const SeqFn& got, const SeqFn& want);

} // namespace saftlab
