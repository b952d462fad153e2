#pragma once

#include <optional>
#include <vector>

#include "saftlab/grid.hpp"
#include "saftlab/params.hpp"

namespace saftlab {

/// How filter powers are composed. `chirped` uses the SAFT convolutions;
/// `classical` uses plain convolution (no chirps, no |det B|^{-1/2}).
enum class FilterKind { chirped, classical };

FilterKind parse_filter_kind(const std::string& name);

/// f *_c g = conj(lambda(t)) |det B|^{-1/2} (lambda f) * (lambda g).
///
/// Linear (zero-padded) convolution of two grids with equal spacing and
/// identity frames. The full result lives on origin_f + origin_g + h/2 with
/// N_f + N_g - 1 points per axis; `out` restricts it to a sub-grid aligned
/// with that lattice (points outside the full support are zero).
GridFn conv_cc(const SaftParams& p, const GridFn& f, const GridFn& g, std::optional<GridSpec> out = std::nullopt,
               FilterKind kind = FilterKind::chirped);

/// (s *_sd phi)(t) = conj(lambda(t)) |det B|^{-1/2} sum_k lambda(k) s(k) lambda(t - k) phi(t - k).
///
/// phi's grid spacing must divide 1 so integer shifts stay on the lattice.
/// Default output: phi's grid extended to cover every shift in supp(s).
GridFn conv_sd(const SaftParams& p, const SeqFn& s, const GridFn& phi, std::optional<GridSpec> out = std::nullopt,
               FilterKind kind = FilterKind::chirped);

/// (s *_d c)(l) = conj(lambda(l)) |det B|^{-1/2} sum_k lambda(k) s(k) lambda(l - k) c(l - k).
SeqFn conv_dd(const SaftParams& p, const SeqFn& s, const SeqFn& c);

/// a^j = a *_c ... *_c a (j >= 1 factors). The j = 0 level is the identity
/// action and is never formed as a function, so j = 0 throws.
GridFn conv_power(const SaftParams& p, const GridFn& a, int j, std::optional<GridSpec> out = std::nullopt,
                  FilterKind kind = FilterKind::chirped);

/// Values of `f` on the points of `target` (zero where f has no sample).
/// Requires target to sit on f's lattice.
GridFn restrict_to(const GridFn& f, const GridSpec& target);

struct Residual {
    double rel = 0.0;     // |lhs - rhs|_2 / |rhs|_2
    double sup = 0.0;     // max |lhs - rhs|
    double scale = 0.0;   // max |rhs|
};

Residual compare(const std::vector<cplx>& lhs, const std::vector<cplx>& rhs);

/// Each verifier computes both sides of a convolution theorem independently
/// at the frequencies `w` and compares them.
Residual cc_theorem_residual(const SaftParams& p, const GridFn& f, const GridFn& g, const std::vector<RVec>& w);
Residual sd_theorem_residual(const SaftParams& p, const SeqFn& s, const GridFn& phi, const std::vector<RVec>& w);
Residual dd_theorem_residual(const SaftParams& p, const SeqFn& s, const SeqFn& c, const std::vector<RVec>& w);
/// S(a^j) against conj(eta)^{j-1} (S a)^j.
Residual power_theorem_residual(const SaftParams& p, const GridFn& a, int j, const std::vector<RVec>& w);

/// |f *_c (s *_sd g) - s *_sd (f *_c g)| relative to the right-hand side.
Residual commute_check(const SaftParams& p, const GridFn& f, const SeqFn& s, const GridFn& g);

/// Frequencies w = B xi for xi on a uniform grid over [-half_width, half_width]^n.
std::vector<RVec> verification_points(const SaftParams& p, double half_width, std::size_t per_axis);

} // namespace saftlab
