#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "saftlab/types.hpp"

namespace saftlab {

/// Raw parameter block (A, B, C, D | P, Q). No validity is implied.
struct SaftMatrices {
    RMat A, B, C, D;
    RVec P, Q;

    int n() const { return static_cast<int>(A.rows()); }
};

/// Per-constraint residuals, all in the max-abs (infinity) norm.
struct ConstraintReport {
    bool pass = false;
    bool b_singular = false;
    double det_b = 0.0;
    double sym_ab = 0.0;   // |A B^T - B A^T|
    double sym_cd = 0.0;   // |C D^T - D C^T|
    double unit_ad = 0.0;  // |A D^T - B C^T - I|
    double tol = 0.0;
    std::string message;
};

inline constexpr double kDefaultConstraintTol = 1e-10;

/// Throws StructuralError if the blocks do not share one dimension n.
ConstraintReport validate(const SaftMatrices& m, double tol = kDefaultConstraintTol);

/// A validated SAFT parameter set with the derived matrices cached.
///
/// Immutable after construction. `chirp_matrix()` is B^{-1}A (symmetric for
/// valid parameters), `modulation_matrix()` is D B^{-1}, `input_shift()` is
/// B^{-1}P and `output_shift()` is Q - (D B^{-1})^T P, i.e. the vector of the
/// linear output phase (Q^T - P^T D B^{-1}) w.
class SaftParams {
public:
    /// Validates at `tol`; throws ValidationError on failure.
    static SaftParams from_matrices(SaftMatrices m, double tol = kDefaultConstraintTol);

    int n() const { return n_; }
    const SaftMatrices& matrices() const { return m_; }
    const RMat& A() const { return m_.A; }
    const RMat& B() const { return m_.B; }
    const RMat& C() const { return m_.C; }
    const RMat& D() const { return m_.D; }
    const RVec& P() const { return m_.P; }
    const RVec& Q() const { return m_.Q; }

    const RMat& B_inv() const { return b_inv_; }
    const RMat& chirp_matrix() const { return chirp_; }
    const RMat& modulation_matrix() const { return mod_; }
    const RVec& input_shift() const { return in_shift_; }
    const RVec& output_shift() const { return out_shift_; }
    double det_b() const { return det_b_; }
    /// |det B|^{-1/2}
    double amplitude() const { return amplitude_; }

    /// lambda(t) = exp(i pi t^T B^{-1} A t)
    cplx chirp(std::span<const double> t) const;
    /// eta(w) = exp(i pi w^T D B^{-1} w + 2 i pi (Q^T - P^T D B^{-1}) w)
    cplx modulation(std::span<const double> w) const;

    double chirp_phase(std::span<const double> t) const;
    double modulation_phase(std::span<const double> w) const;

    cplx chirp(const RVec& t) const { return chirp(std::span<const double>(t.data(), t.size())); }
    cplx modulation(const RVec& w) const {
        return modulation(std::span<const double>(w.data(), w.size()));
    }

    bool has_offsets() const { return m_.P.lpNorm<Eigen::Infinity>() != 0.0 || m_.Q.lpNorm<Eigen::Infinity>() != 0.0; }

private:
    SaftParams() = default;

    int n_ = 0;
    SaftMatrices m_;
    RMat b_inv_, chirp_, mod_;
    RVec in_shift_, out_shift_;
    double det_b_ = 0.0;
    double amplitude_ = 0.0;
};

/// (A', B', C', D', P', Q') = (D^T, -B^T, -C^T, A^T, B^T Q - D^T P, C^T P - A^T Q)
SaftParams inverse_params(const SaftParams& p);

/// Same block formula without validation (for probing invalid inputs).
SaftMatrices inverse_matrices(const SaftMatrices& m);

/// Special cases of the transform. Each throws ValidationError on degenerate
/// arguments (singular B) with an explanation.
namespace presets {
SaftParams fourier(int n);
SaftParams lct(const RMat& A, const RMat& B, const RMat& C, const RMat& D);
SaftParams separable_lct(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& c, const std::vector<double>& d);
SaftParams fractional(const std::vector<double>& theta);
SaftParams fresnel(const RMat& B);
SaftParams separable_fresnel(const std::vector<double>& b);
SaftParams lorentz(const std::vector<double>& phi);
SaftParams custom(const SaftMatrices& m);
} // namespace presets

/// Bounds for randomly generated parameter sets.
struct RandomParamsOptions {
    double min_abs_det_b = 0.3;
    double max_chirp_norm = 1.5;     // |B^{-1}A| (max-abs)
    double max_modulation_norm = 2.0;
    double max_offset = 0.5;         // |P|, |Q| entries
    double max_input_shift = 1.5;    // |B^{-1}P| entries
    bool offsets = true;
};

/// Random valid parameters, built as a product of symplectic building blocks
/// (rotation, free propagation, lens, orthogonal mixing, magnification) so the
/// constraints hold by construction. Draws until the bounds are met.
SaftParams random_params(int n, std::mt19937_64& rng, const RandomParamsOptions& opt = {});

} // namespace saftlab
