#pragma once

#include <memory>
#include <string>
#include <vector>

#include "saftlab/dynsamp.hpp"
#include "saftlab/io.hpp"
#include "saftlab/params.hpp"

namespace saftlab::repro {

/// Two-dimensional worked example: Meyer-type window generator, two-tap
/// filter family and M = 2I sampling with four channels.
///
/// The unchirped generator is phi~(x) = psi_check(x1) psi_check(x2), whose
/// Fourier transform is psi(xi1) psi(xi2). The SAFT generator is
/// phi = conj(lambda) exp(-2 pi i p^T x) phi~, so that S phi(w) =
/// beta eta(w) psi psi(B^{-1} w). The filter acts in the unchirped domain as
/// b(xi) = c1 exp(2 pi i (xi1 + xi2)) + c2 exp(2 pi i (xi1 + 2 xi2)).
struct Config {
    SaftParams params = presets::fourier(2);
    cplx c1{1.0, 0.0};
    cplx c2{0.5, 0.0};
    std::int64_t window = 128;      // measurements on |k|_inf <= window
    std::int64_t radius = 256;      // generator samples on |x|_inf <= radius
    std::size_t W = 8;              // solve grid per axis
    std::size_t figure_points = 65; // per axis
    double figure_half_width = 4.0;
    StabilityOptions stability;
};

/// Closed-form evaluators for the example.
class Scenario {
public:
    explicit Scenario(Config cfg);

    const Config& config() const { return cfg_; }
    const SeqFn& coefficients() const { return coef_; }
    const ChannelModel& channels() const { return channels_; }

    /// b(xi) and the masked filter spectrum b(xi) chi_E(xi), E = [-2/3, 2/3]^2.
    cplx filter_symbol(const RVec& xi) const;
    cplx masked_filter(const RVec& xi) const;

    /// phi~(x) for arbitrary x; the unchirped j-th channel generator
    /// U phi_j(x) = sum_a C(j, a) c1^a c2^(j-a) phi~(x1 + j, x2 + 2j - a).
    double phi_tilde(const RVec& x) const;
    cplx unchirped_channel(int j, const RVec& x) const;
    cplx channel(int j, const RVec& x) const;
    /// f_j = s *_sd phi_j with s the example coefficients.
    cplx filtered_signal(int j, const RVec& x) const;

    /// y_j(k) = f_j(2k) straight from the closed forms.
    MeasurementSet measurements() const;

private:
    struct Closed;

    Config cfg_;
    SeqFn coef_;
    std::shared_ptr<const Closed> closed_;
    ChannelModel channels_;
};

struct Report {
    // window and generator checks
    double partition_dev = 0.0;       // max |sum_k psi(w + k)^2 - 1| on 1024 points
    double psi_pair_dev = 0.0;        // max |psi(x)^2 + psi(1 - x)^2 - 1| on [1/3, 2/3]
    double grammian_min = 0.0, grammian_max = 0.0;
    double idft_deviation = 0.0;      // 256^2 inverse DFT of psi psi against phi~
    double mask_residual = 0.0;
    double mask_outside = 0.0;        // max of both sides off the support
    double min_phi0 = 0.0;
    double phi0_poisson_residual = 0.0;  // sample DTFT against the periodized spectrum
    double phi1_factor_residual = 0.0;   // Phi_1 against b Phi_0
    // channel fields
    double min_det_E = 0.0, min_det_D = 0.0, min_det_B = 0.0;
    double factor_residual = 0.0;        // D against E diag(Phi_0), all m = 4 columns
    double min_det_E2 = 0.0;
    double factor_residual_2x2 = 0.0;    // det D2 against det E2 times the Phi_0 product
    double measurement_crosscheck = 0.0; // closed form against measure_channels
    StabilityReport stability_D, stability_B;
    // recovery
    bool recovered = false;
    double error_discrete = -1.0, error_continuous = -1.0, agreement = -1.0;
    SeqFn recovered_discrete{2}, recovered_continuous{2};
    std::string verdict;
    double seconds = 0.0;
};

Report run(const Scenario& sc);

/// fig01_psi.csv ... fig10_samples_imag.csv and report.json in outdir.
void write_outputs(const Scenario& sc, const Report& r, const std::string& outdir);

io::json report_json(const Scenario& sc, const Report& r);

} // namespace saftlab::repro
