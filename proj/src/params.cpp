#include "saftlab/params.hpp"

#include <cmath>
#include <sstream>

namespace saftlab {

namespace {

double max_abs(const RMat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void check_dims(const SaftMatrices& m) {
    const auto n = m.A.rows();
    auto square = [n](const RMat& x) { return x.rows() == n && x.cols() == n; };
    if (n == 0) throw StructuralError("SAFT parameters: dimension n must be positive");
    if (!square(m.A) || !square(m.B) || !square(m.C) || !square(m.D))
        throw StructuralError("SAFT parameters: A, B, C, D must all be n x n");
    if (m.P.size() != n || m.Q.size() != n)
        throw StructuralError("SAFT parameters: P and Q must be n-vectors");
}

bool b_is_singular(const RMat& B, double det) {
    const double norm = B.cwiseAbs().rowwise().sum().maxCoeff();
    return !(std::abs(det) >= 1e-12 * std::pow(norm, static_cast<double>(B.rows()))) || norm == 0.0;
}

double quad_form(const RMat& M, std::span<const double> x) {
    const auto n = static_cast<std::size_t>(M.rows());
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += M(i, j) * x[j];
        acc += x[i] * row;
    }
    return acc;
}

double dot(const RVec& v, std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += v[static_cast<Eigen::Index>(i)] * x[i];
    return acc;
}

SaftMatrices zero_block(int n) {
    SaftMatrices m;
    m.A = RMat::Zero(n, n);
    m.B = RMat::Zero(n, n);
    m.C = RMat::Zero(n, n);
    m.D = RMat::Zero(n, n);
    m.P = RVec::Zero(n);
    m.Q = RVec::Zero(n);
    return m;
}

SaftParams build_preset(SaftMatrices m, const char* name) {
    const auto report = validate(m, 1e-12);
    if (!report.pass) {
        throw ValidationError(std::string("preset ") + name + ": " + report.message);
    }
    return SaftParams::from_matrices(std::move(m), 1e-12);
}

RMat diag(const std::vector<double>& d) {
    RMat out = RMat::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
    return out;
}

} // namespace

ConstraintReport validate(const SaftMatrices& m, double tol) {
    check_dims(m);
    ConstraintReport r;
    r.tol = tol;
    const auto n = m.A.rows();
    const RMat I = RMat::Identity(n, n);
    r.det_b = m.B.determinant();
    r.b_singular = b_is_singular(m.B, r.det_b);
    r.sym_ab = max_abs(m.A * m.B.transpose() - m.B * m.A.transpose());
    r.sym_cd = max_abs(m.C * m.D.transpose() - m.D * m.C.transpose());
    r.unit_ad = max_abs(m.A * m.D.transpose() - m.B * m.C.transpose() - I);

    std::ostringstream msg;
    if (r.b_singular) msg << "B is singular (det B = " << r.det_b << "); ";
    if (r.sym_ab > tol) msg << "A B^T != B A^T (residual " << r.sym_ab << "); ";
    if (r.sym_cd > tol) msg << "C D^T != D C^T (residual " << r.sym_cd << "); ";
    if (r.unit_ad > tol) msg << "A D^T - B C^T != I (residual " << r.unit_ad << "); ";
    r.message = msg.str();
    r.pass = r.message.empty();
    if (r.pass) r.message = "ok";
    return r;
}

SaftParams SaftParams::from_matrices(SaftMatrices m, double tol) {
    const auto report = validate(m, tol);
    if (!report.pass) throw ValidationError("invalid SAFT parameters: " + report.message);

    SaftParams p;
    p.n_ = m.n();
    p.det_b_ = report.det_b;
    p.amplitude_ = 1.0 / std::sqrt(std::abs(report.det_b));
    p.b_inv_ = m.B.inverse();
    p.chirp_ = p.b_inv_ * m.A;
    // B^{-1}A is symmetric for valid parameters; symmetrize away rounding.
    p.chirp_ = 0.5 * (p.chirp_ + p.chirp_.transpose()).eval();
    p.mod_ = m.D * p.b_inv_;
    p.in_shift_ = p.b_inv_ * m.P;
    p.out_shift_ = m.Q - p.mod_.transpose() * m.P;
    p.m_ = std::move(m);
    return p;
}

double SaftParams::chirp_phase(std::span<const double> t) const { return kPi * quad_form(chirp_, t); }

double SaftParams::modulation_phase(std::span<const double> w) const {
    return kPi * quad_form(mod_, w) + kTwoPi * dot(out_shift_, w);
}

cplx SaftParams::chirp(std::span<const double> t) const { return unit_phase(chirp_phase(t)); }

cplx SaftParams::modulation(std::span<const double> w) const { return unit_phase(modulation_phase(w)); }

SaftMatrices inverse_matrices(const SaftMatrices& m) {
    check_dims(m);
    SaftMatrices out;
    out.A = m.D.transpose();
    out.B = -m.B.transpose();
    out.C = -m.C.transpose();
    out.D = m.A.transpose();
    out.P = m.B.transpose() * m.Q - m.D.transpose() * m.P;
    out.Q = m.C.transpose() * m.P - m.A.transpose() * m.Q;
    return out;
}

SaftParams inverse_params(const SaftParams& p) {
    return SaftParams::from_matrices(inverse_matrices(p.matrices()), kDefaultConstraintTol);
}

namespace presets {

SaftParams fourier(int n) {
    if (n <= 0) throw StructuralError("fourier preset: n must be positive");
    auto m = zero_block(n);
    m.B = RMat::Identity(n, n);
    m.C = -RMat::Identity(n, n);
    return build_preset(std::move(m), "ft");
}

SaftParams lct(const RMat& A, const RMat& B, const RMat& C, const RMat& D) {
    SaftMatrices m{A, B, C, D, RVec::Zero(A.rows()), RVec::Zero(A.rows())};
    return build_preset(std::move(m), "lct");
}

SaftParams separable_lct(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& c, const std::vector<double>& d) {
    if (a.size() != b.size() || a.size() != c.size() || a.size() != d.size() || a.empty())
        throw StructuralError("separable_lct preset: diagonals must have equal nonzero length");
    return lct(diag(a), diag(b), diag(c), diag(d));
}

SaftParams fractional(const std::vector<double>& theta) {
    if (theta.empty()) throw StructuralError("frft preset: need at least one angle");
    std::vector<double> c, s, ms;
    for (double t : theta) {
        if (std::abs(std::sin(t)) < 1e-12)
            throw ValidationError("frft preset: angle " + std::to_string(t) +
                                  " has sin(theta) = 0, which makes B singular");
        c.push_back(std::cos(t));
        s.push_back(std::sin(t));
        ms.push_back(-std::sin(t));
    }
    return lct(diag(c), diag(s), diag(ms), diag(c));
}

SaftParams fresnel(const RMat& B) {
    const auto n = B.rows();
    return lct(RMat::Identity(n, n), B, RMat::Zero(n, n), RMat::Identity(n, n));
}

SaftParams separable_fresnel(const std::vector<double>& b) {
    if (b.empty()) throw StructuralError("separable_fresnel preset: empty diagonal");
    return fresnel(diag(b));
}

SaftParams lorentz(const std::vector<double>& phi) {
    if (phi.empty()) throw StructuralError("lorentz preset: need at least one angle");
    std::vector<double> ch, sh;
    for (double f : phi) {
        if (std::abs(std::sinh(f)) < 1e-12)
            throw ValidationError("lorentz preset: phi = " + std::to_string(f) +
                                  " gives sinh(phi) = 0, which makes B singular");
        ch.push_back(std::cosh(f));
        sh.push_back(std::sinh(f));
    }
    return lct(diag(ch), diag(sh), diag(sh), diag(ch));
}

SaftParams custom(const SaftMatrices& m) { return build_preset(m, "custom"); }

} // namespace presets

namespace {

// 2n x 2n symplectic blocks [[A, B], [C, D]].
RMat block(const RMat& A, const RMat& B, const RMat& C, const RMat& D) {
    const auto n = A.rows();
    RMat S(2 * n, 2 * n);
    S << A, B, C, D;
    return S;
}

RMat random_symmetric(int n, double scale, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-scale, scale);
    RMat X(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) X(i, j) = u(rng);
    return 0.5 * (X + X.transpose());
}

RMat random_orthogonal(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    RMat X(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) X(i, j) = g(rng);
    Eigen::HouseholderQR<RMat> qr(X);
    return qr.householderQ();
}

} // namespace

SaftParams random_params(int n, std::mt19937_64& rng, const RandomParamsOptions& opt) {
    if (n <= 0) throw StructuralError("random_params: n must be positive");
    std::uniform_real_distribution<double> angle(0.35, 1.25);
    std::uniform_real_distribution<double> mag(0.75, 1.35);
    std::uniform_real_distribution<double> off(-opt.max_offset, opt.max_offset);
    std::bernoulli_distribution flip(0.5);
    const RMat I = RMat::Identity(n, n);
    const RMat Z = RMat::Zero(n, n);

    for (int attempt = 0; attempt < 10000; ++attempt) {
        RMat cosd = Z, sind = Z, scale = Z, iscale = Z;
        for (int i = 0; i < n; ++i) {
            double th = angle(rng);
            if (flip(rng)) th = -th;
            cosd(i, i) = std::cos(th);
            sind(i, i) = std::sin(th);
            scale(i, i) = mag(rng);
            iscale(i, i) = 1.0 / scale(i, i);
        }
        const RMat R = random_orthogonal(n, rng);
        RMat S = block(R, Z, Z, R);                          // orthogonal mixing
        S = S * block(cosd, sind, -sind, cosd);              // rotation
        S = S * block(I, random_symmetric(n, 0.4, rng), Z, I);   // free propagation
        S = S * block(I, Z, random_symmetric(n, 0.4, rng), I);   // lens
        S = S * block(scale, Z, Z, iscale);                  // magnification
        S = S * block(R.transpose(), Z, Z, R.transpose());

        SaftMatrices m;
        m.A = S.topLeftCorner(n, n);
        m.B = S.topRightCorner(n, n);
        m.C = S.bottomLeftCorner(n, n);
        m.D = S.bottomRightCorner(n, n);
        m.P = RVec::Zero(n);
        m.Q = RVec::Zero(n);
        if (opt.offsets) {
            for (int i = 0; i < n; ++i) {
                m.P[i] = off(rng);
                m.Q[i] = off(rng);
            }
        }
        const double det = m.B.determinant();
        if (std::abs(det) < opt.min_abs_det_b) continue;
        const RMat binv = m.B.inverse();
        if ((binv * m.A).cwiseAbs().maxCoeff() > opt.max_chirp_norm) continue;
        if ((m.D * binv).cwiseAbs().maxCoeff() > opt.max_modulation_norm) continue;
        if ((binv * m.P).cwiseAbs().maxCoeff() > opt.max_input_shift) continue;
        return SaftParams::from_matrices(std::move(m), 1e-12);
    }
    throw ValidationError("random_params: failed to draw parameters within bounds");
}

} // namespace saftlab
