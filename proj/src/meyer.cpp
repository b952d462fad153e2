#include "saftlab/meyer.hpp"

#include <array>
#include <cmath>

#include "saftlab/types.hpp"

namespace saftlab::meyer {

namespace {

constexpr int kOrder = 16;

struct GaussLegendre {
    std::array<double, kOrder> x{}, w{};
    GaussLegendre() {
        for (int i = 0; i < kOrder; ++i) {
            double z = std::cos(kPi * (i + 0.75) / (kOrder + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = z;
                for (int k = 2; k <= kOrder; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = kOrder * (z * p1 - p0) / (z * z - 1.0);
                const double dz = p1 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

const GaussLegendre& rule() {
    static const GaussLegendre gl;
    return gl;
}

} // namespace

double v(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double x2 = x * x;
    return x2 * x2 * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)));
}

double psi(double x) {
    const double a = std::abs(x);
    if (a <= 1.0 / 3.0) return 1.0;
    if (a >= 2.0 / 3.0) return 0.0;
    return std::cos(v(3.0 * a - 1.0) * kPi / 2.0);
}

double psi_check(double t) {
    const double a = std::abs(t);
    // 2 int_0^{1/3} cos(2 pi t w) dw
    double flat = a < 1e-12 ? 2.0 / 3.0 : std::sin(kTwoPi * a / 3.0) / (kPi * a);
    const auto& gl = rule();
    const int panels = 4 + static_cast<int>(std::ceil(a / 2.0));
    const double lo = 1.0 / 3.0;
    const double width = (1.0 / 3.0) / panels;
    double band = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double c = lo + (p + 0.5) * width;
        double acc = 0.0;
        for (int i = 0; i < kOrder; ++i) {
            const double w = c + 0.5 * width * gl.x[i];
            acc += gl.w[i] * psi(w) * std::cos(kTwoPi * a * w);
        }
        band += 0.5 * width * acc;
    }
    return flat + 2.0 * band;
}

} // namespace saftlab::meyer
