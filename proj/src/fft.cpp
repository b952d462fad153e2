#include "saftlab/fft.hpp"

#include <unordered_map>

#include "saftlab/parallel.hpp"

namespace saftlab::fft {

namespace {

// exp(sign 2 pi i k / N) for k in [0, N), computed from the exact phase.
const std::vector<cplx>& roots(std::size_t N, int sign) {
    thread_local std::unordered_map<std::size_t, std::vector<cplx>> cache[2];
    auto& table = cache[sign > 0 ? 1 : 0][N];
    if (table.size() != N) {
        table.resize(N);
        for (std::size_t k = 0; k < N; ++k)
            table[k] = unit_phase(sign * kTwoPi * static_cast<double>(k) / static_cast<double>(N));
    }
    return table;
}

void radix2(std::span<cplx> x, int sign) {
    const std::size_t N = x.size();
    for (std::size_t i = 1, j = 0; i < N; ++i) {
        std::size_t bit = N >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    const auto& w = roots(N, sign);
    for (std::size_t len = 2; len <= N; len <<= 1) {
        const std::size_t step = N / len;
        const std::size_t half = len / 2;
        for (std::size_t i = 0; i < N; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const cplx t = w[k * step] * x[i + k + half];
                x[i + k + half] = x[i + k] - t;
                x[i + k] += t;
            }
        }
    }
}

void direct(std::span<cplx> x, int sign) {
    const std::size_t N = x.size();
    const auto& w = roots(N, sign);
    std::vector<cplx> out(N);
    for (std::size_t j = 0; j < N; ++j) {
        cplx acc{};
        for (std::size_t k = 0; k < N; ++k) acc += x[k] * w[(k * j) % N];
        out[j] = acc;
    }
    std::copy(out.begin(), out.end(), x.begin());
}

} // namespace

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void transform(std::span<cplx> x, int sign) {
    if (x.size() <= 1) return;
    if (is_pow2(x.size())) radix2(x, sign);
    else direct(x, sign);
}

void for_each_line(std::span<cplx> data, const std::vector<std::size_t>& shape, std::size_t axis,
                   const std::function<void(std::span<cplx>)>& line) {
    const std::size_t N = shape[axis];
    std::size_t inner = 1;
    for (std::size_t a = axis + 1; a < shape.size(); ++a) inner *= shape[a];
    const std::size_t lines = N == 0 ? 0 : data.size() / N;
    parallel_for(lines, [&](std::size_t li) {
        const std::size_t outer = li / inner;
        const std::size_t in = li % inner;
        const std::size_t base = outer * N * inner + in;
        std::vector<cplx> buf(N);
        for (std::size_t k = 0; k < N; ++k) buf[k] = data[base + k * inner];
        line(buf);
        for (std::size_t k = 0; k < N; ++k) data[base + k * inner] = buf[k];
    });
}

std::vector<cplx> rect_dft(std::span<const cplx> v, const std::vector<std::size_t>& shape,
                           const std::vector<double>& origin, const std::vector<double>& spacing,
                           const std::vector<double>& out_origin, int sign) {
    std::vector<cplx> data(v.begin(), v.end());
    for (std::size_t a = 0; a < shape.size(); ++a) {
        const std::size_t N = shape[a];
        const double h = spacing[a];
        const double dz = 1.0 / (static_cast<double>(N) * h);
        const double uc = origin[a] + 0.5 * h;        // first sample
        const double zc = out_origin[a] + 0.5 * dz;   // first frequency
        // u_k zeta_j = uc zeta_j + k h zc + k j / N
        std::vector<cplx> pre(N), post(N);
        for (std::size_t k = 0; k < N; ++k) {
            const double kk = static_cast<double>(k);
            pre[k] = unit_phase(sign * kTwoPi * kk * h * zc);
            post[k] = h * unit_phase(sign * kTwoPi * uc * (zc + kk * dz));
        }
        for_each_line(data, shape, a, [&](std::span<cplx> line) {
            for (std::size_t k = 0; k < N; ++k) line[k] *= pre[k];
            transform(line, sign);
            for (std::size_t k = 0; k < N; ++k) line[k] *= post[k];
        });
    }
    return data;
}

} // namespace saftlab::fft
