#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "saftlab/types.hpp"

namespace saftlab::fft {

bool is_pow2(std::size_t n);
std::size_t next_pow2(std::size_t n);

/// Unnormalized DFT in place: X_j = sum_k x_k exp(sign 2 pi i k j / N).
/// Radix-2 for power-of-two N, direct O(N^2) otherwise.
void transform(std::span<cplx> x, int sign);

/// Applies `line(buffer)` to every 1-D line along `axis` of a row-major array.
/// Lines are processed in parallel; each line is independent.
void for_each_line(std::span<cplx> data, const std::vector<std::size_t>& shape, std::size_t axis,
                   const std::function<void(std::span<cplx>)>& line);

/// Riemann-sum Fourier transform in rectangular coordinates:
///   G(zeta) = prod(h) sum_u v(u) exp(sign 2 pi i u . zeta),
/// with u_a = origin_a + (k + 1/2) h_a and zeta_a = out_origin_a + (j + 1/2) / (N_a h_a).
/// Exact (no interpolation); separable per axis.
std::vector<cplx> rect_dft(std::span<const cplx> v, const std::vector<std::size_t>& shape,
                           const std::vector<double>& origin, const std::vector<double>& spacing,
                           const std::vector<double>& out_origin, int sign);

} // namespace saftlab::fft
