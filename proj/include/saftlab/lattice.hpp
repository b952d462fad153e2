#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "saftlab/grid.hpp"
#include "saftlab/types.hpp"

namespace saftlab {

enum class LatticeSide { M, MT };

/// Integer sampling lattice with coset representatives.
///
/// `gamma` enumerates Z^n cap M [0,1)^n (representatives of Z^n / M Z^n) and
/// `eta` does the same for M^T. Both start with the zero vector; the rest are
/// in lexicographic order.
struct SamplingLattice {
    IMat M;
    std::int64_t m = 0;
    std::vector<IntVec> gamma;
    std::vector<IntVec> eta;

    int n() const { return static_cast<int>(M.rows()); }
    RMat M_real() const { return M.cast<double>(); }
};

SamplingLattice build_lattice(const IMat& M);

struct CosetIndex {
    IntVec r;
    std::size_t j = 0;
};

/// k = M^T r + eta_j (side MT) or k = M r + gamma_j (side M). Unique.
CosetIndex decompose(const SamplingLattice& lat, const IntVec& k, LatticeSide side = LatticeSide::MT);

/// M^T r + eta_j (or M r + gamma_j).
IntVec compose(const SamplingLattice& lat, const IntVec& r, std::size_t j, LatticeSide side = LatticeSide::MT);

/// s_l(r) = s(M^T r + eta_l), l = 0..m-1.
std::vector<SeqFn> split_sequence(const SamplingLattice& lat, const SeqFn& s);

/// Inverse of split_sequence.
SeqFn merge_sequences(const SamplingLattice& lat, const std::vector<SeqFn>& parts);

} // namespace saftlab
