#include "saftlab/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace saftlab {

namespace {

// Bareiss fraction-free elimination; exact for integer matrices whose
// intermediate minors fit in 128 bits.
std::int64_t int_det(const IMat& M) {
    const auto n = M.rows();
    if (n == 0) return 1;
    std::vector<std::vector<__int128>> a(static_cast<std::size_t>(n), std::vector<__int128>(static_cast<std::size_t>(n)));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a[i][j] = M(i, j);
    __int128 prev = 1;
    int sign = 1;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            Eigen::Index p = k + 1;
            while (p < n && a[p][k] == 0) ++p;
            if (p == n) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (Eigen::Index i = k + 1; i < n; ++i) {
            for (Eigen::Index j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        }
        prev = a[k][k];
    }
    return static_cast<std::int64_t>(sign * a[n - 1][n - 1]);
}

IMat minor(const IMat& M, Eigen::Index row, Eigen::Index col) {
    const auto n = M.rows();
    IMat out(n - 1, n - 1);
    for (Eigen::Index i = 0, oi = 0; i < n; ++i) {
        if (i == row) continue;
        for (Eigen::Index j = 0, oj = 0; j < n; ++j) {
            if (j == col) continue;
            out(oi, oj++) = M(i, j);
        }
        ++oi;
    }
    return out;
}

// adj(M) with M adj(M) = det(M) I.
IMat adjugate(const IMat& M) {
    const auto n = M.rows();
    IMat adj(n, n);
    if (n == 1) {
        adj(0, 0) = 1;
        return adj;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const std::int64_t c = int_det(minor(M, i, j));
            adj(j, i) = ((i + j) % 2 == 0) ? c : -c;
        }
    return adj;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

struct SideData {
    IMat L;        // M or M^T
    IMat adj;
    std::int64_t det = 0;
};

SideData side_data(const IMat& L) { return {L, adjugate(L), int_det(L)}; }

// Z^n cap L [0,1)^n: k is inside iff 0 <= (adj k)_i / det < 1 for all i.
std::vector<IntVec> representatives(const SideData& s) {
    const auto n = s.L.rows();
    IntVec lo(static_cast<std::size_t>(n), 0), hi(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const std::int64_t v = s.L(i, j);
            if (v < 0) lo[i] += v;
            else hi[i] += v;
        }
    }
    std::vector<IntVec> out;
    IntVec k = lo;
    while (true) {
        bool inside = true;
        for (Eigen::Index i = 0; i < n && inside; ++i) {
            std::int64_t num = 0;
            for (Eigen::Index j = 0; j < n; ++j) num += s.adj(i, j) * k[j];
            if (s.det < 0) num = -num;
            const std::int64_t den = std::abs(s.det);
            inside = num >= 0 && num < den;
        }
        if (inside) out.push_back(k);
        Eigen::Index a = n - 1;
        while (a >= 0) {
            if (++k[a] <= hi[a]) break;
            k[a] = lo[a];
            --a;
        }
        if (a < 0) break;
    }
    std::sort(out.begin(), out.end());
    // The zero vector is always a representative and sorts first only when all
    // others are non-negative, so move it to the front explicitly.
    const IntVec zero(static_cast<std::size_t>(n), 0);
    auto it = std::find(out.begin(), out.end(), zero);
    if (it != out.end()) std::rotate(out.begin(), it, it + 1);
    return out;
}

CosetIndex decompose_with(const SideData& s, const std::vector<IntVec>& reps, const IntVec& k) {
    const auto n = s.L.rows();
    if (static_cast<Eigen::Index>(k.size()) != n) throw StructuralError("decompose: dimension mismatch");
    CosetIndex ci;
    ci.r.assign(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::int64_t num = 0;
        for (Eigen::Index j = 0; j < n; ++j) num += s.adj(i, j) * k[j];
        ci.r[i] = floor_div(num, s.det);
    }
    IntVec rem = k;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) rem[i] -= s.L(i, j) * ci.r[j];
    auto it = std::lower_bound(reps.begin() + 1, reps.end(), rem);
    if (rem == reps.front()) {
        ci.j = 0;
    } else if (it != reps.end() && *it == rem) {
        ci.j = static_cast<std::size_t>(it - reps.begin());
    } else {
        throw StructuralError("decompose: remainder is not a coset representative");
    }
    return ci;
}

} // namespace

SamplingLattice build_lattice(const IMat& M) {
    if (M.rows() == 0 || M.rows() != M.cols()) throw StructuralError("sampling matrix must be square and non-empty");
    const std::int64_t det = int_det(M);
    if (det == 0) throw ValidationError("sampling matrix is singular");
    SamplingLattice lat;
    lat.M = M;
    lat.m = std::abs(det);
    lat.gamma = representatives(side_data(M));
    lat.eta = representatives(side_data(M.transpose()));
    if (static_cast<std::int64_t>(lat.gamma.size()) != lat.m || static_cast<std::int64_t>(lat.eta.size()) != lat.m)
        throw StructuralError("coset enumeration did not produce |det M| representatives");
    return lat;
}

CosetIndex decompose(const SamplingLattice& lat, const IntVec& k, LatticeSide side) {
    const bool mt = side == LatticeSide::MT;
    const auto s = side_data(mt ? IMat(lat.M.transpose()) : lat.M);
    const auto& reps = mt ? lat.eta : lat.gamma;
    return decompose_with(s, reps, k);
}

IntVec compose(const SamplingLattice& lat, const IntVec& r, std::size_t j, LatticeSide side) {
    const auto n = lat.n();
    if (static_cast<int>(r.size()) != n) throw StructuralError("compose: dimension mismatch");
    const bool mt = side == LatticeSide::MT;
    const auto& reps = mt ? lat.eta : lat.gamma;
    if (j >= reps.size()) throw StructuralError("compose: coset index out of range");
    IntVec k = reps[j];
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < n; ++c) k[i] += (mt ? lat.M(c, i) : lat.M(i, c)) * r[c];
    return k;
}

std::vector<SeqFn> split_sequence(const SamplingLattice& lat, const SeqFn& s) {
    if (s.n() != lat.n()) throw StructuralError("split_sequence: dimension mismatch");
    const auto sd = side_data(lat.M.transpose());
    std::vector<SeqFn> parts(static_cast<std::size_t>(lat.m), SeqFn(lat.n()));
    for (const auto& [k, v] : s.entries()) {
        const auto ci = decompose_with(sd, lat.eta, k);
        parts[ci.j].set(ci.r, v);
    }
    return parts;
}

SeqFn merge_sequences(const SamplingLattice& lat, const std::vector<SeqFn>& parts) {
    if (static_cast<std::int64_t>(parts.size()) != lat.m) throw StructuralError("merge_sequences: need m parts");
    SeqFn out(lat.n());
    for (std::size_t j = 0; j < parts.size(); ++j) {
        if (parts[j].n() != lat.n()) throw StructuralError("merge_sequences: dimension mismatch");
        for (const auto& [r, v] : parts[j].entries()) out.set(compose(lat, r, j), v);
    }
    return out;
}

} // namespace saftlab
