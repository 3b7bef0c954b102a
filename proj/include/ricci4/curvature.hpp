#pragma once

// Pointwise algebra of 4-dimensional curvature tensors in an orthonormal frame.
//
// A curvature-type tensor is stored with all 256 frame components; the
// antisymmetry in the first and last index pairs makes it equivalent to a
// symmetric 6x6 operator on 2-forms, and that operator form drives the
// self-dual / anti-self-dual machinery.  The orthogonal decomposition used
// throughout is
//
//     Riem = W + (1/2) E (x) g + (R/24) g (x) g
//
// with (x) the Kulkarni-Nomizu product, E the trace-free Ricci tensor and
// R the scalar curvature.  Ricci is contracted as Ric_{jl} = sum_i R_{ijil},
// so the unit round 4-sphere has Ric = 3g and R = 12.

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "ricci4/linalg.hpp"

namespace ricci4 {

// ===========================================================================
// curvature-type tensors
// ===========================================================================

struct CurvTensor {
    std::array<Real, 256> v{};

    Real& operator()(int i, int j, int k, int l) {
        return v[static_cast<size_t>(((i * 4 + j) * 4 + k) * 4 + l)];
    }
    Real operator()(int i, int j, int k, int l) const {
        return v[static_cast<size_t>(((i * 4 + j) * 4 + k) * 4 + l)];
    }

    CurvTensor& operator+=(const CurvTensor& o) { for (size_t k = 0; k < v.size(); ++k) v[k] += o.v[k]; return *this; }
    CurvTensor& operator-=(const CurvTensor& o) { for (size_t k = 0; k < v.size(); ++k) v[k] -= o.v[k]; return *this; }
    CurvTensor& operator*=(Real s)              { for (auto& x : v) x *= s; return *this; }

    friend CurvTensor operator+(CurvTensor a, const CurvTensor& b) { return a += b; }
    friend CurvTensor operator-(CurvTensor a, const CurvTensor& b) { return a -= b; }
    friend CurvTensor operator*(Real s, CurvTensor a)              { return a *= s; }

    /// Full contraction sum_{ijkl} T_{ijkl}^2.
    [[nodiscard]] Real norm2() const {
        Real s = 0;
        for (auto x : v) s += x * x;
        return s;
    }

    [[nodiscard]] Real max_abs() const {
        Real m = 0;
        for (auto x : v) m = std::max(m, std::abs(x));
        return m;
    }
};

/// Kulkarni-Nomizu product of two symmetric 2-tensors:
/// (h (x) k)_{ijkl} = h_ik k_jl + h_jl k_ik - h_il k_jk - h_jk k_il.
inline CurvTensor kulkarni_nomizu(const Sym2& h, const Sym2& k) {
    CurvTensor t;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int kk = 0; kk < 4; ++kk)
                for (int l = 0; l < 4; ++l)
                    t(i, j, kk, l) = h(i, kk) * k(j, l) + h(j, l) * k(i, kk)
                                   - h(i, l) * k(j, kk) - h(j, kk) * k(i, l);
    return t;
}

/// Ricci contraction Ric_{jl} = sum_i T_{ijil}.
inline Sym2 ricci_of(const CurvTensor& t) {
    Sym2 ric{};
    for (int j = 0; j < 4; ++j)
        for (int l = 0; l < 4; ++l) {
            Real s = 0;
            for (int i = 0; i < 4; ++i) s += t(i, j, i, l);
            ric(j, l) = s;
        }
    return ric;
}

/// Project onto the symmetry class of curvature tensors: antisymmetric in
/// (ij) and (kl), symmetric under pair exchange.  Idempotent; used to clean
/// finite-difference output.
inline CurvTensor enforce_curvature_symmetries(const CurvTensor& t) {
    CurvTensor p;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l)
                    p(i, j, k, l) = (t(i, j, k, l) - t(j, i, k, l) - t(i, j, l, k) + t(j, i, l, k)
                                   + t(k, l, i, j) - t(l, k, i, j) - t(k, l, j, i) + t(l, k, j, i)) / 8.0;
    return p;
}

// ===========================================================================
// 2-form operator picture
// ===========================================================================

/// Index pairs of the ordered 2-form basis e1^e2, e1^e3, e1^e4, e2^e3,
/// e2^e4, e3^e4 (0-indexed).
inline constexpr std::array<std::array<int, 2>, 6> lambda2_pairs{{
    {{0, 1}}, {{0, 2}}, {{0, 3}}, {{1, 2}}, {{1, 3}}, {{2, 3}},
}};

/// Hodge star on 2-forms in the basis above, for the orientation e1^e2^e3^e4.
inline Mat6 hodge_star_matrix() {
    Mat6 s{};
    s(0, 5) = s(5, 0) = 1.0;
    s(1, 4) = s(4, 1) = -1.0;
    s(2, 3) = s(3, 2) = 1.0;
    return s;
}

/// Curvature tensor as a symmetric operator on 2-forms: M_PQ = T(i_P, j_P, i_Q, j_Q).
inline Mat6 to_operator(const CurvTensor& t) {
    Mat6 m;
    for (int p = 0; p < 6; ++p)
        for (int q = 0; q < 6; ++q)
            m(p, q) = t(lambda2_pairs[p][0], lambda2_pairs[p][1],
                        lambda2_pairs[q][0], lambda2_pairs[q][1]);
    return m;
}

/// Inverse of to_operator for symmetric m; the pair symmetry of the result
/// is inherited from the symmetry of m.
inline CurvTensor from_operator(const Mat6& m) {
    CurvTensor t;
    for (int p = 0; p < 6; ++p) {
        const int i = lambda2_pairs[p][0], j = lambda2_pairs[p][1];
        for (int q = 0; q < 6; ++q) {
            const int k = lambda2_pairs[q][0], l = lambda2_pairs[q][1];
            const Real x = m(p, q);
            t(i, j, k, l) = x;
            t(j, i, k, l) = -x;
            t(i, j, l, k) = -x;
            t(j, i, l, k) = x;
        }
    }
    return t;
}

// ===========================================================================
// orthogonal decomposition
// ===========================================================================

/// Riem = weyl + (1/2) e (x) g + (scalar/24) g (x) g, orthonormal-frame components.
struct CurvDecomp {
    CurvTensor weyl;   ///< fully trace-free part
    Sym2 e;            ///< trace-free Ricci, E = Ric - (R/4) g
    Real scalar = 0;   ///< scalar curvature R
};

/// Decompose a curvature tensor given in orthonormal-frame components.
inline CurvDecomp decompose(const CurvTensor& riem) {
    CurvDecomp d;
    const Sym2 ric = ricci_of(riem);
    d.scalar = ric.trace();
    d.e = ric;
    for (int i = 0; i < 4; ++i) d.e(i, i) -= d.scalar / 4.0;

    const Sym2 id = Sym2::identity();
    d.weyl = riem;
    d.weyl -= 0.5 * kulkarni_nomizu(d.e, id);
    d.weyl -= (d.scalar / 24.0) * kulkarni_nomizu(id, id);
    return d;
}

/// Decompose coordinate components of Riem against the metric g at the same
/// point: the tensor is pulled back to the orthonormal frame given by the
/// inverse-transpose Cholesky factor of g.  Throws std::invalid_argument
/// ("degenerate metric") when g is not positive definite.
inline CurvDecomp decompose(const CurvTensor& riem, const Mat4& g) {
    Mat4 L;
    if (!cholesky(g, L)) throw std::invalid_argument("degenerate metric");
    const Mat4 f = transpose(invert_lower(L));  // frame vectors as columns
    CurvTensor fr;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    Real s = 0;
                    for (int i = 0; i < 4; ++i)
                        for (int j = 0; j < 4; ++j)
                            for (int k = 0; k < 4; ++k)
                                for (int l = 0; l < 4; ++l)
                                    s += f(i, a) * f(j, b) * f(k, c) * f(l, d) * riem(i, j, k, l);
                    fr(a, b, c, d) = s;
                }
    return decompose(fr);
}

/// Rebuild the full curvature tensor from its decomposition.
inline CurvTensor reconstruct(const CurvDecomp& d) {
    const Sym2 id = Sym2::identity();
    CurvTensor t = d.weyl;
    t += 0.5 * kulkarni_nomizu(d.e, id);
    t += (d.scalar / 24.0) * kulkarni_nomizu(id, id);
    return t;
}

/// |E|^2 = sum_ij E_ij^2.
inline Real e_norm2(const Sym2& e) { return e.norm2(); }

/// Full-tensor norm of the curvature through the decomposition:
/// |Riem|^2 = |W|^2 + 2|E|^2 + R^2/6 (the three parts are orthogonal).
inline Real riem_norm2(const CurvDecomp& d) {
    return d.weyl.norm2() + 2.0 * d.e.norm2() + d.scalar * d.scalar / 6.0;
}

/// Scale-invariant pinching quantity (|W|^2 + 2|E|^2) / R^2.
/// Throws std::domain_error when the scalar curvature vanishes.
inline Real weak_pinching(const CurvDecomp& d) {
    if (d.scalar == 0.0) throw std::domain_error("undefined pinching (zero scalar curvature)");
    return (d.weyl.norm2() + 2.0 * d.e.norm2()) / (d.scalar * d.scalar);
}

// ===========================================================================
// self-dual / anti-self-dual split
// ===========================================================================

/// Orthonormal eigenbasis of the Hodge star: three self-dual columns
/// (eigenvalue +1) and three anti-self-dual columns (eigenvalue -1),
/// expressed in the ordered 2-form basis.
inline void sd_asd_basis(std::array<std::array<Real, 6>, 3>& plus,
                         std::array<std::array<Real, 6>, 3>& minus) {
    const Real s = 1.0 / std::sqrt(2.0);
    plus  = {{{{s, 0, 0, 0, 0, s}}, {{0, s, 0, 0, -s, 0}}, {{0, 0, s, s, 0, 0}}}};
    minus = {{{{s, 0, 0, 0, 0, -s}}, {{0, s, 0, 0, s, 0}}, {{0, 0, s, -s, 0, 0}}}};
}

/// 3x3 blocks of a Weyl-type tensor on the self-dual and anti-self-dual
/// subspaces.  The block norms satisfy |Wp|_F^2 + |Wm|_F^2 = |W|^2 / 4.
/// `orientation` = -1 evaluates the split for the reversed orientation,
/// which exchanges the two blocks.  Throws std::invalid_argument
/// ("not a Weyl tensor") if the input has a Ricci contraction above 1e-8
/// relative to its size.
inline std::pair<Mat3, Mat3> sd_asd_split(const CurvTensor& w, int orientation = +1) {
    const Real scale = std::sqrt(w.norm2()) + 1.0;
    if (ricci_of(w).max_abs() > 1e-8 * scale) throw std::invalid_argument("not a Weyl tensor");

    const Mat6 m = to_operator(w);
    std::array<std::array<Real, 6>, 3> up, um;
    sd_asd_basis(up, um);

    auto block = [&m](const std::array<std::array<Real, 6>, 3>& ua,
                      const std::array<std::array<Real, 6>, 3>& ub) {
        Mat3 blk;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                Real s = 0;
                for (int p = 0; p < 6; ++p)
                    for (int q = 0; q < 6; ++q) s += ua[a][p] * m(p, q) * ub[b][q];
                blk(a, b) = s;
            }
        return blk;
    };

    Mat3 wp = block(up, up);
    Mat3 wm = block(um, um);
    if (orientation < 0) std::swap(wp, wm);
    return {wp, wm};
}

/// Operator-normalized Weyl norm: |W|_op^2 = |W|^2 / 4 = |Wp|_F^2 + |Wm|_F^2.
inline Real weyl_op_norm2(const CurvTensor& w) { return 0.25 * w.norm2(); }

/// Determinant of a self-dual or anti-self-dual 3x3 block.
inline Real det_w(const Mat3& block) { return det3(block); }

// ===========================================================================
// cubic invariants
// ===========================================================================

/// tr E^3 = sum_ijk E_ij E_jk E_ki.
inline Real tr_e3(const Sym2& e) {
    Real s = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) s += e(i, j) * e(j, k) * e(k, i);
    return s;
}

/// W_ijkl E_ik E_jl.
inline Real wee(const CurvTensor& w, const Sym2& e) {
    Real s = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) s += w(i, j, k, l) * e(i, k) * e(j, l);
    return s;
}

/// Pointwise integrand whose nonnegativity drives the curvature-monotonicity
/// arguments: G = 6 tr E^3 + R|E|^2 - 9 WEE - 108(det Wp + det Wm) + (3/4) R|W|^2.
inline Real integrand_g(const CurvDecomp& d) {
    const auto [wp, wm] = sd_asd_split(d.weyl);
    return 6.0 * tr_e3(d.e) + d.scalar * d.e.norm2() - 9.0 * wee(d.weyl, d.e)
         - 108.0 * (det_w(wp) + det_w(wm)) + 0.75 * d.scalar * d.weyl.norm2();
}

// ===========================================================================
// Schouten tensor and sigma invariants
// ===========================================================================

/// Schouten-type tensor A = Ric - (R/6) g = E + (R/12) g, frame components.
inline Sym2 schouten(const CurvDecomp& d) {
    Sym2 a = d.e;
    for (int i = 0; i < 4; ++i) a(i, i) += d.scalar / 12.0;
    return a;
}

/// k-th elementary symmetric function of the eigenvalues of g^{-1} s.
/// Throws std::invalid_argument on a non-symmetric input or a degenerate metric.
inline Real sigma_k(const Sym2& s, const Mat4& g, int k) {
    const Real scale = s.max_abs() + 1.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (std::abs(s(i, j) - s(j, i)) > 1e-12 * scale)
                throw std::invalid_argument("sigma_k: tensor is not symmetric");
    Mat4 L;
    if (!cholesky(g, L)) throw std::invalid_argument("degenerate metric");
    const Mat4 Li = invert_lower(L);
    // g^{-1} s is similar to the symmetric matrix L^{-1} s L^{-T}
    const Mat4 m = matmul(matmul(Li, s), transpose(Li));
    return elementary_symmetric<4>(sym_eigenvalues(m), k);
}

inline Real sigma_k(const Sym2& s, int k) { return sigma_k(s, Mat4::identity(), k); }

/// sigma_2 of the Schouten-type tensor in closed form: R^2/24 - |E|^2/2.
inline Real sigma2_closed(const CurvDecomp& d) {
    return d.scalar * d.scalar / 24.0 - 0.5 * d.e.norm2();
}

/// Residual of the fully nonlinear curvature equation sigma_2(A) = |W|_op^2 + lambda.
inline Real sigma2_pde_residual(const CurvDecomp& d, Real lambda) {
    return sigma2_closed(d) - 0.25 * d.weyl.norm2() - lambda;
}

// ===========================================================================
// Bach tensor assembly
// ===========================================================================

/// B_ij = (div div W)_ij + (1/2) Ric^kl W_kijl, from a precomputed double
/// divergence.  The result is explicitly symmetrized to absorb
/// finite-difference asymmetry in ddw.
inline Sym2 bach_assemble(const Sym2& ddw, const Sym2& ric, const CurvTensor& w) {
    Sym2 b = ddw;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            Real s = 0;
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) s += ric(k, l) * w(k, i, j, l);
            b(i, j) += 0.5 * s;
        }
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const Real avg = 0.5 * (b(i, j) + b(j, i));
            b(i, j) = b(j, i) = avg;
        }
    return b;
}

}  // namespace ricci4
