#pragma once

// Covariant derivative norms of the curvature parts along a squashed profile.
//
// The orthonormal frame e0 = dr, e1 = a s1, e2 = b s2, e3 = b s3 has
// connection 1-forms determined by six scalar coefficients; for radial
// tensor fields the covariant derivative closes on frame components, so
// |grad W|^2, |grad E|^2 and |grad R|^2 reduce to radial derivatives plus
// algebraic rotation terms.  This is the grid-native route; the chart-based
// finite-difference oracle provides the independent cross-check.

#include <vector>

#include "ricci4/curvature.hpp"
#include "ricci4/profile.hpp"

namespace ricci4 {

/// Connection coefficients at one node: omega_{mu nu}(e_alpha) as a dense
/// [alpha][mu][nu] table, antisymmetric in (mu, nu).
struct FrameConnection {
    std::array<std::array<std::array<Real, 4>, 4>, 4> om{};

    static FrameConnection at(const SquashedProfile& p, int i) {
        const auto s = detail::squashed_local(p, i);
        const Real alpha = s.a / (s.b * s.b);
        FrameConnection c;
        auto set = [&c](int al, int mu, int nu, Real x) {
            c.om[static_cast<size_t>(al)][static_cast<size_t>(mu)][static_cast<size_t>(nu)] = x;
            c.om[static_cast<size_t>(al)][static_cast<size_t>(nu)][static_cast<size_t>(mu)] = -x;
        };
        set(1, 1, 0, s.da / s.a);        // omega_{10}(e1)
        set(2, 2, 0, s.db / s.b);        // omega_{20}(e2)
        set(3, 3, 0, s.db / s.b);        // omega_{30}(e3)
        set(1, 2, 3, 2.0 / s.a - alpha); // omega_{23}(e1)
        set(2, 3, 1, alpha);             // omega_{31}(e2)
        set(3, 1, 2, alpha);             // omega_{12}(e3)
        return c;
    }
};

namespace detail {

/// |grad T|^2 for a radial symmetric 2-tensor field given by its frame
/// components at a node and their radial derivatives.
inline Real grad_norm2_sym2(const FrameConnection& c, const Sym2& t, const Sym2& dt) {
    Real total = 0;
    for (int al = 0; al < 4; ++al)
        for (int be = 0; be < 4; ++be)
            for (int ga = 0; ga < 4; ++ga) {
                Real v = (al == 0) ? dt(be, ga) : 0.0;
                for (int mu = 0; mu < 4; ++mu)
                    v -= c.om[static_cast<size_t>(al)][static_cast<size_t>(mu)][static_cast<size_t>(be)] * t(mu, ga)
                       + c.om[static_cast<size_t>(al)][static_cast<size_t>(mu)][static_cast<size_t>(ga)] * t(be, mu);
                total += v * v;
            }
    return total;
}

/// |grad T|^2 for a radial curvature-type tensor field.
inline Real grad_norm2_curv(const FrameConnection& c, const CurvTensor& t, const CurvTensor& dt) {
    Real total = 0;
    for (int al = 0; al < 4; ++al)
        for (int b1 = 0; b1 < 4; ++b1)
            for (int b2 = 0; b2 < 4; ++b2)
                for (int b3 = 0; b3 < 4; ++b3)
                    for (int b4 = 0; b4 < 4; ++b4) {
                        Real v = (al == 0) ? dt(b1, b2, b3, b4) : 0.0;
                        for (int mu = 0; mu < 4; ++mu)
                            v -= c.om[static_cast<size_t>(al)][static_cast<size_t>(mu)][static_cast<size_t>(b1)] * t(mu, b2, b3, b4)
                               + c.om[static_cast<size_t>(al)][static_cast<size_t>(mu)][static_cast<size_t>(b2)] * t(b1, mu, b3, b4)
                               + c.om[static_cast<size_t>(al)][static_cast<size_t>(mu)][static_cast<size_t>(b3)] * t(b1, b2, mu, b4)
                               + c.om[static_cast<size_t>(al)][static_cast<size_t>(mu)][static_cast<size_t>(b4)] * t(b1, b2, b3, mu);
                        total += v * v;
                    }
    return total;
}

}  // namespace detail

/// Node arrays of |grad W|^2, |grad E|^2 and |grad R|^2; pole values by even
/// extrapolation.  Accepts precomputed node decompositions to share work.
struct GradientNorms {
    std::vector<Real> grad_w2, grad_e2, grad_r2;
};

inline GradientNorms profile_grad_norms(const SquashedProfile& p,
                                        const std::vector<CurvDecomp>& nodes) {
    const int n = p.n();
    const Real h = p.h();
    GradientNorms g;
    g.grad_w2.assign(static_cast<size_t>(n), 0.0);
    g.grad_e2.assign(static_cast<size_t>(n), 0.0);
    g.grad_r2.assign(static_cast<size_t>(n), 0.0);

    // radial derivative of each frame component; curvature components are
    // even across the poles
    auto comp_d1 = [&](auto&& get, int i) {
        Real s = 0;
        for (int k = 0; k < 7; ++k) {
            int idx = i + k - 3;
            if (idx < 0) idx = -idx;
            if (idx > n - 1) idx = 2 * (n - 1) - idx;
            s += detail::d1_w[static_cast<size_t>(k)] * get(idx);
        }
        return s / h;
    };

    for (int i = 1; i < n - 1; ++i) {
        const FrameConnection c = FrameConnection::at(p, i);
        const CurvDecomp& d = nodes[static_cast<size_t>(i)];

        Sym2 de;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                de(a, b) = comp_d1([&](int idx) { return nodes[static_cast<size_t>(idx)].e(a, b); }, i);

        CurvTensor dw;
        for (size_t comp = 0; comp < dw.v.size(); ++comp)
            dw.v[comp] = comp_d1([&](int idx) { return nodes[static_cast<size_t>(idx)].weyl.v[comp]; }, i);

        const Real dr = comp_d1([&](int idx) { return nodes[static_cast<size_t>(idx)].scalar; }, i);

        g.grad_e2[static_cast<size_t>(i)] = detail::grad_norm2_sym2(c, d.e, de);
        g.grad_w2[static_cast<size_t>(i)] = detail::grad_norm2_curv(c, d.weyl, dw);
        g.grad_r2[static_cast<size_t>(i)] = dr * dr;
    }

    for (auto* f : {&g.grad_w2, &g.grad_e2, &g.grad_r2}) {
        auto& v = *f;
        v[0] = detail::pole_extrapolate(v[1], v[2], v[3]);
        v[static_cast<size_t>(n - 1)] =
            detail::pole_extrapolate(v[static_cast<size_t>(n - 2)], v[static_cast<size_t>(n - 3)], v[static_cast<size_t>(n - 4)]);
    }
    return g;
}

inline GradientNorms profile_grad_norms(const SquashedProfile& p) {
    return profile_grad_norms(p, curvature_nodes(p));
}

}  // namespace ricci4
