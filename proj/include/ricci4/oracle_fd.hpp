#pragma once

// Chart-based finite-difference oracle.
//
// Everything here works from a metric sampler alone: curvature, covariant
// gradient norms and the Bach tensor are obtained by central differences of
// the metric in a coordinate chart, with no knowledge of any ansatz.  The
// grid-native closed forms elsewhere in the library are validated against
// this route.  Each top-level evaluation is Richardson-extrapolated from
// steps h and h/2 and reports the step difference as an error bar.
//
// Curvature convention, matching the frame computations:
//   R^rho_{l i j} = d_i Gamma^rho_{jl} - d_j Gamma^rho_{il}
//                 + Gamma^rho_{i lam} Gamma^lam_{jl} - Gamma^rho_{j lam} Gamma^lam_{il},
//   R_{ijkl} = g_{k rho} R^rho_{l i j},
// which gives R_{0101} = +1 on the unit round sphere.

#include <complex>
#include <functional>

#include "ricci4/curvature.hpp"
#include "ricci4/gradients.hpp"
#include "ricci4/profile.hpp"

namespace ricci4 {

/// A coordinate chart: smooth metric samples around a base region, plus the
/// finite-difference step used on it.
struct ChartSampler {
    std::function<Mat4(const Vec4&)> metric;
    Real h = 1e-3;
};

namespace fd {

using Tensor3 = std::array<Real, 64>;  // [i][j][k] -> i*16 + j*4 + k

inline Vec4 shifted(Vec4 x, int mu, Real dx) {
    x[static_cast<size_t>(mu)] += dx;
    return x;
}

/// Christoffel symbols Gamma^rho_{mu nu} at x with step h.
inline Tensor3 christoffel(const ChartSampler& c, const Vec4& x, Real h) {
    std::array<Mat4, 4> dg;
    for (int mu = 0; mu < 4; ++mu) {
        const Mat4 gp = c.metric(shifted(x, mu, h));
        const Mat4 gm = c.metric(shifted(x, mu, -h));
        dg[static_cast<size_t>(mu)] = (1.0 / (2.0 * h)) * (gp - gm);
    }
    const Mat4 ginv = spd_inverse(c.metric(x));

    Tensor3 gam{};
    for (int rho = 0; rho < 4; ++rho)
        for (int mu = 0; mu < 4; ++mu)
            for (int nu = 0; nu < 4; ++nu) {
                Real s = 0;
                for (int sig = 0; sig < 4; ++sig)
                    s += ginv(rho, sig) * (dg[static_cast<size_t>(mu)](sig, nu)
                                         + dg[static_cast<size_t>(nu)](sig, mu)
                                         - dg[static_cast<size_t>(sig)](mu, nu));
                gam[static_cast<size_t>(rho * 16 + mu * 4 + nu)] = 0.5 * s;
            }
    return gam;
}

/// All-lower coordinate Riemann tensor at x with step h.
inline CurvTensor riemann_coord(const ChartSampler& c, const Vec4& x, Real h) {
    std::array<Tensor3, 4> dgam;
    for (int mu = 0; mu < 4; ++mu) {
        const Tensor3 gp = christoffel(c, shifted(x, mu, h), h);
        const Tensor3 gm = christoffel(c, shifted(x, mu, -h), h);
        for (size_t k = 0; k < gp.size(); ++k)
            dgam[static_cast<size_t>(mu)][k] = (gp[k] - gm[k]) / (2.0 * h);
    }
    const Tensor3 gam = christoffel(c, x, h);
    const Mat4 g = c.metric(x);

    auto G = [&gam](int rho, int mu, int nu) { return gam[static_cast<size_t>(rho * 16 + mu * 4 + nu)]; };

    CurvTensor r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) {
                    Real low = 0;  // g_{k rho} R^rho_{l i j}
                    for (int rho = 0; rho < 4; ++rho) {
                        Real s = dgam[static_cast<size_t>(i)][static_cast<size_t>(rho * 16 + j * 4 + l)]
                               - dgam[static_cast<size_t>(j)][static_cast<size_t>(rho * 16 + i * 4 + l)];
                        for (int lam = 0; lam < 4; ++lam)
                            s += G(rho, i, lam) * G(lam, j, l) - G(rho, j, lam) * G(lam, i, l);
                        low += g(k, rho) * s;
                    }
                    r(i, j, k, l) = low;
                }
    return r;
}

/// Orthonormal frame vectors (columns) from the Cholesky factor of g.
inline Mat4 frame_of(const Mat4& g) {
    Mat4 L;
    if (!cholesky(g, L)) throw std::invalid_argument("degenerate metric");
    return transpose(invert_lower(L));
}

/// Pull a rank-4 coordinate tensor back to frame components, one slot at a
/// time so the cost stays at 4 * 4^5 multiplies.
inline CurvTensor frame_pullback4(const CurvTensor& t, const Mat4& f) {
    CurvTensor cur = t, next;
    for (int slot = 0; slot < 4; ++slot) {
        next = CurvTensor{};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int cc = 0; cc < 4; ++cc)
                    for (int d = 0; d < 4; ++d) {
                        // contract the leading slot, rotate it to the back
                        Real s = 0;
                        for (int i = 0; i < 4; ++i) s += f(i, a) * cur(i, b, cc, d);
                        next(b, cc, d, a) = s;
                    }
        cur = next;
    }
    return cur;
}

inline Sym2 frame_pullback2(const Sym2& t, const Mat4& f) {
    Sym2 out{};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            Real s = 0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) s += f(i, a) * f(j, b) * t(i, j);
            out(a, b) = s;
        }
    return out;
}

}  // namespace fd

/// Frame-component Riemann tensor with an error bar: Richardson-extrapolated
/// from steps h and h/2, symmetries enforced, `err` the sup-norm step gap.
struct FdCurvature {
    CurvTensor value;
    Real err = 0;
};

inline FdCurvature riemann_fd(const ChartSampler& c, const Vec4& x) {
    const Mat4 f = fd::frame_of(c.metric(x));
    auto frame_riemann = [&](Real h) {
        return enforce_curvature_symmetries(fd::frame_pullback4(fd::riemann_coord(c, x, h), f));
    };
    const CurvTensor vh = frame_riemann(c.h);
    const CurvTensor vh2 = frame_riemann(c.h / 2.0);
    FdCurvature out;
    out.value = (1.0 / 3.0) * (4.0 * vh2 - vh);
    out.err = (vh - vh2).max_abs() / 3.0;
    return out;
}

/// Curvature decomposition at a chart point, via the oracle route.
inline CurvDecomp decomp_fd(const ChartSampler& c, const Vec4& x) {
    return decompose(riemann_fd(c, x).value);
}

// ===========================================================================
// covariant gradients
// ===========================================================================

namespace fd {

/// Coordinate curvature parts at a point: all-lower Weyl and trace-free
/// Ricci, the scalar, and the metric, for one fixed step h.
struct CoordParts {
    CurvTensor weyl;
    Sym2 e;
    Real scalar = 0;
    Mat4 g;
};

inline CoordParts coord_parts(const ChartSampler& c, const Vec4& x, Real h) {
    CoordParts p;
    p.g = c.metric(x);
    const CurvTensor riem = riemann_coord(c, x, h);
    const Mat4 ginv = spd_inverse(p.g);

    Sym2 ric{};
    for (int j = 0; j < 4; ++j)
        for (int l = 0; l < 4; ++l) {
            Real s = 0;
            for (int i = 0; i < 4; ++i)
                for (int k = 0; k < 4; ++k) s += ginv(i, k) * riem(i, j, k, l);
            ric(j, l) = s;
        }
    Real scal = 0;
    for (int j = 0; j < 4; ++j)
        for (int l = 0; l < 4; ++l) scal += ginv(j, l) * ric(j, l);

    p.scalar = scal;
    p.e = ric - (scal / 4.0) * p.g;
    p.weyl = riem;
    p.weyl -= 0.5 * kulkarni_nomizu(p.e, p.g);
    p.weyl -= (scal / 24.0) * kulkarni_nomizu(p.g, p.g);
    return p;
}

/// Covariant derivative of the coordinate Weyl tensor in direction mu, given
/// the plain coordinate difference quotient and the connection at the point.
inline CurvTensor weyl_cov_deriv(const CurvTensor& dw, const CurvTensor& w, const Tensor3& gam,
                                 int mu) {
    auto G = [&gam](int rho, int m, int nu) { return gam[static_cast<size_t>(rho * 16 + m * 4 + nu)]; };
    CurvTensor out = dw;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) {
                    Real corr = 0;
                    for (int sig = 0; sig < 4; ++sig)
                        corr += G(sig, mu, i) * w(sig, j, k, l) + G(sig, mu, j) * w(i, sig, k, l)
                              + G(sig, mu, k) * w(i, j, sig, l) + G(sig, mu, l) * w(i, j, k, sig);
                    out(i, j, k, l) -= corr;
                }
    return out;
}

struct GradValues {
    Real grad_w2 = 0, grad_e2 = 0, grad_r2 = 0;
};

inline GradValues grad_norms_step(const ChartSampler& c, const Vec4& x, Real h) {
    const CoordParts at = coord_parts(c, x, h);
    std::array<CoordParts, 4> plus, minus;
    for (int mu = 0; mu < 4; ++mu) {
        plus[static_cast<size_t>(mu)] = coord_parts(c, shifted(x, mu, h), h);
        minus[static_cast<size_t>(mu)] = coord_parts(c, shifted(x, mu, -h), h);
    }
    const Tensor3 gam = christoffel(c, x, h);
    auto G = [&gam](int rho, int mu, int nu) { return gam[static_cast<size_t>(rho * 16 + mu * 4 + nu)]; };
    const Mat4 f = frame_of(at.g);

    GradValues out;

    // nabla R: a 1-form, frame-contract directly
    for (int a = 0; a < 4; ++a) {
        Real s = 0;
        for (int mu = 0; mu < 4; ++mu)
            s += f(mu, a) * (plus[static_cast<size_t>(mu)].scalar - minus[static_cast<size_t>(mu)].scalar) / (2.0 * h);
        out.grad_r2 += s * s;
    }

    // nabla E: covariant derivative, then frame components of the 3-tensor
    {
        std::array<Sym2, 4> def;
        for (int mu = 0; mu < 4; ++mu) {
            Sym2 de = (1.0 / (2.0 * h)) * (plus[static_cast<size_t>(mu)].e - minus[static_cast<size_t>(mu)].e);
            for (int j = 0; j < 4; ++j)
                for (int l = 0; l < 4; ++l) {
                    Real corr = 0;
                    for (int sig = 0; sig < 4; ++sig)
                        corr += G(sig, mu, j) * at.e(sig, l) + G(sig, mu, l) * at.e(j, sig);
                    de(j, l) -= corr;
                }
            def[static_cast<size_t>(mu)] = frame_pullback2(de, f);
        }
        for (int a = 0; a < 4; ++a) {
            Sym2 slice{};  // frame components of nabla_a E
            for (int mu = 0; mu < 4; ++mu) slice += f(mu, a) * def[static_cast<size_t>(mu)];
            out.grad_e2 += slice.norm2();
        }
    }

    // nabla W: the same pattern one rank higher
    {
        std::array<CurvTensor, 4> dwf;
        for (int mu = 0; mu < 4; ++mu) {
            const CurvTensor dw = (1.0 / (2.0 * h))
                                * (plus[static_cast<size_t>(mu)].weyl - minus[static_cast<size_t>(mu)].weyl);
            dwf[static_cast<size_t>(mu)] = frame_pullback4(weyl_cov_deriv(dw, at.weyl, gam, mu), f);
        }
        for (int a = 0; a < 4; ++a) {
            CurvTensor slice{};
            for (int mu = 0; mu < 4; ++mu) slice += f(mu, a) * dwf[static_cast<size_t>(mu)];
            out.grad_w2 += slice.norm2();
        }
    }
    return out;
}

}  // namespace fd

/// |grad W|^2, |grad E|^2, |grad R|^2 at a chart point, Richardson-extrapolated
/// with an error bar per quantity.
struct FdGradNorms {
    Real grad_w2 = 0, grad_e2 = 0, grad_r2 = 0;
    Real err_w = 0, err_e = 0, err_r = 0;
};

inline FdGradNorms grad_norms_fd(const ChartSampler& c, const Vec4& x) {
    const auto vh = fd::grad_norms_step(c, x, c.h);
    const auto vh2 = fd::grad_norms_step(c, x, c.h / 2.0);
    FdGradNorms out;
    out.grad_w2 = (4.0 * vh2.grad_w2 - vh.grad_w2) / 3.0;
    out.grad_e2 = (4.0 * vh2.grad_e2 - vh.grad_e2) / 3.0;
    out.grad_r2 = (4.0 * vh2.grad_r2 - vh.grad_r2) / 3.0;
    out.err_w = std::abs(vh.grad_w2 - vh2.grad_w2) / 3.0;
    out.err_e = std::abs(vh.grad_e2 - vh2.grad_e2) / 3.0;
    out.err_r = std::abs(vh.grad_r2 - vh2.grad_r2) / 3.0;
    return out;
}

// ===========================================================================
// Bach tensor
// ===========================================================================

namespace fd {

/// U_{ijl} = (div W)_{ijl} = g^{km} (nabla_m W)_{kijl} at a point.
inline Tensor3 weyl_divergence(const ChartSampler& c, const Vec4& x, Real h) {
    const CoordParts at = coord_parts(c, x, h);
    const Tensor3 gam = christoffel(c, x, h);
    const Mat4 ginv = spd_inverse(at.g);

    Tensor3 u{};
    for (int m = 0; m < 4; ++m) {
        const CoordParts pp = coord_parts(c, shifted(x, m, h), h);
        const CoordParts pm = coord_parts(c, shifted(x, m, -h), h);
        const CurvTensor dw = (1.0 / (2.0 * h)) * (pp.weyl - pm.weyl);
        const CurvTensor nw = weyl_cov_deriv(dw, at.weyl, gam, m);
        for (int k = 0; k < 4; ++k)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    for (int l = 0; l < 4; ++l)
                        u[static_cast<size_t>(i * 16 + j * 4 + l)] += ginv(k, m) * nw(k, i, j, l);
    }
    return u;
}

}  // namespace fd

/// Frame-component Bach tensor with an error bar: B_ij = div div W + (1/2) Ric:W.
struct FdBach {
    Sym2 value;
    Real err = 0;
};

inline FdBach bach_fd(const ChartSampler& c, const Vec4& x) {
    auto bach_step = [&c, &x](Real h) {
        const fd::CoordParts at = fd::coord_parts(c, x, h);
        const fd::Tensor3 gam = fd::christoffel(c, x, h);
        auto G = [&gam](int rho, int mu, int nu) { return gam[static_cast<size_t>(rho * 16 + mu * 4 + nu)]; };
        const Mat4 ginv = spd_inverse(at.g);

        const fd::Tensor3 u0 = fd::weyl_divergence(c, x, h);
        Sym2 ddw{};
        for (int n = 0; n < 4; ++n) {
            const fd::Tensor3 up = fd::weyl_divergence(c, fd::shifted(x, n, h), h);
            const fd::Tensor3 um = fd::weyl_divergence(c, fd::shifted(x, n, -h), h);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    for (int l = 0; l < 4; ++l) {
                        Real nu = (up[static_cast<size_t>(i * 16 + j * 4 + l)]
                                 - um[static_cast<size_t>(i * 16 + j * 4 + l)]) / (2.0 * h);
                        for (int sig = 0; sig < 4; ++sig)
                            nu -= G(sig, n, i) * u0[static_cast<size_t>(sig * 16 + j * 4 + l)]
                                + G(sig, n, j) * u0[static_cast<size_t>(i * 16 + sig * 4 + l)]
                                + G(sig, n, l) * u0[static_cast<size_t>(i * 16 + j * 4 + sig)];
                        ddw(i, j) += ginv(l, n) * nu;
                    }
        }

        // algebraic term with raised Ricci: (1/2) g^{ka} g^{lb} Ric_{ab} W_{kijl}
        Sym2 ric = at.e;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) ric(i, j) += (at.scalar / 4.0) * at.g(i, j);
        Mat4 ric_up{};
        for (int k = 0; k < 4; ++k)
            for (int l = 0; l < 4; ++l) {
                Real s = 0;
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) s += ginv(k, a) * ginv(l, b) * ric(a, b);
                ric_up(k, l) = s;
            }
        Sym2 b = ddw;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                Real s = 0;
                for (int k = 0; k < 4; ++k)
                    for (int l = 0; l < 4; ++l) s += ric_up(k, l) * at.weyl(k, i, j, l);
                b(i, j) += 0.5 * s;
            }

        Sym2 bf = fd::frame_pullback2(b, fd::frame_of(at.g));
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                const Real avg = 0.5 * (bf(i, j) + bf(j, i));
                bf(i, j) = bf(j, i) = avg;
            }
        return bf;
    };

    const Sym2 vh = bach_step(c.h);
    const Sym2 vh2 = bach_step(c.h / 2.0);
    FdBach out;
    out.value = (1.0 / 3.0) * (4.0 * vh2 - vh);
    out.err = (vh - vh2).max_abs() / 3.0;
    return out;
}

// ===========================================================================
// chart library
// ===========================================================================

inline ChartSampler chart_flat(Real h = 1e-3) {
    return {[](const Vec4&) { return Mat4::identity(); }, h};
}

/// Stereographic chart of the round sphere of the given radius.
inline ChartSampler chart_round(Real radius = 1.0, Real h = 1e-3) {
    return {[radius](const Vec4& x) {
                Real n2 = 0;
                for (Real xi : x) n2 += xi * xi;
                const Real f = 2.0 * radius / (1.0 + n2);
                return (f * f) * Mat4::identity();
            },
            h};
}

/// Conformally round metric e^{2 w(theta)} g_round in the stereographic
/// chart; theta is the polar distance from the chart origin.
inline ChartSampler chart_conformal_round(std::function<Real(Real)> w, Real h = 1e-3) {
    return {[w = std::move(w)](const Vec4& x) {
                Real n2 = 0;
                for (Real xi : x) n2 += xi * xi;
                const Real theta = 2.0 * std::atan(std::sqrt(n2));
                const Real f = 2.0 / (1.0 + n2);
                return (std::exp(2.0 * w(theta)) * f * f) * Mat4::identity();
            },
            h};
}

/// Product of a unit round 3-sphere (stereographic coordinates x0..x2) and a
/// flat circle direction x3.
inline ChartSampler chart_s3xs1(Real h = 1e-3) {
    return {[](const Vec4& x) {
                Real n2 = 0;
                for (int i = 0; i < 3; ++i) n2 += x[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
                const Real f = 2.0 / (1.0 + n2);
                Mat4 g{};
                for (int i = 0; i < 3; ++i) g(i, i) = f * f;
                g(3, 3) = 1.0;
                return g;
            },
            h};
}

/// Fubini-Study metric on the complex projective plane in an affine chart,
/// real coordinates (Re z1, Im z1, Re z2, Im z2).
inline ChartSampler chart_cp2(Real h = 1e-3) {
    return {[](const Vec4& x) {
                using C = std::complex<Real>;
                const std::array<C, 2> z = {C(x[0], x[1]), C(x[2], x[3])};
                const Real n2 = std::norm(z[0]) + std::norm(z[1]);
                const Real d = (1.0 + n2) * (1.0 + n2);
                std::array<std::array<C, 2>, 2> hm;
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        hm[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                            ((i == j ? 1.0 + n2 : 0.0) - std::conj(z[static_cast<size_t>(i)]) * z[static_cast<size_t>(j)]) / d;
                // dz_i in the real basis; g_mn = Re sum_ij h_ij dz_i(m) conj(dz_j(n))
                auto dz = [](int i, int m) {
                    return C(m == 2 * i ? 1.0 : 0.0, m == 2 * i + 1 ? 1.0 : 0.0);
                };
                Mat4 g;
                for (int m = 0; m < 4; ++m)
                    for (int n = 0; n < 4; ++n) {
                        C s = 0;
                        for (int i = 0; i < 2; ++i)
                            for (int j = 0; j < 2; ++j)
                                s += hm[static_cast<size_t>(i)][static_cast<size_t>(j)] * dz(i, m) * std::conj(dz(j, n));
                        g(m, n) = s.real();
                    }
                return g;
            },
            h};
}

/// Squashed ansatz metric in the Euler-angle chart (r, psi, theta, phi):
///   s1 = (dpsi + cos(theta) dphi)/2,
///   s2 = (cos(psi) dtheta + sin(psi) sin(theta) dphi)/2,
///   s3 = (sin(psi) dtheta - cos(psi) sin(theta) dphi)/2,
/// oriented so that d s1 = 2 s2 ^ s3.  Valid away from sin(theta) = 0.
inline ChartSampler chart_squashed(std::function<Real(Real)> a, std::function<Real(Real)> b,
                                   Real h = 1e-3) {
    return {[a = std::move(a), b = std::move(b)](const Vec4& x) {
                const Real aa = a(x[0]) * a(x[0]);
                const Real bb = b(x[0]) * b(x[0]);
                const Real ct = std::cos(x[2]), st = std::sin(x[2]);
                Mat4 g{};
                g(0, 0) = 1.0;
                g(1, 1) = aa / 4.0;
                g(1, 3) = g(3, 1) = aa * ct / 4.0;
                g(2, 2) = bb / 4.0;
                g(3, 3) = (aa * ct * ct + bb * st * st) / 4.0;
                return g;
            },
            h};
}

/// Chart over sampled profile data, interpolating a and b between the nodes.
inline ChartSampler chart_squashed(const SquashedProfile& p, Real h = 1e-3) {
    validate(p);
    const Real hr = p.h();
    return chart_squashed([a = p.a, hr](Real r) { return interp_local(a, hr, Parity::odd, r); },
                          [b = p.b, hr](Real r) { return interp_local(b, hr, Parity::odd, r); }, h);
}

// ===========================================================================
// integral identity evaluation
// ===========================================================================

/// Node fields feeding the two integral curvature identities; gradient norms
/// may come from either the grid-native or the oracle route.
struct IdentityFields {
    std::vector<Real> grad_w2, grad_e2, grad_r2;
    std::vector<Real> scalar, e2, w2, tr_e3, wee, det_wp, det_wm;
};

/// Pointwise invariants of the identity integrands (everything except the
/// gradient norms), from per-node decompositions.
inline IdentityFields identity_pointwise(const std::vector<CurvDecomp>& nodes) {
    IdentityFields f;
    const size_t n = nodes.size();
    f.scalar.resize(n);
    f.e2.resize(n);
    f.w2.resize(n);
    f.tr_e3.resize(n);
    f.wee.resize(n);
    f.det_wp.resize(n);
    f.det_wm.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const auto& d = nodes[i];
        f.scalar[i] = d.scalar;
        f.e2[i] = d.e.norm2();
        f.w2[i] = d.weyl.norm2();
        f.tr_e3[i] = tr_e3(d.e);
        f.wee[i] = wee(d.weyl, d.e);
        const auto [wp, wm] = sd_asd_split(d.weyl);
        f.det_wp[i] = det_w(wp);
        f.det_wm[i] = det_w(wm);
    }
    return f;
}

namespace detail {

inline void require_field(const std::vector<Real>& v, size_t n, const char* name) {
    if (v.size() != n) throw std::invalid_argument(std::string("missing field: ") + name);
}

}  // namespace detail

/// First integral identity: the residual of
///   0 = int { 3(|grad E|^2 - |grad R|^2 / 12) + 6 tr E^3 + R|E|^2 - 6 WEE } dv,
/// which vanishes for Bach-flat metrics (conformally Einstein ones included);
/// on generic metrics the residual measures the failure of Bach-flatness.
template <class Profile>
Real identity_residual1(const IdentityFields& f, const Profile& p, const QuadratureRule& rule) {
    const size_t n = static_cast<size_t>(p.n());
    detail::require_field(f.grad_e2, n, "grad_e2");
    detail::require_field(f.grad_r2, n, "grad_r2");
    detail::require_field(f.tr_e3, n, "tr_e3");
    detail::require_field(f.scalar, n, "scalar");
    detail::require_field(f.e2, n, "e2");
    detail::require_field(f.wee, n, "wee");
    std::vector<Real> integrand(n);
    for (size_t i = 0; i < n; ++i)
        integrand[i] = 3.0 * (f.grad_e2[i] - f.grad_r2[i] / 12.0) + 6.0 * f.tr_e3[i]
                     + f.scalar[i] * f.e2[i] - 6.0 * f.wee[i];
    return integrate(integrand, p, rule);
}

/// Second integral identity: the residual of
///   0 = int { |grad W|^2 - 72(det Wp + det Wm) + (1/2) R|W|^2 - 2 WEE } dv,
/// again exact precisely in the Bach-flat case.
template <class Profile>
Real identity_residual2(const IdentityFields& f, const Profile& p, const QuadratureRule& rule) {
    const size_t n = static_cast<size_t>(p.n());
    detail::require_field(f.grad_w2, n, "grad_w2");
    detail::require_field(f.det_wp, n, "det_wp");
    detail::require_field(f.det_wm, n, "det_wm");
    detail::require_field(f.scalar, n, "scalar");
    detail::require_field(f.w2, n, "w2");
    detail::require_field(f.wee, n, "wee");
    std::vector<Real> integrand(n);
    for (size_t i = 0; i < n; ++i)
        integrand[i] = f.grad_w2[i] - 72.0 * (f.det_wp[i] + f.det_wm[i])
                     + 0.5 * f.scalar[i] * f.w2[i] - 2.0 * f.wee[i];
    return integrate(integrand, p, rule);
}

enum class IdentityKind { identity1, identity2 };

template <class Profile>
Real identity_eval(IdentityKind which, const IdentityFields& f, const Profile& p,
                   const QuadratureRule& rule) {
    return which == IdentityKind::identity1 ? identity_residual1(f, p, rule)
                                            : identity_residual2(f, p, rule);
}

}  // namespace ricci4
