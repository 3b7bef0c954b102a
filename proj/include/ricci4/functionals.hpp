#pragma once

// Integral invariants of a profile and diagnostics over sampled series:
// the quadratic curvature functional F2, its p-power family G_p, the
// Yamabe-type lower bound, topological residuals, comparison inequalities,
// and the monotonicity / decay fits used by flow reports.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ricci4/profile.hpp"

namespace ricci4 {

// ===========================================================================
// configuration
// ===========================================================================

/// One member of the p-power functional family: exponent p = 2 + delta and
/// the weight a of the |R - Rbar|^p term.  eta is a reporting knob carried
/// through to artifacts, never used numerically.
struct FunctionalConfig {
    Real p = 2.0;
    Real a = 1e-6;
    Real eta = 0.01;
};

inline void validate(const FunctionalConfig& c) {
    if (!(c.p >= 2.0 && c.p <= 8.0 / 3.0) || !std::isfinite(c.p))
        throw std::invalid_argument("functional exponent outside [2, 8/3]");
    if (!(c.a >= 0.0) || !std::isfinite(c.a))
        throw std::invalid_argument("functional weight must be nonnegative");
}

/// Exponent family evaluated on every trajectory sample: one column set per
/// delta, sharing the weight a.
struct SeriesConfig {
    std::vector<Real> deltas = {0.0, 1.0 / 6.0, 1.0 / 3.0};
    Real a = 1e-6;
    Real eta = 0.01;
};

inline void validate(const SeriesConfig& c) {
    if (c.deltas.empty()) throw std::invalid_argument("series needs at least one exponent");
    for (Real d : c.deltas)
        validate(FunctionalConfig{2.0 + d, c.a, c.eta});
}

// Regime thresholds for the monotonicity monitors.  The monitors assert
// decay only when the initial data sits below these; otherwise violations
// are recorded as observations.
inline constexpr Real weyl_energy_threshold = pi * pi / 2000.0;
inline constexpr Real f2_monotone_threshold = 8.0 * pi * pi / 25.0;
inline constexpr Real f2_delta0_threshold = 16.0 * pi * pi / 145.0;
inline constexpr Real delta0_weight_max = 1.0 / 192.0;

/// Total of the Gauss-Bonnet integrand over any metric on the 4-sphere.
inline constexpr Real gauss_bonnet_total = 16.0 * pi * pi;

// ===========================================================================
// per-node invariant fields
// ===========================================================================

/// Scalar invariants on the grid, the shared input of every integral below.
/// Weyl quantities use the operator normalization ||W||^2 = |W|^2 / 4.
struct NodeInvariants {
    std::vector<Real> w_op2;     ///< ||W||^2
    std::vector<Real> w_plus2;   ///< ||W+||^2
    std::vector<Real> w_minus2;  ///< ||W-||^2
    std::vector<Real> e2;        ///< |E|^2
    std::vector<Real> scalar;    ///< R
};

inline NodeInvariants node_invariants(const std::vector<CurvDecomp>& nodes) {
    NodeInvariants f;
    const size_t n = nodes.size();
    f.w_op2.resize(n);
    f.w_plus2.resize(n);
    f.w_minus2.resize(n);
    f.e2.resize(n);
    f.scalar.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const auto& d = nodes[i];
        f.w_op2[i] = weyl_op_norm2(d.weyl);
        const auto [wp, wm] = sd_asd_split(d.weyl);
        f.w_plus2[i] = wp.norm2();
        f.w_minus2[i] = wm.norm2();
        f.e2[i] = d.e.norm2();
        f.scalar[i] = d.scalar;
    }
    return f;
}

namespace detail {

inline std::vector<Real> pow_field(const std::vector<Real>& sq, Real p) {
    std::vector<Real> out(sq.size());
    for (size_t i = 0; i < sq.size(); ++i) out[i] = std::pow(std::max(sq[i], 0.0), 0.5 * p);
    return out;
}

}  // namespace detail

// ===========================================================================
// scalar functionals
// ===========================================================================

template <class Profile>
Real average_scalar(const Profile& p, const NodeInvariants& f, const QuadratureRule& rule) {
    return integrate(f.scalar, p, rule) / volume(p);
}

/// F2 = integral of ||W||^2 + |E|^2 / 2.
template <class Profile>
Real f2(const Profile& p, const QuadratureRule& rule) {
    const auto f = node_invariants(curvature_nodes(p));
    std::vector<Real> integrand(f.e2.size());
    for (size_t i = 0; i < integrand.size(); ++i) integrand[i] = f.w_op2[i] + 0.5 * f.e2[i];
    return integrate(integrand, p, rule);
}

template <class Profile>
Real f2(const Profile& p) {
    return f2(p, QuadratureRule::preferred(p.n(), p.h()));
}

/// G_p = integral of ||W||^p + |E|^p / 2 + a |R - Rbar|^p.
template <class Profile>
Real g_p(const Profile& p, const FunctionalConfig& cfg, const QuadratureRule& rule) {
    validate(cfg);
    const auto f = node_invariants(curvature_nodes(p));
    const Real rbar = average_scalar(p, f, rule);
    std::vector<Real> integrand(f.e2.size());
    for (size_t i = 0; i < integrand.size(); ++i)
        integrand[i] = std::pow(f.w_op2[i], 0.5 * cfg.p) + 0.5 * std::pow(f.e2[i], 0.5 * cfg.p)
                     + cfg.a * std::pow(std::abs(f.scalar[i] - rbar), cfg.p);
    return integrate(integrand, p, rule);
}

template <class Profile>
Real g_p(const Profile& p, const FunctionalConfig& cfg) {
    return g_p(p, cfg, QuadratureRule::preferred(p.n(), p.h()));
}

/// Lower bound for the conformal Yamabe invariant from the Weyl energy:
/// sqrt(24 (16 pi^2 - int ||W||^2)).  Below-threshold Weyl energy is a
/// hypothesis; when it fails the bound degenerates and in_range is false.
struct YamabeLower {
    Real value = 0;
    bool in_range = true;
};

template <class Profile>
YamabeLower yamabe_lower(const Profile& p, const QuadratureRule& rule) {
    const auto f = node_invariants(curvature_nodes(p));
    const Real w_energy = integrate(f.w_op2, p, rule);
    if (w_energy >= gauss_bonnet_total) return {0.0, false};
    return {std::sqrt(24.0 * (gauss_bonnet_total - w_energy)), true};
}

template <class Profile>
YamabeLower yamabe_lower(const Profile& p) {
    return yamabe_lower(p, QuadratureRule::preferred(p.n(), p.h()));
}

// ===========================================================================
// comparison bounds
// ===========================================================================

/// Scalar-curvature oscillation against the traceless Ricci energy:
/// int (R - Rbar)^2 <= 12 int |E|^2, returned as
/// (int (R - Rbar)^2 / 24, int |E|^2 / 2, slack).  Violations beyond the
/// quadrature allowance throw.
struct RComparison {
    Real dr2_over_24 = 0;
    Real half_e2 = 0;
    Real slack = 0;
};

template <class Profile>
RComparison r_comparison(const Profile& p) {
    const QuadratureRule rule = QuadratureRule::preferred(p.n(), p.h());
    const auto f = node_invariants(curvature_nodes(p));
    const Real rbar = average_scalar(p, f, rule);
    std::vector<Real> dr2(f.scalar.size());
    for (size_t i = 0; i < dr2.size(); ++i) {
        const Real d = f.scalar[i] - rbar;
        dr2[i] = d * d;
    }
    RComparison out;
    out.dr2_over_24 = integrate(dr2, p, rule) / 24.0;
    out.half_e2 = 0.5 * integrate(f.e2, p, rule);
    out.slack = out.half_e2 - out.dr2_over_24;
    const Real allowance = 1e-8 * (1.0 + out.half_e2 + out.dr2_over_24);
    if (out.slack < -allowance)
        throw std::runtime_error("scalar oscillation bound violated beyond quadrature error");
    return out;
}

/// Average-scalar-curvature bound forced by Gauss-Bonnet:
/// Rbar^2 <= 24 Vol^{-1} (16 pi^2 + int |E|^2 / 2).
struct RbarBound {
    Real lhs = 0;
    Real rhs = 0;
    Real slack = 0;
};

template <class Profile>
RbarBound rbar_bound_check(const Profile& p) {
    const QuadratureRule rule = QuadratureRule::preferred(p.n(), p.h());
    const auto f = node_invariants(curvature_nodes(p));
    const Real vol = volume(p);
    const Real rbar = integrate(f.scalar, p, rule) / vol;
    RbarBound out;
    out.lhs = rbar * rbar;
    out.rhs = 24.0 / vol * (gauss_bonnet_total + 0.5 * integrate(f.e2, p, rule));
    out.slack = out.rhs - out.lhs;
    // The chain passes through the Gauss-Bonnet total, so the discretization
    // allowance is the measured residual of that identity plus roundoff.
    std::vector<Real> gb(f.e2.size());
    for (size_t i = 0; i < gb.size(); ++i)
        gb[i] = f.w_op2[i] - 0.5 * f.e2[i] + f.scalar[i] * f.scalar[i] / 24.0;
    const Real gb_res = integrate(gb, p, rule) - gauss_bonnet_total;
    const Real allowance = 24.0 / vol * std::abs(gb_res) + 1e-8 * (1.0 + out.rhs);
    if (out.slack < -allowance)
        throw std::runtime_error("average scalar curvature bound violated beyond quadrature error");
    return out;
}

// ===========================================================================
// topological residuals
// ===========================================================================

/// Residuals of the two integral identities fixed by the topology of S^4:
/// int (||W||^2 - |E|^2/2 + R^2/24) - 16 pi^2 and int (||W+||^2 - ||W-||^2).
struct TopoResiduals {
    Real gauss_bonnet = 0;
    Real signature = 0;
};

template <class Profile>
TopoResiduals topo_residuals(const Profile& p, const QuadratureRule& rule) {
    const auto f = node_invariants(curvature_nodes(p));
    std::vector<Real> gb(f.e2.size()), sig(f.e2.size());
    for (size_t i = 0; i < gb.size(); ++i) {
        gb[i] = f.w_op2[i] - 0.5 * f.e2[i] + f.scalar[i] * f.scalar[i] / 24.0;
        sig[i] = f.w_plus2[i] - f.w_minus2[i];
    }
    return {integrate(gb, p, rule) - gauss_bonnet_total, integrate(sig, p, rule)};
}

template <class Profile>
TopoResiduals topo_residuals(const Profile& p) {
    return topo_residuals(p, QuadratureRule::preferred(p.n(), p.h()));
}

// ===========================================================================
// sigma_2 residual field
// ===========================================================================

/// Pointwise residual of sigma_2(A) - ||W||^2 - lambda on the grid; solving
/// the equation is out of scope, the field is a diagnostic.
struct PdeResidual {
    std::vector<Real> field;
    Real sup = 0;
};

template <class Profile>
PdeResidual pde_residual(const Profile& p, Real lambda) {
    const auto nodes = curvature_nodes(p);
    PdeResidual out;
    out.field.resize(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
        out.field[i] = sigma2_pde_residual(nodes[i], lambda);
        out.sup = std::max(out.sup, std::abs(out.field[i]));
    }
    return out;
}

// ===========================================================================
// Sobolev inequality check
// ===========================================================================

/// Radial test function with a name for the report; values live on the
/// profile grid and must be smooth across the poles (even in the radial
/// coordinate).
struct TestField {
    std::string name;
    std::vector<Real> u;
};

/// Smooth radial library: constant, height function, equatorial band, and a
/// skewed exponential of the height.  x is the normalized angle pi r / L.
inline std::vector<TestField> default_test_fields(int n) {
    std::vector<TestField> fields(4);
    fields[0].name = "const";
    fields[1].name = "cos";
    fields[2].name = "sin2";
    fields[3].name = "exp_cos";
    for (auto& f : fields) f.u.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Real x = pi * i / (n - 1);
        fields[0].u[static_cast<size_t>(i)] = 1.0;
        fields[1].u[static_cast<size_t>(i)] = std::cos(x);
        fields[2].u[static_cast<size_t>(i)] = std::sin(x) * std::sin(x);
        fields[3].u[static_cast<size_t>(i)] = std::exp(std::cos(x));
    }
    return fields;
}

/// One row per test field: Y_lower ||u||_4^2 against 6 int |grad u|^2 + int R u^2,
/// plus the ratio ||u||_4^2 / int (|grad u|^2 + u^2) whose sup calibrates the
/// uniform Sobolev constant.
struct SobolevReport {
    struct Entry {
        std::string name;
        Real lhs = 0;
        Real rhs = 0;
        Real slack = 0;
        Real c_ratio = 0;
    };
    std::vector<Entry> entries;
    Real c_sup = 0;
    bool all_hold = true;
};

template <class Profile>
SobolevReport sobolev_check(const Profile& p, const std::vector<TestField>& fields) {
    const int n = p.n();
    const QuadratureRule rule = QuadratureRule::preferred(n, p.h());
    const auto inv = node_invariants(curvature_nodes(p));
    const Real y = yamabe_lower(p, rule).value;

    SobolevReport report;
    for (const auto& tf : fields) {
        if (static_cast<int>(tf.u.size()) != n)
            throw std::invalid_argument("test field size mismatch");
        const std::vector<Real> du = derivative(tf.u, p.h(), Parity::even);
        std::vector<Real> u2(tf.u.size()), u4(tf.u.size()), grad2(tf.u.size()), ru2(tf.u.size());
        for (int i = 0; i < n; ++i) {
            const size_t k = static_cast<size_t>(i);
            Real g = du[k];
            if constexpr (std::is_same_v<Profile, ConformalProfile>)
                g *= std::exp(-p.w[k]);  // radial arc element is e^w dtheta
            u2[k] = tf.u[k] * tf.u[k];
            u4[k] = u2[k] * u2[k];
            grad2[k] = g * g;
            ru2[k] = inv.scalar[k] * u2[k];
        }
        SobolevReport::Entry e;
        e.name = tf.name;
        const Real norm4_sq = std::sqrt(integrate(u4, p, rule));
        const Real int_grad2 = integrate(grad2, p, rule);
        e.lhs = y * norm4_sq;
        e.rhs = 6.0 * int_grad2 + integrate(ru2, p, rule);
        e.slack = e.rhs - e.lhs;
        e.c_ratio = norm4_sq / (int_grad2 + integrate(u2, p, rule));
        report.c_sup = std::max(report.c_sup, e.c_ratio);
        if (e.slack < -1e-8 * (1.0 + std::abs(e.rhs))) report.all_hold = false;
        report.entries.push_back(std::move(e));
    }
    return report;
}

template <class Profile>
SobolevReport sobolev_check(const Profile& p) {
    return sobolev_check(p, default_test_fields(p.n()));
}

// ===========================================================================
// per-sample snapshot
// ===========================================================================

/// Every monitored scalar at one flow time.  fp and gp run parallel to the
/// delta list of the SeriesConfig; fp is gp without the |R - Rbar|^p term.
struct FunctionalSnapshot {
    Real t = 0;
    Real vol = 0;
    Real rbar = 0;
    Real f2 = 0;
    std::vector<Real> fp;
    std::vector<Real> gp;
    Real int_w2 = 0;
    Real int_e2 = 0;
    Real int_dr2 = 0;
    Real y_lower = 0;
    bool y_in_range = true;
    Real wp_sup = 0;
    Real k_sup = 0;
    Real gb_residual = 0;
    Real sig_residual = 0;
};

template <class Profile>
FunctionalSnapshot evaluate_functionals(const Profile& p, const SeriesConfig& cfg,
                                        const QuadratureRule& rule) {
    validate(cfg);
    const auto f = node_invariants(curvature_nodes(p));
    const size_t n = f.e2.size();

    FunctionalSnapshot s;
    s.vol = volume(p);
    s.rbar = integrate(f.scalar, p, rule) / s.vol;

    std::vector<Real> work(n);
    for (size_t i = 0; i < n; ++i) work[i] = f.w_op2[i] + 0.5 * f.e2[i];
    s.f2 = integrate(work, p, rule);
    s.int_w2 = integrate(f.w_op2, p, rule);
    s.int_e2 = integrate(f.e2, p, rule);
    for (size_t i = 0; i < n; ++i) {
        const Real d = f.scalar[i] - s.rbar;
        work[i] = d * d;
    }
    s.int_dr2 = integrate(work, p, rule);

    for (Real delta : cfg.deltas) {
        const Real pexp = 2.0 + delta;
        std::vector<Real> fp_field(n), rp_field(n);
        for (size_t i = 0; i < n; ++i) {
            fp_field[i] = std::pow(f.w_op2[i], 0.5 * pexp) + 0.5 * std::pow(f.e2[i], 0.5 * pexp);
            rp_field[i] = std::pow(std::abs(f.scalar[i] - s.rbar), pexp);
        }
        const Real fp_val = integrate(fp_field, p, rule);
        s.fp.push_back(fp_val);
        s.gp.push_back(fp_val + cfg.a * integrate(rp_field, p, rule));
    }

    if (s.int_w2 >= gauss_bonnet_total) {
        s.y_lower = 0.0;
        s.y_in_range = false;
    } else {
        s.y_lower = std::sqrt(24.0 * (gauss_bonnet_total - s.int_w2));
    }

    for (size_t i = 0; i < n; ++i) {
        const Real r = f.scalar[i];
        if (r == 0.0) throw std::domain_error("undefined pinching (zero scalar curvature)");
        s.wp_sup = std::max(s.wp_sup, (4.0 * f.w_op2[i] + 2.0 * f.e2[i]) / (r * r));
        s.k_sup = std::max(s.k_sup, std::sqrt(f.e2[i]) + std::sqrt(f.w_op2[i]) + std::abs(r - s.rbar));
    }

    const auto topo = topo_residuals(p, rule);
    s.gb_residual = topo.gauss_bonnet;
    s.sig_residual = topo.signature;
    return s;
}

template <class Profile>
FunctionalSnapshot evaluate_functionals(const Profile& p, const SeriesConfig& cfg = {}) {
    return evaluate_functionals(p, cfg, QuadratureRule::preferred(p.n(), p.h()));
}

/// Initial-data regime flags for the monitors.  small_weyl gates the
/// exponential-decay claims, f2_small the plain monotonicity of F2, and
/// delta0_alt the p = 2 variant that trades the threshold against the
/// weight a.
struct HypothesisFlags {
    bool small_weyl = false;
    bool f2_small = false;
    bool delta0_alt = false;
};

inline HypothesisFlags hypothesis_flags(const FunctionalSnapshot& first, Real a) {
    HypothesisFlags h;
    h.small_weyl = first.int_w2 < weyl_energy_threshold;
    h.f2_small = first.f2 < f2_monotone_threshold;
    h.delta0_alt = a <= delta0_weight_max && first.f2 < f2_delta0_threshold;
    return h;
}

// ===========================================================================
// series diagnostics
// ===========================================================================

/// Per-step monotonicity scan with a relative slack; equality is allowed.
/// worst_rel is the largest positive per-step relative increase observed.
struct MonotoneVerdict {
    bool monotone = true;
    Real first_violation_t = -1.0;
    Real worst_rel = 0.0;
};

inline MonotoneVerdict monotone_verdict(const std::vector<Real>& t, const std::vector<Real>& v,
                                        Real rel_slack = 1e-6, size_t min_samples = 50) {
    if (t.size() != v.size()) throw std::invalid_argument("series size mismatch");
    if (t.size() < min_samples) throw std::invalid_argument("monotonicity scan needs more samples");
    MonotoneVerdict out;
    for (size_t k = 0; k + 1 < v.size(); ++k) {
        const Real scale = std::max(std::abs(v[k]), std::numeric_limits<Real>::min());
        const Real rise = (v[k + 1] - v[k]) / scale;
        if (rise > rel_slack) {
            if (out.monotone) out.first_violation_t = t[k + 1];
            out.monotone = false;
        }
        out.worst_rel = std::max(out.worst_rel, rise);
    }
    return out;
}

/// Exponential fit log v = log c0 - rate t by least squares on the tail half
/// of the time range.  quality is the R^2 of that fit.  Non-positive values
/// in the tail mean the series already hit the floor; the fit short-circuits
/// with converged set.
struct DecayFit {
    Real rate = 0;
    Real c0 = 0;
    Real quality = 0;
    bool converged = false;
};

inline DecayFit decay_fit(const std::vector<Real>& t, const std::vector<Real>& v) {
    if (t.size() != v.size()) throw std::invalid_argument("series size mismatch");
    if (t.size() < 6) throw std::invalid_argument("decay fit needs more samples");
    const Real t_mid = 0.5 * (t.front() + t.back());
    std::vector<Real> ts, ys;
    for (size_t k = 0; k < t.size(); ++k) {
        if (t[k] < t_mid) continue;
        if (!(v[k] > 0.0)) return {0.0, 0.0, 1.0, true};
        ts.push_back(t[k]);
        ys.push_back(std::log(v[k]));
    }
    if (ts.size() < 3) throw std::invalid_argument("decay fit needs more tail samples");
    Real tm = 0, ym = 0;
    for (size_t k = 0; k < ts.size(); ++k) {
        tm += ts[k];
        ym += ys[k];
    }
    tm /= static_cast<Real>(ts.size());
    ym /= static_cast<Real>(ts.size());
    Real stt = 0, sty = 0, syy = 0;
    for (size_t k = 0; k < ts.size(); ++k) {
        stt += (ts[k] - tm) * (ts[k] - tm);
        sty += (ts[k] - tm) * (ys[k] - ym);
        syy += (ys[k] - ym) * (ys[k] - ym);
    }
    DecayFit out;
    const Real slope = sty / stt;
    out.rate = -slope;
    out.c0 = std::exp(ym - slope * tm);
    out.quality = syy > 0 ? (sty * sty) / (stt * syy) : 1.0;
    return out;
}

/// Shape check against c0 (1 + 1/t) e^{-rate t}: fit the two constants on
/// the tail, then verify the whole positive-time series stays within a fixed
/// multiple of the envelope.
struct ShapeFit {
    Real rate = 0;
    Real c0 = 0;
    Real ratio_max = 0;
    bool bounded = false;
};

inline ShapeFit shape_fit(const std::vector<Real>& t, const std::vector<Real>& v) {
    if (t.size() != v.size()) throw std::invalid_argument("series size mismatch");
    std::vector<Real> ts, ys;
    for (size_t k = 0; k < t.size(); ++k) {
        if (!(t[k] > 0.0) || !(v[k] > 0.0)) continue;
        ts.push_back(t[k]);
        ys.push_back(std::log(v[k]) - std::log1p(1.0 / t[k]));
    }
    if (ts.size() < 6) throw std::invalid_argument("shape fit needs more positive samples");
    const Real t_mid = 0.5 * (ts.front() + ts.back());
    Real tm = 0, ym = 0, cnt = 0;
    for (size_t k = 0; k < ts.size(); ++k) {
        if (ts[k] < t_mid) continue;
        tm += ts[k];
        ym += ys[k];
        cnt += 1.0;
    }
    tm /= cnt;
    ym /= cnt;
    Real stt = 0, sty = 0;
    for (size_t k = 0; k < ts.size(); ++k) {
        if (ts[k] < t_mid) continue;
        stt += (ts[k] - tm) * (ts[k] - tm);
        sty += (ts[k] - tm) * (ys[k] - ym);
    }
    ShapeFit out;
    const Real slope = sty / stt;
    out.rate = -slope;
    out.c0 = std::exp(ym - slope * tm);
    for (size_t k = 0; k < ts.size(); ++k) {
        const Real envelope = (1.0 + 1.0 / ts[k]) * std::exp(-out.rate * ts[k]);
        out.ratio_max = std::max(out.ratio_max, std::exp(ys[k] + std::log1p(1.0 / ts[k])) / envelope);
    }
    out.bounded = out.ratio_max <= 4.0 * out.c0;
    return out;
}

// ===========================================================================
// series export
// ===========================================================================

/// Column layout is part of the external contract: fixed order, one Fp/Gp
/// pair of column groups indexed by position in the delta list, 17
/// significant digits.
inline void write_series_csv(std::ostream& os, const std::vector<FunctionalSnapshot>& series,
                             const SeriesConfig& cfg) {
    os << "t,Vol,Rbar,F2";
    for (size_t k = 0; k < cfg.deltas.size(); ++k) os << ",Fp_" << k;
    for (size_t k = 0; k < cfg.deltas.size(); ++k) os << ",Gp_" << k;
    os << ",int_W2,int_E2,int_dR2,Y_lower,WP_sup,K_sup,gb_residual,sig_residual\n";
    for (const auto& s : series) {
        if (s.fp.size() != cfg.deltas.size() || s.gp.size() != cfg.deltas.size())
            throw std::invalid_argument("snapshot exponent count does not match the series config");
        os << detail::fmt17(s.t) << ',' << detail::fmt17(s.vol) << ',' << detail::fmt17(s.rbar)
           << ',' << detail::fmt17(s.f2);
        for (Real x : s.fp) os << ',' << detail::fmt17(x);
        for (Real x : s.gp) os << ',' << detail::fmt17(x);
        os << ',' << detail::fmt17(s.int_w2) << ',' << detail::fmt17(s.int_e2) << ','
           << detail::fmt17(s.int_dr2) << ',' << detail::fmt17(s.y_lower) << ','
           << detail::fmt17(s.wp_sup) << ',' << detail::fmt17(s.k_sup) << ','
           << detail::fmt17(s.gb_residual) << ',' << detail::fmt17(s.sig_residual) << '\n';
    }
}

/// Machine-readable description of the CSV columns, including the exponent
/// behind each indexed column.  Deterministic output, no timestamps.
inline std::string series_schema_json(const SeriesConfig& cfg) {
    std::string s = "{\n  \"columns\": [\"t\", \"Vol\", \"Rbar\", \"F2\"";
    for (size_t k = 0; k < cfg.deltas.size(); ++k) s += ", \"Fp_" + std::to_string(k) + "\"";
    for (size_t k = 0; k < cfg.deltas.size(); ++k) s += ", \"Gp_" + std::to_string(k) + "\"";
    s += ", \"int_W2\", \"int_E2\", \"int_dR2\", \"Y_lower\", \"WP_sup\", \"K_sup\","
         " \"gb_residual\", \"sig_residual\"],\n  \"deltas\": [";
    for (size_t k = 0; k < cfg.deltas.size(); ++k) {
        if (k) s += ", ";
        s += detail::fmt17(cfg.deltas[k]);
    }
    s += "],\n  \"a\": " + detail::fmt17(cfg.a) + ",\n  \"eta\": " + detail::fmt17(cfg.eta) + "\n}\n";
    return s;
}

}  // namespace ricci4
