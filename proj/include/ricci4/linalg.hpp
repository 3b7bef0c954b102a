#pragma once

// Small fixed-size dense linear algebra for the curvature kernels.
// Everything is stack-allocated and deterministic; no external dependencies.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace ricci4 {

using Real = double;

template <int N>
struct Mat {
    static constexpr int dim = N;
    std::array<Real, N * N> v{};

    Real&       operator()(int i, int j)       { return v[static_cast<size_t>(i) * N + j]; }
    const Real& operator()(int i, int j) const { return v[static_cast<size_t>(i) * N + j]; }

    static Mat identity() {
        Mat m;
        for (int i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    Mat& operator+=(const Mat& o) { for (size_t k = 0; k < v.size(); ++k) v[k] += o.v[k]; return *this; }
    Mat& operator-=(const Mat& o) { for (size_t k = 0; k < v.size(); ++k) v[k] -= o.v[k]; return *this; }
    Mat& operator*=(Real s)       { for (auto& x : v) x *= s; return *this; }

    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(Real s, Mat a)       { return a *= s; }

    [[nodiscard]] Real trace() const {
        Real t = 0;
        for (int i = 0; i < N; ++i) t += (*this)(i, i);
        return t;
    }

    /// Sum of squares of all entries.
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

using Mat3 = Mat<3>;
using Mat4 = Mat<4>;
using Mat6 = Mat<6>;

/// Symmetric 2-tensor in frame components; symmetry is a contract, not enforced.
using Sym2 = Mat4;

using Vec4 = std::array<Real, 4>;

template <int N>
Mat<N> matmul(const Mat<N>& a, const Mat<N>& b) {
    Mat<N> c;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            Real s = 0;
            for (int k = 0; k < N; ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

template <int N>
Mat<N> transpose(const Mat<N>& a) {
    Mat<N> t;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) t(i, j) = a(j, i);
    return t;
}

inline Real det3(const Mat3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
         - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
         + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

/// Cholesky factorization g = L L^T for symmetric positive definite g.
/// Returns false when g is not (numerically) positive definite.
template <int N>
bool cholesky(const Mat<N>& g, Mat<N>& L) {
    L = Mat<N>{};
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j <= i; ++j) {
            Real s = g(i, j);
            for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s)) return false;
                L(i, i) = std::sqrt(s);
            } else {
                L(i, j) = s / L(j, j);
            }
        }
    }
    return true;
}

/// Inverse of a lower-triangular matrix by forward substitution.
template <int N>
Mat<N> invert_lower(const Mat<N>& L) {
    Mat<N> inv;
    for (int c = 0; c < N; ++c) {
        inv(c, c) = 1.0 / L(c, c);
        for (int i = c + 1; i < N; ++i) {
            Real s = 0;
            for (int k = c; k < i; ++k) s += L(i, k) * inv(k, c);
            inv(i, c) = -s / L(i, i);
        }
    }
    return inv;
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
/// Throws std::invalid_argument when the matrix is not positive definite.
template <int N>
Mat<N> spd_inverse(const Mat<N>& g) {
    Mat<N> L;
    if (!cholesky(g, L)) throw std::invalid_argument("degenerate metric");
    Mat<N> Li = invert_lower(L);            // L^{-1}
    return matmul(transpose(Li), Li);       // g^{-1} = L^{-T} L^{-1}
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, ascending.
template <int N>
std::array<Real, N> sym_eigenvalues(Mat<N> m) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        Real off = 0;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) off += m(p, q) * m(p, q);
        if (off < 1e-30 * (1.0 + m.norm2())) break;
        for (int p = 0; p < N; ++p) {
            for (int q = p + 1; q < N; ++q) {
                if (m(p, q) == 0.0) continue;
                const Real theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
                const Real t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const Real c = 1.0 / std::sqrt(t * t + 1.0);
                const Real s = t * c;
                for (int k = 0; k < N; ++k) {
                    const Real mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < N; ++k) {
                    const Real mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    std::array<Real, N> ev;
    for (int i = 0; i < N; ++i) ev[i] = m(i, i);
    for (int i = 1; i < N; ++i) {            // insertion sort, ascending
        Real x = ev[i];
        int j = i - 1;
        while (j >= 0 && ev[j] > x) { ev[j + 1] = ev[j]; --j; }
        ev[j + 1] = x;
    }
    return ev;
}

/// Elementary symmetric polynomial e_k of the given values.
template <int N>
Real elementary_symmetric(const std::array<Real, N>& lam, int k) {
    if (k < 0 || k > N) throw std::invalid_argument("elementary_symmetric: k out of range");
    // dynamic programming over prefix products
    std::array<Real, N + 1> e{};
    e[0] = 1.0;
    for (int i = 0; i < N; ++i)
        for (int j = std::min(i + 1, k); j >= 1; --j) e[j] += lam[i] * e[j - 1];
    return e[k];
}

}  // namespace ricci4
