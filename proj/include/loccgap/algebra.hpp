#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace loccgap {

using cplx = std::complex<double>;

// Weight below which a POVM element / branch operator counts as null.
inline constexpr double kNullTraceThreshold = 1e-14;
// Smallest eigenvalue tolerated when validating positive semidefiniteness.
inline constexpr double kPositivityFloor = -1e-12;
// Probabilities at or below this are treated as exactly zero.
inline constexpr double kProbZeroThreshold = 1e-12;

/// An operator that was required to be positive semidefinite is not.
class NotPositiveError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An element, state, or branch has (numerically) vanishing weight.
/// Tree walkers prune on this condition rather than failing.
class NullElementError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// 2x2 complex matrix acting on a single qubit.
struct LocalOperator {
    cplx m00{0.0}, m01{0.0}, m10{0.0}, m11{0.0};

    static LocalOperator identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static LocalOperator zero() { return {}; }
    static LocalOperator pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }
    static LocalOperator diag(cplx a, cplx d) { return {a, 0.0, 0.0, d}; }

    LocalOperator operator*(const LocalOperator& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }
    LocalOperator operator+(const LocalOperator& o) const {
        return {m00 + o.m00, m01 + o.m01, m10 + o.m10, m11 + o.m11};
    }
    LocalOperator operator-(const LocalOperator& o) const {
        return {m00 - o.m00, m01 - o.m01, m10 - o.m10, m11 - o.m11};
    }
    LocalOperator scaled(cplx s) const { return {s * m00, s * m01, s * m10, s * m11}; }

    LocalOperator adjoint() const {
        return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
    }

    /// adjoint() * (*this); Hermitian and PSD for any input.
    LocalOperator gram() const {
        return {std::norm(m00) + std::norm(m10),
                std::conj(m00) * m01 + std::conj(m10) * m11,
                std::conj(m01) * m00 + std::conj(m11) * m10,
                std::norm(m01) + std::norm(m11)};
    }

    cplx trace() const { return m00 + m11; }
    cplx det() const { return m00 * m11 - m01 * m10; }

    double max_abs_diff(const LocalOperator& o) const {
        return std::max(std::max(std::abs(m00 - o.m00), std::abs(m01 - o.m01)),
                        std::max(std::abs(m10 - o.m10), std::abs(m11 - o.m11)));
    }

    /// Smaller eigenvalue, assuming the matrix is Hermitian.
    double min_eigenvalue_hermitian() const {
        double t = m00.real() + m11.real();
        double d = m00.real() - m11.real();
        return 0.5 * t - std::sqrt(0.25 * d * d + std::norm(m01));
    }

    bool is_hermitian(double tol = 1e-12) const {
        return std::abs(m01 - std::conj(m10)) <= tol &&
               std::abs(m00.imag()) <= tol && std::abs(m11.imag()) <= tol;
    }
};

/// Positive square root of a PSD Hermitian 2x2 matrix, via
/// sqrt(H) = (H + sqrt(det H) I) / sqrt(tr H + 2 sqrt(det H)).
/// A numerically null input yields the zero matrix.
inline LocalOperator psd_sqrt(const LocalOperator& h) {
    double tr = (h.m00 + h.m11).real();
    double dt = std::max(h.det().real(), 0.0);
    double s = std::sqrt(dt);
    double denom = tr + 2.0 * s;
    if (denom <= 0.0) return LocalOperator::zero();
    double f = 1.0 / std::sqrt(denom);
    LocalOperator r = h;
    r.m00 += s;
    r.m11 += s;
    return r.scaled(f);
}

/// Inverse of psd_sqrt for a strictly positive definite input.
inline LocalOperator psd_inv_sqrt(const LocalOperator& h) {
    LocalOperator r = psd_sqrt(h);
    cplx d = r.det();
    if (std::abs(d) <= kNullTraceThreshold)
        throw NotPositiveError("psd_inv_sqrt: matrix is singular");
    cplx f = 1.0 / d;
    return {f * r.m11, -f * r.m01, -f * r.m10, f * r.m00};
}

/// 4x4 complex matrix on the two-qubit space, row-major, basis order
/// |00>, |01>, |10>, |11>.
struct Mat4 {
    std::array<cplx, 16> m{};

    static Mat4 identity() {
        Mat4 r;
        for (int i = 0; i < 4; ++i) r.at(i, i) = 1.0;
        return r;
    }

    cplx& at(int i, int j) { return m[4 * i + j]; }
    const cplx& at(int i, int j) const { return m[4 * i + j]; }

    Mat4 operator+(const Mat4& o) const {
        Mat4 r;
        for (int i = 0; i < 16; ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }
    Mat4 operator-(const Mat4& o) const {
        Mat4 r;
        for (int i = 0; i < 16; ++i) r.m[i] = m[i] - o.m[i];
        return r;
    }

    cplx trace() const { return m[0] + m[5] + m[10] + m[15]; }

    double max_abs() const {
        double v = 0.0;
        for (const cplx& c : m) v = std::max(v, std::abs(c));
        return v;
    }

    cplx det() const {
        auto det3 = [this](int r0, int r1, int r2, int c0, int c1, int c2) {
            return at(r0, c0) * (at(r1, c1) * at(r2, c2) - at(r1, c2) * at(r2, c1)) -
                   at(r0, c1) * (at(r1, c0) * at(r2, c2) - at(r1, c2) * at(r2, c0)) +
                   at(r0, c2) * (at(r1, c0) * at(r2, c1) - at(r1, c1) * at(r2, c0));
        };
        return at(0, 0) * det3(1, 2, 3, 1, 2, 3) - at(0, 1) * det3(1, 2, 3, 0, 2, 3) +
               at(0, 2) * det3(1, 2, 3, 0, 1, 3) - at(0, 3) * det3(1, 2, 3, 0, 1, 2);
    }
};

/// Kronecker product a (x) b with the first factor on the left qubit.
inline Mat4 tensor(const LocalOperator& a, const LocalOperator& b) {
    std::array<std::array<cplx, 2>, 2> am{{{a.m00, a.m01}, {a.m10, a.m11}}};
    std::array<std::array<cplx, 2>, 2> bm{{{b.m00, b.m01}, {b.m10, b.m11}}};
    Mat4 r;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            for (int j = 0; j < 2; ++j)
                for (int l = 0; l < 2; ++l)
                    r.at(2 * i + k, 2 * j + l) = am[i][j] * bm[k][l];
    return r;
}

/// tr(a * b) without forming the product.
inline cplx trace_product(const Mat4& a, const Mat4& b) {
    cplx t = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) t += a.at(i, j) * b.at(j, i);
    return t;
}

/// Unnormalized two-qubit pure state, amplitudes a_ij on |ij>.
struct TwoQubitPureState {
    cplx a00{0.0}, a01{0.0}, a10{0.0}, a11{0.0};

    double norm2() const {
        return std::norm(a00) + std::norm(a01) + std::norm(a10) + std::norm(a11);
    }
    bool is_normalized(double tol = 1e-12) const { return std::abs(norm2() - 1.0) <= tol; }

    static TwoQubitPureState bell_plus() {
        const double r = 1.0 / std::sqrt(2.0);
        return {r, 0.0, 0.0, r};
    }
    static TwoQubitPureState bell_minus() {
        const double r = 1.0 / std::sqrt(2.0);
        return {r, 0.0, 0.0, -r};
    }
    static TwoQubitPureState ket01() { return {0.0, 1.0, 0.0, 0.0}; }
    static TwoQubitPureState ket10() { return {0.0, 0.0, 1.0, 0.0}; }
};

/// (a (x) b) |s>, kept unnormalized so the norm carries the branch probability.
inline TwoQubitPureState apply_product_kraus(const LocalOperator& a, const LocalOperator& b,
                                             const TwoQubitPureState& s) {
    TwoQubitPureState r;
    r.a00 = a.m00 * (b.m00 * s.a00 + b.m01 * s.a01) + a.m01 * (b.m00 * s.a10 + b.m01 * s.a11);
    r.a01 = a.m00 * (b.m10 * s.a00 + b.m11 * s.a01) + a.m01 * (b.m10 * s.a10 + b.m11 * s.a11);
    r.a10 = a.m10 * (b.m00 * s.a00 + b.m01 * s.a01) + a.m11 * (b.m00 * s.a10 + b.m01 * s.a11);
    r.a11 = a.m10 * (b.m10 * s.a00 + b.m11 * s.a01) + a.m11 * (b.m10 * s.a10 + b.m11 * s.a11);
    return r;
}

/// Concurrence of a pure two-qubit state: 2|a00 a11 - a01 a10| / <s|s>.
/// Invariant under local unitaries; 0 for product states, 1 for Bell states.
inline double concurrence_pure(const TwoQubitPureState& s) {
    double n2 = s.norm2();
    if (n2 <= 1e-300) throw NullElementError("concurrence_pure: zero-norm state");
    double c = 2.0 * std::abs(s.a00 * s.a11 - s.a01 * s.a10) / n2;
    return std::min(c, 1.0);
}

/// Parameters (w, x, xi) of a PSD 2x2 matrix written as
/// w [[1+x, xi], [conj(xi), 1-x]]; w >= 0, |x| <= 1, |xi|^2 <= 1-x^2.
struct LocalGramParams {
    double w = 0.0;
    double x = 0.0;
    cplx xi{0.0};

    bool valid(double tol = 1e-12) const {
        return w >= -tol && std::abs(x) <= 1.0 + tol &&
               std::norm(xi) <= 1.0 - x * x + tol;
    }
};

/// Extract (w, x, xi) from a PSD Hermitian 2x2 matrix:
/// w = tr/2, x = (h00 - h11)/tr, xi = 2 h01 / tr.
/// Throws NullElementError when tr <= 1e-14 (the parametrization is
/// undefined for a null element) and NotPositiveError when the input
/// fails Hermiticity or has an eigenvalue below -1e-12.
inline LocalGramParams gram_params(const LocalOperator& h) {
    if (!h.is_hermitian()) throw NotPositiveError("gram_params: matrix is not Hermitian");
    if (h.min_eigenvalue_hermitian() < kPositivityFloor)
        throw NotPositiveError("gram_params: matrix has a negative eigenvalue");
    double tr = (h.m00 + h.m11).real();
    if (tr <= kNullTraceThreshold) throw NullElementError("gram_params: null element");
    LocalGramParams p;
    p.w = 0.5 * tr;
    p.x = std::clamp((h.m00.real() - h.m11.real()) / tr, -1.0, 1.0);
    p.xi = 2.0 * h.m01 / tr;
    return p;
}

/// Inverse of gram_params: w [[1+x, xi], [conj(xi), 1-x]].
inline LocalOperator reconstruct(const LocalGramParams& p) {
    return {p.w * (1.0 + p.x), p.w * p.xi, p.w * std::conj(p.xi), p.w * (1.0 - p.x)};
}

/// Concurrence of the normalized post-measurement state when a POVM element
/// with product Gram matrix g fires on a Bell state with branch probability
/// p_branch: det(g)^{1/4} / p_branch.
inline double concurrence_from_gram(const Mat4& g, double p_branch) {
    if (p_branch <= 0.0)
        throw std::invalid_argument("concurrence_from_gram: branch probability must be positive");
    double d = std::max(g.det().real(), 0.0);
    return std::min(std::pow(d, 0.25) / p_branch, 1.0);
}

} // namespace loccgap
