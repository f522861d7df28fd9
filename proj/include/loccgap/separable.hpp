#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "algebra.hpp"
#include "measures.hpp"

namespace loccgap {

/// One product POVM element w A (x) B with
///   A = [[1+x, xi], [conj(xi), 1-x]],  B = [[1+y, eta], [conj(eta), 1-y]].
/// PSD iff 0 <= w, |x| <= 1, |y| <= 1, |xi|^2 <= 1-x^2, |eta|^2 <= 1-y^2.
struct SeparableElement {
    double w = 0.0;
    double x = 0.0;
    double y = 0.0;
    cplx xi{0.0};
    cplx eta{0.0};

    bool valid(double tol = 1e-12) const {
        return w >= -tol && w <= 1.0 + tol && std::abs(x) <= 1.0 + tol &&
               std::abs(y) <= 1.0 + tol && std::norm(xi) <= 1.0 - x * x + tol &&
               std::norm(eta) <= 1.0 - y * y + tol;
    }

    /// Local factors with the weight split evenly: sqrt(w) A and sqrt(w) B.
    LocalOperator a_factor() const {
        double s = std::sqrt(w);
        return {s * (1.0 + x), s * xi, s * std::conj(xi), s * (1.0 - x)};
    }
    LocalOperator b_factor() const {
        double s = std::sqrt(w);
        return {s * (1.0 + y), s * eta, s * std::conj(eta), s * (1.0 - y)};
    }

    Mat4 gram() const { return tensor(a_factor(), b_factor()); }
};

/// Average firing probability on the equal-bit states (|00>, |11>):
/// p = w (1 + x y).
inline double p_functional(const SeparableElement& e) { return e.w * (1.0 + e.x * e.y); }

/// Average firing probability on the unequal-bit states (|01>, |10>):
/// q = w (1 - x y).
inline double q_functional(const SeparableElement& e) { return e.w * (1.0 - e.x * e.y); }

/// Same functionals read off a full 4x4 element; linear in the element.
inline double p_of_gram(const Mat4& g) { return 0.5 * (g.at(0, 0) + g.at(3, 3)).real(); }
inline double q_of_gram(const Mat4& g) { return 0.5 * (g.at(1, 1) + g.at(2, 2)).real(); }

/// Largest concurrence any element at diagonal coordinates (x, y) can keep:
/// sqrt((1-x^2)(1-y^2)) / (1 + x y). Equals 1 iff y = -x with |x| < 1 and
/// 0 iff either coordinate is extremal. Undefined on the ray 1 + x y = 0.
inline double c_bound(double x, double y) {
    if (!(std::abs(x) <= 1.0 && std::abs(y) <= 1.0))
        throw std::domain_error("c_bound: coordinates must lie in [-1,1]");
    double t = 1.0 + x * y;
    if (t <= kNullTraceThreshold)
        throw std::domain_error("c_bound: undefined where 1 + x y vanishes");
    // (1-x)(1+x) form keeps precision near the extremal coordinates.
    double num = std::sqrt(std::max((1.0 - x) * (1.0 + x) * (1.0 - y) * (1.0 + y), 0.0));
    return std::min(num / t, 1.0);
}

/// Firing statistics of one element on the four reference states, plus the
/// concurrences of the conditional states on the two Bell inputs (present
/// only when the corresponding probability is nonzero).
struct OutcomeStats {
    double p_plus = 0.0;
    double p_minus = 0.0;
    double p = 0.0;
    double q = 0.0;
    std::optional<double> c_plus;
    std::optional<double> c_minus;
};

/// Statistics of the branch reached by applying a (x) b to the reference
/// states: norms on the Bell pair and on |01>, |10>, with the conditional
/// concurrences where defined.
inline OutcomeStats kraus_pair_stats(const LocalOperator& a, const LocalOperator& b) {
    TwoQubitPureState sp = apply_product_kraus(a, b, TwoQubitPureState::bell_plus());
    TwoQubitPureState sm = apply_product_kraus(a, b, TwoQubitPureState::bell_minus());
    OutcomeStats st;
    st.p_plus = sp.norm2();
    st.p_minus = sm.norm2();
    st.p = 0.5 * (st.p_plus + st.p_minus);
    st.q = 0.5 * (apply_product_kraus(a, b, TwoQubitPureState::ket01()).norm2() +
                  apply_product_kraus(a, b, TwoQubitPureState::ket10()).norm2());
    if (st.p_plus > kProbZeroThreshold) st.c_plus = concurrence_pure(sp);
    if (st.p_minus > kProbZeroThreshold) st.c_minus = concurrence_pure(sm);
    return st;
}

/// Statistics of an element realized by its canonical product Kraus pair
/// (the positive square roots of the local factors).
inline OutcomeStats element_stats(const SeparableElement& e) {
    return kraus_pair_stats(psd_sqrt(e.a_factor()), psd_sqrt(e.b_factor()));
}

/// A complete instrument made of product elements.
struct SeparableInstrument {
    std::vector<SeparableElement> elements;

    /// Max-abs deviation of the element sum from the identity.
    double completeness_deviation() const {
        Mat4 sum;
        for (const SeparableElement& e : elements) sum = sum + e.gram();
        return (sum - Mat4::identity()).max_abs();
    }
};

/// The four-element instrument that discriminates with probability Q on
/// unequal bits while keeping the conditional concurrence at 1-Q on the
/// two non-discriminating outcomes. s = sqrt(Q / (2-Q)).
inline SeparableInstrument build_optimal_instrument(double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("build_optimal_instrument: Q must lie in (0,1)");
    double s = std::sqrt(q / (2.0 - q));
    SeparableInstrument inst;
    inst.elements = {
        {q / 4.0, 1.0, -1.0, 0.0, 0.0},
        {q / 4.0, -1.0, 1.0, 0.0, 0.0},
        {(2.0 - q) / 4.0, s, s, 0.0, 0.0},
        {(2.0 - q) / 4.0, -s, -s, 0.0, 0.0},
    };
    return inst;
}

struct EbarReport {
    double ebar = 0.0;        // average measure left on the Bell inputs
    double efficiency = 0.0;  // total q weight of the p = 0 outcomes
    std::vector<OutcomeStats> stats;
};

/// Average residual entanglement sum_{k: p_k > 0} [p_{k|+} m(C_{k|+}) +
/// p_{k|-} m(C_{k|-})] / 2 together with the discrimination efficiency.
/// Requires a complete instrument (deviation <= 1e-10).
inline EbarReport evaluate_ebar(const SeparableInstrument& inst, const EntanglementMeasure& m) {
    if (inst.completeness_deviation() > 1e-10)
        throw std::invalid_argument("evaluate_ebar: instrument is not complete");
    EbarReport rep;
    rep.stats.reserve(inst.elements.size());
    for (const SeparableElement& e : inst.elements) {
        if (!e.valid()) throw NotPositiveError("evaluate_ebar: element is not PSD");
        OutcomeStats st = element_stats(e);
        if (st.p > kProbZeroThreshold) {
            double term = 0.0;
            if (st.c_plus) term += st.p_plus * m.eval(*st.c_plus);
            if (st.c_minus) term += st.p_minus * m.eval(*st.c_minus);
            rep.ebar += 0.5 * term;
        } else {
            rep.efficiency += st.q;
        }
        rep.stats.push_back(std::move(st));
    }
    return rep;
}

/// True when the p = 0 outcomes accumulate q weight at least Q (within 1e-12).
inline bool check_efficiency(const SeparableInstrument& inst, double q) {
    double eff = 0.0;
    for (const SeparableElement& e : inst.elements)
        if (p_functional(e) <= kProbZeroThreshold) eff += q_functional(e);
    return eff >= q - 1e-12;
}

} // namespace loccgap
