#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loccgap {

/// Entanglement monotone evaluated on the concurrence of a pure two-qubit
/// state. Implementations must be continuous and nondecreasing on [0,1].
class EntanglementMeasure {
public:
    virtual ~EntanglementMeasure() = default;
    virtual double eval(double concurrence) const = 0;
};

/// lambda_Q = (1 - sqrt(1 - (1-Q)^2)) / 2, the smaller Schmidt coefficient
/// of a pure state with concurrence 1-Q.
inline double eq_lambda(double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("eq_lambda: Q must lie in (0,1)");
    double c = 1.0 - q;
    return 0.5 * (1.0 - std::sqrt(1.0 - c * c));
}

/// The threshold measure: (1 - sqrt(1-C^2)) / (1 - sqrt(1-(1-Q)^2)) for
/// C <= 1-Q, and exactly 1 beyond. Continuous, nondecreasing, saturated
/// on [1-Q, 1].
inline double eq_eval(double concurrence, double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("eq_eval: Q must lie in (0,1)");
    if (!(concurrence >= 0.0 && concurrence <= 1.0))
        throw std::domain_error("eq_eval: concurrence must lie in [0,1]");
    double c0 = 1.0 - q;
    if (concurrence >= c0) return 1.0;
    double denom = 1.0 - std::sqrt(1.0 - c0 * c0);
    return (1.0 - std::sqrt(1.0 - concurrence * concurrence)) / denom;
}

class EQMeasure final : public EntanglementMeasure {
public:
    explicit EQMeasure(double q) : q_(q), lambda_(eq_lambda(q)) {}

    double eval(double concurrence) const override { return eq_eval(concurrence, q_); }

    double q() const { return q_; }
    /// Schmidt weight at the saturation threshold; 2 sqrt(l(1-l)) == 1-Q.
    double lambda() const { return lambda_; }

private:
    double q_;
    double lambda_;
};

/// Checks the strict linear-bound condition
///   m(C) - mu (C - (1-Q)) < m(1-Q)   for all C in [0,1], C != 1-Q
/// on a uniform grid of grid_n + 1 points, skipping points within 1e-9 of
/// the kink at C = 1-Q. No slack is applied: equality counts as failure.
inline bool mu_condition_check(const EntanglementMeasure& m, double q, double mu, int grid_n) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("mu_condition_check: Q must lie in (0,1)");
    if (!(mu > 0.0)) throw std::domain_error("mu_condition_check: mu must be positive");
    if (grid_n < 3) throw std::domain_error("mu_condition_check: grid too coarse");
    double c0 = 1.0 - q;
    double target = m.eval(c0);
    for (int i = 0; i <= grid_n; ++i) {
        double c = static_cast<double>(i) / grid_n;
        if (std::abs(c - c0) <= 1e-9) continue;
        if (!(m.eval(c) - mu * (c - c0) < target)) return false;
    }
    return true;
}

/// Privacy of a symmetric binary secret with bias lambda, scored by the
/// measure through the concurrence 2 sqrt(lambda (1-lambda)) of the
/// corresponding embedded state.
inline double privacy_k(double lambda, const EntanglementMeasure& m) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::domain_error("privacy_k: lambda must lie in [0,1]");
    double c = std::min(2.0 * std::sqrt(lambda * (1.0 - lambda)), 1.0);
    return m.eval(c);
}

} // namespace loccgap
