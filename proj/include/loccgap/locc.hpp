#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "algebra.hpp"
#include "gap.hpp"
#include "measures.hpp"
#include "separable.hpp"

namespace loccgap {

enum class Party { alice, bob };

inline Party other(Party p) { return p == Party::alice ? Party::bob : Party::alice; }

inline const char* party_name(Party p) { return p == Party::alice ? "alice" : "bob"; }

/// One round of local Kraus operators; complete when sum K^dag K = I.
struct LocalInstrument {
    std::vector<LocalOperator> kraus;

    double completeness_deviation() const {
        LocalOperator sum = LocalOperator::zero();
        for (const LocalOperator& k : kraus) sum = sum + k.gram();
        return sum.max_abs_diff(LocalOperator::identity());
    }
};

/// Node of a finite two-way protocol tree. children holds the outcomes
/// that continue with another round (absent outcomes terminate); stored as
/// a sorted (outcome, subtree) list so the type stays self-contained.
struct ProtocolNode {
    Party party = Party::alice;
    LocalInstrument instrument;
    std::vector<std::pair<int, ProtocolNode>> children;

    const ProtocolNode* child(int outcome) const {
        for (const auto& [j, node] : children)
            if (j == outcome) return &node;
        return nullptr;
    }
};

struct LoccProtocol {
    ProtocolNode root;
    int max_depth = 8;
};

namespace detail {

inline void validate_node(const ProtocolNode& node, int depth, int max_depth) {
    if (depth > max_depth) throw std::invalid_argument("protocol exceeds maximum depth");
    if (node.instrument.kraus.empty())
        throw std::invalid_argument("protocol node has an empty instrument");
    if (node.instrument.completeness_deviation() > 1e-10)
        throw std::invalid_argument("protocol instrument is not complete");
    std::set<int> seen;
    for (const auto& [j, sub] : node.children) {
        if (j < 0 || j >= static_cast<int>(node.instrument.kraus.size()))
            throw std::invalid_argument("protocol child outcome out of range");
        if (!seen.insert(j).second)
            throw std::invalid_argument("protocol child outcome repeated");
        if (sub.party != other(node.party))
            throw std::invalid_argument("protocol parties do not alternate");
        validate_node(sub, depth + 1, max_depth);
    }
}

} // namespace detail

inline void validate_protocol(const LoccProtocol& proto) {
    detail::validate_node(proto.root, 1, proto.max_depth);
}

/// One surviving leaf of a protocol simulation. Sequences hold one entry
/// per executed round plus the initial state, so trajectory[m] is the
/// coordinate pair after m rounds, starting from (0, 0).
struct BranchRecord {
    std::vector<int> history;
    std::vector<Party> actors;
    LocalOperator cumulative_a;
    LocalOperator cumulative_b;
    LocalGramParams a_params;
    LocalGramParams b_params;
    std::vector<std::array<double, 2>> trajectory;
    std::vector<LocalGramParams> a_seq;
    std::vector<LocalGramParams> b_seq;
    OutcomeStats stats;

    double weight() const { return a_params.w * b_params.w; }
};

struct SimulationResult {
    std::vector<BranchRecord> records;
    int pruned_branches = 0;
};

/// Walks every branch, pruning numerically null ones, and records the
/// zigzag trajectory: the acting party's coordinate is recomputed from its
/// new cumulative Gram while the other coordinate is copied verbatim.
inline SimulationResult simulate(const LoccProtocol& proto) {
    validate_protocol(proto);
    SimulationResult out;

    std::vector<int> history;
    std::vector<Party> actors;
    const LocalGramParams unit{1.0, 0.0, cplx{0.0}};
    std::vector<std::array<double, 2>> traj{{0.0, 0.0}};
    std::vector<LocalGramParams> a_seq{unit}, b_seq{unit};

    auto walk = [&](auto&& self, const ProtocolNode& node, const LocalOperator& a,
                    const LocalOperator& b, const LocalGramParams& pa,
                    const LocalGramParams& pb) -> void {
        for (std::size_t j = 0; j < node.instrument.kraus.size(); ++j) {
            const LocalOperator& k = node.instrument.kraus[j];
            LocalOperator na = a, nb = b;
            LocalGramParams npa = pa, npb = pb;
            if (node.party == Party::alice) {
                na = k * a;
                LocalOperator g = na.gram();
                double tr = g.trace().real();
                if (tr <= kNullTraceThreshold || tr * 2.0 * pb.w <= kNullTraceThreshold) {
                    ++out.pruned_branches;
                    continue;
                }
                npa = gram_params(g);
            } else {
                nb = k * b;
                LocalOperator g = nb.gram();
                double tr = g.trace().real();
                if (tr <= kNullTraceThreshold || tr * 2.0 * pa.w <= kNullTraceThreshold) {
                    ++out.pruned_branches;
                    continue;
                }
                npb = gram_params(g);
            }
            history.push_back(static_cast<int>(j));
            actors.push_back(node.party);
            if (node.party == Party::alice)
                traj.push_back({npa.x, traj.back()[1]});
            else
                traj.push_back({traj.back()[0], npb.x});
            a_seq.push_back(npa);
            b_seq.push_back(npb);

            if (const ProtocolNode* sub = node.child(static_cast<int>(j))) {
                self(self, *sub, na, nb, npa, npb);
            } else {
                BranchRecord rec;
                rec.history = history;
                rec.actors = actors;
                rec.cumulative_a = na;
                rec.cumulative_b = nb;
                rec.a_params = npa;
                rec.b_params = npb;
                rec.trajectory = traj;
                rec.a_seq = a_seq;
                rec.b_seq = b_seq;
                rec.stats = kraus_pair_stats(na, nb);
                out.records.push_back(std::move(rec));
            }
            history.pop_back();
            actors.pop_back();
            traj.pop_back();
            a_seq.pop_back();
            b_seq.pop_back();
        }
    };
    walk(walk, proto.root, LocalOperator::identity(), LocalOperator::identity(), unit, unit);
    return out;
}

/// Each round moved exactly one coordinate: the non-acting coordinate is
/// bitwise equal to the previous point (it was copied, never recomputed).
inline bool verify_zigzag(const std::vector<BranchRecord>& records) {
    for (const BranchRecord& rec : records) {
        if (rec.trajectory.size() != rec.actors.size() + 1) return false;
        for (std::size_t m = 0; m < rec.actors.size(); ++m) {
            int frozen = rec.actors[m] == Party::alice ? 1 : 0;
            if (rec.trajectory[m + 1][frozen] != rec.trajectory[m][frozen]) return false;
        }
    }
    return true;
}

/// Leaf sets by the first region the trajectory touches; the plus region
/// wins ties. entry_index maps a classified leaf history to the trajectory
/// index of that first contact.
struct GammaClassification {
    std::set<std::vector<int>> gamma_0;
    std::set<std::vector<int>> gamma_plus;
    std::set<std::vector<int>> gamma_minus;
    std::set<std::vector<int>> entry_plus;
    std::set<std::vector<int>> entry_minus;
    std::map<std::vector<int>, int> entry_index;
};

namespace detail {

inline std::optional<std::pair<int, Sign>> first_entry(const BranchRecord& rec, double r) {
    for (std::size_t l = 0; l < rec.trajectory.size(); ++l) {
        double x = rec.trajectory[l][0], y = rec.trajectory[l][1];
        if (gamma_pm(x, y, r, Sign::plus) >= 0.0) return std::pair{static_cast<int>(l), Sign::plus};
        if (gamma_pm(x, y, r, Sign::minus) >= 0.0)
            return std::pair{static_cast<int>(l), Sign::minus};
    }
    return std::nullopt;
}

} // namespace detail

inline GammaClassification classify(const std::vector<BranchRecord>& records, double r) {
    if (!(r > 0.0 && r < 1.0)) throw std::domain_error("classify: r must lie in (0,1)");
    GammaClassification cls;
    for (const BranchRecord& rec : records) {
        auto hit = detail::first_entry(rec, r);
        if (!hit) {
            cls.gamma_0.insert(rec.history);
            continue;
        }
        auto [l, sign] = *hit;
        std::vector<int> prefix(rec.history.begin(), rec.history.begin() + l);
        if (sign == Sign::plus) {
            cls.gamma_plus.insert(rec.history);
            cls.entry_plus.insert(std::move(prefix));
        } else {
            cls.gamma_minus.insert(rec.history);
            cls.entry_minus.insert(std::move(prefix));
        }
        cls.entry_index[rec.history] = l;
    }
    return cls;
}

struct AuditCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool applicable = true;
    bool passed = true;
};

struct AuditReport {
    double efficiency = 0.0;
    bool efficiency_met = false;  // efficiency >= Q (the premise of two checks)
    std::vector<AuditCheck> checks;

    bool passed() const {
        for (const AuditCheck& c : checks)
            if (c.applicable && !c.passed) return false;
        return true;
    }
};

/// Verifies the inequalities behind the gap bound on a simulated protocol:
///   - entry-sum conservation: sum of elements over first-entry prefixes
///     equals the sum over the leaves they shadow, per region;
///   - discrimination capture: q_+ + q_- >= Q (needs the efficiency premise);
///   - kept-weight floor: p_+/- >= [(1-r)/(1+r)] q_+/- unconditionally;
///   - kept-weight lower bound: total p inside the enlarged regions is at
///     least [2 alpha / (1-r^2+2 alpha)] [(1-r)/(1+r)] Q (needs the premise);
///   - null-branch landing: every p = 0 leaf was classified.
inline AuditReport audit_inequalities(const std::vector<BranchRecord>& records,
                                      const GammaClassification& cls, double q, double r,
                                      double alpha) {
    check_gap_feasible(q, r, alpha);
    const double tol = 1e-9;
    AuditReport rep;
    for (const BranchRecord& rec : records)
        if (rec.stats.p <= kProbZeroThreshold) rep.efficiency += rec.stats.q;
    rep.efficiency_met = rep.efficiency >= q - 1e-12;

    Mat4 entry_sum_p, entry_sum_m, leaf_sum_p, leaf_sum_m;
    std::set<std::vector<int>> seen_p, seen_m;
    double q_plus = 0.0, q_minus = 0.0, p_plus = 0.0, p_minus = 0.0;
    double p_enlarged = 0.0;
    int landing_misses = 0;

    for (const BranchRecord& rec : records) {
        bool in_plus = cls.gamma_plus.count(rec.history) > 0;
        bool in_minus = !in_plus && cls.gamma_minus.count(rec.history) > 0;
        Mat4 leaf = tensor(reconstruct(rec.a_params), reconstruct(rec.b_params));
        if (in_plus || in_minus) {
            int l = cls.entry_index.at(rec.history);
            std::vector<int> prefix(rec.history.begin(), rec.history.begin() + l);
            Mat4 entry = tensor(reconstruct(rec.a_seq[l]), reconstruct(rec.b_seq[l]));
            if (in_plus) {
                leaf_sum_p = leaf_sum_p + leaf;
                q_plus += rec.stats.q;
                p_plus += rec.stats.p;
                if (seen_p.insert(prefix).second) entry_sum_p = entry_sum_p + entry;
            } else {
                leaf_sum_m = leaf_sum_m + leaf;
                q_minus += rec.stats.q;
                p_minus += rec.stats.p;
                if (seen_m.insert(prefix).second) entry_sum_m = entry_sum_m + entry;
            }
        } else if (rec.stats.p <= kProbZeroThreshold) {
            ++landing_misses;
        }
        double x = rec.trajectory.back()[0], y = rec.trajectory.back()[1];
        if (in_enlarged_union(x, y, r, alpha)) p_enlarged += rec.stats.p;
    }

    double dev_p = (entry_sum_p - leaf_sum_p).max_abs();
    double dev_m = (entry_sum_m - leaf_sum_m).max_abs();
    rep.checks.push_back({"entry-sum-plus", dev_p, 0.0, true, dev_p <= 1e-10});
    rep.checks.push_back({"entry-sum-minus", dev_m, 0.0, true, dev_m <= 1e-10});
    rep.checks.push_back({"discrimination-capture", q_plus + q_minus, q,
                          rep.efficiency_met, q_plus + q_minus >= q - tol});
    double ratio = (1.0 - r) / (1.0 + r);
    rep.checks.push_back(
        {"kept-weight-floor-plus", p_plus, ratio * q_plus, true, p_plus >= ratio * q_plus - tol});
    rep.checks.push_back({"kept-weight-floor-minus", p_minus, ratio * q_minus, true,
                          p_minus >= ratio * q_minus - tol});
    double lower = (2.0 * alpha / (1.0 - r * r + 2.0 * alpha)) * ratio * q;
    rep.checks.push_back(
        {"kept-weight-lower-bound", p_enlarged, lower, rep.efficiency_met, p_enlarged >= lower - tol});
    rep.checks.push_back({"null-branch-landing", static_cast<double>(landing_misses), 0.0, true,
                          landing_misses == 0});
    return rep;
}

struct EbarLocc {
    double ebar = 0.0;
    double upper_bound = 0.0;  // sum of p_k m(c_bound(x_k, y_k)) over kept leaves
};

/// Residual entanglement of a simulated protocol, plus the diagonal-coordinate
/// upper bound it must respect.
inline EbarLocc ebar_locc(const std::vector<BranchRecord>& records, const EntanglementMeasure& m) {
    EbarLocc res;
    for (const BranchRecord& rec : records) {
        const OutcomeStats& st = rec.stats;
        if (st.p <= kProbZeroThreshold) continue;
        double term = 0.0;
        if (st.c_plus) term += st.p_plus * m.eval(*st.c_plus);
        if (st.c_minus) term += st.p_minus * m.eval(*st.c_minus);
        res.ebar += 0.5 * term;
        res.upper_bound +=
            st.p * m.eval(c_bound(rec.trajectory.back()[0], rec.trajectory.back()[1]));
    }
    return res;
}

/// Max deviation, over all internal nodes, between a node's element and the
/// sum of its outcomes' elements (branching consistency of the tree).
inline double max_branching_deviation(const LoccProtocol& proto) {
    double worst = 0.0;
    auto walk = [&](auto&& self, const ProtocolNode& node, const LocalOperator& a,
                    const LocalOperator& b) -> void {
        Mat4 here = tensor(a.gram(), b.gram());
        Mat4 sum;
        for (std::size_t j = 0; j < node.instrument.kraus.size(); ++j) {
            LocalOperator na = a, nb = b;
            if (node.party == Party::alice)
                na = node.instrument.kraus[j] * a;
            else
                nb = node.instrument.kraus[j] * b;
            sum = sum + tensor(na.gram(), nb.gram());
            if (const ProtocolNode* sub = node.child(static_cast<int>(j))) self(self, *sub, na, nb);
        }
        worst = std::max(worst, (sum - here).max_abs());
    };
    walk(walk, proto.root, LocalOperator::identity(), LocalOperator::identity());
    return worst;
}

namespace detail {

inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double gaussian(std::mt19937_64& g) {
    double u1 = uniform01(g), u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

inline cplx cgaussian(std::mt19937_64& g) {
    double re = gaussian(g), im = gaussian(g);
    return {re, im};
}

} // namespace detail

/// Alternating projective dephasing rounds: each round applies
/// {diag(1,0), diag(0,1)} and every outcome continues until depth rounds.
inline LoccProtocol make_projective_zz(int depth, Party first = Party::alice) {
    if (depth < 1 || depth > 8) throw std::domain_error("make_projective_zz: depth out of range");
    auto build = [](auto&& self, int remaining, Party p) -> ProtocolNode {
        ProtocolNode node;
        node.party = p;
        node.instrument.kraus = {LocalOperator::diag(1.0, 0.0), LocalOperator::diag(0.0, 1.0)};
        if (remaining > 1)
            for (int j = 0; j < 2; ++j)
                node.children.emplace_back(j, self(self, remaining - 1, other(p)));
        return node;
    };
    return {build(build, depth, first), std::max(8, depth)};
}

/// Alternating partial dephasing: round m applies
/// {diag(cos t_m, sin t_m), diag(sin t_m, cos t_m)} and always continues.
inline LoccProtocol make_partial_diagonal(const std::vector<double>& thetas,
                                          Party first = Party::alice) {
    if (thetas.empty() || thetas.size() > 8)
        throw std::domain_error("make_partial_diagonal: need between 1 and 8 angles");
    auto build = [&thetas](auto&& self, std::size_t m, Party p) -> ProtocolNode {
        double c = std::cos(thetas[m]), s = std::sin(thetas[m]);
        ProtocolNode node;
        node.party = p;
        node.instrument.kraus = {LocalOperator::diag(c, s), LocalOperator::diag(s, c)};
        if (m + 1 < thetas.size())
            for (int j = 0; j < 2; ++j)
                node.children.emplace_back(j, self(self, m + 1, other(p)));
        return node;
    };
    return {build(build, 0, first), 8};
}

/// Random complete-instrument protocol: every node draws `branching` Kraus
/// operators with Gaussian entries, normalized by the inverse square root
/// of their summed Gram so the round is exactly complete. Outcomes continue
/// to the full depth except for a 15% chance of early termination. The
/// starting party also comes from the seed.
inline LoccProtocol make_random_protocol(std::uint64_t seed, int depth, int branching) {
    if (depth < 1 || depth > 8) throw std::domain_error("make_random_protocol: depth out of range");
    if (branching < 1 || branching > 6)
        throw std::domain_error("make_random_protocol: branching out of range");
    std::mt19937_64 g(seed);
    Party first = (g() & 1u) ? Party::bob : Party::alice;
    auto build = [&](auto&& self, int remaining, Party p) -> ProtocolNode {
        ProtocolNode node;
        node.party = p;
        std::vector<LocalOperator> raw(branching);
        LocalOperator total = LocalOperator::zero();
        for (LocalOperator& mk : raw) {
            mk = {detail::cgaussian(g), detail::cgaussian(g), detail::cgaussian(g),
                  detail::cgaussian(g)};
            total = total + mk.gram();
        }
        LocalOperator norm = psd_inv_sqrt(total);
        for (const LocalOperator& mk : raw) node.instrument.kraus.push_back(mk * norm);
        for (int j = 0; j < branching; ++j) {
            bool stop = remaining <= 1 || detail::uniform01(g) < 0.15;
            if (!stop) node.children.emplace_back(j, self(self, remaining - 1, other(p)));
        }
        return node;
    };
    return {build(build, depth, first), 8};
}

struct ProtocolFamilyParams {
    int depth = 2;
    int branching = 2;
    std::uint64_t seed = 0;
    std::vector<double> thetas;
    Party first = Party::alice;
};

inline LoccProtocol build_protocol_family(const std::string& name,
                                          const ProtocolFamilyParams& p) {
    if (name == "projective-zz") return make_projective_zz(p.depth, p.first);
    if (name == "partial-diagonal") return make_partial_diagonal(p.thetas, p.first);
    if (name == "random") return make_random_protocol(p.seed, p.depth, p.branching);
    throw std::invalid_argument("unknown protocol family: " + name);
}

} // namespace loccgap
