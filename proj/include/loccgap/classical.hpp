#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "locc.hpp"
#include "measures.hpp"

namespace loccgap {

/// Classical channel from a two-bit input (one bit per party) to a finite
/// outcome alphabet: table[2i+j][k] = P(outcome k | input ij).
struct ClassicalChannel {
    std::vector<std::string> outcomes;
    std::array<std::vector<double>, 4> table;

    void validate() const {
        for (const std::vector<double>& row : table) {
            if (row.size() != outcomes.size())
                throw std::invalid_argument("channel table width does not match outcome list");
            double sum = 0.0;
            for (double p : row) {
                if (p < 0.0) throw std::invalid_argument("channel probability is negative");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("channel row does not sum to 1");
        }
    }
};

/// Node of a public-communication protocol: the acting party announces an
/// outcome drawn from probs[bit]. Outcomes without children end the protocol.
struct PcNode {
    Party party = Party::alice;
    std::array<std::vector<double>, 2> probs;
    std::vector<std::pair<int, PcNode>> children;

    const PcNode* child(int outcome) const {
        for (const auto& [j, node] : children)
            if (j == outcome) return &node;
        return nullptr;
    }
};

struct PcProtocol {
    PcNode root;
    int max_depth = 8;
};

namespace detail {

inline void validate_pc_node(const PcNode& node, int depth, int max_depth) {
    if (depth > max_depth) throw std::invalid_argument("pc protocol exceeds maximum depth");
    std::size_t n = node.probs[0].size();
    if (n < 1 || n > 10)
        throw std::invalid_argument("pc announcement alphabet must have 1 to 10 symbols");
    if (node.probs[1].size() != n)
        throw std::invalid_argument("pc announcement alphabets differ between bit values");
    for (const std::vector<double>& row : node.probs) {
        double sum = 0.0;
        for (double p : row) {
            if (p < 0.0) throw std::invalid_argument("pc probability is negative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("pc announcement distribution does not sum to 1");
    }
    std::set<int> seen;
    for (const auto& [j, sub] : node.children) {
        if (j < 0 || j >= static_cast<int>(n))
            throw std::invalid_argument("pc child outcome out of range");
        if (!seen.insert(j).second) throw std::invalid_argument("pc child outcome repeated");
        if (sub.party != other(node.party))
            throw std::invalid_argument("pc parties do not alternate");
        validate_pc_node(sub, depth + 1, max_depth);
    }
}

} // namespace detail

inline void validate_pc(const PcProtocol& proto) {
    detail::validate_pc_node(proto.root, 1, proto.max_depth);
}

/// Collapses a public-communication protocol to its transcript channel.
/// Transcript probabilities factor through the parties, so only the four
/// products P_A(h|i) P_B(h|j) are tracked. Transcripts with zero
/// probability on every input are dropped.
inline ClassicalChannel channel_of_pc(const PcProtocol& proto) {
    validate_pc(proto);
    ClassicalChannel ch;
    std::string name;
    auto walk = [&](auto&& self, const PcNode& node, double a0, double a1, double b0,
                    double b1) -> void {
        for (std::size_t j = 0; j < node.probs[0].size(); ++j) {
            double na0 = a0, na1 = a1, nb0 = b0, nb1 = b1;
            if (node.party == Party::alice) {
                na0 *= node.probs[0][j];
                na1 *= node.probs[1][j];
            } else {
                nb0 *= node.probs[0][j];
                nb1 *= node.probs[1][j];
            }
            std::size_t keep = name.size();
            name += static_cast<char>('0' + j);
            if (const PcNode* sub = node.child(static_cast<int>(j))) {
                self(self, *sub, na0, na1, nb0, nb1);
            } else if (na0 * nb0 > 0.0 || na0 * nb1 > 0.0 || na1 * nb0 > 0.0 ||
                       na1 * nb1 > 0.0) {
                ch.outcomes.push_back(name);
                ch.table[0].push_back(na0 * nb0);
                ch.table[1].push_back(na0 * nb1);
                ch.table[2].push_back(na1 * nb0);
                ch.table[3].push_back(na1 * nb1);
            }
            name.resize(keep);
        }
    };
    walk(walk, proto.root, 1.0, 1.0, 1.0, 1.0);
    return ch;
}

/// Per-outcome equal-bit weight, unequal-bit weight, and the conditional
/// bias of the equal-bit secret (defined only where p_cl > 0).
struct ChannelOutcomeStats {
    double p_cl = 0.0;
    double q_cl = 0.0;
    std::optional<double> lambda_cl;
};

inline std::vector<ChannelOutcomeStats> channel_stats(const ClassicalChannel& ch) {
    ch.validate();
    std::vector<ChannelOutcomeStats> out(ch.outcomes.size());
    for (std::size_t k = 0; k < ch.outcomes.size(); ++k) {
        ChannelOutcomeStats& st = out[k];
        st.p_cl = 0.5 * (ch.table[0][k] + ch.table[3][k]);
        st.q_cl = 0.5 * (ch.table[1][k] + ch.table[2][k]);
        if (st.p_cl > kProbZeroThreshold) st.lambda_cl = ch.table[0][k] / (2.0 * st.p_cl);
    }
    return out;
}

struct KbarReport {
    double kbar = 0.0;        // average residual privacy of the equal-bit secret
    double efficiency = 0.0;  // q weight of the outcomes that expose p_cl = 0
};

/// Average privacy left in the equal-bit secret after the transcript is
/// public, scored by the measure through the bias of each outcome.
inline KbarReport kbar(const ClassicalChannel& ch, const EntanglementMeasure& m) {
    KbarReport rep;
    for (const ChannelOutcomeStats& st : channel_stats(ch)) {
        if (st.lambda_cl)
            rep.kbar += st.p_cl * privacy_k(*st.lambda_cl, m);
        else
            rep.efficiency += st.q_cl;
    }
    return rep;
}

/// A non-communicating strategy: each outcome fires with probability
/// P(k|ij) = w_k (1 + (-1)^i x_k)(1 + (-1)^j y_k).
struct ClassicalSeparableAgent {
    struct Row {
        double w = 0.0;
        double x = 0.0;
        double y = 0.0;
    };
    std::vector<Row> rows;
};

/// Classical mirror of the optimal product instrument: two perfectly
/// revealing rows of total unequal-bit weight Q and two biased rows that
/// keep the secret at privacy m(1-Q).
inline ClassicalSeparableAgent build_classical_separable(double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("build_classical_separable: Q must lie in (0,1)");
    double s = std::sqrt(q / (2.0 - q));
    ClassicalSeparableAgent agent;
    agent.rows = {
        {q / 4.0, 1.0, -1.0},
        {q / 4.0, -1.0, 1.0},
        {(2.0 - q) / 4.0, s, s},
        {(2.0 - q) / 4.0, -s, -s},
    };
    return agent;
}

inline ClassicalChannel channel_of_agent(const ClassicalSeparableAgent& agent) {
    ClassicalChannel ch;
    for (std::size_t k = 0; k < agent.rows.size(); ++k) {
        const auto& row = agent.rows[k];
        ch.outcomes.push_back(std::to_string(k));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                ch.table[2 * i + j].push_back(row.w * (1.0 + (i ? -1.0 : 1.0) * row.x) *
                                              (1.0 + (j ? -1.0 : 1.0) * row.y));
    }
    return ch;
}

/// A channel is a non-communicating strategy iff every outcome column
/// factorizes over the two input bits: the cross ratio
/// P(k|00) P(k|11) - P(k|01) P(k|10) vanishes and the reconstructed
/// (w, x, y) row reproduces the column.
inline bool is_separable_channel(const ClassicalChannel& ch, double tol = 1e-10) {
    ch.validate();
    for (std::size_t k = 0; k < ch.outcomes.size(); ++k) {
        double p00 = ch.table[0][k], p01 = ch.table[1][k];
        double p10 = ch.table[2][k], p11 = ch.table[3][k];
        if (std::abs(p00 * p11 - p01 * p10) > 1e-12) return false;
        double w = 0.25 * (p00 + p01 + p10 + p11);
        if (w <= 1e-15) continue;
        double x = 0.25 * (p00 + p01 - p10 - p11) / w;
        double y = 0.25 * (p00 - p01 + p10 - p11) / w;
        auto model = [&](int i, int j) {
            return w * (1.0 + (i ? -1.0 : 1.0) * x) * (1.0 + (j ? -1.0 : 1.0) * y);
        };
        if (std::abs(model(0, 0) - p00) > tol || std::abs(model(0, 1) - p01) > tol ||
            std::abs(model(1, 0) - p10) > tol || std::abs(model(1, 1) - p11) > tol)
            return false;
    }
    return true;
}

/// Embeds a public-communication protocol as a protocol of diagonal local
/// instruments: announcing j from distribution probs[bit] becomes the Kraus
/// operator diag(sqrt(probs[0][j]), sqrt(probs[1][j])). Branch statistics
/// and conditional states then reproduce the classical ones exactly.
inline LoccProtocol compile_pc_to_locc(const PcProtocol& proto) {
    validate_pc(proto);
    auto build = [](auto&& self, const PcNode& node) -> ProtocolNode {
        ProtocolNode out;
        out.party = node.party;
        for (std::size_t j = 0; j < node.probs[0].size(); ++j)
            out.instrument.kraus.push_back(LocalOperator::diag(
                std::sqrt(node.probs[0][j]), std::sqrt(node.probs[1][j])));
        for (const auto& [j, sub] : node.children) out.children.emplace_back(j, self(self, sub));
        return out;
    };
    return {build(build, proto.root), proto.max_depth};
}

/// One round: the first party announces its bit verbatim.
inline PcProtocol make_pc_full_reveal(Party first = Party::alice) {
    PcProtocol proto;
    proto.root.party = first;
    proto.root.probs = {{{1.0, 0.0}, {0.0, 1.0}}};
    return proto;
}

/// One round: the announcement is a fair coin independent of the bit.
inline PcProtocol make_pc_uniform_coin(Party first = Party::alice) {
    PcProtocol proto;
    proto.root.party = first;
    proto.root.probs = {{{0.5, 0.5}, {0.5, 0.5}}};
    return proto;
}

/// Two rounds: both parties reveal their bits in turn.
inline PcProtocol make_pc_reveal_both(Party first = Party::alice) {
    PcProtocol proto;
    proto.root = make_pc_full_reveal(first).root;
    for (int j = 0; j < 2; ++j)
        proto.root.children.emplace_back(j, make_pc_full_reveal(other(first)).root);
    return proto;
}

/// The first party either reveals its bit (probability 1 - pass_prob, after
/// which the other party reveals too) or passes, ending the protocol with
/// the secret untouched.
inline PcProtocol make_pc_reveal_or_pass(double pass_prob, Party first = Party::alice) {
    if (!(pass_prob >= 0.0 && pass_prob <= 1.0))
        throw std::domain_error("make_pc_reveal_or_pass: pass probability out of range");
    PcProtocol proto;
    proto.root.party = first;
    proto.root.probs = {{{1.0 - pass_prob, 0.0, pass_prob}, {0.0, 1.0 - pass_prob, pass_prob}}};
    for (int j = 0; j < 2; ++j)
        proto.root.children.emplace_back(j, make_pc_full_reveal(other(first)).root);
    return proto;
}

/// Random announcement trees: alphabet size 2..max_outcomes, distributions
/// drawn from normalized exponentials, 25% chance per outcome of ending
/// early. Fully determined by the seed.
inline PcProtocol make_random_pc(std::uint64_t seed, int depth, int max_outcomes) {
    if (depth < 1 || depth > 8) throw std::domain_error("make_random_pc: depth out of range");
    if (max_outcomes < 2 || max_outcomes > 10)
        throw std::domain_error("make_random_pc: alphabet size out of range");
    std::mt19937_64 g(seed);
    Party first = (g() & 1u) ? Party::bob : Party::alice;
    auto draw_dist = [&g](std::size_t n) {
        std::vector<double> v(n);
        double sum = 0.0;
        for (double& p : v) {
            p = -std::log1p(-detail::uniform01(g));
            sum += p;
        }
        for (double& p : v) p /= sum;
        return v;
    };
    auto build = [&](auto&& self, int remaining, Party p) -> PcNode {
        PcNode node;
        node.party = p;
        std::size_t n = 2 + static_cast<std::size_t>(g() % (max_outcomes - 1));
        node.probs[0] = draw_dist(n);
        node.probs[1] = draw_dist(n);
        for (std::size_t j = 0; j < n; ++j) {
            bool stop = remaining <= 1 || detail::uniform01(g) < 0.25;
            if (!stop)
                node.children.emplace_back(static_cast<int>(j), self(self, remaining - 1, other(p)));
        }
        return node;
    };
    return {build(build, depth, first), 8};
}

} // namespace loccgap
