#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include <loccgap/classical.hpp>

using namespace loccgap;
using Catch::Matchers::WithinAbs;

namespace {

int outcome_index(const ClassicalChannel& ch, const std::string& name) {
    for (std::size_t k = 0; k < ch.outcomes.size(); ++k)
        if (ch.outcomes[k] == name) return static_cast<int>(k);
    return -1;
}

const BranchRecord* branch_by_name(const std::vector<BranchRecord>& records,
                                   const std::string& name) {
    for (const BranchRecord& rec : records) {
        std::string h;
        for (int j : rec.history) h += static_cast<char>('0' + j);
        if (h == name) return &rec;
    }
    return nullptr;
}

} // namespace

TEST_CASE("public announcement validation") {
    REQUIRE_NOTHROW(validate_pc(make_pc_reveal_both()));

    SECTION("distributions must normalize") {
        PcProtocol p;
        p.root.probs = {{{0.5, 0.4}, {0.5, 0.5}}};
        REQUIRE_THROWS_AS(validate_pc(p), std::invalid_argument);
    }
    SECTION("alphabets must agree across bit values") {
        PcProtocol p;
        p.root.probs = {{{1.0}, {0.5, 0.5}}};
        REQUIRE_THROWS_AS(validate_pc(p), std::invalid_argument);
    }
    SECTION("alphabet size is capped") {
        PcProtocol p;
        p.root.probs[0].assign(11, 1.0 / 11.0);
        p.root.probs[1].assign(11, 1.0 / 11.0);
        REQUIRE_THROWS_AS(validate_pc(p), std::invalid_argument);
    }
    SECTION("parties must alternate") {
        PcProtocol p = make_pc_reveal_both();
        p.root.children[0].second.party = p.root.party;
        REQUIRE_THROWS_AS(validate_pc(p), std::invalid_argument);
    }
    SECTION("negative probability") {
        PcProtocol p;
        p.root.probs = {{{1.5, -0.5}, {0.5, 0.5}}};
        REQUIRE_THROWS_AS(validate_pc(p), std::invalid_argument);
    }
}

TEST_CASE("transcript channels of the stock protocols") {
    EQMeasure m(0.2);

    SECTION("one party revealing its bit kills privacy without discriminating") {
        ClassicalChannel ch = channel_of_pc(make_pc_full_reveal());
        ch.validate();
        REQUIRE(ch.outcomes.size() == 2);
        std::vector<ChannelOutcomeStats> st = channel_stats(ch);
        for (const ChannelOutcomeStats& s : st) {
            REQUIRE_THAT(s.p_cl, WithinAbs(0.5, 1e-15));
            REQUIRE_THAT(s.q_cl, WithinAbs(0.5, 1e-15));
        }
        REQUIRE_THAT(*st[outcome_index(ch, "0")].lambda_cl, WithinAbs(1.0, 1e-15));
        REQUIRE_THAT(*st[outcome_index(ch, "1")].lambda_cl, WithinAbs(0.0, 1e-15));
        KbarReport rep = kbar(ch, m);
        REQUIRE_THAT(rep.kbar, WithinAbs(0.0, 1e-15));
        REQUIRE_THAT(rep.efficiency, WithinAbs(0.0, 1e-15));
    }

    SECTION("a coin flip reveals nothing and discriminates nothing") {
        ClassicalChannel ch = channel_of_pc(make_pc_uniform_coin());
        std::vector<ChannelOutcomeStats> st = channel_stats(ch);
        for (const ChannelOutcomeStats& s : st) REQUIRE_THAT(*s.lambda_cl, WithinAbs(0.5, 1e-15));
        KbarReport rep = kbar(ch, m);
        REQUIRE_THAT(rep.kbar, WithinAbs(1.0, 1e-15));
        REQUIRE_THAT(rep.efficiency, WithinAbs(0.0, 1e-15));
    }

    SECTION("both parties revealing discriminates perfectly at zero privacy") {
        ClassicalChannel ch = channel_of_pc(make_pc_reveal_both());
        REQUIRE(ch.outcomes.size() == 4);
        KbarReport rep = kbar(ch, m);
        REQUIRE_THAT(rep.kbar, WithinAbs(0.0, 1e-15));
        REQUIRE_THAT(rep.efficiency, WithinAbs(1.0, 1e-15));
        // The unequal-bit transcripts are exactly the mixed ones.
        std::vector<ChannelOutcomeStats> st = channel_stats(ch);
        REQUIRE_FALSE(st[outcome_index(ch, "01")].lambda_cl.has_value());
        REQUIRE_FALSE(st[outcome_index(ch, "10")].lambda_cl.has_value());
    }

    SECTION("reveal-or-pass trades privacy for efficiency linearly") {
        for (double t : {0.5, 0.8}) {
            ClassicalChannel ch = channel_of_pc(make_pc_reveal_or_pass(t));
            KbarReport rep = kbar(ch, EQMeasure(1.0 - t));
            REQUIRE_THAT(rep.kbar, WithinAbs(t, 1e-14));
            REQUIRE_THAT(rep.efficiency, WithinAbs(1.0 - t, 1e-14));
        }
        REQUIRE_THROWS_AS(make_pc_reveal_or_pass(1.5), std::domain_error);
    }
}

TEST_CASE("non-communicating strategies") {
    SECTION("the biased-coin agent keeps full privacy at efficiency Q") {
        for (double q : {0.05, 0.2, 0.5, 0.8, 0.95}) {
            ClassicalSeparableAgent agent = build_classical_separable(q);
            ClassicalChannel ch = channel_of_agent(agent);
            ch.validate();
            REQUIRE(is_separable_channel(ch));
            KbarReport rep = kbar(ch, EQMeasure(q));
            REQUIRE_THAT(rep.kbar, WithinAbs(1.0, 1e-12));
            REQUIRE_THAT(rep.efficiency, WithinAbs(q, 1e-12));
        }
        REQUIRE_THROWS_AS(build_classical_separable(0.0), std::domain_error);
    }

    SECTION("factorization test accepts transcript channels of product strategies") {
        REQUIRE(is_separable_channel(channel_of_pc(make_pc_full_reveal())));
        REQUIRE(is_separable_channel(channel_of_pc(make_pc_uniform_coin())));
        // Both bits revealed in turn is still a product strategy.
        REQUIRE(is_separable_channel(channel_of_pc(make_pc_reveal_both())));
    }

    SECTION("a parity announcement needs communication") {
        ClassicalChannel parity;
        parity.outcomes = {"even", "odd"};
        parity.table[0] = {1.0, 0.0};
        parity.table[1] = {0.0, 1.0};
        parity.table[2] = {0.0, 1.0};
        parity.table[3] = {1.0, 0.0};
        REQUIRE_FALSE(is_separable_channel(parity));
        // Yet as a transcript of a two-round protocol it is reachable, so
        // kbar still scores it: parity reveals nothing about equal bits.
        KbarReport rep = kbar(parity, EQMeasure(0.2));
        REQUIRE_THAT(rep.kbar, WithinAbs(1.0, 1e-15));
        REQUIRE_THAT(rep.efficiency, WithinAbs(1.0, 1e-15));
    }
}

TEST_CASE("embedding announcements as diagonal rounds") {
    EQMeasure m(0.2);

    SECTION("stock protocols reproduce their classical statistics") {
        for (const PcProtocol& pc : {make_pc_full_reveal(), make_pc_reveal_both(),
                                     make_pc_reveal_or_pass(0.8), make_pc_uniform_coin()}) {
            ClassicalChannel ch = channel_of_pc(pc);
            std::vector<ChannelOutcomeStats> st = channel_stats(ch);
            LoccProtocol locc = compile_pc_to_locc(pc);
            SimulationResult sim = simulate(locc);

            KbarReport krep = kbar(ch, m);
            EbarLocc erep = ebar_locc(sim.records, m);
            REQUIRE_THAT(erep.ebar, WithinAbs(krep.kbar, 1e-12));

            double eff = 0.0;
            for (const BranchRecord& rec : sim.records)
                if (rec.stats.p <= kProbZeroThreshold) eff += rec.stats.q;
            REQUIRE_THAT(eff, WithinAbs(krep.efficiency, 1e-12));

            for (std::size_t k = 0; k < ch.outcomes.size(); ++k) {
                const BranchRecord* rec = branch_by_name(sim.records, ch.outcomes[k]);
                REQUIRE(rec != nullptr);
                REQUIRE_THAT(rec->stats.p, WithinAbs(st[k].p_cl, 1e-12));
                REQUIRE_THAT(rec->stats.q, WithinAbs(st[k].q_cl, 1e-12));
                if (st[k].lambda_cl) {
                    TwoQubitPureState psi = apply_product_kraus(
                        rec->cumulative_a, rec->cumulative_b, TwoQubitPureState::bell_plus());
                    double lam = std::norm(psi.a00) / psi.norm2();
                    REQUIRE_THAT(lam, WithinAbs(*st[k].lambda_cl, 1e-10));
                }
            }
        }
    }

    SECTION("random announcement trees agree outcome by outcome") {
        for (std::uint64_t seed = 1; seed <= 30; ++seed) {
            PcProtocol pc = make_random_pc(seed, 1 + static_cast<int>(seed % 4),
                                           2 + static_cast<int>(seed % 4));
            ClassicalChannel ch = channel_of_pc(pc);
            std::vector<ChannelOutcomeStats> st = channel_stats(ch);
            LoccProtocol locc = compile_pc_to_locc(pc);
            REQUIRE(max_branching_deviation(locc) <= 1e-10);
            SimulationResult sim = simulate(locc);

            double total_p = 0.0;
            for (std::size_t k = 0; k < ch.outcomes.size(); ++k) {
                const BranchRecord* rec = branch_by_name(sim.records, ch.outcomes[k]);
                REQUIRE(rec != nullptr);
                REQUIRE_THAT(rec->stats.p, WithinAbs(st[k].p_cl, 1e-10));
                REQUIRE_THAT(rec->stats.q, WithinAbs(st[k].q_cl, 1e-10));
                total_p += st[k].p_cl;
            }
            REQUIRE_THAT(total_p, WithinAbs(1.0, 1e-10));

            KbarReport krep = kbar(ch, m);
            EbarLocc erep = ebar_locc(sim.records, m);
            REQUIRE_THAT(erep.ebar, WithinAbs(krep.kbar, 1e-10));
        }
    }

    SECTION("the embedded protocol passes the structural checks") {
        LoccProtocol locc = compile_pc_to_locc(make_pc_reveal_or_pass(0.5));
        REQUIRE_NOTHROW(validate_protocol(locc));
        SimulationResult sim = simulate(locc);
        REQUIRE(verify_zigzag(sim.records));
    }
}

TEST_CASE("channel table validation") {
    ClassicalChannel ch;
    ch.outcomes = {"a", "b"};
    ch.table = {{{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}};
    REQUIRE_NOTHROW(ch.validate());

    SECTION("width mismatch") {
        ch.table[2] = {1.0};
        REQUIRE_THROWS_AS(ch.validate(), std::invalid_argument);
    }
    SECTION("row sum off") {
        ch.table[0] = {0.5, 0.6};
        REQUIRE_THROWS_AS(ch.validate(), std::invalid_argument);
    }
    SECTION("negative entry") {
        ch.table[1] = {1.5, -0.5};
        REQUIRE_THROWS_AS(ch.validate(), std::invalid_argument);
    }
}
