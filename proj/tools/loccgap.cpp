// Command-line front end: evaluates separable instruments, simulates and
// audits communication protocols, and computes the certified gap bounds.
// Exit codes: 0 all checks pass, 1 a check failed, 2 usage or input error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <loccgap/classical.hpp>
#include <loccgap/gap.hpp>
#include <loccgap/json_io.hpp>
#include <loccgap/locc.hpp>
#include <loccgap/measures.hpp>
#include <loccgap/separable.hpp>

using namespace loccgap;

namespace {

struct CheckList {
    bool all_ok = true;

    void row(const std::string& name, bool ok, const std::string& detail = "") {
        std::printf("%s %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
                    detail.empty() ? "" : "  ", detail.c_str());
        all_ok = all_ok && ok;
    }

    int exit_code() const { return all_ok ? 0 : 1; }
};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string history_string(const std::vector<int>& history) {
    if (history.empty()) return "-";
    std::string s;
    for (int j : history) {
        if (!s.empty()) s += '.';
        s += std::to_string(j);
    }
    return s;
}

Party parse_party(const std::string& name) {
    if (name == "alice") return Party::alice;
    if (name == "bob") return Party::bob;
    throw std::invalid_argument("party must be alice or bob");
}

// ---- verify-separable ----

struct VerifySeparableOpts {
    double q = 0.2;
    std::string in;
    std::string out;
};

int run_verify_separable(const VerifySeparableOpts& o) {
    SeparableInstrument inst =
        o.in.empty() ? build_optimal_instrument(o.q) : instrument_from_json(load_json_file(o.in));
    EQMeasure m(o.q);

    std::printf("%-4s %-12s %-12s %-12s %-12s %-12s %-12s\n", "k", "w", "x", "y", "p", "q",
                "C(kept)");
    EbarReport rep = evaluate_ebar(inst, m);
    for (std::size_t k = 0; k < inst.elements.size(); ++k) {
        const SeparableElement& e = inst.elements[k];
        const OutcomeStats& st = rep.stats[k];
        std::string c = st.c_plus ? fmt(std::max(*st.c_plus, st.c_minus.value_or(0.0))) : "-";
        std::printf("%-4zu %-12s %-12s %-12s %-12s %-12s %-12s\n", k, fmt(e.w).c_str(),
                    fmt(e.x).c_str(), fmt(e.y).c_str(), fmt(st.p).c_str(), fmt(st.q).c_str(),
                    c.c_str());
    }
    std::printf("ebar        %s\n", fmt(rep.ebar).c_str());
    std::printf("efficiency  %s\n", fmt(rep.efficiency).c_str());

    CheckList checks;
    checks.row("completeness", inst.completeness_deviation() <= 1e-10,
               "deviation " + fmt(inst.completeness_deviation()));
    checks.row("efficiency-at-least-Q", rep.efficiency >= o.q - 1e-12,
               fmt(rep.efficiency) + " vs " + fmt(o.q));
    for (std::size_t k = 0; k < inst.elements.size(); ++k) {
        const SeparableElement& e = inst.elements[k];
        if (!rep.stats[k].c_plus && !rep.stats[k].c_minus) {
            // Nothing kept on this element; the bound is vacuous (and the
            // cap itself is undefined on the ray 1 + x y = 0).
            std::printf("SKIP concurrence-bound-%zu  (no kept weight)\n", k);
            continue;
        }
        double cap = c_bound(e.x, e.y);
        double kept = std::max(rep.stats[k].c_plus.value_or(0.0),
                               rep.stats[k].c_minus.value_or(0.0));
        checks.row("concurrence-bound-" + std::to_string(k), kept <= cap + 1e-9,
                   fmt(kept) + " vs " + fmt(cap));
    }
    if (o.in.empty())
        checks.row("optimal-ebar-is-1", std::abs(rep.ebar - 1.0) <= 1e-12, fmt(rep.ebar));

    if (!o.out.empty()) save_json_file(o.out, instrument_to_json(inst));
    return checks.exit_code();
}

// ---- simulate ----

struct SimulateOpts {
    double q = 0.2;
    double r = 0.7;
    double alpha = 0.08;
    std::string family = "projective-zz";
    int depth = 2;
    int branching = 2;
    std::uint64_t seed = 1;
    std::vector<double> thetas;
    std::string first = "alice";
    std::string in;
    std::string out;
};

int run_simulate(const SimulateOpts& o) {
    LoccProtocol proto;
    if (!o.in.empty()) {
        proto = protocol_from_json(load_json_file(o.in));
    } else {
        ProtocolFamilyParams p;
        p.depth = o.depth;
        p.branching = o.branching;
        p.seed = o.seed;
        p.thetas = o.thetas.empty() ? std::vector<double>{0.3, 0.5} : o.thetas;
        p.first = parse_party(o.first);
        proto = build_protocol_family(o.family, p);
    }

    SimulationResult sim = simulate(proto);
    GammaClassification cls = classify(sim.records, o.r);
    EQMeasure m(o.q);
    EbarLocc ebar = ebar_locc(sim.records, m);

    std::printf("%-14s %-12s %-12s %-12s %-12s %s\n", "branch", "x", "y", "p", "q", "set");
    for (const BranchRecord& rec : sim.records) {
        const char* set = cls.gamma_plus.count(rec.history)   ? "G+"
                          : cls.gamma_minus.count(rec.history) ? "G-"
                                                               : "G0";
        std::printf("%-14s %-12s %-12s %-12s %-12s %s\n", history_string(rec.history).c_str(),
                    fmt(rec.trajectory.back()[0]).c_str(), fmt(rec.trajectory.back()[1]).c_str(),
                    fmt(rec.stats.p).c_str(), fmt(rec.stats.q).c_str(), set);
    }
    std::printf("branches %zu  pruned %d\n", sim.records.size(), sim.pruned_branches);
    std::printf("ebar %s  upper-bound %s\n", fmt(ebar.ebar).c_str(),
                fmt(ebar.upper_bound).c_str());

    AuditReport audit = audit_inequalities(sim.records, cls, o.q, o.r, o.alpha);
    std::printf("efficiency %s  premise(eff>=Q) %s\n", fmt(audit.efficiency).c_str(),
                audit.efficiency_met ? "met" : "not met");

    CheckList checks;
    checks.row("zigzag", verify_zigzag(sim.records));
    double bdev = max_branching_deviation(proto);
    checks.row("branching-consistency", bdev <= 1e-10, "deviation " + fmt(bdev));
    for (const AuditCheck& c : audit.checks) {
        if (!c.applicable) {
            std::printf("SKIP %s  (efficiency premise not met)\n", c.name.c_str());
            continue;
        }
        checks.row(c.name, c.passed, fmt(c.lhs) + " vs " + fmt(c.rhs));
    }
    checks.row("ebar-upper-bound", ebar.ebar <= ebar.upper_bound + 1e-9,
               fmt(ebar.ebar) + " vs " + fmt(ebar.upper_bound));

    if (!o.out.empty()) save_json_file(o.out, protocol_to_json(proto));
    return checks.exit_code();
}

// ---- gap ----

struct GapOpts {
    double q = 0.2;
    double r = 0.7;
    double alpha = 0.08;
    int grid = 2001;
    double tol = 1e-4;
    bool optimize = false;
};

int run_gap(const GapOpts& o) {
    GapResult g = o.optimize ? optimize_gap(o.q) : delta_low(o.q, o.r, o.alpha);
    std::printf("Q %s  r %s  alpha %s\n", fmt(g.params.q).c_str(), fmt(g.params.r).c_str(),
                fmt(g.params.alpha).c_str());
    std::printf("star point  x %s  y %s  mu %s\n", fmt(g.star.x_star).c_str(),
                fmt(g.star.y_star).c_str(), fmt(g.star.mu_star).c_str());
    std::printf("delta_min   %s\n", fmt(g.delta_min).c_str());
    std::printf("delta_low   %s\n", fmt(g.delta_low).c_str());

    EQMeasure m(o.q);
    double grid_min = delta_min_grid(m, g.params.q, g.params.r, g.params.alpha, g.params.mu,
                                     o.grid);
    std::printf("grid check  %s (n = %d)\n", fmt(grid_min).c_str(), o.grid);

    CheckList checks;
    checks.row("grid-agrees-with-analytic", std::abs(grid_min - g.delta_min) <= o.tol,
               fmt(std::abs(grid_min - g.delta_min)) + " vs tol " + fmt(o.tol));
    checks.row("mu-in-admissible-range",
               g.star.mu_star > 0.0 && g.star.mu_star < 1.0 / (1.0 - o.q),
               fmt(g.star.mu_star));
    checks.row("delta-low-positive", g.delta_low > 0.0, fmt(g.delta_low));
    return checks.exit_code();
}

// ---- figure2 ----

struct Figure2Opts {
    std::vector<double> qs;
    std::string out;
};

int run_figure2(const Figure2Opts& o) {
    std::vector<double> qs = o.qs;
    if (qs.empty())
        for (int i = 1; i <= 19; ++i) qs.push_back(i / 20.0);
    std::vector<Figure2Row> rows = sweep_figure2(qs);
    std::string csv = format_figure2_csv(rows);
    if (o.out.empty())
        std::fputs(csv.c_str(), stdout);
    else
        save_text_file(o.out, csv);

    CheckList checks;
    bool positive = true;
    for (const Figure2Row& r : rows) positive = positive && r.delta_low > 0.0;
    checks.row("all-gaps-positive", positive);
    return checks.exit_code();
}

// ---- classical ----

struct ClassicalOpts {
    double q = 0.2;
    std::string family;
    double pass_prob = 0.5;
    std::uint64_t seed = 1;
    int depth = 2;
    std::string in;
    std::string out;
};

PcProtocol stock_pc(const std::string& family, double pass_prob, std::uint64_t seed, int depth) {
    if (family == "full-reveal") return make_pc_full_reveal();
    if (family == "uniform-coin") return make_pc_uniform_coin();
    if (family == "reveal-both") return make_pc_reveal_both();
    if (family == "reveal-or-pass") return make_pc_reveal_or_pass(pass_prob);
    if (family == "random") return make_random_pc(seed, depth, 4);
    throw std::invalid_argument("unknown announcement family: " + family);
}

int run_classical(const ClassicalOpts& o) {
    ClassicalChannel ch;
    bool agent_baseline = o.in.empty() && o.family.empty();
    if (agent_baseline)
        ch = channel_of_agent(build_classical_separable(o.q));
    else if (!o.in.empty())
        ch = channel_of_pc(pc_from_json(load_json_file(o.in)));
    else
        ch = channel_of_pc(stock_pc(o.family, o.pass_prob, o.seed, o.depth));

    EQMeasure m(o.q);
    std::vector<ChannelOutcomeStats> st = channel_stats(ch);
    std::printf("%-10s %-12s %-12s %-12s\n", "outcome", "p", "q", "lambda");
    for (std::size_t k = 0; k < ch.outcomes.size(); ++k)
        std::printf("%-10s %-12s %-12s %-12s\n", ch.outcomes[k].c_str(), fmt(st[k].p_cl).c_str(),
                    fmt(st[k].q_cl).c_str(),
                    st[k].lambda_cl ? fmt(*st[k].lambda_cl).c_str() : "-");

    KbarReport rep = kbar(ch, m);
    bool separable = is_separable_channel(ch);
    std::printf("kbar %s  efficiency %s  separable %s\n", fmt(rep.kbar).c_str(),
                fmt(rep.efficiency).c_str(), separable ? "yes" : "no");

    CheckList checks;
    if (agent_baseline) {
        checks.row("kbar-is-1", std::abs(rep.kbar - 1.0) <= 1e-12, fmt(rep.kbar));
        checks.row("efficiency-is-Q", std::abs(rep.efficiency - o.q) <= 1e-12,
                   fmt(rep.efficiency) + " vs " + fmt(o.q));
        checks.row("channel-is-separable", separable);
    } else {
        checks.row("kbar-within-[0,1]", rep.kbar >= -1e-12 && rep.kbar <= 1.0 + 1e-12,
                   fmt(rep.kbar));
    }

    if (!o.out.empty()) save_json_file(o.out, channel_to_json(ch));
    return checks.exit_code();
}

// ---- compile-pc ----

struct CompilePcOpts {
    double q = 0.2;
    std::string family = "reveal-or-pass";
    double pass_prob = 0.5;
    std::uint64_t seed = 1;
    int depth = 2;
    double tol = 1e-10;
    std::string in;
    std::string out;
};

int run_compile_pc(const CompilePcOpts& o) {
    PcProtocol pc = o.in.empty() ? stock_pc(o.family, o.pass_prob, o.seed, o.depth)
                                 : pc_from_json(load_json_file(o.in));
    ClassicalChannel ch = channel_of_pc(pc);
    std::vector<ChannelOutcomeStats> st = channel_stats(ch);
    LoccProtocol locc = compile_pc_to_locc(pc);
    SimulationResult sim = simulate(locc);
    EQMeasure m(o.q);

    auto find = [&](const std::string& name) -> const BranchRecord* {
        for (const BranchRecord& rec : sim.records) {
            std::string h;
            for (int j : rec.history) h += static_cast<char>('0' + j);
            if (h == name) return &rec;
        }
        return nullptr;
    };

    std::printf("%-10s %-12s %-12s %-12s %-12s\n", "outcome", "p(classic)", "p(embed)",
                "q(classic)", "q(embed)");
    CheckList checks;
    double worst = 0.0;
    bool all_found = true;
    for (std::size_t k = 0; k < ch.outcomes.size(); ++k) {
        const BranchRecord* rec = find(ch.outcomes[k]);
        if (!rec) {
            all_found = false;
            std::printf("%-10s missing from the embedded protocol\n", ch.outcomes[k].c_str());
            continue;
        }
        std::printf("%-10s %-12s %-12s %-12s %-12s\n", ch.outcomes[k].c_str(),
                    fmt(st[k].p_cl).c_str(), fmt(rec->stats.p).c_str(), fmt(st[k].q_cl).c_str(),
                    fmt(rec->stats.q).c_str());
        worst = std::max(worst, std::abs(rec->stats.p - st[k].p_cl));
        worst = std::max(worst, std::abs(rec->stats.q - st[k].q_cl));
    }
    KbarReport krep = kbar(ch, m);
    EbarLocc erep = ebar_locc(sim.records, m);
    std::printf("kbar %s  ebar %s\n", fmt(krep.kbar).c_str(), fmt(erep.ebar).c_str());

    checks.row("every-outcome-embedded", all_found);
    checks.row("statistics-match", worst <= o.tol, "max deviation " + fmt(worst));
    checks.row("privacy-matches-entanglement", std::abs(krep.kbar - erep.ebar) <= o.tol,
               fmt(krep.kbar) + " vs " + fmt(erep.ebar));

    if (!o.out.empty()) save_json_file(o.out, protocol_to_json(locc));
    return checks.exit_code();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bell-vs-product discrimination toolkit"};
    app.require_subcommand(1);
    int rc = 0;

    VerifySeparableOpts vs;
    CLI::App* c1 = app.add_subcommand("verify-separable",
                                      "Evaluate a separable instrument and its invariants");
    c1->add_option("--q", vs.q, "Efficiency parameter Q in (0,1)");
    c1->add_option("--in", vs.in, "Instrument JSON (default: the optimal instrument at Q)");
    c1->add_option("--out", vs.out, "Write the evaluated instrument as JSON");
    c1->callback([&] { rc = run_verify_separable(vs); });

    SimulateOpts sim;
    CLI::App* c2 = app.add_subcommand("simulate", "Simulate, classify and audit a protocol");
    c2->add_option("--q", sim.q, "Efficiency parameter Q");
    c2->add_option("--r", sim.r, "Witness radius r");
    c2->add_option("--alpha", sim.alpha, "Region enlargement alpha");
    c2->add_option("--family", sim.family, "projective-zz, partial-diagonal or random");
    c2->add_option("--depth", sim.depth, "Rounds for generated protocols");
    c2->add_option("--branching", sim.branching, "Outcomes per round (random family)");
    c2->add_option("--seed", sim.seed, "Seed (random family)");
    c2->add_option("--thetas", sim.thetas, "Angles (partial-diagonal family)");
    c2->add_option("--first", sim.first, "Starting party: alice or bob");
    c2->add_option("--in", sim.in, "Protocol JSON (overrides --family)");
    c2->add_option("--out", sim.out, "Write the protocol as JSON");
    c2->callback([&] { rc = run_simulate(sim); });

    GapOpts gap;
    CLI::App* c3 = app.add_subcommand("gap", "Certified separable-vs-protocol gap at (Q, r, alpha)");
    c3->add_option("--q", gap.q, "Efficiency parameter Q");
    c3->add_option("--r", gap.r, "Witness radius r");
    c3->add_option("--alpha", gap.alpha, "Region enlargement alpha");
    c3->add_option("--grid", gap.grid, "Grid size for the brute-force check");
    c3->add_option("--tol", gap.tol, "Allowed grid vs analytic deviation");
    c3->add_flag("--optimize", gap.optimize, "Optimize (r, alpha) instead of using the values");
    c3->callback([&] { rc = run_gap(gap); });

    Figure2Opts fig;
    CLI::App* c4 = app.add_subcommand("figure2", "Optimized gap as a function of Q (CSV)");
    c4->add_option("--qs", fig.qs, "Q values (default: 0.05 .. 0.95 in steps of 0.05)");
    c4->add_option("--out", fig.out, "CSV output path (default: stdout)");
    c4->callback([&] { rc = run_figure2(fig); });

    ClassicalOpts cls;
    CLI::App* c5 = app.add_subcommand("classical",
                                      "Privacy and efficiency of classical strategies");
    c5->add_option("--q", cls.q, "Efficiency parameter Q");
    c5->add_option("--family", cls.family,
                   "full-reveal, uniform-coin, reveal-both, reveal-or-pass or random");
    c5->add_option("--pass-prob", cls.pass_prob, "Pass probability (reveal-or-pass)");
    c5->add_option("--seed", cls.seed, "Seed (random family)");
    c5->add_option("--depth", cls.depth, "Rounds (random family)");
    c5->add_option("--in", cls.in, "Announcement protocol JSON");
    c5->add_option("--out", cls.out, "Write the transcript channel as JSON");
    c5->callback([&] { rc = run_classical(cls); });

    CompilePcOpts cp;
    CLI::App* c6 = app.add_subcommand("compile-pc",
                                      "Embed an announcement protocol as diagonal rounds");
    c6->add_option("--q", cp.q, "Efficiency parameter Q (for the privacy comparison)");
    c6->add_option("--family", cp.family,
                   "full-reveal, uniform-coin, reveal-both, reveal-or-pass or random");
    c6->add_option("--pass-prob", cp.pass_prob, "Pass probability (reveal-or-pass)");
    c6->add_option("--seed", cp.seed, "Seed (random family)");
    c6->add_option("--depth", cp.depth, "Rounds (random family)");
    c6->add_option("--tol", cp.tol, "Allowed statistic deviation");
    c6->add_option("--in", cp.in, "Announcement protocol JSON");
    c6->add_option("--out", cp.out, "Write the embedded protocol as JSON");
    c6->callback([&] { rc = run_compile_pc(cp); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Normalize CLI11's assorted parse-error codes onto the documented
        // "2 = usage error" contract; --help and --version still exit 0.
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
