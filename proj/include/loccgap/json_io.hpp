#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "classical.hpp"
#include "locc.hpp"
#include "separable.hpp"

namespace loccgap {

using json = nlohmann::json;

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

inline void save_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

inline void save_json_file(const std::string& path, const json& j) {
    save_text_file(path, j.dump(2) + "\n");
}

// ---- separable instruments ----

inline json instrument_to_json(const SeparableInstrument& inst) {
    json arr = json::array();
    for (const SeparableElement& e : inst.elements)
        arr.push_back({{"w", e.w},
                       {"x", e.x},
                       {"y", e.y},
                       {"xi_re", e.xi.real()},
                       {"xi_im", e.xi.imag()},
                       {"eta_re", e.eta.real()},
                       {"eta_im", e.eta.imag()}});
    return arr;
}

inline SeparableInstrument instrument_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("instrument JSON must be an array");
    SeparableInstrument inst;
    for (const json& e : j) {
        SeparableElement el;
        el.w = e.at("w").get<double>();
        el.x = e.at("x").get<double>();
        el.y = e.at("y").get<double>();
        el.xi = {e.value("xi_re", 0.0), e.value("xi_im", 0.0)};
        el.eta = {e.value("eta_re", 0.0), e.value("eta_im", 0.0)};
        if (!el.valid()) throw std::invalid_argument("instrument element is not PSD");
        inst.elements.push_back(el);
    }
    return inst;
}

// ---- protocol trees ----

namespace detail {

inline Party party_from_json(const json& j) {
    std::string s = j.get<std::string>();
    if (s == "alice") return Party::alice;
    if (s == "bob") return Party::bob;
    throw std::invalid_argument("party must be \"alice\" or \"bob\"");
}

template <typename Node, typename ChildParser>
void children_from_json(const json& j, Node& node, ChildParser parse) {
    if (!j.contains("children")) return;
    const json& kids = j.at("children");
    if (!kids.is_object()) throw std::invalid_argument("children must be an object");
    for (auto it = kids.begin(); it != kids.end(); ++it) {
        std::size_t pos = 0;
        int key = std::stoi(it.key(), &pos);
        if (pos != it.key().size() || key < 0)
            throw std::invalid_argument("child keys must be nonnegative integers");
        node.children.emplace_back(key, parse(it.value()));
    }
    std::sort(node.children.begin(), node.children.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
}

} // namespace detail

inline json protocol_node_to_json(const ProtocolNode& node) {
    json jk = json::array();
    for (const LocalOperator& k : node.instrument.kraus)
        jk.push_back({{k.m00.real(), k.m00.imag()},
                      {k.m01.real(), k.m01.imag()},
                      {k.m10.real(), k.m10.imag()},
                      {k.m11.real(), k.m11.imag()}});
    json j{{"party", party_name(node.party)}, {"kraus", std::move(jk)}};
    if (!node.children.empty()) {
        json kids = json::object();
        for (const auto& [outcome, sub] : node.children)
            kids[std::to_string(outcome)] = protocol_node_to_json(sub);
        j["children"] = std::move(kids);
    }
    return j;
}

inline json protocol_to_json(const LoccProtocol& proto) {
    return protocol_node_to_json(proto.root);
}

inline ProtocolNode protocol_node_from_json(const json& j) {
    ProtocolNode node;
    node.party = detail::party_from_json(j.at("party"));
    const json& jk = j.at("kraus");
    if (!jk.is_array() || jk.empty())
        throw std::invalid_argument("kraus must be a nonempty array");
    for (const json& km : jk) {
        if (!km.is_array() || km.size() != 4)
            throw std::invalid_argument("each Kraus operator needs 4 entries (row-major)");
        auto entry = [&km](int i) {
            const json& c = km.at(i);
            if (!c.is_array() || c.size() != 2)
                throw std::invalid_argument("matrix entries are [re, im] pairs");
            return cplx{c.at(0).get<double>(), c.at(1).get<double>()};
        };
        node.instrument.kraus.push_back({entry(0), entry(1), entry(2), entry(3)});
    }
    detail::children_from_json(j, node, protocol_node_from_json);
    return node;
}

inline LoccProtocol protocol_from_json(const json& j) {
    return {protocol_node_from_json(j), 8};
}

// ---- public-communication trees ----

inline json pc_node_to_json(const PcNode& node) {
    json j{{"party", party_name(node.party)},
           {"probs", json::array({node.probs[0], node.probs[1]})}};
    if (!node.children.empty()) {
        json kids = json::object();
        for (const auto& [outcome, sub] : node.children)
            kids[std::to_string(outcome)] = pc_node_to_json(sub);
        j["children"] = std::move(kids);
    }
    return j;
}

inline json pc_to_json(const PcProtocol& proto) { return pc_node_to_json(proto.root); }

inline PcNode pc_node_from_json(const json& j) {
    PcNode node;
    node.party = detail::party_from_json(j.at("party"));
    const json& pr = j.at("probs");
    if (!pr.is_array() || pr.size() != 2)
        throw std::invalid_argument("probs must hold two distributions");
    node.probs[0] = pr.at(0).get<std::vector<double>>();
    node.probs[1] = pr.at(1).get<std::vector<double>>();
    detail::children_from_json(j, node, pc_node_from_json);
    return node;
}

inline PcProtocol pc_from_json(const json& j) { return {pc_node_from_json(j), 8}; }

// ---- classical channels ----

inline json channel_to_json(const ClassicalChannel& ch) {
    return json{{"outcomes", ch.outcomes},
                {"table",
                 {{"00", ch.table[0]},
                  {"01", ch.table[1]},
                  {"10", ch.table[2]},
                  {"11", ch.table[3]}}}};
}

inline ClassicalChannel channel_from_json(const json& j) {
    ClassicalChannel ch;
    ch.outcomes = j.at("outcomes").get<std::vector<std::string>>();
    const json& t = j.at("table");
    ch.table[0] = t.at("00").get<std::vector<double>>();
    ch.table[1] = t.at("01").get<std::vector<double>>();
    ch.table[2] = t.at("10").get<std::vector<double>>();
    ch.table[3] = t.at("11").get<std::vector<double>>();
    ch.validate();
    return ch;
}

} // namespace loccgap
