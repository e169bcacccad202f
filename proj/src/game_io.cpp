#include "mla/game_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mla {

using nlohmann::json;

namespace {

int line_of_offset(std::string_view text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

StateKind kind_from_string(const std::string& k) {
    if (k == "p1") return StateKind::Player1;
    if (k == "p2") return StateKind::Player2;
    if (k == "prob") return StateKind::Probabilistic;
    throw ParseError(0, "unknown state kind '" + k + "'");
}

const char* kind_to_string(StateKind k) {
    switch (k) {
    case StateKind::Player1: return "p1";
    case StateKind::Player2: return "p2";
    case StateKind::Probabilistic: return "prob";
    }
    return "?";
}

} // namespace

GameGraph parse_game(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(line_of_offset(text, e.byte), e.what());
    }
    try {
        if (!doc.is_object() || !doc.contains("states") || !doc["states"].is_array()) {
            throw ParseError(1, "top-level object with a 'states' array required");
        }
        GameGraph::Builder b;
        bool have_vars = doc.contains("variables");
        if (have_vars) {
            std::vector<VariableSchema::Variable> vars;
            for (const auto& v : doc["variables"]) {
                vars.push_back({v.at("name").get<std::string>(),
                                v.at("domain_size").get<std::uint64_t>()});
            }
            b.set_schema(VariableSchema(std::move(vars)));
        }
        const auto& states = doc["states"];
        b.reserve(states.size(), states.size() * 2);
        StateId expected = 0;
        for (const auto& st : states) {
            const auto id = st.at("id").get<std::uint64_t>();
            if (id != expected) {
                throw ParseError(1, "state ids must be dense from 0; got " + std::to_string(id) +
                                        " at position " + std::to_string(expected));
            }
            StateKind kind = kind_from_string(st.at("kind").get<std::string>());
            StateId s = b.add_state(kind, st.at("reward").get<double>());
            for (const auto& e : st.at("edges")) {
                const auto to = e.at("to").get<std::uint64_t>();
                if (kind == StateKind::Probabilistic) {
                    if (!e.contains("prob")) {
                        throw ParseError(
                            1, "edge of probabilistic state " + std::to_string(id) +
                                   " lacks 'prob'");
                    }
                    b.add_edge(s, static_cast<StateId>(to), e["prob"].get<double>());
                } else {
                    if (e.contains("prob")) {
                        throw ParseError(1, "edge of non-probabilistic state " +
                                                std::to_string(id) + " carries 'prob'");
                    }
                    b.add_edge(s, static_cast<StateId>(to));
                }
            }
            if (have_vars) {
                if (!st.contains("assignment")) {
                    throw ParseError(1, "state " + std::to_string(id) +
                                            " lacks 'assignment' though variables are declared");
                }
                b.set_assignment(s, st["assignment"].get<std::vector<std::uint64_t>>());
            }
            ++expected;
        }
        if (doc.contains("meta")) b.set_meta(doc["meta"].dump());
        return b.build();
    } catch (const json::exception& e) {
        throw ParseError(1, e.what());
    }
}

std::string serialize_game(const GameGraph& g) {
    json doc;
    json states = json::array();
    const bool have_vars = g.schema().has_value();
    for (StateId s = 0; s < g.num_states(); ++s) {
        json st;
        st["id"] = s;
        st["kind"] = kind_to_string(g.kind(s));
        st["reward"] = g.reward(s);
        json edges = json::array();
        auto succ = g.successors(s);
        auto probs = g.probabilities(s);
        for (std::size_t i = 0; i < succ.size(); ++i) {
            json e;
            e["to"] = succ[i];
            if (g.kind(s) == StateKind::Probabilistic) e["prob"] = probs[i];
            edges.push_back(std::move(e));
        }
        st["edges"] = std::move(edges);
        if (have_vars) {
            auto a = g.assignment(s);
            st["assignment"] = std::vector<std::uint64_t>(a.begin(), a.end());
        }
        states.push_back(std::move(st));
    }
    doc["states"] = std::move(states);
    if (have_vars) {
        json vars = json::array();
        for (const auto& v : g.schema()->variables()) {
            vars.push_back({{"name", v.name}, {"domain_size", v.domain_size}});
        }
        doc["variables"] = std::move(vars);
    }
    doc["meta"] = json::parse(g.meta_json.empty() ? "{}" : g.meta_json);
    return doc.dump();
}

GameGraph load_game(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open game file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_game(buf.str());
}

void save_game(const GameGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write game file '" + path + "'");
    out << serialize_game(g);
    out << '\n';
}

} // namespace mla
