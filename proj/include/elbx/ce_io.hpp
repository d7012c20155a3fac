#pragma once

#include <json.hpp>

#include "elbx/ce.hpp"
#include "elbx/text_io.hpp"

namespace elbx {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline ordered_json ind_to_json(Ind x, const Vocabulary& voc) {
    if (x.is_fresh()) return ordered_json{{"fresh", x.fresh_index()}};
    return ordered_json(voc.text(x.id()));
}

inline ordered_json atom_to_json(const PatternAtom& a, const Vocabulary& voc) {
    ordered_json j;
    if (a.kind == PatternAtom::Kind::Class) {
        j["kind"] = "class";
        j["name"] = voc.text(a.cls);
        j["arg"] = "x" + std::to_string(a.v1);
    } else {
        j["kind"] = "role";
        j["name"] = voc.text(a.role);
        j["args"] = {"x" + std::to_string(a.v1), "x" + std::to_string(a.v2)};
    }
    return j;
}

inline ordered_json assertion_to_json(const Assertion& a, const Vocabulary& voc) {
    ordered_json j;
    if (a.kind == Assertion::Kind::Class) {
        j["kind"] = "class";
        j["name"] = voc.text(a.cls);
        j["arg"] = voc.text(a.subject);
    } else {
        j["kind"] = "role";
        j["name"] = voc.text(a.role);
        j["args"] = {voc.text(a.subject), voc.text(a.object)};
    }
    return j;
}

} // namespace detail

inline ordered_json ce_to_json(const ContrastiveExplanation& e, const Vocabulary& voc) {
    ordered_json j;
    j["vars"] = ordered_json::array();
    for (uint32_t v = 0; v < e.num_vars; ++v) j["vars"].push_back("x" + std::to_string(v));
    j["q_com"] = ordered_json::array();
    for (const auto& a : e.q_com) j["q_com"].push_back(detail::atom_to_json(a, voc));
    j["q_diff"] = ordered_json::array();
    for (const auto& a : e.q_diff) j["q_diff"].push_back(detail::atom_to_json(a, voc));
    j["fact_evidence"] = ordered_json::object();
    for (uint32_t v = 0; v < e.num_vars; ++v)
        j["fact_evidence"]["x" + std::to_string(v)] = detail::ind_to_json(e.fact_evidence[v], voc);
    j["foil_evidence"] = ordered_json::object();
    for (uint32_t v = 0; v < e.num_vars; ++v)
        j["foil_evidence"]["x" + std::to_string(v)] = detail::ind_to_json(e.foil_evidence[v], voc);
    j["conflict"] = ordered_json::array();
    for (const auto& c : e.conflict) j["conflict"].push_back(detail::assertion_to_json(c, voc));
    return j;
}

inline ContrastiveExplanation ce_from_json(const ordered_json& j, Vocabulary& voc) {
    ContrastiveExplanation e;
    if (!j.contains("vars") || !j["vars"].is_array()) throw InvalidCeError("missing \"vars\" array");
    std::unordered_map<std::string, uint32_t> var_of;
    for (const auto& v : j["vars"]) {
        std::string name = v.get<std::string>();
        if (var_of.count(name)) throw InvalidCeError("duplicate variable " + name);
        var_of.emplace(name, e.num_vars++);
    }
    auto var = [&](const std::string& name) {
        auto it = var_of.find(name);
        if (it == var_of.end()) throw InvalidCeError("unknown variable " + name);
        return it->second;
    };
    auto atoms = [&](const char* key) {
        std::vector<PatternAtom> out;
        if (!j.contains(key)) return out;
        for (const auto& a : j.at(key)) {
            std::string kind = a.at("kind").get<std::string>();
            std::string name = a.at("name").get<std::string>();
            if (kind == "class") {
                out.push_back(PatternAtom::clazz(voc.concept_name(name), var(a.at("arg").get<std::string>())));
            } else if (kind == "role") {
                const auto& args = a.at("args");
                if (args.size() != 2) throw InvalidCeError("role atoms take two arguments");
                out.push_back(PatternAtom::rel(voc.role_name(name), var(args[0].get<std::string>()),
                                               var(args[1].get<std::string>())));
            } else {
                throw InvalidCeError("unknown atom kind " + kind);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    e.q_com = atoms("q_com");
    e.q_diff = atoms("q_diff");

    auto ind_from = [&](const ordered_json& x) {
        if (x.is_string()) return Ind::named(voc.individual_name(x.get<std::string>()));
        if (x.is_object() && x.contains("fresh")) return Ind::fresh(x.at("fresh").get<uint32_t>());
        throw InvalidCeError("evidence entries are names or {\"fresh\":n}");
    };
    auto evidence = [&](const char* key) {
        Evidence ev(e.num_vars, Ind::fresh(0));
        std::vector<bool> seen(e.num_vars, false);
        for (const auto& [name, value] : j.at(key).items()) {
            uint32_t v = var(name);
            ev[v] = ind_from(value);
            seen[v] = true;
        }
        for (uint32_t v = 0; v < e.num_vars; ++v)
            if (!seen[v]) throw InvalidCeError(std::string(key) + " must assign every variable");
        return ev;
    };
    e.fact_evidence = evidence("fact_evidence");
    e.foil_evidence = evidence("foil_evidence");

    if (j.contains("conflict")) {
        for (const auto& c : j.at("conflict")) {
            std::string kind = c.at("kind").get<std::string>();
            std::string name = c.at("name").get<std::string>();
            if (kind == "class") {
                e.conflict.push_back(Assertion::clazz(
                    voc.concept_name(name), Ind::named(voc.individual_name(c.at("arg").get<std::string>()))));
            } else {
                const auto& args = c.at("args");
                e.conflict.push_back(Assertion::rel(voc.role_name(name),
                                                    Ind::named(voc.individual_name(args[0].get<std::string>())),
                                                    Ind::named(voc.individual_name(args[1].get<std::string>()))));
            }
        }
        std::sort(e.conflict.begin(), e.conflict.end());
    }
    return e;
}

// Human-readable rendering: one atom per line with both instantiations.
inline std::string render_ce_text(const ContrastiveExplanation& e, const Vocabulary& voc) {
    std::string out;
    auto atom_text = [&](const PatternAtom& a) {
        if (a.kind == PatternAtom::Kind::Class)
            return voc.text(a.cls) + "(x" + std::to_string(a.v1) + ")";
        return voc.text(a.role) + "(x" + std::to_string(a.v1) + ",x" + std::to_string(a.v2) + ")";
    };
    auto ground_text = [&](const PatternAtom& a, const Evidence& ev) {
        Assertion g = a.instantiate(ev);
        if (g.kind == Assertion::Kind::Class) return voc.text(g.cls) + "(" + voc.text(g.subject) + ")";
        return voc.text(g.role) + "(" + voc.text(g.subject) + "," + voc.text(g.object) + ")";
    };
    auto section = [&](const char* title, const std::vector<PatternAtom>& atoms) {
        out += title;
        out += ":\n";
        if (atoms.empty()) out += "  (none)\n";
        for (const auto& a : atoms) {
            out += "  " + atom_text(a);
            out += "   fact: " + ground_text(a, e.fact_evidence);
            out += "   foil: " + ground_text(a, e.foil_evidence);
            out += "\n";
        }
    };
    section("commonality", e.q_com);
    section("difference", e.q_diff);
    out += "conflict:\n";
    if (e.conflict.empty()) out += "  (none)\n";
    for (const auto& c : e.conflict) {
        if (c.kind == Assertion::Kind::Class)
            out += "  " + voc.text(c.cls) + "(" + voc.text(c.subject) + ")\n";
        else
            out += "  " + voc.text(c.role) + "(" + voc.text(c.subject) + "," + voc.text(c.object) + ")\n";
    }
    return out;
}

} // namespace elbx
