#pragma once

#include <optional>

#include "elbx/kb.hpp"

namespace elbx {

// One atom of an ABox pattern: A(x_i) or r(x_i, x_j) over variable indexes.
struct PatternAtom {
    enum class Kind : uint8_t { Class, Role };

    Kind kind = Kind::Class;
    ConceptId cls{};
    RoleId role{};
    uint32_t v1 = 0;
    uint32_t v2 = 0;

    static PatternAtom clazz(ConceptId c, uint32_t v) {
        PatternAtom a;
        a.kind = Kind::Class;
        a.cls = c;
        a.v1 = v;
        return a;
    }

    static PatternAtom rel(RoleId r, uint32_t s, uint32_t o) {
        PatternAtom a;
        a.kind = Kind::Role;
        a.role = r;
        a.v1 = s;
        a.v2 = o;
        return a;
    }

    Assertion instantiate(const std::vector<Ind>& evidence) const {
        if (kind == Kind::Class) return Assertion::clazz(cls, evidence[v1]);
        return Assertion::rel(role, evidence[v1], evidence[v2]);
    }

    friend bool operator==(const PatternAtom& a, const PatternAtom& b) {
        return a.kind == b.kind && a.cls == b.cls && a.role == b.role && a.v1 == b.v1 && a.v2 == b.v2;
    }
    friend bool operator<(const PatternAtom& a, const PatternAtom& b) {
        auto key = [](const PatternAtom& x) {
            return std::tuple(x.kind, x.kind == Kind::Class ? x.cls.value : x.role.value, x.v1, x.v2);
        };
        return key(a) < key(b);
    }
};

// Variable assignment: one individual (possibly fresh) per pattern variable.
using Evidence = std::vector<Ind>;

// The five components of a contrastive explanation. q_com and q_diff share
// one variable vector of length num_vars.
struct ContrastiveExplanation {
    uint32_t num_vars = 0;
    std::vector<PatternAtom> q_com;
    std::vector<PatternAtom> q_diff;
    Evidence fact_evidence;
    Evidence foil_evidence;
    std::vector<Assertion> conflict;

    friend bool operator==(const ContrastiveExplanation& a, const ContrastiveExplanation& b) {
        return a.num_vars == b.num_vars && a.q_com == b.q_com && a.q_diff == b.q_diff &&
               a.fact_evidence == b.fact_evidence && a.foil_evidence == b.foil_evidence &&
               a.conflict == b.conflict;
    }
};

// Ground instantiation of a pattern: a set (sorted, duplicates collapsed).
inline std::vector<Assertion> instantiate(const std::vector<PatternAtom>& atoms, const Evidence& ev) {
    std::vector<Assertion> out;
    out.reserve(atoms.size());
    for (const auto& a : atoms) out.push_back(a.instantiate(ev));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::vector<PatternAtom> joined_pattern(const ContrastiveExplanation& e) {
    std::vector<PatternAtom> q = e.q_com;
    q.insert(q.end(), e.q_diff.begin(), e.q_diff.end());
    std::sort(q.begin(), q.end());
    q.erase(std::unique(q.begin(), q.end()), q.end());
    return q;
}

// Sorts variables by (fact, foil) evidence, renumbers fresh foil individuals
// in first-use order and sorts atom lists, so that structurally equal
// explanations compare equal. Unused variables are dropped.
inline ContrastiveExplanation canonical_ce(const ContrastiveExplanation& e, const Vocabulary& voc) {
    std::vector<bool> used(e.num_vars, false);
    for (const auto& a : e.q_com) {
        used[a.v1] = true;
        if (a.kind == PatternAtom::Kind::Role) used[a.v2] = true;
    }
    for (const auto& a : e.q_diff) {
        used[a.v1] = true;
        if (a.kind == PatternAtom::Kind::Role) used[a.v2] = true;
    }
    std::vector<uint32_t> order;
    for (uint32_t v = 0; v < e.num_vars; ++v)
        if (used[v]) order.push_back(v);
    std::sort(order.begin(), order.end(), [&](uint32_t x, uint32_t y) {
        if (e.fact_evidence[x] != e.fact_evidence[y])
            return ind_less(voc, e.fact_evidence[x], e.fact_evidence[y]);
        if (e.foil_evidence[x] != e.foil_evidence[y])
            return ind_less(voc, e.foil_evidence[x], e.foil_evidence[y]);
        return x < y;
    });
    std::vector<uint32_t> remap(e.num_vars, 0);
    for (uint32_t i = 0; i < order.size(); ++i) remap[order[i]] = i;

    ContrastiveExplanation out;
    out.num_vars = static_cast<uint32_t>(order.size());
    std::unordered_map<uint32_t, uint32_t> fresh_map;
    auto map_ind = [&](Ind x) {
        if (!x.is_fresh()) return x;
        auto it = fresh_map.find(x.fresh_index());
        if (it == fresh_map.end())
            it = fresh_map.emplace(x.fresh_index(), static_cast<uint32_t>(fresh_map.size())).first;
        return Ind::fresh(it->second);
    };
    for (uint32_t v : order) out.fact_evidence.push_back(map_ind(e.fact_evidence[v]));
    for (uint32_t v : order) out.foil_evidence.push_back(map_ind(e.foil_evidence[v]));
    auto remap_atoms = [&](const std::vector<PatternAtom>& atoms) {
        std::vector<PatternAtom> res;
        for (auto a : atoms) {
            a.v1 = remap[a.v1];
            if (a.kind == PatternAtom::Kind::Role) a.v2 = remap[a.v2];
            res.push_back(a);
        }
        std::sort(res.begin(), res.end());
        res.erase(std::unique(res.begin(), res.end()), res.end());
        return res;
    };
    out.q_com = remap_atoms(e.q_com);
    out.q_diff = remap_atoms(e.q_diff);
    out.conflict = e.conflict;
    std::sort(out.conflict.begin(), out.conflict.end());
    return out;
}

// Backtracking search for a homomorphism between candidate explanations:
// a variable mapping that sends commonality atoms into the commonality and
// difference atoms into the difference.
inline std::optional<std::vector<uint32_t>> find_homomorphism(const ContrastiveExplanation& from,
                                                              const ContrastiveExplanation& to) {
    std::vector<PatternAtom> to_com = to.q_com;
    std::vector<PatternAtom> to_diff = to.q_diff;
    std::sort(to_com.begin(), to_com.end());
    std::sort(to_diff.begin(), to_diff.end());

    auto image_exists = [&](const PatternAtom& a, const std::vector<uint32_t>& sigma, bool diff) {
        PatternAtom img = a;
        img.v1 = sigma[a.v1];
        if (a.kind == PatternAtom::Kind::Role) img.v2 = sigma[a.v2];
        const auto& pool = diff ? to_diff : to_com;
        return std::binary_search(pool.begin(), pool.end(), img);
    };

    std::vector<uint32_t> sigma(from.num_vars, 0);
    std::vector<bool> assigned(from.num_vars, false);

    auto consistent = [&](uint32_t just_set) {
        for (const auto& a : from.q_com) {
            bool ready = assigned[a.v1] && (a.kind == PatternAtom::Kind::Class || assigned[a.v2]);
            bool touches = a.v1 == just_set || (a.kind == PatternAtom::Kind::Role && a.v2 == just_set);
            if (ready && touches && !image_exists(a, sigma, false)) return false;
        }
        for (const auto& a : from.q_diff) {
            bool ready = assigned[a.v1] && (a.kind == PatternAtom::Kind::Class || assigned[a.v2]);
            bool touches = a.v1 == just_set || (a.kind == PatternAtom::Kind::Role && a.v2 == just_set);
            if (ready && touches && !image_exists(a, sigma, true)) return false;
        }
        return true;
    };

    auto rec = [&](auto&& self, uint32_t v) -> bool {
        if (v == from.num_vars) return true;
        for (uint32_t target = 0; target < std::max<uint32_t>(to.num_vars, 1); ++target) {
            if (to.num_vars == 0) break;
            sigma[v] = target;
            assigned[v] = true;
            if (consistent(v) && self(self, v + 1)) return true;
            assigned[v] = false;
        }
        return false;
    };

    if (from.num_vars == 0) return std::vector<uint32_t>{};
    if (to.num_vars == 0) {
        // only a pattern-free source maps into an empty target
        if (from.q_com.empty() && from.q_diff.empty()) return std::vector<uint32_t>(from.num_vars, 0);
        return std::nullopt;
    }
    if (rec(rec, 0)) return sigma;
    return std::nullopt;
}

inline bool embeds_into(const ContrastiveExplanation& from, const ContrastiveExplanation& to) {
    if (!find_homomorphism(from, to)) return false;
    for (const auto& c : from.conflict)
        if (std::find(to.conflict.begin(), to.conflict.end(), c) == to.conflict.end()) return false;
    return true;
}

} // namespace elbx
