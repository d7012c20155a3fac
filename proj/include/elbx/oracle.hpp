#pragma once

#include "elbx/generate.hpp"

namespace elbx {

// Desk-scale exhaustive verification of the preference criteria. The
// enumeration space: explanations whose fact instantiation is an ABox
// justification of the fact entailment, with one variable per justification
// individual and a foil image chosen per individual from the ABox
// individuals plus at most `max_fresh` fresh ones. Every explanation the
// generator can produce lives in this space; verdicts are relative to it.
struct OracleBounds {
    size_t max_atoms = 24;
    size_t max_fresh = 2;
    size_t max_abox = 12;
    size_t max_individuals = 6;
    size_t max_candidates = 400000; // foil-image combinations across justifications
};

enum class OptimalityMode { Subset, Cardinality };

namespace detail {

inline void check_guard_rails(const ContrastiveProblem& p, const OracleBounds& b) {
    if (p.kb().abox().size() > b.max_abox)
        throw SpaceTooLargeError("ABox exceeds the oracle guard rails");
    if (p.kb().abox_individuals().size() > b.max_individuals)
        throw SpaceTooLargeError("too many individuals for exhaustive verification");
    if (b.max_fresh > 2) throw SpaceTooLargeError("more than two fresh individuals are not supported");
}

// All subset-minimal conflict sets: minimal hitting sets of the
// inconsistency justifications drawn from the removable ABox part.
inline std::vector<std::vector<Assertion>> minimal_conflicts(const ContrastiveProblem& p,
                                                             const std::vector<Assertion>& q_d) {
    const KnowledgeBase& kb = p.kb();
    const EntailmentOracle& oracle = p.oracle();
    if (!oracle.inconsistent({std::span<const Assertion>(kb.abox()), std::span<const Assertion>(q_d)}))
        return {{}};
    if (oracle.inconsistent({std::span<const Assertion>(q_d)})) return {}; // no conflict set can help

    std::vector<Assertion> merged = kb.abox();
    merged.insert(merged.end(), q_d.begin(), q_d.end());
    KnowledgeBase shell = kb.with_abox(merged);
    JustificationQuery jq{&shell, detail::as_axioms(kb.tbox(), q_d), Goal::inconsistency()};
    AllJustifications all = all_justifications(jq);

    std::vector<std::vector<Assertion>> families;
    for (const auto& j : all.justifications) {
        std::vector<Assertion> f;
        for (const auto& ax : j) f.push_back(std::get<Assertion>(ax));
        if (f.empty()) return {}; // the TBox with q_d alone is inconsistent
        families.push_back(std::move(f));
    }

    // enumerate minimal hitting sets of `families`
    std::set<Assertion> universe;
    for (const auto& f : families)
        for (const auto& x : f) universe.insert(x);
    std::vector<Assertion> elems(universe.begin(), universe.end());
    std::vector<std::vector<Assertion>> hitting;
    size_t n = elems.size();
    if (n > 20) throw SpaceTooLargeError("conflict space too large");
    for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
        std::vector<Assertion> set;
        for (size_t i = 0; i < n; ++i)
            if (mask & (size_t(1) << i)) set.push_back(elems[i]);
        bool hits = true;
        for (const auto& f : families) {
            bool hit = false;
            for (const auto& x : f)
                if (std::binary_search(set.begin(), set.end(), x)) hit = true;
            if (!hit) hits = false;
        }
        if (hits) hitting.push_back(std::move(set));
    }
    std::vector<std::vector<Assertion>> minimal;
    for (const auto& s : hitting) {
        bool is_min = true;
        for (const auto& t : hitting) {
            if (t.size() >= s.size()) continue;
            bool subset = true;
            for (const auto& x : t)
                if (!std::binary_search(s.begin(), s.end(), x)) subset = false;
            if (subset) is_min = false;
        }
        if (is_min) minimal.push_back(s);
    }
    return minimal;
}

} // namespace detail

inline std::vector<ContrastiveExplanation> enumerate_ces(const ContrastiveProblem& p,
                                                         const OracleBounds& bounds = {}) {
    detail::check_guard_rails(p, bounds);
    const KnowledgeBase& kb = p.kb();

    std::vector<Axiom> fixed;
    for (const auto& g : kb.tbox()) fixed.emplace_back(g);
    AllJustifications all =
        all_justifications(JustificationQuery{&kb, std::move(fixed), Goal::instance(p.query(), p.fact())});

    std::vector<Ind> pool = kb.abox_individuals();
    auto ensure = [&](Ind x) {
        if (std::find(pool.begin(), pool.end(), x) == pool.end()) pool.push_back(x);
    };
    ensure(p.fact());
    ensure(p.foil());
    std::sort(pool.begin(), pool.end(), [&](Ind u, Ind v) { return ind_less(kb.vocab(), u, v); });
    for (uint32_t i = 0; i < bounds.max_fresh; ++i) pool.push_back(Ind::fresh(i));

    // reject spaces whose foil-image sweep would be too large
    double work = 0;
    for (const auto& jx : all.justifications) {
        std::vector<Assertion> j;
        for (const auto& ax : jx) j.push_back(std::get<Assertion>(ax));
        size_t k = detail::individuals_of(j, kb.vocab()).size();
        double combos = 1;
        for (size_t i = 0; i < k; ++i) combos *= static_cast<double>(pool.size());
        work += combos;
    }
    if (work > static_cast<double>(bounds.max_candidates))
        throw SpaceTooLargeError("foil-image space exceeds the oracle budget");

    std::set<std::string> seen;
    std::vector<ContrastiveExplanation> out;

    for (const auto& jx : all.justifications) {
        std::vector<Assertion> j;
        for (const auto& ax : jx) j.push_back(std::get<Assertion>(ax));
        if (j.empty() || j.size() > bounds.max_atoms) continue;
        std::vector<Ind> inds = detail::individuals_of(j, kb.vocab());
        size_t k = inds.size();

        std::vector<size_t> choice(k, 0);
        for (;;) {
            // build the candidate for this foil image
            Evidence fact_ev, foil_ev;
            for (size_t i = 0; i < k; ++i) {
                fact_ev.push_back(inds[i]);
                foil_ev.push_back(pool[choice[i]]);
            }
            auto var_of = [&](Ind c) {
                return static_cast<uint32_t>(std::find(inds.begin(), inds.end(), c) - inds.begin());
            };
            ContrastiveExplanation e;
            e.num_vars = static_cast<uint32_t>(k);
            e.fact_evidence = fact_ev;
            e.foil_evidence = foil_ev;
            for (const auto& a : j) {
                PatternAtom atom = a.kind == Assertion::Kind::Class
                                       ? PatternAtom::clazz(a.cls, var_of(a.subject))
                                       : PatternAtom::rel(a.role, var_of(a.subject), var_of(a.object));
                Assertion foil_inst = atom.instantiate(foil_ev);
                if (kb.has_assertion(foil_inst))
                    e.q_com.push_back(atom);
                else
                    e.q_diff.push_back(atom);
            }
            std::sort(e.q_com.begin(), e.q_com.end());
            std::sort(e.q_diff.begin(), e.q_diff.end());

            std::vector<Assertion> q_d = instantiate(joined_pattern(e), foil_ev);
            if (p.oracle().instance(0, p.foil(), {std::span<const Assertion>(q_d)})) {
                for (auto& conflict : detail::minimal_conflicts(p, q_d)) {
                    ContrastiveExplanation full = e;
                    full.conflict = std::move(conflict);
                    ContrastiveExplanation canon = canonical_ce(full, kb.vocab());
                    std::string key = [&] {
                        std::string s;
                        for (const auto& a : canon.q_com)
                            s += "c" + std::to_string(a.kind == PatternAtom::Kind::Class
                                                          ? a.cls.value
                                                          : 1000000 + a.role.value) +
                                 "_" + std::to_string(a.v1) + "_" + std::to_string(a.v2);
                        for (const auto& a : canon.q_diff)
                            s += "d" + std::to_string(a.kind == PatternAtom::Kind::Class
                                                          ? a.cls.value
                                                          : 1000000 + a.role.value) +
                                 "_" + std::to_string(a.v1) + "_" + std::to_string(a.v2);
                        for (Ind x : canon.fact_evidence) s += "f" + std::to_string(x.bits);
                        for (Ind x : canon.foil_evidence) s += "g" + std::to_string(x.bits);
                        for (const auto& c : canon.conflict) s += "k" + kb.render(c);
                        return s;
                    }();
                    if (seen.insert(key).second) out.push_back(std::move(canon));
                }
            }

            // next foil image
            size_t pos = 0;
            while (pos < k && ++choice[pos] == pool.size()) {
                choice[pos] = 0;
                ++pos;
            }
            if (pos == k) break;
        }
    }
    return out;
}


inline bool is_difference_minimal(const ContrastiveProblem& p, const ContrastiveExplanation& e,
                                  OptimalityMode mode, const OracleBounds& bounds = {},
                                  ContrastiveExplanation* witness = nullptr) {
    std::vector<Assertion> mine = instantiate(e.q_diff, e.foil_evidence);
    for (const auto& other : enumerate_ces(p, bounds)) {
        std::vector<Assertion> theirs = instantiate(other.q_diff, other.foil_evidence);
        bool smaller = mode == OptimalityMode::Cardinality
                           ? theirs.size() < mine.size()
                           : theirs.size() < mine.size() && detail::subset_modulo_fresh(theirs, mine);
        if (smaller) {
            if (witness) *witness = other;
            return false;
        }
    }
    return true;
}

inline bool is_conflict_minimal(const ContrastiveProblem& p, const ContrastiveExplanation& e,
                                OptimalityMode mode, const OracleBounds& bounds = {},
                                ContrastiveExplanation* witness = nullptr) {
    std::vector<Assertion> mine = e.conflict;
    std::sort(mine.begin(), mine.end());
    for (const auto& other : enumerate_ces(p, bounds)) {
        bool smaller;
        if (mode == OptimalityMode::Cardinality) {
            smaller = other.conflict.size() < mine.size();
        } else {
            smaller = other.conflict.size() < mine.size() &&
                      std::includes(mine.begin(), mine.end(), other.conflict.begin(), other.conflict.end());
        }
        if (smaller) {
            if (witness) *witness = other;
            return false;
        }
    }
    return true;
}

inline bool is_commonality_maximal(const ContrastiveProblem& p, const ContrastiveExplanation& e,
                                   OptimalityMode mode, const OracleBounds& bounds = {},
                                   ContrastiveExplanation* witness = nullptr) {
    std::vector<Assertion> mine = instantiate(e.q_com, e.foil_evidence);
    for (const auto& other : enumerate_ces(p, bounds)) {
        std::vector<Assertion> theirs = instantiate(other.q_com, other.foil_evidence);
        bool bigger = mode == OptimalityMode::Cardinality
                          ? theirs.size() > mine.size()
                          : theirs.size() > mine.size() &&
                                std::includes(theirs.begin(), theirs.end(), mine.begin(), mine.end());
        if (bigger) {
            if (witness) *witness = other;
            return false;
        }
    }
    return true;
}

} // namespace elbx
