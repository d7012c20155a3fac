#pragma once

#include <unordered_set>

#include "elbx/justify.hpp"
#include "elbx/validate.hpp"

namespace elbx {

enum class StructureMode { Full, Refined };

// The explanation super-structure: one variable per (fact, foil) individual
// pair, with every assertion of the core lifted to all foil combinations.
// Commonality atoms are those whose foil instantiation is asserted,
// difference atoms those whose foil instantiation is absent.
struct SuperStructure {
    std::vector<std::pair<Ind, Ind>> vars;
    std::vector<PatternAtom> q_com;
    std::vector<PatternAtom> q_diff;
    Evidence fact_evidence; // projection of vars
    Evidence foil_evidence;
    std::vector<Assertion> core;      // justification union (Refined) or the whole ABox (Full)
    std::vector<Ind> fact_inds;       // individuals of the core
    std::vector<Ind> foil_inds;       // foil-side individual pool
    std::vector<Assertion> conflict_pool; // = ABox

    uint32_t var_of(Ind fact, Ind foil) const {
        for (uint32_t i = 0; i < vars.size(); ++i)
            if (vars[i].first == fact && vars[i].second == foil) return i;
        throw Error("no variable for the requested pair");
    }
};

// An injective fact-to-foil matching covering every core individual and
// pairing the problem's fact with its foil. Restricting the pattern to these
// variables keeps the foil side entailed and consistent.
struct SafeVector {
    std::vector<uint32_t> var_indexes; // sorted
    std::vector<std::pair<Ind, Ind>> matching;

    bool contains(uint32_t v) const {
        return std::binary_search(var_indexes.begin(), var_indexes.end(), v);
    }
};

namespace detail {

// Undirected role-distance map from `from` over the ABox.
inline std::unordered_map<Ind, int, IndHash> role_distances(const std::vector<Assertion>& abox, Ind from) {
    std::unordered_map<Ind, std::vector<Ind>, IndHash> adj;
    for (const auto& a : abox) {
        if (a.kind != Assertion::Kind::Role) continue;
        adj[a.subject].push_back(a.object);
        adj[a.object].push_back(a.subject);
    }
    std::unordered_map<Ind, int, IndHash> dist;
    std::deque<Ind> queue{from};
    dist[from] = 0;
    while (!queue.empty()) {
        Ind x = queue.front();
        queue.pop_front();
        auto it = adj.find(x);
        if (it == adj.end()) continue;
        for (Ind y : it->second)
            if (!dist.count(y)) {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
    }
    return dist;
}

inline std::vector<Ind> individuals_of(const std::vector<Assertion>& atoms, const Vocabulary& voc) {
    std::vector<Ind> out;
    auto push = [&](Ind x) {
        if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
    };
    for (const auto& a : atoms) {
        push(a.subject);
        if (a.kind == Assertion::Kind::Role) push(a.object);
    }
    std::sort(out.begin(), out.end(), [&](Ind x, Ind y) { return ind_less(voc, x, y); });
    return out;
}

} // namespace detail

inline SuperStructure build_super_structure(const ContrastiveProblem& p, StructureMode mode,
                                            std::optional<size_t> fresh_budget = std::nullopt,
                                            const Deadline* deadline = nullptr) {
    const KnowledgeBase& kb = p.kb();
    SuperStructure s;
    s.conflict_pool = kb.abox();

    if (mode == StructureMode::Full) {
        s.core = kb.abox();
        s.fact_inds = detail::individuals_of(s.core, kb.vocab());
        auto ensure = [&](Ind x) {
            if (std::find(s.fact_inds.begin(), s.fact_inds.end(), x) == s.fact_inds.end()) {
                s.fact_inds.push_back(x);
                std::sort(s.fact_inds.begin(), s.fact_inds.end(),
                          [&](Ind u, Ind v) { return ind_less(kb.vocab(), u, v); });
            }
        };
        ensure(p.fact());
        ensure(p.foil());
        s.foil_inds = s.fact_inds;
    } else {
        // Core: union of all ABox justifications of the fact entailment.
        std::vector<Axiom> fixed;
        for (const auto& g : kb.tbox()) fixed.emplace_back(g);
        JustificationQuery q{&kb, std::move(fixed), Goal::instance(p.query(), p.fact()), deadline};
        for (const auto& ax : union_of_justifications(q)) s.core.push_back(std::get<Assertion>(ax));
        std::sort(s.core.begin(), s.core.end());
        s.fact_inds = detail::individuals_of(s.core, kb.vocab());
        if (s.fact_inds.empty()) s.fact_inds.push_back(p.fact());

        // Foil pool: individuals whose role-distance to the foil is within
        // the largest fact-to-core distance, padded with fresh individuals
        // until it can host an injective matching.
        auto fact_dist = detail::role_distances(kb.abox(), p.fact());
        int radius = 0;
        for (Ind c : s.fact_inds) {
            auto it = fact_dist.find(c);
            if (it != fact_dist.end()) radius = std::max(radius, it->second);
        }
        auto foil_dist = detail::role_distances(kb.abox(), p.foil());
        for (Ind d : detail::individuals_of(kb.abox(), kb.vocab())) {
            auto it = foil_dist.find(d);
            if (it != foil_dist.end() && it->second <= radius) s.foil_inds.push_back(d);
        }
        if (std::find(s.foil_inds.begin(), s.foil_inds.end(), p.foil()) == s.foil_inds.end())
            s.foil_inds.push_back(p.foil());
        std::sort(s.foil_inds.begin(), s.foil_inds.end(),
                  [&](Ind u, Ind v) { return ind_less(kb.vocab(), u, v); });
        size_t needed =
            s.fact_inds.size() > s.foil_inds.size() ? s.fact_inds.size() - s.foil_inds.size() : 0;
        size_t budget = fresh_budget.value_or(s.fact_inds.size());
        for (uint32_t i = 0; i < std::min(needed, budget); ++i) s.foil_inds.push_back(Ind::fresh(i));
    }

    for (Ind c : s.fact_inds)
        for (Ind d : s.foil_inds) {
            s.vars.emplace_back(c, d);
            s.fact_evidence.push_back(c);
            s.foil_evidence.push_back(d);
        }

    auto var = [&](Ind c, Ind d) {
        size_t ci = std::find(s.fact_inds.begin(), s.fact_inds.end(), c) - s.fact_inds.begin();
        size_t di = std::find(s.foil_inds.begin(), s.foil_inds.end(), d) - s.foil_inds.begin();
        return static_cast<uint32_t>(ci * s.foil_inds.size() + di);
    };

    for (const auto& a : s.core) {
        if (a.kind == Assertion::Kind::Class) {
            for (Ind d : s.foil_inds) {
                PatternAtom atom = PatternAtom::clazz(a.cls, var(a.subject, d));
                if (kb.has_assertion(Assertion::clazz(a.cls, d)))
                    s.q_com.push_back(atom);
                else
                    s.q_diff.push_back(atom);
            }
        } else {
            for (Ind d : s.foil_inds)
                for (Ind d2 : s.foil_inds) {
                    PatternAtom atom = PatternAtom::rel(a.role, var(a.subject, d), var(a.object, d2));
                    if (kb.has_assertion(Assertion::rel(a.role, d, d2)))
                        s.q_com.push_back(atom);
                    else
                        s.q_diff.push_back(atom);
                }
        }
    }
    std::sort(s.q_com.begin(), s.q_com.end());
    s.q_com.erase(std::unique(s.q_com.begin(), s.q_com.end()), s.q_com.end());
    std::sort(s.q_diff.begin(), s.q_diff.end());
    s.q_diff.erase(std::unique(s.q_diff.begin(), s.q_diff.end()), s.q_diff.end());
    return s;
}

// Greedy matching: the fact individual is paired with the foil, every other
// core individual with the unused foil individual that keeps the most
// commonality atoms, ties broken by canonical order.
inline SafeVector choose_safe_vector(const SuperStructure& s, const ContrastiveProblem& p) {
    std::unordered_map<Ind, Ind, IndHash> match;
    std::unordered_set<Ind, IndHash> used;
    match.emplace(p.fact(), p.foil());
    used.insert(p.foil());

    auto matched_var = [&](uint32_t v) {
        auto it = match.find(s.vars[v].first);
        return it != match.end() && it->second == s.vars[v].second;
    };

    for (Ind c : s.fact_inds) {
        if (match.count(c)) continue;
        int best_gain = -1;
        std::optional<Ind> best;
        for (Ind d : s.foil_inds) {
            if (used.count(d)) continue;
            int gain = 0;
            for (const auto& a : s.q_com) {
                bool uses = false, covered = true;
                auto check = [&](uint32_t v) {
                    if (s.vars[v] == std::make_pair(c, d))
                        uses = true;
                    else if (!matched_var(v))
                        covered = false;
                };
                check(a.v1);
                if (a.kind == PatternAtom::Kind::Role) check(a.v2);
                if (uses && covered) ++gain;
            }
            if (gain > best_gain) {
                best_gain = gain;
                best = d;
            }
        }
        if (!best)
            throw Error("foil pool too small for a safe vector; raise the fresh budget");
        match.emplace(c, *best);
        used.insert(*best);
    }

    SafeVector safe;
    for (uint32_t v = 0; v < s.vars.size(); ++v) {
        auto it = match.find(s.vars[v].first);
        if (it != match.end() && it->second == s.vars[v].second) safe.var_indexes.push_back(v);
    }
    std::sort(safe.var_indexes.begin(), safe.var_indexes.end());
    for (Ind c : s.fact_inds) safe.matching.emplace_back(c, match.at(c));
    return safe;
}

// Mutable pipeline state: the pattern shrinks step by step.
struct GenState {
    SuperStructure s;
    SafeVector safe;
    std::vector<PatternAtom> q_com;
    std::vector<PatternAtom> q_diff;

    std::vector<PatternAtom> joined() const {
        std::vector<PatternAtom> q = q_com;
        q.insert(q.end(), q_diff.begin(), q_diff.end());
        return q;
    }
};

namespace detail {

inline std::vector<Axiom> as_axioms(const std::vector<Gci>& tbox, const std::vector<Assertion>& extra) {
    std::vector<Axiom> out;
    for (const auto& g : tbox) out.emplace_back(g);
    for (const auto& a : extra) out.emplace_back(a);
    return out;
}

inline detail::AxiomLess removal_order(const Vocabulary& voc) {
    RemovalOrderLess less{&voc};
    return [less](const Axiom& a, const Axiom& b) {
        bool ag = std::holds_alternative<Gci>(a), bg = std::holds_alternative<Gci>(b);
        if (ag != bg) return ag; // GCIs first; irrelevant for pure-ABox candidate sets
        if (ag) return std::get<Gci>(a) < std::get<Gci>(b);
        return less(std::get<Assertion>(a), std::get<Assertion>(b));
    };
}

} // namespace detail

// Step P1: while the foil instantiation contradicts the TBox, compute an
// inconsistency justification with the protected atoms fixed and drop one
// offending unprotected atom (difference atoms first).
inline void repair_consistency(GenState& st, const ContrastiveProblem& p,
                               const Deadline* deadline = nullptr) {
    const KnowledgeBase& kb = p.kb();
    for (;;) {
        check_deadline(deadline);
        std::vector<Assertion> ground = instantiate(st.joined(), st.s.foil_evidence);
        if (!p.oracle().inconsistent({std::span<const Assertion>(ground)}, deadline)) return;

        std::vector<PatternAtom> protected_atoms;
        for (const auto& a : st.joined())
            if (st.safe.contains(a.v1) &&
                (a.kind == PatternAtom::Kind::Class || st.safe.contains(a.v2)))
                protected_atoms.push_back(a);
        std::vector<Assertion> protected_ground = instantiate(protected_atoms, st.s.foil_evidence);

        KnowledgeBase shell = kb.with_abox(ground);
        JustificationQuery q{&shell, detail::as_axioms(kb.tbox(), protected_ground),
                             Goal::inconsistency(), deadline};
        std::vector<Axiom> j = justify_fixed(q, detail::removal_order(kb.vocab()));
        if (j.empty()) throw Error("consistency repair cannot progress");

        std::vector<Assertion> diff_ground = instantiate(st.q_diff, st.s.foil_evidence);
        std::optional<Assertion> victim;
        std::stable_sort(j.begin(), j.end(), detail::removal_order(kb.vocab()));
        for (const auto& ax : j) {
            const auto& g = std::get<Assertion>(ax);
            if (std::binary_search(diff_ground.begin(), diff_ground.end(), g)) {
                victim = g;
                break;
            }
        }
        if (!victim) victim = std::get<Assertion>(j.front()); // a commonality atom then
        auto drop = [&](std::vector<PatternAtom>& atoms) {
            atoms.erase(std::remove_if(atoms.begin(), atoms.end(),
                                       [&](const PatternAtom& a) {
                                           return a.instantiate(st.s.foil_evidence) == *victim;
                                       }),
                        atoms.end());
        };
        drop(st.q_diff);
        drop(st.q_com);
    }
}

namespace detail {

inline std::vector<uint32_t> fresh_names_of(const std::vector<Assertion>& xs) {
    std::vector<uint32_t> out;
    for (const auto& a : xs) {
        if (a.subject.is_fresh()) out.push_back(a.subject.fresh_index());
        if (a.kind == Assertion::Kind::Role && a.object.is_fresh()) out.push_back(a.object.fresh_index());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Is `small` a subset of `big` after injectively renaming its fresh
// individuals into big's fresh individuals?
inline bool subset_modulo_fresh(const std::vector<Assertion>& small, const std::vector<Assertion>& big) {
    std::vector<uint32_t> sf = fresh_names_of(small);
    std::vector<uint32_t> bf = fresh_names_of(big);
    if (sf.size() > bf.size()) return false;
    std::vector<uint32_t> perm = bf;
    std::sort(perm.begin(), perm.end());
    do {
        std::unordered_map<uint32_t, uint32_t> rename;
        for (size_t i = 0; i < sf.size(); ++i) rename[sf[i]] = perm[i];
        auto map_ind = [&](Ind x) { return x.is_fresh() ? Ind::fresh(rename[x.fresh_index()]) : x; };
        bool ok = true;
        for (auto a : small) {
            a.subject = map_ind(a.subject);
            if (a.kind == Assertion::Kind::Role) a.object = map_ind(a.object);
            if (!std::binary_search(big.begin(), big.end(), a)) ok = false;
        }
        if (ok) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

} // namespace detail

// Upgrades the injective matching to a general foil map: each core
// individual may be remapped to the foil individual that keeps strictly more
// commonality atoms, as long as the selected pattern still entails the fact
// and its foil instantiation stays consistent. Non-injective maps are fine
// here; the consistency guard replaces the matching lemma.
inline std::vector<std::pair<Ind, Ind>> improve_matching(const GenState& st,
                                                         const ContrastiveProblem& p,
                                                         const Deadline* deadline = nullptr) {
    const EntailmentOracle& oracle = p.oracle();
    std::vector<std::pair<Ind, Ind>> h = st.safe.matching;

    auto atoms_on = [&](const std::vector<std::pair<Ind, Ind>>& map) {
        auto selected = [&](uint32_t v) {
            for (auto [c, d] : map)
                if (st.s.vars[v] == std::make_pair(c, d)) return true;
            return false;
        };
        std::pair<std::vector<PatternAtom>, std::vector<PatternAtom>> out;
        for (const auto& a : st.q_com)
            if (selected(a.v1) && (a.kind == PatternAtom::Kind::Class || selected(a.v2)))
                out.first.push_back(a);
        for (const auto& a : st.q_diff)
            if (selected(a.v1) && (a.kind == PatternAtom::Kind::Class || selected(a.v2)))
                out.second.push_back(a);
        return out;
    };

    auto admissible = [&](const std::vector<std::pair<Ind, Ind>>& map) {
        auto [com, diff] = atoms_on(map);
        std::vector<PatternAtom> all = com;
        all.insert(all.end(), diff.begin(), diff.end());
        std::vector<Assertion> qc = instantiate(all, st.s.fact_evidence);
        std::vector<Assertion> qd = instantiate(all, st.s.foil_evidence);
        return oracle.instance(0, p.fact(), {std::span<const Assertion>(qc)}, deadline) &&
               !oracle.inconsistent({std::span<const Assertion>(qd)}, deadline);
    };

    auto com_gain = [&](const std::vector<std::pair<Ind, Ind>>& map) {
        return atoms_on(map).first.size();
    };

    for (size_t i = 0; i < h.size(); ++i) {
        if (h[i].first == p.fact()) continue; // the fact stays paired with the foil
        size_t current = com_gain(h);
        size_t best = current;
        std::optional<Ind> pick;
        for (Ind d : st.s.foil_inds) {
            if (d == h[i].second) continue;
            std::vector<std::pair<Ind, Ind>> trial = h;
            trial[i].second = d;
            size_t gain = com_gain(trial);
            if (gain > best && admissible(trial)) {
                best = gain;
                pick = d;
            }
        }
        if (pick) h[i].second = *pick;
    }
    return h;
}

// Restricts the pattern to one variable per core individual, as given by the
// foil map. The fact instantiation is then injective on atoms: every ground
// fact atom has exactly one pattern atom, which is what makes the minimality
// sweeps below reach C4.
inline void restrict_to_map(GenState& st, const std::vector<std::pair<Ind, Ind>>& h) {
    auto selected = [&](uint32_t v) {
        for (auto [c, d] : h)
            if (st.s.vars[v] == std::make_pair(c, d)) return true;
        return false;
    };
    auto keep = [&](std::vector<PatternAtom>& atoms) {
        atoms.erase(std::remove_if(atoms.begin(), atoms.end(),
                                   [&](const PatternAtom& a) {
                                       return !selected(a.v1) ||
                                              (a.kind == PatternAtom::Kind::Role && !selected(a.v2));
                                   }),
                    atoms.end());
    };
    keep(st.q_com);
    keep(st.q_diff);
}

namespace detail {

// Deletion-minimizes `victims` (in removal order on fact instances) while
// both instantiations keep entailing the query. On an injective map this is
// exactly a foil-side justification with fixed component; with a collapsing
// map the fact-side guard keeps C1 intact.
inline void shrink_two_sided(GenState& st, const ContrastiveProblem& p,
                             std::vector<PatternAtom>& victims, const Deadline* deadline) {
    const EntailmentOracle& oracle = p.oracle();
    auto entails_both = [&](const std::vector<PatternAtom>& q) {
        std::vector<Assertion> qc = instantiate(q, st.s.fact_evidence);
        std::vector<Assertion> qd = instantiate(q, st.s.foil_evidence);
        return oracle.instance(0, p.fact(), {std::span<const Assertion>(qc)}, deadline) &&
               oracle.instance(0, p.foil(), {std::span<const Assertion>(qd)}, deadline);
    };
    RemovalOrderLess less{&p.kb().vocab()};
    std::vector<PatternAtom> order = victims;
    std::stable_sort(order.begin(), order.end(), [&](const PatternAtom& x, const PatternAtom& y) {
        return less(x.instantiate(st.s.fact_evidence), y.instantiate(st.s.fact_evidence));
    });
    for (const auto& victim : order) {
        std::vector<PatternAtom> rest_all;
        for (const auto& a : st.joined())
            if (!(a == victim)) rest_all.push_back(a);
        if (!entails_both(rest_all)) continue;
        victims.erase(std::remove(victims.begin(), victims.end(), victim), victims.end());
    }
}

} // namespace detail

// Step P2: make the difference subset-minimal while the commonality stays
// fixed.
inline void minimize_difference(GenState& st, const ContrastiveProblem& p,
                                const Deadline* deadline = nullptr) {
    detail::shrink_two_sided(st, p, st.q_diff, deadline);
}

// Step P3: make the commonality subset-minimal with the difference fixed.
inline void minimize_commonality_support(GenState& st, const ContrastiveProblem& p,
                                         const Deadline* deadline = nullptr) {
    detail::shrink_two_sided(st, p, st.q_com, deadline);
}

// Final pass over commonality and difference together: with one variable per
// fact individual, any atom whose ground fact instance is redundant is also
// foil-redundant, so this fixpoint establishes the minimality of q(c).
inline void sweep_redundant_atoms(GenState& st, const ContrastiveProblem& p,
                                  const Deadline* deadline = nullptr) {
    for (;;) {
        size_t before = st.joined().size();
        detail::shrink_two_sided(st, p, st.q_diff, deadline);
        detail::shrink_two_sided(st, p, st.q_com, deadline);
        if (st.joined().size() == before) return;
    }
}

// Step P4: grow a conflict set until the foil instantiation is consistent
// with the remaining ABox, then shrink it to subset-minimality. The conflict
// is always drawn from `conflict_problem`'s ABox (the original one in
// semantic mode).
inline std::vector<Assertion> minimize_conflict(const GenState& st, const ContrastiveProblem& conflict_problem,
                                                const Deadline* deadline = nullptr) {
    const KnowledgeBase& kb = conflict_problem.kb();
    const EntailmentOracle& oracle = conflict_problem.oracle();
    std::vector<Assertion> q_d = instantiate(st.joined(), st.s.foil_evidence);

    std::vector<Assertion> conflict;
    auto abox_minus = [&](const std::vector<Assertion>& removed) {
        std::vector<Assertion> rest;
        for (const auto& x : kb.abox())
            if (!std::binary_search(removed.begin(), removed.end(), x)) rest.push_back(x);
        return rest;
    };
    for (;;) {
        check_deadline(deadline);
        std::vector<Assertion> rest = abox_minus(conflict);
        if (!oracle.inconsistent(
                {std::span<const Assertion>(rest), std::span<const Assertion>(q_d)}, deadline))
            break;
        std::vector<Assertion> merged = rest;
        merged.insert(merged.end(), q_d.begin(), q_d.end());
        KnowledgeBase shell = kb.with_abox(merged);
        JustificationQuery jq{&shell, detail::as_axioms(kb.tbox(), q_d), Goal::inconsistency(), deadline};
        std::vector<Axiom> j = justify_fixed(jq, detail::removal_order(kb.vocab()));
        if (j.empty()) throw Error("conflict repair cannot progress");
        std::stable_sort(j.begin(), j.end(), detail::removal_order(kb.vocab()));
        conflict.push_back(std::get<Assertion>(j.front()));
        std::sort(conflict.begin(), conflict.end());
    }
    // deletion-minimize
    for (const auto& c : std::vector<Assertion>(conflict)) {
        std::vector<Assertion> smaller;
        for (const auto& x : conflict)
            if (!(x == c)) smaller.push_back(x);
        std::vector<Assertion> rest = abox_minus(smaller);
        if (!oracle.inconsistent({std::span<const Assertion>(rest), std::span<const Assertion>(q_d)},
                                 deadline))
            conflict = smaller;
    }
    return conflict;
}

// Full pipeline. In semantic mode the structure is built over the
// materialized ABox; the conflict set is always drawn from the original one.
inline ContrastiveExplanation generate_ce(const ContrastiveProblem& p, StructureMode mode,
                                          bool semantic = false,
                                          std::optional<size_t> fresh_budget = std::nullopt,
                                          const Deadline* deadline = nullptr) {
    std::optional<ContrastiveProblem> materialized;
    if (semantic) materialized.emplace(p.materialized());
    const ContrastiveProblem& build_p = semantic ? *materialized : p;

    GenState base;
    base.s = build_super_structure(build_p, mode, fresh_budget, deadline);
    base.safe = choose_safe_vector(base.s, build_p);
    base.q_com = base.s.q_com;
    base.q_diff = base.s.q_diff;
    repair_consistency(base, build_p, deadline);

    auto run_with = [&](const std::vector<std::pair<Ind, Ind>>& map) {
        GenState st = base;
        restrict_to_map(st, map);
        minimize_difference(st, build_p, deadline);
        minimize_commonality_support(st, build_p, deadline);
        sweep_redundant_atoms(st, build_p, deadline);
        return st;
    };

    auto admissible = [&](const std::vector<std::pair<Ind, Ind>>& map) {
        GenState st = base;
        restrict_to_map(st, map);
        std::vector<Assertion> qc = instantiate(st.joined(), st.s.fact_evidence);
        std::vector<Assertion> qd = instantiate(st.joined(), st.s.foil_evidence);
        return build_p.oracle().instance(0, build_p.fact(), {std::span<const Assertion>(qc)},
                                         deadline) &&
               !build_p.oracle().inconsistent({std::span<const Assertion>(qd)}, deadline);
    };

    // Runs the minimization under `map`, first forcing out every difference
    // atom whose foil instance lies outside `allowed` (empty = no target).
    // Returns nothing if some disallowed atom cannot be dropped.
    auto run_targeted = [&](const std::vector<std::pair<Ind, Ind>>& map,
                            const std::vector<Assertion>& allowed) -> std::optional<GenState> {
        GenState st = base;
        restrict_to_map(st, map);
        if (!allowed.empty()) {
            const EntailmentOracle& oracle = build_p.oracle();
            auto entails_both = [&](const std::vector<PatternAtom>& q) {
                std::vector<Assertion> qc = instantiate(q, st.s.fact_evidence);
                std::vector<Assertion> qd = instantiate(q, st.s.foil_evidence);
                return oracle.instance(0, build_p.fact(), {std::span<const Assertion>(qc)},
                                       deadline) &&
                       oracle.instance(0, build_p.foil(), {std::span<const Assertion>(qd)}, deadline);
            };
            for (bool removed = true; removed;) {
                removed = false;
                for (const auto& victim : st.q_diff) {
                    Assertion g = victim.instantiate(st.s.foil_evidence);
                    if (std::binary_search(allowed.begin(), allowed.end(), g)) continue;
                    std::vector<PatternAtom> rest;
                    for (const auto& a : st.joined())
                        if (!(a == victim)) rest.push_back(a);
                    if (!entails_both(rest)) continue;
                    st.q_diff.erase(std::remove(st.q_diff.begin(), st.q_diff.end(), victim),
                                    st.q_diff.end());
                    removed = true;
                    break;
                }
            }
            for (const auto& a : st.q_diff)
                if (!std::binary_search(allowed.begin(), allowed.end(),
                                        a.instantiate(st.s.foil_evidence)))
                    return std::nullopt;
        }
        minimize_difference(st, build_p, deadline);
        minimize_commonality_support(st, build_p, deadline);
        sweep_redundant_atoms(st, build_p, deadline);
        return st;
    };

    std::vector<std::pair<Ind, Ind>> h = improve_matching(base, build_p, deadline);
    GenState st = run_with(h);

    // Descent to a subset-minimal difference: repeatedly try to realize a
    // proper subset of the current difference, either under the current foil
    // map or under a single remap. Remaps can merge difference atoms or turn
    // them into commonality; the targeted run escapes deletion-order traps.
    for (bool improved = true; improved;) {
        improved = false;
        std::vector<Assertion> diff_now = instantiate(st.q_diff, st.s.foil_evidence);
        std::vector<std::vector<std::pair<Ind, Ind>>> trials{h};
        for (size_t i = 0; i < h.size(); ++i) {
            if (h[i].first == build_p.fact()) continue;
            for (Ind d : st.s.foil_inds) {
                if (d == h[i].second) continue;
                std::vector<std::pair<Ind, Ind>> trial = h;
                trial[i].second = d;
                trials.push_back(std::move(trial));
            }
        }
        // coordinated collapses: everything onto one foil individual (loops
        // and dense neighborhoods), and the identity where available
        for (Ind d : st.s.foil_inds) {
            std::vector<std::pair<Ind, Ind>> trial = h;
            for (auto& [c, img] : trial)
                if (c != build_p.fact()) img = d;
            trials.push_back(std::move(trial));
        }
        {
            std::vector<std::pair<Ind, Ind>> trial = h;
            for (auto& [c, img] : trial)
                if (c != build_p.fact() &&
                    std::find(st.s.foil_inds.begin(), st.s.foil_inds.end(), c) != st.s.foil_inds.end())
                    img = c;
            trials.push_back(std::move(trial));
        }
        for (const auto& g : diff_now) {
            std::vector<Assertion> allowed;
            for (const auto& x : diff_now)
                if (!(x == g)) allowed.push_back(x);
            for (const auto& trial : trials) {
                check_deadline(deadline);
                if (!admissible(trial)) continue;
                std::optional<GenState> cand = run_targeted(trial, allowed);
                if (!cand) continue;
                std::vector<Assertion> diff_cand = instantiate(cand->q_diff, cand->s.foil_evidence);
                if (diff_cand.size() < diff_now.size() &&
                    detail::subset_modulo_fresh(diff_cand, diff_now)) {
                    h = trial;
                    st = std::move(*cand);
                    improved = true;
                    break;
                }
            }
            if (improved) break;
        }
    }

    std::vector<Assertion> conflict = minimize_conflict(st, p, deadline);

    ContrastiveExplanation e;
    e.num_vars = static_cast<uint32_t>(st.s.vars.size());
    e.q_com = st.q_com;
    e.q_diff = st.q_diff;
    e.fact_evidence = st.s.fact_evidence;
    e.foil_evidence = st.s.foil_evidence;
    e.conflict = std::move(conflict);
    return canonical_ce(e, p.kb().vocab());
}

} // namespace elbx
