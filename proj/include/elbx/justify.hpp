#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <set>

#include "elbx/reasoner.hpp"

namespace elbx {

// What a justification must entail.
struct Goal {
    enum class Kind : uint8_t { Inconsistency, Instance, Role };

    Kind kind = Kind::Inconsistency;
    Concept query;
    Ind subject{};
    Ind object{};
    RoleId role{};

    static Goal inconsistency() { return Goal{}; }

    static Goal instance(Concept c, Ind a) {
        Goal g;
        g.kind = Kind::Instance;
        g.query = std::move(c);
        g.subject = a;
        return g;
    }

    static Goal role_assertion(RoleId r, Ind s, Ind o) {
        Goal g;
        g.kind = Kind::Role;
        g.role = r;
        g.subject = s;
        g.object = o;
        return g;
    }

    static Goal assertion(const Assertion& a) {
        if (a.kind == Assertion::Kind::Class)
            return instance(Concept::atomic(a.cls), a.subject);
        return role_assertion(a.role, a.subject, a.object);
    }
};

// Justification with fixed component K': subset-minimal J ⊆ K \ K' with
// K' ∪ J ⊨ goal.
struct JustificationQuery {
    const KnowledgeBase* kb = nullptr;
    std::vector<Axiom> fixed; // subset of kb's axioms
    Goal goal;
    const Deadline* deadline = nullptr;
};

namespace detail {

// Decides entailment of a goal from `fixed ∪ subset`. When no candidate is a
// GCI the TBox is constant and normalized only once.
class GoalTester {
public:
    GoalTester(const KnowledgeBase& kb, const std::vector<Axiom>& fixed, Goal goal,
               const Deadline* deadline = nullptr)
        : kb_(kb), goal_(std::move(goal)), deadline_(deadline) {
        for (const auto& ax : fixed) {
            if (std::holds_alternative<Gci>(ax))
                fixed_gcis_.push_back(std::get<Gci>(ax));
            else
                fixed_assertions_.push_back(std::get<Assertion>(ax));
        }
    }

    // Call once with the full candidate list before testing subsets.
    void prepare(const std::vector<Axiom>& candidates) {
        bool tbox_varies = false;
        for (const auto& ax : candidates)
            if (std::holds_alternative<Gci>(ax)) tbox_varies = true;
        if (!tbox_varies) {
            KnowledgeBase shell(kb_.vocab_ptr());
            for (const auto& g : fixed_gcis_) shell.add(g);
            cached_.emplace(shell, queries());
        }
    }

    bool entails(const std::vector<Axiom>& subset) const {
        std::vector<Assertion> abox = fixed_assertions_;
        std::vector<Gci> gcis;
        for (const auto& ax : subset) {
            if (std::holds_alternative<Gci>(ax))
                gcis.push_back(std::get<Gci>(ax));
            else
                abox.push_back(std::get<Assertion>(ax));
        }
        if (cached_ && gcis.empty()) return decide(*cached_, abox);
        KnowledgeBase shell(kb_.vocab_ptr());
        for (const auto& g : fixed_gcis_) shell.add(g);
        for (const auto& g : gcis) shell.add(g);
        EntailmentOracle oracle(shell, queries());
        return decide(oracle, abox);
    }

private:
    std::vector<Concept> queries() const {
        if (goal_.kind == Goal::Kind::Instance) return {goal_.query};
        return {};
    }

    bool decide(const EntailmentOracle& oracle, const std::vector<Assertion>& abox) const {
        EntailmentOracle::Spans spans{std::span<const Assertion>(abox)};
        switch (goal_.kind) {
        case Goal::Kind::Inconsistency:
            return oracle.inconsistent(spans, deadline_);
        case Goal::Kind::Instance:
            return oracle.instance(0, goal_.subject, spans, deadline_);
        case Goal::Kind::Role:
            return oracle.role_entailed(goal_.role, goal_.subject, goal_.object, spans, deadline_);
        }
        return false;
    }

    const KnowledgeBase& kb_;
    Goal goal_;
    const Deadline* deadline_ = nullptr;
    std::vector<Gci> fixed_gcis_;
    std::vector<Assertion> fixed_assertions_;
    std::optional<EntailmentOracle> cached_;
};

inline std::vector<Axiom> candidates_of(const JustificationQuery& q) {
    std::vector<Axiom> fixed = q.fixed;
    std::sort(fixed.begin(), fixed.end(), axiom_less);
    std::vector<Axiom> out;
    for (auto& ax : q.kb->axioms())
        if (!std::binary_search(fixed.begin(), fixed.end(), ax, axiom_less)) out.push_back(ax);
    std::sort(out.begin(), out.end(), axiom_less);
    return out;
}

using AxiomLess = std::function<bool(const Axiom&, const Axiom&)>;

// Deletion-minimizes `working` (already entailing) in the given order.
inline std::vector<Axiom> contract(const GoalTester& tester, std::vector<Axiom> working,
                                   const AxiomLess& order) {
    std::vector<Axiom> trial = working;
    std::stable_sort(working.begin(), working.end(), order);
    for (const auto& beta : working) {
        std::vector<Axiom> without;
        without.reserve(trial.size());
        for (const auto& ax : trial)
            if (!(ax == beta)) without.push_back(ax);
        if (tester.entails(without)) trial = std::move(without);
    }
    return trial;
}

} // namespace detail

// One subset-minimal justification, deterministic: removal attempts follow
// `order` (canonical axiom order by default).
inline std::vector<Axiom> justify_fixed(const JustificationQuery& q,
                                        const detail::AxiomLess& order = detail::AxiomLess()) {
    detail::GoalTester tester(*q.kb, q.fixed, q.goal, q.deadline);
    std::vector<Axiom> candidates = detail::candidates_of(q);
    tester.prepare(candidates);
    if (!tester.entails(candidates)) throw NotEntailedError("goal is not entailed by the knowledge base");
    if (tester.entails({})) return {};
    auto less = order ? order : detail::AxiomLess(axiom_less);
    std::vector<Axiom> j = detail::contract(tester, candidates, less);
    std::sort(j.begin(), j.end(), axiom_less);
    return j;
}

struct AllJustifications {
    std::vector<std::vector<Axiom>> justifications; // sorted, each sorted
    bool truncated = false;
};

// Reiter-style hitting-set-tree enumeration seeded by justify_fixed.
// Removal sets are explored breadth-first in deterministic order.
inline AllJustifications all_justifications(const JustificationQuery& q,
                                            size_t limit = static_cast<size_t>(-1)) {
    detail::GoalTester tester(*q.kb, q.fixed, q.goal, q.deadline);
    std::vector<Axiom> candidates = detail::candidates_of(q);
    tester.prepare(candidates);
    if (!tester.entails(candidates)) throw NotEntailedError("goal is not entailed by the knowledge base");

    std::set<std::vector<Axiom>, decltype([](const std::vector<Axiom>& a, const std::vector<Axiom>& b) {
                return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), axiom_less);
            })>
        results, visited;

    AllJustifications out;
    if (tester.entails({})) {
        // the fixed part suffices: the empty set is the unique justification
        out.justifications.push_back({});
        return out;
    }

    std::deque<std::vector<Axiom>> frontier; // removal sets
    frontier.push_back({});
    bool more_than_limit = false;

    while (!frontier.empty()) {
        std::vector<Axiom> removed = std::move(frontier.front());
        frontier.pop_front();
        if (!visited.insert(removed).second) continue;

        std::vector<Axiom> avail;
        for (const auto& ax : candidates)
            if (!std::binary_search(removed.begin(), removed.end(), ax, axiom_less)) avail.push_back(ax);
        if (!tester.entails(avail)) continue; // closed node

        // Reuse a known justification disjoint from the removal set if any.
        std::vector<Axiom> j;
        bool reused = false;
        for (const auto& known : results) {
            bool disjoint = true;
            for (const auto& ax : known)
                if (std::binary_search(removed.begin(), removed.end(), ax, axiom_less)) disjoint = false;
            if (disjoint) {
                j = known;
                reused = true;
                break;
            }
        }
        if (!reused) {
            j = detail::contract(tester, avail, detail::AxiomLess(axiom_less));
            std::sort(j.begin(), j.end(), axiom_less);
            if (results.insert(j).second && results.size() > limit) {
                more_than_limit = true;
                break;
            }
        }
        for (const auto& beta : j) {
            std::vector<Axiom> next = removed;
            next.insert(std::upper_bound(next.begin(), next.end(), beta, axiom_less), beta);
            if (!visited.count(next)) frontier.push_back(std::move(next));
        }
    }

    size_t n = 0;
    for (const auto& j : results) {
        if (n == limit) break;
        out.justifications.push_back(j);
        ++n;
    }
    out.truncated = more_than_limit;
    return out;
}

inline std::vector<Axiom> union_of_justifications(const JustificationQuery& q) {
    AllJustifications all = all_justifications(q);
    std::vector<Axiom> out;
    for (const auto& j : all.justifications)
        for (const auto& ax : j) out.push_back(ax);
    std::sort(out.begin(), out.end(), axiom_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace elbx
