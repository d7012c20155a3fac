#pragma once

#include "elbx/ce.hpp"
#include "elbx/reasoner.hpp"

namespace elbx {

// A contrastive problem: why is `fact` an instance of `concept` while
// `foil` is not? Construction checks both sides, so a ContrastiveProblem is
// always consistent and well-posed.
class ContrastiveProblem {
public:
    ContrastiveProblem(KnowledgeBase kb, Concept query, Ind fact, Ind foil)
        : kb_(std::move(kb)), concept_(std::move(query)), fact_(fact), foil_(foil),
          oracle_(kb_, {concept_}) {
        EntailmentOracle::Spans abox{std::span<const Assertion>(kb_.abox())};
        if (!oracle_.instance(0, fact_, abox))
            throw NotAProblemError(NotAProblemError::Side::Fact,
                                   "the fact individual is not an instance of the concept");
        if (oracle_.instance(0, foil_, abox))
            throw NotAProblemError(NotAProblemError::Side::Foil,
                                   "the foil individual is already an instance of the concept");
    }

    const KnowledgeBase& kb() const { return kb_; }
    const Concept& query() const { return concept_; }
    Ind fact() const { return fact_; }
    Ind foil() const { return foil_; }
    const EntailmentOracle& oracle() const { return oracle_; }

    EntailmentOracle::Spans abox_spans() const { return {std::span<const Assertion>(kb_.abox())}; }

    // Same TBox and query concept over the materialized ABox.
    ContrastiveProblem materialized() const {
        return ContrastiveProblem(kb_.with_abox(materialize(kb_)), concept_, fact_, foil_);
    }

private:
    KnowledgeBase kb_;
    Concept concept_;
    Ind fact_;
    Ind foil_;
    EntailmentOracle oracle_;
};

enum class CeClass { Syntactic, Semantic };

struct ValidationReport {
    bool c1_fact = false;   // T, q(c) ⊨ C(a)
    bool c1_foil = false;   // T, q(d) ⊨ C(b)
    bool c2 = false;        // K ⊨ q(c)
    bool c3 = false;        // K ⊨ q_com(d)
    bool c4 = false;        // q(c) is ⊆-minimal for C1+C2
    bool c5 = false;        // conflict is ⊆-minimal restoring consistency
    bool conflict_in_abox = false;
    bool d_syntactic = false; // q_diff(d) ∩ A = ∅
    bool d_semantic = false;  // no atom of q_diff(d) is entailed
    bool syntactic_shape = false; // q_com(c), q_diff(c), q_com(d) ⊆ A

    std::optional<Assertion> c4_witness; // removable atom
    std::optional<Assertion> c5_witness; // removable conflict element

    bool c1() const { return c1_fact && c1_foil; }
    // Definition-level validity (conditions C1-C5).
    bool def_valid() const { return c1() && c2 && c3 && c4 && c5; }
    // Candidate validity: everything except the two minimality conditions.
    bool candidate_valid() const { return c1() && c2 && c3; }
    // The auxiliary disjointness check, per classification.
    bool d() const { return syntactic_shape ? d_syntactic : d_semantic; }
    bool full_valid() const { return def_valid() && d(); }

    CeClass classification() const { return syntactic_shape ? CeClass::Syntactic : CeClass::Semantic; }
};

inline ValidationReport validate_ce(const ContrastiveProblem& p, const ContrastiveExplanation& e) {
    if (e.fact_evidence.size() != e.num_vars || e.foil_evidence.size() != e.num_vars)
        throw InvalidCeError("evidence length does not match the variable count");
    for (const auto& a : joined_pattern(e))
        if (a.v1 >= e.num_vars || (a.kind == PatternAtom::Kind::Role && a.v2 >= e.num_vars))
            throw InvalidCeError("pattern atom uses an undeclared variable");

    const EntailmentOracle& oracle = p.oracle();
    const auto& abox = p.kb().abox();
    auto in_abox = [&](const Assertion& x) { return p.kb().has_assertion(x); };

    std::vector<PatternAtom> q = joined_pattern(e);
    std::vector<Assertion> q_c = instantiate(q, e.fact_evidence);
    std::vector<Assertion> q_d = instantiate(q, e.foil_evidence);
    std::vector<Assertion> com_c = instantiate(e.q_com, e.fact_evidence);
    std::vector<Assertion> com_d = instantiate(e.q_com, e.foil_evidence);
    std::vector<Assertion> diff_c = instantiate(e.q_diff, e.fact_evidence);
    std::vector<Assertion> diff_d = instantiate(e.q_diff, e.foil_evidence);

    ValidationReport r;
    r.c1_fact = oracle.instance(0, p.fact(), {std::span<const Assertion>(q_c)});
    r.c1_foil = oracle.instance(0, p.foil(), {std::span<const Assertion>(q_d)});

    auto all_entailed = [&](const std::vector<Assertion>& xs) {
        for (const auto& x : xs)
            if (!oracle.assertion_entailed(x, p.abox_spans())) return false;
        return true;
    };
    r.c2 = all_entailed(q_c);
    r.c3 = all_entailed(com_d);

    // C4: every single-atom removal from q(c) breaks C1-fact or C2.
    r.c4 = true;
    for (const auto& g : q_c) {
        std::vector<Assertion> rest;
        for (const auto& x : q_c)
            if (!(x == g)) rest.push_back(x);
        bool still_c1 = oracle.instance(0, p.fact(), {std::span<const Assertion>(rest)});
        bool still_c2 = all_entailed(rest);
        if (still_c1 && still_c2) {
            r.c4 = false;
            r.c4_witness = g;
            break;
        }
    }

    // C5: conflict ⊆ A, consistency restored, and ⊆-minimal for that.
    r.conflict_in_abox = true;
    for (const auto& c : e.conflict)
        if (!in_abox(c)) r.conflict_in_abox = false;
    std::vector<Assertion> conflict = e.conflict;
    std::sort(conflict.begin(), conflict.end());
    auto abox_minus = [&](const std::vector<Assertion>& removed) {
        std::vector<Assertion> rest;
        for (const auto& x : abox)
            if (!std::binary_search(removed.begin(), removed.end(), x)) rest.push_back(x);
        return rest;
    };
    std::vector<Assertion> reduced = abox_minus(conflict);
    bool consistent_after =
        !oracle.inconsistent({std::span<const Assertion>(reduced), std::span<const Assertion>(q_d)});
    r.c5 = r.conflict_in_abox && consistent_after;
    if (r.c5) {
        for (const auto& c : conflict) {
            std::vector<Assertion> smaller;
            for (const auto& x : conflict)
                if (!(x == c)) smaller.push_back(x);
            std::vector<Assertion> rest = abox_minus(smaller);
            if (!oracle.inconsistent({std::span<const Assertion>(rest), std::span<const Assertion>(q_d)})) {
                r.c5 = false;
                r.c5_witness = c;
                break;
            }
        }
    }

    // D: difference instantiated for the foil is genuinely absent.
    r.d_syntactic = true;
    for (const auto& x : diff_d)
        if (in_abox(x)) r.d_syntactic = false;
    r.d_semantic = true;
    for (const auto& x : diff_d)
        if (oracle.assertion_entailed(x, p.abox_spans())) r.d_semantic = false;

    r.syntactic_shape = true;
    for (const auto& xs : {com_c, diff_c, com_d})
        for (const auto& x : xs)
            if (!in_abox(x)) r.syntactic_shape = false;
    return r;
}

inline CeClass classify_ce(const ContrastiveProblem& p, const ContrastiveExplanation& e) {
    ValidationReport r = validate_ce(p, e);
    if (!r.def_valid()) throw InvalidCeError("not a valid contrastive explanation");
    return r.classification();
}

} // namespace elbx
