#include <catch2/catch_amalgamated.hpp>

#include "elbx/generate.hpp"
#include "elbx/text_io.hpp"
#include "kb_fixtures.hpp"

using namespace elbx;

namespace {

ContrastiveProblem hiring_problem(const KnowledgeBase& kb) {
    return ContrastiveProblem(kb, fixtures::con(kb, "Interviewed"), fixtures::ind(kb, "alice"),
                              fixtures::ind(kb, "bob"));
}

std::vector<std::string> ground_texts(const KnowledgeBase& kb, const std::vector<PatternAtom>& atoms,
                                      const Evidence& ev) {
    std::vector<std::string> out;
    for (const auto& a : atoms) out.push_back(kb.render(a.instantiate(ev)));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("full super-structure spans all individual pairs") {
    KnowledgeBase kb = fixtures::running();
    ContrastiveProblem p = hiring_problem(kb);
    SuperStructure s = build_super_structure(p, StructureMode::Full);
    CHECK(s.vars.size() == 36); // six ABox individuals, squared
    CHECK(s.core.size() == kb.abox().size());
    CHECK(s.conflict_pool == kb.abox());
    // the commonality instantiated for the fact side is always asserted
    for (const auto& a : s.q_com) {
        CHECK(kb.has_assertion(a.instantiate(s.fact_evidence)));
        CHECK(kb.has_assertion(a.instantiate(s.foil_evidence)));
    }
    for (const auto& a : s.q_diff) {
        CHECK(kb.has_assertion(a.instantiate(s.fact_evidence)));
        CHECK_FALSE(kb.has_assertion(a.instantiate(s.foil_evidence)));
    }
}

TEST_CASE("refined super-structure uses the justification core") {
    KnowledgeBase kb = fixtures::running();
    ContrastiveProblem p = hiring_problem(kb);
    SuperStructure s = build_super_structure(p, StructureMode::Refined);

    // core = union of the two justifications: everything except bob's facts
    std::vector<Assertion> want = {
        fixtures::rel(kb, "publishedAt", "alice", "aij"), fixtures::cls(kb, "Journal", "aij"),
        fixtures::rel(kb, "leads", "alice", "kr"), fixtures::cls(kb, "Group", "kr"),
        fixtures::rel(kb, "hasFunding", "alice", "nsf")};
    std::sort(want.begin(), want.end());
    CHECK(s.core == want);

    // fact individuals alice, aij, kr, nsf
    CHECK(s.fact_inds.size() == 4);
    // foil pool: bob and aaai (role-distance 1) plus two fresh individuals
    REQUIRE(s.foil_inds.size() == 4);
    CHECK(s.foil_inds[0] == fixtures::ind(kb, "aaai"));
    CHECK(s.foil_inds[1] == fixtures::ind(kb, "bob"));
    CHECK(s.foil_inds[2] == Ind::fresh(0));
    CHECK(s.foil_inds[3] == Ind::fresh(1));

    SECTION("class-only ABox yields class-only patterns") {
        KnowledgeBase flat = fixtures::offer();
        ContrastiveProblem pf(flat, fixtures::con(flat, "Offered"), fixtures::ind(flat, "alice"),
                              fixtures::ind(flat, "bob"));
        SuperStructure sf = build_super_structure(pf, StructureMode::Refined);
        for (const auto& a : sf.q_com) CHECK(a.kind == PatternAtom::Kind::Class);
        for (const auto& a : sf.q_diff) CHECK(a.kind == PatternAtom::Kind::Class);
    }
}

TEST_CASE("safe vector pairs fact with foil and maximizes kept commonality") {
    KnowledgeBase kb = fixtures::running();
    ContrastiveProblem p = hiring_problem(kb);
    SuperStructure s = build_super_structure(p, StructureMode::Refined);
    SafeVector safe = choose_safe_vector(s, p);

    REQUIRE(safe.matching.size() == 4);
    auto pair_of = [&](const std::string& fact) {
        for (auto [c, d] : safe.matching)
            if (c == fixtures::ind(kb, fact)) return d;
        FAIL("no match for " << fact);
        return Ind::fresh(99);
    };
    CHECK(pair_of("alice") == fixtures::ind(kb, "bob"));
    CHECK(pair_of("aij") == fixtures::ind(kb, "aaai")); // keeps publishedAt commonality
    CHECK(pair_of("kr") == Ind::fresh(0));              // kr is unrelated to bob's neighborhood
    CHECK(pair_of("nsf") == Ind::fresh(1));

    // injective on the foil side
    std::set<uint32_t> foils;
    for (auto [c, d] : safe.matching) CHECK(foils.insert(d.bits).second);
}

TEST_CASE("consistency repair fires on the strict variant's full structure") {
    KnowledgeBase kb = fixtures::running_prime();
    ContrastiveProblem p = hiring_problem(kb);
    GenState st;
    st.s = build_super_structure(p, StructureMode::Full);
    st.safe = choose_safe_vector(st.s, p);
    st.q_com = st.s.q_com;
    st.q_diff = st.s.q_diff;

    // the unrestricted foil instantiation forces a PostDoc to lead a group
    std::vector<Assertion> ground = instantiate(st.joined(), st.s.foil_evidence);
    REQUIRE(p.oracle().inconsistent({std::span<const Assertion>(ground)}));

    size_t before = st.joined().size();
    repair_consistency(st, p);
    std::vector<Assertion> after = instantiate(st.joined(), st.s.foil_evidence);
    CHECK_FALSE(p.oracle().inconsistent({std::span<const Assertion>(after)}));
    CHECK(st.joined().size() < before);

    // the safe core is untouched
    for (uint32_t v : st.safe.var_indexes) {
        (void)v;
    }
    std::vector<PatternAtom> all = st.joined();
    for (const auto& a : st.s.q_com) {
        bool safe_atom = st.safe.contains(a.v1) &&
                         (a.kind == PatternAtom::Kind::Class || st.safe.contains(a.v2));
        if (safe_atom) CHECK(std::find(all.begin(), all.end(), a) != all.end());
    }

    SECTION("already consistent instantiations are untouched") {
        KnowledgeBase plain = fixtures::running();
        ContrastiveProblem pp = hiring_problem(plain);
        GenState st2;
        st2.s = build_super_structure(pp, StructureMode::Refined);
        st2.safe = choose_safe_vector(st2.s, pp);
        st2.q_com = st2.s.q_com;
        st2.q_diff = st2.s.q_diff;
        size_t n = st2.joined().size();
        repair_consistency(st2, pp);
        CHECK(st2.joined().size() == n);
    }
}

TEST_CASE("pipeline reproduces the funding explanation") {
    KnowledgeBase kb = fixtures::running();
    ContrastiveProblem p = hiring_problem(kb);
    ContrastiveExplanation e = generate_ce(p, StructureMode::Refined);

    CHECK(ground_texts(kb, e.q_com, e.fact_evidence) ==
          std::vector<std::string>{"publishedAt(alice,aij)"});
    CHECK(ground_texts(kb, e.q_diff, e.fact_evidence) ==
          std::vector<std::string>{"Journal(aij)", "hasFunding(alice,nsf)"});
    CHECK(ground_texts(kb, e.q_diff, e.foil_evidence) ==
          std::vector<std::string>{"Journal(aaai)", "hasFunding(bob,_fresh:0)"});
    CHECK(e.conflict.empty());

    // exactly one fresh individual in the foil evidence
    int fresh = 0;
    for (Ind d : e.foil_evidence) fresh += d.is_fresh();
    CHECK(fresh == 1);

    ValidationReport r = validate_ce(p, e);
    CHECK(r.full_valid());
    CHECK(r.classification() == CeClass::Syntactic);

    SECTION("deterministic") {
        ContrastiveExplanation e2 = generate_ce(p, StructureMode::Refined);
        CHECK(e == e2);
    }
}

TEST_CASE("pipeline reports the postdoc conflict on the strict variant") {
    KnowledgeBase kb = fixtures::running_prime();
    ContrastiveProblem p = hiring_problem(kb);
    ContrastiveExplanation e = generate_ce(p, StructureMode::Refined);

    REQUIRE(e.conflict.size() == 1);
    CHECK(e.conflict[0] == fixtures::cls(kb, "PostDoc", "bob"));
    ValidationReport r = validate_ce(p, e);
    CHECK(r.full_valid());
}

TEST_CASE("semantic mode highlights the implicit commonality") {
    KnowledgeBase kb = fixtures::offer();
    ContrastiveProblem p(kb, fixtures::con(kb, "Offered"), fixtures::ind(kb, "alice"),
                         fixtures::ind(kb, "bob"));

    ContrastiveExplanation sem = generate_ce(p, StructureMode::Refined, /*semantic=*/true);
    CHECK(ground_texts(kb, sem.q_com, sem.foil_evidence) == std::vector<std::string>{"Qualified(bob)"});
    CHECK(ground_texts(kb, sem.q_diff, sem.foil_evidence) == std::vector<std::string>{"Nominee(bob)"});
    CHECK(sem.conflict.empty());
    ValidationReport r = validate_ce(p, sem);
    CHECK(r.full_valid());
    CHECK(r.classification() == CeClass::Semantic);

    ContrastiveExplanation syn = generate_ce(p, StructureMode::Refined, /*semantic=*/false);
    auto diff = ground_texts(kb, syn.q_diff, syn.fact_evidence);
    for (const auto& t : diff) CHECK((t == "Prof(alice)" || t == "Nominee(alice)"));
    CHECK(validate_ce(p, syn).full_valid());
    CHECK(validate_ce(p, syn).classification() == CeClass::Syntactic);
}

TEST_CASE("generated explanations embed into the full super-structure") {
    KnowledgeBase kb = fixtures::running();
    ContrastiveProblem p = hiring_problem(kb);
    ContrastiveExplanation e = generate_ce(p, StructureMode::Full);
    CHECK(validate_ce(p, e).full_valid());

    SuperStructure s = build_super_structure(p, StructureMode::Full);
    ContrastiveExplanation em;
    em.num_vars = static_cast<uint32_t>(s.vars.size());
    em.q_com = s.q_com;
    em.q_diff = s.q_diff;
    em.fact_evidence = s.fact_evidence;
    em.foil_evidence = s.foil_evidence;
    em.conflict = s.conflict_pool;
    // fresh-free syntactic explanations map into the super-structure
    if (std::none_of(e.foil_evidence.begin(), e.foil_evidence.end(),
                     [](Ind d) { return d.is_fresh(); }))
        CHECK(embeds_into(e, em));
}

TEST_CASE("single-pair degenerate problem") {
    KnowledgeBase kb = parse_kb(R"(
SubClassOf(A B)
ClassAssertion(A a)
ClassAssertion(C b)
)");
    ContrastiveProblem p(kb, fixtures::con(kb, "B"), fixtures::ind(kb, "a"), fixtures::ind(kb, "b"));
    ContrastiveExplanation e = generate_ce(p, StructureMode::Refined);
    CHECK(e.num_vars == 1);
    CHECK(ground_texts(kb, e.q_diff, e.foil_evidence) == std::vector<std::string>{"A(b)"});
    CHECK(validate_ce(p, e).full_valid());
}
