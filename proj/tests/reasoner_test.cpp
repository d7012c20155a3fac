#include <catch2/catch_amalgamated.hpp>

#include "elbx/reasoner.hpp"
#include "elbx/text_io.hpp"
#include "kb_fixtures.hpp"
#include "naive_reasoner.hpp"

using namespace elbx;

TEST_CASE("running example entailments") {
    KnowledgeBase kb = fixtures::running();
    SaturationState st = saturate(kb);
    CHECK_FALSE(st.inconsistent);

    auto has_fact = [&](const std::string& c, const std::string& a) {
        auto want = std::make_pair(fixtures::ind(kb, a),
                                   kb.vocab_mut().concept_name(c));
        for (auto& [i, n] : st.instance_concepts)
            if (i == want.first && n == want.second) return true;
        return false;
    };
    CHECK(has_fact("Interviewed", "alice"));
    CHECK_FALSE(has_fact("Interviewed", "bob"));
    CHECK(has_fact("Qualified", "alice"));

    CHECK(entails_assertion(kb, fixtures::cls(kb, "Qualified", "alice")));
    CHECK(entails_assertion(kb, fixtures::rel(kb, "publishedAt", "alice", "aij")));
    CHECK_FALSE(entails_assertion(kb, fixtures::rel(kb, "hasFunding", "bob", "nsf")));

    CHECK(instance_check(kb, fixtures::con(kb, "and(Qualified some(publishedAt Journal))"),
                         fixtures::ind(kb, "alice")));
    CHECK(instance_check(kb, Concept::top(), fixtures::ind(kb, "bob")));
    CHECK_FALSE(instance_check(kb, fixtures::con(kb, "Interviewed"), fixtures::ind(kb, "bob")));
}

TEST_CASE("inconsistency detection") {
    KnowledgeBase kb = parse_kb("SubClassOf(A Bottom)\nClassAssertion(A a)");
    CHECK(saturate(kb).inconsistent);
    // everything is entailed
    CHECK(entails_assertion(kb, fixtures::cls(kb, "Z", "a")));
    CHECK(entails_assertion(kb, fixtures::rel(kb, "r", "a", "a")));

    KnowledgeBase viaRole =
        parse_kb("SubClassOf(some(r B) Bottom)\nClassAssertion(B b)\nPropertyAssertion(r a b)");
    CHECK(saturate(viaRole).inconsistent);

    KnowledgeBase anon = parse_kb("SubClassOf(A some(r B))\nSubClassOf(B Bottom)\nClassAssertion(A a)");
    CHECK(saturate(anon).inconsistent);

    KnowledgeBase fine = fixtures::running();
    CHECK_FALSE(saturate(fine).inconsistent);
}

// Five crafted KBs with hand-derived entailments and non-entailments.
TEST_CASE("soundness spot suite") {
    // 1: role chains through anonymous individuals
    KnowledgeBase k1 = parse_kb(R"(
SubClassOf(A some(r B))
SubClassOf(B some(s C))
SubClassOf(some(r some(s C)) D)
SubClassOf(some(r Top) E)
ClassAssertion(A a)
ClassAssertion(B b)
)");
    CHECK(instance_check(k1, fixtures::con(k1, "D"), fixtures::ind(k1, "a")));
    CHECK(instance_check(k1, fixtures::con(k1, "E"), fixtures::ind(k1, "a")));
    CHECK(instance_check(k1, fixtures::con(k1, "some(r B)"), fixtures::ind(k1, "a")));
    CHECK(instance_check(k1, fixtures::con(k1, "some(s C)"), fixtures::ind(k1, "b")));
    CHECK_FALSE(instance_check(k1, fixtures::con(k1, "D"), fixtures::ind(k1, "b")));
    CHECK_FALSE(instance_check(k1, fixtures::con(k1, "E"), fixtures::ind(k1, "b")));
    CHECK_FALSE(instance_check(k1, fixtures::con(k1, "some(s B)"), fixtures::ind(k1, "b")));
    CHECK_FALSE(instance_check(k1, fixtures::con(k1, "A"), fixtures::ind(k1, "b")));

    // 2: conjunctions on both sides
    KnowledgeBase k2 = parse_kb(R"(
SubClassOf(and(A B) C)
SubClassOf(C and(D E))
ClassAssertion(A a)
ClassAssertion(B a)
ClassAssertion(A b)
)");
    CHECK(instance_check(k2, fixtures::con(k2, "C"), fixtures::ind(k2, "a")));
    CHECK(instance_check(k2, fixtures::con(k2, "D"), fixtures::ind(k2, "a")));
    CHECK(instance_check(k2, fixtures::con(k2, "and(D E)"), fixtures::ind(k2, "a")));
    CHECK(instance_check(k2, fixtures::con(k2, "and(A B C D E)"), fixtures::ind(k2, "a")));
    CHECK_FALSE(instance_check(k2, fixtures::con(k2, "C"), fixtures::ind(k2, "b")));
    CHECK_FALSE(instance_check(k2, fixtures::con(k2, "D"), fixtures::ind(k2, "b")));
    CHECK_FALSE(instance_check(k2, fixtures::con(k2, "and(A B)"), fixtures::ind(k2, "b")));

    // 3: asserted role edges feeding existential restrictions
    KnowledgeBase k3 = parse_kb(R"(
SubClassOf(some(owns some(emits Noise)) Annoyed)
ClassAssertion(Noise horn)
PropertyAssertion(owns carl truck)
PropertyAssertion(emits truck horn)
PropertyAssertion(owns dana bike)
)");
    CHECK(instance_check(k3, fixtures::con(k3, "Annoyed"), fixtures::ind(k3, "carl")));
    CHECK(instance_check(k3, fixtures::con(k3, "some(emits Noise)"), fixtures::ind(k3, "truck")));
    CHECK(instance_check(k3, fixtures::con(k3, "some(owns Top)"), fixtures::ind(k3, "dana")));
    CHECK_FALSE(instance_check(k3, fixtures::con(k3, "Annoyed"), fixtures::ind(k3, "dana")));
    CHECK_FALSE(instance_check(k3, fixtures::con(k3, "some(emits Noise)"), fixtures::ind(k3, "bike")));
    CHECK_FALSE(instance_check(k3, fixtures::con(k3, "Noise"), fixtures::ind(k3, "truck")));

    // 4: Top on the left side
    KnowledgeBase k4 = parse_kb(R"(
SubClassOf(Top Thing)
SubClassOf(and(Thing Small) Cute)
ClassAssertion(Small mouse)
PropertyAssertion(likes cat mouse)
)");
    CHECK(instance_check(k4, fixtures::con(k4, "Thing"), fixtures::ind(k4, "mouse")));
    CHECK(instance_check(k4, fixtures::con(k4, "Cute"), fixtures::ind(k4, "mouse")));
    CHECK(instance_check(k4, fixtures::con(k4, "Thing"), fixtures::ind(k4, "cat")));
    CHECK(instance_check(k4, fixtures::con(k4, "some(likes Cute)"), fixtures::ind(k4, "cat")));
    CHECK_FALSE(instance_check(k4, fixtures::con(k4, "Cute"), fixtures::ind(k4, "cat")));
    CHECK_FALSE(instance_check(k4, fixtures::con(k4, "Small"), fixtures::ind(k4, "cat")));

    // 5: unsatisfiable concept that no individual has
    KnowledgeBase k5 = parse_kb(R"(
SubClassOf(and(Fish Mammal) Bottom)
SubClassOf(Whale Mammal)
SubClassOf(Whale Aquatic)
ClassAssertion(Whale moby)
ClassAssertion(Fish nemo)
)");
    CHECK_FALSE(saturate(k5).inconsistent);
    CHECK(instance_check(k5, fixtures::con(k5, "Mammal"), fixtures::ind(k5, "moby")));
    CHECK(instance_check(k5, fixtures::con(k5, "and(Mammal Aquatic)"), fixtures::ind(k5, "moby")));
    CHECK_FALSE(instance_check(k5, fixtures::con(k5, "Fish"), fixtures::ind(k5, "moby")));
    CHECK_FALSE(instance_check(k5, fixtures::con(k5, "Mammal"), fixtures::ind(k5, "nemo")));
    CHECK_FALSE(instance_check(k5, fixtures::con(k5, "and(Fish Mammal)"), fixtures::ind(k5, "nemo")));
}

TEST_CASE("saturation is deterministic") {
    KnowledgeBase kb = fixtures::running();
    SaturationState a = saturate(kb);
    SaturationState b = saturate(kb);
    CHECK(a == b);
}

TEST_CASE("materialize extends the ABox with entailed facts") {
    KnowledgeBase kb = fixtures::offer();
    auto abox = materialize(kb);
    KnowledgeBase ke = kb.with_abox(abox);
    CHECK(ke.has_assertion(fixtures::cls(kb, "Qualified", "alice")));
    CHECK(ke.has_assertion(fixtures::cls(kb, "Offered", "alice")));
    CHECK_FALSE(ke.has_assertion(fixtures::cls(kb, "Offered", "bob")));
    // all original assertions are kept
    for (const auto& a : kb.abox()) CHECK(ke.has_assertion(a));

    SECTION("empty TBox is a fixpoint") {
        KnowledgeBase flat = parse_kb("ClassAssertion(A a)\nPropertyAssertion(r a b)");
        CHECK(materialize(flat) == flat.abox());
    }

    SECTION("materialization is a fixpoint") {
        KnowledgeBase once = kb.with_abox(materialize(kb));
        CHECK(materialize(once) == once.abox());

        KnowledgeBase run = fixtures::running();
        KnowledgeBase ronce = run.with_abox(materialize(run));
        CHECK(materialize(ronce) == ronce.abox());
        CHECK(ronce.has_assertion(fixtures::cls(run, "Qualified", "alice")));
        CHECK(ronce.has_assertion(fixtures::cls(run, "Interviewed", "alice")));
    }

    SECTION("inconsistent KBs are rejected") {
        KnowledgeBase bad = parse_kb("SubClassOf(A Bottom)\nClassAssertion(A a)");
        CHECK_THROWS_AS(materialize(bad), InconsistentKbError);
    }
}

TEST_CASE("disjunctive LHS normalization preserves entailment") {
    KnowledgeBase split = parse_kb(R"(
SubClassOf(or(some(leads Group) some(hasFunding Top)) Qualified)
ClassAssertion(Group kr)
PropertyAssertion(leads alice kr)
PropertyAssertion(hasFunding carol nsf)
ClassAssertion(Group dave)
)");
    // the same KB with the two GCIs written out
    KnowledgeBase manual = parse_kb(R"(
SubClassOf(some(leads Group) Qualified)
SubClassOf(some(hasFunding Top) Qualified)
ClassAssertion(Group kr)
PropertyAssertion(leads alice kr)
PropertyAssertion(hasFunding carol nsf)
ClassAssertion(Group dave)
)");
    CHECK(kb_equal(split, manual));
    for (const std::string who : {"alice", "carol", "dave", "kr"}) {
        Assertion q = fixtures::cls(split, "Qualified", who);
        Assertion qm = fixtures::cls(manual, "Qualified", who);
        CHECK(entails_assertion(split, q) == entails_assertion(manual, qm));
        CHECK(entails_assertion(split, q) == naive::entails(split, q));
    }
}

TEST_CASE("oracle agrees with the reference model builder") {
    std::vector<KnowledgeBase> kbs;
    kbs.push_back(fixtures::running());
    kbs.push_back(fixtures::running_prime());
    kbs.push_back(fixtures::offer());
    kbs.push_back(parse_kb(R"(
SubClassOf(A some(r B))
SubClassOf(some(r B) C)
SubClassOf(and(C A) D)
ClassAssertion(A a)
ClassAssertion(B b)
PropertyAssertion(r b a)
)"));
    for (auto& kb : kbs) {
        CHECK(saturate(kb).inconsistent == naive::inconsistent(kb));
        auto sig = kb.signature();
        for (auto a : kb.abox_individuals()) {
            for (auto c : sig.concepts) {
                Assertion q = Assertion::clazz(c, a);
                INFO(kb.render(q));
                CHECK(entails_assertion(kb, q) == naive::entails(kb, q));
            }
            // a couple of complex queries per individual
            for (auto r : sig.roles) {
                Concept q1 = Concept::exists(r, Concept::top());
                CHECK(instance_check(kb, q1, a) == naive::entails_instance(kb, q1, a));
                for (auto c : sig.concepts) {
                    Concept q2 = Concept::exists(r, Concept::atomic(c));
                    CHECK(instance_check(kb, q2, a) == naive::entails_instance(kb, q2, a));
                }
            }
        }
    }
}

TEST_CASE("monotonicity on small KBs") {
    KnowledgeBase kb = fixtures::offer();
    auto sig = kb.signature();
    std::vector<Assertion> extra = {fixtures::cls(kb, "Nominee", "bob"),
                                    fixtures::cls(kb, "Prof", "bob"),
                                    fixtures::rel(kb, "knows", "alice", "bob")};
    for (const auto& beta : extra) {
        std::vector<Assertion> bigger = kb.abox();
        bigger.push_back(beta);
        KnowledgeBase ext = kb.with_abox(bigger);
        if (saturate(ext).inconsistent) continue;
        for (auto a : kb.abox_individuals())
            for (auto c : sig.concepts) {
                Assertion q = Assertion::clazz(c, a);
                if (entails_assertion(kb, q)) CHECK(entails_assertion(ext, q));
            }
    }
}
