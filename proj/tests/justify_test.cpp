#include <catch2/catch_amalgamated.hpp>

#include "elbx/justify.hpp"
#include "elbx/text_io.hpp"
#include "kb_fixtures.hpp"

using namespace elbx;

namespace {

std::vector<Axiom> tbox_axioms(const KnowledgeBase& kb) {
    std::vector<Axiom> out;
    for (const auto& g : kb.tbox()) out.emplace_back(g);
    return out;
}

std::vector<Assertion> assertions_of(const std::vector<Axiom>& axs) {
    std::vector<Assertion> out;
    for (const auto& ax : axs) out.push_back(std::get<Assertion>(ax));
    std::sort(out.begin(), out.end());
    return out;
}

// Brute-force reference: every subset-minimal set of non-fixed axioms that,
// together with the fixed part, entails the goal.
std::vector<std::vector<Axiom>> brute_force_justifications(const JustificationQuery& q) {
    detail::GoalTester tester(*q.kb, q.fixed, q.goal);
    std::vector<Axiom> candidates = detail::candidates_of(q);
    tester.prepare(candidates);
    size_t n = candidates.size();
    REQUIRE(n <= 16);
    std::vector<std::vector<Axiom>> entailing;
    for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
        std::vector<Axiom> sub;
        for (size_t i = 0; i < n; ++i)
            if (mask & (size_t(1) << i)) sub.push_back(candidates[i]);
        if (tester.entails(sub)) entailing.push_back(std::move(sub));
    }
    std::vector<std::vector<Axiom>> minimal;
    for (const auto& s : entailing) {
        bool is_min = true;
        for (const auto& t : entailing) {
            if (t.size() >= s.size()) continue;
            bool subset = true;
            for (const auto& ax : t)
                if (std::find(s.begin(), s.end(), ax) == s.end()) subset = false;
            if (subset) is_min = false;
        }
        if (is_min) minimal.push_back(s);
    }
    for (auto& j : minimal) std::sort(j.begin(), j.end(), axiom_less);
    std::sort(minimal.begin(), minimal.end(), [](const auto& a, const auto& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), axiom_less);
    });
    return minimal;
}

} // namespace

TEST_CASE("single justification for the interview entailment") {
    KnowledgeBase kb = fixtures::running();
    JustificationQuery q{&kb, tbox_axioms(kb),
                         Goal::instance(fixtures::con(kb, "Interviewed"), fixtures::ind(kb, "alice"))};
    std::vector<Axiom> j = justify_fixed(q);

    std::vector<Assertion> got = assertions_of(j);
    std::vector<Assertion> j1 = {fixtures::rel(kb, "publishedAt", "alice", "aij"),
                                 fixtures::cls(kb, "Journal", "aij"),
                                 fixtures::rel(kb, "leads", "alice", "kr"),
                                 fixtures::cls(kb, "Group", "kr")};
    std::vector<Assertion> j2 = {fixtures::rel(kb, "publishedAt", "alice", "aij"),
                                 fixtures::cls(kb, "Journal", "aij"),
                                 fixtures::rel(kb, "hasFunding", "alice", "nsf")};
    std::sort(j1.begin(), j1.end());
    std::sort(j2.begin(), j2.end());
    CHECK((got == j1 || got == j2));

    SECTION("minimality: removing any member breaks the entailment") {
        detail::GoalTester tester(kb, q.fixed, q.goal);
        tester.prepare(detail::candidates_of(q));
        for (const auto& beta : j) {
            std::vector<Axiom> without;
            for (const auto& ax : j)
                if (!(ax == beta)) without.push_back(ax);
            CHECK_FALSE(tester.entails(without));
        }
    }

    SECTION("fixed alone sufficing yields the empty justification") {
        JustificationQuery all_fixed{&kb, kb.axioms(),
                                     Goal::instance(fixtures::con(kb, "Qualified"), fixtures::ind(kb, "alice"))};
        CHECK(justify_fixed(all_fixed).empty());
    }

    SECTION("partially fixed ABox") {
        std::vector<Axiom> fixed = tbox_axioms(kb);
        fixed.emplace_back(fixtures::rel(kb, "publishedAt", "alice", "aij"));
        fixed.emplace_back(fixtures::cls(kb, "Journal", "aij"));
        JustificationQuery q2{&kb, fixed, q.goal};
        std::vector<Assertion> got2 = assertions_of(justify_fixed(q2));
        std::vector<Assertion> b1 = {fixtures::rel(kb, "hasFunding", "alice", "nsf")};
        std::vector<Assertion> b2 = {fixtures::rel(kb, "leads", "alice", "kr"),
                                     fixtures::cls(kb, "Group", "kr")};
        std::sort(b2.begin(), b2.end());
        CHECK((got2 == b1 || got2 == b2));
    }

    SECTION("unentailed goals are rejected") {
        JustificationQuery bad{&kb, tbox_axioms(kb),
                               Goal::instance(fixtures::con(kb, "Interviewed"), fixtures::ind(kb, "bob"))};
        CHECK_THROWS_AS(justify_fixed(bad), NotEntailedError);
    }
}

TEST_CASE("all justifications of the interview entailment") {
    KnowledgeBase kb = fixtures::running();
    JustificationQuery q{&kb, tbox_axioms(kb),
                         Goal::instance(fixtures::con(kb, "Interviewed"), fixtures::ind(kb, "alice"))};
    AllJustifications all = all_justifications(q);
    REQUIRE(all.justifications.size() == 2);
    CHECK_FALSE(all.truncated);
    CHECK(all.justifications == brute_force_justifications(q));

    SECTION("union of justifications") {
        std::vector<Assertion> u = assertions_of(union_of_justifications(q));
        std::vector<Assertion> want = {
            fixtures::rel(kb, "publishedAt", "alice", "aij"), fixtures::cls(kb, "Journal", "aij"),
            fixtures::rel(kb, "leads", "alice", "kr"), fixtures::cls(kb, "Group", "kr"),
            fixtures::rel(kb, "hasFunding", "alice", "nsf")};
        std::sort(want.begin(), want.end());
        CHECK(u == want);
    }

    SECTION("limit truncates") {
        AllJustifications one = all_justifications(q, 1);
        CHECK(one.justifications.size() == 1);
        CHECK(one.truncated);
        AllJustifications two = all_justifications(q, 2);
        CHECK(two.justifications.size() == 2);
        CHECK_FALSE(two.truncated);
    }
}

TEST_CASE("asserted goal has the singleton justification") {
    KnowledgeBase kb = fixtures::running();
    JustificationQuery q{&kb, tbox_axioms(kb),
                         Goal::assertion(fixtures::cls(kb, "PostDoc", "bob"))};
    AllJustifications all = all_justifications(q);
    REQUIRE(all.justifications.size() == 1);
    CHECK(assertions_of(all.justifications[0]) ==
          std::vector<Assertion>{fixtures::cls(kb, "PostDoc", "bob")});
}

TEST_CASE("union of justifications on the offer example") {
    KnowledgeBase kb = fixtures::offer();
    JustificationQuery q{&kb, tbox_axioms(kb),
                         Goal::instance(fixtures::con(kb, "Offered"), fixtures::ind(kb, "alice"))};
    std::vector<Assertion> u = assertions_of(union_of_justifications(q));
    std::vector<Assertion> want = {fixtures::cls(kb, "Prof", "alice"),
                                   fixtures::cls(kb, "Nominee", "alice")};
    std::sort(want.begin(), want.end());
    CHECK(u == want);
}

TEST_CASE("justifications may include TBox axioms when not fixed") {
    KnowledgeBase kb = fixtures::offer();
    JustificationQuery q{&kb, {}, Goal::instance(fixtures::con(kb, "Qualified"), fixtures::ind(kb, "alice"))};
    std::vector<Axiom> j = justify_fixed(q);
    // needs Prof(alice) and Prof ⊑ Qualified
    REQUIRE(j.size() == 2);
    CHECK(all_justifications(q).justifications == brute_force_justifications(q));
}

TEST_CASE("inconsistency justifications") {
    KnowledgeBase kb = parse_kb(R"(
SubClassOf(and(P some(leads G)) Bottom)
ClassAssertion(P bob)
ClassAssertion(G kr)
PropertyAssertion(leads bob kr)
ClassAssertion(Extra bob)
)");
    JustificationQuery q{&kb, tbox_axioms(kb), Goal::inconsistency()};
    AllJustifications all = all_justifications(q);
    REQUIRE(all.justifications.size() == 1);
    std::vector<Assertion> want = {fixtures::cls(kb, "P", "bob"), fixtures::cls(kb, "G", "kr"),
                                   fixtures::rel(kb, "leads", "bob", "kr")};
    std::sort(want.begin(), want.end());
    CHECK(assertions_of(all.justifications[0]) == want);
}

TEST_CASE("hitting-set tree agrees with brute force on random queries") {
    // small deterministic family of KBs exercising multiple justifications
    KnowledgeBase kb = parse_kb(R"(
SubClassOf(A1 B)
SubClassOf(A2 B)
SubClassOf(A3 B)
SubClassOf(and(B C) Goal)
SubClassOf(some(r C) Goal)
ClassAssertion(A1 x)
ClassAssertion(A2 x)
ClassAssertion(A3 x)
ClassAssertion(C x)
ClassAssertion(C y)
PropertyAssertion(r x y)
)");
    JustificationQuery q{&kb, tbox_axioms(kb),
                         Goal::instance(fixtures::con(kb, "Goal"), fixtures::ind(kb, "x"))};
    AllJustifications all = all_justifications(q);
    CHECK(all.justifications == brute_force_justifications(q));
    CHECK(all.justifications.size() == 4);
}
