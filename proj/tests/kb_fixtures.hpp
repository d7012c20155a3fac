#pragma once

#include <string>

#include "elbx/text_io.hpp"

// Shared fixture knowledge bases used across the test suites.
namespace fixtures {

// Hiring example: alice gets interviewed, bob does not. The disjunctive
// qualification axiom is written with or(...) and splits into two GCIs.
inline const char* kRunning = R"(# hiring example
SubClassOf(and(Qualified some(publishedAt Journal)) Interviewed)
SubClassOf(or(some(leads Group) some(hasFunding Top)) Qualified)
SubClassOf(and(PostDoc some(leads Group)) Bottom)
ClassAssertion(Journal aij)
ClassAssertion(Group kr)
ClassAssertion(PostDoc bob)
PropertyAssertion(publishedAt alice aij)
PropertyAssertion(publishedAt bob aaai)
PropertyAssertion(leads alice kr)
PropertyAssertion(hasFunding alice nsf)
)";

// Same ABox, but leading a group is the only way to qualify.
inline const char* kRunningPrime = R"(# hiring example, strict variant
SubClassOf(and(Qualified some(publishedAt Journal)) Interviewed)
SubClassOf(some(leads Group) Qualified)
SubClassOf(and(PostDoc some(leads Group)) Bottom)
ClassAssertion(Journal aij)
ClassAssertion(Group kr)
ClassAssertion(PostDoc bob)
PropertyAssertion(publishedAt alice aij)
PropertyAssertion(publishedAt bob aaai)
PropertyAssertion(leads alice kr)
PropertyAssertion(hasFunding alice nsf)
)";

// Job offer example: the commonality between alice and bob is implicit.
inline const char* kOffer = R"(# job offer example
SubClassOf(Prof Qualified)
SubClassOf(and(Qualified Nominee) Offered)
ClassAssertion(Prof alice)
ClassAssertion(Nominee alice)
ClassAssertion(Qualified bob)
)";

inline elbx::KnowledgeBase running() { return elbx::parse_kb(kRunning); }
inline elbx::KnowledgeBase running_prime() { return elbx::parse_kb(kRunningPrime); }
inline elbx::KnowledgeBase offer() { return elbx::parse_kb(kOffer); }

inline elbx::Ind ind(const elbx::KnowledgeBase& kb, const std::string& name) {
    return elbx::Ind::named(const_cast<elbx::KnowledgeBase&>(kb).vocab_mut().individual_name(name));
}

inline elbx::Assertion cls(const elbx::KnowledgeBase& kb, const std::string& c, const std::string& a) {
    auto& voc = const_cast<elbx::KnowledgeBase&>(kb).vocab_mut();
    return elbx::Assertion::clazz(voc.concept_name(c), elbx::Ind::named(voc.individual_name(a)));
}

inline elbx::Assertion rel(const elbx::KnowledgeBase& kb, const std::string& r, const std::string& a,
                           const std::string& b) {
    auto& voc = const_cast<elbx::KnowledgeBase&>(kb).vocab_mut();
    return elbx::Assertion::rel(voc.role_name(r), elbx::Ind::named(voc.individual_name(a)),
                                elbx::Ind::named(voc.individual_name(b)));
}

inline elbx::Concept con(const elbx::KnowledgeBase& kb, const std::string& text) {
    return elbx::parse_concept(text, const_cast<elbx::KnowledgeBase&>(kb).vocab_mut());
}

} // namespace fixtures
