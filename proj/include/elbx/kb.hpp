#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "elbx/concepts.hpp"
#include "elbx/errors.hpp"
#include "elbx/symbols.hpp"

namespace elbx {

struct Gci {
    Concept lhs;
    Concept rhs;

    friend bool operator==(const Gci& a, const Gci& b) { return a.lhs == b.lhs && a.rhs == b.rhs; }
    friend bool operator<(const Gci& a, const Gci& b) {
        int c = a.lhs.compare(b.lhs);
        if (c != 0) return c < 0;
        return a.rhs.compare(b.rhs) < 0;
    }
};

// An ABox assertion: A(a) or r(a,b). Concept assertions use concept names
// only. Individuals may be fresh (for in-memory explanation ABoxes); such
// assertions cannot be serialized.
struct Assertion {
    enum class Kind : uint8_t { Class, Role };

    Kind kind = Kind::Class;
    ConceptId cls{};
    RoleId role{};
    Ind subject{};
    Ind object{};

    static Assertion clazz(ConceptId c, Ind a) {
        Assertion x;
        x.kind = Kind::Class;
        x.cls = c;
        x.subject = a;
        return x;
    }

    static Assertion rel(RoleId r, Ind a, Ind b) {
        Assertion x;
        x.kind = Kind::Role;
        x.role = r;
        x.subject = a;
        x.object = b;
        return x;
    }

    friend bool operator==(const Assertion& a, const Assertion& b) {
        if (a.kind != b.kind || a.subject != b.subject) return false;
        if (a.kind == Kind::Class) return a.cls == b.cls;
        return a.role == b.role && a.object == b.object;
    }
    friend bool operator!=(const Assertion& a, const Assertion& b) { return !(a == b); }

    // Id-based order, used for set representations.
    friend bool operator<(const Assertion& a, const Assertion& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        if (a.kind == Kind::Class) {
            if (a.cls != b.cls) return a.cls < b.cls;
            return a.subject.bits < b.subject.bits;
        }
        if (a.role != b.role) return a.role < b.role;
        if (a.subject != b.subject) return a.subject.bits < b.subject.bits;
        return a.object.bits < b.object.bits;
    }
};

struct AssertionHash {
    size_t operator()(const Assertion& a) const {
        size_t h = a.kind == Assertion::Kind::Class ? a.cls.value : (a.role.value | 0x40000000u);
        h = h * 1000003u + a.subject.bits;
        h = h * 1000003u + a.object.bits;
        return h;
    }
};

using Axiom = std::variant<Gci, Assertion>;

inline bool axiom_less(const Axiom& a, const Axiom& b) {
    if (a.index() != b.index()) return a.index() < b.index();
    if (a.index() == 0) return std::get<Gci>(a) < std::get<Gci>(b);
    return std::get<Assertion>(a) < std::get<Assertion>(b);
}

struct Signature {
    std::set<ConceptId> concepts;
    std::set<RoleId> roles;
    std::set<IndId> individuals;
};

class KnowledgeBase {
public:
    KnowledgeBase() : vocab_(std::make_shared<Vocabulary>()) {}
    explicit KnowledgeBase(std::shared_ptr<Vocabulary> vocab) : vocab_(std::move(vocab)) {}

    const Vocabulary& vocab() const { return *vocab_; }
    Vocabulary& vocab_mut() { return *vocab_; }
    const std::shared_ptr<Vocabulary>& vocab_ptr() const { return vocab_; }

    const std::vector<Gci>& tbox() const { return tbox_; }
    const std::vector<Assertion>& abox() const { return abox_; }

    void add(Gci g) {
        auto it = std::lower_bound(tbox_.begin(), tbox_.end(), g);
        if (it == tbox_.end() || !(*it == g)) tbox_.insert(it, std::move(g));
    }

    void add(Assertion a) {
        auto it = std::lower_bound(abox_.begin(), abox_.end(), a);
        if (it == abox_.end() || !(*it == a)) abox_.insert(it, a);
    }

    bool has_assertion(const Assertion& a) const {
        return std::binary_search(abox_.begin(), abox_.end(), a);
    }

    KnowledgeBase with_abox(std::vector<Assertion> abox) const {
        KnowledgeBase kb(vocab_);
        kb.tbox_ = tbox_;
        std::sort(abox.begin(), abox.end());
        abox.erase(std::unique(abox.begin(), abox.end()), abox.end());
        kb.abox_ = std::move(abox);
        return kb;
    }

    // Names actually occurring in axioms.
    Signature signature() const {
        Signature sig;
        auto on_c = [&](ConceptId c) { sig.concepts.insert(c); };
        auto on_r = [&](RoleId r) { sig.roles.insert(r); };
        for (const auto& g : tbox_) {
            visit_signature(g.lhs, on_c, on_r);
            visit_signature(g.rhs, on_c, on_r);
        }
        for (const auto& a : abox_) {
            if (a.kind == Assertion::Kind::Class) {
                sig.concepts.insert(a.cls);
                if (!a.subject.is_fresh()) sig.individuals.insert(a.subject.id());
            } else {
                sig.roles.insert(a.role);
                if (!a.subject.is_fresh()) sig.individuals.insert(a.subject.id());
                if (!a.object.is_fresh()) sig.individuals.insert(a.object.id());
            }
        }
        return sig;
    }

    // Individuals of the ABox, in vocabulary text order (fresh ones last).
    std::vector<Ind> abox_individuals() const {
        std::vector<Ind> out;
        auto push = [&](Ind x) {
            if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
        };
        for (const auto& a : abox_) {
            push(a.subject);
            if (a.kind == Assertion::Kind::Role) push(a.object);
        }
        std::sort(out.begin(), out.end(), [&](Ind x, Ind y) { return ind_less(*vocab_, x, y); });
        return out;
    }

    std::vector<Axiom> axioms() const {
        std::vector<Axiom> out;
        out.reserve(tbox_.size() + abox_.size());
        for (const auto& g : tbox_) out.emplace_back(g);
        for (const auto& a : abox_) out.emplace_back(a);
        return out;
    }

    std::string render(const Assertion& a) const {
        if (a.kind == Assertion::Kind::Class)
            return vocab_->text(a.cls) + "(" + vocab_->text(a.subject) + ")";
        return vocab_->text(a.role) + "(" + vocab_->text(a.subject) + "," + vocab_->text(a.object) + ")";
    }

private:
    std::shared_ptr<Vocabulary> vocab_;
    std::vector<Gci> tbox_;      // sorted, unique
    std::vector<Assertion> abox_; // sorted, unique
};

// Text-based canonical order for assertions of one KB: class atoms first,
// then by name text, then by argument text. Stable across interning order.
struct AssertionTextLess {
    const Vocabulary* voc;

    bool operator()(const Assertion& a, const Assertion& b) const {
        if (a.kind != b.kind) return a.kind < b.kind;
        const std::string& na = a.kind == Assertion::Kind::Class ? voc->text(a.cls) : voc->text(a.role);
        const std::string& nb = b.kind == Assertion::Kind::Class ? voc->text(b.cls) : voc->text(b.role);
        if (na != nb) return na < nb;
        if (a.subject != b.subject) return ind_less(*voc, a.subject, b.subject);
        if (a.kind == Assertion::Kind::Role && a.object != b.object)
            return ind_less(*voc, a.object, b.object);
        return false;
    }
};

// Removal order used by the minimization steps of explanation generation:
// role atoms first, later names first, arguments in canonical order. The
// order decides which of several minimal sets survives, so it is part of the
// deterministic contract of the generator.
struct RemovalOrderLess {
    const Vocabulary* voc;

    bool operator()(const Assertion& a, const Assertion& b) const {
        if (a.kind != b.kind) return a.kind == Assertion::Kind::Role;
        const std::string& na = a.kind == Assertion::Kind::Class ? voc->text(a.cls) : voc->text(a.role);
        const std::string& nb = b.kind == Assertion::Kind::Class ? voc->text(b.cls) : voc->text(b.role);
        if (na != nb) return na > nb;
        if (a.subject != b.subject) return ind_less(*voc, a.subject, b.subject);
        if (a.kind == Assertion::Kind::Role && a.object != b.object)
            return ind_less(*voc, a.object, b.object);
        return false;
    }
};

// Structural KB equality through name texts, independent of interning order.
inline bool kb_equal(const KnowledgeBase& a, const KnowledgeBase& b) {
    if (a.tbox().size() != b.tbox().size() || a.abox().size() != b.abox().size()) return false;

    auto concept_text = [](const Vocabulary& voc, const Concept& c) {
        std::string out;
        auto rec = [&](auto&& self, const Concept& x) -> void {
            switch (x.kind()) {
            case Concept::Kind::Top: out += "T"; return;
            case Concept::Kind::Bottom: out += "B"; return;
            case Concept::Kind::Atomic: out += "a[" + voc.text(x.name()) + "]"; return;
            case Concept::Kind::Existential:
                out += "e[" + voc.text(x.role()) + "](";
                self(self, x.filler());
                out += ")";
                return;
            case Concept::Kind::Conjunction: {
                // Children are sorted by interned id, which differs between
                // vocabularies; compare as a sorted bag of renderings.
                std::vector<std::string> parts;
                for (const auto& d : x.conjuncts()) {
                    std::string save;
                    std::swap(save, out);
                    self(self, d);
                    std::swap(save, out);
                    parts.push_back(std::move(save));
                }
                std::sort(parts.begin(), parts.end());
                out += "c(";
                for (const auto& p : parts) out += p + " ";
                out += ")";
                return;
            }
            }
        };
        rec(rec, c);
        return out;
    };

    auto dump = [&](const KnowledgeBase& kb) {
        std::vector<std::string> lines;
        for (const auto& g : kb.tbox())
            lines.push_back(concept_text(kb.vocab(), g.lhs) + "<=" + concept_text(kb.vocab(), g.rhs));
        for (const auto& x : kb.abox()) lines.push_back("." + kb.render(x));
        std::sort(lines.begin(), lines.end());
        return lines;
    };
    return dump(a) == dump(b);
}

} // namespace elbx
