#pragma once

#include <algorithm>
#include <cassert>
#include <memory>
#include <vector>

#include "elbx/symbols.hpp"

namespace elbx {

// EL-bottom concept AST. Instances are canonical by construction:
// conjunctions are flattened, sorted, deduplicated, absorb Top and collapse
// to Bottom, so structural equality is logical-syntactic equality.
class Concept {
public:
    enum class Kind : uint8_t { Top, Bottom, Atomic, Conjunction, Existential };

    Concept() : kind_(Kind::Top) {}

    static Concept top() { return Concept(); }

    static Concept bottom() {
        Concept c;
        c.kind_ = Kind::Bottom;
        return c;
    }

    static Concept atomic(ConceptId name) {
        Concept c;
        c.kind_ = Kind::Atomic;
        c.name_ = name;
        return c;
    }

    static Concept exists(RoleId role, Concept filler) {
        Concept c;
        c.kind_ = Kind::Existential;
        c.role_ = role;
        c.children_ = std::make_shared<std::vector<Concept>>();
        c.children_->push_back(std::move(filler));
        return c;
    }

    // Canonicalizing conjunction constructor.
    static Concept conjunction(std::vector<Concept> parts) {
        std::vector<Concept> flat;
        for (auto& p : parts) {
            if (p.kind_ == Kind::Conjunction) {
                for (const auto& q : *p.children_) flat.push_back(q);
            } else if (p.kind_ == Kind::Top) {
                continue;
            } else if (p.kind_ == Kind::Bottom) {
                return bottom();
            } else {
                flat.push_back(std::move(p));
            }
        }
        std::sort(flat.begin(), flat.end());
        flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
        if (flat.empty()) return top();
        if (flat.size() == 1) return flat[0];
        Concept c;
        c.kind_ = Kind::Conjunction;
        c.children_ = std::make_shared<std::vector<Concept>>(std::move(flat));
        return c;
    }

    Kind kind() const { return kind_; }
    ConceptId name() const { assert(kind_ == Kind::Atomic); return name_; }
    RoleId role() const { assert(kind_ == Kind::Existential); return role_; }
    const Concept& filler() const { assert(kind_ == Kind::Existential); return (*children_)[0]; }
    const std::vector<Concept>& conjuncts() const {
        assert(kind_ == Kind::Conjunction);
        return *children_;
    }

    bool is_top() const { return kind_ == Kind::Top; }
    bool is_bottom() const { return kind_ == Kind::Bottom; }

    // Canonical order: (kind rank, name id, role id, children).
    friend bool operator<(const Concept& a, const Concept& b) { return a.compare(b) < 0; }
    friend bool operator==(const Concept& a, const Concept& b) { return a.compare(b) == 0; }
    friend bool operator!=(const Concept& a, const Concept& b) { return a.compare(b) != 0; }

    int compare(const Concept& o) const {
        if (kind_ != o.kind_) return kind_ < o.kind_ ? -1 : 1;
        switch (kind_) {
        case Kind::Top:
        case Kind::Bottom:
            return 0;
        case Kind::Atomic:
            if (name_ == o.name_) return 0;
            return name_ < o.name_ ? -1 : 1;
        case Kind::Existential: {
            if (role_ != o.role_) return role_ < o.role_ ? -1 : 1;
            return filler().compare(o.filler());
        }
        case Kind::Conjunction: {
            const auto& xs = *children_;
            const auto& ys = *o.children_;
            size_t n = std::min(xs.size(), ys.size());
            for (size_t i = 0; i < n; ++i) {
                int c = xs[i].compare(ys[i]);
                if (c != 0) return c;
            }
            if (xs.size() == ys.size()) return 0;
            return xs.size() < ys.size() ? -1 : 1;
        }
        }
        return 0;
    }

private:
    Kind kind_;
    ConceptId name_{};
    RoleId role_{};
    std::shared_ptr<std::vector<Concept>> children_;
};

// Tree size: size(Top) = size(Bottom) = size(A) = 1, size(exists r.C) =
// 1 + size(C), size(C and D) = size(C) + size(D).
inline int concept_size(const Concept& c) {
    switch (c.kind()) {
    case Concept::Kind::Top:
    case Concept::Kind::Bottom:
    case Concept::Kind::Atomic:
        return 1;
    case Concept::Kind::Existential:
        return 1 + concept_size(c.filler());
    case Concept::Kind::Conjunction: {
        int s = 0;
        for (const auto& d : c.conjuncts()) s += concept_size(d);
        return s;
    }
    }
    return 1;
}

template <typename ConceptFn, typename RoleFn>
inline void visit_signature(const Concept& c, ConceptFn&& on_concept, RoleFn&& on_role) {
    switch (c.kind()) {
    case Concept::Kind::Top:
    case Concept::Kind::Bottom:
        return;
    case Concept::Kind::Atomic:
        on_concept(c.name());
        return;
    case Concept::Kind::Existential:
        on_role(c.role());
        visit_signature(c.filler(), on_concept, on_role);
        return;
    case Concept::Kind::Conjunction:
        for (const auto& d : c.conjuncts()) visit_signature(d, on_concept, on_role);
        return;
    }
}

} // namespace elbx
