#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace elbx {

// Interned name ids. Distinct wrapper types keep concept, role and
// individual names from mixing up in signatures.
struct ConceptId {
    uint32_t value = 0;
    friend bool operator==(ConceptId a, ConceptId b) { return a.value == b.value; }
    friend bool operator!=(ConceptId a, ConceptId b) { return a.value != b.value; }
    friend bool operator<(ConceptId a, ConceptId b) { return a.value < b.value; }
};

struct RoleId {
    uint32_t value = 0;
    friend bool operator==(RoleId a, RoleId b) { return a.value == b.value; }
    friend bool operator!=(RoleId a, RoleId b) { return a.value != b.value; }
    friend bool operator<(RoleId a, RoleId b) { return a.value < b.value; }
};

struct IndId {
    uint32_t value = 0;
    friend bool operator==(IndId a, IndId b) { return a.value == b.value; }
    friend bool operator!=(IndId a, IndId b) { return a.value != b.value; }
    friend bool operator<(IndId a, IndId b) { return a.value < b.value; }
};

// An individual term: either a parsed (named) individual or a fresh one
// introduced by explanation generation. Fresh individuals live in their own
// number space and can never collide with parsed names.
struct Ind {
    static constexpr uint32_t kFreshBit = 0x80000000u;

    uint32_t bits = 0;

    static Ind named(IndId id) { return Ind{id.value}; }
    static Ind fresh(uint32_t index) { return Ind{kFreshBit | index}; }

    bool is_fresh() const { return (bits & kFreshBit) != 0; }
    IndId id() const { return IndId{bits & ~kFreshBit}; }
    uint32_t fresh_index() const { return bits & ~kFreshBit; }

    friend bool operator==(Ind a, Ind b) { return a.bits == b.bits; }
    friend bool operator!=(Ind a, Ind b) { return a.bits != b.bits; }
    friend bool operator<(Ind a, Ind b) { return a.bits < b.bits; }
};

struct IndHash {
    size_t operator()(Ind a) const { return std::hash<uint32_t>()(a.bits); }
};

// Append-only interning table, injective on source text. One writer during
// parsing; read-only afterwards.
class Interner {
public:
    uint32_t intern(std::string_view text) {
        auto it = index_.find(std::string(text));
        if (it != index_.end()) return it->second;
        uint32_t id = static_cast<uint32_t>(texts_.size());
        texts_.emplace_back(text);
        index_.emplace(texts_.back(), id);
        return id;
    }

    const std::string* find(std::string_view text) const {
        auto it = index_.find(std::string(text));
        if (it == index_.end()) return nullptr;
        return &texts_[it->second];
    }

    bool contains(std::string_view text) const { return index_.count(std::string(text)) != 0; }

    uint32_t lookup(std::string_view text) const { return index_.at(std::string(text)); }

    const std::string& text(uint32_t id) const { return texts_[id]; }
    size_t size() const { return texts_.size(); }

private:
    std::vector<std::string> texts_;
    std::unordered_map<std::string, uint32_t> index_;
};

// The three name spaces of a knowledge base.
class Vocabulary {
public:
    ConceptId concept_name(std::string_view t) { return ConceptId{concepts_.intern(t)}; }
    RoleId role_name(std::string_view t) { return RoleId{roles_.intern(t)}; }
    IndId individual_name(std::string_view t) { return IndId{individuals_.intern(t)}; }

    const std::string& text(ConceptId id) const { return concepts_.text(id.value); }
    const std::string& text(RoleId id) const { return roles_.text(id.value); }
    const std::string& text(IndId id) const { return individuals_.text(id.value); }

    std::string text(Ind a) const {
        if (a.is_fresh()) return "_fresh:" + std::to_string(a.fresh_index());
        return text(a.id());
    }

    size_t concept_count() const { return concepts_.size(); }
    size_t role_count() const { return roles_.size(); }
    size_t individual_count() const { return individuals_.size(); }

private:
    Interner concepts_;
    Interner roles_;
    Interner individuals_;
};

// Orders individuals with all named ones (by text) before all fresh ones.
inline bool ind_less(const Vocabulary& voc, Ind a, Ind b) {
    if (a.is_fresh() != b.is_fresh()) return b.is_fresh();
    if (a.is_fresh()) return a.fresh_index() < b.fresh_index();
    if (a.id() == b.id()) return false;
    return voc.text(a.id()) < voc.text(b.id());
}

} // namespace elbx
