#pragma once

#include <chrono>
#include <map>
#include <span>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "elbx/kb.hpp"

namespace elbx {

// Cooperative deadline for long-running reasoning sweeps.
struct Deadline {
    std::chrono::steady_clock::time_point at;

    static Deadline in_seconds(double s) {
        return Deadline{std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(s))};
    }

    bool expired() const { return std::chrono::steady_clock::now() >= at; }
};

inline void check_deadline(const Deadline* d) {
    if (d && d->expired()) throw TimeoutError();
}

// TBox in EL-bottom normal form. Internal concept ids: 0 = Top, 1 = Bottom,
// 2 + k for the vocabulary concept with id k, higher ids for names
// introduced by normalization. Every introduced name is defined exactly
// once; the rewriting is a conservative extension of the input TBox.
class NormalizedTBox {
public:
    static constexpr int kTop = 0;
    static constexpr int kBottom = 1;

    NormalizedTBox(const Vocabulary& voc, const std::vector<Gci>& tbox,
                   const std::vector<Concept>& query_concepts = {}) {
        n_names_ = 2 + static_cast<int>(voc.concept_count());
        for (const auto& g : tbox) norm(g.lhs, g.rhs);
        query_ids_.reserve(query_concepts.size());
        for (const auto& q : query_concepts) {
            // Query concept C becomes a defined name via C ⊑ qid.
            int qid = fresh(q);
            add_lhs(q, qid);
            query_ids_.push_back(qid);
        }
        build_indexes();
    }

    int internal(ConceptId c) const { return 2 + static_cast<int>(c.value); }
    int names() const { return n_names_; }
    int query_id(size_t i) const { return query_ids_[i]; }
    size_t query_count() const { return query_ids_.size(); }

    const std::vector<std::pair<int, Concept>>& fresh_defs() const { return fresh_defs_; }

    // Normal-form rule sets.
    std::vector<std::vector<int>> sub1;                      // [x] -> rhs list (x subsumed-by rhs)
    std::vector<std::vector<std::pair<int, int>>> sub2;      // [x] -> (other, rhs)
    std::vector<std::vector<std::pair<int, int>>> exR;       // [x] -> (role, filler)
    std::map<std::pair<int, int>, std::vector<int>> exL;     // (role, filler) -> rhs list

private:
    friend class TboxSaturation;

    int fresh(const Concept& def) {
        int id = n_names_++;
        fresh_defs_.emplace_back(id, def);
        return id;
    }

    bool name_like(const Concept& c) const {
        return c.kind() == Concept::Kind::Top || c.kind() == Concept::Kind::Bottom ||
               c.kind() == Concept::Kind::Atomic;
    }

    int as_name(const Concept& c) const {
        switch (c.kind()) {
        case Concept::Kind::Top: return kTop;
        case Concept::Kind::Bottom: return kBottom;
        case Concept::Kind::Atomic: return internal(c.name());
        default: return -1;
        }
    }

    // Encodes complex C for use on a left-hand side: fresh B with C ⊑ B.
    int lhs_name(const Concept& c) {
        if (name_like(c)) return as_name(c);
        int b = fresh(c);
        add_lhs(c, b);
        return b;
    }

    // Adds C ⊑ rhs-name for arbitrary EL-bottom C.
    void add_lhs(const Concept& c, int rhs) {
        switch (c.kind()) {
        case Concept::Kind::Top:
        case Concept::Kind::Bottom:
        case Concept::Kind::Atomic:
            raw_sub1_.emplace_back(as_name(c), rhs);
            return;
        case Concept::Kind::Existential: {
            int filler = lhs_name(c.filler());
            raw_exL_.emplace_back(static_cast<int>(c.role().value), filler, rhs);
            return;
        }
        case Concept::Kind::Conjunction: {
            std::vector<int> parts;
            for (const auto& d : c.conjuncts()) parts.push_back(lhs_name(d));
            int acc = parts[0];
            for (size_t i = 1; i + 1 < parts.size(); ++i) {
                int next = fresh(Concept());
                raw_sub2_.emplace_back(acc, parts[i], next);
                acc = next;
            }
            raw_sub2_.emplace_back(acc, parts.back(), rhs);
            return;
        }
        }
    }

    // Adds name ⊑ D for arbitrary EL-bottom D.
    void add_rhs(int lhs, const Concept& d) {
        switch (d.kind()) {
        case Concept::Kind::Top:
            return; // vacuous
        case Concept::Kind::Bottom:
        case Concept::Kind::Atomic:
            raw_sub1_.emplace_back(lhs, as_name(d));
            return;
        case Concept::Kind::Existential: {
            int filler;
            if (name_like(d.filler())) {
                filler = as_name(d.filler());
            } else {
                filler = fresh(d.filler());
                add_rhs(filler, d.filler());
            }
            raw_exR_.emplace_back(lhs, static_cast<int>(d.role().value), filler);
            return;
        }
        case Concept::Kind::Conjunction:
            for (const auto& e : d.conjuncts()) add_rhs(lhs, e);
            return;
        }
    }

    void norm(const Concept& c, const Concept& d) {
        if (c.is_bottom()) return; // vacuous
        if (d.is_top()) return;    // vacuous
        if (name_like(c)) {
            add_rhs(as_name(c), d);
        } else if (name_like(d)) {
            add_lhs(c, as_name(d));
        } else {
            int mid = lhs_name(c);
            add_rhs(mid, d);
        }
    }

    void build_indexes() {
        sub1.assign(n_names_, {});
        sub2.assign(n_names_, {});
        exR.assign(n_names_, {});
        for (auto [x, y] : raw_sub1_) sub1[x].push_back(y);
        for (auto [x, y, z] : raw_sub2_) {
            sub2[x].emplace_back(y, z);
            if (x != y) sub2[y].emplace_back(x, z);
        }
        for (auto [x, r, b] : raw_exR_) exR[x].emplace_back(r, b);
        for (auto [r, f, z] : raw_exL_) exL[{r, f}].push_back(z);
    }

    int n_names_;
    std::vector<std::pair<int, Concept>> fresh_defs_;
    std::vector<int> query_ids_;
    std::vector<std::pair<int, int>> raw_sub1_;
    std::vector<std::tuple<int, int, int>> raw_sub2_;
    std::vector<std::tuple<int, int, int>> raw_exR_;
    std::vector<std::tuple<int, int, int>> raw_exL_;
};

// Fixpoint of the completion rules over concept names (the classification
// part, independent of any ABox).
class TboxSaturation {
public:
    explicit TboxSaturation(const NormalizedTBox& nt) : nt_(nt) {
        int n = nt.names();
        member_.assign(n, std::vector<bool>(n, false));
        subsumers_.assign(n, {});
        links_by_target_.assign(n, {});
        for (int a = 0; a < n; ++a) {
            push(a, a);
            push(a, NormalizedTBox::kTop);
        }
        run();
    }

    bool subsumed(int a, int b) const { return member_[a][b]; }
    const std::vector<int>& subsumers(int a) const { return subsumers_[a]; }
    bool unsat(int a) const { return member_[a][NormalizedTBox::kBottom]; }

private:
    void push(int ctx, int name) {
        if (member_[ctx][name]) return;
        member_[ctx][name] = true;
        subsumers_[ctx].push_back(name);
        queue_.emplace_back(ctx, name);
    }

    void add_link(int a, int r, int b) {
        auto key = std::tuple<int, int, int>(a, r, b);
        if (!links_seen_.insert(key).second) return;
        links_by_target_[b].emplace_back(a, r);
        // snapshot: fire_link may extend subsumers_[b] when a == b; members
        // added later fire through the queue once they are processed
        std::vector<int> present = subsumers_[b];
        for (int y : present) fire_link(a, r, y);
        if (member_[b][NormalizedTBox::kBottom]) push(a, NormalizedTBox::kBottom);
    }

    void fire_link(int a, int r, int y) {
        auto it = nt_.exL.find({r, y});
        if (it != nt_.exL.end())
            for (int rhs : it->second) push(a, rhs);
        if (y == NormalizedTBox::kBottom) push(a, NormalizedTBox::kBottom);
    }

    void run() {
        while (!queue_.empty()) {
            auto [ctx, x] = queue_.back();
            queue_.pop_back();
            for (int rhs : nt_.sub1[x]) push(ctx, rhs);
            for (auto [other, rhs] : nt_.sub2[x])
                if (member_[ctx][other]) push(ctx, rhs);
            for (auto [r, b] : nt_.exR[x]) add_link(ctx, r, b);
            for (auto [a, r] : links_by_target_[ctx]) fire_link(a, r, x);
        }
    }

    const NormalizedTBox& nt_;
    std::vector<std::vector<bool>> member_;
    std::vector<std::vector<int>> subsumers_;
    std::vector<std::vector<std::pair<int, int>>> links_by_target_;
    std::set<std::tuple<int, int, int>> links_seen_;
    std::vector<std::pair<int, int>> queue_;
};

// Entailment oracle for a fixed TBox (plus optional query concepts) and a
// varying ABox. The TBox is normalized and classified once; every call
// saturates only the individual contexts of the given assertions.
class EntailmentOracle {
public:
    using Spans = std::vector<std::span<const Assertion>>;

    EntailmentOracle(const KnowledgeBase& kb, std::vector<Concept> queries = {})
        : nt_(kb.vocab(), kb.tbox(), queries), sat_(nt_) {}

    const NormalizedTBox& normalized() const { return nt_; }
    const TboxSaturation& classification() const { return sat_; }

    bool inconsistent(const Spans& abox, const Deadline* dl = nullptr) const {
        Run run(*this, abox, dl);
        return run.inconsistent;
    }

    // T ∪ abox ⊨ q(a) for the i-th query concept.
    bool instance(size_t query_index, Ind a, const Spans& abox, const Deadline* dl = nullptr) const {
        Run run(*this, abox, dl);
        if (run.inconsistent) return true;
        return run.has(a, nt_.query_id(query_index));
    }

    // T ∪ abox ⊨ A(a) for a concept name.
    bool instance_name(ConceptId c, Ind a, const Spans& abox, const Deadline* dl = nullptr) const {
        Run run(*this, abox, dl);
        if (run.inconsistent) return true;
        return run.has(a, nt_.internal(c));
    }

    // Role assertions have no derivation rules in EL-bottom: entailed iff
    // asserted or the KB is inconsistent.
    bool role_entailed(RoleId r, Ind s, Ind o, const Spans& abox, const Deadline* dl = nullptr) const {
        Assertion want = Assertion::rel(r, s, o);
        for (const auto& sp : abox)
            for (const auto& x : sp)
                if (x == want) return true;
        return inconsistent(abox, dl);
    }

    bool assertion_entailed(const Assertion& a, const Spans& abox, const Deadline* dl = nullptr) const {
        if (a.kind == Assertion::Kind::Class) return instance_name(a.cls, a.subject, abox, dl);
        return role_entailed(a.role, a.subject, a.object, abox, dl);
    }

    // Derived concept-name memberships of every individual in the ABox.
    // Returns pairs (individual, internal name id); skips Top.
    std::vector<std::pair<Ind, int>> derived_members(const Spans& abox, bool* inconsistent,
                                                     const Deadline* dl = nullptr) const {
        Run run(*this, abox, dl);
        *inconsistent = run.inconsistent;
        std::vector<std::pair<Ind, int>> out;
        for (size_t i = 0; i < run.inds.size(); ++i)
            for (int x : run.members_of(i))
                if (x != NormalizedTBox::kTop) out.emplace_back(run.inds[i], x);
        return out;
    }

private:
    struct Run {
        const EntailmentOracle& o;
        std::vector<Ind> inds;
        std::unordered_map<Ind, int, IndHash> index;
        std::vector<std::vector<bool>> member;
        std::vector<std::vector<int>> added;
        std::vector<std::vector<std::pair<int, int>>> in_edges;  // [obj] -> (subj, role)
        std::vector<std::vector<std::pair<int, int>>> out_edges; // [subj] -> (role, obj)
        std::vector<std::pair<int, int>> queue;
        bool inconsistent = false;

        Run(const EntailmentOracle& oracle, const Spans& abox, const Deadline* dl) : o(oracle) {
            size_t steps = 0;
            auto ctx = [&](Ind a) {
                auto it = index.find(a);
                if (it != index.end()) return it->second;
                int i = static_cast<int>(inds.size());
                index.emplace(a, i);
                inds.push_back(a);
                member.emplace_back(o.nt_.names(), false);
                added.emplace_back();
                in_edges.emplace_back();
                out_edges.emplace_back();
                push(i, NormalizedTBox::kTop);
                return i;
            };
            for (const auto& sp : abox) {
                for (const auto& x : sp) {
                    if (x.kind == Assertion::Kind::Class) {
                        push(ctx(x.subject), o.nt_.internal(x.cls));
                    } else {
                        int s = ctx(x.subject), t = ctx(x.object);
                        out_edges[s].emplace_back(static_cast<int>(x.role.value), t);
                        in_edges[t].emplace_back(s, static_cast<int>(x.role.value));
                    }
                }
            }
            // All seeds are still queued here, so every queue entry is
            // processed with the complete edge relation in place.
            while (!queue.empty()) {
                if (((++steps) & 0x3ff) == 0) check_deadline(dl);
                auto [i, x] = queue.back();
                queue.pop_back();
                for (int rhs : o.nt_.sub1[x]) push(i, rhs);
                for (auto [other, rhs] : o.nt_.sub2[x])
                    if (member[i][other]) push(i, rhs);
                for (auto [r, b] : o.nt_.exR[x]) {
                    // anonymous successor of type b
                    for (int y : o.sat_.subsumers(b)) {
                        auto it = o.nt_.exL.find({r, y});
                        if (it != o.nt_.exL.end())
                            for (int rhs : it->second) push(i, rhs);
                    }
                    if (o.sat_.unsat(b)) push(i, NormalizedTBox::kBottom);
                }
                for (auto [s, r] : in_edges[i]) fire_edge(s, r, x);
                if (x == NormalizedTBox::kBottom) {
                    inconsistent = true;
                    for (auto [s, r] : in_edges[i]) push(s, NormalizedTBox::kBottom);
                }
            }
            // An unsatisfiable Top makes even the empty ABox inconsistent.
            if (o.sat_.unsat(NormalizedTBox::kTop)) inconsistent = true;
        }

        void fire_edge(int s, int r, int y) {
            auto it = o.nt_.exL.find({r, y});
            if (it != o.nt_.exL.end())
                for (int rhs : it->second) push(s, rhs);
            if (y == NormalizedTBox::kBottom) push(s, NormalizedTBox::kBottom);
        }

        void push(int i, int name) {
            if (member[i][name]) return;
            member[i][name] = true;
            added[i].push_back(name);
            queue.emplace_back(i, name);
        }

        bool has(Ind a, int name) const {
            auto it = index.find(a);
            // An individual without assertions behaves like the closure of
            // Top alone.
            if (it == index.end()) return o.sat_.subsumed(NormalizedTBox::kTop, name);
            return member[it->second][name];
        }

        const std::vector<int>& members_of(size_t i) const { return added[i]; }
    };

    NormalizedTBox nt_;
    TboxSaturation sat_;
};

// Snapshot of a saturation over the original signature.
struct SaturationState {
    std::vector<std::pair<ConceptId, ConceptId>> subsumptions;       // A strictly-subsumed-by B
    std::vector<std::tuple<ConceptId, RoleId, ConceptId>> links;     // A ⊑ ∃r.B over names
    std::vector<std::pair<Ind, ConceptId>> instance_concepts;
    std::vector<std::tuple<RoleId, Ind, Ind>> instance_roles;        // asserted role facts
    bool inconsistent = false;

    friend bool operator==(const SaturationState& a, const SaturationState& b) {
        return a.subsumptions == b.subsumptions && a.links == b.links &&
               a.instance_concepts == b.instance_concepts && a.instance_roles == b.instance_roles &&
               a.inconsistent == b.inconsistent;
    }
};

inline SaturationState saturate(const KnowledgeBase& kb) {
    EntailmentOracle oracle(kb);
    SaturationState st;
    const auto& nt = oracle.normalized();
    const auto& cls = oracle.classification();
    int n_orig = static_cast<int>(kb.vocab().concept_count());
    for (int a = 0; a < n_orig; ++a)
        for (int x : cls.subsumers(nt.internal(ConceptId{static_cast<uint32_t>(a)})))
            if (x >= 2 && x < 2 + n_orig && x != nt.internal(ConceptId{static_cast<uint32_t>(a)}))
                st.subsumptions.emplace_back(ConceptId{static_cast<uint32_t>(a)},
                                             ConceptId{static_cast<uint32_t>(x - 2)});
    // Links over original names, recovered from the exR rules: A ⊑ ∃r.B is
    // derivable iff some X in subsumers(A) has an exR rule to a filler whose
    // subsumers include B. Exposed only for names mentioned in such rules.
    for (int a = 0; a < n_orig; ++a) {
        int ia = nt.internal(ConceptId{static_cast<uint32_t>(a)});
        std::set<std::pair<int, int>> seen;
        for (int x : cls.subsumers(ia))
            for (auto [r, b] : nt.exR[x])
                for (int y : cls.subsumers(b))
                    if (y >= 2 && y < 2 + n_orig && seen.insert({r, y}).second)
                        st.links.emplace_back(ConceptId{static_cast<uint32_t>(a)},
                                              RoleId{static_cast<uint32_t>(r)},
                                              ConceptId{static_cast<uint32_t>(y - 2)});
    }
    bool incons = false;
    auto members = oracle.derived_members({std::span<const Assertion>(kb.abox())}, &incons);
    st.inconsistent = incons;
    for (auto [ind, x] : members)
        if (x >= 2 && x < 2 + n_orig)
            st.instance_concepts.emplace_back(ind, ConceptId{static_cast<uint32_t>(x - 2)});
    for (const auto& a : kb.abox())
        if (a.kind == Assertion::Kind::Role) st.instance_roles.emplace_back(a.role, a.subject, a.object);
    std::sort(st.subsumptions.begin(), st.subsumptions.end());
    std::sort(st.links.begin(), st.links.end());
    std::sort(st.instance_concepts.begin(), st.instance_concepts.end(),
              [](const auto& x, const auto& y) {
                  return std::tie(x.first.bits, x.second.value) < std::tie(y.first.bits, y.second.value);
              });
    std::sort(st.instance_roles.begin(), st.instance_roles.end(),
              [](const auto& x, const auto& y) {
                  return std::tie(std::get<0>(x).value, std::get<1>(x).bits, std::get<2>(x).bits) <
                         std::tie(std::get<0>(y).value, std::get<1>(y).bits, std::get<2>(y).bits);
              });
    return st;
}

inline bool entails_assertion(const KnowledgeBase& kb, const Assertion& a) {
    EntailmentOracle oracle(kb);
    return oracle.assertion_entailed(a, {std::span<const Assertion>(kb.abox())});
}

inline bool instance_check(const KnowledgeBase& kb, const Concept& c, Ind a) {
    EntailmentOracle oracle(kb, {c});
    return oracle.instance(0, a, {std::span<const Assertion>(kb.abox())});
}

// The extended ABox of Lemma-style materialization: all entailed concept
// assertions over names and individuals occurring in the input, plus all
// (asserted) role facts. Entailed assertions over names outside the input
// signature do not exist in EL-bottom, so no wider signature is needed.
inline std::vector<Assertion> materialize(const KnowledgeBase& kb) {
    EntailmentOracle oracle(kb);
    bool incons = false;
    auto members = oracle.derived_members({std::span<const Assertion>(kb.abox())}, &incons);
    if (incons) throw InconsistentKbError();
    int n_orig = static_cast<int>(kb.vocab().concept_count());
    std::vector<Assertion> out = kb.abox();
    for (auto [ind, x] : members)
        if (x >= 2 && x < 2 + n_orig)
            out.push_back(Assertion::clazz(ConceptId{static_cast<uint32_t>(x - 2)}, ind));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline KnowledgeBase materialize_kb(const KnowledgeBase& kb) {
    return kb.with_abox(materialize(kb));
}

} // namespace elbx
