#pragma once

#include <atomic>
#include <iomanip>
#include <sstream>
#include <thread>

#include "elbx/generate.hpp"
#include "elbx/rng.hpp"
#include "elbx/text_io.hpp"

namespace elbx {

struct CpSpec {
    Concept query;
    Ind fact{};
    Ind foil{};
};

// Random contrastive-problem generation: a random entailed concept built by
// a walk over the (materialization-aware) ABox, and a foil that shares a
// concept name or an outgoing role with the fact.
class CpGenerator {
public:
    explicit CpGenerator(const KnowledgeBase& kb) : kb_(kb), oracle_(kb) {
        bool incons = false;
        auto members =
            oracle_.derived_members({std::span<const Assertion>(kb.abox())}, &incons);
        if (incons) throw InconsistentKbError();
        int n_orig = static_cast<int>(kb.vocab().concept_count());
        for (auto [ind, x] : members)
            if (x >= 2 && x < 2 + n_orig)
                entailed_[ind].push_back(ConceptId{static_cast<uint32_t>(x - 2)});
        for (auto& [ind, names] : entailed_) std::sort(names.begin(), names.end());
        for (const auto& a : kb.abox())
            if (a.kind == Assertion::Kind::Role) successors_[a.subject].emplace_back(a.role, a.object);
        for (auto& [ind, succ] : successors_) std::sort(succ.begin(), succ.end());
        individuals_ = kb.abox_individuals();
    }

    // A random non-conjunction concept of size at most n entailed at c: Top,
    // an entailed concept name (all uniformly), or an existential through a
    // random asserted role edge.
    Concept ran_atom(Ind c, int n, RngStream& rng) const {
        const auto* succ = find(successors_, c);
        auto name_case = [&]() {
            const auto* names = find(entailed_, c);
            size_t m = names ? names->size() : 0;
            uint64_t pick = rng.below(m + 1);
            if (pick == 0) return Concept::top();
            return Concept::atomic((*names)[pick - 1]);
        };
        if (n <= 1 || !succ || succ->empty() || rng.coin()) return name_case();
        auto [role, target] = (*succ)[rng.below(succ->size())];
        return Concept::exists(role, ran_con(target, n - 1, rng));
    }

    // Conjunction loop: keep drawing atoms until the size budget is spent.
    Concept ran_con(Ind c, int n, RngStream& rng) const {
        Concept first = ran_atom(c, n, rng);
        int budget = n - concept_size(first);
        std::vector<Concept> parts{first};
        while (budget > 0) {
            Concept d = ran_atom(c, budget, rng);
            budget -= concept_size(d);
            parts.push_back(std::move(d));
        }
        return Concept::conjunction(std::move(parts));
    }

    std::optional<CpSpec> generate_cp(RngStream& rng, int max_size = 5, int retries = 100) const {
        if (individuals_.empty()) return std::nullopt;
        for (int attempt = 0; attempt < retries; ++attempt) {
            Ind fact = individuals_[rng.below(individuals_.size())];
            Concept query = ran_con(fact, max_size, rng);
            EntailmentOracle probe(kb_, {query});
            std::vector<Ind> foils;
            for (Ind b : individuals_) {
                if (b == fact) continue;
                if (probe.instance(0, b, {std::span<const Assertion>(kb_.abox())})) continue;
                if (shares_signature(fact, b)) foils.push_back(b);
            }
            if (!foils.empty()) return CpSpec{query, fact, foils[rng.below(foils.size())]};
        }
        return std::nullopt;
    }

    const std::vector<Ind>& individuals() const { return individuals_; }

private:
    template <typename M>
    static const typename M::mapped_type* find(const M& m, Ind k) {
        auto it = m.find(k);
        return it == m.end() ? nullptr : &it->second;
    }

    bool shares_signature(Ind a, Ind b) const {
        const auto* na = find(entailed_, a);
        const auto* nb = find(entailed_, b);
        if (na && nb)
            for (ConceptId c : *na)
                if (std::binary_search(nb->begin(), nb->end(), c)) return true;
        const auto* sa = find(successors_, a);
        const auto* sb = find(successors_, b);
        if (sa && sb)
            for (auto [r, x] : *sa)
                for (auto [r2, y] : *sb)
                    if (r == r2) return true;
        return false;
    }

    const KnowledgeBase& kb_;
    EntailmentOracle oracle_;
    std::unordered_map<Ind, std::vector<ConceptId>, IndHash> entailed_;
    std::unordered_map<Ind, std::vector<std::pair<RoleId, Ind>>, IndHash> successors_;
    std::vector<Ind> individuals_;
};

// Repeatedly drops assertions that the rest of the KB still entails, in
// canonical order, until the ABox is free of redundant assertions.
inline KnowledgeBase strip_entailed(const KnowledgeBase& kb) {
    EntailmentOracle oracle(kb);
    std::vector<Assertion> abox = kb.abox();
    std::sort(abox.begin(), abox.end(), AssertionTextLess{&kb.vocab()});
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < abox.size(); ++i) {
            if (abox[i].kind != Assertion::Kind::Class) continue; // roles are never derivable
            std::vector<Assertion> rest;
            for (size_t k = 0; k < abox.size(); ++k)
                if (k != i) rest.push_back(abox[k]);
            if (oracle.instance_name(abox[i].cls, abox[i].subject,
                                     {std::span<const Assertion>(rest)})) {
                abox = std::move(rest);
                changed = true;
                break;
            }
        }
    }
    return kb.with_abox(abox);
}

// Synthetic KB generation for benchmarks and test corpora.
struct RandomKbParams {
    int concepts = 6;
    int roles = 2;
    int individuals = 5;
    int gcis = 6;
    int assertions = 10;
    bool allow_bottom = false;
};

inline KnowledgeBase random_kb(const RandomKbParams& params, RngStream& rng) {
    KnowledgeBase kb;
    auto& voc = kb.vocab_mut();
    std::vector<ConceptId> cs;
    std::vector<RoleId> rs;
    std::vector<Ind> is;
    for (int i = 0; i < params.concepts; ++i) cs.push_back(voc.concept_name("C" + std::to_string(i)));
    for (int i = 0; i < params.roles; ++i) rs.push_back(voc.role_name("r" + std::to_string(i)));
    for (int i = 0; i < params.individuals; ++i)
        is.push_back(Ind::named(voc.individual_name("i" + std::to_string(i))));

    auto concept_at = [&] { return Concept::atomic(cs[rng.below(cs.size())]); };
    for (int g = 0; g < params.gcis; ++g) {
        Concept lhs, rhs;
        switch (rng.below(4)) {
        case 0: lhs = concept_at(); break;
        case 1: lhs = Concept::conjunction({concept_at(), concept_at()}); break;
        case 2: lhs = Concept::exists(rs[rng.below(rs.size())], concept_at()); break;
        default: lhs = Concept::conjunction({concept_at(), Concept::exists(rs[rng.below(rs.size())], concept_at())}); break;
        }
        if (params.allow_bottom && rng.below(8) == 0)
            rhs = Concept::bottom();
        else if (rng.below(4) == 0)
            rhs = Concept::exists(rs[rng.below(rs.size())], concept_at());
        else
            rhs = concept_at();
        kb.add(Gci{lhs, rhs});
    }
    for (int a = 0; a < params.assertions; ++a) {
        if (rng.below(100) < 60)
            kb.add(Assertion::clazz(cs[rng.below(cs.size())], is[rng.below(is.size())]));
        else
            kb.add(Assertion::rel(rs[rng.below(rs.size())], is[rng.below(is.size())],
                                  is[rng.below(is.size())]));
    }
    return kb;
}

inline KnowledgeBase random_consistent_kb(const RandomKbParams& params, RngStream& rng,
                                          int retries = 50) {
    for (int i = 0; i < retries; ++i) {
        KnowledgeBase kb = random_kb(params, rng);
        if (!saturate(kb).inconsistent) return kb;
    }
    throw Error("could not generate a consistent knowledge base");
}

struct BenchParams {
    int runs = 5;
    int cps_per_run = 10;
    double timeout_s = 600.0;
    uint64_t seed = 0;
    int jobs = 1;
    StructureMode mode = StructureMode::Refined;
};

struct BenchRecord {
    std::string kb_id;
    int run = 0;
    int cp = 0;
    bool generated = false; // a CP was found
    bool timeout = false;
    int commonality = 0;
    int difference = 0;
    int conflict = 0;
    int fresh = 0;
    double duration_s = 0;
};

struct BenchResult {
    std::vector<BenchRecord> records;
    std::string records_csv;
    std::string summary_csv;
};

namespace detail {

inline std::string format_duration(double s) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(3) << s;
    return o.str();
}

inline std::string format_avg(double s) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(2) << s;
    return o.str();
}

} // namespace detail

// A full sweep: runs × cps_per_run problems per KB, each generated and
// explained under a wall-clock deadline. Worker threads share nothing but
// the task counter; per-task randomness is split from (kb, run, cp), so the
// results do not depend on scheduling.
inline BenchResult run_bench(const std::vector<std::pair<std::string, KnowledgeBase>>& corpus,
                             const BenchParams& params) {
    struct Task {
        size_t kb_index;
        int run, cp;
    };
    std::vector<Task> tasks;
    for (size_t k = 0; k < corpus.size(); ++k)
        for (int r = 0; r < params.runs; ++r)
            for (int c = 0; c < params.cps_per_run; ++c) tasks.push_back({k, r, c});

    std::vector<CpGenerator> generators;
    generators.reserve(corpus.size());
    for (const auto& [id, kb] : corpus) generators.emplace_back(kb);

    std::vector<BenchRecord> records(tasks.size());
    std::atomic<size_t> cursor{0};
    RngStream root(params.seed);

    auto worker = [&] {
        for (;;) {
            size_t t = cursor.fetch_add(1);
            if (t >= tasks.size()) return;
            const Task& task = tasks[t];
            const auto& [kb_id, kb] = corpus[task.kb_index];
            BenchRecord& rec = records[t];
            rec.kb_id = kb_id;
            rec.run = task.run;
            rec.cp = task.cp;
            RngStream rng = root.split(task.kb_index, task.run, task.cp);
            Deadline dl = Deadline::in_seconds(params.timeout_s);
            auto t0 = std::chrono::steady_clock::now();
            try {
                std::optional<CpSpec> spec = generators[task.kb_index].generate_cp(rng);
                if (spec) {
                    rec.generated = true;
                    ContrastiveProblem p(kb, spec->query, spec->fact, spec->foil);
                    ContrastiveExplanation e =
                        generate_ce(p, params.mode, /*semantic=*/false, std::nullopt, &dl);
                    rec.commonality = static_cast<int>(instantiate(e.q_com, e.foil_evidence).size());
                    rec.difference = static_cast<int>(instantiate(e.q_diff, e.foil_evidence).size());
                    rec.conflict = static_cast<int>(e.conflict.size());
                    std::set<uint32_t> fresh;
                    for (Ind d : e.foil_evidence)
                        if (d.is_fresh()) fresh.insert(d.fresh_index());
                    rec.fresh = static_cast<int>(fresh.size());
                }
            } catch (const TimeoutError&) {
                rec.timeout = true;
            }
            rec.duration_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };

    int jobs = std::max(1, params.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    BenchResult result;
    result.records = std::move(records);

    std::ostringstream csv;
    csv << "kb,run,cp,commonality,difference,conflict,fresh,duration_s,timeout\n";
    for (const auto& r : result.records) {
        csv << r.kb_id << "," << r.run << "," << r.cp << ",";
        if (r.generated && !r.timeout)
            csv << r.commonality << "," << r.difference << "," << r.conflict << "," << r.fresh;
        else
            csv << ",,,";
        csv << "," << detail::format_duration(r.duration_s) << "," << (r.timeout ? 1 : 0) << "\n";
    }
    result.records_csv = csv.str();

    std::ostringstream sum;
    sum << "kb,attempted,answered,commonality_avg,commonality_min,commonality_max,"
           "difference_avg,difference_min,difference_max,conflict_avg,conflict_min,conflict_max,"
           "fresh_avg,fresh_min,fresh_max,duration_avg,duration_min,duration_max\n";
    for (size_t k = 0; k < corpus.size(); ++k) {
        int attempted = 0, answered = 0;
        struct Agg {
            double sum = 0;
            double lo = 0, hi = 0;
            bool any = false;
            void add(double v) {
                sum += v;
                lo = any ? std::min(lo, v) : v;
                hi = any ? std::max(hi, v) : v;
                any = true;
            }
        } com, dif, con, fre, dur;
        for (const auto& r : result.records) {
            if (r.kb_id != corpus[k].first) continue;
            ++attempted;
            if (!r.generated || r.timeout) continue;
            ++answered;
            com.add(r.commonality);
            dif.add(r.difference);
            con.add(r.conflict);
            fre.add(r.fresh);
            dur.add(r.duration_s);
        }
        auto cols = [&](const Agg& a, bool duration) {
            if (!a.any) return std::string(",,") + ",";
            double avg = a.sum / answered;
            std::string out = "," + (duration ? detail::format_duration(avg) : detail::format_avg(avg));
            out += "," + (duration ? detail::format_duration(a.lo) : detail::format_avg(a.lo));
            out += "," + (duration ? detail::format_duration(a.hi) : detail::format_avg(a.hi));
            return out;
        };
        sum << corpus[k].first << "," << attempted << "," << answered << cols(com, false)
            << cols(dif, false) << cols(con, false) << cols(fre, false) << cols(dur, true) << "\n";
    }
    result.summary_csv = sum.str();
    return result;
}

} // namespace elbx
