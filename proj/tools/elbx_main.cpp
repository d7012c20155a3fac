// elbx: contrastive explanations for EL-bottom ABox entailments.
//
// Subcommands: explain, verify, materialize, justify, gen-cp, bench.
// Exit codes: 0 ok, 1 error, 2 not-a-problem, 3 parse error,
// 4 space too large, 5 inconsistent KB, 6 no foil found.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "elbx/bench.hpp"
#include "elbx/ce_io.hpp"
#include "elbx/oracle.hpp"

using namespace elbx;

namespace {

int log_level() {
    static int level = [] {
        const char* v = std::getenv("CE_LOG");
        if (!v) return 0;
        std::string s(v);
        if (s == "debug") return 2;
        if (s == "info") return 1;
        return 0;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[debug] " << msg << "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

KnowledgeBase load_kb(const std::string& path) {
    log_info("loading " + path);
    return parse_kb(read_file(path));
}

Ind named(KnowledgeBase& kb, const std::string& name) {
    return Ind::named(kb.vocab_mut().individual_name(name));
}

struct CommonCpArgs {
    std::string kb_path;
    std::string concept_text;
    std::string fact;
    std::string foil;

    void attach(CLI::App* cmd) {
        cmd->add_option("--kb", kb_path, "knowledge base file")->required();
        cmd->add_option("--concept", concept_text, "query concept (same grammar as KB files)")
            ->required();
        cmd->add_option("--fact", fact, "fact individual (the instance)")->required();
        cmd->add_option("--foil", foil, "foil individual (the non-instance)")->required();
    }

    ContrastiveProblem problem(KnowledgeBase& kb) const {
        Concept c = parse_concept(concept_text, kb.vocab_mut());
        return ContrastiveProblem(kb, c, Ind::named(kb.vocab_mut().individual_name(fact)),
                                  Ind::named(kb.vocab_mut().individual_name(foil)));
    }
};

int cmd_explain(const CommonCpArgs& cp, bool semantic, bool full, uint64_t /*seed*/,
                std::optional<size_t> fresh_budget, const std::string& output) {
    KnowledgeBase kb = load_kb(cp.kb_path);
    ContrastiveProblem p = cp.problem(kb);
    StructureMode mode = full ? StructureMode::Full : StructureMode::Refined;
    ContrastiveExplanation e = generate_ce(p, mode, semantic, fresh_budget);
    log_debug("pipeline finished; validating");
    ValidationReport r = validate_ce(p, e);
    if (!r.full_valid()) throw Error("internal: generated explanation failed validation");
    if (output == "json")
        std::cout << ce_to_json(e, kb.vocab()).dump(2) << "\n";
    else
        std::cout << render_ce_text(e, kb.vocab());
    return 0;
}

int cmd_verify(const CommonCpArgs& cp, const std::string& ce_path, const std::string& criterion,
               const std::string& mode_name, size_t max_fresh, size_t max_atoms) {
    KnowledgeBase kb = load_kb(cp.kb_path);
    ContrastiveProblem p = cp.problem(kb);
    ordered_json doc = ordered_json::parse(read_file(ce_path));
    ContrastiveExplanation e = ce_from_json(doc, kb.vocab_mut());

    ValidationReport r = validate_ce(p, e);
    OracleBounds bounds;
    bounds.max_fresh = max_fresh;
    bounds.max_atoms = max_atoms;
    OptimalityMode mode = mode_name == "card" ? OptimalityMode::Cardinality : OptimalityMode::Subset;

    bool optimal = false;
    ContrastiveExplanation witness;
    bool have_witness = false;
    if (r.full_valid()) {
        if (criterion == "diff")
            optimal = is_difference_minimal(p, e, mode, bounds, &witness);
        else if (criterion == "conflict")
            optimal = is_conflict_minimal(p, e, mode, bounds, &witness);
        else
            optimal = is_commonality_maximal(p, e, mode, bounds, &witness);
        have_witness = !optimal;
    }

    ordered_json out;
    out["valid"] = {{"c1", r.c1()},
                    {"c2", r.c2},
                    {"c3", r.c3},
                    {"c4", r.c4},
                    {"c5", r.c5},
                    {"d", r.d()}};
    out["classification"] = r.classification() == CeClass::Syntactic ? "syntactic" : "semantic";
    out["optimal"] = optimal;
    out["witness"] = have_witness ? ce_to_json(witness, kb.vocab()) : ordered_json(nullptr);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_materialize(const std::string& kb_path) {
    KnowledgeBase kb = load_kb(kb_path);
    KnowledgeBase extended = kb.with_abox(materialize(kb));
    std::cout << serialize_kb(extended);
    return 0;
}

int cmd_justify(const std::string& kb_path, const std::string& assertion_text, bool all,
                size_t limit, const std::string& output) {
    KnowledgeBase kb = load_kb(kb_path);
    Assertion goal = parse_assertion(assertion_text, kb.vocab_mut());
    std::vector<Axiom> fixed;
    for (const auto& g : kb.tbox()) fixed.emplace_back(g);
    JustificationQuery q{&kb, std::move(fixed), Goal::assertion(goal)};

    auto print_set = [&](const std::vector<Axiom>& j, ordered_json* arr) {
        std::vector<Assertion> atoms;
        for (const auto& ax : j) atoms.push_back(std::get<Assertion>(ax));
        std::sort(atoms.begin(), atoms.end(), AssertionTextLess{&kb.vocab()});
        if (arr) {
            ordered_json set = ordered_json::array();
            for (const auto& a : atoms) set.push_back(detail::assertion_to_json(a, kb.vocab()));
            arr->push_back(set);
        } else {
            std::cout << "justification:\n";
            for (const auto& a : atoms) std::cout << "  " << kb.render(a) << "\n";
        }
    };

    if (all) {
        AllJustifications res = all_justifications(q, limit);
        if (output == "json") {
            ordered_json arr = ordered_json::array();
            for (const auto& j : res.justifications) print_set(j, &arr);
            ordered_json out;
            out["justifications"] = arr;
            out["truncated"] = res.truncated;
            std::cout << out.dump(2) << "\n";
        } else {
            for (const auto& j : res.justifications) print_set(j, nullptr);
            if (res.truncated) std::cout << "(truncated at " << limit << ")\n";
        }
    } else {
        std::vector<Axiom> j = justify_fixed(q);
        if (output == "json") {
            ordered_json arr = ordered_json::array();
            print_set(j, &arr);
            std::cout << arr[0].dump(2) << "\n";
        } else {
            print_set(j, nullptr);
        }
    }
    return 0;
}

int cmd_gen_cp(const std::string& kb_path, int count, uint64_t seed, int max_size,
               const std::string& output) {
    KnowledgeBase kb = load_kb(kb_path);
    CpGenerator gen(kb);
    ordered_json arr = ordered_json::array();
    for (int i = 0; i < count; ++i) {
        RngStream rng = RngStream(seed).split(0, 0, static_cast<uint64_t>(i));
        auto spec = gen.generate_cp(rng, max_size);
        if (!spec) {
            std::cerr << "no foil found for problem " << i << "\n";
            return 6;
        }
        if (output == "json") {
            ordered_json item;
            item["concept"] = render_concept(spec->query, kb.vocab());
            item["fact"] = kb.vocab().text(spec->fact);
            item["foil"] = kb.vocab().text(spec->foil);
            arr.push_back(item);
        } else {
            std::cout << "cp " << i << ": concept = " << render_concept(spec->query, kb.vocab())
                      << "; fact = " << kb.vocab().text(spec->fact)
                      << "; foil = " << kb.vocab().text(spec->foil) << "\n";
        }
    }
    if (output == "json") std::cout << arr.dump(2) << "\n";
    return 0;
}

int cmd_bench(const std::string& corpus_dir, const BenchParams& params, bool strip,
              const std::string& records_path, const std::string& summary_path) {
    std::vector<std::pair<std::string, KnowledgeBase>> corpus;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(corpus_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".kb") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        try {
            KnowledgeBase kb = load_kb(f.string());
            if (saturate(kb).inconsistent) {
                std::cerr << f.filename().string() << ": inconsistent, skipped\n";
                continue;
            }
            if (strip) kb = strip_entailed(kb);
            corpus.emplace_back(f.stem().string(), std::move(kb));
        } catch (const ParseError& e) {
            std::cerr << f.filename().string() << ": " << e.what() << ", skipped\n";
        }
    }
    if (corpus.empty()) throw Error("no usable .kb files in " + corpus_dir);
    log_info("benchmarking " + std::to_string(corpus.size()) + " knowledge bases");

    BenchResult res = run_bench(corpus, params);
    if (records_path.empty() || records_path == "-") {
        std::cout << res.records_csv;
    } else {
        std::ofstream out(records_path);
        out << res.records_csv;
    }
    if (!summary_path.empty()) {
        std::ofstream out(summary_path);
        out << res.summary_csv;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"contrastive ABox explanations over EL-bottom knowledge bases"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 1 error, 2 not a problem, 3 parse error, 4 space too large,\n"
               "5 inconsistent KB, 6 no foil. Set CE_LOG=info|debug for diagnostics on stderr.");

    // explain
    CommonCpArgs explain_cp;
    bool semantic = false, full = false;
    uint64_t seed = 0;
    std::optional<size_t> fresh_budget;
    std::string explain_output = "text";
    auto* explain = app.add_subcommand("explain", "compute a difference-minimal explanation");
    explain_cp.attach(explain);
    explain->add_flag("--semantic", semantic, "materialize entailed facts first");
    auto* full_flag = explain->add_flag("--full", full, "use the full super-structure");
    explain->add_flag("--refined", "use the refined super-structure (default)")->excludes(full_flag);
    explain->add_option("--seed", seed, "random seed (the pipeline itself is deterministic)");
    explain->add_option("--fresh-budget", fresh_budget, "cap on fresh foil individuals");
    explain->add_option("--output", explain_output, "text or json")
        ->check(CLI::IsMember({"text", "json"}));

    // verify
    CommonCpArgs verify_cp;
    std::string ce_path, criterion = "diff", opt_mode = "subset";
    size_t max_fresh = 2, max_atoms = 24;
    auto* verify = app.add_subcommand("verify", "validate an explanation and check optimality");
    verify_cp.attach(verify);
    verify->add_option("--ce", ce_path, "explanation JSON file")->required();
    verify->add_option("--criterion", criterion, "diff, conflict or commonality")
        ->check(CLI::IsMember({"diff", "conflict", "commonality"}));
    verify->add_option("--mode", opt_mode, "subset or card")
        ->check(CLI::IsMember({"subset", "card"}));
    verify->add_option("--max-fresh", max_fresh, "fresh individuals in the search space");
    verify->add_option("--max-atoms", max_atoms, "maximum pattern atoms in the search space");

    // materialize
    std::string mat_kb;
    auto* mat = app.add_subcommand("materialize", "write the ABox extended with entailed facts");
    mat->add_option("--kb", mat_kb, "knowledge base file")->required();

    // justify
    std::string just_kb, assertion_text, just_output = "text";
    bool just_all = false;
    size_t just_limit = 1000;
    auto* just = app.add_subcommand("justify", "minimal ABox justifications of an assertion");
    just->add_option("--kb", just_kb, "knowledge base file")->required();
    just->add_option("--assertion", assertion_text, "e.g. \"Interviewed(alice)\" or \"r(a,b)\"")
        ->required();
    just->add_flag("--all", just_all, "enumerate all justifications");
    just->add_option("--limit", just_limit, "cap for --all");
    just->add_option("--output", just_output, "text or json")->check(CLI::IsMember({"text", "json"}));

    // gen-cp
    std::string gen_kb, gen_output = "text";
    int gen_count = 1, gen_max_size = 5;
    uint64_t gen_seed = 0;
    auto* gen = app.add_subcommand("gen-cp", "generate random contrastive problems");
    gen->add_option("--kb", gen_kb, "knowledge base file")->required();
    gen->add_option("--count", gen_count, "number of problems");
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("--max-size", gen_max_size, "maximum concept size");
    gen->add_option("--output", gen_output, "text or json")->check(CLI::IsMember({"text", "json"}));

    // bench
    std::string corpus_dir, records_path = "-", summary_path;
    BenchParams bench_params;
    bool strip = false, bench_full = false;
    auto* bench = app.add_subcommand("bench", "sweep a corpus and emit CSV statistics");
    bench->add_option("--corpus", corpus_dir, "directory of .kb files")->required();
    bench->add_option("--runs", bench_params.runs, "runs per KB");
    bench->add_option("--cps", bench_params.cps_per_run, "problems per run");
    bench->add_option("--timeout", bench_params.timeout_s, "seconds per explanation");
    bench->add_option("--seed", bench_params.seed, "random seed");
    bench->add_option("--jobs", bench_params.jobs, "worker threads");
    bench->add_option("--records", records_path, "records CSV path ('-' for stdout)");
    bench->add_option("--summary", summary_path, "summary CSV path");
    bench->add_flag("--strip-entailed", strip, "remove entailed assertions before benchmarking");
    bench->add_flag("--full", bench_full, "use the full super-structure");

    CLI11_PARSE(app, argc, argv);

    try {
        if (explain->parsed())
            return cmd_explain(explain_cp, semantic, full, seed, fresh_budget, explain_output);
        if (verify->parsed())
            return cmd_verify(verify_cp, ce_path, criterion, opt_mode, max_fresh, max_atoms);
        if (mat->parsed()) return cmd_materialize(mat_kb);
        if (just->parsed()) return cmd_justify(just_kb, assertion_text, just_all, just_limit, just_output);
        if (gen->parsed()) return cmd_gen_cp(gen_kb, gen_count, gen_seed, gen_max_size, gen_output);
        if (bench->parsed()) {
            bench_params.mode = bench_full ? StructureMode::Full : StructureMode::Refined;
            return cmd_bench(corpus_dir, bench_params, strip, records_path, summary_path);
        }
    } catch (const NotAProblemError& e) {
        std::cerr << "not a contrastive problem ("
                  << (e.side == NotAProblemError::Side::Fact ? "fact" : "foil") << " side): " << e.what()
                  << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const InvalidCeError& e) {
        std::cerr << "invalid explanation: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "bad JSON: " << e.what() << "\n";
        return 3;
    } catch (const SpaceTooLargeError& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const InconsistentKbError& e) {
        std::cerr << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
