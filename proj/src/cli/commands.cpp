#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "diachron/analytics.hpp"
#include "diachron/cli.hpp"
#include "diachron/corpus_io.hpp"
#include "diachron/dating.hpp"
#include "diachron/error.hpp"
#include "diachron/ingest.hpp"
#include "diachron/lemma.hpp"
#include "diachron/reuse/boilerplate.hpp"
#include "diachron/reuse/hashing.hpp"
#include "diachron/reuse/index.hpp"
#include "diachron/reuse/matcher.hpp"

namespace diachron::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
    PipelineConfig cfg;
    std::string command;
    std::ostream& out;
    std::ostream& err;

    fs::path output(const std::string& name) const { return cfg.output_dir / name; }
    void progress(const std::string& msg) const { err << "diachron " << command << ": " << msg << '\n'; }
};

fs::path require_artifact(const fs::path& p) {
    if (!fs::exists(p)) throw MissingArtifactError(p.string());
    return p;
}

void write_json(const fs::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw DomainError(path.string() + " is not valid JSON: " + e.what());
    }
}

// run.json keeps the effective config of the latest run of every subcommand;
// the two date-train scopes write different artifacts, so each gets an entry.
void record_run(const Context& ctx) {
    const auto path = ctx.output("run.json");
    json runs = json::object();
    if (fs::exists(path)) {
        try {
            runs = json::parse(read_text_file(path));
        } catch (const json::parse_error&) {
            runs = json::object();
        }
        if (!runs.is_object()) runs = json::object();
    }
    const auto key = ctx.command == "date-train" ? ctx.command + ":" + ctx.cfg.dating.scope : ctx.command;
    runs[key] = to_json(ctx.cfg);
    write_json(path, runs);
}

std::vector<Document> load(const Context& ctx, bool need_lemmas) {
    LoadOptions opts;
    opts.table = ctx.cfg.normalization;
    opts.workers = ctx.cfg.workers;
    const auto lemma_dir = ctx.output("lemmas");
    if (fs::exists(lemma_dir)) opts.lemma_dir = lemma_dir;
    opts.require_lemmas = need_lemmas;
    const auto dir = ctx.cfg.corpus_path();
    require_artifact(dir / "metadata.jsonl");
    auto corpus = load_corpus(dir, opts);
    ctx.progress("loaded " + std::to_string(corpus.size()) + " documents from " + dir.string());
    return corpus;
}

std::vector<dating::AutoDateResult> read_autodate(const fs::path& path, std::span<const PeriodBin> bins) {
    std::vector<dating::AutoDateResult> out;
    for (const auto& row : read_jsonl(path)) {
        dating::AutoDateResult r{DocumentId(row.at("doc_id").get<std::string>()), {}, row.at("confusion_index")};
        for (const auto& rb : row.at("ranked")) {
            const auto label = rb.at("bin").get<std::string>();
            auto it = std::find_if(bins.begin(), bins.end(), [&](const PeriodBin& b) { return b.label == label; });
            if (it == bins.end()) throw DomainError(path.string() + " names unknown bin '" + label + "'");
            r.ranked.push_back({*it, rb.at("perplexity").get<double>()});
        }
        out.push_back(std::move(r));
    }
    return out;
}

// Applies autodate.jsonl when present, then handles whatever is still Undated.
std::vector<Document> load_for_analytics(const Context& ctx, bool need_lemmas) {
    auto corpus = load(ctx, need_lemmas);
    const auto auto_path = ctx.output("autodate.jsonl");
    if (fs::exists(auto_path)) dating::apply_autodate(corpus, read_autodate(auto_path, ctx.cfg.dating.bins));
    if (ctx.cfg.analytics.skip_undated) {
        const auto before = corpus.size();
        std::erase_if(corpus, [](const Document& d) { return d.meta.dating_status == DatingStatus::Undated; });
        if (corpus.size() != before)
            ctx.progress("skipped " + std::to_string(before - corpus.size()) + " undated documents");
    }
    return corpus;
}

std::vector<Document> select(std::vector<Document>& corpus, std::span<const DocumentId> ids) {
    std::map<DocumentId, Document*> by_id;
    for (auto& d : corpus) by_id.emplace(d.meta.doc_id, &d);
    std::vector<Document> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw DomainError("split.json names document '" + id.str() + "' missing from the corpus");
        out.push_back(*it->second);
    }
    return out;
}

lm::TrainOptions lm_options(const PipelineConfig& c) {
    lm::TrainOptions o;
    o.order = c.dating.order;
    o.min_count = c.dating.min_count;
    return o;
}

// ---------------------------------------------------------------- commands

void cmd_ingest(Context& ctx) {
    const auto& cfg = ctx.cfg;
    if (cfg.source_dir.empty()) throw DomainError("ingest needs a source directory (--source)");
    if (!fs::is_directory(cfg.source_dir)) throw MissingArtifactError(cfg.source_dir.string());
    auto records = ingest::parse_directory(cfg.source_dir);
    ctx.progress("parsed " + std::to_string(records.size()) + " source files");

    std::vector<ingest::DuplicateGroup> groups;
    if (!cfg.ingest.resolutions.empty()) {
        groups = ingest::groups_from_jsonl(read_jsonl(require_artifact(cfg.ingest.resolutions)), records);
        ctx.progress("applied " + std::to_string(groups.size()) + " groups from " + cfg.ingest.resolutions.string());
    } else {
        ingest::GroupingOptions g;
        g.title_author_threshold = cfg.ingest.title_author_threshold;
        g.body_threshold = cfg.ingest.body_threshold;
        g.shingle_size = cfg.ingest.shingle_size;
        g.workers = cfg.workers;
        groups = ingest::group_duplicates(records, g);
        ctx.progress("found " + std::to_string(groups.size()) + " duplicate groups");
    }
    auto filled = ingest::fill_missing_metadata(std::move(records), groups);

    std::vector<Document> docs;
    std::set<std::string> ids;
    for (const auto& r : filled.records) {
        const auto id = ingest::doc_id_for(r);
        if (!ids.insert(id).second) throw DomainError("two source files map to document id '" + id + "'");
        Metadata m{DocumentId(id)};
        m.title = r.title;
        m.author = r.author;
        m.genre = r.genre;
        if (r.dod_hijri) m.set_death_year(*r.dod_hijri);
        if (auto it = r.extra.find("AUTHOR_CODE"); it != r.extra.end() && !it->second.empty()) {
            try {
                m.author_code = std::stoll(it->second);
            } catch (const std::exception&) {
                throw DomainError(r.source_path + ": AUTHOR_CODE is not an integer");
            }
        }
        Document d{std::move(m), r.body, {}, std::nullopt};
        d.tokens = tokenize(normalize_text(d.raw_text, cfg.normalization));
        d.meta.word_count = d.tokens.size();
        docs.push_back(std::move(d));
    }
    std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.meta.doc_id < b.meta.doc_id; });
    save_corpus(cfg.corpus_path(), docs);

    std::vector<json> group_rows, conflict_rows;
    for (std::size_t i = 0; i < groups.size(); ++i) group_rows.push_back(ingest::to_json(groups[i], i, filled.records));
    for (const auto& c : filled.conflicts) conflict_rows.push_back(ingest::to_json(c, filled.records));
    write_jsonl(ctx.output("duplicates.jsonl"), group_rows);
    write_jsonl(ctx.output("conflicts.jsonl"), conflict_rows);
    if (!filled.conflicts.empty())
        ctx.progress(std::to_string(filled.conflicts.size()) + " groups have conflicting death dates; see conflicts.jsonl");
    ctx.progress("wrote corpus to " + cfg.corpus_path().string());
}

void cmd_normalize(Context& ctx) {
    const auto corpus = load(ctx, false);
    const auto dir = ctx.output("normalized");
    fs::create_directories(dir);
    std::size_t tokens = 0;
    for (const auto& d : corpus) {
        write_text_file(dir / (d.meta.doc_id.str() + ".txt"), normalize_text(d.raw_text, ctx.cfg.normalization));
        tokens += d.tokens.size();
    }
    write_json(ctx.output("normalize.json"), {{"documents", corpus.size()}, {"tokens", tokens}});
}

void cmd_lemmatize(Context& ctx) {
    LoadOptions opts;
    opts.table = ctx.cfg.normalization;
    opts.workers = ctx.cfg.workers;
    const auto dir = ctx.cfg.corpus_path();
    require_artifact(dir / "metadata.jsonl");
    // External analyzer sidecars live next to the corpus texts.
    auto corpus = load_corpus(dir, opts);
    std::size_t external = 0;
    for (auto& d : corpus) {
        if (d.lemmas) ++external;
        else d = lemmatize(std::move(d), FallbackStemmer{});
    }
    const auto out_dir = ctx.output("lemmas");
    fs::create_directories(out_dir);
    for (const auto& d : corpus) write_lemma_sidecar(out_dir / (d.meta.doc_id.str() + ".lemmas"), *d.lemmas);
    const auto stats = vocab_stats(corpus);
    write_json(ctx.output("vocab_stats.json"), {{"documents", corpus.size()},
                                                {"external_lemmas", external},
                                                {"fallback_lemmas", corpus.size() - external},
                                                {"word_types", stats.word_types},
                                                {"lemma_types", stats.lemma_types}});
    ctx.progress(std::to_string(external) + " documents with analyzer lemmas, " +
                 std::to_string(corpus.size() - external) + " stemmed");
}

struct Hashed {
    std::vector<Document> corpus;
    reuse::HashedCorpus hashed;
};

Hashed hash_for_reuse(const Context& ctx) {
    Hashed h;
    h.corpus = load(ctx, ctx.cfg.reuse.use_lemmas);
    const auto table = reuse::build_letter_frequencies(h.corpus, ctx.cfg.reuse.use_lemmas, ctx.cfg.workers);
    h.hashed = reuse::hash_corpus(h.corpus, table, ctx.cfg.reuse.use_lemmas, ctx.cfg.workers);
    return h;
}

void cmd_reuse_boilerplate(Context& ctx) {
    const auto h = hash_for_reuse(ctx);
    reuse::BoilerplateOptions o;
    o.passage_len = ctx.cfg.reuse.boilerplate_len;
    o.recurrence_threshold = ctx.cfg.reuse.boilerplate_threshold;
    o.workers = ctx.cfg.workers;
    const auto res = reuse::mark_boilerplate(h.hashed, o);
    std::vector<json> rows;
    for (const auto& m : res.masks) rows.push_back(reuse::to_json(m));
    write_jsonl(ctx.output("boilerplate.jsonl"), rows);
    write_json(ctx.output("boilerplate_summary.json"), {{"marked_tokens", res.marked_tokens},
                                                        {"total_tokens", res.total_tokens},
                                                        {"marked_fraction", res.marked_fraction()},
                                                        {"frequent_sequences", res.frequent_sequences}});
    ctx.progress("masked " + std::to_string(res.marked_tokens) + " of " + std::to_string(res.total_tokens) + " tokens");
}

void cmd_reuse_index(Context& ctx) {
    const auto mask_path = require_artifact(ctx.output("boilerplate.jsonl"));
    const auto h = hash_for_reuse(ctx);
    std::map<DocumentId, reuse::BoilerplateMask> by_id;
    for (const auto& row : read_jsonl(mask_path)) {
        auto m = reuse::mask_from_json(row);
        by_id.emplace(m.doc_id, std::move(m));
    }
    std::vector<reuse::BoilerplateMask> masks;
    for (std::size_t i = 0; i < h.hashed.ids.size(); ++i) {
        auto it = by_id.find(h.hashed.ids[i]);
        if (it == by_id.end() || it->second.marked.size() != h.hashed.codes[i].size())
            throw DomainError(mask_path.string() + " does not match the corpus; rerun reuse-boilerplate");
        masks.push_back(std::move(it->second));
    }
    if (by_id.size() != masks.size())
        throw DomainError(mask_path.string() + " does not match the corpus; rerun reuse-boilerplate");
    reuse::IndexOptions o;
    o.posting_cap = ctx.cfg.reuse.posting_cap;
    o.partitions = ctx.cfg.reuse.partitions;
    o.workers = ctx.cfg.workers;
    const auto index = reuse::build_index(h.hashed, masks, o);
    index.save(ctx.output("index.bin"));
    ctx.progress("indexed " + std::to_string(index.total_postings()) + " postings under " +
                 std::to_string(index.key_count()) + " keys (" + std::to_string(index.dropped_keys) +
                 " over-frequent keys dropped)");
}

void cmd_reuse_match(Context& ctx) {
    const auto index = reuse::SkipGramIndex::load(require_artifact(ctx.output("index.bin")));
    reuse::MatchOptions o;
    o.min_match_len = ctx.cfg.reuse.min_match_len;
    o.max_gap = ctx.cfg.reuse.max_gap;
    o.workers = ctx.cfg.workers;
    const auto matches = reuse::find_matches(index, o);
    std::vector<json> rows;
    for (const auto& m : matches) rows.push_back(reuse::to_json(m));
    write_jsonl(ctx.output("matches.jsonl"), rows);
    write_json(ctx.output("summary.json"), reuse::to_json(reuse::summarize(matches, index)));
    ctx.progress("found " + std::to_string(matches.size()) + " passage matches");
}

void cmd_date_train(Context& ctx) {
    const auto& cfg = ctx.cfg;
    auto corpus = load(ctx, cfg.dating.use_lemmas);
    std::vector<Document> dated;
    for (auto& d : corpus)
        if (d.meta.dating_status == DatingStatus::Dated) dated.push_back(std::move(d));
    dating::SplitOptions so;
    so.train_fraction = cfg.dating.train_fraction;
    so.seed = cfg.seed;
    so.exclude_genres = cfg.dating.exclude_genres;
    const auto split = dating::split_train_test(dated, so);

    std::vector<DocumentId> ids;
    fs::path model_dir;
    if (cfg.dating.scope == "split") {
        write_json(ctx.output("split.json"), dating::to_json(split));
        ids = split.train;
        model_dir = ctx.output("models");
    } else {
        ids = split.train;
        ids.insert(ids.end(), split.test.begin(), split.test.end());
        std::sort(ids.begin(), ids.end());
        model_dir = ctx.output("models_all");
    }
    const auto train = select(dated, ids);
    dating::DatingOptions o{lm_options(cfg), cfg.dating.use_lemmas, cfg.workers};
    std::vector<std::string> warnings;
    const auto models = dating::train_period_models(train, cfg.dating.bins, o, &warnings);
    for (const auto& w : warnings) ctx.progress("warning: " + w);
    if (models.empty()) throw DomainError("no period bin has training text");
    if (fs::exists(model_dir))
        for (const auto& e : fs::directory_iterator(model_dir))
            if (e.path().extension() == ".arpa") fs::remove(e.path());
    dating::save_models(model_dir, models);
    ctx.progress("trained " + std::to_string(models.size()) + " period models on " + std::to_string(train.size()) +
                 " documents into " + model_dir.string());
}

void cmd_date_eval(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto split = dating::split_from_json(read_json(require_artifact(ctx.output("split.json"))));
    const auto models = dating::load_models(require_artifact(ctx.output("models")), cfg.dating.bins);
    auto corpus = load(ctx, cfg.dating.use_lemmas);
    const auto test = select(corpus, split.test);
    if (test.empty()) throw DomainError("the test split is empty");
    std::map<DocumentId, PeriodBin> gold;
    for (const auto& d : test) {
        if (!d.meta.dod_hijri) throw DomainError("test document " + d.meta.doc_id.str() + " is not dated");
        gold.emplace(d.meta.doc_id, dating::assign_bin(*d.meta.dod_hijri, cfg.dating.bins));
    }
    const auto rankings = dating::rank_all(models, test, cfg.dating.use_lemmas, cfg.workers);
    const auto report = dating::evaluate(rankings, gold);
    write_json(ctx.output("eval.json"), dating::to_json(report));
    write_text_file(ctx.output("confusion.csv"), dating::confusion_csv(report));
    std::ostringstream msg;
    msg << std::fixed << std::setprecision(2) << "accuracy@1 " << report.accuracy_at_k.front() << "% over "
        << report.test_count << " documents";
    ctx.progress(msg.str());
}

void cmd_date_auto(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto models = dating::load_models(require_artifact(ctx.output("models_all")), cfg.dating.bins);
    auto corpus = load(ctx, cfg.dating.use_lemmas);
    std::vector<Document> undated;
    for (auto& d : corpus)
        if (d.meta.dating_status == DatingStatus::Undated && !d.tokens.empty()) undated.push_back(std::move(d));
    const auto results = dating::autodate(models, undated, cfg.dating.top_n, cfg.dating.use_lemmas, cfg.workers);
    std::vector<json> rows;
    for (const auto& r : results) rows.push_back(dating::to_json(r));
    write_jsonl(ctx.output("autodate.jsonl"), rows);
    ctx.progress("dated " + std::to_string(results.size()) + " undated documents");
}

void cmd_lifespan(Context& ctx) {
    const auto& a = ctx.cfg.analytics;
    const auto corpus = load_for_analytics(ctx, a.use_lemmas);
    analytics::LifespanOptions o{a.use_lemmas, a.include_autodated, a.min_frequency, ctx.cfg.workers};
    const auto records = analytics::compute_lifespans(corpus, o);
    write_text_file(ctx.output("lifespans.csv"), analytics::lifespans_csv(records));
    write_text_file(ctx.output("lifespan_hist.csv"),
                    analytics::histogram_csv(analytics::lifespan_histogram(records, a.hist_bucket_years)));
    std::optional<int> lo, hi;
    for (const auto& d : corpus) {
        if (auto y = d.effective_year(a.include_autodated)) {
            lo = lo ? std::min(*lo, *y) : *y;
            hi = hi ? std::max(*hi, *y) : *y;
        }
    }
    if (records.empty()) {
        ctx.progress("no lemmas to report");
        return;
    }
    const int span = *hi - *lo;
    const auto s = analytics::lifespan_stats(records, span);
    write_json(ctx.output("lifespan_stats.json"), {{"lemmas", s.count},
                                                   {"mean", s.mean},
                                                   {"sd", s.sd},
                                                   {"median", s.median},
                                                   {"corpus_first_h", *lo},
                                                   {"corpus_last_h", *hi},
                                                   {"corpus_span_years", span},
                                                   {"mean_fraction_of_span", s.mean_fraction_of_span}});
    ctx.progress(std::to_string(records.size()) + " lifespans computed");
}

void cmd_concord(Context& ctx) {
    const auto& a = ctx.cfg.analytics;
    if (a.query.empty()) throw DomainError("concord needs a query (--query)");
    const auto corpus = load_for_analytics(ctx, a.use_lemmas);
    const auto query = normalize_text(a.query, ctx.cfg.normalization);
    const auto lines = analytics::concordance(corpus, query, {a.window, a.use_lemmas, a.include_autodated});
    write_text_file(ctx.output("concordance.csv"), analytics::concordance_csv(lines));
    ctx.progress(std::to_string(lines.size()) + " concordance lines");
}

void cmd_counts(Context& ctx) {
    const auto& a = ctx.cfg.analytics;
    const auto corpus = load_for_analytics(ctx, false);
    const auto counts = analytics::counts_per_period(corpus, a.bucket_years, a.include_autodated);
    write_text_file(ctx.output("period_counts.csv"), analytics::period_counts_csv(counts));
}

void cmd_report(Context& ctx) {
    std::ostringstream md;
    md << std::fixed << std::setprecision(2);
    md << "# Corpus report\n";
    bool any = false;
    auto section = [&](const std::string& file, const std::function<void(const json&)>& body) {
        const auto p = ctx.output(file);
        if (!fs::exists(p)) return;
        any = true;
        body(read_json(p));
    };
    section("summary.json", [&](const json& j) {
        md << "\n## Text reuse\n\n"
           << "- passage matches: " << j.at("matches") << "\n"
           << "- document pairs: " << j.at("document_pairs") << "\n"
           << "- mean match length: " << j.at("mean_match_length").get<double>() << " tokens\n"
           << "- boilerplate tokens masked: " << j.at("marked_tokens") << " of " << j.at("total_tokens") << " ("
           << 100.0 * j.at("marked_fraction").get<double>() << "%)\n";
    });
    section("eval.json", [&](const json& j) {
        md << "\n## Dating evaluation\n\n| k | accuracy (%) |\n|---|---|\n";
        for (const auto& row : j.at("accuracy_at_k"))
            md << "| " << row.at("k") << " | " << row.at("accuracy").get<double>() << " |\n";
        md << "\nrandom baseline " << j.at("random_baseline").get<double>() << "%, majority baseline "
           << j.at("majority_baseline").get<double>() << "%, " << j.at("test_count") << " test documents\n";
    });
    section("lifespan_stats.json", [&](const json& j) {
        md << "\n## Word lifespans\n\n"
           << "- lemmas: " << j.at("lemmas") << "\n"
           << "- mean: " << j.at("mean").get<double>() << " years (SD " << j.at("sd").get<double>() << ", median "
           << j.at("median").get<double>() << ")\n"
           << "- mean as share of the corpus span (" << j.at("corpus_span_years") << " years): "
           << 100.0 * j.at("mean_fraction_of_span").get<double>() << "%\n";
        using R = analytics::EnglishReference;
        md << "\nFor comparison, English (COHA): mean lifespan " << R::mean_years << " years (SD " << R::sd_years
           << ", median " << R::median_years << "), about " << 100.0 * R::fraction_of_span
           << "% of that corpus's span.\n";
    });
    if (!any) throw MissingArtifactError(ctx.output("summary.json / eval.json / lifespan_stats.json").string());
    const auto text = md.str();
    write_text_file(ctx.output("report.md"), text);
    ctx.out << text;
}

struct Command {
    const char* name;
    const char* help;
    void (*run)(Context&);
};

const Command kCommands[] = {
    {"ingest", "parse source markup, group duplicates, fill metadata", cmd_ingest},
    {"normalize", "write normalized texts", cmd_normalize},
    {"lemmatize", "attach analyzer lemmas or stem", cmd_lemmatize},
    {"reuse-boilerplate", "mark recurring boilerplate passages", cmd_reuse_boilerplate},
    {"reuse-index", "build the skip-gram index", cmd_reuse_index},
    {"reuse-match", "find parallel passages", cmd_reuse_match},
    {"date-train", "train per-period language models", cmd_date_train},
    {"date-eval", "evaluate dating on the test split", cmd_date_eval},
    {"date-auto", "date undated documents", cmd_date_auto},
    {"lifespan", "word lifespan statistics", cmd_lifespan},
    {"concord", "date-sorted concordance for a lemma", cmd_concord},
    {"counts", "word and text counts per period", cmd_counts},
    {"report", "summarize existing outputs", cmd_report},
};

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Diachronic corpus toolkit", "diachron"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, source, corpus, output, query, scope;
    unsigned workers = 0;
    std::uint64_t seed = 0;
    int order = 0, bucket_years = 0;
    std::size_t window = 0, top_n = 0, min_frequency = 0, boilerplate_threshold = 0, min_match_len = 0;
    bool surface = false, lemmas = false, include_auto = false, skip_undated = false;

    app.add_option("--config", config_path, "JSON config file");
    auto* o_source = (app.add_option("--source", source, "directory of source markup files"));
    auto* o_corpus = (app.add_option("--corpus", corpus, "corpus directory"));
    auto* o_output = (app.add_option("--output", output, "output directory"));
    auto* o_workers = (app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber));
    auto* o_seed = (app.add_option("--seed", seed, "random seed"));
    auto* o_query = (app.add_option("--query", query, "concordance query"));
    auto* o_scope = (app.add_option("--scope", scope, "date-train scope: split or all"));
    auto* o_order = (app.add_option("--order", order, "language model order"));
    auto* o_bucket = (app.add_option("--bucket-years", bucket_years, "period bucket width"));
    auto* o_window = (app.add_option("--window", window, "concordance window"));
    auto* o_topn = (app.add_option("--top-n", top_n, "candidates kept per autodated document"));
    auto* o_minfreq = (app.add_option("--min-frequency", min_frequency, "lifespan frequency filter"));
    auto* o_bthresh = (app.add_option("--boilerplate-threshold", boilerplate_threshold, "recurrence threshold"));
    auto* o_minlen = (app.add_option("--min-match-len", min_match_len, "minimum passage length"));
    auto* o_surface = (app.add_flag("--surface", surface, "use surface forms instead of lemmas"));
    auto* o_lemmas = (app.add_flag("--lemmas", lemmas, "use lemmas instead of surface forms"));
    auto* o_auto = (app.add_flag("--include-autodated", include_auto, "count autodated documents"));
    auto* o_skip = (app.add_flag("--skip-undated", skip_undated, "drop undated documents"));
    o_surface->excludes(o_lemmas);

    for (const auto& c : kCommands) app.add_subcommand(c.name, c.help);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 1;
    }

    const auto subs = app.get_subcommands();
    const std::string name = subs.front()->get_name();
    const auto* command = std::find_if(std::begin(kCommands), std::end(kCommands),
                                       [&](const Command& c) { return name == c.name; });

    try {
        PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        auto given = [](CLI::Option* o) { return o->count() > 0; };
        if (given(o_source)) cfg.source_dir = source;
        if (given(o_corpus)) cfg.corpus_dir = corpus;
        if (given(o_output)) cfg.output_dir = output;
        if (given(o_workers)) cfg.workers = workers;
        if (given(o_seed)) cfg.seed = seed;
        if (given(o_query)) cfg.analytics.query = query;
        if (given(o_scope)) cfg.dating.scope = scope;
        if (given(o_order)) cfg.dating.order = order;
        if (given(o_bucket)) cfg.analytics.bucket_years = bucket_years;
        if (given(o_window)) cfg.analytics.window = window;
        if (given(o_topn)) cfg.dating.top_n = top_n;
        if (given(o_minfreq)) cfg.analytics.min_frequency = min_frequency;
        if (given(o_bthresh)) cfg.reuse.boilerplate_threshold = boilerplate_threshold;
        if (given(o_minlen)) cfg.reuse.min_match_len = min_match_len;
        if (given(o_auto)) cfg.analytics.include_autodated = include_auto;
        if (given(o_skip)) cfg.analytics.skip_undated = skip_undated;
        if (given(o_surface) || given(o_lemmas)) {
            // Applies to whichever stage the subcommand belongs to.
            const bool use = lemmas;
            if (name.rfind("reuse-", 0) == 0) cfg.reuse.use_lemmas = use;
            else if (name.rfind("date-", 0) == 0) cfg.dating.use_lemmas = use;
            else cfg.analytics.use_lemmas = use;
        }
        validate(cfg);

        Context ctx{std::move(cfg), name, out, err};
        fs::create_directories(ctx.cfg.output_dir);
        command->run(ctx);
        record_run(ctx);
        return 0;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const AlignmentError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const MissingArtifactError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const json::exception& e) {
        err << "error: malformed input: " << e.what() << '\n';
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 2;
    } catch (...) {
        err << "internal error\n";
        return 2;
    }
    return 1;
}

int run_command(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_command(args, std::cout, std::cerr);
}

}  // namespace diachron::cli
