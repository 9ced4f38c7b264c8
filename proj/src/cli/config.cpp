#include "diachron/cli.hpp"

#include <fstream>
#include <set>

#include "diachron/error.hpp"
#include "diachron/lm.hpp"

namespace diachron::cli {

using nlohmann::json;

namespace {

// Copies j[key] into `field` when present, rejecting keys not listed.
class Reader {
public:
    Reader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
        if (!j_.is_object()) throw DomainError("config section '" + section_ + "' must be an object");
    }

    template <typename T>
    void get(const char* key, T& field) {
        seen_.insert(key);
        if (auto it = j_.find(key); it != j_.end()) {
            try {
                field = it->template get<T>();
            } catch (const json::exception&) {
                throw DomainError("config key '" + where(key) + "' has the wrong type");
            }
        }
    }

    void path(const char* key, std::filesystem::path& field) {
        std::string s = field.string();
        get(key, s);
        field = s;
    }

    const json* child(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw DomainError("unknown config key '" + where(k.c_str()) + "'");
    }

private:
    std::string where(const char* key) const { return section_.empty() ? key : section_ + "." + key; }

    const json& j_;
    std::string section_;
    std::set<std::string> seen_;
};

}  // namespace

json to_json(const PipelineConfig& c) {
    json bins = json::array();
    for (const auto& b : c.dating.bins) bins.push_back({{"label", b.label}, {"start_h", b.start_h}, {"end_h", b.end_h}});
    const auto& n = c.normalization;
    return {
        {"source_dir", c.source_dir.string()},
        {"corpus_dir", c.corpus_dir.string()},
        {"output_dir", c.output_dir.string()},
        {"workers", c.workers},
        {"seed", c.seed},
        {"normalization",
         {{"unify_alif", n.unify_alif},
          {"alif_maqsura_to_ya", n.alif_maqsura_to_ya},
          {"ta_marbuta_to_ha", n.ta_marbuta_to_ha},
          {"strip_diacritics", n.strip_diacritics},
          {"strip_tatweel", n.strip_tatweel}}},
        {"ingest",
         {{"title_author_threshold", c.ingest.title_author_threshold},
          {"body_threshold", c.ingest.body_threshold},
          {"shingle_size", c.ingest.shingle_size},
          {"resolutions", c.ingest.resolutions.string()}}},
        {"reuse",
         {{"use_lemmas", c.reuse.use_lemmas},
          {"boilerplate_len", c.reuse.boilerplate_len},
          {"boilerplate_threshold", c.reuse.boilerplate_threshold},
          {"posting_cap", c.reuse.posting_cap},
          {"partitions", c.reuse.partitions},
          {"min_match_len", c.reuse.min_match_len},
          {"max_gap", c.reuse.max_gap}}},
        {"dating",
         {{"bins", bins},
          {"order", c.dating.order},
          {"min_count", c.dating.min_count},
          {"train_fraction", c.dating.train_fraction},
          {"exclude_genres", c.dating.exclude_genres},
          {"use_lemmas", c.dating.use_lemmas},
          {"top_n", c.dating.top_n},
          {"scope", c.dating.scope}}},
        {"analytics",
         {{"use_lemmas", c.analytics.use_lemmas},
          {"include_autodated", c.analytics.include_autodated},
          {"skip_undated", c.analytics.skip_undated},
          {"min_frequency", c.analytics.min_frequency},
          {"hist_bucket_years", c.analytics.hist_bucket_years},
          {"bucket_years", c.analytics.bucket_years},
          {"window", c.analytics.window},
          {"query", c.analytics.query}}},
    };
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig c;
    Reader top(j, "");
    top.path("source_dir", c.source_dir);
    top.path("corpus_dir", c.corpus_dir);
    top.path("output_dir", c.output_dir);
    top.get("workers", c.workers);
    top.get("seed", c.seed);
    if (const json* s = top.child("normalization")) {
        Reader r(*s, "normalization");
        r.get("unify_alif", c.normalization.unify_alif);
        r.get("alif_maqsura_to_ya", c.normalization.alif_maqsura_to_ya);
        r.get("ta_marbuta_to_ha", c.normalization.ta_marbuta_to_ha);
        r.get("strip_diacritics", c.normalization.strip_diacritics);
        r.get("strip_tatweel", c.normalization.strip_tatweel);
        r.finish();
    }
    if (const json* s = top.child("ingest")) {
        Reader r(*s, "ingest");
        r.get("title_author_threshold", c.ingest.title_author_threshold);
        r.get("body_threshold", c.ingest.body_threshold);
        r.get("shingle_size", c.ingest.shingle_size);
        r.path("resolutions", c.ingest.resolutions);
        r.finish();
    }
    if (const json* s = top.child("reuse")) {
        Reader r(*s, "reuse");
        r.get("use_lemmas", c.reuse.use_lemmas);
        r.get("boilerplate_len", c.reuse.boilerplate_len);
        r.get("boilerplate_threshold", c.reuse.boilerplate_threshold);
        r.get("posting_cap", c.reuse.posting_cap);
        r.get("partitions", c.reuse.partitions);
        r.get("min_match_len", c.reuse.min_match_len);
        r.get("max_gap", c.reuse.max_gap);
        r.finish();
    }
    if (const json* s = top.child("dating")) {
        Reader r(*s, "dating");
        if (const json* bins = r.child("bins")) {
            c.dating.bins.clear();
            for (const auto& b : *bins) {
                PeriodBin pb;
                Reader br(b, "dating.bins");
                br.get("start_h", pb.start_h);
                br.get("end_h", pb.end_h);
                pb.label = std::to_string(pb.start_h) + "-" + std::to_string(pb.end_h);
                br.get("label", pb.label);
                br.finish();
                c.dating.bins.push_back(pb);
            }
        }
        r.get("order", c.dating.order);
        r.get("min_count", c.dating.min_count);
        r.get("train_fraction", c.dating.train_fraction);
        r.get("exclude_genres", c.dating.exclude_genres);
        r.get("use_lemmas", c.dating.use_lemmas);
        r.get("top_n", c.dating.top_n);
        r.get("scope", c.dating.scope);
        r.finish();
    }
    if (const json* s = top.child("analytics")) {
        Reader r(*s, "analytics");
        r.get("use_lemmas", c.analytics.use_lemmas);
        r.get("include_autodated", c.analytics.include_autodated);
        r.get("skip_undated", c.analytics.skip_undated);
        r.get("min_frequency", c.analytics.min_frequency);
        r.get("hist_bucket_years", c.analytics.hist_bucket_years);
        r.get("bucket_years", c.analytics.bucket_years);
        r.get("window", c.analytics.window);
        r.get("query", c.analytics.query);
        r.finish();
    }
    top.finish();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError(path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DomainError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

void validate(const PipelineConfig& c) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw DomainError("invalid configuration: " + what);
    };
    require(c.workers >= 1, "workers must be at least 1");
    require(!c.output_dir.empty(), "output_dir must be set");
    require(c.ingest.title_author_threshold >= 0 && c.ingest.title_author_threshold <= 1,
            "ingest.title_author_threshold must be in [0, 1]");
    require(c.ingest.body_threshold >= 0 && c.ingest.body_threshold <= 1, "ingest.body_threshold must be in [0, 1]");
    require(c.ingest.shingle_size >= 1, "ingest.shingle_size must be at least 1");
    require(c.reuse.boilerplate_len >= 1, "reuse.boilerplate_len must be at least 1");
    require(c.reuse.boilerplate_threshold >= 2, "reuse.boilerplate_threshold must be at least 2");
    require(c.reuse.posting_cap >= 2, "reuse.posting_cap must be at least 2");
    require(c.reuse.partitions >= 1, "reuse.partitions must be at least 1");
    require(c.reuse.min_match_len >= 1, "reuse.min_match_len must be at least 1");
    require(c.dating.order >= 1 && c.dating.order <= lm::kMaxOrder, "dating.order must be in 1..10");
    require(c.dating.min_count >= 1, "dating.min_count must be at least 1");
    require(c.dating.train_fraction > 0 && c.dating.train_fraction < 1, "dating.train_fraction must be in (0, 1)");
    require(c.dating.top_n >= 1, "dating.top_n must be at least 1");
    require(c.dating.scope == "split" || c.dating.scope == "all", "dating.scope must be 'split' or 'all'");
    dating::validate_bins(c.dating.bins);
    require(c.analytics.hist_bucket_years >= 1, "analytics.hist_bucket_years must be at least 1");
    require(c.analytics.bucket_years >= 1, "analytics.bucket_years must be at least 1");
}

}  // namespace diachron::cli
