#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "diachron/corpus.hpp"
#include "diachron/dating.hpp"
#include "diachron/normalize.hpp"

namespace diachron::cli {

struct IngestConfig {
    double title_author_threshold = 0.2;
    double body_threshold = 0.8;
    std::size_t shingle_size = 5;
    // Operator-edited duplicates.jsonl to apply instead of automatic grouping.
    std::filesystem::path resolutions;
};

struct ReuseConfig {
    bool use_lemmas = false;
    std::size_t boilerplate_len = 6;
    std::size_t boilerplate_threshold = 40;
    std::size_t posting_cap = 1000;
    unsigned partitions = 64;
    std::size_t min_match_len = 20;
    std::size_t max_gap = 10;
};

struct DatingConfig {
    std::vector<PeriodBin> bins = dating::default_bins();
    int order = 5;
    std::size_t min_count = 2;
    double train_fraction = 0.8;
    std::vector<std::string> exclude_genres{"dictionary"};
    bool use_lemmas = false;
    std::size_t top_n = 3;
    std::string scope = "split";  // date-train: split | all
};

struct AnalyticsConfig {
    bool use_lemmas = true;
    bool include_autodated = false;
    // Drop Undated documents instead of refusing to run.
    bool skip_undated = false;
    std::size_t min_frequency = 0;
    int hist_bucket_years = 100;
    int bucket_years = 50;
    std::size_t window = 5;
    std::string query;
};

struct PipelineConfig {
    std::filesystem::path source_dir;  // raw markup, read by ingest
    std::filesystem::path corpus_dir;  // metadata.jsonl + <id>.txt; defaults to <output_dir>/corpus
    std::filesystem::path output_dir = "out";
    unsigned workers = 1;
    std::uint64_t seed = 1;
    NormalizationTable normalization;
    IngestConfig ingest;
    ReuseConfig reuse;
    DatingConfig dating;
    AnalyticsConfig analytics;

    std::filesystem::path corpus_path() const { return corpus_dir.empty() ? output_dir / "corpus" : corpus_dir; }
};

nlohmann::json to_json(const PipelineConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

// Throws DomainError when a parameter is outside its documented range.
void validate(const PipelineConfig& c);

// Runs one subcommand. Returns 0 on success, 1 on user error (bad usage,
// invalid input, missing prerequisite artifact) and 2 on internal error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, const char* const* argv);

}  // namespace diachron::cli
