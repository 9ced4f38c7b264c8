#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "diachron/corpus.hpp"
#include "diachron/lm.hpp"

namespace diachron::dating {

// 1-200, 201-300, ..., 1301-1400, 1401-1436.
std::vector<PeriodBin> default_bins();

// Throws DomainError unless every bin has start_h <= end_h and the bins are
// disjoint and sorted.
void validate_bins(std::span<const PeriodBin> bins);

std::size_t bin_index(int dod_hijri, std::span<const PeriodBin> bins);
const PeriodBin& assign_bin(int dod_hijri, std::span<const PeriodBin> bins);

struct SplitOptions {
    double train_fraction = 0.8;
    std::uint64_t seed = 1;
    std::vector<std::string> exclude_genres{"dictionary"};
};

struct Split {
    std::vector<DocumentId> train;
    std::vector<DocumentId> test;
    std::vector<DocumentId> excluded;
};

// Requires every document to be Dated. Each list comes back sorted by id.
Split split_train_test(std::span<const Document> docs, const SplitOptions& options = {});

nlohmann::json to_json(const Split& split);
Split split_from_json(const nlohmann::json& j);

struct PeriodModel {
    PeriodBin bin;
    lm::NgramModel model;
};

struct DatingOptions {
    lm::TrainOptions lm;
    bool use_lemmas = false;
    unsigned workers = 1;
};

// One model per bin, trained in parallel on the Dated documents falling in
// it. Bins without training text are skipped and reported in `warnings`.
std::vector<PeriodModel> train_period_models(std::span<const Document> docs, std::span<const PeriodBin> bins,
                                             const DatingOptions& options,
                                             std::vector<std::string>* warnings = nullptr);

void save_models(const std::filesystem::path& dir, std::span<const PeriodModel> models);
// Loads <label>.arpa for each bin; bins without a file are skipped. Throws
// MissingArtifactError when none is found.
std::vector<PeriodModel> load_models(const std::filesystem::path& dir, std::span<const PeriodBin> bins);

struct RankedBin {
    PeriodBin bin;
    double perplexity = 0.0;
};

struct DateRanking {
    DocumentId doc_id;
    std::vector<RankedBin> ranked;  // ascending perplexity, ties to the earlier bin
};

DateRanking rank_dates(std::span<const PeriodModel> models, const Document& doc, bool use_lemmas = false);
std::vector<DateRanking> rank_all(std::span<const PeriodModel> models, std::span<const Document> docs,
                                  bool use_lemmas, unsigned workers);

struct EvalReport {
    std::vector<PeriodBin> bins;
    std::vector<double> accuracy_at_k;  // [k-1] -> percent
    double random_baseline = 0.0;
    double majority_baseline = 0.0;
    // confusion[true][predicted], indexed like `bins`.
    std::vector<std::vector<std::size_t>> confusion;
    std::size_t test_count = 0;
};

// Throws DomainError when the ranked documents and the gold documents differ
// or a gold bin was not ranked.
EvalReport evaluate(std::span<const DateRanking> rankings, const std::map<DocumentId, PeriodBin>& gold);

nlohmann::json to_json(const EvalReport& report);
std::string confusion_csv(const EvalReport& report);

struct AutoDateResult {
    DocumentId doc_id;
    std::vector<RankedBin> ranked;  // top_n best
    // Best over second-best perplexity, in (0, 1]; 1.0 with a single model.
    double confusion_index = 1.0;
};

// Results sorted ascending by confusion index (ties by doc id).
std::vector<AutoDateResult> autodate(std::span<const PeriodModel> models, std::span<const Document> docs,
                                     std::size_t top_n = 3, bool use_lemmas = false, unsigned workers = 1);

// Marks each dated-by-model document AutoDated with its best bin.
void apply_autodate(std::span<Document> docs, std::span<const AutoDateResult> results);

nlohmann::json to_json(const AutoDateResult& result);

}  // namespace diachron::dating
