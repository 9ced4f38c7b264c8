#include "diachron/dating.hpp"

#include <algorithm>
#include <unordered_map>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "diachron/corpus_io.hpp"
#include "diachron/error.hpp"
#include "diachron/parallel.hpp"

namespace diachron::dating {

namespace {

PeriodBin make_bin(int start, int end) {
    return PeriodBin{std::to_string(start) + "-" + std::to_string(end), start, end};
}

nlohmann::json bin_json(const PeriodBin& b) {
    return {{"label", b.label}, {"start_h", b.start_h}, {"end_h", b.end_h}};
}

bool earlier(const PeriodBin& a, const PeriodBin& b) {
    return a.start_h < b.start_h;
}

std::vector<DocumentId> ids_from_json(const nlohmann::json& arr) {
    std::vector<DocumentId> out;
    for (const auto& v : arr) out.emplace_back(v.get<std::string>());
    return out;
}

nlohmann::json ids_json(std::span<const DocumentId> ids) {
    auto arr = nlohmann::json::array();
    for (const auto& id : ids) arr.push_back(id.str());
    return arr;
}

}  // namespace

std::vector<PeriodBin> default_bins() {
    std::vector<PeriodBin> bins{make_bin(1, 200)};
    for (int start = 201; start <= 1301; start += 100) bins.push_back(make_bin(start, start + 99));
    bins.push_back(make_bin(1401, 1436));
    return bins;
}

void validate_bins(std::span<const PeriodBin> bins) {
    if (bins.empty()) throw DomainError("no period bins configured");
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (bins[i].start_h > bins[i].end_h) throw DomainError("bin " + bins[i].label + " has start after end");
        if (i > 0 && bins[i].start_h <= bins[i - 1].end_h)
            throw DomainError("bins " + bins[i - 1].label + " and " + bins[i].label + " overlap or are unsorted");
    }
}

std::size_t bin_index(int dod_hijri, std::span<const PeriodBin> bins) {
    for (std::size_t i = 0; i < bins.size(); ++i)
        if (bins[i].contains(dod_hijri)) return i;
    throw DomainError("year " + std::to_string(dod_hijri) + " falls outside every period bin");
}

const PeriodBin& assign_bin(int dod_hijri, std::span<const PeriodBin> bins) {
    return bins[bin_index(dod_hijri, bins)];
}

Split split_train_test(std::span<const Document> docs, const SplitOptions& options) {
    if (!(options.train_fraction >= 0.0 && options.train_fraction <= 1.0))
        throw DomainError("train_fraction must be in [0, 1]");
    const std::set<std::string> excluded_genres(options.exclude_genres.begin(), options.exclude_genres.end());
    Split split;
    std::vector<DocumentId> eligible;
    for (const auto& d : docs) {
        if (d.meta.dating_status != DatingStatus::Dated)
            throw DomainError("document " + d.meta.doc_id.str() + " is not dated");
        if (d.meta.genre && excluded_genres.count(*d.meta.genre)) split.excluded.push_back(d.meta.doc_id);
        else eligible.push_back(d.meta.doc_id);
    }
    std::sort(eligible.begin(), eligible.end());
    std::sort(split.excluded.begin(), split.excluded.end());

    // Fisher-Yates with raw engine output so the permutation does not depend
    // on the standard library's distribution implementation.
    std::mt19937_64 rng(options.seed);
    for (std::size_t i = eligible.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(eligible[i - 1], eligible[j]);
    }
    const auto n_train = static_cast<std::size_t>(std::llround(options.train_fraction * double(eligible.size())));
    split.train.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(eligible.begin() + static_cast<std::ptrdiff_t>(n_train), eligible.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

nlohmann::json to_json(const Split& split) {
    return {{"train", ids_json(split.train)}, {"test", ids_json(split.test)}, {"excluded", ids_json(split.excluded)}};
}

Split split_from_json(const nlohmann::json& j) {
    Split s;
    s.train = ids_from_json(j.at("train"));
    s.test = ids_from_json(j.at("test"));
    if (j.contains("excluded")) s.excluded = ids_from_json(j.at("excluded"));
    return s;
}

std::vector<PeriodModel> train_period_models(std::span<const Document> docs, std::span<const PeriodBin> bins,
                                             const DatingOptions& options, std::vector<std::string>* warnings) {
    validate_bins(bins);
    std::vector<std::vector<lm::Sentence>> text(bins.size());
    for (const auto& d : docs) {
        if (d.meta.dating_status != DatingStatus::Dated || !d.meta.dod_hijri)
            throw DomainError("document " + d.meta.doc_id.str() + " is not dated");
        auto sents = d.sentences(options.use_lemmas);
        auto& dst = text[bin_index(*d.meta.dod_hijri, bins)];
        for (auto& s : sents) dst.push_back(std::move(s));
    }
    std::vector<std::size_t> todo;
    for (std::size_t b = 0; b < bins.size(); ++b) {
        if (text[b].empty()) {
            if (warnings) warnings->push_back("bin " + bins[b].label + " has no training text; skipped");
        } else {
            todo.push_back(b);
        }
    }
    // One vocabulary for every period so that perplexities stay comparable.
    auto lm_options = options.lm;
    if (lm_options.vocabulary.empty()) {
        std::unordered_map<std::string_view, std::size_t> counts;
        for (const auto& t : text)
            for (const auto& s : t)
                for (const auto& w : s) ++counts[w];
        for (const auto& [w, c] : counts)
            if (c >= lm_options.min_count) lm_options.vocabulary.emplace_back(w);
        std::sort(lm_options.vocabulary.begin(), lm_options.vocabulary.end());
    }
    std::vector<std::optional<lm::NgramModel>> trained(todo.size());
    parallel_for(todo.size(), options.workers,
                 [&](std::size_t i) { trained[i] = lm::train_lm(text[todo[i]], lm_options); });
    std::vector<PeriodModel> out;
    for (std::size_t i = 0; i < todo.size(); ++i) {
        if (warnings)
            for (const auto& w : trained[i]->warnings()) warnings->push_back("bin " + bins[todo[i]].label + ": " + w);
        out.push_back(PeriodModel{bins[todo[i]], std::move(*trained[i])});
    }
    return out;
}

void save_models(const std::filesystem::path& dir, std::span<const PeriodModel> models) {
    std::filesystem::create_directories(dir);
    for (const auto& m : models) m.model.save_arpa(dir / (m.bin.label + ".arpa"));
}

std::vector<PeriodModel> load_models(const std::filesystem::path& dir, std::span<const PeriodBin> bins) {
    std::vector<PeriodModel> out;
    for (const auto& b : bins) {
        const auto path = dir / (b.label + ".arpa");
        if (std::filesystem::exists(path)) out.push_back(PeriodModel{b, lm::NgramModel::load_arpa(path)});
    }
    if (out.empty()) throw MissingArtifactError((dir / "<bin>.arpa").string());
    return out;
}

DateRanking rank_dates(std::span<const PeriodModel> models, const Document& doc, bool use_lemmas) {
    const auto sents = doc.sentences(use_lemmas);
    DateRanking r{doc.meta.doc_id, {}};
    r.ranked.reserve(models.size());
    for (const auto& m : models) r.ranked.push_back(RankedBin{m.bin, lm::perplexity(m.model, sents)});
    std::sort(r.ranked.begin(), r.ranked.end(), [](const RankedBin& a, const RankedBin& b) {
        if (a.perplexity != b.perplexity) return a.perplexity < b.perplexity;
        return earlier(a.bin, b.bin);
    });
    return r;
}

std::vector<DateRanking> rank_all(std::span<const PeriodModel> models, std::span<const Document> docs,
                                  bool use_lemmas, unsigned workers) {
    std::vector<std::optional<DateRanking>> tmp(docs.size());
    parallel_for(docs.size(), workers, [&](std::size_t i) { tmp[i] = rank_dates(models, docs[i], use_lemmas); });
    std::vector<DateRanking> out;
    out.reserve(tmp.size());
    for (auto& r : tmp) out.push_back(std::move(*r));
    return out;
}

EvalReport evaluate(std::span<const DateRanking> rankings, const std::map<DocumentId, PeriodBin>& gold) {
    if (rankings.empty()) throw DomainError("no rankings to evaluate");
    if (rankings.size() != gold.size()) throw DomainError("ranked documents and gold labels differ in number");
    EvalReport rep;
    for (const auto& rb : rankings.front().ranked) rep.bins.push_back(rb.bin);
    std::sort(rep.bins.begin(), rep.bins.end(), earlier);
    const std::size_t nb = rep.bins.size();
    auto index_of = [&](const PeriodBin& b) -> std::size_t {
        for (std::size_t i = 0; i < nb; ++i)
            if (rep.bins[i] == b) return i;
        throw DomainError("bin " + b.label + " was not ranked");
    };
    rep.confusion.assign(nb, std::vector<std::size_t>(nb, 0));
    std::vector<std::size_t> hits_at(nb + 1, 0);  // gold found at rank r (1-based)
    std::vector<std::size_t> gold_count(nb, 0);
    std::set<DocumentId> seen;
    for (const auto& r : rankings) {
        if (!seen.insert(r.doc_id).second) throw DomainError("document " + r.doc_id.str() + " ranked twice");
        auto g = gold.find(r.doc_id);
        if (g == gold.end()) throw DomainError("document " + r.doc_id.str() + " has no gold bin");
        if (r.ranked.size() != nb) throw DomainError("document " + r.doc_id.str() + " ranked a different bin set");
        const std::size_t gi = index_of(g->second);
        ++gold_count[gi];
        rep.confusion[gi][index_of(r.ranked.front().bin)]++;
        for (std::size_t k = 0; k < nb; ++k)
            if (r.ranked[k].bin == g->second) ++hits_at[k + 1];
    }
    rep.test_count = rankings.size();
    std::size_t cumulative = 0;
    for (std::size_t k = 1; k <= nb; ++k) {
        cumulative += hits_at[k];
        rep.accuracy_at_k.push_back(100.0 * double(cumulative) / double(rep.test_count));
    }
    rep.random_baseline = 100.0 / double(nb);
    rep.majority_baseline =
        100.0 * double(*std::max_element(gold_count.begin(), gold_count.end())) / double(rep.test_count);
    return rep;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json acc = nlohmann::json::array();
    for (std::size_t k = 0; k < report.accuracy_at_k.size(); ++k)
        acc.push_back({{"k", k + 1}, {"accuracy", report.accuracy_at_k[k]}});
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& b : report.bins) bins.push_back(bin_json(b));
    return {{"bins", bins},
            {"test_count", report.test_count},
            {"accuracy_at_k", acc},
            {"random_baseline", report.random_baseline},
            {"majority_baseline", report.majority_baseline}};
}

std::string confusion_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "true\\predicted";
    for (const auto& b : report.bins) out << ',' << csv_field(b.label);
    out << '\n';
    for (std::size_t i = 0; i < report.bins.size(); ++i) {
        out << csv_field(report.bins[i].label);
        for (auto c : report.confusion[i]) out << ',' << c;
        out << '\n';
    }
    return out.str();
}

std::vector<AutoDateResult> autodate(std::span<const PeriodModel> models, std::span<const Document> docs,
                                     std::size_t top_n, bool use_lemmas, unsigned workers) {
    if (models.empty()) throw DomainError("autodate needs at least one trained model");
    auto rankings = rank_all(models, docs, use_lemmas, workers);
    std::vector<AutoDateResult> out;
    out.reserve(rankings.size());
    for (auto& r : rankings) {
        AutoDateResult a{r.doc_id, {}, 1.0};
        if (r.ranked.size() >= 2) a.confusion_index = r.ranked[0].perplexity / r.ranked[1].perplexity;
        r.ranked.resize(std::min(top_n, r.ranked.size()));
        a.ranked = std::move(r.ranked);
        out.push_back(std::move(a));
    }
    std::sort(out.begin(), out.end(), [](const AutoDateResult& a, const AutoDateResult& b) {
        if (a.confusion_index != b.confusion_index) return a.confusion_index < b.confusion_index;
        return a.doc_id < b.doc_id;
    });
    return out;
}

void apply_autodate(std::span<Document> docs, std::span<const AutoDateResult> results) {
    std::map<DocumentId, const AutoDateResult*> by_id;
    for (const auto& r : results) by_id.emplace(r.doc_id, &r);
    for (auto& d : docs) {
        auto it = by_id.find(d.meta.doc_id);
        if (it == by_id.end() || it->second->ranked.empty()) continue;
        if (d.meta.dating_status == DatingStatus::Dated) continue;
        d.meta.dating_status = DatingStatus::AutoDated;
        d.meta.auto_bin = it->second->ranked.front().bin;
    }
}

nlohmann::json to_json(const AutoDateResult& result) {
    nlohmann::json ranked = nlohmann::json::array();
    for (const auto& rb : result.ranked) ranked.push_back({{"bin", rb.bin.label}, {"perplexity", rb.perplexity}});
    return {{"doc_id", result.doc_id.str()}, {"ranked", ranked}, {"confusion_index", result.confusion_index}};
}

}  // namespace diachron::dating
