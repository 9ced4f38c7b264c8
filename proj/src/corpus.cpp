#include "diachron/corpus.hpp"

#include "diachron/calendar.hpp"
#include "diachron/error.hpp"
#include "diachron/normalize.hpp"

namespace diachron {

DocumentId::DocumentId(std::string id) : id_(std::move(id)) {
    if (id_.empty()) throw DomainError("document id must be non-empty");
}

std::string to_string(DatingStatus s) {
    switch (s) {
        case DatingStatus::Dated: return "Dated";
        case DatingStatus::Undated: return "Undated";
        case DatingStatus::AutoDated: return "AutoDated";
    }
    return "Undated";
}

DatingStatus dating_status_from_string(const std::string& s) {
    if (s == "Dated") return DatingStatus::Dated;
    if (s == "Undated") return DatingStatus::Undated;
    if (s == "AutoDated") return DatingStatus::AutoDated;
    throw DomainError("unknown dating status '" + s + "'");
}

void Metadata::set_death_year(int year_h) {
    dod_hijri = year_h;
    dod_ce = hijri_to_ce(year_h);
    dating_status = DatingStatus::Dated;
    auto_bin.reset();
}

Document Document::from_text(Metadata meta, std::string raw) {
    Document doc{std::move(meta), std::move(raw), {}, std::nullopt};
    doc.tokens = tokenize(normalize_text(doc.raw_text));
    doc.meta.word_count = doc.tokens.size();
    return doc;
}

std::optional<int> Document::effective_year(bool include_auto) const {
    if (meta.dating_status == DatingStatus::Dated && meta.dod_hijri) return meta.dod_hijri;
    if (include_auto && meta.dating_status == DatingStatus::AutoDated && meta.auto_bin)
        return meta.auto_bin->midpoint();
    return std::nullopt;
}

const std::string& Document::unit(std::size_t i, bool use_lemmas) const {
    if (use_lemmas && lemmas) return (*lemmas)[i];
    return tokens[i].surface;
}

std::vector<std::vector<std::string>> Document::sentences(bool use_lemmas) const {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> current;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        current.push_back(unit(i, use_lemmas));
        if (tokens[i].sentence_final) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

}  // namespace diachron
