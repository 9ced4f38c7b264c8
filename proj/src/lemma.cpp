#include "diachron/lemma.hpp"

#include <array>
#include <fstream>
#include <unordered_set>

#include "diachron/error.hpp"
#include "diachron/utf8.hpp"

namespace diachron {
namespace {

// Normalized forms: ta marbuta has already become ha, alif variants are bare.
const std::array<std::u32string_view, 6> kArticlePrefixes = {
    U"وال",  // wal-
    U"بال",  // bil-
    U"كال",  // kal-
    U"فال",  // fal-
    U"لل",        // lil-
    U"ال",        // al-
};

const std::array<std::u32string_view, 8> kSuffixes = {
    U"ها",  // -ha
    U"ان",  // -an
    U"ات",  // -at
    U"ون",  // -un
    U"ين",  // -in
    U"يه",  // -iya
    U"ه",        // -h
    U"ي",        // -i
};

bool is_arabic_letter(char32_t cp) { return cp >= 0x0621 && cp <= 0x064A; }

bool starts_with(std::u32string_view s, std::u32string_view p) {
    return s.size() >= p.size() && s.substr(0, p.size()) == p;
}

bool ends_with(std::u32string_view s, std::u32string_view p) {
    return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

}  // namespace

std::string light_stem(std::string_view word) {
    std::u32string w = utf8::to_u32(word);
    for (char32_t cp : w)
        if (!is_arabic_letter(cp)) return std::string(word);

    std::u32string_view v = w;
    if (v.size() > 3 && v.front() == U'و') v.remove_prefix(1);
    for (auto p : kArticlePrefixes) {
        if (starts_with(v, p) && v.size() - p.size() >= 2) {
            v.remove_prefix(p.size());
            break;
        }
    }
    for (auto s : kSuffixes) {
        if (v.size() > 2 && ends_with(v, s) && v.size() - s.size() >= 2) v.remove_suffix(s.size());
    }
    return utf8::from_u32(v);
}

Document lemmatize(Document doc, const LemmaSource& source) {
    if (const auto* ext = std::get_if<ExternalAnalyzerOutput>(&source)) {
        if (ext->lemmas.size() != doc.tokens.size())
            throw AlignmentError(doc.meta.doc_id.str(), doc.tokens.size(), ext->lemmas.size());
        doc.lemmas = ext->lemmas;
        return doc;
    }
    std::vector<std::string> lemmas;
    lemmas.reserve(doc.tokens.size());
    for (const auto& t : doc.tokens) lemmas.push_back(light_stem(t.surface));
    doc.lemmas = std::move(lemmas);
    return doc;
}

ExternalAnalyzerOutput read_lemma_sidecar(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError(path.string());
    ExternalAnalyzerOutput out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.lemmas.push_back(std::move(line));
    }
    return out;
}

void write_lemma_sidecar(const std::filesystem::path& path, std::span<const std::string> lemmas) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& l : lemmas) out << l << '\n';
}

VocabStats vocab_stats(std::span<const Document> corpus) {
    std::unordered_set<std::string> words;
    std::unordered_set<std::string> lemmas;
    for (const auto& doc : corpus) {
        for (const auto& t : doc.tokens) words.insert(t.surface);
        if (doc.lemmas)
            for (const auto& l : *doc.lemmas) lemmas.insert(l);
    }
    return {words.size(), lemmas.size()};
}

}  // namespace diachron
