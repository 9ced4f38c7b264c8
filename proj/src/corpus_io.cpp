#include "diachron/corpus_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "diachron/calendar.hpp"
#include "diachron/error.hpp"
#include "diachron/lemma.hpp"
#include "diachron/parallel.hpp"

namespace diachron {

using nlohmann::json;

json to_json(const Metadata& m) {
    json j;
    j["doc_id"] = m.doc_id.str();
    j["title"] = m.title;
    j["author"] = m.author;
    j["author_code"] = m.author_code ? json(*m.author_code) : json(nullptr);
    j["dod_hijri"] = m.dod_hijri ? json(*m.dod_hijri) : json(nullptr);
    j["dod_ce"] = m.dod_ce ? json(*m.dod_ce) : json(nullptr);
    j["genre"] = m.genre ? json(*m.genre) : json(nullptr);
    j["word_count"] = m.word_count;
    j["dating_status"] = to_string(m.dating_status);
    if (m.auto_bin) {
        j["auto_bin"] = {{"label", m.auto_bin->label},
                         {"start_h", m.auto_bin->start_h},
                         {"end_h", m.auto_bin->end_h}};
    }
    return j;
}

namespace {

template <typename T>
std::optional<T> opt(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

}  // namespace

Metadata metadata_from_json(const json& j) {
    Metadata m{DocumentId(j.at("doc_id").get<std::string>())};
    m.title = j.value("title", "");
    m.author = j.value("author", "");
    m.author_code = opt<std::int64_t>(j, "author_code");
    m.genre = opt<std::string>(j, "genre");
    m.word_count = j.value("word_count", std::size_t{0});
    m.dod_hijri = opt<int>(j, "dod_hijri");
    if (m.dod_hijri) {
        m.dod_ce = hijri_to_ce(*m.dod_hijri);
        m.dating_status = DatingStatus::Dated;
    } else {
        m.dod_ce = opt<int>(j, "dod_ce");
        m.dating_status = DatingStatus::Undated;
        if (j.contains("dating_status") &&
            dating_status_from_string(j.at("dating_status").get<std::string>()) == DatingStatus::AutoDated &&
            j.contains("auto_bin")) {
            const auto& b = j.at("auto_bin");
            m.auto_bin = PeriodBin{b.at("label").get<std::string>(), b.at("start_h").get<int>(),
                                   b.at("end_h").get<int>()};
            m.dating_status = DatingStatus::AutoDated;
        }
    }
    return m;
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError(path.string());
    std::vector<json> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            rows.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ParseError(path.string() + ": " + e.what(), lineno);
        }
    }
    return rows;
}

void write_jsonl(const std::filesystem::path& path, std::span<const json> rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& r : rows) out << r.dump() << '\n';
}

std::vector<Metadata> read_metadata_jsonl(const std::filesystem::path& path) {
    std::vector<Metadata> out;
    for (const auto& j : read_jsonl(path)) out.push_back(metadata_from_json(j));
    return out;
}

void write_metadata_jsonl(const std::filesystem::path& path, std::span<const Metadata> records) {
    std::vector<json> rows;
    rows.reserve(records.size());
    for (const auto& m : records) rows.push_back(to_json(m));
    write_jsonl(path, rows);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError(path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Document> load_corpus(const std::filesystem::path& dir, const LoadOptions& options) {
    auto metas = read_metadata_jsonl(dir / "metadata.jsonl");
    std::sort(metas.begin(), metas.end(),
              [](const Metadata& a, const Metadata& b) { return a.doc_id < b.doc_id; });
    for (std::size_t i = 1; i < metas.size(); ++i)
        if (metas[i].doc_id == metas[i - 1].doc_id)
            throw DomainError("duplicate document id '" + metas[i].doc_id.str() + "' in metadata.jsonl");

    const auto lemma_dir = options.lemma_dir.empty() ? dir : options.lemma_dir;
    std::vector<std::optional<Document>> slots(metas.size());
    parallel_for(metas.size(), options.workers, [&](std::size_t i) {
        const auto& id = metas[i].doc_id.str();
        std::string raw = read_text_file(dir / (id + ".txt"));
        Document doc{metas[i], std::move(raw), {}, std::nullopt};
        doc.tokens = tokenize(normalize_text(doc.raw_text, options.table));
        doc.meta.word_count = doc.tokens.size();
        const auto sidecar = lemma_dir / (id + ".lemmas");
        if (std::filesystem::exists(sidecar)) {
            doc = lemmatize(std::move(doc), read_lemma_sidecar(sidecar));
        } else if (options.require_lemmas) {
            throw MissingArtifactError(sidecar.string());
        }
        slots[i] = std::move(doc);
    });
    std::vector<Document> corpus;
    corpus.reserve(slots.size());
    for (auto& s : slots) corpus.push_back(std::move(*s));
    return corpus;
}

void save_corpus(const std::filesystem::path& dir, std::span<const Document> corpus) {
    std::filesystem::create_directories(dir);
    for (const auto& doc : corpus) write_text_file(dir / (doc.meta.doc_id.str() + ".txt"), doc.raw_text);
    write_metadata_jsonl(dir / "metadata.jsonl", metadata_of(corpus));
}

std::vector<Metadata> metadata_of(std::span<const Document> corpus) {
    std::vector<Metadata> out;
    out.reserve(corpus.size());
    for (const auto& d : corpus) out.push_back(d.meta);
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace diachron
