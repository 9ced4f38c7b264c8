#include "diachron/lm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "diachron/error.hpp"

namespace diachron::lm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// ARPA convention for log10(0).
constexpr double kArpaZero = -99.0;

std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

NgramKey prefix_of(const NgramKey& k) {
    NgramKey p = k;
    p.size = static_cast<std::uint8_t>(k.size - 1);
    return p;
}

NgramKey suffix_of(const NgramKey& k) {
    NgramKey s;
    s.size = static_cast<std::uint8_t>(k.size - 1);
    std::copy(k.ids.begin() + 1, k.ids.begin() + k.size, s.ids.begin());
    return s;
}

struct ContextStats {
    double total = 0;
    std::array<std::size_t, 3> n{};  // adjusted counts == 1, == 2, >= 3
};

using CountTable = std::unordered_map<NgramKey, std::uint64_t, NgramKeyHash>;

std::string format_double(double v) {
    if (std::isinf(v) && v < 0) return "-99";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("cannot format log-probability");
    return std::string(buf, p);
}

double parse_double(std::string_view s, std::size_t lineno) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError("bad number '" + std::string(s) + "'", lineno);
    return v <= kArpaZero ? kNegInf : v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace

std::size_t NgramKeyHash::operator()(const NgramKey& k) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ k.size;
    for (std::uint8_t i = 0; i < k.size; ++i) h = mix(h ^ (k.ids[i] + 0x632be59bd9b4e019ULL));
    return static_cast<std::size_t>(h);
}

NgramKey make_key(std::span<const WordId> ids) {
    if (ids.size() > static_cast<std::size_t>(kMaxOrder)) throw DomainError("n-gram longer than kMaxOrder");
    NgramKey k;
    k.size = static_cast<std::uint8_t>(ids.size());
    std::copy(ids.begin(), ids.end(), k.ids.begin());
    return k;
}

double LogProbs::perplexity() const {
    if (count == 0) throw DomainError("perplexity of an empty token sequence");
    if (std::isinf(log10_sum)) throw DomainError("text contains a zero-probability event");
    return std::pow(10.0, -log10_sum / double(count));
}

WordId NgramModel::id_of(std::string_view word) const {
    auto it = ids_.find(std::string(word));
    if (it != ids_.end()) return it->second;
    return has_unk_ ? ids_.at(std::string(kUnk)) : npos;
}

std::vector<WordId> NgramModel::predictable() const {
    std::vector<WordId> out;
    for (WordId i = 0; i < words_.size(); ++i)
        if (words_[i] != kBos) out.push_back(i);
    return out;
}

void NgramModel::index_words() {
    ids_.clear();
    for (WordId i = 0; i < words_.size(); ++i) ids_.emplace(words_[i], i);
}

std::vector<WordId> NgramModel::to_ids(std::span<const std::string> sentence) const {
    std::vector<WordId> out;
    out.reserve(sentence.size() + 2);
    if (boundaries_) out.push_back(ids_.at(std::string(kBos)));
    for (const auto& w : sentence) out.push_back(id_of(w));
    if (boundaries_) out.push_back(ids_.at(std::string(kEos)));
    return out;
}

double NgramModel::log10_prob(std::span<const WordId> context, WordId w) const {
    if (w == npos) return kNegInf;
    const std::size_t ctx_len = std::min<std::size_t>(context.size(), static_cast<std::size_t>(order_ - 1));
    const auto ctx = context.subspan(context.size() - ctx_len);
    double backoff = 0.0;
    for (std::size_t len = ctx_len + 1; len-- > 0;) {
        NgramKey key;
        key.size = static_cast<std::uint8_t>(len + 1);
        std::copy(ctx.end() - static_cast<std::ptrdiff_t>(len), ctx.end(), key.ids.begin());
        key.ids[len] = w;
        const auto& tab = tables_[len];
        if (auto it = tab.find(key); it != tab.end()) return backoff + it->second.log10_prob;
        if (len > 0) {
            const auto& ctab = tables_[len - 1];
            if (auto c = ctab.find(prefix_of(key)); c != ctab.end() && c->second.has_bow)
                backoff += c->second.log10_bow;
        }
    }
    return kNegInf;
}

LogProbs NgramModel::score_sentence(std::span<const std::string> sentence) const {
    const auto ids = to_ids(sentence);
    LogProbs lp;
    const std::size_t first = boundaries_ ? 1 : 0;
    for (std::size_t j = first; j < ids.size(); ++j) {
        lp.log10_sum += log10_prob(std::span(ids).first(j), ids[j]);
        ++lp.count;
    }
    return lp;
}

LogProbs NgramModel::score(std::span<const Sentence> sentences) const {
    LogProbs total;
    for (const auto& s : sentences) total += score_sentence(s);
    return total;
}

double perplexity(const NgramModel& model, std::span<const Sentence> sentences) {
    std::size_t tokens = 0;
    for (const auto& s : sentences) tokens += s.size();
    if (tokens == 0) throw DomainError("perplexity of an empty token sequence");
    return model.score(sentences).perplexity();
}

std::vector<std::string> vocabulary_cutoff(std::span<const Sentence> sentences, std::size_t min_count) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& s : sentences)
        for (const auto& w : s) ++counts[w];
    std::vector<std::string> out;
    for (const auto& [w, c] : counts)
        if (c >= min_count) out.push_back(w);
    return out;
}

NgramModel train_lm(std::span<const Sentence> sentences, const TrainOptions& options) {
    if (options.order < 1 || options.order > kMaxOrder)
        throw DomainError("language model order must be in 1.." + std::to_string(kMaxOrder));
    std::map<std::string, std::uint64_t> word_counts;
    std::size_t longest = 0;
    for (const auto& s : sentences) {
        for (const auto& w : s) ++word_counts[w];
        longest = std::max(longest, s.size());
    }
    if (word_counts.empty()) throw DomainError("cannot train a language model on empty text");

    NgramModel m;
    m.boundaries_ = options.sentence_boundaries;
    const bool kn = options.smoothing == Smoothing::KneserNey;
    std::set<std::string> keep;
    if (!options.vocabulary.empty()) {
        keep.insert(options.vocabulary.begin(), options.vocabulary.end());
    } else {
        for (const auto& [w, c] : word_counts)
            if (c >= options.min_count) keep.insert(w);
    }
    keep.erase(std::string(kUnk));
    keep.erase(std::string(kBos));
    keep.erase(std::string(kEos));
    bool any_oov = false;
    for (const auto& [w, c] : word_counts) any_oov |= !keep.count(w);
    m.has_unk_ = kn || any_oov;
    if (m.has_unk_) m.words_.emplace_back(kUnk);
    if (m.boundaries_) {
        m.words_.emplace_back(kBos);
        m.words_.emplace_back(kEos);
    }
    m.words_.insert(m.words_.end(), keep.begin(), keep.end());
    m.index_words();

    const std::size_t padded = longest + (m.boundaries_ ? 2 : 0);
    m.order_ = static_cast<int>(std::min<std::size_t>(options.order, padded));
    if (m.order_ < options.order) {
        m.warnings_.push_back("training text supports at most order " + std::to_string(m.order_) +
                              "; requested order " + std::to_string(options.order) + " reduced");
    }
    const int N = m.order_;

    std::vector<CountTable> raw(N);
    std::vector<CountTable> at_start(N);  // occurrences with no left neighbour
    for (const auto& s : sentences) {
        const auto ids = m.to_ids(s);
        const std::size_t first = m.boundaries_ ? 1 : 0;
        for (std::size_t j = first; j < ids.size(); ++j) {
            for (int n = 1; n <= N && static_cast<std::size_t>(n) <= j + 1; ++n) {
                const std::size_t start = j + 1 - n;
                const auto key = make_key(std::span(ids).subspan(start, n));
                ++raw[n - 1][key];
                if (start == 0) ++at_start[n - 1][key];
            }
        }
    }

    // Adjusted counts: raw at the top order (and everywhere without smoothing),
    // otherwise distinct left extensions plus sentence-initial occurrences.
    std::vector<CountTable> adjusted(N);
    for (int n = 1; n <= N; ++n) {
        if (!kn || n == N) {
            adjusted[n - 1] = raw[n - 1];
            continue;
        }
        auto& adj = adjusted[n - 1];
        for (const auto& [key, c] : raw[n]) ++adj[suffix_of(key)];
        for (const auto& [key, c] : at_start[n - 1]) adj[key] += c;
    }
    raw.clear();
    at_start.clear();

    if (kn) {
        m.discounts_.resize(N);
        for (int n = 1; n <= N; ++n) {
            std::array<double, 5> coc{};
            for (const auto& [key, c] : adjusted[n - 1])
                if (c >= 1 && c <= 4) ++coc[c];
            const double y = coc[1] + 2 * coc[2] > 0 ? coc[1] / (coc[1] + 2 * coc[2]) : 0.0;
            std::array<double, 3> d{};
            bool ok = coc[1] > 0 && coc[2] > 0 && coc[3] > 0 && coc[4] > 0;
            if (ok) {
                d[0] = 1 - 2 * y * coc[2] / coc[1];
                d[1] = 2 - 3 * y * coc[3] / coc[2];
                d[2] = 3 - 4 * y * coc[4] / coc[3];
                for (int k = 0; k < 3; ++k) ok = ok && d[k] > 0 && d[k] <= k + 1;
            }
            if (!ok) d.fill(options.fallback_discount);
            m.discounts_[n - 1] = d;
        }
    }
    auto discount = [&](int n, std::uint64_t c) {
        if (c == 0) return 0.0;
        return m.discounts_[n - 1][std::min<std::uint64_t>(c, 3) - 1];
    };

    std::vector<std::unordered_map<NgramKey, ContextStats, NgramKeyHash>> contexts(N);
    for (int n = 1; n <= N; ++n) {
        for (const auto& [key, c] : adjusted[n - 1]) {
            auto& st = contexts[n - 1][prefix_of(key)];
            st.total += double(c);
            if (c >= 1) ++st.n[std::min<std::uint64_t>(c, 3) - 1];
        }
    }
    auto gamma = [&](int n, const ContextStats& st) {
        const auto& d = m.discounts_[n - 1];
        return (d[0] * st.n[0] + d[1] * st.n[1] + d[2] * st.n[2]) / st.total;
    };

    m.tables_.assign(N, {});
    const auto vocab = m.predictable();
    {
        const ContextStats& st = contexts[0][NgramKey{}];
        const double uniform = kn ? gamma(1, st) / double(vocab.size()) : 0.0;
        for (WordId w : vocab) {
            const NgramKey key = make_key(std::span(&w, 1));
            auto it = adjusted[0].find(key);
            const std::uint64_t c = it == adjusted[0].end() ? 0 : it->second;
            const double p = kn ? (double(c) - discount(1, c)) / st.total + uniform : double(c) / st.total;
            if (p > 0) m.tables_[0][key].log10_prob = std::log10(p);
        }
        if (m.boundaries_) {
            const WordId bos = m.ids_.at(std::string(kBos));
            m.tables_[0][make_key(std::span(&bos, 1))].log10_prob = kNegInf;
        }
    }
    for (int n = 2; n <= N; ++n) {
        for (const auto& [key, c] : adjusted[n - 1]) {
            const ContextStats& st = contexts[n - 1].at(prefix_of(key));
            double p = 0;
            if (kn) {
                const auto& lower = m.tables_[n - 2].at(suffix_of(key));
                p = (double(c) - discount(n, c)) / st.total + gamma(n, st) * std::pow(10.0, lower.log10_prob);
            } else {
                p = double(c) / st.total;
            }
            m.tables_[n - 1][key].log10_prob = std::log10(p);
        }
    }
    for (int n = 1; n < N; ++n) {
        for (const auto& [ctx, st] : contexts[n]) {
            auto it = m.tables_[n - 1].find(ctx);
            if (it == m.tables_[n - 1].end()) continue;
            it->second.has_bow = true;
            it->second.log10_bow = kn ? std::log10(gamma(n + 1, st)) : 0.0;
        }
    }
    return m;
}

void NgramModel::write_arpa(std::ostream& out) const {
    out << "\n\\data\\\n";
    for (int n = 1; n <= order_; ++n) out << "ngram " << n << "=" << tables_[n - 1].size() << "\n";
    for (int n = 1; n <= order_; ++n) {
        out << "\n\\" << n << "-grams:\n";
        std::vector<std::pair<std::vector<std::string_view>, const Entry*>> rows;
        rows.reserve(tables_[n - 1].size());
        for (const auto& [key, e] : tables_[n - 1]) {
            std::vector<std::string_view> ws;
            for (auto id : key.view()) ws.push_back(words_[id]);
            rows.emplace_back(std::move(ws), &e);
        }
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [ws, e] : rows) {
            out << format_double(e->log10_prob) << '\t';
            for (std::size_t i = 0; i < ws.size(); ++i) out << (i ? " " : "") << ws[i];
            if (e->has_bow) out << '\t' << format_double(e->log10_bow);
            out << '\n';
        }
    }
    out << "\n\\end\\\n";
}

void NgramModel::save_arpa(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_arpa(out);
}

NgramModel NgramModel::read_arpa(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };
    while (next() && line != "\\data\\") {}
    if (line != "\\data\\") throw ParseError("no \\data\\ section", lineno);
    std::vector<std::size_t> declared;
    while (next() && line.rfind("ngram ", 0) == 0) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("bad ngram count line", lineno);
        const int n = std::stoi(line.substr(6, eq - 6));
        if (n != static_cast<int>(declared.size()) + 1) throw ParseError("ngram counts out of order", lineno);
        declared.push_back(std::stoull(line.substr(eq + 1)));
    }
    if (declared.empty() || declared.size() > static_cast<std::size_t>(kMaxOrder))
        throw ParseError("unsupported n-gram order", lineno);

    NgramModel m;
    m.boundaries_ = false;
    m.order_ = static_cast<int>(declared.size());
    std::vector<std::vector<std::pair<std::vector<std::string>, Entry>>> sections(m.order_);
    int current = 0;
    bool ended = false;
    while (next()) {
        if (line.empty()) continue;
        if (line == "\\end\\") {
            ended = true;
            break;
        }
        if (line.front() == '\\') {
            const auto dash = line.find("-grams:");
            if (dash == std::string::npos) throw ParseError("unknown section '" + line + "'", lineno);
            current = std::stoi(line.substr(1, dash - 1));
            if (current < 1 || current > m.order_) throw ParseError("section order out of range", lineno);
            continue;
        }
        if (current == 0) throw ParseError("n-gram line outside a section", lineno);
        const auto fields = split_ws(line);
        const std::size_t n = static_cast<std::size_t>(current);
        if (fields.size() != n + 1 && fields.size() != n + 2) throw ParseError("wrong field count", lineno);
        Entry e;
        e.log10_prob = parse_double(fields[0], lineno);
        if (fields.size() == n + 2) {
            e.has_bow = true;
            e.log10_bow = parse_double(fields[n + 1], lineno);
        }
        std::vector<std::string> ws;
        for (std::size_t i = 1; i <= n; ++i) ws.emplace_back(fields[i]);
        sections[current - 1].emplace_back(std::move(ws), e);
    }
    if (!ended) throw ParseError("missing \\end\\", lineno);
    for (int n = 1; n <= m.order_; ++n)
        if (sections[n - 1].size() != declared[n - 1])
            throw ParseError("section " + std::to_string(n) + " has " + std::to_string(sections[n - 1].size()) +
                                 " entries, header declares " + std::to_string(declared[n - 1]),
                             lineno);

    std::vector<std::string> others;
    for (const auto& [ws, e] : sections[0]) {
        if (ws[0] == kUnk) m.has_unk_ = true;
        else if (ws[0] == kBos) m.boundaries_ = true;
        else if (ws[0] != kEos) others.push_back(ws[0]);
    }
    std::sort(others.begin(), others.end());
    if (m.has_unk_) m.words_.emplace_back(kUnk);
    if (m.boundaries_) {
        m.words_.emplace_back(kBos);
        m.words_.emplace_back(kEos);
    }
    for (auto& w : others) m.words_.push_back(std::move(w));
    m.index_words();

    m.tables_.assign(m.order_, {});
    for (int n = 1; n <= m.order_; ++n) {
        for (const auto& [ws, e] : sections[n - 1]) {
            std::vector<WordId> ids;
            for (const auto& w : ws) {
                auto it = m.ids_.find(w);
                if (it == m.ids_.end()) throw ParseError("word '" + w + "' missing from unigrams", lineno);
                ids.push_back(it->second);
            }
            m.tables_[n - 1][make_key(ids)] = e;
        }
    }
    return m;
}

NgramModel NgramModel::load_arpa(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError(path.string());
    return read_arpa(in);
}

}  // namespace diachron::lm
