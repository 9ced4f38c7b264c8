#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"

#include "diachron/cli.hpp"
#include "json.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace diachron;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("diachron_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const std::vector<std::string> kPipeline{"ingest",    "normalize",  "lemmatize", "reuse-boilerplate",
                                         "reuse-index", "reuse-match", "date-train", "date-eval"};

// Runs every stage; returns the stderr of the first failing one.
std::string run_pipeline(const fs::path& src, const fs::path& out, const std::string& workers) {
    auto stage = [&](std::vector<std::string> args) -> std::string {
        args.insert(args.end(), {"--source", src.string(), "--output", out.string(), "--workers", workers});
        const auto r = run(args);
        return r.code == 0 ? "" : args.front() + ": " + r.err;
    };
    for (const auto& s : kPipeline)
        if (auto e = stage({s}); !e.empty()) return e;
    for (auto args : std::vector<std::vector<std::string>>{{"date-train", "--scope", "all"},
                                                           {"date-auto"},
                                                           {"lifespan"},
                                                           {"concord", "--query", "kitab"},
                                                           {"counts"},
                                                           {"report"}})
        if (auto e = stage(args); !e.empty()) return e;
    return "";
}

std::map<std::string, std::string> snapshot(const fs::path& dir, bool skip_run_json) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), dir).generic_string();
        if (skip_run_json && rel == "run.json") continue;
        files[rel] = slurp(e.path());
    }
    return files;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("full pipeline on a synthetic source tree") {
    const auto root = scratch("pipeline");
    const auto fx = synth::write_source_corpus(root / "src", 21);
    const auto out = root / "out";
    REQUIRE(run_pipeline(root / "src", out, "2") == "");

    for (const char* f : {"corpus/metadata.jsonl", "duplicates.jsonl", "conflicts.jsonl", "normalize.json",
                          "vocab_stats.json", "boilerplate.jsonl", "boilerplate_summary.json", "index.bin",
                          "matches.jsonl", "summary.json", "split.json", "eval.json", "confusion.csv",
                          "autodate.jsonl", "lifespans.csv", "lifespan_hist.csv", "lifespan_stats.json",
                          "concordance.csv", "period_counts.csv", "report.md", "run.json"})
        CHECK_MESSAGE(fs::exists(out / f), f);

    const auto dups = slurp(out / "duplicates.jsonl");
    CHECK(dups.find("dup-a") != std::string::npos);
    CHECK(dups.find("dup-b") != std::string::npos);

    bool quote_found = false;
    std::istringstream matches(slurp(out / "matches.jsonl"));
    for (std::string line; std::getline(matches, line);) {
        const auto m = json::parse(line);
        const auto a = m.at("doc_a").get<std::string>(), b = m.at("doc_b").get<std::string>();
        if ((a == "q-dst" && b == "q-src") || (a == "q-src" && b == "q-dst")) {
            quote_found = true;
            CHECK(m.at("length").get<std::size_t>() >= fx.quote.size());
        }
    }
    CHECK(quote_found);

    const auto eval = json::parse(slurp(out / "eval.json"));
    const auto& acc = eval.at("accuracy_at_k");
    REQUIRE(acc.size() == 14);
    CHECK(acc.back().at("accuracy").get<double>() == 100.0);
    CHECK(acc.front().at("accuracy").get<double>() >= 95.0);
    for (std::size_t k = 1; k < acc.size(); ++k)
        CHECK(acc[k].at("accuracy").get<double>() >= acc[k - 1].at("accuracy").get<double>());

    std::istringstream autodated(slurp(out / "autodate.jsonl"));
    std::size_t n_auto = 0;
    for (std::string line; std::getline(autodated, line); ++n_auto) {
        const auto row = json::parse(line);
        CHECK(row.at("ranked").size() == 3);
        const auto id = row.at("doc_id").get<std::string>();
        if (id.rfind("undated", 0) == 0) {
            const auto bin = std::stoul(id.substr(7));
            CHECK(row.at("ranked")[0].at("bin").get<std::string>() == dating::default_bins()[bin].label);
        }
    }
    CHECK(n_auto == 5);

    const auto lifespans = slurp(out / "lifespans.csv");
    CHECK(lifespans.rfind("lemma,first_h,last_h,span,doc_first,doc_last\n", 0) == 0);
    const auto report = slurp(out / "report.md");
    CHECK(report.find("COHA") != std::string::npos);

    const auto runs = json::parse(slurp(out / "run.json"));
    CHECK(runs.contains("ingest"));
    CHECK(runs.contains("report"));
    CHECK(runs.at("date-train:split").at("dating").at("scope") == "split");
    CHECK(runs.at("date-train:all").at("dating").at("scope") == "all");
    fs::remove_all(root);
}

TEST_CASE("reruns and worker counts give byte-identical outputs") {
    const auto root = scratch("determinism");
    synth::write_source_corpus(root / "src", 22, 6, 4, 300);
    REQUIRE(run_pipeline(root / "src", root / "a", "1") == "");
    const auto first = snapshot(root / "a", false);
    REQUIRE(run_pipeline(root / "src", root / "a", "1") == "");
    CHECK(snapshot(root / "a", false) == first);

    REQUIRE(run_pipeline(root / "src", root / "b", "3") == "");
    const auto a = snapshot(root / "a", true), b = snapshot(root / "b", true);
    REQUIRE(a.size() == b.size());
    for (const auto& [name, bytes] : a) CHECK_MESSAGE(b.at(name) == bytes, name);
    fs::remove_all(root);
}

TEST_CASE("missing prerequisites name the artifact") {
    const auto root = scratch("missing");
    synth::write_source_corpus(root / "src", 23, 3, 2, 100);
    const auto out = (root / "out").string();
    REQUIRE(run({"ingest", "--source", (root / "src").string(), "--output", out}).code == 0);
    auto r = run({"reuse-match", "--output", out});
    CHECK(r.code == 1);
    CHECK(r.err.find("index.bin") != std::string::npos);
    r = run({"date-eval", "--output", out});
    CHECK(r.code == 1);
    CHECK(r.err.find("split.json") != std::string::npos);
    r = run({"concord", "--output", out});
    CHECK(r.code == 1);
    r = run({"report", "--output", (root / "empty").string()});
    CHECK(r.code == 1);
    fs::remove_all(root);
}

TEST_CASE("argument errors") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"counts", "--no-such-flag"}).code == 1);
    CHECK(run({"counts", "--workers", "0"}).code == 1);
    const auto help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("reuse-match") != std::string::npos);
    CHECK(run({"ingest", "--output", (fs::temp_directory_path() / "diachron_cli_nosrc").string()}).code == 1);
}

TEST_CASE("config round trip and strictness") {
    cli::PipelineConfig c;
    c.workers = 4;
    c.seed = 9;
    c.dating.order = 3;
    c.dating.exclude_genres = {"dictionary", "lexicon"};
    c.analytics.query = "kitab";
    const auto j = cli::to_json(c);
    CHECK(cli::to_json(cli::config_from_json(j)) == j);

    const auto root = scratch("config");
    auto bad = j;
    bad["unexpected_key"] = 1;
    std::ofstream(root / "bad.json") << bad.dump();
    const auto r = run({"counts", "--config", (root / "bad.json").string(), "--output", (root / "o").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("unexpected_key") != std::string::npos);

    auto invalid = j;
    invalid["dating"]["order"] = 0;
    std::ofstream(root / "invalid.json") << invalid.dump();
    CHECK(run({"counts", "--config", (root / "invalid.json").string()}).code == 1);
    std::ofstream(root / "broken.json") << "{ not json";
    CHECK(run({"counts", "--config", (root / "broken.json").string()}).code == 1);
    fs::remove_all(root);
}

}  // TEST_SUITE
