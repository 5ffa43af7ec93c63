#include "topictrace/io.hpp"
#include "topictrace/rng.hpp"
#include "topictrace/series.hpp"
#include "topictrace/tda.hpp"

#include "test_util.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <string>

using namespace topictrace;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(TOPICTRACE_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

int run_cli_capture(const std::string& args, const std::string& sink, std::string& output) {
    const std::string cmd = std::string(TOPICTRACE_BIN) + " " + args + " >" + sink + " 2>&1";
    const int status = std::system(cmd.c_str());
    output = io::read_text_file(sink);
    return WEXITSTATUS(status);
}

struct Workspace {
    fs::path dir;
    Workspace() {
        static int counter = 0;
        dir = fs::temp_directory_path() /
              ("topictrace_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    void write(const std::string& name, const std::string& content) const {
        io::write_text_file_atomic(path(name), content);
    }
};

const char* kGeneratorConfig = R"({
  "date_range": {"start": "2016-01-01", "end": "2016-01-08"},
  "docs_per_day": 12,
  "base_topic_rate": 0.3,
  "target_tag": "storm",
  "topic_lexicons": {
    "storm": ["storm", "thunder", "lightning", "hail", "tempest"],
    "market": ["market", "shares", "trading", "prices", "exchange"],
    "sport": ["match", "goal", "league", "coach", "stadium"]
  },
  "events": [{"date": "2016-01-05", "magnitude": 0.6, "label": "spike"}]
})";

const char* kTrainConfig = R"({
  "epochs": 2,
  "batch_size": 16,
  "encode_length": 24,
  "vocab_min_freq": 1,
  "val_fraction": 0.2,
  "target_tag": "storm"
})";

const char* kSeriesConfig = R"({
  "n_changepoints": 5,
  "weekly_order": 2,
  "yearly_order": 2
})";

long count_rows(const std::string& csv_path) {
    const auto lines = io::split_lines(io::read_text_file(csv_path));
    long rows = 0;
    for (std::size_t i = 1; i < lines.size(); ++i)
        if (!lines[i].empty()) ++rows;
    return rows;
}

// One fixture pipeline shared across cases; each case asserts one stage.
struct Pipeline {
    Workspace ws;
    int synth_rc, train_b_rc, train_a_rc, score_rc;

    Pipeline() {
        ws.write("gen.json", kGeneratorConfig);
        ws.write("train.json", kTrainConfig);
        ws.write("series.json", kSeriesConfig);
        synth_rc = run_cli("--seed 7 synth --config " + ws.path("gen.json") + " --out-dir " +
                           ws.path("run"));
        train_b_rc = run_cli("--seed 7 train --corpus " + ws.path("run/corpus.jsonl") +
                             " --arch modelB --config " + ws.path("train.json") + " --out-dir " +
                             ws.path("run"));
        train_a_rc = run_cli("--seed 7 train --corpus " + ws.path("run/corpus.jsonl") +
                             " --arch modelA --config " + ws.path("train.json") + " --out-dir " +
                             ws.path("run"));
        score_rc = run_cli("--seed 7 score --corpus " + ws.path("run/corpus.jsonl") +
                           " --checkpoint " + ws.path("run/checkpoint_modelB.json") + " --vocab " +
                           ws.path("run/vocab.json") + " --out-dir " + ws.path("run"));
    }
};

const Pipeline& pipeline() {
    static Pipeline p;
    return p;
}

} // namespace

TEST_CASE("synth writes corpus, events and manifest") {
    const auto& p = pipeline();
    REQUIRE(p.synth_rc == 0);
    CHECK(io::file_exists(p.ws.path("run/corpus.jsonl")));
    CHECK(io::file_exists(p.ws.path("run/events.json")));
    CHECK(io::file_exists(p.ws.path("run/manifest_synth.json")));

    const auto manifest = nlohmann::json::parse(io::read_text_file(p.ws.path("run/manifest_synth.json")));
    CHECK(manifest.at("subcommand") == "synth");
    CHECK(manifest.at("seed") == 7);
    CHECK(manifest.at("outputs").contains("corpus.jsonl"));
}

TEST_CASE("synth with a missing config exits 2 and leaves nothing behind") {
    Workspace ws;
    std::string diagnostic;
    CHECK(run_cli_capture("synth --config " + ws.path("absent.json") + " --out-dir " + ws.path("out"),
                          ws.path("stderr.txt"), diagnostic) == 2);
    CHECK(diagnostic.find(ws.path("absent.json")) != std::string::npos);
    CHECK(!fs::exists(ws.path("out")));
    // config parse failure is a usage error
    ws.write("bad.json", "{nope");
    CHECK(run_cli("synth --config " + ws.path("bad.json") + " --out-dir " + ws.path("out")) == 2);
    CHECK(!fs::exists(ws.path("out")));
    CHECK(run_cli("synth") == 2); // missing required flag
}

TEST_CASE("synth is deterministic for a fixed seed") {
    const auto& p = pipeline();
    REQUIRE(p.synth_rc == 0);
    REQUIRE(run_cli("--seed 7 synth --config " + p.ws.path("gen.json") + " --out-dir " +
                    p.ws.path("run_again")) == 0);
    CHECK(io::read_text_file(p.ws.path("run/corpus.jsonl")) ==
          io::read_text_file(p.ws.path("run_again/corpus.jsonl")));
    CHECK(io::read_text_file(p.ws.path("run/manifest_synth.json")) ==
          io::read_text_file(p.ws.path("run_again/manifest_synth.json")));
}

TEST_CASE("train emits a checkpoint and the paper's metric fields") {
    const auto& p = pipeline();
    REQUIRE(p.train_b_rc == 0);
    REQUIRE(p.train_a_rc == 0);
    CHECK(io::file_exists(p.ws.path("run/checkpoint_modelB.json")));
    CHECK(io::file_exists(p.ws.path("run/checkpoint_modelA.json")));
    CHECK(io::file_exists(p.ws.path("run/vocab.json")));

    const auto metrics =
        nlohmann::json::parse(io::read_text_file(p.ws.path("run/metrics_modelB.json")));
    for (const char* field : {"bce_loss", "accuracy", "precision", "recall"})
        CHECK(metrics.contains(field));
    CHECK(metrics.at("history").is_array());
}

TEST_CASE("train on an empty corpus exits 2") {
    Workspace ws;
    ws.write("empty.jsonl", "");
    ws.write("train.json", kTrainConfig);
    CHECK(run_cli("train --corpus " + ws.path("empty.jsonl") + " --arch modelB --config " +
                  ws.path("train.json") + " --out-dir " + ws.path("out")) == 2);
    CHECK(!fs::exists(ws.path("out")));
}

TEST_CASE("score writes one row per document, rerun identical") {
    const auto& p = pipeline();
    REQUIRE(p.score_rc == 0);
    long docs = 0; // jsonl has no header row
    for (const auto& line : io::split_lines(io::read_text_file(p.ws.path("run/corpus.jsonl"))))
        if (!line.empty()) ++docs;
    const long rows = count_rows(p.ws.path("run/scores.csv"));
    CHECK(rows == 96); // 8 days x 12 docs
    CHECK(docs == 96);

    const auto lines = io::split_lines(io::read_text_file(p.ws.path("run/scores.csv")));
    CHECK(lines[0] == "id,published_at,probability");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = io::split_csv_line(lines[i]);
        const double prob = std::stod(fields[2]);
        CHECK(prob > 0.0);
        CHECK(prob < 1.0);
    }

    REQUIRE(run_cli("--seed 7 score --corpus " + p.ws.path("run/corpus.jsonl") + " --checkpoint " +
                    p.ws.path("run/checkpoint_modelB.json") + " --vocab " +
                    p.ws.path("run/vocab.json") + " --out-dir " + p.ws.path("rescore")) == 0);
    CHECK(io::read_text_file(p.ws.path("run/scores.csv")) ==
          io::read_text_file(p.ws.path("rescore/scores.csv")));
}

TEST_CASE("series on flat scores yields a header-only anomaly CSV") {
    Workspace ws;
    ws.write("series.json", kSeriesConfig);
    std::string csv = "id,published_at,probability\n";
    for (int t = 0; t < 60; ++t)
        csv += "d" + std::to_string(t) + "," + format_date(add_days({2016, 1, 1}, t)) + ",0.4\n";
    ws.write("scores.csv", csv);

    REQUIRE(run_cli("series --scores " + ws.path("scores.csv") + " --config " +
                    ws.path("series.json") + " --out-dir " + ws.path("out")) == 0);
    CHECK(io::read_text_file(ws.path("out/anomalies.csv")) ==
          "date,observed,predicted,lower,upper,side\n");

    // outputs parse under their declared schemas
    const auto daily = series::series_from_csv(io::read_text_file(ws.path("out/series.csv")));
    CHECK(daily.length() == 60);
    const auto fit = series::fit_from_json(io::read_text_file(ws.path("out/fit.json")));
    CHECK(fit.sigma < 1e-9);
    const auto scan = test_util::scan_xml(io::read_text_file(ws.path("out/heatmap.svg")));
    CHECK(scan.ok);
    CHECK(scan.tag_counts.at("rect") == 60);
    CHECK(io::file_exists(ws.path("out/weekly_profile.csv")));
    CHECK(io::file_exists(ws.path("out/yearly_profile.csv")));
}

TEST_CASE("detect flags an injected spike date") {
    Workspace ws;
    ws.write("series.json", kSeriesConfig);
    std::string csv = "id,published_at,probability\n";
    for (int t = 0; t < 90; ++t) {
        const double v = t == 40 ? 0.9 : 0.4;
        csv += "d" + std::to_string(t) + "," + format_date(add_days({2016, 1, 1}, t)) + "," +
               io::format_double(v) + "\n";
    }
    ws.write("scores.csv", csv);

    REQUIRE(run_cli("detect --scores " + ws.path("scores.csv") + " --config " +
                    ws.path("series.json") + " --out-dir " + ws.path("out")) == 0);
    const std::string anomalies = io::read_text_file(ws.path("out/anomalies.csv"));
    CHECK(anomalies.find("2016-02-10") != std::string::npos); // day index 40
    CHECK(io::file_exists(ws.path("out/manifest_detect.json")));
}

TEST_CASE("anomaly-side both keeps low-side rows; unknown side exits 2") {
    Workspace ws;
    ws.write("series.json", kSeriesConfig);
    std::string csv = "id,published_at,probability\n";
    for (int t = 0; t < 90; ++t) {
        double v = 0.5;
        if (t == 30) v = 0.95;
        if (t == 60) v = 0.05;
        csv += "d" + std::to_string(t) + "," + format_date(add_days({2016, 1, 1}, t)) + "," +
               io::format_double(v) + "\n";
    }
    ws.write("scores.csv", csv);

    REQUIRE(run_cli("series --scores " + ws.path("scores.csv") + " --config " +
                    ws.path("series.json") + " --anomaly-side both --out-dir " + ws.path("out")) == 0);
    const std::string anomalies = io::read_text_file(ws.path("out/anomalies.csv"));
    CHECK(anomalies.find(",high") != std::string::npos);
    CHECK(anomalies.find(",low") != std::string::npos);

    CHECK(run_cli("series --scores " + ws.path("scores.csv") + " --anomaly-side sideways "
                  "--out-dir " + ws.path("bad")) == 2);
}

TEST_CASE("training modelB with an absent target tag exits 2") {
    const auto& p = pipeline();
    Workspace ws;
    ws.write("train.json", kTrainConfig);
    CHECK(run_cli("train --corpus " + p.ws.path("run/corpus.jsonl") +
                  " --arch modelB --config " + ws.path("train.json") +
                  " --target-tag missingtopic --out-dir " + ws.path("out")) == 2);
    CHECK(!fs::exists(ws.path("out")));
}

TEST_CASE("mapper with threshold 1.0 emits valid empty exports") {
    const auto& p = pipeline();
    REQUIRE(p.train_a_rc == 0);
    REQUIRE(run_cli("mapper --corpus " + p.ws.path("run/corpus.jsonl") + " --model-a " +
                    p.ws.path("run/checkpoint_modelA.json") + " --model-b " +
                    p.ws.path("run/checkpoint_modelB.json") + " --vocab " +
                    p.ws.path("run/vocab.json") + " --threshold 1.0 --out-dir " +
                    p.ws.path("empty_mapper")) == 0);
    const std::string dot = io::read_text_file(p.ws.path("empty_mapper/mapper.dot"));
    CHECK(test_util::check_dot(dot));
    const auto graph =
        tda::graph_from_json(io::read_text_file(p.ws.path("empty_mapper/mapper.json")));
    CHECK(graph.nodes.empty());
    CHECK(graph.edges.empty());
}

TEST_CASE("mapper produces a graph over topic-positive documents") {
    const auto& p = pipeline();
    REQUIRE(run_cli("mapper --corpus " + p.ws.path("run/corpus.jsonl") + " --model-a " +
                    p.ws.path("run/checkpoint_modelA.json") + " --model-b " +
                    p.ws.path("run/checkpoint_modelB.json") + " --vocab " +
                    p.ws.path("run/vocab.json") + " --threshold 0.0 --out-dir " +
                    p.ws.path("full_mapper")) == 0);
    const auto graph =
        tda::graph_from_json(io::read_text_file(p.ws.path("full_mapper/mapper.json")));
    CHECK(!graph.nodes.empty());
    CHECK(test_util::check_dot(io::read_text_file(p.ws.path("full_mapper/mapper.dot"))));

    // rerun is byte-identical
    REQUIRE(run_cli("mapper --corpus " + p.ws.path("run/corpus.jsonl") + " --model-a " +
                    p.ws.path("run/checkpoint_modelA.json") + " --model-b " +
                    p.ws.path("run/checkpoint_modelB.json") + " --vocab " +
                    p.ws.path("run/vocab.json") + " --threshold 0.0 --out-dir " +
                    p.ws.path("full_mapper2")) == 0);
    CHECK(io::read_text_file(p.ws.path("full_mapper/mapper.dot")) ==
          io::read_text_file(p.ws.path("full_mapper2/mapper.dot")));
}

TEST_CASE("series absorbs calendar effects passed via --holidays") {
    Workspace ws;
    ws.write("series.json",
             R"({"n_changepoints": 5, "weekly_order": 2, "yearly_order": 2, "lambda_holiday": 0.01})");
    ws.write("holidays.csv", "name,date\nfiesta,2016-01-15\nfiesta,2016-02-15\n");
    Rng noise(99);
    std::string csv = "id,published_at,probability\n";
    for (int t = 0; t < 75; ++t) {
        const Date d = add_days({2016, 1, 1}, t);
        double v = 0.4 + 0.01 * noise.normal();
        if (format_date(d) == "2016-01-15" || format_date(d) == "2016-02-15") v += 0.3;
        csv += "d" + std::to_string(t) + "," + format_date(d) + "," + io::format_double(v) + "\n";
    }
    ws.write("scores.csv", csv);

    // without the calendar the boosted days stick out as anomalies
    REQUIRE(run_cli("series --scores " + ws.path("scores.csv") + " --config " +
                    ws.path("series.json") + " --out-dir " + ws.path("bare")) == 0);
    CHECK(io::read_text_file(ws.path("bare/anomalies.csv")).find("2016-01-15") !=
          std::string::npos);

    // with it they land on the holiday coefficient instead
    REQUIRE(run_cli("series --scores " + ws.path("scores.csv") + " --config " +
                    ws.path("series.json") + " --holidays " + ws.path("holidays.csv") +
                    " --out-dir " + ws.path("out")) == 0);
    const auto fit = series::fit_from_json(io::read_text_file(ws.path("out/fit.json")));
    REQUIRE(fit.kappa.size() == 1);
    CHECK(fit.kappa[0] > 0.2);
    const std::string anomalies = io::read_text_file(ws.path("out/anomalies.csv"));
    CHECK(anomalies.find("2016-01-15") == std::string::npos);
    CHECK(anomalies.find("2016-02-15") == std::string::npos);
}

TEST_CASE("score with a modelA checkpoint writes one column per tag") {
    const auto& p = pipeline();
    REQUIRE(run_cli("--seed 7 score --corpus " + p.ws.path("run/corpus.jsonl") + " --checkpoint " +
                    p.ws.path("run/checkpoint_modelA.json") + " --vocab " +
                    p.ws.path("run/vocab.json") + " --out-dir " + p.ws.path("score_a")) == 0);
    const auto lines = io::split_lines(io::read_text_file(p.ws.path("score_a/scores.csv")));
    CHECK(lines[0] == "id,published_at,market,sport,storm");
    CHECK(count_rows(p.ws.path("score_a/scores.csv")) == 96);
}

TEST_CASE("mapper --year filters documents by calendar year") {
    const auto& p = pipeline();
    REQUIRE(run_cli("mapper --corpus " + p.ws.path("run/corpus.jsonl") + " --model-a " +
                    p.ws.path("run/checkpoint_modelA.json") + " --model-b " +
                    p.ws.path("run/checkpoint_modelB.json") + " --vocab " +
                    p.ws.path("run/vocab.json") + " --threshold 0.0 --year 2099 --out-dir " +
                    p.ws.path("mapper_none")) == 0);
    CHECK(tda::graph_from_json(io::read_text_file(p.ws.path("mapper_none/mapper.json")))
              .nodes.empty());

    REQUIRE(run_cli("mapper --corpus " + p.ws.path("run/corpus.jsonl") + " --model-a " +
                    p.ws.path("run/checkpoint_modelA.json") + " --model-b " +
                    p.ws.path("run/checkpoint_modelB.json") + " --vocab " +
                    p.ws.path("run/vocab.json") + " --threshold 0.0 --year 2016 --out-dir " +
                    p.ws.path("mapper_2016")) == 0);
    CHECK(!tda::graph_from_json(io::read_text_file(p.ws.path("mapper_2016/mapper.json")))
               .nodes.empty());
}

TEST_CASE("mapper components correspond to the generator's topic groups") {
    Workspace ws;
    ws.write("gen.json", R"({
      "date_range": {"start": "2016-01-01", "end": "2016-01-20"},
      "docs_per_day": 30,
      "base_topic_rate": 0.34,
      "target_tag": "storm",
      "secondary_tag_rate": 0.0,
      "topic_lexicons": {
        "storm": ["storm", "thunder", "lightning", "hail", "tempest"],
        "market": ["market", "shares", "trading", "prices", "exchange"],
        "sport": ["match", "goal", "league", "coach", "stadium"]
      }
    })");
    ws.write("train.json",
             R"({"epochs": 10, "batch_size": 32, "encode_length": 24, "vocab_min_freq": 1,
                 "val_fraction": 0.2, "target_tag": "storm"})");

    REQUIRE(run_cli("--seed 5 synth --config " + ws.path("gen.json") + " --out-dir " +
                    ws.path("run")) == 0);
    for (const char* arch : {"modelA", "modelB"})
        REQUIRE(run_cli("--seed 5 train --corpus " + ws.path("run/corpus.jsonl") + " --arch " +
                        arch + " --config " + ws.path("train.json") + " --out-dir " +
                        ws.path("run")) == 0);
    REQUIRE(run_cli("--seed 5 mapper --corpus " + ws.path("run/corpus.jsonl") + " --model-a " +
                    ws.path("run/checkpoint_modelA.json") + " --model-b " +
                    ws.path("run/checkpoint_modelB.json") + " --vocab " +
                    ws.path("run/vocab.json") + " --threshold 0.0 --out-dir " +
                    ws.path("mp")) == 0);

    // map doc id -> generated topic tag
    std::map<std::string, std::string> topic_of;
    for (const auto& line : io::split_lines(io::read_text_file(ws.path("run/corpus.jsonl")))) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        topic_of[j.at("id").get<std::string>()] = j.at("tags")[0].get<std::string>();
    }

    const auto g = tda::graph_from_json(io::read_text_file(ws.path("mp/mapper.json")));
    REQUIRE(!g.nodes.empty());

    // every node is topic-pure, no edge crosses topics, all topics appear
    std::map<int, std::string> node_topic;
    std::set<std::string> seen_topics;
    for (const auto& node : g.nodes) {
        std::set<std::string> topics;
        for (const auto& id : node.doc_ids) topics.insert(topic_of.at(id));
        REQUIRE(topics.size() == 1);
        node_topic[node.id] = *topics.begin();
        seen_topics.insert(*topics.begin());
    }
    CHECK(seen_topics.size() == 3);
    for (const auto& e : g.edges) CHECK(node_topic.at(e.a) == node_topic.at(e.b));
    CHECK(tda::graph_components(g) >= 3);
}

TEST_CASE("report summarizes a run directory") {
    Workspace ws;
    ws.write("series.json", kSeriesConfig);
    std::string csv = "id,published_at,probability\n";
    for (int t = 0; t < 70; ++t) {
        const double v = t == 30 ? 0.95 : 0.5;
        csv += "d" + std::to_string(t) + "," + format_date(add_days({2016, 1, 1}, t)) + "," +
               io::format_double(v) + "\n";
    }
    ws.write("scores.csv", csv);
    REQUIRE(run_cli("series --scores " + ws.path("scores.csv") + " --config " +
                    ws.path("series.json") + " --out-dir " + ws.path("out")) == 0);
    REQUIRE(run_cli("report --dir " + ws.path("out")) == 0);
    const std::string report = io::read_text_file(ws.path("out/report.txt"));
    CHECK(report.find("series:") != std::string::npos);
    CHECK(report.find("anomalies:") != std::string::npos);

    CHECK(run_cli("report --dir " + ws.path("not_there")) == 3);
}
