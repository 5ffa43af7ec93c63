#include "topictrace/cli.hpp"

#include "topictrace/corpus.hpp"
#include "topictrace/errors.hpp"
#include "topictrace/io.hpp"
#include "topictrace/nn.hpp"
#include "topictrace/series.hpp"
#include "topictrace/tda.hpp"
#include "topictrace/text.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace topictrace::cli {

using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "topictrace 1.0.0";

std::string basename(const std::string& path) {
    return std::filesystem::path(path).filename().string();
}

// Collects outputs in memory; nothing touches disk until the run has fully
// succeeded, so a failing command leaves no partial artifacts.
class OutputSet {
public:
    explicit OutputSet(std::string out_dir) : out_dir_(std::move(out_dir)) {}

    void add(const std::string& name, std::string content) {
        files_.emplace_back(name, std::move(content));
    }

    void record_input(const std::string& path, const std::string& content) {
        inputs_[basename(path)] = io::fnv1a64_hex(content);
    }

    void write_all(const std::string& subcommand, std::uint64_t seed, const json& config) {
        std::filesystem::create_directories(out_dir_);
        json manifest;
        manifest["subcommand"] = subcommand;
        manifest["tool_version"] = kToolVersion;
        manifest["seed"] = seed;
        manifest["config"] = config;
        manifest["inputs"] = inputs_;
        json outputs = json::object();
        for (const auto& [name, content] : files_) outputs[name] = io::fnv1a64_hex(content);
        manifest["outputs"] = outputs;
        files_.emplace_back("manifest_" + subcommand + ".json", manifest.dump(2) + "\n");

        std::vector<std::string> written;
        try {
            for (const auto& [name, content] : files_) {
                const std::string path = (std::filesystem::path(out_dir_) / name).string();
                io::write_text_file_atomic(path, content);
                written.push_back(path);
            }
        } catch (...) {
            for (const auto& path : written) std::remove(path.c_str());
            throw;
        }
        for (const auto& [name, content] : files_)
            std::fprintf(stderr, "wrote %s\n", (std::filesystem::path(out_dir_) / name).c_str());
    }

private:
    std::string out_dir_;
    std::vector<std::pair<std::string, std::string>> files_;
    std::map<std::string, std::string> inputs_;
};

std::string read_input(OutputSet& out, const std::string& path) {
    std::string content = io::read_text_file(path);
    out.record_input(path, content);
    return content;
}

// Config files are part of the invocation; failing to read one is a usage
// error (exit 2), unlike data inputs (exit 3).
std::string read_config_input(OutputSet& out, const std::string& path) {
    try {
        return read_input(out, path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}

corpus::Corpus load_corpus_input(OutputSet& out, const std::string& path) {
    read_input(out, path);
    return corpus::load_jsonl(path);
}

// ---- train ---------------------------------------------------------------

struct TrainOptions {
    nn::TrainConfig cfg;
    double val_fraction = 0.2;
    int encode_length = 64;
    int vocab_max_size = 20000;
    int vocab_min_freq = 2;
    std::string target_tag;
    std::string origin_filter = "all"; // all | news | microtext
};

TrainOptions train_options_from_json(const std::string& content) {
    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid train config JSON: ") + e.what());
    }
    TrainOptions o;
    o.cfg.epochs = j.value("epochs", o.cfg.epochs);
    o.cfg.batch_size = j.value("batch_size", o.cfg.batch_size);
    o.cfg.learning_rate = j.value("learning_rate", o.cfg.learning_rate);
    o.cfg.beta1 = j.value("beta1", o.cfg.beta1);
    o.cfg.beta2 = j.value("beta2", o.cfg.beta2);
    o.cfg.adam_epsilon = j.value("adam_epsilon", o.cfg.adam_epsilon);
    o.cfg.l2_weight = j.value("l2_weight", o.cfg.l2_weight);
    o.cfg.early_stop_patience = j.value("early_stop_patience", o.cfg.early_stop_patience);
    o.val_fraction = j.value("val_fraction", o.val_fraction);
    o.encode_length = j.value("encode_length", o.encode_length);
    o.vocab_max_size = j.value("vocab_max_size", o.vocab_max_size);
    o.vocab_min_freq = j.value("vocab_min_freq", o.vocab_min_freq);
    o.target_tag = j.value("target_tag", o.target_tag);
    o.origin_filter = j.value("origin_filter", o.origin_filter);
    return o;
}

json train_options_to_json(const TrainOptions& o, const std::string& arch) {
    return json{{"arch", arch},
                {"epochs", o.cfg.epochs},
                {"batch_size", o.cfg.batch_size},
                {"learning_rate", o.cfg.learning_rate},
                {"beta1", o.cfg.beta1},
                {"beta2", o.cfg.beta2},
                {"adam_epsilon", o.cfg.adam_epsilon},
                {"l2_weight", o.cfg.l2_weight},
                {"early_stop_patience", o.cfg.early_stop_patience},
                {"val_fraction", o.val_fraction},
                {"encode_length", o.encode_length},
                {"vocab_max_size", o.vocab_max_size},
                {"vocab_min_freq", o.vocab_min_freq},
                {"target_tag", o.target_tag},
                {"origin_filter", o.origin_filter}};
}

json metrics_to_json(const nn::Metrics& m) {
    return json{{"bce_loss", m.bce_loss},
                {"accuracy", m.accuracy},
                {"precision", m.precision},
                {"recall", m.recall},
                {"multilabel_accuracy", m.multilabel_accuracy}};
}

int cmd_train(const std::string& corpus_path, const std::string& arch_flag,
              const std::string& config_path, const std::string& target_tag_flag,
              std::uint64_t seed, const std::string& out_dir) {
    OutputSet out(out_dir);

    TrainOptions opt;
    if (!config_path.empty()) opt = train_options_from_json(read_config_input(out, config_path));
    opt.cfg.seed = seed;
    if (!target_tag_flag.empty()) opt.target_tag = target_tag_flag;

    nn::Arch arch;
    if (arch_flag == "modelA") arch = nn::Arch::ModelA;
    else if (arch_flag == "modelB") arch = nn::Arch::ModelB;
    else throw ConfigError("unknown --arch \"" + arch_flag + "\" (expected modelA or modelB)");

    corpus::Corpus full = load_corpus_input(out, corpus_path);
    if (opt.origin_filter != "all") {
        corpus::Origin want;
        if (opt.origin_filter == "news") want = corpus::Origin::News;
        else if (opt.origin_filter == "microtext") want = corpus::Origin::Microtext;
        else throw ConfigError("unknown origin_filter \"" + opt.origin_filter + "\"");
        std::vector<corpus::Document> kept;
        for (const auto& d : full.documents)
            if (d.origin == want) kept.push_back(d);
        full = corpus::make_corpus(std::move(kept), full.range_start, full.range_end);
    }
    if (full.empty()) throw ConfigError("corpus is empty after filtering");

    std::vector<std::string> label_tags;
    if (arch == nn::Arch::ModelA) {
        label_tags = full.tag_universe;
        if (label_tags.empty()) throw ConfigError("corpus has no tags to learn");
    } else {
        const std::string target = corpus::normalize_tag(opt.target_tag);
        if (target.empty()) throw ConfigError("modelB requires --target-tag");
        if (!std::binary_search(full.tag_universe.begin(), full.tag_universe.end(), target))
            throw ConfigError("target tag \"" + target + "\" never occurs in the corpus");
        label_tags = {target};
    }

    const text::Vocabulary vocab =
        text::build_vocabulary(full, opt.vocab_max_size, opt.vocab_min_freq);
    auto [train_corpus, val_corpus] = corpus::partition(full, opt.val_fraction, seed);
    const nn::Dataset train_ds =
        nn::make_dataset(train_corpus, vocab, opt.encode_length, label_tags);
    const nn::Dataset val_ds = nn::make_dataset(val_corpus, vocab, opt.encode_length, label_tags);

    nn::Network net = nn::init_network(arch, vocab.size(), int(label_tags.size()), seed);
    if (opt.encode_length < nn::min_input_length(net))
        throw ConfigError("encode_length " + std::to_string(opt.encode_length) +
                          " is below the architecture minimum of " +
                          std::to_string(nn::min_input_length(net)));
    net.label_names = label_tags;
    nn::TrainResult result = nn::train(std::move(net), train_ds, val_ds, opt.cfg);
    const nn::Metrics final_metrics =
        val_ds.size() > 0 ? nn::evaluate(result.net, val_ds) : nn::evaluate(result.net, train_ds);

    json history = json::array();
    for (const auto& e : result.history) {
        history.push_back({{"epoch", e.epoch},
                           {"train_loss", e.train_loss},
                           {"val_loss", e.val_loss},
                           {"val_metrics", metrics_to_json(e.val)}});
    }
    json metrics;
    metrics["arch"] = arch_flag;
    metrics["train_docs"] = train_ds.size();
    metrics["val_docs"] = val_ds.size();
    const json final_json = metrics_to_json(final_metrics);
    for (const auto& [key, value] : final_json.items()) metrics[key] = value;
    metrics["history"] = std::move(history);

    out.add("checkpoint_" + arch_flag + ".json",
            nn::checkpoint_to_json(result.net, opt.encode_length));
    out.add("vocab.json", text::vocabulary_to_json(vocab));
    out.add("metrics_" + arch_flag + ".json", metrics.dump(2) + "\n");
    out.write_all("train_" + arch_flag, seed, train_options_to_json(opt, arch_flag));
    return kOk;
}

// ---- synth ---------------------------------------------------------------

int cmd_synth(const std::string& config_path, std::uint64_t seed, const std::string& out_dir) {
    OutputSet out(out_dir);
    const std::string config_content = read_config_input(out, config_path);
    const corpus::GeneratorConfig cfg = corpus::generator_config_from_json(config_content);
    auto [generated, events] = corpus::synthesize_corpus(cfg, seed);

    out.add("corpus.jsonl", corpus::to_jsonl(generated));
    out.add("events.json", corpus::events_to_json(events));
    out.write_all("synth", seed, json::parse(config_content));
    return kOk;
}

// ---- score ---------------------------------------------------------------

int cmd_score(const std::string& corpus_path, const std::string& checkpoint_path,
              const std::string& vocab_path, std::uint64_t seed, const std::string& out_dir) {
    OutputSet out(out_dir);
    const corpus::Corpus c = load_corpus_input(out, corpus_path);
    const nn::Checkpoint ck = nn::checkpoint_from_json(read_input(out, checkpoint_path));
    const text::Vocabulary vocab = text::vocabulary_from_json(read_input(out, vocab_path));
    if (vocab.size() != ck.net.vocab_size)
        throw DataError("vocabulary size does not match checkpoint");

    std::string csv = "id,published_at";
    if (ck.net.num_outputs == 1) {
        csv += ",probability";
    } else {
        for (const auto& name : ck.net.label_names) csv += "," + name;
    }
    csv += '\n';
    for (const auto& doc : c.documents) {
        const auto probs = nn::score(ck.net, doc, vocab, ck.encode_length);
        csv += doc.id;
        csv += ',';
        csv += format_date(doc.published_at);
        for (double p : probs) {
            csv += ',';
            csv += io::format_double(p);
        }
        csv += '\n';
    }

    out.add("scores.csv", csv);
    out.write_all("score", seed, json{{"checkpoint", basename(checkpoint_path)}});
    return kOk;
}

// ---- series / detect -----------------------------------------------------

series::DecompositionConfig decomposition_config_from_json(const std::string& content) {
    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid decomposition config JSON: ") + e.what());
    }
    series::DecompositionConfig cfg;
    cfg.n_changepoints = j.value("n_changepoints", cfg.n_changepoints);
    cfg.changepoint_range = j.value("changepoint_range", cfg.changepoint_range);
    cfg.weekly_order = j.value("weekly_order", cfg.weekly_order);
    cfg.yearly_order = j.value("yearly_order", cfg.yearly_order);
    cfg.lambda_trend = j.value("lambda_trend", cfg.lambda_trend);
    cfg.lambda_seasonal = j.value("lambda_seasonal", cfg.lambda_seasonal);
    cfg.lambda_holiday = j.value("lambda_holiday", cfg.lambda_holiday);
    cfg.interval_level = j.value("interval_level", cfg.interval_level);
    return cfg;
}

json decomposition_config_to_json(const series::DecompositionConfig& cfg) {
    return json{{"n_changepoints", cfg.n_changepoints},
                {"changepoint_range", cfg.changepoint_range},
                {"weekly_order", cfg.weekly_order},
                {"yearly_order", cfg.yearly_order},
                {"lambda_trend", cfg.lambda_trend},
                {"lambda_seasonal", cfg.lambda_seasonal},
                {"lambda_holiday", cfg.lambda_holiday},
                {"interval_level", cfg.interval_level},
                {"holidays", cfg.holidays.size()}};
}

std::vector<std::pair<Date, double>> scores_from_csv(const std::string& content) {
    const auto lines = io::split_lines(content);
    if (lines.empty()) throw DataError("scores CSV is empty");
    const auto header = io::split_csv_line(lines[0]);
    if (header.size() < 3 || header[0] != "id" || header[1] != "published_at")
        throw DataError("scores CSV must start with \"id,published_at,...\"");
    if (header.size() != 3 || header[2] != "probability")
        throw DataError("series needs single-probability (modelB) scores");

    std::vector<std::pair<Date, double>> scored;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = io::split_csv_line(lines[i]);
        if (fields.size() != 3)
            throw DataError("scores CSV line " + std::to_string(i + 1) + ": expected 3 fields");
        const auto date = parse_date(fields[1]);
        if (!date)
            throw DataError("scores CSV line " + std::to_string(i + 1) + ": invalid date");
        double p = 0.0;
        try {
            p = std::stod(fields[2]);
        } catch (const std::exception&) {
            throw DataError("scores CSV line " + std::to_string(i + 1) + ": invalid probability");
        }
        scored.emplace_back(*date, p);
    }
    if (scored.empty()) throw DataError("scores CSV has no rows");
    return scored;
}

int cmd_series(const std::string& subcommand, const std::string& scores_path,
               const std::string& config_path, const std::string& holidays_path,
               const std::string& anomaly_side, std::uint64_t seed, const std::string& out_dir) {
    OutputSet out(out_dir);
    if (anomaly_side != "high" && anomaly_side != "low" && anomaly_side != "both")
        throw ConfigError("--anomaly-side must be high, low or both");

    const auto scored = scores_from_csv(read_input(out, scores_path));
    series::DecompositionConfig cfg;
    if (!config_path.empty()) cfg = decomposition_config_from_json(read_config_input(out, config_path));
    if (!holidays_path.empty())
        cfg.holidays = series::holidays_from_csv(read_input(out, holidays_path));

    const series::DailySeries daily = series::build_daily_series(scored);
    const series::DecompositionFit fit = series::fit_decomposition(daily, cfg);
    series::AnomalyReport report = series::detect_anomalies(daily, fit);
    if (anomaly_side == "low") {
        std::erase_if(report.anomalies,
                      [](const series::Anomaly& a) { return a.side != series::Side::Low; });
    }

    const auto weekly = series::weekly_profile(fit);
    static const char* kWeekdays[] = {"monday", "tuesday", "wednesday", "thursday",
                                      "friday", "saturday", "sunday"};
    std::string weekly_csv = "weekday,value\n";
    for (int i = 0; i < 7; ++i)
        weekly_csv += std::string(kWeekdays[i]) + "," + io::format_double(weekly[std::size_t(i)]) + "\n";

    const auto yearly = series::yearly_profile(fit);
    std::string yearly_csv = "month,value\n";
    for (int i = 0; i < 12; ++i)
        yearly_csv += std::to_string(i + 1) + "," + io::format_double(yearly[std::size_t(i)]) + "\n";

    const Date last = daily.date_at(daily.length() - 1);
    out.add("series.csv", series::series_to_csv(daily));
    out.add("fit.json", series::fit_to_json(fit));
    out.add("anomalies.csv", series::anomalies_to_csv(report, anomaly_side == "high"));
    out.add("weekly_profile.csv", weekly_csv);
    out.add("yearly_profile.csv", yearly_csv);
    out.add("heatmap.svg", series::heatmap_svg(daily, daily.start.year, last.year));

    json config = decomposition_config_to_json(cfg);
    config["anomaly_side"] = anomaly_side;
    out.write_all(subcommand, seed, config);
    return kOk;
}

// ---- mapper ----------------------------------------------------------------

int cmd_mapper(const std::string& corpus_path, const std::string& model_a_path,
               const std::string& model_b_path, const std::string& vocab_path, double threshold,
               int intervals, double overlap, int lens_dim, int year, std::uint64_t seed,
               const std::string& out_dir) {
    OutputSet out(out_dir);
    corpus::Corpus c = load_corpus_input(out, corpus_path);
    const nn::Checkpoint model_a = nn::checkpoint_from_json(read_input(out, model_a_path));
    const nn::Checkpoint model_b = nn::checkpoint_from_json(read_input(out, model_b_path));
    const text::Vocabulary vocab = text::vocabulary_from_json(read_input(out, vocab_path));

    if (year > 0) {
        std::vector<corpus::Document> kept;
        for (const auto& d : c.documents)
            if (d.published_at.year == year) kept.push_back(d);
        c = corpus::make_corpus(std::move(kept));
    }

    tda::CoverConfig cover;
    cover.intervals_per_dim = intervals;
    cover.overlap_fraction = overlap;

    tda::MapperGraph graph;
    std::size_t filtered_count = 0;
    if (!c.empty()) {
        const corpus::Corpus filtered =
            nn::topic_filter(c, model_b.net, vocab, model_b.encode_length, threshold);
        filtered_count = filtered.size();
        if (!filtered.empty()) {
            const tda::PointCloud cloud =
                tda::tag_vectors(filtered, model_a.net, model_b.net, vocab, model_a.encode_length);
            graph = tda::mapper(cloud, cover, lens_dim);
        }
    }

    out.add("mapper.dot", tda::export_dot(graph));
    out.add("mapper.json", tda::export_json(graph));
    out.write_all("mapper", seed,
                  json{{"threshold", threshold},
                       {"intervals_per_dim", intervals},
                       {"overlap_fraction", overlap},
                       {"lens_dim", lens_dim},
                       {"year", year},
                       {"filtered_documents", filtered_count}});
    return kOk;
}

// ---- report ----------------------------------------------------------------

std::string round4(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

int cmd_report(const std::string& dir, std::uint64_t seed) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
    OutputSet out(dir);

    std::string text = "topictrace run report\n";
    text += "=====================\n";
    bool found_any = false;

    const std::string series_path = (fs::path(dir) / "series.csv").string();
    if (io::file_exists(series_path)) {
        found_any = true;
        const series::DailySeries s = series::series_from_csv(read_input(out, series_path));
        int populated = 0;
        double vmax = 0.0;
        Date argmax = s.start;
        double sum = 0.0;
        for (int t = 0; t < s.length(); ++t) {
            if (s.counts[std::size_t(t)] == 0) continue;
            ++populated;
            sum += s.values[std::size_t(t)];
            if (s.values[std::size_t(t)] > vmax) {
                vmax = s.values[std::size_t(t)];
                argmax = s.date_at(t);
            }
        }
        text += "series: " + std::to_string(s.length()) + " days from " + format_date(s.start) +
                " to " + format_date(s.date_at(s.length() - 1)) + ", " +
                std::to_string(populated) + " populated\n";
        if (populated > 0) {
            text += "  mean value " + round4(sum / populated) + ", max " + round4(vmax) + " on " +
                    format_date(argmax) + "\n";
        }
    }

    const std::string anomalies_path = (fs::path(dir) / "anomalies.csv").string();
    if (io::file_exists(anomalies_path)) {
        found_any = true;
        const auto lines = io::split_lines(read_input(out, anomalies_path));
        long high = 0, low = 0;
        std::vector<std::string> rows;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            if (lines[i].ends_with(",high")) ++high;
            else ++low;
            rows.push_back(lines[i]);
        }
        text += "anomalies: " + std::to_string(high) + " high, " + std::to_string(low) + " low\n";
        for (std::size_t i = 0; i < std::min<std::size_t>(10, rows.size()); ++i)
            text += "  " + rows[i] + "\n";
    }

    const std::string mapper_path = (fs::path(dir) / "mapper.json").string();
    if (io::file_exists(mapper_path)) {
        found_any = true;
        const tda::MapperGraph g = tda::graph_from_json(read_input(out, mapper_path));
        text += "mapper: " + std::to_string(g.nodes.size()) + " nodes, " +
                std::to_string(g.edges.size()) + " edges, " +
                std::to_string(tda::graph_components(g)) + " components, cycle rank " +
                std::to_string(tda::cycle_rank(g)) + "\n";
    }

    if (!found_any) throw DataError("no topictrace artifacts found in " + dir);

    out.add("report.txt", text);
    out.write_all("report", seed, json::object());
    return kOk;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"topic prevalence mining over timestamped text corpora"};
    app.require_subcommand(1);
    app.fallthrough(); // allow --seed before or after the subcommand
    app.set_version_flag("--version", kToolVersion);

    std::uint64_t seed = 42;
    app.add_option("--seed", seed, "seed threaded through all stochastic stages")
        ->capture_default_str();

    std::function<int()> handler;

    // synth
    {
        auto* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
        auto config = std::make_shared<std::string>();
        auto out_dir = std::make_shared<std::string>(".");
        synth->add_option("--config", *config, "generator config JSON")->required();
        synth->add_option("--out-dir", *out_dir, "output directory")->capture_default_str();
        synth->callback([&handler, config, out_dir, &seed] {
            handler = [=, &seed] { return cmd_synth(*config, seed, *out_dir); };
        });
    }

    // train
    {
        auto* train = app.add_subcommand("train", "train a classifier on a JSONL corpus");
        auto corpus_path = std::make_shared<std::string>();
        auto arch = std::make_shared<std::string>();
        auto config = std::make_shared<std::string>();
        auto target_tag = std::make_shared<std::string>();
        auto out_dir = std::make_shared<std::string>(".");
        train->add_option("--corpus", *corpus_path, "corpus JSONL path")->required();
        train->add_option("--arch", *arch, "modelA (multilabel tags) or modelB (binary topic)")
            ->required();
        train->add_option("--config", *config, "train config JSON");
        train->add_option("--target-tag", *target_tag, "target topic tag (modelB)");
        train->add_option("--out-dir", *out_dir, "output directory")->capture_default_str();
        train->callback([&handler, corpus_path, arch, config, target_tag, out_dir, &seed] {
            handler = [=, &seed] {
                return cmd_train(*corpus_path, *arch, *config, *target_tag, seed, *out_dir);
            };
        });
    }

    // score
    {
        auto* score = app.add_subcommand("score", "score every document with a checkpoint");
        auto corpus_path = std::make_shared<std::string>();
        auto checkpoint = std::make_shared<std::string>();
        auto vocab = std::make_shared<std::string>();
        auto out_dir = std::make_shared<std::string>(".");
        score->add_option("--corpus", *corpus_path, "corpus JSONL path")->required();
        score->add_option("--checkpoint", *checkpoint, "model checkpoint JSON")->required();
        score->add_option("--vocab", *vocab, "vocabulary JSON")->required();
        score->add_option("--out-dir", *out_dir, "output directory")->capture_default_str();
        score->callback([&handler, corpus_path, checkpoint, vocab, out_dir, &seed] {
            handler = [=, &seed] {
                return cmd_score(*corpus_path, *checkpoint, *vocab, seed, *out_dir);
            };
        });
    }

    // series + detect alias
    for (const char* name : {"series", "detect"}) {
        auto* sub = app.add_subcommand(
            name, std::string(name) == "series"
                      ? "decompose daily scores and detect anomalies"
                      : "alias of series focused on anomaly detection");
        auto scores = std::make_shared<std::string>();
        auto config = std::make_shared<std::string>();
        auto holidays = std::make_shared<std::string>();
        auto side = std::make_shared<std::string>("high");
        auto out_dir = std::make_shared<std::string>(".");
        sub->add_option("--scores", *scores, "scores CSV from the score subcommand")->required();
        sub->add_option("--config", *config, "decomposition config JSON");
        sub->add_option("--holidays", *holidays, "holiday calendar CSV (name,date)");
        sub->add_option("--anomaly-side", *side, "high, low or both")->capture_default_str();
        sub->add_option("--out-dir", *out_dir, "output directory")->capture_default_str();
        const std::string sub_name = name;
        sub->callback([&handler, scores, config, holidays, side, out_dir, sub_name, &seed] {
            handler = [=, &seed] {
                return cmd_series(sub_name, *scores, *config, *holidays, *side, seed, *out_dir);
            };
        });
    }

    // mapper
    {
        auto* mapper = app.add_subcommand("mapper", "Mapper graph of topic-positive documents");
        auto corpus_path = std::make_shared<std::string>();
        auto model_a = std::make_shared<std::string>();
        auto model_b = std::make_shared<std::string>();
        auto vocab = std::make_shared<std::string>();
        auto threshold = std::make_shared<double>(0.999);
        auto intervals = std::make_shared<int>(4);
        auto overlap = std::make_shared<double>(0.25);
        auto lens_dim = std::make_shared<int>(3);
        auto year = std::make_shared<int>(0);
        auto out_dir = std::make_shared<std::string>(".");
        mapper->add_option("--corpus", *corpus_path, "corpus JSONL path")->required();
        mapper->add_option("--model-a", *model_a, "modelA checkpoint (tag probabilities)")
            ->required();
        mapper->add_option("--model-b", *model_b, "modelB checkpoint (topic filter)")->required();
        mapper->add_option("--vocab", *vocab, "vocabulary JSON")->required();
        mapper->add_option("--threshold", *threshold, "topic probability filter (strict >)")
            ->capture_default_str();
        mapper->add_option("--intervals", *intervals, "cover intervals per lens dimension")
            ->capture_default_str();
        mapper->add_option("--overlap", *overlap, "cover overlap fraction")->capture_default_str();
        mapper->add_option("--lens-dim", *lens_dim, "PCA lens dimension")->capture_default_str();
        mapper->add_option("--year", *year, "restrict to documents of one year (0 = all)")
            ->capture_default_str();
        mapper->add_option("--out-dir", *out_dir, "output directory")->capture_default_str();
        mapper->callback([&handler, corpus_path, model_a, model_b, vocab, threshold, intervals,
                          overlap, lens_dim, year, out_dir, &seed] {
            handler = [=, &seed] {
                return cmd_mapper(*corpus_path, *model_a, *model_b, *vocab, *threshold, *intervals,
                                  *overlap, *lens_dim, *year, seed, *out_dir);
            };
        });
    }

    // report
    {
        auto* report = app.add_subcommand("report", "summarize the artifacts in a run directory");
        auto dir = std::make_shared<std::string>(".");
        report->add_option("--dir", *dir, "directory holding run outputs")->capture_default_str();
        report->callback([&handler, dir, &seed] {
            handler = [=, &seed] { return cmd_report(*dir, seed); };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        return handler ? handler() : kUsageError;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kUsageError;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kDataError;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kNumericError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumericError;
    }
}

} // namespace topictrace::cli
