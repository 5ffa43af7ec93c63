#include "topictrace/corpus.hpp"

#include "topictrace/errors.hpp"
#include "topictrace/io.hpp"
#include "topictrace/rng.hpp"
#include "topictrace/utf8.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

namespace topictrace::corpus {

using nlohmann::json;

namespace {

// Ingestable dates; anything outside is almost certainly a data bug.
const Date kMinDate{1900, 1, 1};
const Date kMaxDate{2199, 12, 31};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool canonical_less(const Document& a, const Document& b) {
    if (a.published_at != b.published_at) return a.published_at < b.published_at;
    return a.id < b.id;
}

void sort_unique(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<std::string> collect_tag_universe(const std::vector<Document>& docs) {
    std::vector<std::string> tags;
    for (const auto& d : docs)
        tags.insert(tags.end(), d.tags.begin(), d.tags.end());
    sort_unique(tags);
    return tags;
}

} // namespace

const char* origin_name(Origin o) {
    return o == Origin::News ? "news" : "microtext";
}

bool Document::has_tag(const std::string& tag) const {
    return std::binary_search(tags.begin(), tags.end(), tag);
}

std::string normalize_tag(const std::string& raw) {
    std::string t = trim(raw);
    if (!t.empty() && t.front() == '#') t.erase(t.begin());
    return utf8::lowercase(trim(t));
}

Corpus make_corpus(std::vector<Document> docs) {
    if (docs.empty()) return Corpus{};
    Date lo = docs.front().published_at, hi = docs.front().published_at;
    for (const auto& d : docs) {
        lo = std::min(lo, d.published_at);
        hi = std::max(hi, d.published_at);
    }
    return make_corpus(std::move(docs), lo, hi);
}

Corpus make_corpus(std::vector<Document> docs, Date range_start, Date range_end) {
    Corpus c;
    c.documents = std::move(docs);
    std::sort(c.documents.begin(), c.documents.end(), canonical_less);
    c.range_start = range_start;
    c.range_end = range_end;
    c.tag_universe = collect_tag_universe(c.documents);
    return c;
}

Corpus load_jsonl(const std::string& path) {
    const std::string content = io::read_text_file(path);
    std::vector<Document> docs;
    std::unordered_set<std::string> seen_ids;
    int line_no = 0;
    for (const auto& line : io::split_lines(content)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError("line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
        }
        auto err = [&](const std::string& msg) {
            return DataError("line " + std::to_string(line_no) + ": " + msg);
        };
        if (!j.is_object()) throw err("expected a JSON object");
        for (const char* field : {"id", "published_at", "source", "text", "tags", "origin"})
            if (!j.contains(field)) throw err(std::string("missing field \"") + field + "\"");

        Document d;
        if (!j["id"].is_string()) throw err("\"id\" must be a string");
        d.id = j["id"].get<std::string>();
        if (d.id.empty()) throw err("empty id");
        if (!seen_ids.insert(d.id).second) throw err("duplicate id \"" + d.id + "\"");

        if (!j["published_at"].is_string()) throw err("\"published_at\" must be a string");
        auto date = parse_date(j["published_at"].get<std::string>());
        if (!date) throw err("invalid date \"" + j["published_at"].get<std::string>() + "\"");
        if (*date < kMinDate || *date > kMaxDate)
            throw err("date outside representable range: " + format_date(*date));
        d.published_at = *date;

        if (!j["source"].is_string()) throw err("\"source\" must be a string");
        d.source = j["source"].get<std::string>();

        if (!j["text"].is_string()) throw err("\"text\" must be a string");
        d.text = j["text"].get<std::string>();
        if (trim(d.text).empty()) throw err("empty text for id \"" + d.id + "\"");

        if (!j["tags"].is_array()) throw err("\"tags\" must be an array");
        for (const auto& t : j["tags"]) {
            if (!t.is_string()) throw err("tags must be strings");
            std::string tag = normalize_tag(t.get<std::string>());
            if (!tag.empty()) d.tags.push_back(tag);
        }
        sort_unique(d.tags);

        if (!j["origin"].is_string()) throw err("\"origin\" must be a string");
        const std::string origin = j["origin"].get<std::string>();
        if (origin == "news") {
            d.origin = Origin::News;
        } else if (origin == "microtext") {
            d.origin = Origin::Microtext;
        } else {
            throw err("unknown origin \"" + origin + "\"");
        }
        docs.push_back(std::move(d));
    }
    return make_corpus(std::move(docs));
}

std::string to_jsonl(const Corpus& c) {
    std::string out;
    for (const auto& d : c.documents) {
        json j;
        j["id"] = d.id;
        j["published_at"] = format_date(d.published_at);
        j["source"] = d.source;
        j["text"] = d.text;
        j["tags"] = d.tags;
        j["origin"] = origin_name(d.origin);
        out += j.dump();
        out += '\n';
    }
    return out;
}

void save_jsonl(const Corpus& c, const std::string& path) {
    io::write_text_file_atomic(path, to_jsonl(c));
}

std::string events_to_json(const EventLog& log) {
    json arr = json::array();
    for (const auto& e : log.events) {
        arr.push_back({{"date", format_date(e.date)},
                       {"magnitude", e.magnitude},
                       {"label", e.label}});
    }
    return json{{"events", arr}}.dump(2) + "\n";
}

EventLog events_from_json(const std::string& content) {
    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("invalid event log JSON: ") + e.what());
    }
    EventLog log;
    if (!j.contains("events") || !j["events"].is_array())
        throw DataError("event log must contain an \"events\" array");
    for (const auto& ej : j["events"]) {
        Event e;
        auto date = parse_date(ej.at("date").get<std::string>());
        if (!date) throw DataError("invalid event date");
        e.date = *date;
        e.magnitude = ej.at("magnitude").get<double>();
        e.label = ej.value("label", "");
        log.events.push_back(std::move(e));
    }
    return log;
}

std::vector<std::string> default_filler_words() {
    return {"the", "a",  "of",   "and",  "to",   "in",   "on",   "with", "for",
            "from", "by", "this", "that", "it",   "as",   "was",  "were", "has",
            "have", "at", "an",   "be",   "is",   "are",  "said", "after"};
}

GeneratorConfig generator_config_from_json(const std::string& content) {
    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid generator config JSON: ") + e.what());
    }
    GeneratorConfig cfg;
    try {
        auto range = j.at("date_range");
        auto start = parse_date(range.at("start").get<std::string>());
        auto end = parse_date(range.at("end").get<std::string>());
        if (!start || !end) throw ConfigError("invalid date_range");
        cfg.range_start = *start;
        cfg.range_end = *end;
        cfg.docs_per_day = j.at("docs_per_day").get<int>();
        cfg.base_topic_rate = j.at("base_topic_rate").get<double>();
        cfg.target_tag = normalize_tag(j.at("target_tag").get<std::string>());
        for (const auto& [tag, words] : j.at("topic_lexicons").items()) {
            std::vector<std::string> lex;
            for (const auto& w : words) lex.push_back(w.get<std::string>());
            cfg.topic_lexicons[normalize_tag(tag)] = std::move(lex);
        }
        if (j.contains("filler_words"))
            cfg.filler_words = j["filler_words"].get<std::vector<std::string>>();
        cfg.microtext_fraction = j.value("microtext_fraction", cfg.microtext_fraction);
        cfg.secondary_tag_rate = j.value("secondary_tag_rate", cfg.secondary_tag_rate);
        if (j.contains("doc_length")) {
            cfg.doc_len_min = j["doc_length"].value("min", cfg.doc_len_min);
            cfg.doc_len_max = j["doc_length"].value("max", cfg.doc_len_max);
        }
        if (j.contains("events")) {
            for (const auto& ej : j["events"]) {
                Event e;
                auto date = parse_date(ej.at("date").get<std::string>());
                if (!date) throw ConfigError("invalid event date");
                e.date = *date;
                e.magnitude = ej.at("magnitude").get<double>();
                e.label = ej.value("label", "");
                cfg.events.events.push_back(std::move(e));
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("generator config: ") + e.what());
    }
    return cfg;
}

namespace {

void validate_generator_config(const GeneratorConfig& cfg) {
    if (cfg.range_end < cfg.range_start) throw ConfigError("date_range end before start");
    if (cfg.docs_per_day < 1) throw ConfigError("docs_per_day must be >= 1");
    if (cfg.base_topic_rate < 0.0 || cfg.base_topic_rate > 1.0)
        throw ConfigError("base_topic_rate must lie in [0,1]");
    if (cfg.topic_lexicons.size() < 2)
        throw ConfigError("need at least 2 topic lexicons");
    if (!cfg.topic_lexicons.count(cfg.target_tag))
        throw ConfigError("target_tag \"" + cfg.target_tag + "\" has no lexicon");
    if (cfg.doc_len_min < 1 || cfg.doc_len_max < cfg.doc_len_min)
        throw ConfigError("invalid doc_length bounds");
    if (cfg.microtext_fraction < 0.0 || cfg.microtext_fraction > 1.0)
        throw ConfigError("microtext_fraction must lie in [0,1]");

    std::set<std::string> seen;
    for (const auto& [tag, words] : cfg.topic_lexicons) {
        if (tag.empty()) throw ConfigError("empty lexicon tag");
        if (words.empty()) throw ConfigError("empty lexicon for tag \"" + tag + "\"");
        for (const auto& w : words) {
            if (!seen.insert(utf8::lowercase(w)).second)
                throw ConfigError("overlapping lexicons: word \"" + w + "\" appears twice");
        }
    }
    const auto fillers = cfg.filler_words.empty() ? default_filler_words() : cfg.filler_words;
    for (const auto& w : fillers) {
        if (seen.count(utf8::lowercase(w)))
            throw ConfigError("filler word \"" + w + "\" collides with a topic lexicon");
    }
    for (const auto& e : cfg.events.events) {
        if (e.date < cfg.range_start || e.date > cfg.range_end)
            throw ConfigError("event date " + format_date(e.date) + " outside date_range");
        if (e.magnitude <= 0.0 || e.magnitude > 1.0)
            throw ConfigError("event magnitude must lie in (0,1]");
    }
}

} // namespace

std::pair<Corpus, EventLog> synthesize_corpus(const GeneratorConfig& cfg, std::uint64_t seed) {
    validate_generator_config(cfg);
    Rng rng(seed);

    const auto fillers = cfg.filler_words.empty() ? default_filler_words() : cfg.filler_words;
    std::vector<std::string> other_tags;
    for (const auto& [tag, words] : cfg.topic_lexicons)
        if (tag != cfg.target_tag) other_tags.push_back(tag);

    // magnitude per day from the event log (max wins if two events collide)
    std::map<std::int64_t, double> forced;
    for (const auto& e : cfg.events.events) {
        auto& m = forced[to_day_number(e.date)];
        m = std::max(m, e.magnitude);
    }

    std::vector<Document> docs;
    const std::int64_t n_days = days_between(cfg.range_start, cfg.range_end) + 1;
    docs.reserve(std::size_t(n_days) * std::size_t(cfg.docs_per_day));
    long doc_counter = 0;

    for (std::int64_t di = 0; di < n_days; ++di) {
        const Date day = add_days(cfg.range_start, di);
        int n_forced = 0;
        if (auto it = forced.find(to_day_number(day)); it != forced.end())
            n_forced = int(std::ceil(it->second * cfg.docs_per_day));

        for (int k = 0; k < cfg.docs_per_day; ++k) {
            const bool is_target = (k < n_forced) || rng.bernoulli(cfg.base_topic_rate);
            std::string primary =
                is_target ? cfg.target_tag
                          : other_tags[std::size_t(rng.uniform_int(0, std::int64_t(other_tags.size()) - 1))];
            std::vector<std::string> assigned{primary};
            if (!other_tags.empty() && rng.bernoulli(cfg.secondary_tag_rate)) {
                const auto& extra =
                    other_tags[std::size_t(rng.uniform_int(0, std::int64_t(other_tags.size()) - 1))];
                if (extra != primary) assigned.push_back(extra);
            }

            const int len = int(rng.uniform_int(cfg.doc_len_min, cfg.doc_len_max));
            std::string body;
            bool has_topic_word = false;
            for (int w = 0; w < len; ++w) {
                const bool topical = rng.bernoulli(0.55);
                std::string word;
                if (topical) {
                    const auto& tag = assigned[std::size_t(rng.uniform_int(0, std::int64_t(assigned.size()) - 1))];
                    const auto& lex = cfg.topic_lexicons.at(tag);
                    word = lex[std::size_t(rng.uniform_int(0, std::int64_t(lex.size()) - 1))];
                    if (tag == primary) has_topic_word = true;
                } else {
                    word = fillers[std::size_t(rng.uniform_int(0, std::int64_t(fillers.size()) - 1))];
                }
                if (w) body += ' ';
                body += word;
            }
            if (!has_topic_word) {
                // guarantee at least one primary-lexicon word
                const auto& lex = cfg.topic_lexicons.at(primary);
                body += ' ';
                body += lex[std::size_t(rng.uniform_int(0, std::int64_t(lex.size()) - 1))];
            }

            Document d;
            char idbuf[24];
            std::snprintf(idbuf, sizeof idbuf, "doc-%08ld", doc_counter++);
            d.id = idbuf;
            d.published_at = day;
            d.source = "synth";
            d.text = std::move(body);
            d.tags = assigned;
            sort_unique(d.tags);
            d.origin = rng.bernoulli(cfg.microtext_fraction) ? Origin::Microtext : Origin::News;
            docs.push_back(std::move(d));
        }
    }

    Corpus c = make_corpus(std::move(docs), cfg.range_start, cfg.range_end);
    return {std::move(c), cfg.events};
}

std::pair<Corpus, Corpus> partition(const Corpus& c, double val_fraction, std::uint64_t seed) {
    if (c.empty()) throw ConfigError("cannot partition an empty corpus");
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ConfigError("val_fraction must lie in (0,1)");

    const std::size_t n = c.size();
    const std::size_t n_val = std::size_t(std::llround(val_fraction * double(n)));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<bool> in_val(n, false);
    for (std::size_t i = 0; i < n_val; ++i) in_val[order[i]] = true;

    std::vector<Document> train_docs, val_docs;
    for (std::size_t i = 0; i < n; ++i)
        (in_val[i] ? val_docs : train_docs).push_back(c.documents[i]);

    return {make_corpus(std::move(train_docs), c.range_start, c.range_end),
            make_corpus(std::move(val_docs), c.range_start, c.range_end)};
}

} // namespace topictrace::corpus
