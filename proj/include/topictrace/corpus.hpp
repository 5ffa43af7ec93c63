#pragma once

#include "topictrace/date.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace topictrace::corpus {

enum class Origin { News, Microtext };

const char* origin_name(Origin o);

struct Document {
    std::string id;
    Date published_at;
    std::string source;
    std::string text;
    std::vector<std::string> tags; // lowercase, '#'-stripped, sorted unique
    Origin origin = Origin::News;

    bool has_tag(const std::string& tag) const;
};

struct Corpus {
    std::vector<Document> documents; // canonical (published_at, id) order
    Date range_start;                // inclusive declared range
    Date range_end;
    std::vector<std::string> tag_universe; // sorted distinct tags

    std::size_t size() const { return documents.size(); }
    bool empty() const { return documents.empty(); }
};

struct Event {
    Date date;
    double magnitude = 0.0; // fraction of that day's documents forced topic-positive
    std::string label;
};

struct EventLog {
    std::vector<Event> events;
};

// Normalizes a raw tag or hashtag: trim, strip one leading '#', lowercase.
// Returns "" when nothing is left.
std::string normalize_tag(const std::string& raw);

// Sorts documents canonically and recomputes the tag universe. The declared
// range defaults to [min,max] of the document dates unless given.
Corpus make_corpus(std::vector<Document> docs);
Corpus make_corpus(std::vector<Document> docs, Date range_start, Date range_end);

// One JSON object per line: id, published_at, source, text, tags, origin.
// Malformed lines, duplicate ids and out-of-range dates fail with the
// offending line number in the message.
Corpus load_jsonl(const std::string& path);
std::string to_jsonl(const Corpus& c);
void save_jsonl(const Corpus& c, const std::string& path);

std::string events_to_json(const EventLog& log);
EventLog events_from_json(const std::string& content);

struct GeneratorConfig {
    Date range_start;
    Date range_end;
    int docs_per_day = 50;
    double base_topic_rate = 0.05;
    std::string target_tag;
    std::map<std::string, std::vector<std::string>> topic_lexicons; // tag -> words
    std::vector<std::string> filler_words;                          // default list when empty
    double microtext_fraction = 0.5;
    double secondary_tag_rate = 0.2;
    int doc_len_min = 8;
    int doc_len_max = 16;
    EventLog events;
};

GeneratorConfig generator_config_from_json(const std::string& content);
std::vector<std::string> default_filler_words();

// Deterministic synthetic corpus with known labels: documents are bags of
// words from disjoint per-tag lexicons plus shared filler, so tag membership
// is exactly recoverable from the text. Event days force at least
// ceil(magnitude * docs_per_day) documents onto the target tag.
std::pair<Corpus, EventLog> synthesize_corpus(const GeneratorConfig& cfg, std::uint64_t seed);

// Disjoint split; val size = round(val_fraction * N); deterministic in seed.
std::pair<Corpus, Corpus> partition(const Corpus& c, double val_fraction, std::uint64_t seed);

} // namespace topictrace::corpus
