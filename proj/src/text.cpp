#include "topictrace/text.hpp"

#include "topictrace/errors.hpp"
#include "topictrace/io.hpp"
#include "topictrace/utf8.hpp"

#include <json.hpp>

#include <algorithm>

namespace topictrace::text {

using nlohmann::json;

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t i = 0;
    while (i < s.size()) {
        const char32_t cp = utf8::next_codepoint(s, i);
        if (utf8::is_word_codepoint(cp)) {
            utf8::append_codepoint(current, utf8::lower_codepoint(cp));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Vocabulary build_vocabulary_from_counts(const std::unordered_map<std::string, long>& counts,
                                        int max_size, int min_freq) {
    if (max_size < 3) throw ConfigError("vocabulary max_size must be >= 3");

    std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    v.id_to_token = {"<pad>", "<unk>"};
    for (const auto& [token, freq] : ranked) {
        if (freq < min_freq) break;
        if (v.size() >= max_size) break;
        v.token_to_id.emplace(token, v.size());
        v.id_to_token.push_back(token);
    }
    return v;
}

Vocabulary build_vocabulary(const corpus::Corpus& c, int max_size, int min_freq) {
    std::unordered_map<std::string, long> counts;
    for (const auto& doc : c.documents)
        for (auto& tok : tokenize(doc.text)) ++counts[tok];
    return build_vocabulary_from_counts(counts, max_size, min_freq);
}

EncodedText encode(const std::vector<std::string>& tokens, const Vocabulary& vocab, int length) {
    if (length < 1) throw ConfigError("encode length must be >= 1");
    EncodedText e;
    e.ids.assign(std::size_t(length), Vocabulary::kPad);
    e.true_length = int(std::min<std::size_t>(tokens.size(), std::size_t(length)));
    for (int i = 0; i < e.true_length; ++i)
        e.ids[std::size_t(i)] = vocab.id_of(tokens[std::size_t(i)]);
    return e;
}

std::string vocabulary_to_json(const Vocabulary& vocab) {
    return json(vocab.id_to_token).dump() + "\n";
}

Vocabulary vocabulary_from_json(const std::string& content) {
    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("invalid vocabulary JSON: ") + e.what());
    }
    if (!j.is_array() || j.size() < 2)
        throw DataError("vocabulary JSON must be an array with the two reserved entries");
    Vocabulary v;
    v.id_to_token = j.get<std::vector<std::string>>();
    for (std::size_t i = 2; i < v.id_to_token.size(); ++i)
        v.token_to_id.emplace(v.id_to_token[i], std::int32_t(i));
    return v;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    io::write_text_file_atomic(path, vocabulary_to_json(vocab));
}

Vocabulary load_vocabulary(const std::string& path) {
    return vocabulary_from_json(io::read_text_file(path));
}

} // namespace topictrace::text
