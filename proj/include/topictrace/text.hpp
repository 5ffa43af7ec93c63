#pragma once

#include "topictrace/corpus.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace topictrace::text {

// Lowercases and splits on any non-alphanumeric code point. Total: any byte
// sequence yields a (possibly empty) token list.
std::vector<std::string> tokenize(std::string_view s);

struct Vocabulary {
    static constexpr std::int32_t kPad = 0;
    static constexpr std::int32_t kUnk = 1;

    std::vector<std::string> id_to_token; // [0]="<pad>", [1]="<unk>"
    std::unordered_map<std::string, std::int32_t> token_to_id;

    std::int32_t size() const { return std::int32_t(id_to_token.size()); }
    std::int32_t id_of(const std::string& token) const {
        auto it = token_to_id.find(token);
        return it == token_to_id.end() ? kUnk : it->second;
    }
};

// Tokens ranked by (frequency desc, token asc); the top max_size-2 with
// frequency >= min_freq get ids from 2 up.
Vocabulary build_vocabulary(const corpus::Corpus& c, int max_size = 20000, int min_freq = 2);
Vocabulary build_vocabulary_from_counts(const std::unordered_map<std::string, long>& counts,
                                        int max_size, int min_freq);

struct EncodedText {
    std::vector<std::int32_t> ids; // fixed length, PAD suffix
    int true_length = 0;
};

// First `length` tokens mapped (UNK when out of vocabulary), right-padded.
EncodedText encode(const std::vector<std::string>& tokens, const Vocabulary& vocab, int length);

// JSON array of tokens in id order (ids implicit).
std::string vocabulary_to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(const std::string& content);
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

} // namespace topictrace::text
