#include <cctype>

#include "semaxis/error.hpp"
#include "semaxis/toy_model.hpp"

namespace semaxis::toy {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        require(!tokens_[i].empty(), ErrorKind::invalid_input, "vocabulary: empty token");
        const bool inserted = index_.emplace(tokens_[i], static_cast<TokenId>(i)).second;
        require(inserted, ErrorKind::duplicate_name,
                "vocabulary: duplicate token '" + tokens_[i] + "'");
    }
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

TokenId Vocabulary::id(std::string_view token) const {
    const auto found = find(token);
    if (!found) fail(ErrorKind::out_of_vocabulary, "token not in vocabulary: '" + std::string(token) + "'");
    return *found;
}

std::vector<std::string> segment(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
    };
    for (char ch : text) {
        const auto uc = static_cast<unsigned char>(ch);
        if (uc < 128 && std::isspace(uc)) {
            flush();
        } else if (uc < 128 && std::ispunct(uc)) {
            flush();
            out.emplace_back(1, ch);
        } else {
            current.push_back(ch);
        }
    }
    flush();
    return out;
}

std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab) {
    std::vector<TokenId> ids;
    for (const auto& seg : segment(text)) ids.push_back(vocab.id(seg));
    return ids;
}

std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out.push_back(' ');
        out += vocab.token(ids[i]);
    }
    return out;
}

Vocabulary build_vocabulary(std::span<const std::string> texts) {
    std::vector<std::string> tokens;
    std::unordered_map<std::string, bool> seen;
    for (const auto& text : texts)
        for (auto& seg : segment(text))
            if (seen.emplace(seg, true).second) tokens.push_back(std::move(seg));
    return Vocabulary(std::move(tokens));
}

std::vector<std::size_t> find_word_positions(std::span<const TokenId> tokens,
                                             std::span<const TokenId> word) {
    require(!word.empty(), ErrorKind::invalid_input, "find_word_positions: word has no tokens");
    std::vector<std::size_t> out;
    std::size_t i = 0;
    while (i + word.size() <= tokens.size()) {
        bool match = true;
        for (std::size_t j = 0; j < word.size() && match; ++j) match = tokens[i + j] == word[j];
        if (match) {
            for (std::size_t j = 0; j < word.size(); ++j) out.push_back(i + j);
            i += word.size();
        } else {
            ++i;
        }
    }
    if (out.empty()) fail(ErrorKind::not_found, "find_word_positions: word does not occur");
    return out;
}

}  // namespace semaxis::toy
