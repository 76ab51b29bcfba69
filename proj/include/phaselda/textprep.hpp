#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "phaselda/util.hpp"

namespace phaselda {

// Removal rules applied, in declared order, before tokenization.
enum class StripRule {
    Urls,            // http(s)://... and www....
    Mentions,        // @handle
    HashtagMarkers,  // drop '#', keep the tag text
    Emoji,           // emoji / pictograph codepoint blocks
    NonLetters,      // ASCII punctuation and control runs -> space
};

inline StripRule parse_strip_rule(std::string_view s) {
    if (s == "urls") return StripRule::Urls;
    if (s == "mentions") return StripRule::Mentions;
    if (s == "hashtag_markers") return StripRule::HashtagMarkers;
    if (s == "emoji") return StripRule::Emoji;
    if (s == "non_letters") return StripRule::NonLetters;
    throw ConfigError("unknown strip rule: '" + std::string(s) + "'");
}

inline std::string strip_rule_name(StripRule r) {
    switch (r) {
        case StripRule::Urls: return "urls";
        case StripRule::Mentions: return "mentions";
        case StripRule::HashtagMarkers: return "hashtag_markers";
        case StripRule::Emoji: return "emoji";
        case StripRule::NonLetters: return "non_letters";
    }
    return "?";
}

struct TokenizerConfig {
    std::unordered_set<std::string> stopwords;
    std::vector<StripRule> strip_patterns{StripRule::Urls, StripRule::Mentions,
                                          StripRule::HashtagMarkers, StripRule::Emoji,
                                          StripRule::NonLetters};
    std::string external_tokenizer;  // shell command; empty = whitespace tokenization
    bool lowercase = true;
};

namespace detail {

// Minimal UTF-8 decode; invalid bytes come back as their raw value so they
// survive round-tripping.
inline std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
    const unsigned char c = s[i];
    std::uint32_t cp = c;
    int extra = 0;
    if (c >= 0xf0) { cp = c & 0x07; extra = 3; }
    else if (c >= 0xe0) { cp = c & 0x0f; extra = 2; }
    else if (c >= 0xc0) { cp = c & 0x1f; extra = 1; }
    for (int k = 0; k < extra; ++k) {
        if (i + 1 >= s.size() || (static_cast<unsigned char>(s[i + 1]) & 0xc0) != 0x80)
            return c;  // malformed; treat lead byte as-is
        cp = (cp << 6) | (static_cast<unsigned char>(s[++i]) & 0x3f);
    }
    return cp;
}

inline void encode_utf8(std::uint32_t cp, std::string& out) {
    if (cp < 0x80) out += static_cast<char>(cp);
    else if (cp < 0x800) {
        out += static_cast<char>(0xc0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3f));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xe0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
        out += static_cast<char>(0x80 | (cp & 0x3f));
    } else {
        out += static_cast<char>(0xf0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
        out += static_cast<char>(0x80 | (cp & 0x3f));
    }
}

inline bool is_emoji_cp(std::uint32_t cp) {
    return (cp >= 0x1F000 && cp <= 0x1FAFF) ||  // pictographs, emoticons, symbols
           (cp >= 0x2600 && cp <= 0x27BF) ||    // misc symbols, dingbats
           (cp >= 0x2B00 && cp <= 0x2BFF) ||    // arrows/symbols block
           (cp >= 0xFE00 && cp <= 0xFE0F) ||    // variation selectors
           cp == 0x200D;                        // zero-width joiner
}

inline bool is_space_cp(std::uint32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' || cp == '\f' ||
           cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x3000;
}

inline std::string strip_urls(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        std::string_view rest(text.data() + i, text.size() - i);
        if (rest.starts_with("http://") || rest.starts_with("https://") ||
            rest.starts_with("www.")) {
            while (i < text.size() && !is_space_cp(static_cast<unsigned char>(text[i]))) ++i;
            out += ' ';
        } else {
            out += text[i++];
        }
    }
    return out;
}

inline std::string strip_mentions(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    auto handle_char = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_';
    };
    while (i < text.size()) {
        if (text[i] == '@' && i + 1 < text.size() && handle_char(text[i + 1])) {
            ++i;
            while (i < text.size() && handle_char(text[i])) ++i;
            out += ' ';
        } else {
            out += text[i++];
        }
    }
    return out;
}

inline std::string strip_codepoints(const std::string& text, bool drop_emoji,
                                    bool replace_nonletters) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        std::uint32_t cp = decode_utf8(text, i);
        if (drop_emoji && is_emoji_cp(cp)) continue;
        if (replace_nonletters && cp < 0x80) {
            const bool keep = (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
                              (cp >= '0' && cp <= '9') || is_space_cp(cp);
            if (!keep) { out += ' '; continue; }
        }
        encode_utf8(cp, out);
    }
    return out;
}

inline std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (std::size_t i = 0; i < text.size(); ++i) {
        std::size_t begin = i;
        std::uint32_t cp = decode_utf8(text, i);
        if (is_space_cp(cp)) {
            if (!current.empty()) { tokens.push_back(std::move(current)); current.clear(); }
        } else {
            current.append(text, begin, i - begin + 1);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace detail

// Applies the configured strip rules to raw text. Tokenization happens after.
inline std::string apply_strips(const std::string& text, const TokenizerConfig& cfg) {
    std::string s = text;
    for (StripRule rule : cfg.strip_patterns) {
        switch (rule) {
            case StripRule::Urls: s = detail::strip_urls(s); break;
            case StripRule::Mentions: s = detail::strip_mentions(s); break;
            case StripRule::HashtagMarkers: {
                std::string out;
                out.reserve(s.size());
                for (char c : s)
                    if (c != '#') out += c;
                s = std::move(out);
                break;
            }
            case StripRule::Emoji: s = detail::strip_codepoints(s, true, false); break;
            case StripRule::NonLetters: s = detail::strip_codepoints(s, false, true); break;
        }
    }
    return s;
}

namespace detail {

inline void finish_tokens(std::vector<std::string>& tokens, const TokenizerConfig& cfg) {
    // Stopword matching happens before lowercasing, per the pipeline order.
    std::erase_if(tokens, [&](const std::string& t) { return cfg.stopwords.count(t) > 0; });
    if (cfg.lowercase)
        for (auto& t : tokens) t = lower_ascii(t);
}

// Runs the external tokenizer over one text per line via temp files so the
// child never blocks on pipe buffers. Returns false on any failure.
inline bool run_external_tokenizer(const std::string& command,
                                   const std::vector<std::string>& texts,
                                   std::vector<std::vector<std::string>>& out) {
    static std::atomic<unsigned> counter{0};
    const std::string tag =
        std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1));
    std::string in_path = "/tmp/phaselda_tok_in_" + tag;
    std::string out_path = "/tmp/phaselda_tok_out_" + tag;
    {
        std::ofstream os(in_path, std::ios::binary);
        if (!os) return false;
        for (const std::string& t : texts) {
            std::string line = t;
            for (char& c : line)
                if (c == '\n' || c == '\r') c = ' ';
            os << line << '\n';
        }
    }
    std::string full = command + " < " + in_path + " > " + out_path;
    int rc = std::system(full.c_str());
    bool ok = rc == 0;
    if (ok) {
        std::ifstream is(out_path, std::ios::binary);
        std::string line;
        out.clear();
        while (std::getline(is, line)) out.push_back(whitespace_tokens(line));
        ok = out.size() == texts.size();
    }
    std::remove(in_path.c_str());
    std::remove(out_path.c_str());
    return ok;
}

}  // namespace detail

// preprocess for a batch of texts; one token list per input. The external
// tokenizer (if configured) replaces whitespace splitting and falls back to
// it on failure.
inline std::vector<std::vector<std::string>> preprocess_batch(
    const std::vector<std::string>& texts, const TokenizerConfig& cfg,
    Warnings* warnings = nullptr) {
    std::vector<std::string> stripped(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) stripped[i] = apply_strips(texts[i], cfg);

    std::vector<std::vector<std::string>> tokens;
    bool external_ok = false;
    if (!cfg.external_tokenizer.empty()) {
        external_ok = detail::run_external_tokenizer(cfg.external_tokenizer, stripped, tokens);
        if (!external_ok)
            warn(warnings, "external tokenizer '" + cfg.external_tokenizer +
                               "' failed; falling back to whitespace tokenization");
    }
    if (!external_ok) {
        tokens.resize(stripped.size());
        for (std::size_t i = 0; i < stripped.size(); ++i)
            tokens[i] = detail::whitespace_tokens(stripped[i]);
    }
    for (auto& t : tokens) detail::finish_tokens(t, cfg);
    return tokens;
}

inline std::vector<std::string> preprocess(const std::string& text, const TokenizerConfig& cfg,
                                           Warnings* warnings = nullptr) {
    return preprocess_batch({text}, cfg, warnings).front();
}

// Token universe for one phase: tokens seen >= min_count times, ids dense
// 0..V-1 assigned by descending corpus frequency (ties lexicographic).
struct Vocabulary {
    std::unordered_map<std::string, int> token_to_id;
    std::vector<std::string> id_to_token;
    std::vector<std::int64_t> counts;  // by id
    int min_count = 20;

    int size() const { return static_cast<int>(id_to_token.size()); }

    int id_of(const std::string& token) const {
        auto it = token_to_id.find(token);
        return it == token_to_id.end() ? -1 : it->second;
    }
};

inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs,
                                   int min_count = 20) {
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    std::map<std::string, std::int64_t> freq;  // ordered: lexicographic tie-break for free
    for (const auto& doc : docs)
        for (const auto& tok : doc) ++freq[tok];

    std::vector<std::pair<std::string, std::int64_t>> retained;
    for (const auto& [tok, n] : freq)
        if (n >= min_count) retained.emplace_back(tok, n);
    if (retained.empty())
        throw ConfigError("vocabulary empty after min_count=" + std::to_string(min_count) +
                          " filtering");

    std::stable_sort(retained.begin(), retained.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    Vocabulary vocab;
    vocab.min_count = min_count;
    vocab.id_to_token.reserve(retained.size());
    vocab.counts.reserve(retained.size());
    for (const auto& [tok, n] : retained) {
        vocab.token_to_id.emplace(tok, static_cast<int>(vocab.id_to_token.size()));
        vocab.id_to_token.push_back(tok);
        vocab.counts.push_back(n);
    }
    return vocab;
}

struct EncodedDoc {
    std::string doc_id;
    std::vector<int> tokens;  // vocabulary ids
};

struct EncodedCorpus {
    std::vector<EncodedDoc> docs;
    Vocabulary vocab;
    std::size_t dropped_empty = 0;  // docs emptied by OOV dropping
    std::size_t dropped_tokens = 0;

    std::size_t total_tokens() const {
        std::size_t n = 0;
        for (const auto& d : docs) n += d.tokens.size();
        return n;
    }
};

inline EncodedCorpus encode(const std::vector<std::string>& doc_ids,
                            const std::vector<std::vector<std::string>>& docs,
                            Vocabulary vocab) {
    EncodedCorpus out;
    out.vocab = std::move(vocab);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        EncodedDoc ed;
        ed.doc_id = doc_ids[i];
        for (const auto& tok : docs[i]) {
            int id = out.vocab.id_of(tok);
            if (id >= 0) ed.tokens.push_back(id);
            else ++out.dropped_tokens;
        }
        if (ed.tokens.empty()) ++out.dropped_empty;
        else out.docs.push_back(std::move(ed));
    }
    return out;
}

inline std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open stopword file: " + path);
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(is, line)) {
        std::string w = trim(line);
        if (!w.empty()) words.insert(w);
    }
    return words;
}

}  // namespace phaselda
