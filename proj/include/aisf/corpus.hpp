#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "aisf/errors.hpp"
#include "aisf/message.hpp"
#include "aisf/repertoire.hpp"

namespace aisf {

// ---------------------------------------------------------------------------
// Corpus wire format: one JSON object per line, fields id/sender/header/body
// and an optional label ("spam" | "legitimate").

inline LabeledMessage message_from_json(const nlohmann::json& j) {
    LabeledMessage msg;
    msg.id = j.at("id").get<std::string>();
    msg.sender = j.at("sender").get<std::string>();
    msg.header = j.value("header", std::string{});
    msg.body = j.value("body", std::string{});
    if (j.contains("label") && !j["label"].is_null())
        msg.label = label_from_string(j["label"].get<std::string>());
    if (msg.id.empty()) throw Error{"message id is empty"};
    if (msg.sender.empty()) throw Error{"message '" + msg.id + "' has an empty sender"};
    return msg;
}

inline nlohmann::json message_to_json(const LabeledMessage& msg) {
    nlohmann::json j{{"id", msg.id}, {"sender", msg.sender}, {"header", msg.header},
                     {"body", msg.body}};
    if (msg.label) j["label"] = to_string(*msg.label);
    return j;
}

inline std::vector<LabeledMessage> load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError{"cannot open corpus file: " + path};
    std::vector<LabeledMessage> corpus;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        LabeledMessage msg;
        try {
            msg = message_from_json(nlohmann::json::parse(line));
        } catch (const std::exception& e) {
            throw ParseError{path, lineno, e.what()};
        }
        if (!seen.insert(msg.id).second) throw DuplicateIdError{msg.id};
        corpus.push_back(std::move(msg));
    }
    return corpus;
}

inline void save_corpus(std::span<const LabeledMessage> corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError{"cannot write corpus file: " + path};
    for (const auto& msg : corpus) out << message_to_json(msg).dump() << '\n';
    if (!out.flush()) throw IoError{"failed writing corpus file: " + path};
}

// ---------------------------------------------------------------------------
// Confusion-matrix metrics, spam as the positive class. Ratios with a zero
// denominator are reported absent rather than zero.

struct Metrics {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::optional<double> precision, recall, fp_rate, fn_rate;

    std::uint64_t total() const { return tp + fp + tn + fn; }
    std::optional<double> accuracy() const {
        if (total() == 0) return std::nullopt;
        return static_cast<double>(tp + tn) / static_cast<double>(total());
    }
};

inline Metrics compute_metrics(std::span<const Label> predicted, std::span<const Label> truth) {
    if (predicted.size() != truth.size()) throw LengthMismatchError{};
    Metrics m;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool pred_spam = predicted[i] == Label::Spam;
        const bool is_spam = truth[i] == Label::Spam;
        if (pred_spam && is_spam) ++m.tp;
        else if (pred_spam && !is_spam) ++m.fp;
        else if (!pred_spam && is_spam) ++m.fn;
        else ++m.tn;
    }
    auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.precision = ratio(m.tp, m.tp + m.fp);
    m.recall = ratio(m.tp, m.tp + m.fn);
    m.fp_rate = ratio(m.fp, m.fp + m.tn);
    m.fn_rate = ratio(m.fn, m.fn + m.tp);
    return m;
}

inline nlohmann::json metrics_to_json(const Metrics& m) {
    nlohmann::json j{{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}};
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("precision", m.precision);
    put("recall", m.recall);
    put("fp_rate", m.fp_rate);
    put("fn_rate", m.fn_rate);
    put("accuracy", m.accuracy());
    return j;
}

// ---------------------------------------------------------------------------
// Synthetic corpus generator for desk-scale experiments. Fully deterministic
// given (seed, spec); the substitution pass draws from its own stream, so two
// corpora that differ only in substitution_rate contain the same words.

struct GenSpec {
    std::uint64_t n_spam = 50;
    std::uint64_t n_legit = 50;
    std::uint32_t spam_vocab_size = 40;
    std::uint32_t legit_vocab_size = 40;
    std::uint32_t vocab_overlap = 5;
    std::uint32_t spam_sender_pool = 10;
    std::uint32_t legit_sender_pool = 10;
    std::uint32_t words_min = 4;
    std::uint32_t words_max = 9;
    std::uint32_t header_words = 2;
    std::uint32_t word_len_min = 4;
    std::uint32_t word_len_max = 9;
    // Probability that a spam word gets one confusable-character swap.
    double substitution_rate = 0.0;
    // Bump to rotate the spam vocabulary or sender pool (concept drift).
    std::uint64_t spam_vocab_epoch = 0;
    std::uint64_t spam_sender_epoch = 0;
    // Distinguishes independent message streams drawn from the same pools.
    std::uint64_t message_salt = 0;
    std::string id_prefix = "m";
};

inline GenSpec gen_spec_from_json(const nlohmann::json& j) {
    GenSpec s;
    s.n_spam = j.value("n_spam", s.n_spam);
    s.n_legit = j.value("n_legit", s.n_legit);
    s.spam_vocab_size = j.value("spam_vocab_size", s.spam_vocab_size);
    s.legit_vocab_size = j.value("legit_vocab_size", s.legit_vocab_size);
    s.vocab_overlap = j.value("vocab_overlap", s.vocab_overlap);
    s.spam_sender_pool = j.value("spam_sender_pool", s.spam_sender_pool);
    s.legit_sender_pool = j.value("legit_sender_pool", s.legit_sender_pool);
    s.words_min = j.value("words_min", s.words_min);
    s.words_max = j.value("words_max", s.words_max);
    s.header_words = j.value("header_words", s.header_words);
    s.word_len_min = j.value("word_len_min", s.word_len_min);
    s.word_len_max = j.value("word_len_max", s.word_len_max);
    s.substitution_rate = j.value("substitution_rate", s.substitution_rate);
    s.spam_vocab_epoch = j.value("spam_vocab_epoch", s.spam_vocab_epoch);
    s.spam_sender_epoch = j.value("spam_sender_epoch", s.spam_sender_epoch);
    s.message_salt = j.value("message_salt", s.message_salt);
    s.id_prefix = j.value("id_prefix", s.id_prefix);
    return s;
}

namespace gen_detail {

// Letters that have a designated digit/symbol look-alike.
inline const std::string& swappable_letters() {
    static const std::string s = "olzeastbg";
    return s;
}

inline char swap_confusable(char c) {
    switch (c) {
        case 'o': return '0';
        case 'l': return '1';
        case 'z': return '2';
        case 'e': return '3';
        case 'a': return '4';
        case 's': return '5';
        case 't': return '7';
        case 'b': return '8';
        case 'g': return '9';
        default: return c;
    }
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed ^ (salt * 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Random lowercase word guaranteed to contain at least one swappable letter.
inline std::string make_word(std::mt19937_64& rng, const GenSpec& spec) {
    const std::size_t len =
        spec.word_len_min + uniform_index(rng, spec.word_len_max - spec.word_len_min + 1);
    std::string w(len, 'a');
    for (auto& c : w) c = static_cast<char>('a' + uniform_index(rng, 26));
    const auto& swappable = swappable_letters();
    if (w.find_first_of(swappable) == std::string::npos)
        w[uniform_index(rng, w.size())] = swappable[uniform_index(rng, swappable.size())];
    return w;
}

inline std::vector<std::string> make_vocab(std::uint64_t seed, std::uint64_t salt,
                                           std::size_t size, const GenSpec& spec) {
    std::mt19937_64 rng(mix(seed, salt));
    std::vector<std::string> words;
    std::unordered_set<std::string> seen;
    while (words.size() < size) {
        std::string w = make_word(rng, spec);
        if (seen.insert(w).second) words.push_back(std::move(w));
    }
    return words;
}

inline std::vector<std::string> make_senders(std::uint64_t seed, std::uint64_t salt,
                                             std::size_t size, const GenSpec& spec) {
    static const char* kTlds[] = {"com", "net", "org"};
    std::mt19937_64 rng(mix(seed, salt));
    std::vector<std::string> senders;
    std::unordered_set<std::string> seen;
    while (senders.size() < size) {
        std::string s = make_word(rng, spec) + std::to_string(uniform_index(rng, 100)) + "@" +
                        make_word(rng, spec) + "." + kTlds[uniform_index(rng, 3)];
        if (seen.insert(s).second) senders.push_back(std::move(s));
    }
    return senders;
}

}  // namespace gen_detail

inline std::vector<LabeledMessage> gen_corpus(std::uint64_t seed, const GenSpec& spec) {
    using namespace gen_detail;
    if (spec.words_min < 1 || spec.words_max < spec.words_min ||
        spec.word_len_max < spec.word_len_min || spec.word_len_min < 1)
        throw ConfigError{"gen-corpus word counts must be ordered and >= 1"};

    const auto overlap = make_vocab(seed, 0xA11, spec.vocab_overlap, spec);
    auto spam_vocab = make_vocab(seed, mix(0x51, spec.spam_vocab_epoch),
                                 spec.spam_vocab_size, spec);
    auto legit_vocab = make_vocab(seed, 0x1E, spec.legit_vocab_size, spec);
    spam_vocab.insert(spam_vocab.end(), overlap.begin(), overlap.end());
    legit_vocab.insert(legit_vocab.end(), overlap.begin(), overlap.end());
    const auto spam_senders =
        make_senders(seed, mix(0x5E, spec.spam_sender_epoch), spec.spam_sender_pool, spec);
    const auto legit_senders = make_senders(seed, 0x1F, spec.legit_sender_pool, spec);
    if (spec.n_spam > 0 && (spam_vocab.empty() || spam_senders.empty()))
        throw ConfigError{"gen-corpus spam vocabulary and sender pool must be non-empty"};
    if (spec.n_legit > 0 && (legit_vocab.empty() || legit_senders.empty()))
        throw ConfigError{"gen-corpus legit vocabulary and sender pool must be non-empty"};

    std::mt19937_64 rng(mix(seed, mix(0xC0FFEE, spec.message_salt)));
    std::mt19937_64 sub_rng(mix(seed, mix(0x5B5B, spec.message_salt)));

    std::vector<LabeledMessage> corpus;
    corpus.reserve(spec.n_spam + spec.n_legit);
    std::vector<Label> labels(spec.n_spam, Label::Spam);
    labels.insert(labels.end(), spec.n_legit, Label::Legitimate);
    for (std::size_t i = labels.size(); i > 1; --i)
        std::swap(labels[i - 1], labels[uniform_index(rng, i)]);

    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool spam = labels[i] == Label::Spam;
        const auto& vocab = spam ? spam_vocab : legit_vocab;
        const auto& senders = spam ? spam_senders : legit_senders;
        const std::size_t n_words =
            spec.words_min + uniform_index(rng, spec.words_max - spec.words_min + 1);
        std::vector<std::string> words;
        words.reserve(n_words);
        for (std::size_t w = 0; w < n_words; ++w)
            words.push_back(vocab[uniform_index(rng, vocab.size())]);
        if (spam && spec.substitution_rate > 0.0) {
            for (auto& w : words) {
                if (next_unit(sub_rng) >= spec.substitution_rate) continue;
                std::vector<std::size_t> eligible;
                for (std::size_t p = 0; p < w.size(); ++p)
                    if (swap_confusable(w[p]) != w[p]) eligible.push_back(p);
                if (eligible.empty()) continue;
                const std::size_t p = eligible[uniform_index(sub_rng, eligible.size())];
                w[p] = swap_confusable(w[p]);
            }
        }
        LabeledMessage msg;
        char idbuf[32];
        std::snprintf(idbuf, sizeof idbuf, "%06zu", i);
        msg.id = spec.id_prefix + idbuf;
        msg.sender = senders[uniform_index(rng, senders.size())];
        msg.label = labels[i];
        const std::size_t split = std::min<std::size_t>(spec.header_words, words.size());
        for (std::size_t w = 0; w < words.size(); ++w) {
            std::string& field = w < split ? msg.header : msg.body;
            if (!field.empty()) field.push_back(' ');
            field += words[w];
        }
        corpus.push_back(std::move(msg));
    }
    return corpus;
}

}  // namespace aisf
