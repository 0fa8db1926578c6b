#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aisf/bitseq.hpp"
#include "aisf/errors.hpp"

namespace aisf {

inline constexpr std::uint32_t kCodebookVersion = 1;
inline constexpr std::size_t kCodebookSize = 64;
inline constexpr std::size_t kCodeBits = 6;

// Tokens longer than this are cut off; bounds receptor length and match cost.
inline constexpr std::size_t kMaxTokenSymbols = 20;

// Bijective map between 64 symbols and 6-bit codes. Visually confusable pairs
// (digit/letter look-alikes) are assigned codes that differ only in the top
// one or two bits, so a swapped character perturbs at most two adjacent bits
// at the front of its code block.
class Codebook {
public:
    Codebook() { sym_to_code_.fill(-1); }

    bool contains(char c) const {
        const auto u = static_cast<unsigned char>(c);
        return u < 128 && sym_to_code_[u] >= 0;
    }

    std::uint8_t code(char c) const {
        if (!contains(c)) throw UnencodableSymbolError{c};
        return static_cast<std::uint8_t>(sym_to_code_[static_cast<unsigned char>(c)]);
    }

    char symbol(std::uint8_t code) const { return code_to_sym_[code & 63]; }

    std::uint32_t version() const { return version_; }

    // Entries in code order; used by the serializer and the table dumper.
    std::vector<std::pair<char, std::uint8_t>> entries() const {
        std::vector<std::pair<char, std::uint8_t>> out;
        out.reserve(kCodebookSize);
        for (std::size_t code = 0; code < kCodebookSize; ++code)
            out.emplace_back(code_to_sym_[code], static_cast<std::uint8_t>(code));
        return out;
    }

    static Codebook from_entries(const std::vector<std::pair<char, std::uint8_t>>& entries,
                                 std::uint32_t version);

private:
    std::array<std::int8_t, 128> sym_to_code_;
    std::array<char, kCodebookSize> code_to_sym_{};
    std::uint32_t version_ = kCodebookVersion;
};

// Look-alike pairs the codec must keep within Hamming distance 2.
inline const std::vector<std::pair<char, char>>& confusable_pairs() {
    static const std::vector<std::pair<char, char>> pairs = {
        {'0', 'o'}, {'1', 'l'}, {'2', 'z'}, {'3', 'e'}, {'4', 'a'}, {'5', 's'},
        {'7', 't'}, {'8', 'b'}, {'9', 'g'}, {'$', 's'}, {'@', 'a'},
    };
    return pairs;
}

namespace detail {

inline unsigned hamming6(std::uint8_t a, std::uint8_t b) {
    unsigned d = 0;
    for (std::uint8_t x = (a ^ b) & 63; x; x &= x - 1) ++d;
    return d;
}

// Symbol/code table, grouped. Letters take codes 0..25; digit look-alikes are
// their letter's code with bit 5 flipped; '$' and '@' flip bits 5 and 4.
inline const std::vector<std::pair<char, std::uint8_t>>& default_entries() {
    static const std::vector<std::pair<char, std::uint8_t>> table = {
        {'a', 0},   {'b', 1},   {'c', 2},   {'d', 3},  {'e', 4},   {'f', 5},  {'g', 6},
        {'h', 7},   {'i', 8},   {'j', 9},   {'k', 10}, {'l', 11},  {'m', 12}, {'n', 13},
        {'o', 14},  {'p', 15},  {'q', 16},  {'r', 17}, {'s', 18},  {'t', 19}, {'u', 20},
        {'v', 21},  {'w', 22},  {'x', 23},  {'y', 24}, {'z', 25},

        {'0', 46},  {'1', 43},  {'2', 57},  {'3', 36}, {'4', 32},  {'5', 50}, {'6', 26},
        {'7', 51},  {'8', 33},  {'9', 38},

        {'$', 34},  {'@', 48},  {'"', 27},  {'#', 28}, {'%', 29},  {'&', 30}, {'\'', 31},
        {'(', 35},  {')', 37},  {'*', 39},  {'+', 40}, {'.', 41},  {'/', 42}, {':', 44},
        {';', 45},  {'<', 47},  {'=', 49},  {'>', 52}, {'?', 53},  {'[', 54}, {'\\', 55},
        {']', 56},  {'^', 58},  {'_', 59},  {'`', 60}, {'{', 61},  {'|', 62}, {'}', 63},
    };
    return table;
}

}  // namespace detail

inline Codebook Codebook::from_entries(const std::vector<std::pair<char, std::uint8_t>>& entries,
                                       std::uint32_t version) {
    if (entries.size() != kCodebookSize)
        throw CodebookError{"expected 64 entries, got " + std::to_string(entries.size())};
    Codebook cb;
    cb.version_ = version;
    std::array<bool, kCodebookSize> code_used{};
    for (auto [sym, code] : entries) {
        const auto u = static_cast<unsigned char>(sym);
        if (u >= 128 || std::isspace(u))
            throw CodebookError{"symbol out of range"};
        if (code >= kCodebookSize)
            throw CodebookError{"code out of range for symbol '" + std::string(1, sym) + "'"};
        if (cb.sym_to_code_[u] >= 0)
            throw CodebookError{"duplicate symbol '" + std::string(1, sym) + "'"};
        if (code_used[code])
            throw CodebookError{"duplicate code for symbol '" + std::string(1, sym) + "'"};
        cb.sym_to_code_[u] = static_cast<std::int8_t>(code);
        cb.code_to_sym_[code] = sym;
        code_used[code] = true;
    }
    for (auto [a, b] : confusable_pairs()) {
        if (!cb.contains(a) || !cb.contains(b))
            throw CodebookError{std::string("confusable pair ") + a + "/" + b + " not covered"};
        if (detail::hamming6(cb.code(a), cb.code(b)) > 2)
            throw CodebookError{std::string("confusable pair ") + a + "/" + b +
                                " exceeds Hamming distance 2"};
    }
    return cb;
}

inline const Codebook& default_codebook() {
    static const Codebook cb = Codebook::from_entries(detail::default_entries(), kCodebookVersion);
    return cb;
}

// ---------------------------------------------------------------------------
// Codebook file format: '# version N' header, then one 'symbol<TAB>bbbbbb'
// line per entry with the code written MSB-first.

inline void save_codebook(const Codebook& cb, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError{"cannot write codebook file: " + path};
    out << "# version " << cb.version() << "\n";
    for (auto [sym, code] : cb.entries()) {
        out << sym << '\t';
        for (int b = 5; b >= 0; --b) out << (((code >> b) & 1) ? '1' : '0');
        out << '\n';
    }
    if (!out.flush()) throw IoError{"failed writing codebook file: " + path};
}

inline Codebook load_codebook(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError{"cannot open codebook file: " + path};
    std::vector<std::pair<char, std::uint8_t>> entries;
    std::uint32_t version = 0;
    bool saw_version = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            std::istringstream hdr(line.substr(2));
            std::string key;
            if (hdr >> key && key == "version" && hdr >> version) saw_version = true;
            continue;
        }
        if (line.size() != 8 || line[1] != '\t')
            throw ParseError{path, lineno, "expected 'symbol<TAB>6-bit-code'"};
        std::uint8_t code = 0;
        for (std::size_t i = 2; i < 8; ++i) {
            if (line[i] != '0' && line[i] != '1')
                throw ParseError{path, lineno, "code must be 6 binary digits"};
            code = static_cast<std::uint8_t>((code << 1) | (line[i] - '0'));
        }
        entries.emplace_back(line[0], code);
    }
    if (!saw_version) throw CodebookError{"missing '# version' header in " + path};
    return Codebook::from_entries(entries, version);
}

// ---------------------------------------------------------------------------
// Normalization and the codec.

inline char fold_char(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

// Maximal runs of codebook symbols after lowercasing; anything else splits.
inline std::vector<std::string> tokenize(std::string_view text, const Codebook& cb) {
    std::vector<std::string> tokens;
    std::string cur;
    bool in_run = false;
    for (char raw : text) {
        const char c = fold_char(raw);
        if (cb.contains(c)) {
            in_run = true;
            if (cur.size() < kMaxTokenSymbols) cur.push_back(c);
        } else if (in_run) {
            tokens.push_back(std::move(cur));
            cur.clear();
            in_run = false;
        }
    }
    if (in_run) tokens.push_back(std::move(cur));
    return tokens;
}

// Lowercases and keeps codebook symbols only; used for sender addresses.
inline std::string normalize_address(std::string_view raw, const Codebook& cb) {
    std::string out;
    for (char c : raw) {
        const char f = fold_char(c);
        if (cb.contains(f) && out.size() < kMaxTokenSymbols * 2) out.push_back(f);
    }
    return out;
}

inline BitSequence encode(std::string_view token, const Codebook& cb) {
    BitSequence bits;
    for (char c : token) {
        const std::uint8_t code = cb.code(c);
        for (int b = 5; b >= 0; --b) bits.push_back((code >> b) & 1);
    }
    return bits;
}

inline std::string decode(const BitSequence& bits, const Codebook& cb) {
    if (bits.size() % kCodeBits != 0)
        throw Error{"bit sequence length is not a multiple of 6"};
    std::string out;
    for (std::size_t i = 0; i < bits.size(); i += kCodeBits) {
        std::uint8_t code = 0;
        for (std::size_t b = 0; b < kCodeBits; ++b)
            code = static_cast<std::uint8_t>((code << 1) | (bits.bit(i + b) ? 1 : 0));
        out.push_back(cb.symbol(code));
    }
    return out;
}

}  // namespace aisf
