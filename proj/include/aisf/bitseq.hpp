#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "aisf/errors.hpp"

namespace aisf {

// Packed bit string. Bit i lives in word i/64 at position i%64; unused high
// bits of the last word are kept zero so whole-word compares are valid.
class BitSequence {
public:
    BitSequence() = default;

    // Parses a string of '0'/'1' characters.
    explicit BitSequence(std::string_view bits) {
        for (char c : bits) push_back(c == '1');
    }

    std::size_t size() const { return len_; }
    bool empty() const { return len_ == 0; }

    bool bit(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }

    void push_back(bool b) {
        if ((len_ & 63) == 0) words_.push_back(0);
        if (b) words_.back() |= std::uint64_t{1} << (len_ & 63);
        ++len_;
    }

    void append(const BitSequence& other) {
        for (std::size_t i = 0; i < other.len_; ++i) push_back(other.bit(i));
    }

    std::string to_string() const {
        std::string s;
        s.reserve(len_);
        for (std::size_t i = 0; i < len_; ++i) s.push_back(bit(i) ? '1' : '0');
        return s;
    }

    const std::vector<std::uint64_t>& words() const { return words_; }

    friend bool operator==(const BitSequence& a, const BitSequence& b) {
        return a.len_ == b.len_ && a.words_ == b.words_;
    }

    // Total order (length first, then content) so sorted containers iterate
    // deterministically regardless of insertion history.
    friend std::strong_ordering operator<=>(const BitSequence& a, const BitSequence& b) {
        if (auto c = a.len_ <=> b.len_; c != 0) return c;
        for (std::size_t i = 0; i < a.words_.size(); ++i)
            if (auto c = a.words_[i] <=> b.words_[i]; c != 0) return c;
        return std::strong_ordering::equal;
    }

private:
    std::vector<std::uint64_t> words_;
    std::size_t len_ = 0;
};

namespace detail {

inline std::uint64_t tail_mask(std::size_t nbits) {
    const std::size_t rem = nbits & 63;
    return rem ? (std::uint64_t{1} << rem) - 1 : ~std::uint64_t{0};
}

// Word j of the length-n window of `l` starting at bit `offset`.
inline std::uint64_t window_word(const std::vector<std::uint64_t>& l, std::size_t offset,
                                 std::size_t j) {
    const std::size_t q = offset >> 6;
    const std::size_t r = offset & 63;
    std::uint64_t w = l[q + j] >> r;
    if (r != 0 && q + j + 1 < l.size()) w |= l[q + j + 1] << (64 - r);
    return w;
}

// Longest run of set bits in `eq` (nbits valid), capped at `cap`. Each pass of
// the shift-and step keeps only bits that end a run one longer than before.
inline std::size_t longest_one_run(std::vector<std::uint64_t>& eq, std::size_t nbits,
                                   std::size_t cap) {
    const std::size_t wc = (nbits + 63) >> 6;
    std::size_t run = 0;
    while (run < cap) {
        bool any = false;
        for (std::size_t j = 0; j < wc; ++j)
            if (eq[j]) {
                any = true;
                break;
            }
        if (!any) break;
        ++run;
        if (run >= cap) break;
        std::uint64_t carry = 0;
        for (std::size_t j = 0; j < wc; ++j) {
            const std::uint64_t next_carry = eq[j] >> 63;
            eq[j] &= (eq[j] << 1) | carry;
            carry = next_carry;
        }
    }
    return run;
}

// Maximum matching run over all full-overlap alignments, capped at `cap`.
inline std::size_t affinity_capped(const BitSequence& a, const BitSequence& b, std::size_t cap) {
    if (a.empty() || b.empty()) throw EmptySequenceError{};
    const BitSequence& s = a.size() <= b.size() ? a : b;
    const BitSequence& l = a.size() <= b.size() ? b : a;
    const std::size_t n = s.size();
    const std::size_t wc = (n + 63) >> 6;
    const std::uint64_t mask = tail_mask(n);
    cap = std::min(cap, n);

    std::vector<std::uint64_t> eq(wc);
    std::size_t best = 0;
    for (std::size_t offset = 0; offset + n <= l.size(); ++offset) {
        for (std::size_t j = 0; j < wc; ++j)
            eq[j] = ~(s.words()[j] ^ window_word(l.words(), offset, j));
        eq[wc - 1] &= mask;
        best = std::max(best, longest_one_run(eq, n, cap));
        if (best >= cap) return best;
    }
    return best;
}

}  // namespace detail

// Longest run of consecutive equal bits between the two sequences, maximized
// over every alignment that keeps the shorter one fully inside the longer.
inline std::size_t affinity(const BitSequence& a, const BitSequence& b) {
    return detail::affinity_capped(a, b, std::min(a.size(), b.size()));
}

// True iff affinity(a, b) >= r. Stops scanning as soon as a run of r is found.
inline bool matches(const BitSequence& a, const BitSequence& b, std::size_t r) {
    if (r < 1) throw Error{"match threshold must be >= 1"};
    if (r > std::min(a.size(), b.size())) {
        if (a.empty() || b.empty()) throw EmptySequenceError{};
        return false;
    }
    return detail::affinity_capped(a, b, r) >= r;
}

}  // namespace aisf
