#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aisf/bitseq.hpp"
#include "aisf/codebook.hpp"
#include "aisf/config.hpp"
#include "aisf/errors.hpp"
#include "aisf/message.hpp"

namespace aisf {

// Encoded sender address; the innate (macrophage) recognition target.
struct MolecularPattern {
    BitSequence bits;
    friend bool operator==(const MolecularPattern&, const MolecularPattern&) = default;
    friend auto operator<=>(const MolecularPattern& a, const MolecularPattern& b) {
        return a.bits <=> b.bits;
    }
};

// One encoded word; the unit of receptor binding.
struct Peptide {
    BitSequence bits;
    friend bool operator==(const Peptide&, const Peptide&) = default;
    friend auto operator<=>(const Peptide& a, const Peptide& b) { return a.bits <=> b.bits; }
};

// Encoded message content, header words first.
struct Antigen {
    std::vector<Peptide> peptides;
};

// A whole message viewed as a pathogen.
struct Microorganism {
    MolecularPattern pattern;
    Antigen antigen;
    std::string source_id;
};

enum class CellRole { BCell, HelperT, ControllerT };

inline const char* to_string(CellRole role) {
    switch (role) {
        case CellRole::BCell: return "b_cell";
        case CellRole::HelperT: return "helper_t";
        default: return "controller_t";
    }
}

// Match bookkeeping per lymphocyte. Every match bumps transaction_match; only
// matches on spam-labeled encounters bump replication_attack_match, so the
// spam counter never exceeds the total.
struct CellWeights {
    std::uint32_t replication_attack_match = 0;
    std::uint32_t transaction_match = 0;
    friend bool operator==(const CellWeights&, const CellWeights&) = default;
};

struct Lymphocyte {
    std::uint64_t id = 0;
    CellRole role = CellRole::BCell;
    BitSequence receptor;
    CellWeights weights;
    std::uint32_t lifetime = 0;
    // Classification rounds this cell has evaluated; drives the pruning grace
    // period.
    std::uint32_t encounters = 0;
};

struct Macrophage {
    std::uint64_t id = 0;
    MolecularPattern receptor;
};

namespace detail {

template <typename T>
bool sorted_insert(std::vector<T>& v, const T& x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it != v.end() && *it == x) return false;
    v.insert(it, x);
    return true;
}

template <typename T>
bool sorted_erase(std::vector<T>& v, const T& x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || !(*it == x)) return false;
    v.erase(it);
    return true;
}

template <typename T>
bool sorted_contains(const std::vector<T>& v, const T& x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    return it != v.end() && *it == x;
}

}  // namespace detail

// Self and non-self stores of patterns and peptides. Kept sorted so iteration
// (and therefore receptor generation) is deterministic. A pattern never sits
// on both sides at once; peptides may.
class GeneLibrary {
public:
    bool add_self_pattern(const MolecularPattern& p) { return detail::sorted_insert(self_patterns_, p); }
    bool add_nonself_pattern(const MolecularPattern& p) { return detail::sorted_insert(nonself_patterns_, p); }
    bool remove_self_pattern(const MolecularPattern& p) { return detail::sorted_erase(self_patterns_, p); }
    bool remove_nonself_pattern(const MolecularPattern& p) { return detail::sorted_erase(nonself_patterns_, p); }
    bool has_self_pattern(const MolecularPattern& p) const { return detail::sorted_contains(self_patterns_, p); }
    bool has_nonself_pattern(const MolecularPattern& p) const { return detail::sorted_contains(nonself_patterns_, p); }

    bool add_self_peptide(const Peptide& p) { return detail::sorted_insert(self_peptides_, p); }
    bool add_nonself_peptide(const Peptide& p) { return detail::sorted_insert(nonself_peptides_, p); }
    bool remove_self_peptide(const Peptide& p) { return detail::sorted_erase(self_peptides_, p); }
    bool remove_nonself_peptide(const Peptide& p) { return detail::sorted_erase(nonself_peptides_, p); }
    bool has_self_peptide(const Peptide& p) const { return detail::sorted_contains(self_peptides_, p); }
    bool has_nonself_peptide(const Peptide& p) const { return detail::sorted_contains(nonself_peptides_, p); }

    const std::vector<MolecularPattern>& self_patterns() const { return self_patterns_; }
    const std::vector<MolecularPattern>& nonself_patterns() const { return nonself_patterns_; }
    const std::vector<Peptide>& self_peptides() const { return self_peptides_; }
    const std::vector<Peptide>& nonself_peptides() const { return nonself_peptides_; }

    bool patterns_disjoint() const {
        for (const auto& p : nonself_patterns_)
            if (has_self_pattern(p)) return false;
        return true;
    }

    bool empty() const {
        return self_patterns_.empty() && nonself_patterns_.empty() && self_peptides_.empty() &&
               nonself_peptides_.empty();
    }

private:
    std::vector<MolecularPattern> self_patterns_;
    std::vector<MolecularPattern> nonself_patterns_;
    std::vector<Peptide> self_peptides_;
    std::vector<Peptide> nonself_peptides_;
};

// Unbiased integer in [0, n) via rejection sampling, so streams replay the
// same on every platform.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x < threshold);
    return x % n;
}

// ---------------------------------------------------------------------------
// Microorganism and library construction.

inline Microorganism build_microorganism(const LabeledMessage& msg, const Codebook& cb) {
    const std::string sender = normalize_address(msg.sender, cb);
    if (sender.empty()) throw MissingSenderError{msg.id};
    Microorganism mo;
    mo.source_id = msg.id;
    mo.pattern.bits = encode(sender, cb);
    for (const auto& part : {msg.header, msg.body})
        for (const auto& word : tokenize(part, cb))
            mo.antigen.peptides.push_back(Peptide{encode(word, cb)});
    return mo;
}

// Collects patterns and peptides per label. A sender seen under both labels
// stays on the non-self side only: once trained as an attack source, always
// an attack source.
inline GeneLibrary build_library(std::span<const LabeledMessage> training, const Codebook& cb) {
    if (training.empty()) throw EmptyTrainingSetError{};
    GeneLibrary lib;
    std::size_t n_self = 0, n_nonself = 0;
    for (const auto& msg : training) {
        if (!msg.label) throw Error{"training message '" + msg.id + "' has no label"};
        const Microorganism mo = build_microorganism(msg, cb);
        if (*msg.label == Label::Spam) {
            ++n_nonself;
            lib.add_nonself_pattern(mo.pattern);
            for (const auto& p : mo.antigen.peptides) lib.add_nonself_peptide(p);
        } else {
            ++n_self;
            lib.add_self_pattern(mo.pattern);
            for (const auto& p : mo.antigen.peptides) lib.add_self_peptide(p);
        }
    }
    for (const auto& p : lib.nonself_patterns()) lib.remove_self_pattern(p);
    if (n_self == 0 || n_nonself == 0)
        std::fprintf(stderr, "warning: training set has no %s examples\n",
                     n_self == 0 ? "legitimate" : "spam");
    return lib;
}

inline std::vector<Macrophage> generate_macrophages(const GeneLibrary& lib,
                                                    std::uint64_t& next_id) {
    std::vector<Macrophage> out;
    for (const auto& p : lib.nonself_patterns())
        if (!lib.has_self_pattern(p)) out.push_back(Macrophage{next_id++, p});
    return out;
}

// Receptors recombine 1..k_max peptides from the role's library side:
// non-self material for B and helper T cells, self material for controller
// T cells.
inline const std::vector<Peptide>& receptor_source(const GeneLibrary& lib, CellRole role) {
    return role == CellRole::ControllerT ? lib.self_peptides() : lib.nonself_peptides();
}

inline Lymphocyte make_lymphocyte(const GeneLibrary& lib, CellRole role, const RunConfig& cfg,
                                  std::mt19937_64& rng, std::uint64_t& next_id) {
    const auto& source = receptor_source(lib, role);
    if (source.empty()) throw EmptySourceSetError{to_string(role)};
    Lymphocyte cell;
    cell.id = next_id++;
    cell.role = role;
    cell.lifetime = cfg.initial_lifetime;
    const std::uint64_t k = 1 + uniform_index(rng, cfg.k_max);
    for (std::uint64_t i = 0; i < k; ++i)
        cell.receptor.append(source[uniform_index(rng, source.size())].bits);
    return cell;
}

inline std::vector<Lymphocyte> generate_lymphocytes(const GeneLibrary& lib, CellRole role,
                                                    std::size_t count, const RunConfig& cfg,
                                                    std::mt19937_64& rng,
                                                    std::uint64_t& next_id) {
    std::vector<Lymphocyte> cells;
    cells.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        cells.push_back(make_lymphocyte(lib, role, cfg, rng, next_id));
    return cells;
}

inline std::vector<Lymphocyte> generate_lymphocytes(const GeneLibrary& lib, CellRole role,
                                                    std::size_t count, const RunConfig& cfg,
                                                    std::uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    std::uint64_t next_id = 1;
    return generate_lymphocytes(lib, role, count, cfg, rng, next_id);
}

// ---------------------------------------------------------------------------
// Negative selection and pruning.

inline bool matches_any_peptide(const BitSequence& receptor, std::span<const Peptide> peptides,
                                std::uint32_t r) {
    for (const auto& p : peptides)
        if (matches(receptor, p.bits, r)) return true;
    return false;
}

// Keeps only cells that bind no self peptide at threshold r; order preserved.
inline std::vector<Lymphocyte> negative_selection(std::vector<Lymphocyte> cells,
                                                  std::span<const Peptide> self_peptides,
                                                  std::uint32_t r) {
    std::erase_if(cells, [&](const Lymphocyte& cell) {
        return matches_any_peptide(cell.receptor, self_peptides, r);
    });
    return cells;
}

inline std::vector<Lymphocyte> negative_selection(std::vector<Lymphocyte> cells,
                                                  std::span<const Antigen> self_antigens,
                                                  std::uint32_t r) {
    std::vector<Peptide> peptides;
    for (const auto& a : self_antigens)
        peptides.insert(peptides.end(), a.peptides.begin(), a.peptides.end());
    return negative_selection(std::move(cells), std::span<const Peptide>{peptides}, r);
}

// Drops cells that have evaluated at least min_encounters rounds without ever
// matching a transaction. Fresh cells keep their grace period.
inline std::vector<Lymphocyte> prune_useless(std::vector<Lymphocyte> cells,
                                             std::uint32_t min_encounters) {
    if (min_encounters < 1) throw Error{"min_encounters must be >= 1"};
    std::erase_if(cells, [&](const Lymphocyte& cell) {
        return cell.encounters >= min_encounters && cell.weights.transaction_match == 0;
    });
    return cells;
}

}  // namespace aisf
