#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aisf/codebook.hpp"
#include "aisf/config.hpp"
#include "aisf/errors.hpp"
#include "aisf/repertoire.hpp"

namespace aisf {

enum class VerdictRoute { MacrophageHit, NoBCellBound, TCellDecision };

inline const char* to_string(VerdictRoute r) {
    switch (r) {
        case VerdictRoute::MacrophageHit: return "macrophage_hit";
        case VerdictRoute::NoBCellBound: return "no_b_cell_bound";
        default: return "t_cell_decision";
    }
}

struct SignalTally {
    std::uint32_t helper_stimulations = 0;
    std::uint32_t controller_stimulations = 0;
    friend bool operator==(const SignalTally&, const SignalTally&) = default;
};

struct Verdict {
    Label label = Label::Legitimate;
    VerdictRoute route = VerdictRoute::NoBCellBound;
    // Cells whose signals produced the decision: matching macrophages on the
    // innate route, stimulated B/helper/controller cells on the adaptive one.
    std::vector<std::uint64_t> evidence;
    SignalTally tally;
};

enum class StageMode { Learning, Normal, Relearning, Test };

inline const char* to_string(StageMode m) {
    switch (m) {
        case StageMode::Learning: return "learning";
        case StageMode::Normal: return "normal";
        case StageMode::Relearning: return "relearning";
        default: return "test";
    }
}

// What one classified message leaves behind for the replay log.
struct LogEntry {
    Microorganism microorganism;
    Verdict verdict;
};

inline constexpr std::size_t kReplayLogCapacity = 10000;

struct ClassifierState {
    Codebook codebook;
    GeneLibrary library;
    std::vector<Macrophage> macrophages;
    std::vector<Lymphocyte> b_cells;
    std::vector<Lymphocyte> helper_t;
    std::vector<Lymphocyte> controller_t;
    RunConfig params;
    StageMode mode = StageMode::Learning;
    std::uint64_t encounter_count = 0;
    std::uint64_t next_cell_id = 1;
    std::mt19937_64 rng;
    bool initialized = false;
    std::deque<LogEntry> replay_log;

    std::vector<Lymphocyte>& population(CellRole role) {
        switch (role) {
            case CellRole::BCell: return b_cells;
            case CellRole::HelperT: return helper_t;
            default: return controller_t;
        }
    }
    std::uint32_t capacity(CellRole role) const {
        switch (role) {
            case CellRole::BCell: return params.b_cell_count;
            case CellRole::HelperT: return params.helper_t_count;
            default: return params.controller_t_count;
        }
    }

    const LogEntry* find_logged(const std::string& message_id) const {
        for (auto it = replay_log.rbegin(); it != replay_log.rend(); ++it)
            if (it->microorganism.source_id == message_id) return &*it;
        return nullptr;
    }

    void log_classification(const Microorganism& mo, const Verdict& v) {
        replay_log.push_back(LogEntry{mo, v});
        if (replay_log.size() > kReplayLogCapacity) replay_log.pop_front();
    }
};

// ---------------------------------------------------------------------------
// Matching stages.

// Innate rule: exact receptor/pattern equality unless r_pattern switches the
// macrophage to sliding contiguous matching.
inline bool macrophage_matches(const MolecularPattern& receptor, const MolecularPattern& pattern,
                               const RunConfig& cfg) {
    if (!cfg.r_pattern) return receptor == pattern;
    return matches(receptor.bits, pattern.bits, *cfg.r_pattern);
}

// The antigen peptides this B cell binds at threshold r, order and duplicates
// preserved. These are what the cell presents to the T populations.
inline std::vector<Peptide> present_peptides(const Lymphocyte& b, const Antigen& antigen,
                                             std::uint32_t r) {
    std::vector<Peptide> out;
    for (const auto& p : antigen.peptides)
        if (matches(b.receptor, p.bits, r)) out.push_back(p);
    return out;
}

struct ActivationResult {
    bool activated = false;
    SignalTally tally;
    std::vector<Peptide> presented;
    std::vector<std::uint64_t> stimulated_helpers;
    std::vector<std::uint64_t> stimulated_controllers;
};

// Two-signal rule: the B cell activates only when helper stimulations over
// its presented peptides strictly exceed controller stimulations.
inline ActivationResult two_signal_activation(const Lymphocyte& b, const Antigen& antigen,
                                              std::span<const Lymphocyte> helpers,
                                              std::span<const Lymphocyte> controllers,
                                              std::uint32_t r) {
    ActivationResult res;
    res.presented = present_peptides(b, antigen, r);
    for (const auto& h : helpers) {
        bool any = false;
        for (const auto& p : res.presented)
            if (matches(h.receptor, p.bits, r)) {
                ++res.tally.helper_stimulations;
                any = true;
            }
        if (any) res.stimulated_helpers.push_back(h.id);
    }
    for (const auto& c : controllers) {
        bool any = false;
        for (const auto& p : res.presented)
            if (matches(c.receptor, p.bits, r)) {
                ++res.tally.controller_stimulations;
                any = true;
            }
        if (any) res.stimulated_controllers.push_back(c.id);
    }
    res.activated = res.tally.helper_stimulations > res.tally.controller_stimulations;
    return res;
}

// Everything one pass of the cascade observed. classify() derives the verdict
// from this; the stage drivers apply the side effects.
struct EncounterResult {
    Verdict verdict;
    bool macrophage_hit = false;
    bool adaptive_ran = false;  // B cells evaluated the antigen
    bool tcell_ran = false;     // T cells evaluated presented peptides
    std::vector<std::uint64_t> bound_b;
    std::vector<std::uint64_t> activated_b;
    std::vector<std::uint64_t> stimulated_helpers;
    std::vector<std::uint64_t> stimulated_controllers;
    // Receptor material for the antigen-specific response on a macrophage hit.
    std::optional<Peptide> response_peptide;
};

namespace detail {

inline void insert_unique(std::vector<std::uint64_t>& v, std::uint64_t id) {
    if (std::find(v.begin(), v.end(), id) == v.end()) v.push_back(id);
}

// Longest peptide, ties broken by first occurrence.
inline std::optional<Peptide> highest_information_peptide(const Antigen& antigen) {
    const Peptide* best = nullptr;
    for (const auto& p : antigen.peptides)
        if (!best || p.bits.size() > best->bits.size()) best = &p;
    return best ? std::optional<Peptide>{*best} : std::nullopt;
}

}  // namespace detail

// Fig.-4 cascade over an immutable state snapshot: macrophages inspect the
// sender pattern; unbound antigens are self; bound B cells go through the
// two-signal decision.
inline EncounterResult evaluate_encounter(const Microorganism& mo, const ClassifierState& state) {
    if (!state.initialized) throw UninitializedStateError{};
    EncounterResult res;

    for (const auto& mac : state.macrophages) {
        if (macrophage_matches(mac.receptor, mo.pattern, state.params)) {
            res.macrophage_hit = true;
            res.verdict.evidence.push_back(mac.id);
        }
    }
    if (res.macrophage_hit) {
        res.verdict.label = Label::Spam;
        res.verdict.route = VerdictRoute::MacrophageHit;
        res.response_peptide = detail::highest_information_peptide(mo.antigen);
        return res;
    }

    if (mo.antigen.peptides.empty()) {
        res.verdict.label = Label::Legitimate;
        res.verdict.route = VerdictRoute::NoBCellBound;
        return res;
    }

    res.adaptive_ran = true;
    std::vector<const Lymphocyte*> bound;
    for (const auto& b : state.b_cells)
        if (matches_any_peptide(b.receptor, mo.antigen.peptides, state.params.r)) {
            bound.push_back(&b);
            res.bound_b.push_back(b.id);
        }
    if (bound.empty()) {
        res.verdict.label = Label::Legitimate;
        res.verdict.route = VerdictRoute::NoBCellBound;
        return res;
    }

    res.tcell_ran = true;
    bool any_activated = false;
    for (const Lymphocyte* b : bound) {
        const ActivationResult act =
            two_signal_activation(*b, mo.antigen, state.helper_t, state.controller_t,
                                  state.params.r);
        res.verdict.tally.helper_stimulations += act.tally.helper_stimulations;
        res.verdict.tally.controller_stimulations += act.tally.controller_stimulations;
        for (auto id : act.stimulated_helpers) detail::insert_unique(res.stimulated_helpers, id);
        for (auto id : act.stimulated_controllers)
            detail::insert_unique(res.stimulated_controllers, id);
        if (act.activated) {
            any_activated = true;
            res.activated_b.push_back(b->id);
        }
    }
    res.verdict.label = any_activated ? Label::Spam : Label::Legitimate;
    res.verdict.route = VerdictRoute::TCellDecision;
    res.verdict.evidence = res.bound_b;
    for (auto id : res.stimulated_helpers) detail::insert_unique(res.verdict.evidence, id);
    for (auto id : res.stimulated_controllers) detail::insert_unique(res.verdict.evidence, id);
    return res;
}

inline Verdict classify(const Microorganism& mo, const ClassifierState& state) {
    return evaluate_encounter(mo, state).verdict;
}

// ---------------------------------------------------------------------------
// Population dynamics.

namespace detail {

inline Lymphocyte* find_cell(std::vector<Lymphocyte>& pop, std::uint64_t id) {
    for (auto& cell : pop)
        if (cell.id == id) return &cell;
    return nullptr;
}

// Eviction order: lowest lifetime, then lowest transaction_match, then oldest.
inline void trim_population(std::vector<Lymphocyte>& pop, std::size_t cap) {
    while (pop.size() > cap) {
        auto worst = std::min_element(pop.begin(), pop.end(), [](const auto& a, const auto& b) {
            return std::tuple(a.lifetime, a.weights.transaction_match, a.id) <
                   std::tuple(b.lifetime, b.weights.transaction_match, b.id);
        });
        pop.erase(worst);
    }
}

// B and helper cells must clear negative selection against the current self
// material before entering a population.
inline bool passes_self_screen(const BitSequence& receptor, const ClassifierState& state,
                               CellRole role) {
    if (role == CellRole::ControllerT) return true;
    return !matches_any_peptide(receptor, state.library.self_peptides(), state.params.r);
}

inline constexpr std::size_t kReplenishAttemptsPerCell = 64;

// Draws fresh screened cells until the population is back at capacity. Gives
// up (leaving the population short) only when the library side is empty or
// every candidate keeps failing the self screen.
inline void replenish(ClassifierState& state, CellRole role) {
    auto& pop = state.population(role);
    const std::size_t cap = state.capacity(role);
    if (pop.size() >= cap) return;
    if (receptor_source(state.library, role).empty()) return;
    std::size_t budget = kReplenishAttemptsPerCell * (cap - pop.size()) + kReplenishAttemptsPerCell;
    while (pop.size() < cap && budget > 0) {
        --budget;
        Lymphocyte cell =
            make_lymphocyte(state.library, role, state.params, state.rng, state.next_cell_id);
        if (passes_self_screen(cell.receptor, state, role)) pop.push_back(std::move(cell));
    }
}

inline void age_population(ClassifierState& state, CellRole role,
                           std::span<const std::uint64_t> stimulated) {
    auto& pop = state.population(role);
    for (auto& cell : pop) {
        ++cell.encounters;
        cell.lifetime -= 1;
        if (std::find(stimulated.begin(), stimulated.end(), cell.id) != stimulated.end())
            cell.lifetime += state.params.reward;
    }
    std::erase_if(pop, [](const Lymphocyte& c) { return c.lifetime == 0; });
    replenish(state, role);
}

}  // namespace detail

// Per-encounter aging: every population that evaluated the antigen decrements
// one lifetime unit, stimulated cells earn the reward on top, dead cells are
// culled and replaced by fresh library recombinations.
inline void tick_lifetimes(ClassifierState& state, const EncounterResult& er) {
    if (er.adaptive_ran) detail::age_population(state, CellRole::BCell, er.bound_b);
    if (er.tcell_ran) {
        detail::age_population(state, CellRole::HelperT, er.stimulated_helpers);
        detail::age_population(state, CellRole::ControllerT, er.stimulated_controllers);
    }
    ++state.encounter_count;
}

// Clonal memory: copies of the activated cell join the population with fresh
// lifetimes, the parent's lifetime resets, and the constant-size rule evicts
// the weakest cells.
inline void clonal_expand(ClassifierState& state, std::uint64_t activated_b_id) {
    Lymphocyte* parent = detail::find_cell(state.b_cells, activated_b_id);
    if (!parent) return;
    parent->lifetime = state.params.initial_lifetime;
    const Lymphocyte snapshot = *parent;
    for (std::uint32_t i = 0; i < state.params.clone_count; ++i) {
        Lymphocyte clone = snapshot;
        clone.id = state.next_cell_id++;
        clone.lifetime = state.params.initial_lifetime;
        state.b_cells.push_back(std::move(clone));
    }
    detail::trim_population(state.b_cells, state.capacity(CellRole::BCell));
}

// Macrophage-hit response: one B and one helper T cell specific to the
// antigen join the populations, provided they clear the self screen.
inline void spawn_antigen_response(ClassifierState& state, const EncounterResult& er) {
    if (!er.macrophage_hit || !er.response_peptide) return;
    const BitSequence& receptor = er.response_peptide->bits;
    for (CellRole role : {CellRole::BCell, CellRole::HelperT}) {
        if (!detail::passes_self_screen(receptor, state, role)) continue;
        Lymphocyte cell;
        cell.id = state.next_cell_id++;
        cell.role = role;
        cell.receptor = receptor;
        cell.lifetime = state.params.initial_lifetime;
        auto& pop = state.population(role);
        pop.push_back(std::move(cell));
        detail::trim_population(pop, state.capacity(role));
    }
}

// Counter update rule shared by all stages: matching cells always gain a
// transaction match; spam-labeled encounters also gain an attack match.
inline std::size_t update_weights(ClassifierState& state, const EncounterResult& er,
                                  Label effective_label) {
    std::size_t updated = 0;
    auto bump = [&](std::vector<Lymphocyte>& pop, std::span<const std::uint64_t> ids) {
        for (auto id : ids) {
            if (Lymphocyte* cell = detail::find_cell(pop, id)) {
                cell->weights.transaction_match += 1;
                if (effective_label == Label::Spam) cell->weights.replication_attack_match += 1;
                ++updated;
            }
        }
    };
    bump(state.b_cells, er.bound_b);
    bump(state.helper_t, er.stimulated_helpers);
    bump(state.controller_t, er.stimulated_controllers);
    return updated;
}

}  // namespace aisf
