#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aisf/immune_core.hpp"
#include "aisf/repertoire.hpp"

namespace aisf {

// A user correction for one misclassified message.
struct FeedbackEvent {
    std::string message_id;
    Label given_label = Label::Legitimate;
    Label system_label = Label::Spam;
    Microorganism microorganism;
};

struct StageReport {
    StageMode stage = StageMode::Learning;
    std::uint64_t processed = 0;
    std::uint64_t weight_updates = 0;
    std::uint64_t corrections = 0;
};

struct CorrectionReport {
    std::uint64_t library_changes = 0;
    std::uint64_t macrophages_removed = 0;
    std::uint64_t cells_removed = 0;
    std::uint64_t cells_created = 0;

    CorrectionReport& operator+=(const CorrectionReport& o) {
        library_changes += o.library_changes;
        macrophages_removed += o.macrophages_removed;
        cells_removed += o.cells_removed;
        cells_created += o.cells_created;
        return *this;
    }
};

// ---------------------------------------------------------------------------
// State construction: library, macrophages, then screened populations.

namespace detail {

inline void fill_population(ClassifierState& state, CellRole role) {
    replenish(state, role);
}

}  // namespace detail

inline ClassifierState initialize_classifier(std::span<const LabeledMessage> training,
                                             const RunConfig& cfg, const Codebook& codebook) {
    cfg.validate();
    ClassifierState state;
    state.codebook = codebook;
    state.params = cfg;
    state.rng.seed(cfg.seed);
    state.library = build_library(training, codebook);
    state.macrophages = generate_macrophages(state.library, state.next_cell_id);
    state.initialized = true;
    // Generation plus negative selection, repeated until the populations are
    // full: replenish() only admits cells that clear the self screen.
    detail::fill_population(state, CellRole::BCell);
    detail::fill_population(state, CellRole::HelperT);
    detail::fill_population(state, CellRole::ControllerT);
    return state;
}

// ---------------------------------------------------------------------------
// Stage drivers. Each one runs the cascade, applies the stage's weight rule,
// and lets the population dynamics advance.

namespace detail {

struct StepOptions {
    bool tick = true;
    bool spawn = true;
    bool clone = false;
};

inline EncounterResult run_step(ClassifierState& state, const Microorganism& mo,
                                Label weight_label, const StepOptions& opt,
                                StageReport& report) {
    const EncounterResult er = evaluate_encounter(mo, state);
    report.weight_updates += update_weights(state, er, weight_label);
    state.log_classification(mo, er.verdict);
    if (opt.tick) tick_lifetimes(state, er);
    if (opt.spawn) spawn_antigen_response(state, er);
    if (opt.clone)
        for (auto id : er.activated_b) clonal_expand(state, id);
    ++report.processed;
    return er;
}

}  // namespace detail

// Supervised pass over a pre-labeled corpus: weights follow the known labels.
inline StageReport initial_learning(std::span<const LabeledMessage> corpus,
                                    ClassifierState& state) {
    if (!state.initialized) throw UninitializedStateError{};
    if (corpus.empty()) throw EmptyCorpusError{};
    state.mode = StageMode::Learning;
    StageReport report{StageMode::Learning};
    for (const auto& msg : corpus) {
        if (!msg.label) throw Error{"learning message '" + msg.id + "' has no label"};
        const Microorganism mo = build_microorganism(msg, state.codebook);
        detail::run_step(state, mo, *msg.label, {.tick = true, .spawn = true, .clone = false},
                         report);
    }
    return report;
}

// Unsupervised operation: weights follow the system's own verdict, activated
// B cells expand into memory.
inline Verdict normal_step(const LabeledMessage& msg, ClassifierState& state,
                           StageReport* report_out = nullptr) {
    if (!state.initialized) throw UninitializedStateError{};
    state.mode = StageMode::Normal;
    StageReport report{StageMode::Normal};
    const Microorganism mo = build_microorganism(msg, state.codebook);
    const EncounterResult er = evaluate_encounter(mo, state);
    report.weight_updates += update_weights(state, er, er.verdict.label);
    state.log_classification(mo, er.verdict);
    tick_lifetimes(state, er);
    spawn_antigen_response(state, er);
    for (auto id : er.activated_b) clonal_expand(state, id);
    ++report.processed;
    if (report_out) *report_out = report;
    return er.verdict;
}

// ---------------------------------------------------------------------------
// Table-1 corrections.

// Wrong positive: the message is actually legitimate. Its material moves from
// the non-self to the self library, macrophages for its sender go away, B and
// helper populations are re-screened against the grown self set, and fresh
// controller T cells learn the antigen.
inline CorrectionReport correct_false_positive(const FeedbackEvent& event,
                                               ClassifierState& state) {
    if (event.system_label != Label::Spam || event.given_label != Label::Legitimate)
        throw WrongDirectionError{"event is not a false positive"};
    CorrectionReport report;
    const Microorganism& mo = event.microorganism;

    report.library_changes += state.library.remove_nonself_pattern(mo.pattern);
    for (const auto& p : mo.antigen.peptides)
        report.library_changes += state.library.remove_nonself_peptide(p);

    const std::size_t before = state.macrophages.size();
    std::erase_if(state.macrophages, [&](const Macrophage& m) {
        return macrophage_matches(m.receptor, mo.pattern, state.params);
    });
    report.macrophages_removed = before - state.macrophages.size();

    report.library_changes += state.library.add_self_pattern(mo.pattern);
    for (const auto& p : mo.antigen.peptides)
        report.library_changes += state.library.add_self_peptide(p);

    for (CellRole role : {CellRole::HelperT, CellRole::BCell}) {
        auto& pop = state.population(role);
        const std::size_t n = pop.size();
        pop = negative_selection(std::move(pop),
                                 std::span<const Peptide>{state.library.self_peptides()},
                                 state.params.r);
        report.cells_removed += n - pop.size();
        const std::size_t refill_from = pop.size();
        detail::replenish(state, role);
        report.cells_created += pop.size() - refill_from;
    }

    // One controller per distinct antigen peptide.
    std::vector<Peptide> distinct;
    for (const auto& p : mo.antigen.peptides) detail::sorted_insert(distinct, p);
    for (const auto& p : distinct) {
        Lymphocyte cell;
        cell.id = state.next_cell_id++;
        cell.role = CellRole::ControllerT;
        cell.receptor = p.bits;
        cell.lifetime = state.params.initial_lifetime;
        state.controller_t.push_back(std::move(cell));
        ++report.cells_created;
    }
    detail::trim_population(state.controller_t, state.capacity(CellRole::ControllerT));
    return report;
}

// Wrong negative: the message is actually spam. Its material moves from the
// self to the non-self library, controller T cells bound to its antigen are
// removed, and its sender pattern becomes a macrophage.
inline CorrectionReport correct_false_negative(const FeedbackEvent& event,
                                               ClassifierState& state) {
    if (event.system_label != Label::Legitimate || event.given_label != Label::Spam)
        throw WrongDirectionError{"event is not a false negative"};
    CorrectionReport report;
    const Microorganism& mo = event.microorganism;

    report.library_changes += state.library.remove_self_pattern(mo.pattern);
    for (const auto& p : mo.antigen.peptides)
        report.library_changes += state.library.remove_self_peptide(p);

    const std::size_t before = state.controller_t.size();
    std::erase_if(state.controller_t, [&](const Lymphocyte& c) {
        return matches_any_peptide(c.receptor, mo.antigen.peptides, state.params.r);
    });
    report.cells_removed += before - state.controller_t.size();

    report.library_changes += state.library.add_nonself_pattern(mo.pattern);
    for (const auto& p : mo.antigen.peptides)
        report.library_changes += state.library.add_nonself_peptide(p);

    const bool have_macrophage =
        std::any_of(state.macrophages.begin(), state.macrophages.end(),
                    [&](const Macrophage& m) { return m.receptor == mo.pattern; });
    if (!have_macrophage) {
        state.macrophages.push_back(Macrophage{state.next_cell_id++, mo.pattern});
        ++report.cells_created;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Relearning: reset the offending cells, replay the message under its true
// label, then apply the matching Table-1 correction.

inline StageReport relearn(std::span<const FeedbackEvent> events, std::uint32_t reset_value,
                           ClassifierState& state, CorrectionReport* corrections_out = nullptr) {
    if (!state.initialized) throw UninitializedStateError{};
    state.mode = StageMode::Relearning;
    StageReport report{StageMode::Relearning};
    CorrectionReport corrections;
    for (const auto& event : events) {
        if (event.given_label == event.system_label)
            throw WrongDirectionError{"event for '" + event.message_id +
                                      "' is not a misclassification"};
        const LogEntry* entry = state.find_logged(event.message_id);
        if (!entry) throw UnknownMessageError{event.message_id};

        for (auto id : entry->verdict.evidence) {
            for (auto* pop : {&state.b_cells, &state.helper_t, &state.controller_t}) {
                if (Lymphocyte* cell = detail::find_cell(*pop, id)) {
                    cell->weights.replication_attack_match = reset_value;
                    cell->weights.transaction_match = reset_value;
                }
            }
        }

        const Microorganism mo = event.microorganism;
        detail::run_step(state, mo, event.given_label,
                         {.tick = true, .spawn = true, .clone = false}, report);

        if (event.system_label == Label::Spam)
            corrections += correct_false_positive(event, state);
        else
            corrections += correct_false_negative(event, state);
        ++report.corrections;
    }
    if (corrections_out) *corrections_out = corrections;
    return report;
}

// ---------------------------------------------------------------------------
// Test stage: verdicts and weight updates only. Populations are not aged, so
// the verdict stream equals a pure replay of classify().

struct Metrics;  // corpus.hpp

inline std::vector<Verdict> test_evaluate(std::span<const LabeledMessage> corpus,
                                          ClassifierState& state,
                                          StageReport* report_out = nullptr) {
    if (!state.initialized) throw UninitializedStateError{};
    if (corpus.empty()) throw EmptyCorpusError{};
    state.mode = StageMode::Test;
    StageReport report{StageMode::Test};
    std::vector<Verdict> verdicts;
    verdicts.reserve(corpus.size());
    for (const auto& msg : corpus) {
        const Microorganism mo = build_microorganism(msg, state.codebook);
        const EncounterResult er = evaluate_encounter(mo, state);
        report.weight_updates += update_weights(state, er, er.verdict.label);
        state.log_classification(mo, er.verdict);
        verdicts.push_back(er.verdict);
        ++report.processed;
    }
    if (report_out) *report_out = report;
    return verdicts;
}

}  // namespace aisf
