#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>
#include <vector>

#include "aisf/corpus.hpp"
#include "aisf/immune_core.hpp"
#include "aisf/training.hpp"

using namespace aisf;

namespace {

Lymphocyte cell(std::uint64_t id, CellRole role, const BitSequence& receptor,
                std::uint32_t lifetime = 16) {
    Lymphocyte c;
    c.id = id;
    c.role = role;
    c.receptor = receptor;
    c.lifetime = lifetime;
    return c;
}

// Minimal hand-built state: populations as given, no macrophages unless added.
ClassifierState fixture_state(std::vector<Lymphocyte> b, std::vector<Lymphocyte> h,
                              std::vector<Lymphocyte> c, RunConfig cfg = {}) {
    ClassifierState state;
    state.codebook = default_codebook();
    state.params = cfg;
    state.b_cells = std::move(b);
    state.helper_t = std::move(h);
    state.controller_t = std::move(c);
    state.rng.seed(cfg.seed);
    state.next_cell_id = 1000;
    state.initialized = true;
    return state;
}

Microorganism organism(const std::string& sender, const std::string& content) {
    return build_microorganism(LabeledMessage{"fix", sender, content, "", std::nullopt},
                               default_codebook());
}

}  // namespace

TEST_CASE("present_peptides filters by receptor affinity", "[immune]") {
    const Codebook& cb = default_codebook();
    const BitSequence p = encode("qqqq", cb);
    const BitSequence q = encode("wwww", cb);
    const Lymphocyte b = cell(1, CellRole::BCell, p);

    Antigen antigen;
    CHECK(present_peptides(b, antigen, 12).empty());

    antigen.peptides = {Peptide{p}, Peptide{q}};
    REQUIRE(affinity(p, q) < 12);  // fixture precondition
    auto presented = present_peptides(b, antigen, 12);
    REQUIRE(presented.size() == 1);
    CHECK(presented[0].bits == p);

    antigen.peptides = {Peptide{p}, Peptide{q}, Peptide{p}};
    presented = present_peptides(b, antigen, 12);
    REQUIRE(presented.size() == 2);  // duplicates preserved
    CHECK(presented[0].bits == p);
    CHECK(presented[1].bits == p);
}

TEST_CASE("two-signal activation needs strictly more helper signals", "[immune]") {
    const Codebook& cb = default_codebook();
    const BitSequence p = encode("qqqq", cb);
    const BitSequence inert = encode("bbbb", cb);
    REQUIRE(affinity(p, inert) < 12);

    const Lymphocyte b = cell(1, CellRole::BCell, p);
    const Antigen antigen{{Peptide{p}}};

    for (std::uint32_t h = 0; h <= 5; ++h) {
        for (std::uint32_t c = 0; c <= 5; ++c) {
            std::vector<Lymphocyte> helpers, controllers;
            std::uint64_t id = 10;
            for (std::uint32_t i = 0; i < 5; ++i)
                helpers.push_back(cell(id++, CellRole::HelperT, i < h ? p : inert));
            for (std::uint32_t i = 0; i < 5; ++i)
                controllers.push_back(cell(id++, CellRole::ControllerT, i < c ? p : inert));
            const ActivationResult res =
                two_signal_activation(b, antigen, helpers, controllers, 12);
            INFO("helpers=" << h << " controllers=" << c);
            CHECK(res.tally.helper_stimulations == h);
            CHECK(res.tally.controller_stimulations == c);
            CHECK(res.activated == (h > c));
        }
    }
}

TEST_CASE("cascade routes", "[immune]") {
    const Codebook& cb = default_codebook();
    const BitSequence spam_word = encode("cash", cb);
    const BitSequence inert = encode("bbbb", cb);
    REQUIRE(affinity(spam_word, inert) < 12);

    SECTION("macrophage hit short-circuits the adaptive stages") {
        auto state = fixture_state({cell(1, CellRole::BCell, spam_word)}, {}, {});
        const Microorganism mo = organism("bad@host", "cash");
        state.macrophages.push_back(Macrophage{50, mo.pattern});

        const EncounterResult er = evaluate_encounter(mo, state);
        CHECK(er.verdict.label == Label::Spam);
        CHECK(er.verdict.route == VerdictRoute::MacrophageHit);
        CHECK(er.verdict.evidence == std::vector<std::uint64_t>{50});
        CHECK_FALSE(er.adaptive_ran);
        CHECK(er.bound_b.empty());
        REQUIRE(er.response_peptide.has_value());
        CHECK(er.response_peptide->bits == spam_word);
    }

    SECTION("nothing binds: legitimate via NoBCellBound") {
        auto state = fixture_state({cell(1, CellRole::BCell, inert)}, {}, {});
        const Verdict v = classify(organism("new@host", "cash"), state);
        CHECK(v.label == Label::Legitimate);
        CHECK(v.route == VerdictRoute::NoBCellBound);
        CHECK(v.evidence.empty());
    }

    SECTION("t-cell decision with helpers 3, controllers 2 is spam") {
        auto state = fixture_state(
            {cell(1, CellRole::BCell, spam_word)},
            {cell(2, CellRole::HelperT, spam_word), cell(3, CellRole::HelperT, spam_word),
             cell(4, CellRole::HelperT, spam_word)},
            {cell(5, CellRole::ControllerT, spam_word),
             cell(6, CellRole::ControllerT, spam_word)});
        const Verdict v = classify(organism("new@host", "cash"), state);
        CHECK(v.label == Label::Spam);
        CHECK(v.route == VerdictRoute::TCellDecision);
        CHECK(v.tally == SignalTally{3, 2});
        CHECK(std::find(v.evidence.begin(), v.evidence.end(), 1) != v.evidence.end());
    }

    SECTION("tie goes to legitimate") {
        auto state = fixture_state({cell(1, CellRole::BCell, spam_word)},
                                   {cell(2, CellRole::HelperT, spam_word)},
                                   {cell(3, CellRole::ControllerT, spam_word)});
        const Verdict v = classify(organism("new@host", "cash"), state);
        CHECK(v.label == Label::Legitimate);
        CHECK(v.route == VerdictRoute::TCellDecision);
        CHECK(v.tally == SignalTally{1, 1});
    }

    SECTION("empty antigen without macrophage hit is legitimate") {
        auto state = fixture_state({cell(1, CellRole::BCell, spam_word)}, {}, {});
        const Verdict v = classify(organism("new@host", "!!!"), state);
        CHECK(v.label == Label::Legitimate);
        CHECK(v.route == VerdictRoute::NoBCellBound);
    }

    SECTION("uninitialized state is rejected") {
        ClassifierState state;
        CHECK_THROWS_AS(classify(organism("a@b", "x"), state), UninitializedStateError);
    }
}

TEST_CASE("tick decrements, rewards, culls and replenishes", "[immune]") {
    const Codebook& cb = default_codebook();
    const BitSequence spam_word = encode("cash", cb);

    RunConfig cfg;
    cfg.b_cell_count = 3;
    cfg.helper_t_count = 2;
    cfg.controller_t_count = 2;
    cfg.reward = 4;
    cfg.k_max = 1;
    REQUIRE_FALSE(matches(spam_word, encode("hello", cb), 12));  // replacements clear the screen
    auto state = fixture_state(
        {cell(1, CellRole::BCell, spam_word, 1), cell(2, CellRole::BCell, spam_word, 5),
         cell(3, CellRole::BCell, spam_word, 1)},
        {cell(4, CellRole::HelperT, spam_word, 2), cell(5, CellRole::HelperT, spam_word, 2)},
        {cell(6, CellRole::ControllerT, spam_word, 2),
         cell(7, CellRole::ControllerT, spam_word, 2)},
        cfg);
    state.library.add_nonself_peptide(Peptide{spam_word});
    state.library.add_self_peptide(Peptide{encode("hello", cb)});

    EncounterResult er;
    er.adaptive_ran = true;
    er.tcell_ran = true;
    er.bound_b = {1};  // stimulated: decrement then reward, 1 - 1 + 4 = 4
    er.stimulated_helpers = {4};
    er.stimulated_controllers = {};

    tick_lifetimes(state, er);

    REQUIRE(state.b_cells.size() == 3);  // constant size restored
    REQUIRE(state.helper_t.size() == 2);
    REQUIRE(state.controller_t.size() == 2);
    CHECK(state.encounter_count == 1);

    const auto* stimulated = aisf::detail::find_cell(state.b_cells, 1);
    REQUIRE(stimulated != nullptr);
    CHECK(stimulated->lifetime == 4);
    CHECK(stimulated->encounters == 1);

    const auto* survivor = aisf::detail::find_cell(state.b_cells, 2);
    REQUIRE(survivor != nullptr);
    CHECK(survivor->lifetime == 4);

    CHECK(aisf::detail::find_cell(state.b_cells, 3) == nullptr);  // hit zero, culled
    for (const auto& c : state.b_cells) CHECK(c.lifetime >= 1);

    const auto* helper = aisf::detail::find_cell(state.helper_t, 4);
    REQUIRE(helper != nullptr);
    CHECK(helper->lifetime == 5);  // 2 - 1 + 4
    const auto* unstimulated = aisf::detail::find_cell(state.helper_t, 5);
    REQUIRE(unstimulated != nullptr);
    CHECK(unstimulated->lifetime == 1);
}

TEST_CASE("replacement B cells pass the self screen", "[immune]") {
    const Codebook& cb = default_codebook();
    RunConfig cfg;
    cfg.b_cell_count = 8;
    cfg.k_max = 1;
    REQUIRE_FALSE(matches(encode("cash", cb), encode("hello", cb), 12));
    auto state = fixture_state({}, {}, {}, cfg);
    state.library.add_nonself_peptide(Peptide{encode("cash", cb)});
    state.library.add_nonself_peptide(Peptide{encode("hello", cb)});  // also self
    state.library.add_self_peptide(Peptide{encode("hello", cb)});

    EncounterResult er;
    er.adaptive_ran = true;
    tick_lifetimes(state, er);

    REQUIRE(state.b_cells.size() == 8);
    for (const auto& c : state.b_cells) CHECK(c.receptor == encode("cash", cb));
}

TEST_CASE("clonal expansion copies receptors and resets lifetimes", "[immune]") {
    const Codebook& cb = default_codebook();
    const BitSequence spam_word = encode("cash", cb);

    RunConfig cfg;
    cfg.b_cell_count = 4;
    cfg.clone_count = 2;
    cfg.initial_lifetime = 16;
    auto state = fixture_state(
        {cell(1, CellRole::BCell, spam_word, 3), cell(2, CellRole::BCell, spam_word, 2),
         cell(3, CellRole::BCell, spam_word, 5), cell(4, CellRole::BCell, spam_word, 2)},
        {}, {}, cfg);
    state.b_cells[0].weights = CellWeights{2, 4};

    clonal_expand(state, 1);

    REQUIRE(state.b_cells.size() == 4);  // capacity kept
    // The two lifetime-2 cells were evicted in favor of the clones.
    CHECK(aisf::detail::find_cell(state.b_cells, 2) == nullptr);
    CHECK(aisf::detail::find_cell(state.b_cells, 4) == nullptr);

    const auto* parent = aisf::detail::find_cell(state.b_cells, 1);
    REQUIRE(parent != nullptr);
    CHECK(parent->lifetime == 16);

    std::size_t clones = 0;
    for (const auto& c : state.b_cells) {
        if (c.id >= 1000) {
            ++clones;
            CHECK(c.receptor == spam_word);
            CHECK(c.lifetime == 16);
            CHECK(c.weights == parent->weights);
        }
    }
    CHECK(clones == 2);
}

TEST_CASE("populations stay at capacity through a message stream", "[immune]") {
    RunConfig cfg;
    cfg.b_cell_count = 24;
    cfg.helper_t_count = 12;
    cfg.controller_t_count = 12;
    cfg.seed = 5;
    // 18 bits sits above the sliding-match noise floor for this corpus, so
    // screened replenishment can always refill the populations.
    cfg.r = 18;

    GenSpec spec;
    spec.n_spam = 15;
    spec.n_legit = 15;
    const auto training = gen_corpus(5, spec);
    auto state = initialize_classifier(training, cfg, default_codebook());

    GenSpec stream_spec = spec;
    stream_spec.n_spam = 60;
    stream_spec.n_legit = 60;
    stream_spec.message_salt = 1;
    for (const auto& msg : gen_corpus(5, stream_spec)) {
        normal_step(msg, state);
        CHECK(state.b_cells.size() == cfg.b_cell_count);
        CHECK(state.helper_t.size() == cfg.helper_t_count);
        CHECK(state.controller_t.size() == cfg.controller_t_count);
        for (const auto* pop : {&state.b_cells, &state.helper_t, &state.controller_t})
            for (const auto& c : *pop) {
                CHECK(c.lifetime >= 1);
                CHECK(c.lifetime <= cfg.initial_lifetime + c.encounters * cfg.reward);
            }
    }
}

TEST_CASE("classify is deterministic on a snapshot", "[immune]") {
    RunConfig cfg;
    cfg.b_cell_count = 16;
    cfg.helper_t_count = 8;
    cfg.controller_t_count = 8;
    GenSpec spec;
    spec.n_spam = 10;
    spec.n_legit = 10;
    const auto training = gen_corpus(3, spec);
    const auto state = initialize_classifier(training, cfg, default_codebook());

    GenSpec probe = spec;
    probe.message_salt = 2;
    for (const auto& msg : gen_corpus(3, probe)) {
        const Microorganism mo = build_microorganism(msg, state.codebook);
        const Verdict a = classify(mo, state);
        const Verdict b = classify(mo, state);
        CHECK(a.label == b.label);
        CHECK(a.route == b.route);
        CHECK(a.evidence == b.evidence);
        CHECK(a.tally == b.tally);
    }
}
