// Command-line front end: train, classify, evaluate, feedback, gen-corpus,
// inspect. Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aisf/corpus.hpp"
#include "aisf/serialize.hpp"
#include "aisf/training.hpp"

namespace {

using nlohmann::json;

struct TrainArgs {
    std::string corpus_path;
    std::string out_path;
    std::string codebook_path;
    aisf::RunConfig cfg;
    std::optional<std::uint32_t> r_pattern;
};

struct ClassifyArgs {
    std::string state_path;
    std::string in_path;
    std::string out_path;
    bool learn = false;
};

struct EvaluateArgs {
    std::string state_path;
    std::string corpus_path;
    std::string out_path;
};

struct FeedbackArgs {
    std::string state_path;
    std::string events_path;
    std::optional<std::uint32_t> reset_value;
};

struct GenArgs {
    std::uint64_t seed = 1;
    std::string spec_path;
    std::string out_path;
};

struct InspectArgs {
    std::string state_path;
    bool full = false;
};

json verdict_to_json(const std::string& id, const aisf::Verdict& v) {
    return json{{"id", id},
                {"label", aisf::to_string(v.label)},
                {"route", aisf::to_string(v.route)},
                {"helper_stimulations", v.tally.helper_stimulations},
                {"controller_stimulations", v.tally.controller_stimulations},
                {"evidence", v.evidence}};
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw aisf::IoError{"cannot write output file: " + path};
    out << text;
    if (!out.flush()) throw aisf::IoError{"failed writing output file: " + path};
}

int run_train(const TrainArgs& args) {
    aisf::RunConfig cfg = args.cfg;
    cfg.r_pattern = args.r_pattern;
    cfg.validate();
    const aisf::Codebook codebook = args.codebook_path.empty()
                                        ? aisf::default_codebook()
                                        : aisf::load_codebook(args.codebook_path);
    const auto corpus = aisf::load_corpus(args.corpus_path);
    auto state = aisf::initialize_classifier(corpus, cfg, codebook);
    const aisf::StageReport report = aisf::initial_learning(corpus, state);
    state.mode = aisf::StageMode::Normal;
    aisf::save_state(state, args.out_path);
    std::cout << json{{"trained", report.processed},
                      {"weight_updates", report.weight_updates},
                      {"macrophages", state.macrophages.size()},
                      {"state", args.out_path}}
                     .dump()
              << "\n";
    return 0;
}

int run_classify(const ClassifyArgs& args) {
    auto state = aisf::load_state(args.state_path);
    const auto corpus = aisf::load_corpus(args.in_path);
    std::string out;
    for (const auto& msg : corpus) {
        aisf::Verdict v;
        if (args.learn) {
            v = aisf::normal_step(msg, state);
        } else {
            v = aisf::classify(aisf::build_microorganism(msg, state.codebook), state);
        }
        out += verdict_to_json(msg.id, v).dump();
        out += "\n";
    }
    write_output(args.out_path, out);
    if (args.learn) aisf::save_state(state, args.state_path);
    return 0;
}

int run_evaluate(const EvaluateArgs& args) {
    auto state = aisf::load_state(args.state_path);
    const auto corpus = aisf::load_corpus(args.corpus_path);
    std::vector<aisf::Label> truth;
    for (const auto& msg : corpus) {
        if (!msg.label)
            throw aisf::Error{"evaluate requires labels; message '" + msg.id + "' has none"};
        truth.push_back(*msg.label);
    }
    const auto verdicts = aisf::test_evaluate(corpus, state);
    std::vector<aisf::Label> predicted;
    predicted.reserve(verdicts.size());
    for (const auto& v : verdicts) predicted.push_back(v.label);
    const aisf::Metrics metrics = aisf::compute_metrics(predicted, truth);
    write_output(args.out_path, aisf::metrics_to_json(metrics).dump() + "\n");
    return 0;
}

int run_feedback(const FeedbackArgs& args) {
    auto state = aisf::load_state(args.state_path);

    std::ifstream in(args.events_path, std::ios::binary);
    if (!in) throw aisf::IoError{"cannot open events file: " + args.events_path};
    std::vector<aisf::FeedbackEvent> events;
    std::size_t confirmations = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string id;
        aisf::Label given;
        try {
            const json j = json::parse(line);
            id = j.at("message_id").get<std::string>();
            given = aisf::label_from_string(j.at("given_label").get<std::string>());
        } catch (const std::exception& e) {
            throw aisf::ParseError{args.events_path, lineno, e.what()};
        }
        const aisf::LogEntry* entry = state.find_logged(id);
        if (!entry) throw aisf::UnknownMessageError{id};
        if (entry->verdict.label == given) {
            ++confirmations;  // reinforcement already happened online
            continue;
        }
        events.push_back(aisf::FeedbackEvent{id, given, entry->verdict.label,
                                             entry->microorganism});
    }

    const std::uint32_t reset = args.reset_value.value_or(state.params.reset_value);
    aisf::CorrectionReport corrections;
    const aisf::StageReport report = aisf::relearn(events, reset, state, &corrections);
    aisf::save_state(state, args.state_path);
    std::cout << json{{"processed", report.processed},
                      {"corrections", report.corrections},
                      {"confirmations_skipped", confirmations},
                      {"library_changes", corrections.library_changes},
                      {"macrophages_removed", corrections.macrophages_removed},
                      {"cells_removed", corrections.cells_removed},
                      {"cells_created", corrections.cells_created}}
                     .dump()
              << "\n";
    return 0;
}

int run_gen(const GenArgs& args) {
    aisf::GenSpec spec;
    if (!args.spec_path.empty()) {
        std::ifstream in(args.spec_path, std::ios::binary);
        if (!in) throw aisf::IoError{"cannot open spec file: " + args.spec_path};
        try {
            spec = aisf::gen_spec_from_json(json::parse(in));
        } catch (const json::exception& e) {
            throw aisf::ParseError{args.spec_path, 0, e.what()};
        }
    }
    const auto corpus = aisf::gen_corpus(args.seed, spec);
    aisf::save_corpus(corpus, args.out_path);
    std::cout << json{{"messages", corpus.size()}, {"out", args.out_path}}.dump() << "\n";
    return 0;
}

int run_inspect(const InspectArgs& args) {
    const auto state = aisf::load_state(args.state_path);
    const json j = args.full ? aisf::state_full_json(state) : aisf::state_summary_json(state);
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Immune-inspired replication-attack (spam) filter"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* cmd_train = app.add_subcommand("train", "Build and train a classifier state");
    cmd_train->add_option("--corpus", train.corpus_path, "Labeled training corpus (JSONL)")
        ->required();
    cmd_train->add_option("--out", train.out_path, "Output state file")->required();
    cmd_train->add_option("--codebook", train.codebook_path, "Codebook table file");
    cmd_train->add_option("--r", train.cfg.r, "Binding threshold in bits (default 12)")
        ->check(CLI::PositiveNumber);
    cmd_train
        ->add_option("--r-pattern", train.r_pattern,
                     "Macrophage threshold in bits; omit for exact sender match")
        ->check(CLI::PositiveNumber);
    cmd_train->add_option("--b-cells", train.cfg.b_cell_count, "B-cell population size")
        ->check(CLI::PositiveNumber);
    cmd_train->add_option("--helper-t", train.cfg.helper_t_count, "Helper T population size")
        ->check(CLI::PositiveNumber);
    cmd_train
        ->add_option("--controller-t", train.cfg.controller_t_count,
                     "Controller T population size")
        ->check(CLI::PositiveNumber);
    cmd_train->add_option("--lifetime", train.cfg.initial_lifetime, "Initial cell lifetime")
        ->check(CLI::PositiveNumber);
    cmd_train->add_option("--reward", train.cfg.reward, "Lifetime reward for stimulated cells");
    cmd_train->add_option("--clones", train.cfg.clone_count, "Clones per activated B cell")
        ->check(CLI::PositiveNumber);
    cmd_train->add_option("--k-max", train.cfg.k_max, "Max peptides per receptor")
        ->check(CLI::PositiveNumber);
    cmd_train->add_option("--reset-value", train.cfg.reset_value,
                          "Default relearning reset value");
    cmd_train->add_option("--seed", train.cfg.seed, "Seed for all randomness");

    ClassifyArgs classify;
    auto* cmd_classify = app.add_subcommand("classify", "Label messages with a trained state");
    cmd_classify->add_option("--state", classify.state_path, "State file")->required();
    cmd_classify->add_option("--in", classify.in_path, "Messages to classify (JSONL)")
        ->required();
    cmd_classify->add_option("--out", classify.out_path, "Verdict output (default stdout)");
    cmd_classify->add_flag("--learn", classify.learn,
                           "Run online updates and write the state back");

    EvaluateArgs evaluate;
    auto* cmd_evaluate = app.add_subcommand("evaluate", "Score a labeled corpus");
    cmd_evaluate->add_option("--state", evaluate.state_path, "State file")->required();
    cmd_evaluate->add_option("--corpus", evaluate.corpus_path, "Labeled corpus (JSONL)")
        ->required();
    cmd_evaluate->add_option("--out", evaluate.out_path, "Metrics output (default stdout)");

    FeedbackArgs feedback;
    auto* cmd_feedback =
        app.add_subcommand("feedback", "Apply user corrections to a trained state");
    cmd_feedback->add_option("--state", feedback.state_path, "State file (updated in place)")
        ->required();
    cmd_feedback->add_option("--events", feedback.events_path, "Feedback events (JSONL)")
        ->required();
    cmd_feedback->add_option("--reset-value", feedback.reset_value,
                             "Counter value for mistake-learned cells");

    GenArgs gen;
    auto* cmd_gen = app.add_subcommand("gen-corpus", "Generate a synthetic corpus");
    cmd_gen->add_option("--seed", gen.seed, "Generator seed")->required();
    cmd_gen->add_option("--spec", gen.spec_path, "Generator spec (JSON); defaults used if omitted");
    cmd_gen->add_option("--out", gen.out_path, "Output corpus (JSONL)")->required();

    InspectArgs inspect;
    auto* cmd_inspect = app.add_subcommand("inspect", "Print state statistics");
    cmd_inspect->add_option("--state", inspect.state_path, "State file")->required();
    cmd_inspect->add_flag("--full", inspect.full, "Dump populations and libraries");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_train->parsed()) return run_train(train);
        if (cmd_classify->parsed()) return run_classify(classify);
        if (cmd_evaluate->parsed()) return run_evaluate(evaluate);
        if (cmd_feedback->parsed()) return run_feedback(feedback);
        if (cmd_gen->parsed()) return run_gen(gen);
        if (cmd_inspect->parsed()) return run_inspect(inspect);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
