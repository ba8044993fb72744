#include "prefforge/cli/dispatch.hpp"

#include "prefforge/data/stage_io.hpp"
#include "prefforge/data/validate.hpp"
#include "prefforge/dpo/text_dataset.hpp"
#include "prefforge/dpo/trainer.hpp"
#include "prefforge/eval/report.hpp"
#include "prefforge/pipeline/runner.hpp"
#include "prefforge/pipeline/summary.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <csignal>
#include <iostream>
#include <map>
#include <set>

namespace prefforge::cli {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config;
    std::string in;
    std::string out;
    std::string provider;
    bool resume = false;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

void add_common(CLI::App& cmd, CommonOptions& opts, bool in_required, bool out_required) {
    cmd.add_option("--config", opts.config, "Pipeline config file (TOML subset)")->check(CLI::ExistingFile);
    auto* in = cmd.add_option("--in", opts.in, "Input file");
    if (in_required) in->required();
    auto* out = cmd.add_option("--out", opts.out, "Output file or directory");
    if (out_required) out->required();
    cmd.add_flag("--resume", opts.resume, "Reuse records already written by an earlier run");
    cmd.add_option("--provider", opts.provider, "Use this provider for every stage (e.g. mock)");
    cmd.add_option("--seed", opts.seed, "Seed for jitter or toy training");
}

pipeline::PipelineConfig load_config(const CommonOptions& opts, const DispatchContext& context) {
    const auto file = opts.config.empty() ? pipeline::ConfigFile{} : pipeline::ConfigFile::load(opts.config);
    pipeline::BuildOptions build;
    if (!opts.provider.empty()) build.provider_override = opts.provider;
    if (opts.seed_given) build.seed = opts.seed;
    if (context.sleeper) build.sleeper = *context.sleeper;
    auto config = pipeline::build_pipeline_config(file, build);
    if (context.configure) context.configure(config);
    return config;
}

int exit_for(const pipeline::RunSummary& summary) {
    return summary.failed_count() > 0 || summary.interrupted ? kExitPartial : kExitSuccess;
}

int run_step_verb(pipeline::Step step, const CommonOptions& opts, const DispatchContext& context,
                  std::ostream& err) {
    const auto config = load_config(opts, context);
    pipeline::RunOptions run;
    run.resume = opts.resume;
    run.stop_requested = context.stop_requested;
    const auto summary = pipeline::run_step(step, opts.in, opts.out, config, run);
    err << pipeline::format_run_summary(summary);
    return exit_for(summary);
}

int run_pipeline_verb(const CommonOptions& opts, const DispatchContext& context, std::ostream& err) {
    const auto config = load_config(opts, context);
    pipeline::RunOptions run;
    run.resume = opts.resume;
    run.stop_requested = context.stop_requested;
    const auto summary = pipeline::run_pipeline(opts.in, opts.out, config, run);
    err << pipeline::format_run_summary(summary);
    return exit_for(summary);
}

std::optional<data::Stage> stage_from_filename(const fs::path& path) {
    static const std::map<std::string_view, data::Stage> by_file = {
        {pipeline::kEnhancedFile, data::Stage::enhanced}, {pipeline::kRejectedFile, data::Stage::rejected},
        {pipeline::kRagFile, data::Stage::rag},           {pipeline::kFinalFile, data::Stage::final},
        {pipeline::kDpoFile, data::Stage::dpo},
    };
    if (auto it = by_file.find(path.filename().string()); it != by_file.end()) return it->second;
    return std::nullopt;
}

struct ValidateOptions {
    std::string stage;
    bool lenient = false;
};

int run_validate(const CommonOptions& opts, const ValidateOptions& vopts, std::ostream& out, std::ostream& err) {
    const fs::path path = opts.in;
    const auto mode = vopts.lenient ? data::ReadMode::lenient : data::ReadMode::strict;
    std::vector<data::JsonLine> lines;
    try {
        lines = data::read_json_lines(path, vopts.lenient);
    } catch (const data::StageFileError& e) {
        err << path.string() << ": " << e.what() << '\n';
        return kExitFatal;
    }

    std::optional<data::Stage> stage;
    if (!vopts.stage.empty()) {
        stage = data::stage_from_name(vopts.stage);
        if (!stage) {
            err << "error: unknown stage '" << vopts.stage << "'\n";
            return kExitFatal;
        }
    } else {
        stage = stage_from_filename(path);
        if (!stage && !lines.empty() && lines.front().value.is_object()) {
            stage = data::detect_stage(lines.front().value);
        }
        if (!stage) stage = data::Stage::raw;
    }

    data::ValidationOptions options;
    if (!opts.config.empty()) {
        options.think_directive = pipeline::build_pipeline_config(pipeline::ConfigFile::load(opts.config)).think_directive;
    }

    std::size_t problems = 0;
    std::map<std::string, std::size_t> first_line_of_id;
    for (const auto& line : lines) {
        auto report = line.value.is_object() ? data::validate_json(line.value, *stage, mode, options)
                                              : data::ValidationReport{{{"record", "expected a JSON object"}}};
        if (line.value.is_object() && line.value.contains("id") && line.value["id"].is_string()) {
            const auto id = line.value["id"].get<std::string>();
            auto [it, inserted] = first_line_of_id.emplace(id, line.line);
            if (!inserted) report.add("id", fmt::format("duplicate id '{}' (first on line {})", id, it->second));
        }
        for (const auto& v : report.violations) {
            err << fmt::format("{}: line {}: {}\n", path.string(), line.line, v.to_string());
            ++problems;
        }
    }
    if (problems > 0) {
        err << fmt::format("{}: {} problem(s) in {} record(s)\n", path.string(), problems, lines.size());
        return kExitFatal;
    }
    out << fmt::format("{}: {} valid {} record(s)\n", path.string(), lines.size(), data::stage_name(*stage));
    return kExitSuccess;
}

struct TrainOptions {
    int steps = 200;
    double beta = 0.1;
    double learning_rate = 0.5;
    std::size_t max_vocab = 256;
};

int run_train_toy(const CommonOptions& opts, const TrainOptions& topts, std::ostream& out, std::ostream& err) {
    dpo::TrainConfig cfg;
    cfg.beta = topts.beta;
    cfg.learning_rate = topts.learning_rate;
    cfg.steps = topts.steps;
    cfg.seed = opts.seed_given ? opts.seed : 7;
    cfg.validate();

    std::optional<dpo::ToyPolicy> theta0;
    std::vector<dpo::PreferenceInstance> dataset;
    std::size_t vocab_size = 0;
    if (opts.in.empty()) {
        auto problem = dpo::synthetic_problem(cfg.seed);
        vocab_size = problem.vocab.size();
        theta0 = std::move(problem.theta0);
        dataset = std::move(problem.dataset);
    } else {
        const auto triples = data::read_stage_file<data::DpoTriple>(opts.in, data::ReadMode::lenient);
        auto text = dpo::build_text_dataset(triples, topts.max_vocab);
        if (text.dropped > 0) {
            err << fmt::format("note: {} triple(s) dropped, chosen and rejected encode identically\n", text.dropped);
        }
        vocab_size = text.vocab.size();
        dpo::Rng rng(cfg.seed);
        theta0 = dpo::ToyPolicy::random(vocab_size, rng, 0.1);
        dataset = std::move(text.instances);
    }
    if (dataset.empty()) {
        err << "error: no usable preference instances\n";
        return kExitFatal;
    }

    const auto result = dpo::train(*theta0, dataset, cfg);
    const auto csv = dpo::history_csv(result.history);
    if (opts.out.empty()) {
        out << csv;
    } else {
        data::write_file_atomic(opts.out, csv);
    }
    const auto before = dpo::evaluate_dataset(*theta0, *theta0, dataset, cfg.beta);
    const auto after = dpo::evaluate_dataset(result.policy, *theta0, dataset, cfg.beta);
    std::size_t positive = 0;
    for (double m : after.margins) positive += m > 0.0 ? 1 : 0;
    err << fmt::format("{} instances, vocab {}, {} steps: mean loss {:.6f} -> {:.6f}, margin > 0 on {}/{}\n",
                       dataset.size(), vocab_size, cfg.steps, before.mean_loss, after.mean_loss, positive,
                       dataset.size());
    return kExitSuccess;
}

struct EvalOptions {
    std::string tokenizer = "unicode_char";
    std::string scored = "answer";
    bool smooth = false;
    bool no_judge = false;
};

int run_eval(const CommonOptions& opts, const EvalOptions& eopts, const DispatchContext& context,
             std::ostream& err) {
    eval::NlgOptions nlg;
    auto tokenizer = eval::tokenizer_from_name(eopts.tokenizer);
    if (!tokenizer) throw std::invalid_argument("unknown tokenizer '" + eopts.tokenizer + "'");
    nlg.tokenizer = *tokenizer;
    nlg.scored = eopts.scored == "full" ? eval::ScoredText::full_text : eval::ScoredText::answer_body;
    nlg.smooth_bleu = eopts.smooth;

    const auto answers = eval::read_answers(opts.in);
    std::optional<eval::JudgeResult> judged;
    if (!eopts.no_judge) {
        const auto config = load_config(opts, context);
        judged = eval::judge_answers(answers, config.judge, {config.concurrency});
        for (const auto& a : judged->absent) {
            err << fmt::format("warning: no judge scores for {}/{}: {}\n", a.model_id, a.question_id, a.reason);
        }
    }
    std::string content;
    for (const auto& row : eval::score_answers(answers, judged ? &*judged : nullptr, nlg)) {
        content += eval::score_row_to_json(row).dump() + '\n';
    }
    data::write_file_atomic(opts.out, content);
    const std::size_t absent = judged ? judged->absent.size() : 0;
    err << fmt::format("{} answer(s) scored, {} without judge scores\n", answers.size(), absent);
    return absent > 0 ? kExitPartial : kExitSuccess;
}

int run_report(const CommonOptions& opts, bool csv_only, std::ostream& out) {
    const auto report = eval::aggregate_rows(eval::read_score_rows(opts.in));
    const auto csv = eval::report_csv(report);
    if (!opts.out.empty()) data::write_file_atomic(opts.out, csv);
    out << (csv_only ? csv : eval::report_table(report));
    return kExitSuccess;
}

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             const DispatchContext& context) {
    CLI::App app{"Builds reasoning-preference datasets, trains a toy DPO policy and scores answers.", "prefforge"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    CommonOptions common;
    ValidateOptions validate_opts;
    TrainOptions train_opts;
    EvalOptions eval_opts;
    bool csv_only = false;

    const std::vector<std::tuple<const char*, pipeline::Step, const char*>> step_verbs = {
        {"enhance", pipeline::Step::enhance, "Rewrite raw questions (raw -> enhanced)"},
        {"reject", pipeline::Step::reject, "Generate rejected responses (enhanced -> rejected)"},
        {"retrieve", pipeline::Step::retrieve, "Attach retrieved knowledge (rejected -> rag)"},
        {"prefer-cot", pipeline::Step::cot, "Build preferred reasoning chains (rag -> cot)"},
        {"prefer-answer", pipeline::Step::answer, "Generate preferred answers (cot -> final)"},
        {"format", pipeline::Step::format, "Format DPO triples (final -> dpo)"},
    };
    std::map<CLI::App*, pipeline::Step> step_of;
    for (const auto& [name, step, help] : step_verbs) {
        auto* cmd = app.add_subcommand(name, help);
        add_common(*cmd, common, true, true);
        step_of[cmd] = step;
    }

    auto* run = app.add_subcommand("run", "Run every stage from raw questions into an output directory");
    add_common(*run, common, true, true);

    auto* validate = app.add_subcommand("validate", "Check a stage file against its schema");
    add_common(*validate, common, true, false);
    validate->add_option("--stage", validate_opts.stage, "raw, enhanced, rejected, rag, cot, final or dpo");
    validate->add_flag("--lenient", validate_opts.lenient, "Allow unknown fields and blank lines");

    auto* train = app.add_subcommand("train-toy", "Train the tabular DPO policy and write its loss history as CSV");
    add_common(*train, common, false, false);
    train->add_option("--steps", train_opts.steps, "Gradient steps")->check(CLI::NonNegativeNumber);
    train->add_option("--beta", train_opts.beta, "KL weight")->check(CLI::PositiveNumber);
    train->add_option("--lr", train_opts.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
    train->add_option("--max-vocab", train_opts.max_vocab, "Vocabulary cap incl. <unk> and <eos>")
        ->check(CLI::Range(3, 1 << 16));

    auto* evaluate = app.add_subcommand("eval", "Score answers with the judge, ROUGE-L and BLEU-4");
    add_common(*evaluate, common, true, true);
    evaluate->add_option("--tokenizer", eval_opts.tokenizer, "unicode_char or whitespace")
        ->check(CLI::IsMember({"unicode_char", "whitespace"}));
    evaluate->add_option("--scored-text", eval_opts.scored, "answer (text after the think block) or full")
        ->check(CLI::IsMember({"answer", "full"}));
    evaluate->add_flag("--smooth", eval_opts.smooth, "Add-one smoothing for BLEU n >= 2");
    evaluate->add_flag("--no-judge", eval_opts.no_judge, "Skip the judge, compute ROUGE-L and BLEU-4 only");

    auto* report = app.add_subcommand("report", "Aggregate per-answer scores into a per-model report");
    add_common(*report, common, true, false);
    report->add_flag("--csv", csv_only, "Print CSV instead of the table");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitFatal;
    }

    auto* cmd = app.get_subcommands().front();
    common.seed_given = cmd->count("--seed") > 0;

    try {
        if (auto it = step_of.find(cmd); it != step_of.end()) return run_step_verb(it->second, common, context, err);
        if (cmd == run) return run_pipeline_verb(common, context, err);
        if (cmd == validate) return run_validate(common, validate_opts, out, err);
        if (cmd == train) return run_train_toy(common, train_opts, out, err);
        if (cmd == evaluate) return run_eval(common, eval_opts, context, err);
        if (cmd == report) return run_report(common, csv_only, out);
    } catch (const data::StageFileError& e) {
        err << "error: " << common.in << ": " << e.what() << '\n';
        return kExitFatal;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFatal;
    }
    err << "error: unhandled command\n";
    return kExitFatal;
}

int main_entry(int argc, char** argv) {
    std::signal(SIGINT, on_sigint);
    DispatchContext context;
    context.stop_requested = &g_stop;
    std::vector<std::string> args(argv, argv + argc);
    return dispatch(args, std::cout, std::cerr, context);
}

}  // namespace prefforge::cli
