#include "mcqa/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "mcqa/byte_io.hpp"
#include "mcqa/config.hpp"
#include "mcqa/error.hpp"
#include "mcqa/eval.hpp"
#include "mcqa/synthetic.hpp"

namespace mcqa::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> threads;
};

constexpr char kModelIndex[] = "models.json";
constexpr char kWeightsFile[] = "fusion_weights.json";

std::string file_safe(const std::string& name)
{
    std::string s = name;
    for (auto& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_')
            c = '_';
    return s;
}

void require_path(const std::string& path, const char* what)
{
    if (path.empty())
        throw Error(ErrorCode::InvalidArgument, std::string("config: paths.") + what + " is not set");
    if (!fs::exists(path))
        throw Error(ErrorCode::IoError, std::string(what) + " not found: " + path);
}

RunConfig effective_config(const Options& opt)
{
    if (opt.config.empty())
        throw Error(ErrorCode::InvalidArgument, "--config is required");
    if (!fs::exists(opt.config))
        throw Error(ErrorCode::InvalidArgument, "config file not found: " + opt.config);
    RunConfig c = load_config(opt.config);
    if (opt.seed)
        c.seed = *opt.seed;
    if (!opt.out.empty()) {
        c.paths.model_dir = (fs::path(opt.out) / "models").string();
        c.paths.report_dir = (fs::path(opt.out) / "reports").string();
    }
    if (opt.threads)
        c.threads = *opt.threads;
    return c;
}

std::vector<QuestionInstance> questions_for(const RunConfig& c, const std::string& split)
{
    const std::string& path = split == "train" ? c.paths.train_questions
                              : split == "val" ? c.paths.val_questions
                                               : c.paths.test_questions;
    require_path(path, (split + "_questions").c_str());
    return load_questions(path);
}

struct Inputs {
    FeatureStore store;
    WordVectorTable table;
};

Inputs load_inputs(const RunConfig& c)
{
    require_path(c.paths.features, "features");
    require_path(c.paths.word_vectors, "word_vectors");
    return {load_features(c.paths.features), load_word_vectors(c.paths.word_vectors)};
}

ModelSet load_models(const RunConfig& c)
{
    const auto index_path = (fs::path(c.paths.model_dir) / kModelIndex).string();
    if (!fs::exists(index_path))
        throw Error(ErrorCode::IoError, "no trained models in " + c.paths.model_dir + " (run `train` first)");
    const json index = json::parse(byte_io::read_file(index_path));
    ModelSet models;
    for (const auto& entry : index.at("models")) {
        const auto cue = entry.at("cue").get<std::string>();
        const auto qtype = entry.at("qtype").get<std::string>();
        auto model = load_model((fs::path(c.paths.model_dir) / entry.at("file").get<std::string>()).string());
        if (qtype == "*")
            models.shared.emplace(cue, std::move(model));
        else
            models.per_type[qtype].emplace(cue, std::move(model));
    }
    return models;
}

void write_report(const std::string& dir, const std::string& stem, const json& j, const std::string& text)
{
    byte_io::write_text_file((fs::path(dir) / (stem + ".json")).string(), j.dump(2) + "\n");
    byte_io::write_text_file((fs::path(dir) / (stem + ".txt")).string(), text);
}

json corr_json(const CcaModel& m)
{
    return json(std::vector<double>(m.corr.data(), m.corr.data() + m.corr.size()));
}

int cmd_demo(const Options& opt, std::ostream& out)
{
    if (opt.out.empty())
        throw Error(ErrorCode::InvalidArgument, "demo needs --out <dir>");
    const std::uint64_t seed = opt.seed.value_or(7);
    const fs::path dir(opt.out);
    const auto data = generate_synthetic(demo_spec(seed));

    save_features(data.store, (dir / "features").string());
    save_word_vectors(data.table, (dir / "word_vectors.txt").string());
    for (const auto& [split, qs] : data.splits)
        save_questions(qs, (dir / ("questions_" + split + ".jsonl")).string());
    byte_io::write_text_file((dir / "lexicons.json").string(), json(demo_lexicons()).dump(2) + "\n");

    RunConfig c;
    const std::string base = dir.string();
    c.paths.features = (dir / "features" / "manifest.json").string();
    c.paths.word_vectors = (dir / "word_vectors.txt").string();
    c.paths.train_questions = (dir / "questions_train.jsonl").string();
    c.paths.val_questions = (dir / "questions_val.jsonl").string();
    c.paths.test_questions = (dir / "questions_test.jsonl").string();
    c.paths.lexicons = (dir / "lexicons.json").string();
    c.paths.model_dir = (dir / "models").string();
    c.paths.report_dir = (dir / "reports").string();
    c.cca = CcaParams{6, kDefaultCcaReg, kDefaultCcaPower};
    c.cues = {CueConfig{"whole", CueMode::FullImage, SelectionMode::PerQuestion, {}},
              CueConfig{"region", CueMode::Region, SelectionMode::PerQuestion, {}}};
    c.transfer_cue = "whole";
    c.seed = seed;
    byte_io::write_text_file((dir / "config.json").string(), config_to_json(c, base).dump(2) + "\n");
    out << "demo dataset written to " << base << " (config: " << (dir / "config.json").string() << ")\n";
    return kOk;
}

int cmd_validate(const RunConfig& c, std::ostream& out)
{
    const auto inputs = load_inputs(c);
    json problems = json::array();
    std::size_t checked = 0;
    for (const std::string split : {"train", "val", "test"}) {
        const std::string& path = split == "train" ? c.paths.train_questions
                                  : split == "val" ? c.paths.val_questions
                                                   : c.paths.test_questions;
        if (path.empty())
            continue;
        require_path(path, (split + "_questions").c_str());
        const auto questions = load_questions(path);
        checked += questions.size();
        for (const auto& issue : validate_dataset(inputs.store, questions, c.cue_names()))
            problems.push_back({{"split", split},
                                {"question_id", issue.question_id},
                                {"channel", issue.channel},
                                {"image_id", issue.image_id},
                                {"reason", issue.reason}});
    }
    if (checked == 0)
        throw Error(ErrorCode::InvalidArgument, "config lists no question files");
    const json report{{"questions_checked", checked}, {"problems", problems}};
    byte_io::write_text_file((fs::path(c.paths.report_dir) / "validation.json").string(), report.dump(2) + "\n");
    out << "checked " << checked << " questions against " << c.cues.size() << " cue channel(s): "
        << problems.size() << " problem(s)\n";
    for (const auto& p : problems)
        out << "  " << p["split"].get<std::string>() << " " << p["question_id"].get<std::string>() << " ["
            << p["channel"].get<std::string>() << "] " << p["reason"].get<std::string>() << '\n';
    return problems.empty() ? kOk : kData;
}

int cmd_train(const RunConfig& c, std::ostream& out)
{
    const auto inputs = load_inputs(c);
    const auto by_type = group_by_qtype(questions_for(c, "train"));
    json index{{"models", json::array()}};
    for (const auto& cue : c.cues) {
        std::map<std::string, std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> pairs;
        for (const auto& [qtype, qs] : by_type) {
            auto tp = training_pairs(inputs.store, inputs.table, qs, cue);
            if (tp.skipped > 0)
                out << "warning: " << tp.skipped << " " << qtype << " training answer(s) without embedding skipped\n";
            pairs.emplace(qtype, std::make_pair(std::move(tp.X), std::move(tp.Y)));
        }
        auto emit = [&](const std::string& qtype, const CcaModel& model, std::size_t n) {
            const std::string file = file_safe(cue.name) + "." + (qtype == "*" ? std::string("shared") : file_safe(qtype)) + ".mcca";
            save_model(model, (fs::path(c.paths.model_dir) / file).string());
            index["models"].push_back({{"cue", cue.name}, {"qtype", qtype}, {"file", file}, {"n_train", n},
                                       {"corr", corr_json(model)}});
            out << "trained " << cue.name << " / " << qtype << " on " << n << " pairs, top corr "
                << model.corr(0) << '\n';
        };
        if (c.shared_embedding) {
            std::size_t n = 0;
            for (const auto& [t, xy] : pairs)
                n += static_cast<std::size_t>(xy.first.rows());
            emit("*", train_shared_embedding(pairs, c.cca), n);
        } else {
            for (const auto& [qtype, xy] : pairs)
                emit(qtype, fit_cca(xy.first, xy.second, c.cca), static_cast<std::size_t>(xy.first.rows()));
        }
    }
    byte_io::write_text_file((fs::path(c.paths.model_dir) / kModelIndex).string(), index.dump(2) + "\n");
    return kOk;
}

int cmd_fuse_learn(const RunConfig& c, std::ostream& out)
{
    const auto inputs = load_inputs(c);
    const auto models = load_models(c);
    const auto by_type = group_by_qtype(questions_for(c, "val"));
    std::vector<FusionWeights> learned;
    for (const auto& [qtype, qs] : by_type) {
        const auto tensor = build_score_tensor(models, inputs.store, inputs.table, qs, c.cue_names(), c.cues, c.threads);
        const auto result = learn_weights(tensor, qtype, c.grid_step, c.normalization, c.threads);
        out << "fusion weights for " << qtype << ":";
        for (std::size_t i = 0; i < result.weights.cues.size(); ++i)
            out << ' ' << result.weights.cues[i] << '=' << result.weights.w[i];
        out << "  (validation accuracy " << result.accuracy() << " on " << result.total << ")\n";
        learned.push_back(result.weights);
    }
    save_weights(learned, (fs::path(c.paths.model_dir) / kWeightsFile).string());
    return kOk;
}

EvalOptions eval_options(const RunConfig& c)
{
    EvalOptions o;
    o.cues = c.cues;
    o.normalization = c.normalization;
    o.threads = c.threads;
    return o;
}

int cmd_eval(const RunConfig& c, std::ostream& out)
{
    const auto inputs = load_inputs(c);
    const auto models = load_models(c);
    const auto weights_path = (fs::path(c.paths.model_dir) / kWeightsFile).string();
    if (!fs::exists(weights_path))
        throw Error(ErrorCode::IoError, "no fusion weights at " + weights_path + " (run `fuse-learn` first)");
    std::map<std::string, FusionWeights> weights;
    for (auto& w : load_weights(weights_path))
        weights.emplace(w.qtype, std::move(w));
    const auto report = evaluate(models, weights, inputs.store, inputs.table, questions_for(c, "test"), eval_options(c));
    const auto text = report_to_text(report);
    write_report(c.paths.report_dir, "eval_report", report_to_json(report), text);
    out << text;
    return kOk;
}

int cmd_stats(const RunConfig& c, std::ostream& out)
{
    require_path(c.paths.lexicons, "lexicons");
    const auto lexicons = load_lexicons(c.paths.lexicons);
    std::vector<QuestionInstance> questions;
    for (const std::string split : {"train", "val", "test"}) {
        if (c.stats_split != "all" && c.stats_split != split)
            continue;
        const std::string& path = split == "train" ? c.paths.train_questions
                                  : split == "val" ? c.paths.val_questions
                                                   : c.paths.test_questions;
        if (c.stats_split == "all" && path.empty())
            continue;
        auto qs = questions_for(c, split);
        questions.insert(questions.end(), qs.begin(), qs.end());
    }
    const auto stats = cue_word_statistics(questions, lexicons, c.stats_scope);
    const auto text = stats_to_text(stats);
    write_report(c.paths.report_dir, "lexicon_stats", stats_to_json(stats), text);
    out << text;
    return kOk;
}

int cmd_transfer(const RunConfig& c, std::ostream& out)
{
    if (c.transfer_cue.empty())
        throw Error(ErrorCode::InvalidArgument, "config: no full-image cue available for transfer");
    const auto inputs = load_inputs(c);
    const CueConfig cue{c.transfer_cue, CueMode::FullImage, SelectionMode::PerQuestion, {}};
    std::map<std::string, CcaModel> models;
    for (const auto& [qtype, qs] : group_by_qtype(questions_for(c, "train"))) {
        const auto tp = training_pairs(inputs.store, inputs.table, qs, cue);
        models.emplace(qtype, fit_cca(tp.X, tp.Y, c.cca));
    }
    const auto report = transfer_matrix(models, group_by_qtype(questions_for(c, "test")), inputs.store,
                                        inputs.table, c.transfer_cue, c.threads);
    const auto text = transfer_to_text(report);
    write_report(c.paths.report_dir, "transfer", transfer_to_json(report), text);
    byte_io::write_text_file((fs::path(c.paths.report_dir) / "transfer.csv").string(), transfer_to_csv(report));
    out << text;
    return kOk;
}

int exit_for(const Error& e)
{
    switch (error_category(e.code())) {
    case ErrorCategory::Usage: return kUsage;
    case ErrorCategory::Numeric: return kNumeric;
    case ErrorCategory::Data: break;
    }
    return kData;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Multiple-choice image question answering with CCA cue embeddings", "mcqa"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&opt](CLI::App* sub, bool needs_config) {
        auto* cfg = sub->add_option("--config", opt.config, "experiment config (JSON)");
        if (needs_config)
            cfg->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "override the config seed");
        sub->add_option("--out", opt.out, needs_config ? "write models/ and reports/ under this directory"
                                                       : "output directory");
        sub->add_option("--threads", opt.threads, "worker threads (0 = MCQA_THREADS or all cores)");
    };

    std::map<std::string, CLI::App*> subs;
    subs["demo"] = app.add_subcommand("demo", "write a synthetic demo dataset and config");
    subs["train"] = app.add_subcommand("train", "fit CCA models per cue (and per question type)");
    subs["fuse-learn"] = app.add_subcommand("fuse-learn", "learn per-type fusion weights on the validation split");
    subs["eval"] = app.add_subcommand("eval", "evaluate fused answers on the test split");
    subs["stats"] = app.add_subcommand("stats", "lexicon frequency statistics over answers");
    subs["transfer"] = app.add_subcommand("transfer", "cross-type embedding transfer matrix");
    subs["validate"] = app.add_subcommand("validate", "check questions against the feature store");
    for (auto& [name, sub] : subs) {
        add_common(sub, name != "demo");
        if (name == "demo")
            sub->get_option("--out")->required();
    }

    // CLI11 wants argv in reverse order when given a vector.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        if (subs["demo"]->parsed())
            return cmd_demo(opt, out);
        const RunConfig config = effective_config(opt);
        if (subs["validate"]->parsed())
            return cmd_validate(config, out);
        if (subs["train"]->parsed())
            return cmd_train(config, out);
        if (subs["fuse-learn"]->parsed())
            return cmd_fuse_learn(config, out);
        if (subs["eval"]->parsed())
            return cmd_eval(config, out);
        if (subs["stats"]->parsed())
            return cmd_stats(config, out);
        if (subs["transfer"]->parsed())
            return cmd_transfer(config, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        if (exit_for(e) == kUsage)
            err << '\n' << app.help();
        return exit_for(e);
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON: " << e.what() << '\n';
        return kData;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
    err << app.help();
    return kUsage;
}

} // namespace mcqa::cli
