#include "mcqa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <sstream>

#include "mcqa/byte_io.hpp"
#include "mcqa/error.hpp"
#include "mcqa/parallel.hpp"
#include "mcqa/text_embed.hpp"

namespace mcqa {

using nlohmann::json;

namespace {

struct QuestionOutcome {
    bool correct = false;
    std::vector<std::pair<std::string, bool>> cue_correct;
    std::vector<std::string> warnings;
};

const FusionWeights& weights_for(const std::map<std::string, FusionWeights>& weights,
                                 const std::optional<FusionWeights>& fallback, const std::string& qtype)
{
    if (const auto it = weights.find(qtype); it != weights.end())
        return it->second;
    if (fallback)
        return *fallback;
    throw Error(ErrorCode::UnknownQtype, "no fusion weights for qtype '" + qtype + "'");
}

json tally_json(const Tally& t)
{
    return json{{"n", t.n}, {"correct", t.correct}, {"accuracy", t.accuracy()}};
}

std::string fixed(double v, int digits = 4)
{
    if (std::isnan(v))
        return "NaN";
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

} // namespace

EvalReport evaluate(const ModelSet& models, const std::map<std::string, FusionWeights>& weights,
                    const FeatureStore& store, const WordVectorTable& table,
                    const std::vector<QuestionInstance>& questions, const EvalOptions& options)
{
    for (const auto& q : questions) {
        if (!q.gold)
            throw Error(ErrorCode::MissingGold, "question " + q.id + " has no gold index");
        weights_for(weights, options.default_weights, q.qtype).check();
    }

    std::vector<QuestionOutcome> outcomes(questions.size());
    std::vector<std::exception_ptr> failures(questions.size());
    parallel_for(questions.size(), options.threads, [&](std::size_t i) {
        try {
            const auto& q = questions[i];
            const auto& w = weights_for(weights, options.default_weights, q.qtype);
            auto scored = score_question(models, store, table, q, w.cues, options.cues);
            std::vector<std::vector<double>> rows;
            for (const auto& cs : scored.per_cue)
                rows.push_back(cs.scores);
            auto& out = outcomes[i];
            out.correct = decide(fuse_scores(w, w.cues, rows, options.normalization)) == *q.gold;
            if (options.per_cue_accuracy)
                for (const auto& cs : scored.per_cue)
                    out.cue_correct.emplace_back(cs.cue, decide(cs.scores) == *q.gold);
            out.warnings = std::move(scored.warnings);
        } catch (...) {
            failures[i] = std::current_exception();
        }
    });
    for (const auto& f : failures)
        if (f)
            std::rethrow_exception(f);

    EvalReport report;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        const auto& q = questions[i];
        const auto& o = outcomes[i];
        auto& t = report.per_qtype[q.qtype];
        ++t.n;
        ++report.overall.n;
        if (o.correct) {
            ++t.correct;
            ++report.overall.correct;
        }
        for (const auto& [cue, ok] : o.cue_correct) {
            auto& ct = report.per_cue[cue][q.qtype];
            ++ct.n;
            ct.correct += ok ? 1 : 0;
        }
        report.warnings.insert(report.warnings.end(), o.warnings.begin(), o.warnings.end());
    }
    std::sort(report.warnings.begin(), report.warnings.end());
    return report;
}

EvalReport evaluate(const std::map<std::string, CcaModel>& models,
                    const std::map<std::string, FusionWeights>& weights, const FeatureStore& store,
                    const WordVectorTable& table, const std::vector<QuestionInstance>& questions,
                    const EvalOptions& options)
{
    ModelSet set;
    set.shared = models;
    return evaluate(set, weights, store, table, questions, options);
}

LexiconStats cue_word_statistics(const std::vector<QuestionInstance>& questions, const Lexicons& lexicons,
                                 AnswerScope scope)
{
    LexiconStats stats;
    for (const auto& q : questions) {
        std::vector<std::size_t> answers;
        if (scope == AnswerScope::GoldOnly) {
            if (!q.gold)
                throw Error(ErrorCode::MissingGold, "question " + q.id + " has no gold index");
            answers.push_back(*q.gold);
        } else {
            for (std::size_t j = 0; j < q.candidates.size(); ++j)
                answers.push_back(j);
        }
        for (const auto j : answers) {
            const auto tokens = tokenize(q.candidates[j]);
            for (const auto& [name, words] : lexicons) {
                auto& c = stats[{q.qtype, name}];
                ++c.answers_total;
                const bool hit = std::any_of(tokens.begin(), tokens.end(),
                                             [&words](const std::string& t) { return words.count(t) > 0; });
                c.answers_matching += hit ? 1 : 0;
            }
        }
    }
    return stats;
}

Lexicons load_lexicons(const std::string& path)
{
    json j;
    try {
        j = json::parse(byte_io::read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    if (!j.is_object())
        throw Error(ErrorCode::ParseError, path + ": expected an object of name -> word list");
    Lexicons out;
    for (const auto& [name, words] : j.items()) {
        if (!words.is_array())
            throw Error(ErrorCode::ParseError, path + ": lexicon '" + name + "' must be an array");
        auto& set = out[name];
        for (const auto& w : words) {
            if (!w.is_string())
                throw Error(ErrorCode::ParseError, path + ": lexicon '" + name + "' has a non-string entry");
            std::string word = w.get<std::string>();
            std::transform(word.begin(), word.end(), word.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            set.insert(std::move(word));
        }
    }
    return out;
}

CcaModel train_shared_embedding(const std::map<std::string, std::pair<Eigen::MatrixXd, Eigen::MatrixXd>>& per_type,
                                const CcaParams& params)
{
    if (per_type.empty())
        throw Error(ErrorCode::InsufficientSamples, "no training types supplied");
    const auto& first = per_type.begin()->second;
    Eigen::Index rows = 0;
    for (const auto& [qtype, xy] : per_type) {
        if (xy.first.cols() != first.first.cols() || xy.second.cols() != first.second.cols())
            throw Error(ErrorCode::DimMismatch, "training data for qtype '" + qtype + "' has different dims");
        if (xy.first.rows() != xy.second.rows())
            throw Error(ErrorCode::RowCountMismatch, "X and Y row counts differ for qtype '" + qtype + "'");
        rows += xy.first.rows();
    }
    Eigen::MatrixXd X(rows, first.first.cols());
    Eigen::MatrixXd Y(rows, first.second.cols());
    Eigen::Index at = 0;
    for (const auto& [qtype, xy] : per_type) {
        X.middleRows(at, xy.first.rows()) = xy.first;
        Y.middleRows(at, xy.second.rows()) = xy.second;
        at += xy.first.rows();
    }
    return fit_cca(X, Y, params);
}

TransferReport transfer_matrix(const std::map<std::string, CcaModel>& models,
                               const std::map<std::string, std::vector<QuestionInstance>>& datasets,
                               const FeatureStore& store, const WordVectorTable& table, const std::string& cue,
                               std::size_t threads)
{
    TransferReport out;
    out.cue = cue;
    for (const auto& [t, m] : models)
        out.train_types.push_back(t);
    for (const auto& [t, d] : datasets)
        out.test_types.push_back(t);

    EvalOptions options;
    options.cues = {CueConfig{cue, CueMode::FullImage, SelectionMode::PerQuestion, {}}};
    options.per_cue_accuracy = false;
    options.threads = threads;

    for (const auto& train : out.train_types) {
        std::vector<double> row;
        for (const auto& test : out.test_types) {
            options.default_weights = FusionWeights{test, {cue}, {1.0}};
            try {
                const auto report = evaluate(std::map<std::string, CcaModel>{{cue, models.at(train)}}, {}, store,
                                             table, datasets.at(test), options);
                row.push_back(report.overall.accuracy());
            } catch (const Error& e) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
                out.errors.push_back({train, test, e.what()});
            }
        }
        out.accuracy.push_back(std::move(row));
    }
    return out;
}

json report_to_json(const EvalReport& report)
{
    json j;
    j["overall"] = tally_json(report.overall);
    j["per_qtype"] = json::object();
    for (const auto& [t, tally] : report.per_qtype)
        j["per_qtype"][t] = tally_json(tally);
    j["per_cue"] = json::object();
    for (const auto& [cue, types] : report.per_cue)
        for (const auto& [t, tally] : types)
            j["per_cue"][cue][t] = tally_json(tally);
    j["warnings"] = report.warnings;
    return j;
}

std::string report_to_text(const EvalReport& report)
{
    std::ostringstream s;
    auto line = [&s](const std::string& label, const Tally& t) {
        s << std::left << std::setw(24) << label << std::right << std::setw(8) << t.n << std::setw(10) << t.correct
          << std::setw(12) << fixed(t.accuracy()) << '\n';
    };
    s << std::left << std::setw(24) << "qtype" << std::right << std::setw(8) << "n" << std::setw(10) << "correct"
      << std::setw(12) << "accuracy" << '\n';
    for (const auto& [t, tally] : report.per_qtype)
        line(t, tally);
    line("overall", report.overall);
    for (const auto& [cue, types] : report.per_cue) {
        s << "\nsingle cue: " << cue << '\n';
        for (const auto& [t, tally] : types)
            line(t, tally);
    }
    if (!report.warnings.empty())
        s << '\n' << report.warnings.size() << " warning(s)\n";
    return s.str();
}

json stats_to_json(const LexiconStats& stats)
{
    json arr = json::array();
    for (const auto& [key, c] : stats)
        arr.push_back({{"qtype", key.first},
                       {"lexicon", key.second},
                       {"answers_total", c.answers_total},
                       {"answers_matching", c.answers_matching},
                       {"fraction", c.fraction()}});
    return arr;
}

std::string stats_to_text(const LexiconStats& stats)
{
    std::ostringstream s;
    s << std::left << std::setw(20) << "qtype" << std::setw(20) << "lexicon" << std::right << std::setw(8) << "total"
      << std::setw(10) << "matching" << std::setw(10) << "fraction" << '\n';
    for (const auto& [key, c] : stats)
        s << std::left << std::setw(20) << key.first << std::setw(20) << key.second << std::right << std::setw(8)
          << c.answers_total << std::setw(10) << c.answers_matching << std::setw(10) << fixed(c.fraction()) << '\n';
    return s.str();
}

json transfer_to_json(const TransferReport& report)
{
    json j;
    j["cue"] = report.cue;
    j["train_types"] = report.train_types;
    j["test_types"] = report.test_types;
    j["accuracy"] = json::array();
    for (const auto& row : report.accuracy) {
        json r = json::array();
        for (double v : row)
            r.push_back(std::isnan(v) ? json(nullptr) : json(v));
        j["accuracy"].push_back(std::move(r));
    }
    j["errors"] = json::array();
    for (const auto& e : report.errors)
        j["errors"].push_back({{"train_type", e.train_type}, {"test_type", e.test_type}, {"error", e.message}});
    return j;
}

std::string transfer_to_text(const TransferReport& report)
{
    std::ostringstream s;
    s << "cue: " << report.cue << "  (rows: train type, columns: test type)\n";
    s << std::left << std::setw(20) << "";
    for (const auto& t : report.test_types)
        s << std::right << std::setw(14) << t;
    s << '\n';
    for (std::size_t i = 0; i < report.train_types.size(); ++i) {
        s << std::left << std::setw(20) << report.train_types[i];
        for (double v : report.accuracy[i])
            s << std::right << std::setw(14) << fixed(v);
        s << '\n';
    }
    for (const auto& e : report.errors)
        s << "error [" << e.train_type << " -> " << e.test_type << "]: " << e.message << '\n';
    return s.str();
}

std::string transfer_to_csv(const TransferReport& report)
{
    std::ostringstream s;
    s << std::setprecision(17) << "train\\test";
    for (const auto& t : report.test_types)
        s << ',' << t;
    s << '\n';
    for (std::size_t i = 0; i < report.train_types.size(); ++i) {
        s << report.train_types[i];
        for (double v : report.accuracy[i]) {
            s << ',';
            if (std::isnan(v))
                s << "NaN";
            else
                s << v;
        }
        s << '\n';
    }
    return s.str();
}

} // namespace mcqa
