#include "mcqa/pipeline.hpp"

#include <algorithm>

#include "mcqa/error.hpp"
#include "mcqa/parallel.hpp"

namespace mcqa {

namespace {

const std::vector<RegionFeature>& image_regions(const FeatureStore& store, const std::string& cue,
                                                const QuestionInstance& q)
{
    const auto& channel = store.require_channel(cue);
    const auto* regions = channel.find(q.image_id);
    if (!regions)
        throw Error(ErrorCode::MissingFeatures,
                    "question " + q.id + ": image '" + q.image_id + "' has no features in channel '" + cue + "'");
    return *regions;
}

const Eigen::VectorXd& whole_image_vector(const std::vector<RegionFeature>& regions, const std::string& cue,
                                          const QuestionInstance& q)
{
    if (regions.size() != 1)
        throw Error(ErrorCode::DimMismatch, "question " + q.id + ": full-image cue '" + cue +
                                                "' expects one row per image, found " +
                                                std::to_string(regions.size()));
    return regions.front().vec;
}

} // namespace

CueMode parse_cue_mode(const std::string& name)
{
    if (name == "fullimage")
        return CueMode::FullImage;
    if (name == "region")
        return CueMode::Region;
    throw Error(ErrorCode::InvalidArgument, "unknown cue mode '" + name + "' (fullimage | region)");
}

std::string cue_mode_name(CueMode mode) { return mode == CueMode::Region ? "region" : "fullimage"; }

SelectionMode parse_selection_mode(const std::string& name)
{
    if (name == "per_question")
        return SelectionMode::PerQuestion;
    if (name == "per_candidate")
        return SelectionMode::PerCandidate;
    throw Error(ErrorCode::InvalidArgument,
                "unknown selection mode '" + name + "' (per_question | per_candidate)");
}

std::string selection_mode_name(SelectionMode mode)
{
    return mode == SelectionMode::PerCandidate ? "per_candidate" : "per_question";
}

CueConfig find_cue_config(const std::vector<CueConfig>& configs, const std::string& cue)
{
    const auto it = std::find_if(configs.begin(), configs.end(), [&](const CueConfig& c) { return c.name == cue; });
    if (it != configs.end())
        return *it;
    CueConfig fallback;
    fallback.name = cue;
    return fallback;
}

const CcaModel& ModelSet::get(const std::string& qtype, const std::string& cue) const
{
    if (const auto t = per_type.find(qtype); t != per_type.end())
        if (const auto m = t->second.find(cue); m != t->second.end())
            return m->second;
    if (const auto m = shared.find(cue); m != shared.end())
        return m->second;
    throw Error(ErrorCode::UnknownQtype, "no model for cue '" + cue + "' on qtype '" + qtype + "'");
}

TrainingPairs training_pairs(const FeatureStore& store, const WordVectorTable& table,
                             const std::vector<QuestionInstance>& questions, const CueConfig& cue)
{
    const auto& channel = store.require_channel(cue.name);
    std::vector<Eigen::VectorXd> xs;
    std::vector<Eigen::VectorXd> ys;
    TrainingPairs out;
    for (const auto& q : questions) {
        if (!q.gold)
            throw Error(ErrorCode::MissingGold, "training question " + q.id + " has no gold index");
        const auto& regions = image_regions(store, cue.name, q);
        Eigen::VectorXd x;
        if (cue.mode == CueMode::FullImage) {
            x = whole_image_vector(regions, cue.name, q);
        } else {
            x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(channel.dim));
            for (const auto& r : regions)
                x += r.vec;
            x /= static_cast<double>(regions.size());
        }
        try {
            ys.push_back(embed_phrase(table, q.candidates[*q.gold]));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoKnownTokens && e.code() != ErrorCode::DegenerateEmbedding)
                throw;
            ++out.skipped;
            continue;
        }
        xs.push_back(std::move(x));
    }
    out.X.resize(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(channel.dim));
    out.Y.resize(static_cast<Eigen::Index>(ys.size()), static_cast<Eigen::Index>(table.dim()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = xs[i].transpose();
        out.Y.row(static_cast<Eigen::Index>(i)) = ys[i].transpose();
    }
    return out;
}

std::vector<CandidateEmbedding> embed_candidates(const WordVectorTable& table, const QuestionInstance& q,
                                                 std::vector<std::string>& warnings)
{
    std::vector<CandidateEmbedding> out;
    out.reserve(q.candidates.size());
    for (std::size_t j = 0; j < q.candidates.size(); ++j) {
        try {
            out.emplace_back(embed_phrase(table, q.candidates[j]));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoKnownTokens && e.code() != ErrorCode::DegenerateEmbedding)
                throw;
            warnings.push_back("question " + q.id + ": candidate " + std::to_string(j) +
                               " has no embedding, scored 0");
            out.emplace_back(std::nullopt);
        }
    }
    return out;
}

CueScores score_question_cue(const CcaModel& model, const FeatureStore& store, const WordVectorTable& table,
                             const QuestionInstance& q, const std::vector<CandidateEmbedding>& candidates,
                             const CueConfig& cue, std::vector<std::string>& warnings)
{
    const auto& regions = image_regions(store, cue.name, q);
    CueScores scores;
    if (cue.mode == CueMode::FullImage) {
        scores = score_cue_fullimage(model, whole_image_vector(regions, cue.name, q), candidates);
    } else if (cue.selection == SelectionMode::PerCandidate) {
        scores = score_cue_region_per_candidate(model, regions, candidates, cue.policy);
    } else {
        // Without a usable prompt embedding, fall back to letting each
        // candidate choose its own region.
        std::optional<Eigen::VectorXd> query;
        try {
            query = embed_phrase(table, q.prompt);
            if (project_y(model, *query).norm() < 1e-12)
                throw Error(ErrorCode::ZeroProjection, "prompt projects to zero");
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoKnownTokens && e.code() != ErrorCode::DegenerateEmbedding &&
                e.code() != ErrorCode::ZeroProjection)
                throw;
            warnings.push_back("question " + q.id + ": prompt unusable for region selection in cue '" +
                               cue.name + "', using per-candidate selection");
            query.reset();
        }
        scores = query ? score_cue_region(model, regions, *query, candidates, cue.policy)
                       : score_cue_region_per_candidate(model, regions, candidates, cue.policy);
    }
    scores.question_id = q.id;
    scores.cue = cue.name;
    for (const auto j : scores.degenerate_candidates)
        if (candidates[j])
            warnings.push_back("question " + q.id + ": candidate " + std::to_string(j) +
                               " projects to zero under cue '" + cue.name + "', scored 0");
    return scores;
}

QuestionScores score_question(const ModelSet& models, const FeatureStore& store, const WordVectorTable& table,
                              const QuestionInstance& q, const std::vector<std::string>& cues,
                              const std::vector<CueConfig>& configs)
{
    QuestionScores out;
    const auto candidates = embed_candidates(table, q, out.warnings);
    for (const auto& cue : cues)
        out.per_cue.push_back(score_question_cue(models.get(q.qtype, cue), store, table, q, candidates,
                                                 find_cue_config(configs, cue), out.warnings));
    return out;
}

CueScoreTensor build_score_tensor(const ModelSet& models, const FeatureStore& store, const WordVectorTable& table,
                                  const std::vector<QuestionInstance>& questions,
                                  const std::vector<std::string>& cues, const std::vector<CueConfig>& configs,
                                  std::size_t threads)
{
    CueScoreTensor t;
    t.cues = cues;
    t.questions.resize(questions.size());
    t.qtypes.resize(questions.size());
    t.scores.resize(questions.size());
    t.gold.resize(questions.size());
    parallel_for(questions.size(), threads, [&](std::size_t i) {
        const auto& q = questions[i];
        const auto qs = score_question(models, store, table, q, cues, configs);
        t.questions[i] = q.id;
        t.qtypes[i] = q.qtype;
        t.gold[i] = q.gold;
        for (const auto& cs : qs.per_cue)
            t.scores[i].push_back(cs.scores);
    });
    return t;
}

std::map<std::string, std::vector<QuestionInstance>> group_by_qtype(const std::vector<QuestionInstance>& questions)
{
    std::map<std::string, std::vector<QuestionInstance>> out;
    for (const auto& q : questions)
        out[q.qtype].push_back(q);
    return out;
}

} // namespace mcqa
