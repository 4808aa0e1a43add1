#include "mcqa/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/QR>

#include "mcqa/error.hpp"

namespace mcqa {

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0)
        u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::size_t Rng::index(std::size_t n)
{
    if (n == 0)
        throw Error(ErrorCode::InvalidArgument, "Rng::index on empty range");
    const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index n)
{
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = normal();
    return v;
}

Eigen::MatrixXd Rng::normal_matrix(Eigen::Index rows, Eigen::Index cols)
{
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            m(r, c) = normal();
    return m;
}

Eigen::MatrixXd Rng::orthonormal_columns(Eigen::Index rows, Eigen::Index cols)
{
    if (cols > rows)
        throw Error(ErrorCode::InvalidArgument, "cannot fit more orthonormal columns than rows");
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(normal_matrix(rows, cols));
    return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

std::vector<std::size_t> Rng::permutation(std::size_t n)
{
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i)
        p[i] = i;
    for (std::size_t i = n; i > 1; --i)
        std::swap(p[i - 1], p[index(i)]);
    return p;
}

double loading_rms(const Eigen::MatrixXd& loading)
{
    return std::sqrt(loading.squaredNorm() / static_cast<double>(loading.rows()));
}

namespace {

std::string padded(std::size_t v, int width)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*zu", width, v);
    return buf;
}

Eigen::VectorXd observe(Rng& rng, const Eigen::MatrixXd& loading, const Eigen::VectorXd& z, double rel_noise)
{
    return loading * z + (rel_noise * loading_rms(loading)) * rng.normal_vector(loading.rows());
}

BBox random_box(Rng& rng)
{
    BBox b;
    b.x = std::floor(rng.uniform() * 480.0);
    b.y = std::floor(rng.uniform() * 320.0);
    b.w = 32.0 + std::floor(rng.uniform() * 128.0);
    b.h = 32.0 + std::floor(rng.uniform() * 128.0);
    return b;
}

} // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec)
{
    if (spec.candidates < 2 || spec.text_dim == 0 || spec.types.empty() || spec.cues.empty())
        throw Error(ErrorCode::InvalidArgument, "synthetic spec needs cues, types, text_dim and >= 2 candidates");

    Rng rng(spec.seed);
    SyntheticDataset out;
    out.table = WordVectorTable(spec.text_dim);
    for (const auto& cue : spec.cues)
        out.store.add_channel(cue.name, cue.dim);
    for (const auto& word : spec.answer_words)
        out.table.insert(word, 1e-3 * rng.normal_vector(static_cast<Eigen::Index>(spec.text_dim)));

    std::size_t token_counter = 0;
    auto new_token = [&](Eigen::VectorXd vec) {
        std::string tok = "w" + padded(token_counter++, 7);
        out.table.insert(tok, std::move(vec));
        return tok;
    };

    for (const auto& [split, per_type] : spec.splits) {
        auto& questions = out.splits[split];
        for (const auto& type : spec.types) {
            const Eigen::MatrixXd& B = type.text_loading;
            if (static_cast<std::size_t>(B.rows()) != spec.text_dim)
                throw Error(ErrorCode::DimMismatch, "text loading rows != text_dim for " + type.qtype);
            const Eigen::Index latent = B.cols();
            for (Eigen::Index c : type.unpaired_latent)
                if (c < 0 || c >= latent)
                    throw Error(ErrorCode::InvalidArgument, "unpaired latent index out of range for " + type.qtype);

            for (std::size_t n = 0; n < per_type; ++n) {
                QuestionInstance q;
                q.qtype = type.qtype;
                q.id = type.qtype + "-" + split + "-" + padded(n, 5);
                q.image_id = "img-" + q.id;
                const Eigen::VectorXd z = rng.normal_vector(latent);

                for (const auto& cue : spec.cues) {
                    const auto it = type.visual_loading.find(cue.name);
                    if (it == type.visual_loading.end())
                        throw Error(ErrorCode::InvalidArgument,
                                    "type " + type.qtype + " has no loading for cue " + cue.name);
                    const Eigen::MatrixXd& A = it->second;
                    if (static_cast<std::size_t>(A.rows()) != cue.dim || A.cols() != latent)
                        throw Error(ErrorCode::DimMismatch, "visual loading shape mismatch for cue " + cue.name);
                    std::vector<RegionFeature> regions(cue.regions);
                    const std::size_t planted = cue.regions > 1 ? rng.index(cue.regions) : 0;
                    for (std::size_t r = 0; r < cue.regions; ++r) {
                        regions[r].bbox = cue.regions > 1 ? random_box(rng) : BBox{0, 0, 640, 480};
                        const Eigen::VectorXd zr = r == planted ? z : rng.normal_vector(latent);
                        regions[r].vec = observe(rng, A, zr, spec.visual_noise);
                    }
                    out.store.add_image(cue.name, q.image_id, std::move(regions));
                }

                auto text_latent = [&] {
                    Eigen::VectorXd zt = z;
                    for (Eigen::Index c : type.unpaired_latent)
                        zt(c) = rng.normal();
                    return zt;
                };
                q.prompt = "Fill in the blank about " + new_token(observe(rng, B, text_latent(), spec.prompt_noise)) + ":";
                const std::size_t gold = rng.index(spec.candidates);
                for (std::size_t j = 0; j < spec.candidates; ++j) {
                    const bool signal = j == gold && !spec.gold_from_background;
                    const Eigen::VectorXd zc = signal ? text_latent() : rng.normal_vector(latent);
                    std::string text = new_token(observe(rng, B, zc, spec.text_noise));
                    if (!spec.answer_words.empty() && rng.uniform() < spec.answer_word_rate)
                        text += " " + spec.answer_words[rng.index(spec.answer_words.size())];
                    q.candidates.push_back(std::move(text));
                }
                q.gold = gold;
                questions.push_back(std::move(q));
            }
        }
    }
    return out;
}

SyntheticSpec demo_spec(std::uint64_t seed)
{
    // Loadings come from their own stream so they stay fixed per seed even
    // if the sampling order of the dataset changes.
    Rng rng(seed ^ 0x5deece66dULL);
    constexpr Eigen::Index latent = 6;
    constexpr Eigen::Index text_dim = 24;
    constexpr Eigen::Index whole_dim = 32;
    constexpr Eigen::Index region_dim = 24;

    SyntheticSpec spec;
    spec.seed = seed;
    spec.text_dim = text_dim;
    spec.candidates = 4;
    spec.cues = {{"whole", 32, 1}, {"region", 24, 5}};
    spec.splits = {{"train", 400}, {"val", 200}, {"test", 200}};
    spec.visual_noise = 0.6;
    spec.text_noise = 0.6;
    spec.prompt_noise = 0.3;
    spec.answer_words = {"red", "green", "blue", "yellow", "black", "white"};
    spec.answer_word_rate = 0.3;

    // The whole-image cue sees latent coordinates 0-3, the region cue 2-5.
    for (const std::string name : {"scene", "person"}) {
        SyntheticType t;
        t.qtype = name;
        t.text_loading = rng.normal_matrix(text_dim, latent);
        Eigen::MatrixXd whole = rng.normal_matrix(whole_dim, latent);
        whole.rightCols(2).setZero();
        Eigen::MatrixXd region = rng.normal_matrix(region_dim, latent);
        region.leftCols(2).setZero();
        t.visual_loading = {{"whole", whole}, {"region", region}};
        spec.types.push_back(std::move(t));
    }
    return spec;
}

std::map<std::string, std::vector<std::string>> demo_lexicons()
{
    return {{"color", {"red", "green", "blue", "yellow", "black", "white"}},
            {"warm", {"red", "yellow"}}};
}

} // namespace mcqa
