#pragma once

// Synthetic multiple-choice datasets drawn from a linear latent-variable
// model: each question has a latent z; cue channels observe A_cue * z and the
// gold answer's word vector observes B * z, both with Gaussian noise.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mcqa/dataset.hpp"
#include "mcqa/text_embed.hpp"

namespace mcqa {

/// Seeded generator with a platform-independent normal sampler
/// (std::normal_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform();  ///< [0, 1)
    double normal();
    std::size_t index(std::size_t n);  ///< uniform in [0, n)

    Eigen::VectorXd normal_vector(Eigen::Index n);
    Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);
    /// rows x cols matrix with orthonormal columns (cols <= rows).
    Eigen::MatrixXd orthonormal_columns(Eigen::Index rows, Eigen::Index cols);
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Per-coordinate standard deviation of loading * z for z ~ N(0, I).
double loading_rms(const Eigen::MatrixXd& loading);

struct SyntheticCue {
    std::string name;
    std::size_t dim = 0;
    std::size_t regions = 1;  ///< 1 = whole-image channel; >1 = one planted region per image
};

struct SyntheticType {
    std::string qtype;
    Eigen::MatrixXd text_loading;                          ///< text_dim x latent
    std::map<std::string, Eigen::MatrixXd> visual_loading;  ///< cue -> dim x latent
    /// Latent coordinates redrawn independently for the text view: they add
    /// variance to both views without pairing image and answer.
    std::vector<Eigen::Index> unpaired_latent;
};

struct SyntheticSpec {
    std::vector<SyntheticCue> cues;
    std::vector<SyntheticType> types;
    std::size_t text_dim = 0;
    std::size_t candidates = 4;
    /// split name -> questions per type
    std::vector<std::pair<std::string, std::size_t>> splits;
    double visual_noise = 0.1;  ///< relative to loading_rms
    double text_noise = 0.2;    ///< relative to loading_rms
    double prompt_noise = 0.2;  ///< relative to loading_rms
    /// Draw the gold answer from the background distribution (chance baseline).
    bool gold_from_background = false;
    /// Words appended to answers with probability answer_word_rate; their
    /// vectors are tiny so they barely move the phrase embedding.
    std::vector<std::string> answer_words;
    double answer_word_rate = 0.0;
    std::uint64_t seed = 0;
};

struct SyntheticDataset {
    FeatureStore store;
    WordVectorTable table;
    std::map<std::string, std::vector<QuestionInstance>> splits;
};

SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

/// Two question types, a whole-image cue and a region cue that each see part
/// of the latent signal, plus a color-word decoration for lexicon statistics.
SyntheticSpec demo_spec(std::uint64_t seed);

/// Lexicons shipped with the demo dataset.
std::map<std::string, std::vector<std::string>> demo_lexicons();

} // namespace mcqa
