#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mcqa/cca.hpp"
#include "mcqa/eval.hpp"
#include "mcqa/fusion.hpp"
#include "mcqa/pipeline.hpp"

namespace mcqa {

/// Experiment bundle read from a single JSON file. Relative paths resolve
/// against the directory holding the config file.
struct RunConfig {
    struct Paths {
        std::string features;        ///< feature manifest
        std::string word_vectors;
        std::string train_questions;
        std::string val_questions;
        std::string test_questions;
        std::string lexicons;        ///< optional; needed by `stats`
        std::string model_dir;
        std::string report_dir;
    } paths;

    CcaParams cca{8, kDefaultCcaReg, kDefaultCcaPower};
    bool shared_embedding = false;  ///< one model per cue across all question types
    std::vector<CueConfig> cues;

    double grid_step = 0.1;
    ScoreNormalization normalization = ScoreNormalization::Off;

    std::string transfer_cue;  ///< defaults to the first full-image cue
    std::string stats_split = "all";  ///< train | val | test | all
    AnswerScope stats_scope = AnswerScope::GoldOnly;

    std::uint64_t seed = 0;
    std::size_t threads = 0;  ///< 0 = MCQA_THREADS or hardware concurrency

    std::vector<std::string> cue_names() const;
};

/// Parses and range-checks a config; InvalidArgument on any violation.
RunConfig config_from_json(const nlohmann::json& j, const std::string& base_dir);
RunConfig load_config(const std::string& path);

/// Serializes with paths relative to `base_dir` when they live beneath it.
nlohmann::json config_to_json(const RunConfig& config, const std::string& base_dir);

} // namespace mcqa
