#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mcqa {

/// Pixel box (x, y, w, h); x, y >= 0 and w, h > 0.
struct BBox {
    double x = 0, y = 0, w = 1, h = 1;
    bool operator==(const BBox&) const = default;
};

struct RegionFeature {
    BBox bbox;
    Eigen::VectorXd vec;
};

/// One channel stands in for one cue-specific feature extractor. Each image
/// maps to an ordered region list; whole-image features are a list of one.
struct FeatureChannel {
    std::size_t dim = 0;
    std::map<std::string, std::vector<RegionFeature>, std::less<>> images;

    /// nullptr when the image has no entry.
    const std::vector<RegionFeature>* find(std::string_view image_id) const;
};

class FeatureStore {
public:
    /// Adds an empty channel; InvalidArgument if the name already exists.
    FeatureChannel& add_channel(const std::string& name, std::size_t dim);

    /// Adds an image entry; DuplicateImageId, DimMismatch or InvalidArgument on bad input.
    void add_image(const std::string& channel, const std::string& image_id,
                   std::vector<RegionFeature> regions);

    const FeatureChannel* channel(std::string_view name) const;
    const FeatureChannel& require_channel(std::string_view name) const;
    const std::map<std::string, FeatureChannel, std::less<>>& channels() const noexcept { return channels_; }

private:
    std::map<std::string, FeatureChannel, std::less<>> channels_;
};

struct QuestionInstance {
    std::string id;
    std::string qtype;
    std::string image_id;
    std::string prompt;
    std::vector<std::string> candidates;
    std::optional<std::size_t> gold;
};

/// Reads a feature manifest (JSON) and every channel index/binary it lists.
/// Relative paths inside the manifest resolve against the manifest's directory.
FeatureStore load_features(const std::string& manifest_path);

/// Writes manifest.json plus one <channel>.index.jsonl / <channel>.bin pair
/// per channel into `dir`. Vectors are narrowed to single precision.
void save_features(const FeatureStore& store, const std::string& dir);

std::vector<QuestionInstance> load_questions(const std::string& path);
std::vector<QuestionInstance> parse_questions(std::string_view text, const std::string& context = "questions");
void save_questions(const std::vector<QuestionInstance>& questions, const std::string& path);

struct ValidationIssue {
    std::string question_id;
    std::string channel;
    std::string image_id;
    std::string reason;
};

/// One issue per (question, channel) pair whose image has no features.
std::vector<ValidationIssue> validate_dataset(const FeatureStore& store,
                                              const std::vector<QuestionInstance>& questions,
                                              const std::vector<std::string>& required_channels);

} // namespace mcqa
