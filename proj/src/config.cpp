#include "mcqa/config.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include "mcqa/byte_io.hpp"
#include "mcqa/error.hpp"

namespace mcqa {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& what)
{
    throw Error(ErrorCode::InvalidArgument, "config: " + what);
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback)
{
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        bad(std::string("field '") + key + "' has the wrong type");
    }
}

std::string resolve(const std::string& base, const std::string& p)
{
    if (p.empty())
        return p;
    const fs::path path(p);
    return (path.is_absolute() ? path : fs::path(base) / path).lexically_normal().string();
}

std::string relativize(const std::string& base, const std::string& p)
{
    if (p.empty())
        return p;
    const auto rel = fs::path(p).lexically_relative(base);
    return rel.empty() || *rel.begin() == ".." ? p : rel.string();
}

} // namespace

std::vector<std::string> RunConfig::cue_names() const
{
    std::vector<std::string> names;
    for (const auto& c : cues)
        names.push_back(c.name);
    return names;
}

RunConfig config_from_json(const json& j, const std::string& base_dir)
{
    if (!j.is_object())
        bad("top level must be an object");
    RunConfig c;

    const json paths = j.value("paths", json::object());
    c.paths.features = resolve(base_dir, get_or<std::string>(paths, "features", ""));
    c.paths.word_vectors = resolve(base_dir, get_or<std::string>(paths, "word_vectors", ""));
    c.paths.train_questions = resolve(base_dir, get_or<std::string>(paths, "train_questions", ""));
    c.paths.val_questions = resolve(base_dir, get_or<std::string>(paths, "val_questions", ""));
    c.paths.test_questions = resolve(base_dir, get_or<std::string>(paths, "test_questions", ""));
    c.paths.lexicons = resolve(base_dir, get_or<std::string>(paths, "lexicons", ""));
    c.paths.model_dir = resolve(base_dir, get_or<std::string>(paths, "model_dir", "models"));
    c.paths.report_dir = resolve(base_dir, get_or<std::string>(paths, "report_dir", "reports"));

    const json cca = j.value("cca", json::object());
    const auto k = get_or<std::int64_t>(cca, "k", 8);
    if (k < 1 || k > 1'000'000)
        bad("cca.k must be a positive integer");
    c.cca.k = static_cast<std::uint32_t>(k);
    c.cca.reg = get_or<double>(cca, "reg", kDefaultCcaReg);
    c.cca.power = get_or<double>(cca, "power", kDefaultCcaPower);
    if (!std::isfinite(c.cca.reg) || c.cca.reg < 0)
        bad("cca.reg must be finite and >= 0");
    if (!std::isfinite(c.cca.power) || c.cca.power < 0)
        bad("cca.power must be finite and >= 0");
    c.shared_embedding = get_or<bool>(cca, "shared", false);

    const auto cues = j.find("cues");
    if (cues == j.end() || !cues->is_array() || cues->empty())
        bad("'cues' must be a non-empty array");
    std::set<std::string> seen;
    for (const auto& item : *cues) {
        CueConfig cue;
        cue.name = get_or<std::string>(item, "name", "");
        if (cue.name.empty())
            bad("every cue needs a name");
        if (!seen.insert(cue.name).second)
            bad("duplicate cue '" + cue.name + "'");
        cue.mode = parse_cue_mode(get_or<std::string>(item, "mode", "fullimage"));
        cue.selection = parse_selection_mode(get_or<std::string>(item, "selection", "per_question"));
        const auto top_m = get_or<std::int64_t>(item, "top_m", 1);
        if (top_m < 1)
            bad("cue '" + cue.name + "': top_m must be >= 1");
        cue.policy.top_m = static_cast<std::size_t>(top_m);
        c.cues.push_back(std::move(cue));
    }

    const json fusion = j.value("fusion", json::object());
    c.grid_step = get_or<double>(fusion, "grid_step", 0.1);
    if (!(c.grid_step > 0.0 && c.grid_step <= 1.0))
        bad("fusion.grid_step must lie in (0, 1]");
    c.normalization = parse_normalization(get_or<std::string>(fusion, "normalization", "off"));

    const json transfer = j.value("transfer", json::object());
    c.transfer_cue = get_or<std::string>(transfer, "cue", "");
    if (c.transfer_cue.empty()) {
        for (const auto& cue : c.cues)
            if (cue.mode == CueMode::FullImage) {
                c.transfer_cue = cue.name;
                break;
            }
    }

    const json stats = j.value("stats", json::object());
    c.stats_split = get_or<std::string>(stats, "split", "all");
    if (c.stats_split != "all" && c.stats_split != "train" && c.stats_split != "val" && c.stats_split != "test")
        bad("stats.split must be train | val | test | all");
    const auto scope = get_or<std::string>(stats, "scope", "gold");
    if (scope == "gold")
        c.stats_scope = AnswerScope::GoldOnly;
    else if (scope == "all")
        c.stats_scope = AnswerScope::AllCandidates;
    else
        bad("stats.scope must be gold | all");

    const auto seed = j.find("seed");
    if (seed != j.end()) {
        if (!seed->is_number_unsigned())
            bad("seed must be an unsigned integer");
        c.seed = seed->get<std::uint64_t>();
    }
    const auto threads = get_or<std::int64_t>(j, "threads", 0);
    if (threads < 0)
        bad("threads must be >= 0");
    c.threads = static_cast<std::size_t>(threads);
    return c;
}

RunConfig load_config(const std::string& path)
{
    json j;
    try {
        j = json::parse(byte_io::read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidArgument, path + ": " + e.what());
    }
    return config_from_json(j, fs::path(path).parent_path().string());
}

json config_to_json(const RunConfig& c, const std::string& base_dir)
{
    json cues = json::array();
    for (const auto& cue : c.cues)
        cues.push_back({{"name", cue.name},
                        {"mode", cue_mode_name(cue.mode)},
                        {"selection", selection_mode_name(cue.selection)},
                        {"top_m", cue.policy.top_m}});
    return json{
        {"paths",
         {{"features", relativize(base_dir, c.paths.features)},
          {"word_vectors", relativize(base_dir, c.paths.word_vectors)},
          {"train_questions", relativize(base_dir, c.paths.train_questions)},
          {"val_questions", relativize(base_dir, c.paths.val_questions)},
          {"test_questions", relativize(base_dir, c.paths.test_questions)},
          {"lexicons", relativize(base_dir, c.paths.lexicons)},
          {"model_dir", relativize(base_dir, c.paths.model_dir)},
          {"report_dir", relativize(base_dir, c.paths.report_dir)}}},
        {"cca", {{"k", c.cca.k}, {"reg", c.cca.reg}, {"power", c.cca.power}, {"shared", c.shared_embedding}}},
        {"cues", cues},
        {"fusion", {{"grid_step", c.grid_step}, {"normalization", normalization_name(c.normalization)}}},
        {"transfer", {{"cue", c.transfer_cue}}},
        {"stats",
         {{"split", c.stats_split}, {"scope", c.stats_scope == AnswerScope::GoldOnly ? "gold" : "all"}}},
        {"seed", c.seed},
        {"threads", c.threads},
    };
}

} // namespace mcqa
