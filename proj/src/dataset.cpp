#include "mcqa/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "json.hpp"

#include "mcqa/byte_io.hpp"
#include "mcqa/error.hpp"

namespace mcqa {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr char kFeatureMagic[] = "MCFS";
constexpr std::uint32_t kFeatureVersion = 1;

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn)
{
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos)
            continue;
        fn(line, line_no);
    }
}

json parse_json(std::string_view text, const std::string& where)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, where + ": " + e.what());
    }
}

const json& field(const json& obj, const char* name, const std::string& where)
{
    if (!obj.is_object())
        throw Error(ErrorCode::ParseError, where + ": expected a JSON object");
    const auto it = obj.find(name);
    if (it == obj.end())
        throw Error(ErrorCode::MissingField, where + ": missing field '" + name + "'");
    return *it;
}

std::string string_field(const json& obj, const char* name, const std::string& where)
{
    const json& v = field(obj, name, where);
    if (!v.is_string())
        throw Error(ErrorCode::ParseError, where + ": field '" + name + "' must be a string");
    return v.get<std::string>();
}

std::uint64_t uint_field(const json& obj, const char* name, const std::string& where)
{
    const json& v = field(obj, name, where);
    if (!v.is_number_unsigned())
        throw Error(ErrorCode::ParseError,
                    where + ": field '" + name + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

BBox parse_bbox(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 4)
        throw Error(ErrorCode::ParseError, where + ": bbox must be [x, y, w, h]");
    std::array<double, 4> v{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (!j[i].is_number())
            throw Error(ErrorCode::ParseError, where + ": bbox entries must be numbers");
        v[i] = j[i].get<double>();
    }
    BBox b{v[0], v[1], v[2], v[3]};
    if (!(b.x >= 0 && b.y >= 0 && b.w > 0 && b.h > 0) || !std::isfinite(b.x + b.y + b.w + b.h))
        throw Error(ErrorCode::ParseError, where + ": malformed bbox");
    return b;
}

void check_regions(const std::vector<RegionFeature>& regions, std::size_t dim, const std::string& where)
{
    if (regions.empty())
        throw Error(ErrorCode::InvalidArgument, where + ": image has no regions");
    for (const auto& r : regions) {
        if (static_cast<std::size_t>(r.vec.size()) != dim)
            throw Error(ErrorCode::DimMismatch, where + ": vector length " +
                                                    std::to_string(r.vec.size()) +
                                                    " != channel dim " + std::to_string(dim));
        if (!r.vec.allFinite())
            throw Error(ErrorCode::NonFiniteInput, where + ": non-finite feature");
        const auto& b = r.bbox;
        if (!(b.x >= 0 && b.y >= 0 && b.w > 0 && b.h > 0))
            throw Error(ErrorCode::InvalidArgument, where + ": malformed bbox");
    }
}

void load_channel(FeatureStore& store, const std::string& name, std::size_t dim,
                  const std::string& index_path, const std::string& binary_path)
{
    const std::string raw = byte_io::read_file(binary_path);
    byte_io::Reader r(raw, binary_path);
    r.expect_magic(kFeatureMagic);
    if (const auto v = r.u32(); v != kFeatureVersion)
        throw Error(ErrorCode::UnsupportedVersion, binary_path + ": version " + std::to_string(v));
    const std::uint32_t bin_dim = r.u32();
    const std::uint64_t rows = r.u64();
    if (bin_dim != dim)
        throw Error(ErrorCode::DimMismatch, binary_path + ": header dim " + std::to_string(bin_dim) +
                                                " but manifest says " + std::to_string(dim));
    if (dim != 0 && rows > r.remaining() / (4 * dim))
        throw Error(ErrorCode::TruncatedFile, binary_path + ": header declares " +
                                                  std::to_string(rows) + " rows of dim " +
                                                  std::to_string(dim) + ", payload too short");
    r.need(rows * dim * 4);
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> payload(
        static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < payload.size(); ++i)
        payload.data()[i] = r.f32();
    if (r.remaining() != 0)
        throw Error(ErrorCode::ParseError, binary_path + ": trailing bytes after payload");

    store.add_channel(name, dim);
    for_each_line(byte_io::read_file(index_path), [&](std::string_view line, std::size_t line_no) {
        const std::string where = index_path + ":" + std::to_string(line_no);
        const json entry = parse_json(line, where);
        const std::string image_id = string_field(entry, "image_id", where);
        const std::uint64_t start = uint_field(entry, "row_start", where);
        const std::uint64_t count = uint_field(entry, "row_count", where);
        const json& boxes = field(entry, "bboxes", where);
        if (!boxes.is_array() || boxes.size() != count)
            throw Error(ErrorCode::ParseError, where + ": row_count must equal the number of bboxes");
        if (count == 0)
            throw Error(ErrorCode::ParseError, where + ": row_count must be positive");
        if (start > rows || count > rows - start)
            throw Error(ErrorCode::TruncatedFile, where + ": rows [" + std::to_string(start) + ", " +
                                                      std::to_string(start + count) +
                                                      ") exceed binary row count " +
                                                      std::to_string(rows));
        std::vector<RegionFeature> regions;
        regions.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            RegionFeature rf;
            rf.bbox = parse_bbox(boxes[i], where);
            rf.vec = payload.row(static_cast<Eigen::Index>(start + i)).transpose().cast<double>();
            regions.push_back(std::move(rf));
        }
        try {
            store.add_image(name, image_id, std::move(regions));
        } catch (const Error& e) {
            throw Error(e.code(), where + ": " + e.what());
        }
    });
}

} // namespace

const std::vector<RegionFeature>* FeatureChannel::find(std::string_view image_id) const
{
    const auto it = images.find(image_id);
    return it == images.end() ? nullptr : &it->second;
}

FeatureChannel& FeatureStore::add_channel(const std::string& name, std::size_t dim)
{
    if (name.empty() || dim == 0)
        throw Error(ErrorCode::InvalidArgument, "channel needs a name and positive dim");
    auto [it, inserted] = channels_.try_emplace(name);
    if (!inserted)
        throw Error(ErrorCode::InvalidArgument, "duplicate channel '" + name + "'");
    it->second.dim = dim;
    return it->second;
}

void FeatureStore::add_image(const std::string& channel, const std::string& image_id,
                             std::vector<RegionFeature> regions)
{
    const auto it = channels_.find(channel);
    if (it == channels_.end())
        throw Error(ErrorCode::InvalidArgument, "unknown channel '" + channel + "'");
    check_regions(regions, it->second.dim, channel + "/" + image_id);
    auto [pos, inserted] = it->second.images.try_emplace(image_id, std::move(regions));
    if (!inserted)
        throw Error(ErrorCode::DuplicateImageId,
                    "image '" + image_id + "' listed twice in channel '" + channel + "'");
}

const FeatureChannel* FeatureStore::channel(std::string_view name) const
{
    const auto it = channels_.find(name);
    return it == channels_.end() ? nullptr : &it->second;
}

const FeatureChannel& FeatureStore::require_channel(std::string_view name) const
{
    if (const auto* c = channel(name))
        return *c;
    throw Error(ErrorCode::MissingFeatures, "no feature channel '" + std::string(name) + "'");
}

FeatureStore load_features(const std::string& manifest_path)
{
    const fs::path base = fs::path(manifest_path).parent_path();
    const json manifest = parse_json(byte_io::read_file(manifest_path), manifest_path);
    const json& channels = field(manifest, "channels", manifest_path);
    if (!channels.is_array())
        throw Error(ErrorCode::ParseError, manifest_path + ": 'channels' must be an array");

    auto resolve = [&base](const std::string& p) {
        const fs::path path(p);
        return (path.is_absolute() ? path : base / path).string();
    };

    FeatureStore store;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const std::string where = manifest_path + ": channels[" + std::to_string(i) + "]";
        const json& c = channels[i];
        const std::string name = string_field(c, "name", where);
        if (store.channel(name))
            throw Error(ErrorCode::ParseError, where + ": duplicate channel '" + name + "'");
        load_channel(store, name, uint_field(c, "dim", where),
                     resolve(string_field(c, "index", where)),
                     resolve(string_field(c, "binary", where)));
    }
    return store;
}

void save_features(const FeatureStore& store, const std::string& dir)
{
    json manifest;
    manifest["version"] = kFeatureVersion;
    manifest["channels"] = json::array();
    for (const auto& [name, ch] : store.channels()) {
        const std::string index_name = name + ".index.jsonl";
        const std::string binary_name = name + ".bin";

        std::uint64_t rows = 0;
        for (const auto& [id, regions] : ch.images)
            rows += regions.size();

        byte_io::Writer w;
        w.magic(kFeatureMagic);
        w.u32(kFeatureVersion);
        w.u32(static_cast<std::uint32_t>(ch.dim));
        w.u64(rows);
        std::ostringstream index;
        std::uint64_t row = 0;
        for (const auto& [id, regions] : ch.images) {
            json entry;
            entry["image_id"] = id;
            entry["row_start"] = row;
            entry["row_count"] = regions.size();
            entry["bboxes"] = json::array();
            for (const auto& r : regions) {
                entry["bboxes"].push_back({r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h});
                for (Eigen::Index j = 0; j < r.vec.size(); ++j)
                    w.f32(static_cast<float>(r.vec(j)));
            }
            row += regions.size();
            index << entry.dump() << '\n';
        }
        byte_io::write_file((fs::path(dir) / binary_name).string(), w.bytes());
        byte_io::write_text_file((fs::path(dir) / index_name).string(), index.str());
        manifest["channels"].push_back(
            {{"name", name}, {"dim", ch.dim}, {"index", index_name}, {"binary", binary_name}});
    }
    byte_io::write_text_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

std::vector<QuestionInstance> parse_questions(std::string_view text, const std::string& context)
{
    std::vector<QuestionInstance> out;
    std::set<std::string, std::less<>> seen;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        const std::string where = context + ":" + std::to_string(line_no);
        const json obj = parse_json(line, where);
        QuestionInstance q;
        q.id = string_field(obj, "id", where);
        q.qtype = string_field(obj, "qtype", where);
        q.image_id = string_field(obj, "image_id", where);
        q.prompt = string_field(obj, "prompt", where);
        const json& cands = field(obj, "candidates", where);
        if (!cands.is_array() || cands.size() < 2)
            throw Error(ErrorCode::ParseError, where + ": 'candidates' must list at least 2 strings");
        for (const auto& c : cands) {
            if (!c.is_string() || c.get<std::string>().empty())
                throw Error(ErrorCode::ParseError, where + ": candidates must be non-empty strings");
            q.candidates.push_back(c.get<std::string>());
        }
        if (const auto g = obj.find("gold"); g != obj.end() && !g->is_null()) {
            if (!g->is_number_integer())
                throw Error(ErrorCode::ParseError, where + ": 'gold' must be an integer");
            const auto gold = g->get<std::int64_t>();
            if (gold < 0 || static_cast<std::uint64_t>(gold) >= q.candidates.size())
                throw Error(ErrorCode::BadGoldIndex, where + ": gold " + std::to_string(gold) +
                                                         " out of range for " +
                                                         std::to_string(q.candidates.size()) +
                                                         " candidates");
            q.gold = static_cast<std::size_t>(gold);
        }
        if (!seen.insert(q.id).second)
            throw Error(ErrorCode::ParseError, where + ": duplicate question id '" + q.id + "'");
        out.push_back(std::move(q));
    });
    return out;
}

std::vector<QuestionInstance> load_questions(const std::string& path)
{
    return parse_questions(byte_io::read_file(path), path);
}

void save_questions(const std::vector<QuestionInstance>& questions, const std::string& path)
{
    std::ostringstream out;
    for (const auto& q : questions) {
        json obj{{"id", q.id},         {"qtype", q.qtype},   {"image_id", q.image_id},
                 {"prompt", q.prompt}, {"candidates", q.candidates}};
        if (q.gold)
            obj["gold"] = *q.gold;
        out << obj.dump() << '\n';
    }
    byte_io::write_text_file(path, out.str());
}

std::vector<ValidationIssue> validate_dataset(const FeatureStore& store,
                                              const std::vector<QuestionInstance>& questions,
                                              const std::vector<std::string>& required_channels)
{
    std::vector<ValidationIssue> issues;
    for (const auto& q : questions) {
        for (const auto& name : required_channels) {
            const auto* ch = store.channel(name);
            if (!ch)
                issues.push_back({q.id, name, q.image_id, "channel missing from feature store"});
            else if (!ch->find(q.image_id))
                issues.push_back({q.id, name, q.image_id, "image has no features in channel"});
        }
    }
    return issues;
}

} // namespace mcqa
