#include "mcqa/byte_io.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>

namespace mcqa::byte_io {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

namespace {

std::ofstream open_for_write(const std::string& path)
{
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty())
        std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path);
    return out;
}

} // namespace

void write_file(const std::string& path, const std::vector<char>& bytes)
{
    auto out = open_for_write(path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorCode::IoError, "short write to " + path);
}

void write_text_file(const std::string& path, std::string_view text)
{
    auto out = open_for_write(path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw Error(ErrorCode::IoError, "short write to " + path);
}

} // namespace mcqa::byte_io
