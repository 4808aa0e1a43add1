#pragma once

// Little-endian primitive encoding shared by the binary model and feature
// formats. Values are serialized byte by byte so files are identical across
// hosts regardless of native endianness.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "mcqa/error.hpp"

namespace mcqa::byte_io {

class Writer {
public:
    void magic(std::string_view tag) { buf_.insert(buf_.end(), tag.begin(), tag.end()); }

    void u32(std::uint32_t v) { put_le(v, 4); }
    void u64(std::uint64_t v) { put_le(v, 8); }
    void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v), 4); }
    void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v), 8); }

    const std::vector<char>& bytes() const noexcept { return buf_; }

private:
    void put_le(std::uint64_t v, int width)
    {
        for (int i = 0; i < width; ++i)
            buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }

    std::vector<char> buf_;
};

/// Cursor over an in-memory byte buffer; every read is bounds-checked and
/// reports TruncatedFile with the given context on overrun.
class Reader {
public:
    Reader(std::string_view data, std::string context)
        : data_(data), context_(std::move(context)) {}

    void expect_magic(std::string_view tag)
    {
        need(tag.size());
        if (data_.substr(pos_, tag.size()) != tag)
            throw Error(ErrorCode::MagicMismatch,
                        context_ + ": expected magic \"" + std::string(tag) + "\"");
        pos_ += tag.size();
    }

    std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
    std::uint64_t u64() { return get_le(8); }
    float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(get_le(4))); }
    double f64() { return std::bit_cast<double>(get_le(8)); }

    std::size_t remaining() const noexcept { return data_.size() - pos_; }

    void need(std::size_t n) const
    {
        if (remaining() < n)
            throw Error(ErrorCode::TruncatedFile,
                        context_ + ": needed " + std::to_string(n) + " more bytes, " +
                            std::to_string(remaining()) + " available");
    }

private:
    std::uint64_t get_le(int width)
    {
        need(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(width);
        return v;
    }

    std::string_view data_;
    std::size_t pos_ = 0;
    std::string context_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<char>& bytes);
void write_text_file(const std::string& path, std::string_view text);

} // namespace mcqa::byte_io
