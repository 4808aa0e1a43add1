#include "mcqa/text_embed.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "mcqa/byte_io.hpp"
#include "mcqa/error.hpp"

namespace mcqa {

namespace {

bool is_token_char(unsigned char c) { return c >= 0x80 || std::isalnum(c); }

std::string lowercase(std::string s)
{
    for (auto& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

} // namespace

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> tokens;
    std::string current;
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_token_char(c)) {
            current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty())
        tokens.push_back(std::move(current));
    return tokens;
}

void WordVectorTable::insert(std::string token, Eigen::VectorXd vec)
{
    if (token.empty())
        throw Error(ErrorCode::InvalidArgument, "empty token");
    if (dim_ == 0)
        dim_ = static_cast<std::size_t>(vec.size());
    if (static_cast<std::size_t>(vec.size()) != dim_)
        throw Error(ErrorCode::DimMismatch, "vector for '" + token + "' has length " +
                                                std::to_string(vec.size()) + ", table dim is " +
                                                std::to_string(dim_));
    token = lowercase(std::move(token));
    auto [it, inserted] = entries_.try_emplace(token, std::move(vec));
    if (!inserted)
        throw Error(ErrorCode::DuplicateToken, "token '" + token + "' appears twice");
}

const Eigen::VectorXd* WordVectorTable::find(std::string_view token) const
{
    const auto it = entries_.find(token);
    return it == entries_.end() ? nullptr : &it->second;
}

WordVectorTable parse_word_vectors(std::string_view text, const std::string& context)
{
    WordVectorTable table;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        const std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        const auto fields = split_ws(line);
        if (fields.empty())
            continue;
        const std::string where = context + ":" + std::to_string(line_no);
        if (fields.size() < 2)
            throw Error(ErrorCode::ParseError, where + ": expected a token followed by numbers");
        if (dim == 0)
            dim = fields.size() - 1;
        if (fields.size() - 1 != dim)
            throw Error(ErrorCode::ParseError, where + ": expected " + std::to_string(dim) +
                                                   " values, found " +
                                                   std::to_string(fields.size() - 1));
        Eigen::VectorXd vec(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < dim; ++i) {
            const auto f = fields[i + 1];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
                throw Error(ErrorCode::ParseError,
                            where + ": non-numeric value '" + std::string(f) + "'");
            vec(static_cast<Eigen::Index>(i)) = v;
        }
        try {
            table.insert(std::string(fields[0]), std::move(vec));
        } catch (const Error& e) {
            throw Error(e.code(), where + ": " + e.what());
        }
    }
    if (table.size() == 0)
        throw Error(ErrorCode::EmptyFile, context + " has no entries");
    return table;
}

WordVectorTable load_word_vectors(const std::string& path)
{
    return parse_word_vectors(byte_io::read_file(path), path);
}

void save_word_vectors(const WordVectorTable& table, const std::string& path)
{
    std::ostringstream out;
    out << std::setprecision(17);
    for (const auto& [token, vec] : table.entries()) {
        out << token;
        for (Eigen::Index i = 0; i < vec.size(); ++i)
            out << ' ' << vec(i);
        out << '\n';
    }
    byte_io::write_text_file(path, out.str());
}

Eigen::VectorXd embed_phrase(const WordVectorTable& table, std::string_view phrase)
{
    std::map<std::string, std::size_t, std::less<>> counts;
    for (auto& tok : tokenize(phrase))
        if (table.find(tok))
            ++counts[tok];
    if (counts.empty())
        throw Error(ErrorCode::NoKnownTokens, "no in-vocabulary tokens in \"" + std::string(phrase) + "\"");

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.dim()));
    std::size_t total = 0;
    for (const auto& [tok, count] : counts) {
        sum += static_cast<double>(count) * *table.find(tok);
        total += count;
    }
    sum /= static_cast<double>(total);
    const double norm = sum.norm();
    if (!(norm > 0.0))
        throw Error(ErrorCode::DegenerateEmbedding,
                    "token vectors of \"" + std::string(phrase) + "\" average to zero");
    return sum / norm;
}

} // namespace mcqa
