#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mcqa {

/// Lowercases ASCII and splits on maximal runs of non-alphanumeric ASCII
/// characters. Bytes >= 0x80 are kept inside tokens so UTF-8 words survive.
std::vector<std::string> tokenize(std::string_view text);

/// Token -> vector table, tokens lowercase and unique.
class WordVectorTable {
public:
    WordVectorTable() = default;
    explicit WordVectorTable(std::size_t dim) : dim_(dim) {}

    /// Token is lowercased; DuplicateToken if already present, DimMismatch on a wrong length.
    void insert(std::string token, Eigen::VectorXd vec);

    const Eigen::VectorXd* find(std::string_view token) const;
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::map<std::string, Eigen::VectorXd, std::less<>>& entries() const noexcept { return entries_; }

private:
    std::size_t dim_ = 0;
    std::map<std::string, Eigen::VectorXd, std::less<>> entries_;
};

/// Parses GloVe-style text: one token then `dim` numbers per line.
WordVectorTable load_word_vectors(const std::string& path);
WordVectorTable parse_word_vectors(std::string_view text, const std::string& context = "word vectors");
void save_word_vectors(const WordVectorTable& table, const std::string& path);

/// L2-normalized mean of the in-vocabulary token vectors; OOV tokens are
/// skipped. Tokens are accumulated in sorted order so the result does not
/// depend on word order.
Eigen::VectorXd embed_phrase(const WordVectorTable& table, std::string_view phrase);

} // namespace mcqa
