#include <gtest/gtest.h>

#include <cmath>

#include "mcqa/byte_io.hpp"
#include "mcqa/error.hpp"
#include "mcqa/synthetic.hpp"
#include "mcqa/text_embed.hpp"
#include "test_support.hpp"

using namespace mcqa;

namespace {

ErrorCode parse_error_code(std::string_view text)
{
    try {
        parse_word_vectors(text);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected parse failure";
    return ErrorCode::InvalidArgument;
}

WordVectorTable cat_dog() { return parse_word_vectors("cat 1 0\ndog 0 1\n"); }

} // namespace

TEST(Tokenize, LowercasesAndSplitsOnPunctuation)
{
    EXPECT_EQ(tokenize("The  Cat's HAT-stand, 2x!"),
              (std::vector<std::string>{"the", "cat", "s", "hat", "stand", "2x"}));
    EXPECT_TRUE(tokenize("  --!! ").empty());
    EXPECT_EQ(tokenize("caf\xc3\xa9 ok"), (std::vector<std::string>{"caf\xc3\xa9", "ok"}));
}

TEST(WordVectors, LoadsGloveStyleFile)
{
    const auto dir = mcqa::testing::temp_dir("wv_load");
    const auto path = (dir / "wv.txt").string();
    byte_io::write_text_file(path, "cat 1 0\ndog 0 1\n");
    const auto t = load_word_vectors(path);
    EXPECT_EQ(t.dim(), 2u);
    EXPECT_EQ(t.size(), 2u);
    ASSERT_NE(t.find("dog"), nullptr);
    EXPECT_EQ((*t.find("dog"))(1), 1.0);
}

TEST(WordVectors, Errors)
{
    EXPECT_EQ(parse_error_code("cat 1 0\ncat 0 1\n"), ErrorCode::DuplicateToken);
    EXPECT_EQ(parse_error_code("Cat 1 0\ncat 0 1\n"), ErrorCode::DuplicateToken);
    EXPECT_EQ(parse_error_code(""), ErrorCode::EmptyFile);
    EXPECT_EQ(parse_error_code("\n\n  \n"), ErrorCode::EmptyFile);
    EXPECT_EQ(parse_error_code("cat 1 0\ndog 0\n"), ErrorCode::ParseError);
    EXPECT_EQ(parse_error_code("cat 1 zero\n"), ErrorCode::ParseError);
    EXPECT_EQ(parse_error_code("cat\n"), ErrorCode::ParseError);
}

TEST(WordVectors, ParseErrorNamesTheLine)
{
    try {
        parse_word_vectors("cat 1 0\n\ndog 0 x\n", "wv.txt");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("wv.txt:3"), std::string::npos) << e.what();
    }
}

TEST(EmbedPhrase, Examples)
{
    const auto t = cat_dog();
    const Eigen::VectorXd cat = embed_phrase(t, "cat");
    EXPECT_EQ(cat, Eigen::Vector2d(1, 0));
    EXPECT_EQ(embed_phrase(t, "cat cat"), cat);
    // Independent hand computation: average (0.5, 0.5), then divide by its norm.
    const double h = 0.5 / std::sqrt(0.5 * 0.5 + 0.5 * 0.5);
    const Eigen::VectorXd both = embed_phrase(t, "cat dog");
    EXPECT_NEAR(both(0), h, 1e-15);
    EXPECT_NEAR(both(1), h, 1e-15);
    EXPECT_NEAR(h, 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(EmbedPhrase, NoKnownTokens)
{
    const auto t = cat_dog();
    EXPECT_THROW(embed_phrase(t, "zebra"), Error);
    try {
        embed_phrase(t, "");
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoKnownTokens);
    }
}

TEST(EmbedPhrase, Properties)
{
    Rng rng(5);
    WordVectorTable t(6);
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g"};
    for (const auto& w : vocab)
        t.insert(w, rng.normal_vector(6));
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> words;
        const std::size_t len = 1 + rng.index(6);
        for (std::size_t i = 0; i < len; ++i)
            words.push_back(vocab[rng.index(vocab.size())]);
        std::string phrase, reversed, with_oov;
        for (std::size_t i = 0; i < words.size(); ++i) {
            phrase += words[i] + " ";
            reversed += words[words.size() - 1 - i] + " ";
            with_oov += words[i] + (i == 0 ? " unknownword " : " ");
        }
        const Eigen::VectorXd e = embed_phrase(t, phrase);
        EXPECT_NEAR(e.norm(), 1.0, 1e-9);
        EXPECT_EQ(embed_phrase(t, reversed), e);
        EXPECT_EQ(embed_phrase(t, with_oov), e);
    }
}

TEST(WordVectors, SaveLoadRoundTrip)
{
    Rng rng(6);
    WordVectorTable t(3);
    t.insert("alpha", rng.normal_vector(3));
    t.insert("beta", rng.normal_vector(3));
    const auto dir = mcqa::testing::temp_dir("wv_roundtrip");
    save_word_vectors(t, (dir / "wv.txt").string());
    const auto back = load_word_vectors((dir / "wv.txt").string());
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(*back.find("alpha"), *t.find("alpha"));
    EXPECT_EQ(*back.find("beta"), *t.find("beta"));
}
