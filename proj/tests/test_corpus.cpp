#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"

using namespace fgeo;

namespace {

const std::vector<ProblemInstance>& corpus() { return fixtures::mini_corpus().problems; }

std::vector<int> ids(const std::vector<ProblemInstance>& ps) {
  std::vector<int> out;
  for (const auto& p : ps) out.push_back(p.id);
  return out;
}

std::string temp_file(const std::string& name, const std::string& text) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Corpus, MiniCorpusIsFullyAnnotated) {
  ASSERT_EQ(corpus().size(), 20u);
  for (const auto& p : corpus()) {
    EXPECT_TRUE(p.annotated()) << p.id;
    EXPECT_EQ(p.annotated_sequences.size(), p.annotated_names.size()) << p.id;
    EXPECT_TRUE(p.answer.has_value()) << p.id;
  }
  EXPECT_NE(fixtures::mini_corpus().find(7), nullptr);
  EXPECT_EQ(fixtures::mini_corpus().find(700), nullptr);
}

TEST(Split, SizesDeterminismAndPartition) {
  const Split a = split_corpus(corpus(), {0.7, 0.15, 0.15}, 0);
  EXPECT_EQ(a.train.size(), 14u);
  EXPECT_EQ(a.valid.size(), 3u);
  EXPECT_EQ(a.test.size(), 3u);
  const Split b = split_corpus(corpus(), {0.7, 0.15, 0.15}, 0);
  EXPECT_EQ(ids(a.train), ids(b.train));
  EXPECT_EQ(ids(a.valid), ids(b.valid));
  EXPECT_EQ(ids(a.test), ids(b.test));
  std::multiset<int> all;
  for (const auto* part : {&a.train, &a.valid, &a.test}) {
    for (int id : ids(*part)) all.insert(id);
  }
  const auto expected = ids(corpus());
  EXPECT_EQ(all, std::multiset<int>(expected.begin(), expected.end()));
}

TEST(Split, SeedChangesTheAssignment) {
  std::set<std::vector<int>> tests;
  for (std::uint64_t seed = 0; seed < 10; ++seed) tests.insert(ids(split_corpus(corpus(), {0.7, 0.15, 0.15}, seed).test));
  EXPECT_GT(tests.size(), 1u);
}

TEST(Split, RejectsBadRatios) {
  EXPECT_THROW(split_corpus(corpus(), {0.7, 0.2, 0.2}, 0), BadRatios);
  EXPECT_THROW(split_corpus(corpus(), {1.2, -0.1, -0.1}, 0), BadRatios);
  EXPECT_NO_THROW(split_corpus(corpus(), {1.0, 0.0, 0.0}, 0));
  EXPECT_EQ(split_corpus({}, {0.7, 0.15, 0.15}, 0).train.size(), 0u);
}

TEST(Difficulty, LevelsPairUpLengths) {
  const std::vector<int> expected{1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6};
  for (std::size_t len = 1; len <= 12; ++len) EXPECT_EQ(level_of_length(len), expected[len - 1]) << len;
  EXPECT_EQ(level_of_length(40), 6);
  EXPECT_EQ(level_name(3), "l3");
  for (const auto& p : corpus()) {
    EXPECT_EQ(difficulty_level(p), level_of_length(p.annotated_names.front().size()));
  }
  EXPECT_THROW(difficulty_level(ProblemInstance{}), MissingAnnotation);
}

TEST(Corpus, LoadErrorsNameTheLine) {
  EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl"), IoError);
  const std::string good = read_text_file(fixtures::data_path("mini_corpus.jsonl"));
  const std::string first = good.substr(0, good.find('\n') + 1);
  try {
    load_corpus(temp_file("bad.jsonl", first + "\n{not json\n"));
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_corpus(temp_file("dup.jsonl", first + first)), DuplicateId);
  EXPECT_EQ(load_corpus(temp_file("blank.jsonl", "\n" + first + "  \n")).problems.size(), 1u);
}

TEST(Corpus, AdversarialInstanceResolvesAgainstTheKb) {
  const auto& adv = fixtures::adversarial_corpus().problems;
  ASSERT_EQ(adv.size(), 1u);
  EXPECT_EQ(adv[0].id, 101);
  EXPECT_EQ(fixtures::recorded_answer(adv[0]), "70");
  EXPECT_EQ(adv[0].annotated_sequences.front().size(), 2u);
}
