#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fgeo/error.hpp"
#include "fgeo/knowledge_base.hpp"
#include "fgeo/problem.hpp"

namespace fgeo {

struct Corpus {
  std::vector<ProblemInstance> problems;
  std::string source;

  const ProblemInstance* find(int id) const {
    for (const auto& p : problems) {
      if (p.id == id) return &p;
    }
    return nullptr;
  }
};

// One JSON record per line; blank lines are skipped.
inline Corpus load_corpus(const std::string& path, const KnowledgeBase* kb = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus '" + path + "'");
  Corpus c;
  c.source = path;
  std::set<int> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SyntaxError(path + ":" + std::to_string(lineno) + ": " + e.what(), e.byte);
    }
    ProblemInstance p = parse_problem(doc, kb);
    if (!ids.insert(p.id).second) throw DuplicateId("problem id " + std::to_string(p.id) + " appears twice in " + path);
    c.problems.push_back(std::move(p));
  }
  return c;
}

struct Split {
  std::vector<ProblemInstance> train;
  std::vector<ProblemInstance> valid;
  std::vector<ProblemInstance> test;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Seeded Fisher-Yates shuffle, then contiguous train/valid/test slices.
// Valid and test get floor(n * ratio); train takes the remainder.
inline Split split_corpus(const std::vector<ProblemInstance>& problems, std::array<double, 3> ratios,
                          std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r >= 0) || r > 1) throw BadRatios("split ratios must lie in [0,1]");
  }
  if (std::fabs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) throw BadRatios("split ratios must sum to 1");
  std::vector<std::size_t> order(problems.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::uint64_t state = seed;
  for (std::size_t i = order.size(); i > 1; --i) {
    state = detail::splitmix64(state);
    std::swap(order[i - 1], order[state % i]);
  }
  const auto n = static_cast<double>(problems.size());
  const auto n_valid = static_cast<std::size_t>(std::floor(n * ratios[1] + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(n * ratios[2] + 1e-9));
  const std::size_t n_train = problems.size() - n_valid - n_test;
  Split s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& p = problems[order[i]];
    if (i < n_train) {
      s.train.push_back(p);
    } else if (i < n_train + n_valid) {
      s.valid.push_back(p);
    } else {
      s.test.push_back(p);
    }
  }
  return s;
}

// 1..6 from a sequence length: <=2, 3-4, 5-6, 7-8, 9-10, >=11.
inline int level_of_length(std::size_t length) {
  if (length <= 2) return 1;
  if (length >= 11) return 6;
  return static_cast<int>((length + 1) / 2);
}

// Level of the first annotated sequence.
inline int difficulty_level(const ProblemInstance& p) {
  if (!p.annotated()) throw MissingAnnotation("problem " + std::to_string(p.id) + " has no annotated sequence");
  return level_of_length(p.annotated_names.front().size());
}

inline std::string level_name(int level) { return "l" + std::to_string(level); }

}  // namespace fgeo
