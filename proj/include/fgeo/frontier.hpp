#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgeo/error.hpp"

namespace fgeo {

enum class Strategy { BFS, DFS, RS, BS };

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::BFS: return "bfs";
    case Strategy::DFS: return "dfs";
    case Strategy::RS: return "rs";
    case Strategy::BS: return "bs";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "bfs") return Strategy::BFS;
  if (s == "dfs") return Strategy::DFS;
  if (s == "rs") return Strategy::RS;
  if (s == "bs") return Strategy::BS;
  throw SchemaError("unknown strategy '" + s + "'");
}

// Open nodes of a search, handed out in strategy order:
//   BFS  first in, first out
//   DFS  last in, first out
//   RS   uniformly random among everything open
//   BS   level by level; when a level is entered, a uniformly random subset
//        of `beam_size` of its nodes is kept (the rest are dropped) and the
//        kept nodes are served first in, first out
template <typename T>
class Frontier {
 public:
  Frontier(Strategy strategy, std::size_t beam_size, std::uint64_t seed)
      : strategy_(strategy), beam_size_(std::max<std::size_t>(beam_size, 1)), rng_(seed) {}

  void push(T item, std::size_t level) {
    switch (strategy_) {
      case Strategy::BFS:
      case Strategy::DFS:
      case Strategy::RS:
        items_.push_back(std::move(item));
        break;
      case Strategy::BS:
        levels_[level].push_back(std::move(item));
        break;
    }
  }

  bool empty() const {
    if (strategy_ == Strategy::BS) return current_.empty() && levels_.empty();
    return items_.empty();
  }

  std::size_t size() const {
    if (strategy_ != Strategy::BS) return items_.size();
    std::size_t n = current_.size();
    for (const auto& [l, v] : levels_) n += v.size();
    return n;
  }

  // Number of nodes BS discarded when entering levels.
  std::size_t dropped() const { return dropped_; }

  T pop() {
    if (empty()) throw std::logic_error("pop from an empty frontier");
    switch (strategy_) {
      case Strategy::BFS: {
        T t = std::move(items_.front());
        items_.pop_front();
        return t;
      }
      case Strategy::DFS: {
        T t = std::move(items_.back());
        items_.pop_back();
        return t;
      }
      case Strategy::RS: {
        std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
        const auto i = static_cast<std::ptrdiff_t>(pick(rng_));
        T t = std::move(items_[static_cast<std::size_t>(i)]);
        items_.erase(items_.begin() + i);
        return t;
      }
      case Strategy::BS:
        break;
    }
    if (current_.empty()) enter_next_level();
    T t = std::move(current_.front());
    current_.pop_front();
    return t;
  }

 private:
  void enter_next_level() {
    auto it = levels_.begin();
    std::vector<T> level = std::move(it->second);
    levels_.erase(it);
    if (level.size() > beam_size_) {
      std::vector<std::size_t> idx(level.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      // partial Fisher-Yates: the first beam_size_ slots are a uniform subset
      for (std::size_t i = 0; i < beam_size_; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng_)]);
      }
      idx.resize(beam_size_);
      std::sort(idx.begin(), idx.end());
      dropped_ += level.size() - beam_size_;
      for (auto i : idx) current_.push_back(std::move(level[i]));
    } else {
      for (auto& t : level) current_.push_back(std::move(t));
    }
  }

  Strategy strategy_;
  std::size_t beam_size_;
  std::mt19937_64 rng_;
  std::deque<T> items_;
  std::map<std::size_t, std::vector<T>> levels_;
  std::deque<T> current_;
  std::size_t dropped_ = 0;
};

}  // namespace fgeo
