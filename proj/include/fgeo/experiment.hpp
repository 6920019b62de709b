#pragma once

// Batch runs over a problem set and the records file they produce.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "fgeo/cdl_parser.hpp"
#include "fgeo/corpus.hpp"
#include "fgeo/pipeline.hpp"

namespace fgeo {

struct Cell {
  Method method = Method::Forward;
  Strategy strategy = Strategy::BFS;
  Mode mode = Mode::Plain;

  std::string key() const { return to_string(method) + "-" + to_string(strategy) + "-" + to_string(mode); }
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell& a, const Cell& b) {
    return std::tuple(static_cast<int>(a.method), static_cast<int>(a.strategy), static_cast<int>(a.mode)) <=>
           std::tuple(static_cast<int>(b.method), static_cast<int>(b.strategy), static_cast<int>(b.mode));
  }
};

// Every method x strategy x mode combination, in cell order.
inline std::vector<Cell> all_cells() {
  std::vector<Cell> out;
  for (Method m : {Method::Forward, Method::Backward}) {
    for (Strategy s : {Strategy::BFS, Strategy::DFS, Strategy::RS, Strategy::BS}) {
      for (Mode mode : {Mode::Plain, Mode::TP, Mode::Hybrid}) out.push_back(Cell{m, s, mode});
    }
  }
  return out;
}

struct EvalRecord {
  int problem_id = 0;
  Cell cell;
  Status status = Status::Unsolved;
  std::size_t steps = 0;
  std::int64_t elapsed_us = 0;
  int level = 0;                        // 0 when the problem is not annotated
  std::optional<Rational> match_degree;  // rounded to 6 decimals

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

struct ExperimentConfig {
  std::vector<Cell> cells;
  SearchLimits limits;  // rng_seed is the master seed
  std::size_t passes = 3;
  double budget_split = 0.5;
  HybridBudget hybrid_budget = HybridBudget::Split;
  std::shared_ptr<const Predictor> predictor;
  std::size_t jobs = 1;
};

// Seed of one run, a pure function of (master seed, problem, cell).
inline std::uint64_t run_seed(std::uint64_t master, int problem_id, const Cell& cell) {
  std::uint64_t h = detail::splitmix64(master);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(problem_id)));
  for (char c : cell.key()) h = detail::splitmix64(h ^ static_cast<unsigned char>(c));
  return h;
}

inline Rational round_to(const Rational& r, int digits) { return parse_term(r.fixed(digits)).value; }

inline EvalRecord run_cell(const ProblemInstance& p, const KnowledgeBase& kb, const Cell& cell,
                           const ExperimentConfig& cfg) {
  EvalRecord rec;
  rec.problem_id = p.id;
  rec.cell = cell;
  rec.level = p.annotated() ? difficulty_level(p) : 0;
  PipelineConfig pc;
  pc.predictor = cfg.predictor;
  pc.passes = cfg.passes;
  pc.method = cell.method;
  pc.strategy = cell.strategy;
  pc.limits = cfg.limits;
  pc.limits.rng_seed = run_seed(cfg.limits.rng_seed, p.id, cell);
  pc.budget_split = cfg.budget_split;
  pc.hybrid_budget = cfg.hybrid_budget;
  const PipelineResult r = solve(p, kb, cell.mode, pc);
  rec.status = r.outcome.status;
  rec.steps = r.outcome.steps;
  rec.elapsed_us = r.outcome.elapsed_us;
  if (cell.mode != Mode::Plain && !p.annotated_sequences.empty() && !p.annotated_sequences.front().empty()) {
    rec.match_degree = round_to(matching_degree(r.prediction.union_seq, p.annotated_sequences.front()), 6);
  }
  return rec;
}

inline void sort_records(std::vector<EvalRecord>& records) {
  std::sort(records.begin(), records.end(), [](const EvalRecord& a, const EvalRecord& b) {
    if (a.problem_id != b.problem_id) return a.problem_id < b.problem_id;
    return a.cell < b.cell;
  });
}

// One record per (problem, cell), sorted by (problem_id, cell). A failing run
// is recorded as unsolved and reported on stderr; the batch continues.
inline std::vector<EvalRecord> run_experiment(const std::vector<ProblemInstance>& problems, const KnowledgeBase& kb,
                                              const ExperimentConfig& cfg) {
  cfg.limits.validate();
  const std::size_t total = problems.size() * cfg.cells.size();
  std::vector<EvalRecord> out(total);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const auto& p = problems[i / cfg.cells.size()];
      const auto& cell = cfg.cells[i % cfg.cells.size()];
      try {
        out[i] = run_cell(p, kb, cell, cfg);
      } catch (const std::exception& e) {
        out[i] = EvalRecord{};
        out[i].problem_id = p.id;
        out[i].cell = cell;
        out[i].level = p.annotated() ? difficulty_level(p) : 0;
        std::lock_guard<std::mutex> lock(err_mu);
        std::cerr << "warning: problem " << p.id << " cell " << cell.key() << ": " << e.what() << "\n";
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, std::max<std::size_t>(total, 1)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  sort_records(out);
  return out;
}

inline const char* kRecordsHeader = "problem_id,method,strategy,mode,status,steps,elapsed_ms,level,match_degree";

inline std::string format_elapsed_ms(std::int64_t us) {
  std::ostringstream os;
  os << us / 1000 << '.';
  const auto frac = us % 1000;
  os << static_cast<char>('0' + frac / 100) << static_cast<char>('0' + frac / 10 % 10) << static_cast<char>('0' + frac % 10);
  return os.str();
}

inline std::string records_csv(const std::vector<EvalRecord>& records) {
  std::ostringstream os;
  os << kRecordsHeader << '\n';
  for (const auto& r : records) {
    os << r.problem_id << ',' << to_string(r.cell.method) << ',' << to_string(r.cell.strategy) << ','
       << to_string(r.cell.mode) << ',' << to_string(r.status) << ',' << r.steps << ',' << format_elapsed_ms(r.elapsed_us)
       << ',' << (r.level ? level_name(r.level) : "-") << ',' << (r.match_degree ? r.match_degree->fixed(6) : "")
       << '\n';
  }
  return os.str();
}

inline std::vector<EvalRecord> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kRecordsHeader) throw SchemaError("records file lacks the expected header");
  std::vector<EvalRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    f.push_back(cur);
    if (f.size() != 9) throw SchemaError("records line " + std::to_string(lineno) + " has " + std::to_string(f.size()) + " fields");
    try {
      EvalRecord r;
      r.problem_id = std::stoi(f[0]);
      r.cell = Cell{parse_method(f[1]), parse_strategy(f[2]), parse_mode(f[3])};
      r.status = parse_status(f[4]);
      r.steps = static_cast<std::size_t>(std::stoull(f[5]));
      const auto dot = f[6].find('.');
      if (dot == std::string::npos || f[6].size() - dot != 4) throw SchemaError("elapsed_ms needs 3 decimals");
      r.elapsed_us = std::stoll(f[6].substr(0, dot)) * 1000 + std::stoll(f[6].substr(dot + 1));
      r.level = f[7] == "-" ? 0 : std::stoi(f[7].substr(1));
      if (!f[8].empty()) r.match_degree = parse_term(f[8]).value;
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw SchemaError("records line " + std::to_string(lineno) + " is malformed");
    }
  }
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
}

}  // namespace fgeo
