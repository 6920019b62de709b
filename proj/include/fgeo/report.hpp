#pragma once

// Report tables computed from evaluation records. All figures are exact
// rationals rendered with two decimals, round half to even.

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fgeo/experiment.hpp"

namespace fgeo {

struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  std::vector<Table> tables;
  std::string text;  // aligned grids
  std::string csv;   // one delimited block per table
};

struct ReportOptions {
  bool solved_only_means = false;  // average time/steps over solved runs only
};

namespace detail {

struct Tally {
  std::int64_t n = 0, solved = 0, unsolved = 0, timeout = 0;
  std::int64_t mean_n = 0;
  Rational steps, us;
  std::int64_t degree_n = 0, complete = 0;
  Rational degree_sum;

  void add(const EvalRecord& r, const ReportOptions& opt) {
    ++n;
    solved += r.status == Status::Solved;
    unsolved += r.status == Status::Unsolved;
    timeout += r.status == Status::Timeout;
    if (!opt.solved_only_means || r.status == Status::Solved) {
      ++mean_n;
      steps += Rational(static_cast<std::int64_t>(r.steps));
      us += Rational(r.elapsed_us);
    }
    if (r.match_degree) {
      ++degree_n;
      degree_sum += *r.match_degree;
      complete += *r.match_degree == Rational(1);
    }
  }
};

inline std::string pct(std::int64_t part, std::int64_t whole) {
  return whole == 0 ? "-" : (Rational(part) * Rational(100) / Rational(whole)).fixed(2);
}
inline std::string mean_secs(const Tally& t) {
  return t.mean_n == 0 ? "-" : (t.us / Rational(1000000) / Rational(t.mean_n)).fixed(2);
}
inline std::string mean_steps(const Tally& t) {
  return t.mean_n == 0 ? "-" : (t.steps / Rational(t.mean_n)).fixed(2);
}

inline std::string grid(const Table& t) {
  std::vector<std::size_t> w(t.header.size(), 0);
  auto widen = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size() && i < w.size(); ++i) w[i] = std::max(w[i], row[i].size());
  };
  widen(t.header);
  for (const auto& r : t.rows) widen(r);
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& row) {
    std::string s;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::string& cell = row[i];
      if (i == 0) {
        s += cell + std::string(w[i] - cell.size(), ' ');
      } else {
        s += "  " + std::string(w[i] - cell.size(), ' ') + cell;
      }
    }
    os << s << '\n';
  };
  os << t.title << '\n';
  line(t.header);
  std::size_t total = 0;
  for (auto x : w) total += x;
  os << std::string(total + 2 * (w.empty() ? 0 : w.size() - 1), '-') << '\n';
  for (const auto& r : t.rows) line(r);
  return os.str();
}

inline std::string delimited(const Table& t) {
  std::ostringstream os;
  os << "# " << t.title << '\n';
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return os.str();
}

}  // namespace detail

inline Report emit_report(std::vector<EvalRecord> records, const ReportOptions& opt = {}) {
  if (records.empty()) throw EmptyRecords("no records to report");
  sort_records(records);

  std::map<Cell, detail::Tally> by_cell;
  std::map<Cell, std::map<int, detail::Tally>> by_level;
  for (const auto& r : records) {
    by_cell[r.cell].add(r, opt);
    by_level[r.cell][r.level].add(r, opt);
  }
  const std::vector<int> levels{1, 2, 3, 4, 5, 6};

  Report rep;
  Table outcomes{"Search results (%)", {"cell", "n", "solved", "unsolved", "timeout"}, {}};
  Table times{"Average solving time (s)", {"cell", "l1", "l2", "l3", "l4", "l5", "l6", "all"}, {}};
  Table steps{"Average solving steps", {"cell", "l1", "l2", "l3", "l4", "l5", "l6", "all"}, {}};
  for (const auto& [cell, t] : by_cell) {
    outcomes.rows.push_back({cell.key(), std::to_string(t.n), detail::pct(t.solved, t.n),
                             detail::pct(t.unsolved, t.n), detail::pct(t.timeout, t.n)});
    std::vector<std::string> trow{cell.key()}, srow{cell.key()};
    for (int l : levels) {
      auto it = by_level[cell].find(l);
      trow.push_back(it == by_level[cell].end() ? "-" : detail::mean_secs(it->second));
      srow.push_back(it == by_level[cell].end() ? "-" : detail::mean_steps(it->second));
    }
    trow.push_back(detail::mean_secs(t));
    srow.push_back(detail::mean_steps(t));
    times.rows.push_back(std::move(trow));
    steps.rows.push_back(std::move(srow));
  }

  // Solved share of plain, guided and hybrid runs side by side.
  Table combined{"Combined results: solved (%)", {"method-strategy", "plain", "tp", "hybrid"}, {}};
  std::map<std::pair<int, int>, std::map<Mode, const detail::Tally*>> pairs;
  for (const auto& [cell, t] : by_cell) {
    pairs[{static_cast<int>(cell.method), static_cast<int>(cell.strategy)}][cell.mode] = &t;
  }
  for (const auto& [ms, modes] : pairs) {
    std::vector<std::string> row{to_string(static_cast<Method>(ms.first)) + "-" +
                                 to_string(static_cast<Strategy>(ms.second))};
    for (Mode m : {Mode::Plain, Mode::TP, Mode::Hybrid}) {
      auto it = modes.find(m);
      row.push_back(it == modes.end() ? "-" : detail::pct(it->second->solved, it->second->n));
    }
    combined.rows.push_back(std::move(row));
  }

  Table appendix{"Results by difficulty",
                 {"cell", "level", "n", "solved", "unsolved", "timeout", "time_s", "steps"},
                 {}};
  for (const auto& [cell, per] : by_level) {
    for (const auto& [l, t] : per) {
      appendix.rows.push_back({cell.key(), l ? level_name(l) : "-", std::to_string(t.n), detail::pct(t.solved, t.n),
                               detail::pct(t.unsolved, t.n), detail::pct(t.timeout, t.n), detail::mean_secs(t),
                               detail::mean_steps(t)});
    }
  }

  Table predictor{"Prediction matching degree (%)", {"cell", "n", "average", "complete"}, {}};
  for (const auto& [cell, t] : by_cell) {
    if (t.degree_n == 0) continue;
    predictor.rows.push_back({cell.key(), std::to_string(t.degree_n),
                              (t.degree_sum * Rational(100) / Rational(t.degree_n)).fixed(2),
                              detail::pct(t.complete, t.degree_n)});
  }

  rep.tables = {outcomes, times, steps, combined, appendix, predictor};
  for (std::size_t i = 0; i < rep.tables.size(); ++i) {
    if (i) {
      rep.text += '\n';
      rep.csv += '\n';
    }
    rep.text += detail::grid(rep.tables[i]);
    rep.csv += detail::delimited(rep.tables[i]);
  }
  return rep;
}

}  // namespace fgeo
