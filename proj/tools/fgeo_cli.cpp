// fgeo: solve, predict, train, evaluate and report from the command line.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fgeo/fgeo.hpp"

#ifndef FGEO_DEFAULT_DATA_DIR
#define FGEO_DEFAULT_DATA_DIR "data"
#endif

namespace {

using namespace fgeo;

// A component failure tagged with the stage that raised it.
struct StageFailure {
  std::string stage;
  std::string message;
};

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure{name, e.what()};
  }
}

struct Common {
  std::string kb = std::string(FGEO_DEFAULT_DATA_DIR) + "/mini_gdl.json";
  std::string corpus = std::string(FGEO_DEFAULT_DATA_DIR) + "/mini_corpus.jsonl";
  std::uint64_t seed = 0;
  std::size_t max_depth = 15;
  std::size_t beam_size = 20;
  double timeout_secs = 600;
  std::string clock;
  std::string hybrid_budget = "split";
};

void add_common(CLI::App* sub, Common& c, bool search_flags) {
  sub->add_option("--kb", c.kb, "GDL knowledge base (JSON)")->capture_default_str();
  sub->add_option("--corpus", c.corpus, "problem corpus (JSON lines)")->capture_default_str();
  sub->add_option("--seed", c.seed, "master seed for splits and randomized strategies")->capture_default_str();
  if (search_flags) {
    sub->add_option("--max-depth", c.max_depth, "search depth limit")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--beam-size", c.beam_size, "nodes kept per level by bs")->capture_default_str()->check(
        CLI::PositiveNumber);
    sub->add_option("--timeout-secs", c.timeout_secs, "per-problem time budget")->capture_default_str()->check(
        CLI::PositiveNumber);
    sub->add_option("--clock", c.clock, "wall or logical (work-unit) clock")->check(CLI::IsMember({"wall", "logical"}));
    sub->add_option("--hybrid-budget", c.hybrid_budget, "split one timeout between phases, or rerun with a full one")
        ->capture_default_str()
        ->check(CLI::IsMember({"split", "rerun"}));
  }
}

SearchLimits limits_of(const Common& c, ClockKind default_clock) {
  SearchLimits l;
  l.max_depth = c.max_depth;
  l.beam_size = c.beam_size;
  l.timeout_secs = c.timeout_secs;
  l.rng_seed = c.seed;
  l.clock = c.clock.empty() ? default_clock : parse_clock_kind(c.clock);
  return l;
}

int parse_problem_id(const std::string& s) {
  std::string digits = s;
  if (!digits.empty() && (digits[0] == 'p' || digits[0] == 'P')) digits = digits.substr(1);
  try {
    std::size_t used = 0;
    const int id = std::stoi(digits, &used);
    if (used == digits.size()) return id;
  } catch (const std::logic_error&) {
  }
  throw SchemaError("'" + s + "' is not a problem id");
}

std::vector<int> parse_sequence(const std::string& list, const KnowledgeBase& kb) {
  std::vector<int> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item.find_first_not_of("0123456789") == std::string::npos) {
      out.push_back(std::stoi(item));
    } else {
      out.push_back(kb.code_of(theorem_name_of(item)));
    }
  }
  return out;
}

// oracle | freq | empty | model:<path> | seq:<codes or names>
std::shared_ptr<const Predictor> make_predictor(const std::string& spec, const KnowledgeBase& kb, const Corpus& corpus,
                                                std::uint64_t seed) {
  if (spec == "oracle") return std::make_shared<OraclePredictor>();
  if (spec == "empty") return std::make_shared<EmptyPredictor>();
  if (spec == "freq") {
    return std::make_shared<FrequencyPredictor>(split_corpus(corpus.problems, {0.7, 0.15, 0.15}, seed).train);
  }
  if (spec.rfind("model:", 0) == 0) {
    const std::string path = spec.substr(6);
    try {
      auto model = std::make_shared<const SeqModel>(SeqModel::from_json(read_json_file(path)));
      return std::make_shared<ModelPredictor>(model, kb);
    } catch (const Error& e) {
      std::cerr << "warning: model unavailable, continuing without prediction: " << e.what() << "\n";
      return std::make_shared<EmptyPredictor>();
    }
  }
  if (spec.rfind("seq:", 0) == 0) return std::make_shared<FixedPredictor>(parse_sequence(spec.substr(4), kb), "seq");
  throw SchemaError("unknown predictor '" + spec + "'");
}

std::string names_of(const std::vector<int>& seq, const KnowledgeBase& kb) {
  std::string out;
  for (int c : seq) {
    if (!out.empty()) out += ", ";
    out += kb.has_code(c) ? kb.name_of(c) : std::to_string(c);
  }
  return out;
}

std::string codes_of(const std::vector<int>& seq) {
  std::string out;
  for (int c : seq) {
    if (!out.empty()) out += ",";
    out += std::to_string(c);
  }
  return out;
}

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

void print_config(const CLI::App* sub) {
  std::cout << "[config " << sub->get_name() << "]\n" << sub->config_to_str(true, false) << "\n";
}

int cmd_solve(const Common& c, const std::string& problem_arg, const std::string& method, const std::string& strategy,
              const std::string& mode, const std::string& predictor_spec, std::size_t passes, double split,
              const std::string& out) {
  const auto kb = stage("load-kb", [&] { return load_knowledge_base_file(c.kb); });
  const auto corpus = stage("load-corpus", [&] { return load_corpus(c.corpus, &kb); });
  const int id = stage("select-problem", [&] { return parse_problem_id(problem_arg); });
  const ProblemInstance* p = corpus.find(id);
  if (!p) throw StageFailure{"select-problem", "problem " + std::to_string(id) + " is not in " + c.corpus};

  PipelineConfig cfg;
  cfg.method = parse_method(method);
  cfg.strategy = parse_strategy(strategy);
  cfg.limits = limits_of(c, ClockKind::Wall);
  cfg.passes = passes;
  cfg.budget_split = split;
  cfg.hybrid_budget = parse_hybrid_budget(c.hybrid_budget);
  const Mode m = parse_mode(mode);
  if (m != Mode::Plain) cfg.predictor = stage("predict", [&] { return make_predictor(predictor_spec, kb, corpus, c.seed); });
  const PipelineResult r = stage("solve", [&] { return solve(*p, kb, m, cfg); });

  std::cout << "problem " << p->id << ": " << p->description << "\n";
  if (!r.warning.empty()) std::cerr << "warning: " << r.warning << "\n";
  if (m != Mode::Plain) {
    std::cout << "S_tp: [" << codes_of(r.prediction.union_seq) << "] " << names_of(r.prediction.union_seq, kb) << "\n";
  }
  std::cout << capitalized(to_string(r.outcome.status));
  if (r.outcome.answer) std::cout << ": " << r.outcome.answer->str();
  std::cout << "\nphase: " << r.phase << "\nsteps: " << r.outcome.steps
            << "\nelapsed_ms: " << format_elapsed_ms(r.outcome.elapsed_us) << "\ntrace:\n";
  for (std::size_t i = 0; i < r.outcome.applied.size(); ++i) {
    const auto& s = r.outcome.applied[i];
    std::cout << "  " << i + 1 << ". " << s.theorem << " {" << binding_str(s.binding) << "}";
    for (const auto& a : s.added) std::cout << "\n       + " << a;
    std::cout << "\n";
  }
  if (r.outcome.answer && !r.outcome.answer->chain.empty()) {
    std::cout << "derivation:\n";
    for (const auto& line : r.outcome.answer->chain) std::cout << "  " << line << "\n";
  }
  std::cout << "sequence: " << codes_of(r.outcome.applied_sequence()) << "\n";
  if (!out.empty()) stage("write", [&] { write_text_file(out, run_record_json(*p, kb, r).dump(2) + "\n"); });
  return 0;
}

int cmd_predict(const Common& c, const std::string& problem_arg, const std::string& predictor_spec, std::size_t k,
                std::size_t max_len, const std::string& out) {
  const auto kb = stage("load-kb", [&] { return load_knowledge_base_file(c.kb); });
  const auto corpus = stage("load-corpus", [&] { return load_corpus(c.corpus, &kb); });
  std::shared_ptr<const Predictor> predictor;
  if (predictor_spec.rfind("model:", 0) == 0) {
    auto model = stage("load-model", [&] {
      return std::make_shared<const SeqModel>(SeqModel::from_json(read_json_file(predictor_spec.substr(6))));
    });
    predictor = std::make_shared<ModelPredictor>(model, kb, k, max_len);
  } else {
    predictor = stage("predict", [&] { return make_predictor(predictor_spec, kb, corpus, c.seed); });
  }
  std::vector<const ProblemInstance*> targets;
  if (problem_arg.empty()) {
    for (const auto& p : corpus.problems) targets.push_back(&p);
  } else {
    const int id = stage("select-problem", [&] { return parse_problem_id(problem_arg); });
    const auto* p = corpus.find(id);
    if (!p) throw StageFailure{"select-problem", "problem " + std::to_string(id) + " is not in " + c.corpus};
    targets.push_back(p);
  }
  nlohmann::json exported = nlohmann::json::array();
  for (const auto* p : targets) {
    const Prediction pr = stage("predict", [&] { return predictor->predict(*p); });
    std::cout << "problem " << p->id << "\n";
    nlohmann::json beams = nlohmann::json::array();
    for (std::size_t i = 0; i < pr.beams.size(); ++i) {
      std::ostringstream score;
      score.setf(std::ios::fixed);
      score.precision(6);
      score << pr.beams[i].score;
      std::cout << "  beam " << i + 1 << " (" << score.str() << "): [" << codes_of(pr.beams[i].seq) << "] "
                << names_of(pr.beams[i].seq, kb) << "\n";
      beams.push_back({{"seq", pr.beams[i].seq}, {"score", pr.beams[i].score}});
    }
    std::cout << "  S_tp: [" << codes_of(pr.union_seq) << "] " << names_of(pr.union_seq, kb) << "\n";
    if (!p->annotated_sequences.empty()) {
      std::cout << "  matching degree: " << matching_degree(pr.union_seq, p->annotated_sequences.front()).fixed(2)
                << "\n";
    }
    nlohmann::json names = nlohmann::json::array();
    for (int code : pr.union_seq) names.push_back(kb.has_code(code) ? kb.name_of(code) : std::to_string(code));
    exported.push_back({{"problem_id", p->id}, {"beams", beams}, {"S_tp", pr.union_seq}, {"S_tp_names", names}});
  }
  if (!out.empty()) stage("write", [&] { write_text_file(out, exported.dump(2) + "\n"); });
  return 0;
}

int cmd_train(const Common& c, double alpha, double lambda, const std::string& out) {
  const auto kb = stage("load-kb", [&] { return load_knowledge_base_file(c.kb); });
  const auto corpus = stage("load-corpus", [&] { return load_corpus(c.corpus, &kb); });
  const Split split = stage("split", [&] { return split_corpus(corpus.problems, {0.7, 0.15, 0.15}, c.seed); });
  TrainOptions opt;
  opt.alpha = alpha;
  if (lambda >= 0) opt.lambda = lambda;
  const SeqModel model = stage("train", [&] { return train_predictor(split.train, split.valid, kb, opt); });
  std::cout << "train/valid/test: " << split.train.size() << "/" << split.valid.size() << "/" << split.test.size()
            << "\nalpha: " << model.alpha << "\nlambda: " << model.lambda << "\ntrain_nll: " << model.train_nll
            << "\nvalid_nll: " << model.valid_nll << "\nuniform_nll: " << uniform_nll(model.vocab_size()) << "\n";
  stage("write", [&] { write_text_file(out, model.to_json().dump(2) + "\n"); });
  std::cout << "model written to " << out << "\n";
  return 0;
}

std::vector<Cell> matrix(const std::vector<std::string>& methods, const std::vector<std::string>& strategies,
                         const std::vector<std::string>& modes) {
  std::vector<Cell> cells;
  for (const auto& m : methods) {
    for (const auto& s : strategies) {
      for (const auto& d : modes) cells.push_back(Cell{parse_method(m), parse_strategy(s), parse_mode(d)});
    }
  }
  return cells;
}

int cmd_evaluate(const Common& c, const std::vector<std::string>& methods, const std::vector<std::string>& strategies,
                 const std::vector<std::string>& modes, const std::string& predictor_spec, const std::string& subset,
                 std::size_t passes, double split_frac, std::size_t jobs, const std::string& out,
                 const std::string& report_out, const std::string& report_csv) {
  const auto kb = stage("load-kb", [&] { return load_knowledge_base_file(c.kb); });
  const auto corpus = stage("load-corpus", [&] { return load_corpus(c.corpus, &kb); });
  std::vector<ProblemInstance> problems = corpus.problems;
  if (subset != "all") {
    const Split s = stage("split", [&] { return split_corpus(corpus.problems, {0.7, 0.15, 0.15}, c.seed); });
    problems = subset == "train" ? s.train : subset == "valid" ? s.valid : s.test;
  }
  ExperimentConfig cfg;
  cfg.cells = stage("configure", [&] { return matrix(methods, strategies, modes); });
  cfg.limits = limits_of(c, ClockKind::Logical);
  cfg.passes = passes;
  cfg.budget_split = split_frac;
  cfg.hybrid_budget = parse_hybrid_budget(c.hybrid_budget);
  cfg.jobs = jobs;
  cfg.predictor = stage("predict", [&] { return make_predictor(predictor_spec, kb, corpus, c.seed); });
  const auto records = stage("evaluate", [&] { return run_experiment(problems, kb, cfg); });
  stage("write", [&] { write_text_file(out, records_csv(records)); });
  std::cout << records.size() << " records written to " << out << "\n";
  const Report rep = stage("report", [&] { return emit_report(records); });
  std::cout << "\n" << rep.tables.front().title << "\n";
  std::cout << detail::grid(rep.tables.front()).substr(rep.tables.front().title.size() + 1);
  if (!report_out.empty()) stage("write", [&] { write_text_file(report_out, rep.text); });
  if (!report_csv.empty()) stage("write", [&] { write_text_file(report_csv, rep.csv); });
  return 0;
}

int cmd_report(const std::string& records_path, const std::string& out, const std::string& csv, bool solved_only) {
  const auto records = stage("load-records", [&] { return parse_records_csv(read_text_file(records_path)); });
  ReportOptions opt;
  opt.solved_only_means = solved_only;
  const Report rep = stage("report", [&] { return emit_report(records, opt); });
  std::cout << rep.text;
  if (!out.empty()) stage("write", [&] { write_text_file(out, rep.text); });
  if (!csv.empty()) stage("write", [&] { write_text_file(csv, rep.csv); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometry theorem search guided by theorem-sequence prediction"};
  app.set_config("--config", "", "file supplying any flag (command line takes precedence)");
  app.require_subcommand(0, 1);

  Common common;
  std::string problem, method = "fw", strategy = "bfs", mode = "plain", predictor = "oracle", out;
  std::size_t passes = 3, jobs = 1, k = 5, max_len = 20;
  double split = 0.5, alpha = 0.1, lambda = -1;

  auto* solve_cmd = app.add_subcommand("solve", "solve one problem and print its derivation");
  add_common(solve_cmd, common, true);
  solve_cmd->add_option("--problem", problem, "problem id (e.g. 7 or p7)")->required();
  solve_cmd->add_option("--method", method)->capture_default_str()->check(CLI::IsMember({"fw", "bw"}));
  solve_cmd->add_option("--strategy", strategy)->capture_default_str()->check(CLI::IsMember({"bfs", "dfs", "rs", "bs"}));
  solve_cmd->add_option("--mode", mode)->capture_default_str()->check(CLI::IsMember({"plain", "tp", "hybrid"}));
  solve_cmd->add_option("--predictor", predictor, "oracle | freq | empty | model:<path> | seq:<list>")
      ->capture_default_str();
  solve_cmd->add_option("--passes", passes, "execution passes over the prediction")->capture_default_str()->check(
      CLI::PositiveNumber);
  solve_cmd->add_option("--budget-split", split, "share of the budget for the guided phase of hybrid")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  solve_cmd->add_option("--out", out, "write the run record (JSON)");

  auto* predict_cmd = app.add_subcommand("predict", "print beams and S_tp");
  add_common(predict_cmd, common, false);
  predict_cmd->add_option("--problem", problem, "problem id; all problems when omitted");
  predict_cmd->add_option("--predictor", predictor, "oracle | freq | empty | model:<path> | seq:<list>")
      ->capture_default_str();
  predict_cmd->add_option("--k", k, "beams kept")->capture_default_str()->check(CLI::PositiveNumber);
  predict_cmd->add_option("--max-len", max_len, "longest decoded sequence")->capture_default_str()->check(
      CLI::PositiveNumber);
  predict_cmd->add_option("--out", out, "write predictions (JSON)");

  auto* train_cmd = app.add_subcommand("train", "fit the sequence model on the training split");
  add_common(train_cmd, common, false);
  train_cmd->add_option("--alpha", alpha, "add-alpha smoothing")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--lambda", lambda, "fixed interpolation weight; chosen on validation when negative")
      ->capture_default_str();
  train_cmd->add_option("--out", out, "model file")->required();

  std::vector<std::string> methods{"fw"}, strategies{"bfs"}, modes{"plain"};
  std::string subset = "all", report_out, report_csv;
  auto* eval_cmd = app.add_subcommand("evaluate", "run an experiment matrix to a records file");
  add_common(eval_cmd, common, true);
  eval_cmd->add_option("--method", methods, "comma-separated methods")->delimiter(',')->capture_default_str()->check(
      CLI::IsMember({"fw", "bw"}));
  eval_cmd->add_option("--strategy", strategies, "comma-separated strategies")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::IsMember({"bfs", "dfs", "rs", "bs"}));
  eval_cmd->add_option("--mode", modes, "comma-separated modes")->delimiter(',')->capture_default_str()->check(
      CLI::IsMember({"plain", "tp", "hybrid"}));
  eval_cmd->add_option("--predictor", predictor, "oracle | freq | empty | model:<path> | seq:<list>")
      ->capture_default_str();
  eval_cmd->add_option("--split", subset, "problems to run")->capture_default_str()->check(
      CLI::IsMember({"all", "train", "valid", "test"}));
  eval_cmd->add_option("--passes", passes)->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--budget-split", split)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--jobs", jobs, "problem-level worker threads")->capture_default_str()->check(
      CLI::PositiveNumber);
  eval_cmd->add_option("--out", out, "records file (CSV)")->required();
  eval_cmd->add_option("--report-out", report_out, "also write the report grids");
  eval_cmd->add_option("--report-csv", report_csv, "also write the report tables as CSV");

  std::string records;
  bool solved_only = false;
  auto* report_cmd = app.add_subcommand("report", "render the report tables from a records file");
  report_cmd->add_option("--records", records, "records file (CSV)")->required();
  report_cmd->add_option("--out", out, "write the grids");
  report_cmd->add_option("--csv", report_csv, "write the tables as CSV");
  report_cmd->add_flag("--solved-only-means", solved_only, "average time and steps over solved runs only");

  if (argc <= 1) {
    std::cout << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  print_config(sub);
  try {
    if (sub == solve_cmd) return cmd_solve(common, problem, method, strategy, mode, predictor, passes, split, out);
    if (sub == predict_cmd) return cmd_predict(common, problem, predictor, k, max_len, out);
    if (sub == train_cmd) return cmd_train(common, alpha, lambda, out);
    if (sub == eval_cmd) {
      return cmd_evaluate(common, methods, strategies, modes, predictor, subset, passes, split, jobs, out, report_out,
                          report_csv);
    }
    if (sub == report_cmd) return cmd_report(records, out, report_csv, solved_only);
  } catch (const StageFailure& f) {
    std::cerr << "error in stage '" << f.stage << "': " << f.message << "\n";
    return 1;
  }
  return 2;
}
