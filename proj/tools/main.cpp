// Command-line front end: refinement studies, branch-selection experiments,
// and single solves with optional plot dumps.

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mipdg/study.hpp"

namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::istringstream is(text);
  for (std::string part; std::getline(is, part, sep);) parts.push_back(part);
  return parts;
}

std::vector<int> int_list(const std::string& text) {
  std::vector<int> values;
  for (const std::string& part : split(text, ','))
    values.push_back(std::stoi(part));
  return values;
}

std::vector<double> double_list(const std::string& text) {
  std::vector<double> values;
  for (const std::string& part : split(text, ','))
    values.push_back(std::stod(part));
  return values;
}

std::array<double, 3> gamma_triple(const std::string& text) {
  const std::vector<double> values = double_list(text);
  if (values.size() != 3)
    throw std::invalid_argument("--gamma needs exactly three values");
  return {values[0], values[1], values[2]};
}

// JSON config values become the same comma-list strings the flags carry.
std::string list_string(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_array()) {
    std::string joined;
    for (const json& item : value) {
      if (!joined.empty()) joined += ',';
      joined += item.is_string() ? item.get<std::string>() : item.dump();
    }
    return joined;
  }
  return value.dump();
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot read config file: " + path);
  return json::parse(file);
}

// Flags given on the command line win; otherwise the config file fills in.
struct ConfigFill {
  const CLI::App& cmd;
  const json& cfg;

  void str(const char* flag, const char* key, std::string& var) const {
    if (cmd.count(flag) == 0 && cfg.contains(key))
      var = list_string(cfg.at(key));
  }
  void num(const char* flag, const char* key, double& var) const {
    if (cmd.count(flag) == 0 && cfg.contains(key))
      var = cfg.at(key).get<double>();
  }
  void num(const char* flag, const char* key, int& var) const {
    if (cmd.count(flag) == 0 && cfg.contains(key))
      var = cfg.at(key).get<int>();
  }
};

// Output sink: --out path or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw std::runtime_error("cannot open output file: " + path);
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

constexpr double unset = std::numeric_limits<double>::quiet_NaN();

struct StudyFlags {
  std::string test = "test1";
  std::string mode;  // empty picks elliptic or forward from the test case
  std::string degrees = "1";
  std::string mesh;  // empty picks a mode-appropriate default
  std::string gamma;  // empty picks the test's recommended penalties
  std::string dts;
  std::string format = "csv";
  std::string out;
  std::string plot_dir;
  std::string config_path;
  double alpha = unset;
  double kappa_t = unset;
  double final_time = unset;
  double frozen_time = 0.0;
  double guess_p = 0.0;
  int epsilon = 0;
  int exact_index = 0;
  int guess_branch = -1;
};

void add_study_flags(CLI::App& cmd, StudyFlags& f, bool single_mesh) {
  cmd.add_option("--test", f.test, "Test case id (test1..test6)");
  cmd.add_option("--mode", f.mode,
                 "elliptic | forward | backward | splitting")
      ->check(CLI::IsMember({"elliptic", "forward", "backward", "splitting"}));
  if (single_mesh) {
    cmd.add_option("--degree", f.degrees, "Polynomial degree");
    cmd.add_option("--elements", f.mesh, "Element count J");
  } else {
    cmd.add_option("--degree", f.degrees, "Comma list of polynomial degrees");
    cmd.add_option("--mesh", f.mesh, "Comma list of element counts J");
  }
  cmd.add_option("--alpha", f.alpha,
                 "Moment weight (default: the test's recommendation)");
  cmd.add_option("--gamma", f.gamma,
                 "Penalty triple g1,g2,g3 (default: recommendation)");
  cmd.add_option("--epsilon", f.epsilon, "Symmetrization switch (-1, 0, 1)");
  cmd.add_option("--kappa-t", f.kappa_t,
                 "Explicit step scale: dt = kappa_t h^2");
  cmd.add_option("--dt", f.dts,
                 single_mesh ? "Fixed time step"
                             : "Comma list of steps (2+ entries: time study)");
  cmd.add_option("--final-time", f.final_time, "Override the horizon T");
  cmd.add_option("--frozen-time", f.frozen_time,
                 "Evaluation time of stationary restrictions");
  cmd.add_option("--exact-index", f.exact_index,
                 "Exact branch errors are measured against");
  cmd.add_option("--guess-branch", f.guess_branch,
                 "Splitting u-guess branch (-1: secant line)");
  cmd.add_option("--guess-p", f.guess_p,
                 "Splitting constant derivative guess");
  cmd.add_option("--format", f.format, "csv | markdown")
      ->check(CLI::IsMember({"csv", "markdown"}));
  cmd.add_option("--out", f.out, "Output path (default: stdout)");
  if (single_mesh) {
    cmd.add_option("--plot", f.plot_dir, "Write an x,u_h,exact sample dump");
  } else {
    cmd.add_option("--plot-dir", f.plot_dir,
                   "Directory for per-run x,u_h,exact sample dumps");
  }
  cmd.add_option("--config", f.config_path,
                 "JSON file supplying any of the above keys");
}

void fill_study_flags(const CLI::App& cmd, const json& cfg, StudyFlags& f,
                      bool single_mesh) {
  const ConfigFill fill{cmd, cfg};
  fill.str("--test", "test", f.test);
  fill.str("--mode", "mode", f.mode);
  fill.str("--degree", "degree", f.degrees);
  fill.str(single_mesh ? "--elements" : "--mesh",
           single_mesh ? "elements" : "mesh", f.mesh);
  fill.str("--gamma", "gamma", f.gamma);
  fill.str("--dt", "dt", f.dts);
  fill.str("--format", "format", f.format);
  fill.str("--out", "out", f.out);
  fill.str(single_mesh ? "--plot" : "--plot-dir",
           single_mesh ? "plot" : "plot_dir", f.plot_dir);
  fill.num("--alpha", "alpha", f.alpha);
  fill.num("--kappa-t", "kappa_t", f.kappa_t);
  fill.num("--final-time", "final_time", f.final_time);
  fill.num("--frozen-time", "frozen_time", f.frozen_time);
  fill.num("--guess-p", "guess_p", f.guess_p);
  fill.num("--epsilon", "epsilon", f.epsilon);
  fill.num("--exact-index", "exact_index", f.exact_index);
  fill.num("--guess-branch", "guess_branch", f.guess_branch);
}

mipdg::StudyConfig make_study_config(const StudyFlags& f) {
  using mipdg::StudyMode;
  const mipdg::TestCase& tc = mipdg::get_test_case(f.test);

  mipdg::StudyConfig config;
  config.test = f.test;
  config.mode = f.mode.empty()
                    ? (tc.time_dependent ? StudyMode::forward
                                         : StudyMode::elliptic)
                    : mipdg::study_mode_from_string(f.mode);
  config.degrees = int_list(f.degrees);
  const bool transient = config.mode == StudyMode::forward ||
                         config.mode == StudyMode::backward;
  config.mesh = f.mesh.empty()
                    ? (transient ? std::vector<int>{4, 8, 16, 32}
                                 : std::vector<int>{10, 20, 40, 80})
                    : int_list(f.mesh);
  config.penalty.gamma = f.gamma.empty() ? tc.recommended.penalty.gamma
                                         : gamma_triple(f.gamma);
  config.penalty.epsilon = f.epsilon;
  config.alpha = std::isnan(f.alpha) ? tc.recommended.alpha : f.alpha;
  if (!f.dts.empty()) config.dts = double_list(f.dts);
  config.kappa_t = std::isnan(f.kappa_t)
                       ? (config.dts.empty() ? tc.recommended.kappa_t : 0.0)
                       : f.kappa_t;
  if (!std::isnan(f.final_time)) config.final_time = f.final_time;
  config.frozen_time = f.frozen_time;
  config.exact_index = f.exact_index;
  config.split_guess_branch = f.guess_branch;
  config.split_guess_p = f.guess_p;
  return config;
}

void write_table(const mipdg::ConvergenceTable& table,
                 const std::string& format, const std::string& out) {
  Sink sink(out);
  if (format == "markdown")
    mipdg::write_markdown(table, sink.os());
  else
    mipdg::write_csv(table, sink.os());
}

int run_study_command(const CLI::App& cmd, StudyFlags& f) {
  fill_study_flags(cmd, load_config(f.config_path), f, false);
  mipdg::StudyConfig config = make_study_config(f);

  if (!f.plot_dir.empty()) {
    const std::filesystem::path dir(f.plot_dir);
    std::filesystem::create_directories(dir);
    const std::string label = config.time_study() ? "dt" : "h";
    config.on_state = [&, dir, label](
                          int degree, double step, const mipdg::DGFunction& u,
                          const std::function<double(double)>& exact) {
      std::ostringstream name;
      name << config.test << '_' << to_string(config.mode) << "_r" << degree
           << '_' << label << step << ".csv";
      std::ofstream file(dir / name.str());
      mipdg::write_plot_csv(u, exact, file);
    };
  }

  write_table(mipdg::run_study(config), f.format, f.out);
  return 0;  // failed cells are marked rows, not process failures
}

int run_solve_command(const CLI::App& cmd, StudyFlags& f) {
  fill_study_flags(cmd, load_config(f.config_path), f, true);
  if (f.mesh.empty()) f.mesh = "10";
  mipdg::StudyConfig config = make_study_config(f);
  if (config.mesh.size() != 1 || config.dts.size() > 1)
    throw std::invalid_argument("solve runs a single mesh and a single step");

  if (!f.plot_dir.empty()) {
    config.on_state = [&](int, double, const mipdg::DGFunction& u,
                          const std::function<double(double)>& exact) {
      std::ofstream file(f.plot_dir);
      if (!file)
        throw std::runtime_error("cannot open plot file: " + f.plot_dir);
      mipdg::write_plot_csv(u, exact, file);
    };
  }

  write_table(mipdg::run_study(config), f.format, f.out);
  return 0;
}

struct SelectivityFlags {
  std::string cases = "4:blend_u-,0:secant,-4:blend_u+";
  std::string gamma = "1.1,1.5,1.1";
  std::string out;
  std::string config_path;
  int degree = 2;
  int elements = 10;
  int epsilon = 0;
};

int run_selectivity_command(const CLI::App& cmd, SelectivityFlags& f) {
  const json cfg = load_config(f.config_path);
  const ConfigFill fill{cmd, cfg};
  fill.str("--cases", "cases", f.cases);
  fill.str("--gamma", "gamma", f.gamma);
  fill.str("--out", "out", f.out);
  fill.num("--degree", "degree", f.degree);
  fill.num("--elements", "elements", f.elements);
  fill.num("--epsilon", "epsilon", f.epsilon);

  std::vector<mipdg::SelectivityCase> cases;
  for (const std::string& token : split(f.cases, ',')) {
    const std::vector<std::string> parts = split(token, ':');
    if (parts.size() != 2)
      throw std::invalid_argument("selectivity case must be alpha:guess, got " +
                                  token);
    cases.push_back({std::stod(parts[0]),
                     mipdg::guess_recipe_from_string(parts[1])});
  }

  mipdg::SelectivityOptions options;
  options.degree = f.degree;
  options.elements = f.elements;
  options.penalty.gamma = gamma_triple(f.gamma);
  options.penalty.epsilon = f.epsilon;

  Sink sink(f.out);
  mipdg::write_selectivity_csv(mipdg::run_selectivity(cases, options),
                               sink.os());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Mixed interior-penalty DG solver for fully nonlinear second-order "
      "problems"};
  app.require_subcommand(1);

  StudyFlags study_flags;
  CLI::App* study = app.add_subcommand(
      "study", "Mesh- or step-refinement study with an error/order table");
  add_study_flags(*study, study_flags, false);

  StudyFlags solve_flags;
  solve_flags.degrees = "2";
  CLI::App* solve = app.add_subcommand(
      "solve", "Single run; prints its two-norm table, optionally a plot");
  add_study_flags(*solve, solve_flags, true);

  SelectivityFlags sel_flags;
  CLI::App* selectivity = app.add_subcommand(
      "selectivity",
      "Double-root branch selection over alpha:guess cases (CSV report)");
  selectivity->add_option("--cases", sel_flags.cases,
                          "Comma list of alpha:guess, guess in "
                          "{secant, blend_u+, blend_u-}");
  selectivity->add_option("--degree", sel_flags.degree, "Polynomial degree");
  selectivity->add_option("--elements", sel_flags.elements, "Element count");
  selectivity->add_option("--gamma", sel_flags.gamma, "Penalty triple");
  selectivity->add_option("--epsilon", sel_flags.epsilon,
                          "Symmetrization switch");
  selectivity->add_option("--out", sel_flags.out,
                          "Output path (default: stdout)");
  selectivity->add_option("--config", sel_flags.config_path,
                          "JSON file supplying any of the above keys");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*study) return run_study_command(*study, study_flags);
    if (*solve) return run_solve_command(*solve, solve_flags);
    return run_selectivity_command(*selectivity, sel_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
