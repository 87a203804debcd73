// Command-line front end: fits, figure-style sweeps and Monte Carlo validation.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "cgst/bench.hpp"

using namespace cgst;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> repeats;
  std::string variant;
  std::string data;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (overrides the config)");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--repeats", f.repeats, "independent estimates per sweep point");
  cmd->add_option("--variant", f.variant, "fitted model")
      ->check(CLI::IsMember({"markov", "nonmarkov", "markov-amp", "nonmarkov-amp", "general"}));
  cmd->add_option("--data", f.data, "data generator")->check(CLI::IsMember({"analytic", "mc"}));
}

RunConfig load(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : read_run_config(f.config);
  if (!f.out.empty()) c.out_dir = f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.repeats) c.repeats = *f.repeats;
  if (!f.variant.empty()) c.model = model_from_string(f.variant);
  if (!f.data.empty()) c.data = data_from_string(f.data);
  c.validate();
  return c;
}

std::string path_in(const RunConfig& c, const std::string& name) { return c.out_dir + "/" + name; }

void emit_sweep(const RunConfig& c, const std::string& name, const std::string& title, const SweepOutput& s) {
  const std::string csv = write_csv(s.rows);
  write_text_file(path_in(c, name + ".csv"), csv);
  write_text_file(path_in(c, name + ".svg"), render_svg(read_csv(csv), title));
  for (const auto& r : s.rows)
    std::cout << r.series << " " << r.variable << "=" << r.x << " mean=" << r.stats.mean << " band=[" << r.stats.lo
              << ", " << r.stats.hi << "]\n";
  if (!s.note.empty()) std::cout << s.note << "\n";
  std::cout << "wrote " << path_in(c, name + ".csv") << " and " << path_in(c, name + ".svg") << "\n";
}

int cmd_fit(const RunConfig& c) {
  const Experiment ex = make_experiment(c);
  const RepeatOutcome r = run_repeat(ex, ex.design, repeat_seed(c.seed, 0, 0));
  std::vector<std::string> names;
  if (!c.model.general) names = param_names(c.model.variant);
  nlohmann::json doc = {{"config", to_json(c)},
                        {"config_hash", config_hash(c)},
                        {"seed", c.seed},
                        {"result", to_json(r.fit, names)},
                        {"distance_to_truth", r.distance}};
  write_text_file(path_in(c, "fit.json"), doc.dump(2) + "\n");
  std::ostringstream design, data;
  write_design(design, ex.design);
  write_dataset(data, r.data);
  write_text_file(path_in(c, "design.txt"), design.str());
  write_text_file(path_in(c, "dataset.txt"), data.str());
  std::cout << "model " << to_string(c.model) << ", " << r.data.records.size() << " circuits, final "
            << to_string(r.fit.final_kind) << " cost " << r.fit.final_cost << ", " << r.fit.wall_seconds << " s\n";
  std::cout << "avg trace distance to truth " << r.distance << "\n";
  if (!r.fit.converged) std::cout << "note: at least one stage stopped at the iteration limit\n";
  return 0;
}

int cmd_mc_validate(const RunConfig& c) {
  const auto rows = mc_validate(c);
  write_text_file(path_in(c, "mc_validate.csv"), write_mc_csv(rows));
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.z);
  std::cout << "max |MC - closed form| / stderr over " << rows.size() << " entries: " << worst << "\n";
  std::cout << "wrote " << path_in(c, "mc_validate.csv") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametrised gate set tomography under coloured noise"};
  app.require_subcommand(1);
  CommonFlags flags;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {{"fit", "generate a design and data, fit, report distance to truth"},
                      {"sweep-shots", "distance vs shots per circuit"},
                      {"sweep-depth", "distance vs maximum germ power"},
                      {"sweep-tauc", "Markovian vs non-Markovian fits over the correlation time"},
                      {"sweep-circuits", "distance vs number of circuits"},
                      {"compare-general", "parametrised vs general fits at equal shots"},
                      {"mc-validate", "Monte Carlo gate channels vs closed form"}};
  std::map<std::string, CLI::App*> cmds;
  for (const auto& s : subs) {
    cmds[s.name] = app.add_subcommand(s.name, s.help);
    add_common(cmds[s.name], flags);
  }
  std::string plot_csv, plot_svg, plot_title = "sweep";
  CLI::App* plot = app.add_subcommand("plot", "re-render an SVG from a sweep CSV");
  plot->add_option("--csv", plot_csv, "sweep CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--svg", plot_svg, "output SVG")->required();
  plot->add_option("--title", plot_title, "plot title");

  CLI11_PARSE(app, argc, argv);
  try {
    if (plot->parsed()) {
      std::ifstream in(plot_csv);
      std::stringstream ss;
      ss << in.rdbuf();
      write_text_file(plot_svg, render_svg(read_csv(ss.str()), plot_title));
      return 0;
    }
    const RunConfig c = load(flags);
    if (cmds["fit"]->parsed()) return cmd_fit(c);
    if (cmds["mc-validate"]->parsed()) return cmd_mc_validate(c);
    if (cmds["sweep-shots"]->parsed()) emit_sweep(c, "sweep_shots", "distance vs shots", sweep_shots(c));
    if (cmds["sweep-depth"]->parsed()) emit_sweep(c, "sweep_depth", "distance vs depth", sweep_depth(c));
    if (cmds["sweep-tauc"]->parsed()) emit_sweep(c, "sweep_tauc", "distance vs tau_c", sweep_tau_c(c));
    if (cmds["sweep-circuits"]->parsed()) emit_sweep(c, "sweep_circuits", "distance vs circuits", sweep_circuits(c));
    if (cmds["compare-general"]->parsed())
      emit_sweep(c, "compare_general", "parametrised vs general", compare_general(c));
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
