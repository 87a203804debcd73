#include "cgst/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace cgst {

using nlohmann::json;

std::string to_string(const ModelChoice& m) { return m.general ? "general" : to_string(m.variant); }

ModelChoice model_from_string(const std::string& s) {
  if (s == "general") return {true, ModelVariant::Markovian};
  return {false, variant_from_string(s)};
}

std::string to_string(DataSource d) { return d == DataSource::Analytic ? "analytic" : "mc"; }

DataSource data_from_string(const std::string& s) {
  if (s == "analytic") return DataSource::Analytic;
  if (s == "mc") return DataSource::MonteCarlo;
  throw Error(ErrorKind::Parse, "unknown data source '" + s + "'");
}

std::string to_string(TruthModel t) { return t == TruthModel::Full ? "full" : "fitted"; }

TruthModel truth_from_string(const std::string& s) {
  if (s == "full") return TruthModel::Full;
  if (s == "fitted") return TruthModel::Fitted;
  throw Error(ErrorKind::Parse, "unknown truth model '" + s + "'");
}

namespace {

std::string to_string(McMode m) { return m == McMode::TwoStage ? "two-stage" : "per-shot"; }

McMode mc_mode_from_string(const std::string& s) {
  if (s == "two-stage") return McMode::TwoStage;
  if (s == "per-shot") return McMode::PerShot;
  throw Error(ErrorKind::Parse, "unknown Monte Carlo mode '" + s + "'");
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key())) throw Error(ErrorKind::Parse, "unknown key '" + item.key() + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("field '") + key + "': " + e.what());
  }
}

OUParams ou_from_json(const json& j, const std::string& where) {
  check_keys(j, where, {"tau_c", "c"});
  OUParams p;
  read(j, "tau_c", p.tau_c);
  read(j, "c", p.c);
  return p;
}

json ou_to_json(const OUParams& p) { return {{"tau_c", p.tau_c}, {"c", p.c}}; }

}  // namespace

void RunConfig::validate() const {
  pulses.validate();
  noise.phase.validate();
  if (noise.amplitude) noise.amplitude->validate();
  noise.validate(pulses.omega_rabi);
  if (p_max < 1 || (p_max & (p_max - 1)) != 0) throw Error(ErrorKind::InvalidConfig, "p_max must be a power of two");
  if (shots < 1) throw Error(ErrorKind::InvalidConfig, "shots must be >= 1");
  if (repeats < 1) throw Error(ErrorKind::InvalidConfig, "repeats must be >= 1");
  if (!(quad.abs_tol >= 0.0) || !(quad.rel_tol >= 0.0) || quad.max_subdivisions < 1 || !(quad.cutoff_factor > 1.0))
    throw Error(ErrorKind::InvalidConfig, "quadrature settings out of range");
  if (fit.cost_switch_depth < 0 || (fit.cost_switch_depth & (fit.cost_switch_depth - 1)) != 0)
    throw Error(ErrorKind::InvalidConfig, "cost_switch_depth must be 0 or a power of two");
  if (truth == TruthModel::Fitted && (model.general || data != DataSource::Analytic))
    throw Error(ErrorKind::InvalidConfig, "truth 'fitted' needs analytic data and a parametrised model");
  fit_config().validate();
  for (long n : sweep.shots)
    if (n < 1) throw Error(ErrorKind::InvalidConfig, "sweep shots must be >= 1");
  for (int p : sweep.p_max)
    if (p < 1 || (p & (p - 1)) != 0) throw Error(ErrorKind::InvalidConfig, "sweep depths must be powers of two");
  for (double t : sweep.tau_c)
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidConfig, "sweep tau_c must be > 0");
  for (int n : sweep.circuits)
    if (n < 1) throw Error(ErrorKind::InvalidConfig, "sweep circuit counts must be >= 1");
}

FitConfig RunConfig::fit_config(int p_max_override) const {
  FitConfig c = fit;
  c.general = model.general;
  c.variant = model.variant;
  c.depth_schedule = depth_schedule(p_max_override > 0 ? p_max_override : p_max);
  if (c.cost_switch_depth != 0 &&
      std::find(c.depth_schedule.begin(), c.depth_schedule.end(), c.cost_switch_depth) == c.depth_schedule.end())
    c.cost_switch_depth = 0;
  return c;
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j, "config", {"noise", "pulses", "quad", "design", "model", "truth", "distance", "data", "fit", "repeats", "seed", "out", "sweep"});
  RunConfig c;
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    check_keys(n, "noise", {"phase", "amplitude", "mc_dt", "n_traj", "mc_mode"});
    if (n.contains("phase")) c.noise.phase = ou_from_json(n.at("phase"), "noise.phase");
    if (n.contains("amplitude") && !n.at("amplitude").is_null())
      c.noise.amplitude = ou_from_json(n.at("amplitude"), "noise.amplitude");
    read(n, "mc_dt", c.noise.mc_dt);
    read(n, "n_traj", c.noise.n_traj);
    if (n.contains("mc_mode")) c.mc_mode = mc_mode_from_string(n.at("mc_mode").get<std::string>());
  }
  if (j.contains("pulses")) {
    const json& p = j.at("pulses");
    check_keys(p, "pulses", {"omega_rabi", "t_pi", "t_half"});
    double omega = c.pulses.omega_rabi;
    read(p, "omega_rabi", omega);
    c.pulses = PulseSet::from_rabi(omega);
    read(p, "t_pi", c.pulses.t_pi);
    read(p, "t_half", c.pulses.t_half);
  }
  if (j.contains("quad")) {
    const json& q = j.at("quad");
    check_keys(q, "quad", {"abs_tol", "rel_tol", "max_subdivisions", "cutoff_factor", "include_tail"});
    read(q, "abs_tol", c.quad.abs_tol);
    read(q, "rel_tol", c.quad.rel_tol);
    read(q, "max_subdivisions", c.quad.max_subdivisions);
    read(q, "cutoff_factor", c.quad.cutoff_factor);
    read(q, "include_tail", c.quad.include_tail);
  }
  if (j.contains("design")) {
    const json& d = j.at("design");
    check_keys(d, "design", {"p_max", "shots"});
    read(d, "p_max", c.p_max);
    read(d, "shots", c.shots);
  }
  if (j.contains("model")) c.model = model_from_string(j.at("model").get<std::string>());
  if (j.contains("distance")) {
    const auto d = j.at("distance").get<std::string>();
    if (d != "gates" && d != "all") throw Error(ErrorKind::Parse, "distance must be 'gates' or 'all'");
    c.distance_includes_spam = d == "all";
  }
  if (j.contains("truth")) c.truth = truth_from_string(j.at("truth").get<std::string>());
  if (j.contains("data")) c.data = data_from_string(j.at("data").get<std::string>());
  if (j.contains("fit")) {
    const json& f = j.at("fit");
    check_keys(f, "fit", {"cost_switch_depth", "ftol", "cost_atol", "max_iterations", "fd_step", "cp_tolerance",
                          "require_convergence"});
    read(f, "cost_switch_depth", c.fit.cost_switch_depth);
    read(f, "ftol", c.fit.ftol);
    read(f, "cost_atol", c.fit.cost_atol);
    read(f, "max_iterations", c.fit.max_iterations);
    read(f, "fd_step", c.fit.fd_step);
    read(f, "cp_tolerance", c.fit.cp_tolerance);
    read(f, "require_convergence", c.fit.require_convergence);
  }
  read(j, "repeats", c.repeats);
  read(j, "seed", c.seed);
  read(j, "out", c.out_dir);
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, "sweep", {"shots", "p_max", "tau_c", "circuits"});
    read(s, "shots", c.sweep.shots);
    read(s, "p_max", c.sweep.p_max);
    read(s, "tau_c", c.sweep.tau_c);
    read(s, "circuits", c.sweep.circuits);
  }
  return c;
}

json to_json(const RunConfig& c) {
  json noise = {{"phase", ou_to_json(c.noise.phase)},
                {"amplitude", c.noise.amplitude ? ou_to_json(*c.noise.amplitude) : json(nullptr)},
                {"mc_dt", c.noise.mc_dt},
                {"n_traj", c.noise.n_traj},
                {"mc_mode", to_string(c.mc_mode)}};
  return {{"noise", noise},
          {"pulses", {{"omega_rabi", c.pulses.omega_rabi}, {"t_pi", c.pulses.t_pi}, {"t_half", c.pulses.t_half}}},
          {"quad",
           {{"abs_tol", c.quad.abs_tol},
            {"rel_tol", c.quad.rel_tol},
            {"max_subdivisions", c.quad.max_subdivisions},
            {"cutoff_factor", c.quad.cutoff_factor},
            {"include_tail", c.quad.include_tail}}},
          {"design", {{"p_max", c.p_max}, {"shots", c.shots}}},
          {"model", to_string(c.model)},
          {"truth", to_string(c.truth)},
          {"distance", c.distance_includes_spam ? "all" : "gates"},
          {"data", to_string(c.data)},
          {"fit",
           {{"cost_switch_depth", c.fit.cost_switch_depth},
            {"ftol", c.fit.ftol},
            {"cost_atol", c.fit.cost_atol},
            {"max_iterations", c.fit.max_iterations},
            {"fd_step", c.fit.fd_step},
            {"cp_tolerance", c.fit.cp_tolerance},
            {"require_convergence", c.fit.require_convergence}}},
          {"repeats", c.repeats},
          {"seed", c.seed},
          {"out", c.out_dir},
          {"sweep",
           {{"shots", c.sweep.shots}, {"p_max", c.sweep.p_max}, {"tau_c", c.sweep.tau_c}, {"circuits", c.sweep.circuits}}}};
}

RunConfig read_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, path + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::string config_hash(const RunConfig& c) {
  const std::string s = to_json(c).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

json matrix_rows(const PTM& m) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
  return rows;
}

}  // namespace

json to_json(const GateSetPTMs& g) {
  json gates = json::array();
  for (const auto& m : g.gates) gates.push_back(matrix_rows(m));
  return {{"gates", gates},
          {"rho", {g.rho(0), g.rho(1), g.rho(2), g.rho(3)}},
          {"meas", {g.meas(0), g.meas(1), g.meas(2), g.meas(3)}}};
}

json to_json(const FitResult& r, const std::vector<std::string>& names) {
  json theta = json::object();
  if (names.size() == static_cast<std::size_t>(r.theta.size())) {
    for (std::size_t i = 0; i < names.size(); ++i) theta[names[i]] = r.theta(static_cast<Eigen::Index>(i));
  } else {
    theta = std::vector<double>(r.theta.data(), r.theta.data() + r.theta.size());
  }
  json stages = json::array();
  for (const auto& s : r.stages)
    stages.push_back({{"depth", s.depth},
                      {"cost", to_string(s.kind)},
                      {"n_circuits", s.n_circuits},
                      {"cost_start", s.cost_start},
                      {"cost_end", s.cost_end},
                      {"iterations", s.iterations},
                      {"converged", s.converged}});
  return {{"model", r.general ? "general" : to_string(r.variant)},
          {"theta", theta},
          {"ptms", to_json(r.ptms)},
          {"final_cost", {{"kind", to_string(r.final_kind)}, {"value", r.final_cost}}},
          {"stages", stages},
          {"constraint_residual", r.constraint_residual},
          {"converged", r.converged}};
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidConfig, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorKind::InvalidConfig, "write failed for '" + path + "'");
}

}  // namespace cgst
