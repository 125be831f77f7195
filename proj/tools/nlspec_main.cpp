// Command-line front end: one JSON config in, CSV reports plus a JSON summary
// out. Exit codes: 0 all verdicts pass, 2 some verdict failed, 1 usage or
// config or computation error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "nlspec/nlspec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommandIO {
  nlspec::RunConfig cfg;
  fs::path out;
  std::map<std::string, bool> verdicts;
  json extra;  // command-specific summary numbers
  std::vector<std::string> outputs;
  std::map<std::string, double> timings;

  void write_summary(const std::string& command) {
    json verdict_map;
    bool all = true;
    for (const auto& [name, ok] : verdicts) {
      verdict_map[name] = ok ? "PASS" : "FAIL";
      all = all && ok;
    }
    json summary;
    summary["command"] = command;
    summary["verdicts"] = verdict_map;
    summary["pass"] = all;
    summary["outputs"] = outputs;
    summary["timings_file"] = "timings.json";
    for (auto it = extra.begin(); it != extra.end(); ++it) summary[it.key()] = it.value();
    nlspec::atomic_write(out / "summary.json", summary.dump(2) + "\n");

    json tj;
    for (const auto& [name, sec] : timings) tj[name] = sec;
    nlspec::atomic_write(out / "timings.json", tj.dump(2) + "\n");
  }

  bool all_pass() const {
    for (const auto& [name, ok] : verdicts)
      if (!ok) return false;
    return true;
  }
};

class Stopwatch {
 public:
  explicit Stopwatch(CommandIO& io, std::string name)
      : io_(io), name_(std::move(name)), t0_(std::chrono::steady_clock::now()) {}
  ~Stopwatch() {
    const auto dt = std::chrono::steady_clock::now() - t0_;
    io_.timings[name_] = std::chrono::duration<double>(dt).count();
  }

 private:
  CommandIO& io_;
  std::string name_;
  std::chrono::steady_clock::time_point t0_;
};

void write_csv(CommandIO& io, const std::string& name, const nlspec::CsvTable& t) {
  nlspec::atomic_write(io.out / name, t.to_string());
  io.outputs.push_back(name);
}

std::uint64_t required_seed(const nlspec::RunConfig& cfg) {
  if (!cfg.seed) throw nlspec::ConfigError("this command requires params.seed");
  return *cfg.seed;
}

// ---------------------------------------------------------------------------

void run_validate_kernel(CommandIO& io) {
  Stopwatch sw(io, "validate-kernel");
  const auto rep =
      nlspec::validate_kernel(*io.cfg.kernel, io.cfg.quad_points, io.cfg.tolerance);
  nlspec::CsvTable t;
  t.header = {"m_integral", "divergent", "lower_bound_margin", "symmetry_defect",
              "order_warning"};
  t.rows.push_back({nlspec::fmt_sig17(rep.m_integral), rep.m_integral_divergent ? "1" : "0",
                    nlspec::fmt_sig17(rep.lower_bound_margin),
                    nlspec::fmt_sig17(rep.symmetry_defect), rep.order_warning ? "1" : "0"});
  write_csv(io, "kernel_validation.csv", t);
  io.verdicts["integrability"] = rep.integrable();
  io.verdicts["lower_bound"] = rep.lower_bound_ok();
  io.verdicts["symmetry"] = rep.symmetric();
  io.extra["order_warning"] = rep.order_warning;
}

void run_assemble(CommandIO& io) {
  Stopwatch sw(io, "assemble");
  const Eigen::MatrixXd A = nlspec::assemble_stiffness(*io.cfg.kernel, *io.cfg.mesh);
  const Eigen::MatrixXd B = nlspec::assemble_weight(*io.cfg.weight, *io.cfg.mesh);
  nlspec::write_matrix_csv(io.out / "stiffness.csv", A);
  nlspec::write_matrix_csv(io.out / "weight_matrix.csv", B);
  io.outputs.push_back("stiffness.csv");
  io.outputs.push_back("weight_matrix.csv");
  io.verdicts["assembly_self_check"] = true;  // assemble_stiffness throws on failure
}

void run_spectrum(CommandIO& io) {
  Stopwatch sw(io, "spectrum");
  const Eigen::MatrixXd A = nlspec::assemble_stiffness(*io.cfg.kernel, *io.cfg.mesh);
  const nlspec::Pencil P(A, nlspec::assemble_weight(*io.cfg.weight, *io.cfg.mesh));
  const nlspec::Spectrum S =
      nlspec::solve_spectrum(P, io.cfg.zero_tol.value_or(-1.0));

  nlspec::CsvTable t;
  t.header = {"k", "lambda", "mu", "residual"};
  for (int k = 1; k <= S.positive_count(); ++k)
    t.rows.push_back({std::to_string(k), nlspec::fmt_sig17(S.lambda(k)),
                      nlspec::fmt_sig17(S.mu(k)), nlspec::fmt_sig17(S.residual(k))});
  for (int k = 1; k <= S.negative_count(); ++k)
    t.rows.push_back({std::to_string(-k), nlspec::fmt_sig17(S.lambda(-k)),
                      nlspec::fmt_sig17(S.mu(-k)), nlspec::fmt_sig17(S.residual(-k))});
  write_csv(io, "spectrum.csv", t);

  if (io.cfg.export_eigenvectors) {
    nlspec::CsvTable ev;
    ev.header = {"k"};
    for (int i = 0; i < P.size(); ++i) ev.header.push_back("c" + std::to_string(i));
    auto emit = [&](int k) {
      std::vector<std::string> row{std::to_string(k)};
      const Eigen::VectorXd e = S.eigenvector(k);
      for (int i = 0; i < e.size(); ++i) row.push_back(nlspec::fmt_sig17(e(i)));
      ev.rows.push_back(std::move(row));
    };
    for (int k = 1; k <= S.positive_count(); ++k) emit(k);
    for (int k = 1; k <= S.negative_count(); ++k) emit(-k);
    write_csv(io, "eigenvectors.csv", ev);
  }

  double worst_residual = 0.0;
  for (double r : S.residual_pos) worst_residual = std::max(worst_residual, r);
  for (double r : S.residual_neg) worst_residual = std::max(worst_residual, r);
  const auto adm = nlspec::admissible_indices(*io.cfg.weight, S);
  io.verdicts["residuals"] = worst_residual <= 1e-7;
  io.verdicts["sign_rule"] = adm.consistent();
  io.extra["positive_count"] = S.positive_count();
  io.extra["negative_count"] = S.negative_count();
  io.extra["zero_multiplicity"] = S.zero_multiplicity;
  io.extra["worst_residual"] = worst_residual;
}

void run_minimax_check(CommandIO& io) {
  Stopwatch sw(io, "minimax-check");
  const std::uint64_t seed = required_seed(io.cfg);
  const Eigen::MatrixXd A = nlspec::assemble_stiffness(*io.cfg.kernel, *io.cfg.mesh);
  const nlspec::Pencil P(A, nlspec::assemble_weight(*io.cfg.weight, *io.cfg.mesh));
  const nlspec::Spectrum S = nlspec::solve_spectrum(P);

  nlspec::CsvTable t;
  t.header = {"formula", "k", "target", "worst_sample", "witness_value", "samples", "verdict"};
  bool all = true;
  auto emit = [&](const nlspec::MinimaxReport& r, int signed_k) {
    t.rows.push_back({nlspec::to_string(r.formula), std::to_string(signed_k),
                      nlspec::fmt_sig17(r.target), nlspec::fmt_sig17(r.worst_sample),
                      nlspec::fmt_sig17(r.witness), std::to_string(r.samples),
                      r.pass ? "PASS" : "FAIL"});
    all = all && r.pass;
  };
  for (int k = 1; k <= std::min(io.cfg.kmax, S.positive_count()); ++k) {
    const auto [supinf, infsup] = nlspec::verify_positive_branch(P, S, k, io.cfg.samples, seed);
    emit(supinf, k);
    emit(infsup, k);
  }
  for (int k = 1; k <= std::min(io.cfg.kmax, S.negative_count()); ++k) {
    const auto [infsup, supinf] = nlspec::verify_negative_branch(P, S, k, io.cfg.samples, seed);
    emit(infsup, -k);
    emit(supinf, -k);
  }
  write_csv(io, "minimax.csv", t);
  io.verdicts["minimax"] = all;
  io.extra["rows"] = t.rows.size();
}

void run_continuity(CommandIO& io) {
  Stopwatch sw(io, "continuity");
  const std::uint64_t seed = io.cfg.seed.value_or(0);
  const auto rep = nlspec::continuity_sweep(*io.cfg.kernel, *io.cfg.mesh, *io.cfg.weight,
                                            io.cfg.eps_list, io.cfg.mode, io.cfg.kmax, seed);
  nlspec::CsvTable t;
  t.header = {"eps", "mode", "k", "mu_base", "mu_perturbed", "deviation", "op_distance",
              "slack"};
  for (const auto& row : rep.rows)
    t.rows.push_back({nlspec::fmt_sig17(row.eps), nlspec::to_string(rep.mode),
                      std::to_string(row.k), nlspec::fmt_sig17(row.mu_base),
                      nlspec::fmt_sig17(row.mu_perturbed), nlspec::fmt_sig17(row.deviation),
                      nlspec::fmt_sig17(row.distance), nlspec::fmt_sig17(row.slack)});
  write_csv(io, "continuity.csv", t);
  io.verdicts["slack"] = rep.slack_ok;
  if (rep.shrink_checked) io.verdicts["shrink"] = rep.shrink_ok;
  io.extra["verdict"] = rep.slack_ok && (!rep.shrink_checked || rep.shrink_ok) ? "PASS" : "FAIL";
  io.extra["worst_slack"] = rep.worst_slack;
  io.extra["rows"] = rep.rows.size();
  io.extra["skipped_steps"] = rep.skipped_steps;
}

void run_monotone(CommandIO& io) {
  Stopwatch sw(io, "monotone");
  const auto rep = nlspec::compare_weights(*io.cfg.kernel, *io.cfg.mesh, *io.cfg.weight,
                                           *io.cfg.weight_tilde, io.cfg.kmax, io.cfg.tau);
  nlspec::CsvTable t;
  t.header = {"k", "lambda", "lambda_tilde", "gap", "strict", "zero_fraction"};
  for (const auto& row : rep.rows)
    t.rows.push_back({std::to_string(row.k), nlspec::fmt_sig17(row.lambda_base),
                      nlspec::fmt_sig17(row.lambda_shifted), nlspec::fmt_sig17(row.gap),
                      row.strict ? "1" : "0", nlspec::fmt_sig17(row.zero_fraction)});
  write_csv(io, "monotone.csv", t);
  io.verdicts["weak_monotonicity"] = rep.weak_ok;
  io.extra["verdict"] = rep.weak_ok ? "PASS" : "FAIL";
  io.extra["worst_gap"] = rep.worst_gap;
  io.extra["rows"] = rep.rows.size();
}

void run_ucp_demo(CommandIO& io) {
  Stopwatch sw(io, "ucp-demo");
  const nlspec::Mesh& m = *io.cfg.mesh;
  std::vector<int> blocks = io.cfg.blocks;
  if (blocks.empty()) blocks = {m.n / 2, m.n - m.n / 2};
  int total = 0;
  for (int b : blocks) total += b;
  if (total != m.n)
    throw nlspec::ConfigError("params.blocks must sum to the interior node count");
  const Eigen::MatrixXd A = nlspec::block_second_difference(blocks, m.spacing());
  const auto rep = nlspec::rev_construct(A, m, *io.cfg.weight, *io.cfg.k_index,
                                         *io.cfg.epsilon, io.cfg.zero_tau,
                                         nlspec::WeightForm::Lumped);
  nlspec::CsvTable t;
  t.header = {"cell", "rho", "rho_eps"};
  for (int c = 0; c < m.cell_count(); ++c)
    t.rows.push_back({std::to_string(c), nlspec::fmt_sig17(io.cfg.weight->cells[c]),
                      nlspec::fmt_sig17(rep.rho_eps.cells[c])});
  write_csv(io, "ucp_demo.csv", t);
  io.verdicts["eigenvalue_equality"] = rep.difference <= nlspec::WeightEditReport::equality_tol;
  io.verdicts["index_stability"] = rep.index_stable;
  io.verdicts["weight_changed"] = rep.weight_changed;
  io.extra["lambda_base"] = rep.lambda_base;
  io.extra["lambda_edited"] = rep.lambda_edited;
  io.extra["difference"] = rep.difference;
  io.extra["edited_cells"] = rep.edited_cells;
  io.extra["coupling_residual"] = rep.coupling_residual;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-sided weighted eigenvalues of nonlocal operators on an interval"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_flag;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"validate-kernel", "check the kernel hypotheses numerically"},
      {"assemble", "assemble and export the stiffness and weight matrices"},
      {"spectrum", "solve the two-sided weighted eigenvalue problem"},
      {"minimax-check", "verify the variational min-max formulas by sampling"},
      {"continuity", "verify the reciprocal-eigenvalue continuity bound"},
      {"monotone", "compare the spectra of two ordered weights"},
      {"ucp-demo", "weight edit on an eigenfunction zero set (decoupled surrogate)"},
  };
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "path to the JSON run configuration")
        ->required();
    sub->add_option("--out", out_dir, "output directory (default: config output_dir)");
    sub->add_option("--seed", seed_flag, "seed override for randomized commands");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::ifstream in(config_path);
    if (!in) throw nlspec::ConfigError("cannot open config file '" + config_path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw nlspec::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    CommandIO io{nlspec::parse_config(j, command), {}, {}, json::object(), {}, {}};
    if (seed_flag) io.cfg.seed = *seed_flag;
    io.out = out_dir.empty() ? fs::path(io.cfg.output_dir) : fs::path(out_dir);
    fs::create_directories(io.out);

    if (command == "validate-kernel")
      run_validate_kernel(io);
    else if (command == "assemble")
      run_assemble(io);
    else if (command == "spectrum")
      run_spectrum(io);
    else if (command == "minimax-check")
      run_minimax_check(io);
    else if (command == "continuity")
      run_continuity(io);
    else if (command == "monotone")
      run_monotone(io);
    else if (command == "ucp-demo")
      run_ucp_demo(io);

    io.write_summary(command);
    return io.all_pass() ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
