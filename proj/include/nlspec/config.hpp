#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlspec/experiments.hpp"
#include "nlspec/kernel.hpp"
#include "nlspec/mesh.hpp"

namespace nlspec {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::string& path,
                                const std::vector<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("unknown config key '" + path + it.key() + "'");
  }
}

inline const nlohmann::json& expect_object(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError("config entry '" + path + "' must be an object");
  return j;
}

inline double expect_number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError("config entry '" + path + "' must be a number");
  return j.get<double>();
}

inline int expect_int(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError("config entry '" + path + "' must be an integer");
  return j.get<int>();
}

inline std::string expect_string(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError("config entry '" + path + "' must be a string");
  return j.get<std::string>();
}

}  // namespace detail

/// Parsed run configuration. The parser is strict: unknown keys anywhere are a
/// hard error, and each command checks for the sections it needs.
struct RunConfig {
  std::string command;
  std::optional<Kernel> kernel;
  std::optional<Mesh> mesh;
  std::optional<Weight> weight;
  std::optional<Weight> weight_tilde;
  std::string output_dir = ".";

  // command parameters (defaults documented in the schema)
  int kmax = 4;
  int samples = 1000;
  std::optional<std::uint64_t> seed;
  std::vector<double> eps_list;
  PerturbationMode mode = PerturbationMode::UniformShift;
  double tau = 1e-6;
  double zero_tau = 1e-6;
  std::optional<double> epsilon;
  std::optional<int> k_index;
  int quad_points = 64;
  double tolerance = 1e-10;
  std::vector<int> blocks;
  bool export_eigenvectors = false;
  std::optional<double> zero_tol;
};

inline RunConfig parse_config(const nlohmann::json& j, const std::string& command) {
  using namespace detail;
  expect_object(j, "(root)");
  reject_unknown_keys(j, "", {"kernel", "mesh", "weight", "weight_tilde", "params", "output_dir"});

  RunConfig cfg;
  cfg.command = command;

  if (j.contains("kernel")) {
    const auto& kj = expect_object(j.at("kernel"), "kernel");
    reject_unknown_keys(kj, "kernel.", {"family", "s", "alpha", "modulation"});
    if (!kj.contains("family") || !kj.contains("s") || !kj.contains("alpha"))
      throw ConfigError("kernel needs 'family', 's' and 'alpha'");
    const std::string family = expect_string(kj.at("family"), "kernel.family");
    const double s = expect_number(kj.at("s"), "kernel.s");
    const double alpha = expect_number(kj.at("alpha"), "kernel.alpha");
    try {
      if (family == "fractional") {
        if (kj.contains("modulation"))
          throw ConfigError("kernel.modulation is only valid for the modulated family");
        cfg.kernel = Kernel::fractional(s, alpha);
      } else if (family == "modulated") {
        if (!kj.contains("modulation"))
          throw ConfigError("kernel.modulation is required for the modulated family");
        cfg.kernel =
            Kernel::modulated(s, alpha, expect_string(kj.at("modulation"), "kernel.modulation"));
      } else if (family == "tempered") {
        if (kj.contains("modulation"))
          throw ConfigError("kernel.modulation is implied by the tempered family");
        cfg.kernel = Kernel::tempered(s, alpha);
      } else {
        throw ConfigError("kernel.family must be 'fractional', 'modulated' or 'tempered'");
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid kernel: ") + e.what());
    }
  }

  if (j.contains("mesh")) {
    const auto& mj = expect_object(j.at("mesh"), "mesh");
    reject_unknown_keys(mj, "mesh.", {"a", "b", "n"});
    if (!mj.contains("a") || !mj.contains("b") || !mj.contains("n"))
      throw ConfigError("mesh needs 'a', 'b' and 'n'");
    try {
      cfg.mesh = Mesh(expect_number(mj.at("a"), "mesh.a"), expect_number(mj.at("b"), "mesh.b"),
                      expect_int(mj.at("n"), "mesh.n"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid mesh: ") + e.what());
    }
  }

  auto parse_weight = [&](const nlohmann::json& wj, const std::string& path) {
    expect_object(wj, path);
    reject_unknown_keys(wj, path + ".", {"cells", "expr"});
    if (!cfg.mesh) throw ConfigError("a weight needs a mesh");
    if (wj.contains("cells") == wj.contains("expr"))
      throw ConfigError(path + " needs exactly one of 'cells' or 'expr'");
    try {
      if (wj.contains("cells")) {
        if (!wj.at("cells").is_array()) throw ConfigError(path + ".cells must be an array");
        std::vector<double> cells;
        for (const auto& v : wj.at("cells")) cells.push_back(expect_number(v, path + ".cells[]"));
        return Weight::from_cells(*cfg.mesh, std::move(cells));
      }
      return Weight::from_expr(*cfg.mesh, expect_string(wj.at("expr"), path + ".expr"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("invalid " + path + ": " + e.what());
    }
  };
  if (j.contains("weight")) cfg.weight = parse_weight(j.at("weight"), "weight");
  if (j.contains("weight_tilde")) cfg.weight_tilde = parse_weight(j.at("weight_tilde"), "weight_tilde");

  if (j.contains("output_dir")) cfg.output_dir = expect_string(j.at("output_dir"), "output_dir");

  if (j.contains("params")) {
    const auto& pj = expect_object(j.at("params"), "params");
    reject_unknown_keys(pj, "params.",
                        {"kmax", "samples", "seed", "eps_list", "mode", "tau", "zero_tau",
                         "epsilon", "k", "quad_points", "tolerance", "blocks", "eigenvectors",
                         "zero_tol"});
    if (pj.contains("kmax")) cfg.kmax = expect_int(pj.at("kmax"), "params.kmax");
    if (pj.contains("samples")) cfg.samples = expect_int(pj.at("samples"), "params.samples");
    if (pj.contains("seed")) {
      if (!pj.at("seed").is_number_unsigned() && !pj.at("seed").is_number_integer())
        throw ConfigError("params.seed must be a nonnegative integer");
      const auto v = pj.at("seed").get<std::int64_t>();
      if (v < 0) throw ConfigError("params.seed must be nonnegative");
      cfg.seed = static_cast<std::uint64_t>(v);
    }
    if (pj.contains("eps_list")) {
      if (!pj.at("eps_list").is_array()) throw ConfigError("params.eps_list must be an array");
      for (const auto& v : pj.at("eps_list"))
        cfg.eps_list.push_back(expect_number(v, "params.eps_list[]"));
    }
    if (pj.contains("mode")) {
      const std::string m = expect_string(pj.at("mode"), "params.mode");
      if (m == "uniform-shift")
        cfg.mode = PerturbationMode::UniformShift;
      else if (m == "random-cells")
        cfg.mode = PerturbationMode::RandomCells;
      else
        throw ConfigError("params.mode must be 'uniform-shift' or 'random-cells'");
    }
    if (pj.contains("tau")) cfg.tau = expect_number(pj.at("tau"), "params.tau");
    if (pj.contains("zero_tau")) cfg.zero_tau = expect_number(pj.at("zero_tau"), "params.zero_tau");
    if (pj.contains("epsilon")) cfg.epsilon = expect_number(pj.at("epsilon"), "params.epsilon");
    if (pj.contains("k")) cfg.k_index = expect_int(pj.at("k"), "params.k");
    if (pj.contains("quad_points"))
      cfg.quad_points = expect_int(pj.at("quad_points"), "params.quad_points");
    if (pj.contains("tolerance")) cfg.tolerance = expect_number(pj.at("tolerance"), "params.tolerance");
    if (pj.contains("blocks")) {
      if (!pj.at("blocks").is_array()) throw ConfigError("params.blocks must be an array");
      for (const auto& v : pj.at("blocks")) cfg.blocks.push_back(expect_int(v, "params.blocks[]"));
    }
    if (pj.contains("eigenvectors")) {
      if (!pj.at("eigenvectors").is_boolean())
        throw ConfigError("params.eigenvectors must be a boolean");
      cfg.export_eigenvectors = pj.at("eigenvectors").get<bool>();
    }
    if (pj.contains("zero_tol")) cfg.zero_tol = expect_number(pj.at("zero_tol"), "params.zero_tol");
  }

  // per-command requirements
  auto need = [&](bool have, const std::string& what) {
    if (!have) throw ConfigError("command '" + command + "' requires " + what);
  };
  if (command == "validate-kernel") {
    need(cfg.kernel.has_value(), "a kernel");
  } else if (command == "assemble" || command == "spectrum") {
    need(cfg.kernel.has_value(), "a kernel");
    need(cfg.mesh.has_value(), "a mesh");
    need(cfg.weight.has_value(), "a weight");
  } else if (command == "minimax-check") {
    need(cfg.kernel.has_value(), "a kernel");
    need(cfg.mesh.has_value(), "a mesh");
    need(cfg.weight.has_value(), "a weight");
    need(cfg.seed.has_value(), "params.seed (randomized command)");
  } else if (command == "continuity") {
    need(cfg.kernel.has_value(), "a kernel");
    need(cfg.mesh.has_value(), "a mesh");
    need(cfg.weight.has_value(), "a weight");
    need(!cfg.eps_list.empty(), "params.eps_list");
    if (cfg.mode == PerturbationMode::RandomCells)
      need(cfg.seed.has_value(), "params.seed (randomized command)");
  } else if (command == "monotone") {
    need(cfg.kernel.has_value(), "a kernel");
    need(cfg.mesh.has_value(), "a mesh");
    need(cfg.weight.has_value(), "a weight");
    need(cfg.weight_tilde.has_value(), "a weight_tilde");
  } else if (command == "ucp-demo") {
    need(cfg.mesh.has_value(), "a mesh");
    need(cfg.weight.has_value(), "a weight");
    need(cfg.k_index.has_value(), "params.k");
    need(cfg.epsilon.has_value(), "params.epsilon");
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  return cfg;
}

}  // namespace nlspec
