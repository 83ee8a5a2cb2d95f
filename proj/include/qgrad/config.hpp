#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qgrad/checks.hpp"
#include "qgrad/json_io.hpp"
#include "qgrad/model.hpp"
#include "qgrad/nonlinear.hpp"

namespace qgrad {

enum class Method { newton, fixed_point };

/// One experiment document:
///
///   { "problem": {...}, "mesh": {"resolution": M}, "solver": {...},
///     "method": "newton" | "fixed-point", "grid": [...],
///     "probe": {"base_resolution": n, "levels": k} }
///
/// Every block is optional; unknown keys are rejected.
struct RunConfig {
  ProblemSpec problem;
  int resolution = 400;
  SolverConfig solver;
  Method method = Method::newton;
  std::vector<double> grid;
  ProbeOptions probe;

  MeshPtr mesh() const { return mesh_for(problem.domain, resolution); }
};

/// Throws ErrorKind::invalid_spec / invalid_dimension / invalid_table.
RunConfig run_config_from_json(const Json& doc);
Json to_json(const RunConfig& cfg);

struct Preset {
  std::string name;
  std::string theorem;   // statement the preset exercises
  std::string expected;  // qualitative outcome, or "no asserted outcome"
  std::string command;   // suggested subcommand
  Json config;
};

const std::vector<Preset>& presets();
/// nullptr when unknown.
const Preset* find_preset(const std::string& name);

}  // namespace qgrad
