#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "qgrad/checks.hpp"
#include "qgrad/linear.hpp"
#include "qgrad/model.hpp"
#include "qgrad/nonlinear.hpp"
#include "qgrad/transforms.hpp"

namespace qgrad {

using Json = nlohmann::ordered_json;

/// Specs serialize only the fields their kinds use. Readers accept every
/// known field, fill defaults for missing ones and throw
/// ErrorKind::invalid_spec (naming the offending path) for unknown fields or
/// wrong types.
Json to_json(const ProblemSpec& spec);
ProblemSpec problem_from_json(const Json& j);

Json to_json(const SolverConfig& cfg);
SolverConfig solver_from_json(const Json& j);

/// ProblemSpec plus a "transform" metadata block.
Json to_json(const TransformedProblem& tp);
Json to_json(const SolveReport& rep);
Json to_json(const CheckVerdict& v);
Json to_json(const NonexistenceReport& rep);
Json to_json(const EigenPair& ep);

/// Sets the leaf at a dotted path ("problem.g.mu.value"). The value text is
/// parsed as JSON when it parses, else stored as a string. Missing
/// intermediate objects are created; indexing through a non-object throws
/// ErrorKind::invalid_spec.
void apply_override(Json& doc, std::string_view path, const std::string& value);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Canonical text of a document: two-space indent, trailing newline.
std::string dump(const Json& j);

}  // namespace qgrad
