#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "sffm/model.h"

namespace sffm {

/// On-disk description of a model and its initial distribution.
///
///   {"schema": 1,
///    "model": {"n": 2, "T": [[-2, 2], [1, -1]], "c": [1, -1], "r": [1, -1]},
///    "init": {"lambda": 1, "nu0": [0.2, 0.6], "P": [0, 0.2]},
///    "analysis": {...}}
///
/// A "tandem" section (b, beta, gamma, T_pm, T_mp, abs_r, r_signs, c_signs,
/// P_minus, optional nu_minus_weights) may replace "init"; the model section is
/// then optional and, when present, must match the constructed model.
struct ModelFile {
  int schema = 1;
  std::optional<SffmModel<double>> model;
  std::optional<InitialDistribution<double>> init;
  std::optional<TandemParams<double>> tandem;
  nlohmann::json analysis = nlohmann::json::object();
};

struct ResolvedModel {
  SffmModel<double> model;
  InitialDistribution<double> init;
  /// True when built from tandem parameters, which guarantee the boundary
  /// conditions at every order.
  bool certified = false;
};

ModelFile ParseModelFile(const nlohmann::json& doc);
nlohmann::json ToJson(const ModelFile& file);
ModelFile LoadModelFile(const std::string& path);

ResolvedModel Resolve(const ModelFile& file);

/// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string ContentHash(const ModelFile& file);

/// Built-in examples 1..6.
ModelFile BuiltinExample(int k);

}  // namespace sffm
