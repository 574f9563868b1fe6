#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "pdifs/diagnostics.hpp"
#include "pdifs/perpetuity.hpp"
#include "pdifs/system.hpp"

namespace pdifs {

// A fully resolved run configuration. Loading validates the document,
// materializes every default, and keeps the resolved JSON so that manifests
// echo exactly what the run used. All validation failures throw
// ScenarioError naming the offending key.
class Scenario {
 public:
  static Scenario load_file(const std::filesystem::path& path);
  // Accepts either a bare scenario document or a run manifest wrapping one
  // under the "scenario" key, so manifests can be re-run directly.
  static Scenario from_json(nlohmann::json doc);

  const nlohmann::json& resolved() const { return resolved_; }

  std::uint64_t seed() const;
  int dim() const;
  bool is_mixture() const;
  StatePoint x0() const;
  StatePoint y0() const;
  int steps() const;
  int replicas() const;
  int burn_in() const;
  int pairs() const;
  double beta() const;
  Region region() const;

  // The finite system; a mixture scenario is flattened.
  PlaceDependentSystem build_system() const;
  // Mixture scenarios only; throws ScenarioError otherwise.
  MixtureAffineKernel build_kernel() const;

  void set_field(const std::string& key, const nlohmann::json& value);

 private:
  nlohmann::json resolved_;
};

// Applies a dotted-path override ("system.weights.lo=0.3") onto a scenario
// document. The value text is parsed as JSON when possible and taken as a
// string otherwise.
void apply_override(nlohmann::json& doc, const std::string& path,
                    const std::string& value_text);

}  // namespace pdifs
