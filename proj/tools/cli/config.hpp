#pragma once

// Job configuration for the hfq front end.  One JSON document, versioned by
// "schema_version"; command-line flags override the scalar fields.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfq/families.hpp"

namespace hfq::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct JobConfig {
  int n = 0;
  Bundle bundle = Bundle::Cotangent;

  // Exactly one of expr / family is set.
  std::string expr;
  std::string family;
  FamilyParams params;
  std::vector<std::string> base_metric, vielbein;  // vielbein-lift overrides
  std::string dual;  // optional Legendre dual generator (L for an H job, H for an L job)

  std::vector<PhasePoint> points;
  int jet_order = 0;  // 0 = auto
  int dmax = 4;
  int vmax = 3;
  double t_end = 5.0;
  double dt = 1e-3;
  double lambda = 0.0;  // cosmological constant in the Einstein residual
  std::string star_f, star_g, star_h;
  std::string output;
  int threads = 0;  // 0 = hardware concurrency

  // Generators parsed on the configured bundle.  dual_generator is empty if
  // neither the config nor the family provides one.
  Expr generator() const;
  std::optional<Expr> dual_generator() const;
  std::optional<Family> builtin() const;

  int geometry_jet_order() const;
  int quantize_jet_order() const;

  nlohmann::ordered_json echo() const;
};

// Throws InputError (including nlohmann parse failures rewrapped).
JobConfig parse_config(const nlohmann::json& doc);
JobConfig load_config(const std::string& path);

// "x=0.1,0.2,p=0.3,-0.4" (y= on TM).
PhasePoint parse_point(const std::string& text, int n, Bundle bundle);

}  // namespace hfq::cli
