#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "folioid/linalg.hpp"

namespace folioid {

using Json = nlohmann::json;

Json to_json(const Vec& v);
Json to_json(const Mat& m);

/// Result of one sampled numerical check.
struct CheckReport {
  std::string name;
  bool pass = true;
  double max_residual = 0.0;
  double tolerance = 0.0;
  int samples = 0;
  std::optional<Json> witness;
  Json details = Json::object();

  /// Records a residual; the first residual above tolerance becomes the witness.
  void record(double residual, const std::function<Json()>& make_witness);
  /// Marks failure with a witness, keeping the first one.
  void fail(Json witness_value);

  Json to_json() const;
};

struct Violation {
  std::string axiom;
  Json witness;
};

/// Result of an exhaustive or sampled axiom validation.
struct ValidationReport {
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
  void add(std::string axiom, Json witness) {
    violations.push_back({std::move(axiom), std::move(witness)});
  }
  bool has(const std::string& axiom) const;
  Json to_json() const;
};

}  // namespace folioid
