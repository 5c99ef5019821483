#include "folioid/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace folioid {

Json to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json to_json(const Mat& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

void CheckReport::record(double residual, const std::function<Json()>& make_witness) {
  // NaN counts as a failure and is reported as infinity.
  const double r = std::isnan(residual) ? std::numeric_limits<double>::infinity() : residual;
  max_residual = std::max(max_residual, r);
  if (!(r <= tolerance)) {
    if (!witness) {
      Json w = make_witness();
      w["residual"] = std::isfinite(r) ? Json(r) : Json("inf");
      witness = std::move(w);
    }
    pass = false;
  }
}

void CheckReport::fail(Json witness_value) {
  pass = false;
  if (!witness) witness = std::move(witness_value);
}

Json CheckReport::to_json() const {
  Json out;
  out["name"] = name;
  out["pass"] = pass;
  out["max_residual"] = std::isfinite(max_residual) ? Json(max_residual) : Json("inf");
  out["tolerance"] = tolerance;
  out["samples"] = samples;
  if (witness) out["witness"] = *witness;
  if (!details.empty()) out["details"] = details;
  return out;
}

bool ValidationReport::has(const std::string& axiom) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.axiom == axiom; });
}

Json ValidationReport::to_json() const {
  Json out;
  out["valid"] = valid();
  Json list = Json::array();
  for (const auto& v : violations) list.push_back({{"axiom", v.axiom}, {"witness", v.witness}});
  out["violations"] = std::move(list);
  return out;
}

}  // namespace folioid
