#include "folioid/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "folioid/dirac.hpp"
#include "folioid/errors.hpp"
#include "folioid/fingroupoid.hpp"
#include "folioid/leafspace.hpp"
#include "folioid/liegroupoid.hpp"
#include "folioid/multdist.hpp"
#include "folioid/rng.hpp"
#include "folioid/scenarios.hpp"

namespace folioid {

namespace {

const std::vector<std::pair<std::string, double NumericParams::*>> kDoubleFields = {
    {"h_fd", &NumericParams::h_fd},
    {"tol_rank", &NumericParams::tol_rank},
    {"tol_member", &NumericParams::tol_member},
    {"tol_leaf", &NumericParams::tol_leaf},
    {"tol_axiom", &NumericParams::tol_axiom},
    {"tol_dirac", &NumericParams::tol_dirac},
    {"tol_jac", &NumericParams::tol_jac},
    {"tol_angle", &NumericParams::tol_angle},
    {"tol_lift", &NumericParams::tol_lift},
    {"tol_desc", &NumericParams::tol_desc},
    {"tol_comp", &NumericParams::tol_comp},
    {"tol_target", &NumericParams::tol_target},
    {"tol_jacobi", &NumericParams::tol_jacobi},
    {"t_max", &NumericParams::t_max},
    {"sample_radius", &NumericParams::sample_radius},
};

const std::vector<std::pair<std::string, int NumericParams::*>> kIntFields = {
    {"rk4_steps_per_unit", &NumericParams::rk4_steps_per_unit},
    {"samples", &NumericParams::samples},
};

const std::string kSmooth[] = {"pair", "vb_trivial", "group_action_pair",
                               "presymplectic_pair_dirac"};

std::vector<std::string> smooth_families() { return {std::begin(kSmooth), std::end(kSmooth)}; }

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

void require_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) bad(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) bad(where + ": unknown key '" + k + "'");
  }
}

double get_number(const Json& j, const std::string& where) {
  if (!j.is_number()) bad(where + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) bad(where + ": not finite");
  return x;
}

int get_int(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) bad(where + ": missing '" + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number_integer()) bad(where + "." + key + ": expected an integer");
  return v.get<int>();
}

Vec get_vec(const Json& j, const std::string& where) {
  if (!j.is_array()) bad(where + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = get_number(j[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

std::vector<Vec> get_basis(const Json& j, const std::string& key, int dim,
                           const std::string& where) {
  if (!j.contains(key)) bad(where + ": missing '" + key + "'");
  const Json& b = j.at(key);
  if (!b.is_array()) bad(where + "." + key + ": expected an array of vectors");
  std::vector<Vec> out;
  for (std::size_t i = 0; i < b.size(); ++i) {
    out.push_back(get_vec(b[i], where + "." + key + "[" + std::to_string(i) + "]"));
    if (out.back().size() != dim) {
      bad(where + "." + key + ": vector of dimension " + std::to_string(out.back().size()) +
          ", expected " + std::to_string(dim));
    }
  }
  return out;
}

Mat get_matrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) bad(where + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Mat m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vec row = get_vec(j[static_cast<std::size_t>(r)], where);
    if (row.size() != rows) bad(where + ": matrix must be square");
    m.row(r) = row.transpose();
  }
  return m;
}

void require_positive_dim(int d, const std::string& where) {
  if (d < 1) bad(where + ": dimension must be at least 1");
}

NumericParams parse_numeric(const Json& j) {
  std::set<std::string> allowed = {"seed"};
  for (const auto& [k, f] : kDoubleFields) allowed.insert(k);
  for (const auto& [k, f] : kIntFields) allowed.insert(k);
  require_keys(j, allowed, "numeric");
  NumericParams p;
  for (const auto& [k, f] : kDoubleFields) {
    if (!j.contains(k)) continue;
    const double x = get_number(j.at(k), "numeric." + k);
    if (!(x > 0)) bad("numeric." + k + " must be positive");
    p.*f = x;
  }
  for (const auto& [k, f] : kIntFields) {
    if (!j.contains(k)) continue;
    if (!j.at(k).is_number_integer()) bad("numeric." + k + ": expected an integer");
    const auto x = j.at(k).get<long long>();
    if (x < 1 || x > 1000000) bad("numeric." + k + " must be in [1, 1000000]");
    p.*f = static_cast<int>(x);
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) bad("numeric.seed: expected a non-negative integer");
    p.seed = j.at("seed").get<std::uint64_t>();
  }
  return p;
}

// ---------------------------------------------------------------------------
// Family instances

struct Instance {
  std::optional<FiniteScenario> finite;
  std::optional<bool> expect_isomorphic;
  std::optional<SmoothScenario> smooth;
  std::optional<DiracScenario> dirac;
};

Instance build_finite(const Json& p) {
  require_keys(p, {"instance", "full_relation", "groupoid", "normal", "nss", "expect_isomorphic"},
               "params");
  Instance inst;
  if (p.contains("expect_isomorphic")) {
    if (!p.at("expect_isomorphic").is_boolean()) bad("params.expect_isomorphic: expected a bool");
    inst.expect_isomorphic = p.at("expect_isomorphic").get<bool>();
  }
  if (p.contains("instance")) {
    if (p.contains("groupoid") || p.contains("normal") || p.contains("nss")) {
      bad("params: give either 'instance' or an explicit 'groupoid'");
    }
    const Json& name = p.at("instance");
    if (p.contains("full_relation") && !p.at("full_relation").is_boolean()) {
      bad("params.full_relation: expected a bool");
    }
    const bool full = p.value("full_relation", true);
    if (name == "pair4") {
      inst.finite = make_finite_pair4();
    } else if (name == "z4_bundle") {
      inst.finite = make_finite_z4_bundle(full);
    } else {
      bad("params.instance: unknown finite instance " + name.dump());
    }
    return inst;
  }
  if (!p.contains("groupoid") || !p.contains("normal")) {
    bad("params: finite family needs 'instance' or 'groupoid' and 'normal'");
  }
  try {
    FiniteScenario sc;
    sc.name = "custom";
    sc.groupoid = groupoid_from_json(p.at("groupoid"));
    sc.normal = p.at("normal").get<ArrowSet>();
    std::sort(sc.normal.begin(), sc.normal.end());
    if (p.contains("nss")) sc.nss = nss_from_json(p.at("nss"));
    inst.finite = std::move(sc);
  } catch (const Json::exception& e) {
    bad(std::string("params: ") + e.what());
  } catch (const StructuralError& e) {
    bad(std::string("params: ") + e.what());
  }
  return inst;
}

Instance build_instance(const ScenarioConfig& cfg) {
  const Json& p = cfg.params;
  const auto& num = cfg.numeric;
  if (cfg.family == "finite") return build_finite(p);
  Instance inst;
  try {
    if (cfg.family == "pair") {
      require_keys(p, {"m", "d_basis"}, "params");
      const int m = get_int(p, "m", "params");
      require_positive_dim(m, "params.m");
      inst.smooth = make_pair_scenario(m, get_basis(p, "d_basis", m, "params"), num);
    } else if (cfg.family == "vb_trivial") {
      require_keys(p, {"k", "w_basis", "m", "f_basis"}, "params");
      const int k = get_int(p, "k", "params");
      const int m = get_int(p, "m", "params");
      require_positive_dim(k, "params.k");
      require_positive_dim(m, "params.m");
      inst.smooth = make_vb_scenario(k, get_basis(p, "w_basis", k, "params"), m,
                                     get_basis(p, "f_basis", m, "params"), num);
    } else if (cfg.family == "group_action_pair") {
      require_keys(p, {"m", "direction"}, "params");
      const int m = get_int(p, "m", "params");
      require_positive_dim(m, "params.m");
      if (!p.contains("direction")) bad("params: missing 'direction'");
      inst.smooth = make_group_action_scenario(m, get_vec(p.at("direction"), "params.direction"),
                                               num);
    } else if (cfg.family == "presymplectic_pair_dirac") {
      require_keys(p, {"omega", "weight_coordinate"}, "params");
      if (!p.contains("omega")) bad("params: missing 'omega'");
      const int w = p.contains("weight_coordinate") ? get_int(p, "weight_coordinate", "params") : -1;
      inst.dirac = make_presymplectic_scenario(get_matrix(p.at("omega"), "params.omega"), num, w);
      inst.smooth = inst.dirac->smooth;
    }
  } catch (const PreconditionError& e) {
    bad(std::string("params: ") + e.what());
  } catch (const StructuralError& e) {
    bad(std::string("params: ") + e.what());
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Checks

CheckReport from_validation(const std::string& name, const ValidationReport& v) {
  CheckReport rep;
  rep.name = name;
  rep.pass = v.valid();
  rep.details["violations"] = v.to_json();
  if (!v.valid()) rep.witness = v.violations.front().witness;
  return rep;
}

Json groupoid_summary(const FiniteGroupoid& g) {
  return {{"objects", g.num_objects()}, {"arrows", g.num_arrows()}};
}

const NormalSubgroupoidSystem& require_nss(const FiniteScenario& sc) {
  if (!sc.nss) throw PreconditionError("finite scenario has no normal subgroupoid system");
  return *sc.nss;
}

CheckReport run_finite_check(const std::string& name, const Instance& inst) {
  const auto& sc = *inst.finite;
  const auto& g = sc.groupoid;
  if (name == "validate_groupoid") return from_validation(name, validate_groupoid(g));
  if (name == "is_normal_subgroupoid") {
    CheckReport rep;
    rep.name = name;
    const auto r = is_normal_subgroupoid(g, sc.normal);
    rep.pass = r.normal;
    rep.witness = r.witness;
    return rep;
  }
  if (name == "validate_nss") return from_validation(name, validate_nss(g, require_nss(sc)));
  if (name == "quotient_by_normal_subgroupoid") {
    CheckReport rep;
    rep.name = name;
    const auto q = quotient_by_normal_subgroupoid(g, sc.normal);
    rep.details["quotient"] = groupoid_summary(q.quotient);
    const auto v = validate_groupoid(q.quotient);
    const auto m = validate_morphism(q.projection);
    rep.pass = v.valid() && m.valid();
    if (!rep.pass) rep.witness = Json{{"quotient", v.to_json()}, {"projection", m.to_json()}};
    return rep;
  }
  if (name == "quotient_by_nss") {
    CheckReport rep;
    rep.name = name;
    const auto q = quotient_by_nss(g, require_nss(sc));
    rep.details["quotient"] = groupoid_summary(q.quotient);
    const auto v = validate_groupoid(q.quotient);
    const auto m = validate_morphism(q.projection);
    rep.pass = v.valid() && m.valid();
    if (!rep.pass) rep.witness = Json{{"quotient", v.to_json()}, {"projection", m.to_json()}};
    return rep;
  }
  if (name == "compare_quotients") {
    CheckReport rep;
    rep.name = name;
    const auto a = quotient_by_normal_subgroupoid(g, sc.normal).quotient;
    const auto b = quotient_by_nss(g, require_nss(sc)).quotient;
    const bool iso = find_isomorphism(a, b).has_value();
    rep.details["isomorphic"] = iso;
    rep.details["by_normal_subgroupoid"] = groupoid_summary(a);
    rep.details["by_nss"] = groupoid_summary(b);
    if (inst.expect_isomorphic) {
      rep.details["expected_isomorphic"] = *inst.expect_isomorphic;
      if (iso != *inst.expect_isomorphic) rep.fail({{"isomorphic", iso}});
    }
    return rep;
  }
  throw ConfigError("check '" + name + "' does not apply to family finite");
}

CheckReport characteristic_check(const DiracScenario& sc) {
  const auto& ls = sc.smooth.leaves;
  const auto& params = ls.params;
  CheckReport rep;
  rep.name = "characteristic_spaces";
  rep.tolerance = params.tol_angle;
  rep.samples = params.samples;
  Rng rng(params.seed + 30);
  std::set<int> ranks;
  for (int k = 0; k < params.samples; ++k) {
    const Vec g = ls.gd.sampler.arrow(rng);
    const Mat g0 = characteristic_spaces(sc.d_g, g, params.tol_rank).g0;
    const Mat s = fiber_basis(ls.s, g);
    ranks.insert(static_cast<int>(g0.cols()));
    if (g0.cols() != s.cols()) {
      rep.fail({{"g", to_json(g)}, {"g0_rank", g0.cols()}, {"leaf_rank", s.cols()}});
      continue;
    }
    rep.record(linalg::max_principal_angle(g0, s), [&] { return Json{{"g", to_json(g)}}; });
  }
  rep.details["g0_ranks"] = ranks;
  if (ranks.size() > 1) {
    // G0 must be a subbundle; a varying rank outranks any other witness.
    rep.pass = false;
    rep.witness = Json{{"error", "RankDrift"}, {"g0_ranks", ranks}};
  }
  return rep;
}

CheckReport completeness_check(const SmoothScenario& sc) {
  const auto& ls = sc.leaves;
  auto up = check_completeness(sc.complete_fields, ls.gd.sampler.arrow, ls.params);
  auto down = check_completeness(sc.complete_base_fields, ls.gd.sampler.object, ls.params);
  CheckReport rep = up;
  rep.name = "check_completeness";
  rep.pass = up.pass && down.pass;
  rep.max_residual = std::max(up.max_residual, down.max_residual);
  rep.details = {{"arrows", up.to_json()}, {"objects", down.to_json()}};
  if (!up.pass) {
    rep.witness = up.witness;
  } else if (!down.pass) {
    rep.witness = down.witness;
  }
  return rep;
}

CheckReport run_smooth_check(const std::string& name, const Instance& inst) {
  const auto& sc = *inst.smooth;
  const auto& ls = sc.leaves;
  const auto& gd = ls.gd;
  const auto& p = ls.params;
  if (name == "validate_groupoid") return validate_smooth_groupoid(gd, p);
  if (name == "check_structure_jacobians") return check_structure_jacobians(gd, p);
  if (name == "check_multiplicative") return check_multiplicative(gd, ls.s, p);
  if (name == "check_rank_structure") return check_rank_structure(gd, ls.s, p);
  if (name == "check_ts_surjectivity") return check_ts_surjectivity(gd, ls.s, p);
  if (name == "check_involutive") return check_involutive(ls.s, p, gd.sampler.arrow);
  if (name == "check_completeness") return completeness_check(sc);
  if (name == "check_first_integrals") return check_first_integrals(ls);
  if (name == "check_condition6") return check_condition6(ls);
  if (name == "validate_quotient_groupoid") return validate_quotient_groupoid(ls);
  if (name == "check_lifted_structures") {
    if (!sc.quotient) throw PreconditionError("no closed-form quotient for this family");
    return check_lifted_structures(ls, *sc.quotient);
  }
  if (name == "check_ideal_system") return check_ideal_system(ls);
  if (!inst.dirac) throw ConfigError("check '" + name + "' needs a Dirac family");
  const auto& d = *inst.dirac;
  if (name == "check_lagrangian") return check_lagrangian(d.d_g, p, gd.sampler.arrow);
  if (name == "check_integrable") return check_integrable(d.d_g, p, gd.sampler.arrow);
  if (name == "characteristic_spaces") return characteristic_check(d);
  if (name == "check_multiplicative_dirac") return check_multiplicative_dirac(gd, d.d_g, p);
  if (name == "pushforward_dirac") return pushforward_dirac(d.d_g, ls).report;
  throw ConfigError("unknown check '" + name + "'");
}

bool is_hypothesis_violation(const std::string& name, const CheckReport& rep) {
  if (rep.pass) return false;
  if (name == "check_condition6") return true;
  return rep.witness && rep.witness->is_object() && rep.witness->value("error", "") == "RankDrift";
}

Json quotient_summary(const Instance& inst) {
  if (!inst.smooth) return nullptr;
  const auto& ls = inst.smooth->leaves;
  Json q = {{"arrow_label_dim", ls.chart.lambda_g.codomain().dim()},
            {"object_label_dim", ls.chart.lambda_p.codomain().dim()}};
  if (inst.smooth->quotient) q["closed_form"] = inst.smooth->quotient->name;
  return q;
}

}  // namespace

Json to_json(const NumericParams& p) {
  Json j = Json::object();
  for (const auto& [k, f] : kDoubleFields) j[k] = p.*f;
  for (const auto& [k, f] : kIntFields) j[k] = p.*f;
  j["seed"] = p.seed;
  return j;
}

const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names = {"finite", "pair", "vb_trivial",
                                                  "group_action_pair", "presymplectic_pair_dirac"};
  return names;
}

const std::vector<CheckInfo>& check_catalog() {
  static const std::vector<CheckInfo> catalog = [] {
    const std::vector<std::string> fin = {"finite"};
    const auto smooth = smooth_families();
    const std::vector<std::string> all = {"finite", "pair", "vb_trivial", "group_action_pair",
                                          "presymplectic_pair_dirac"};
    const std::vector<std::string> dir = {"presymplectic_pair_dirac"};
    return std::vector<CheckInfo>{
        {"validate_groupoid", all, "groupoid axioms (exhaustive when finite, sampled when smooth)"},
        {"is_normal_subgroupoid", fin, "N is wide and closed under conjugation"},
        {"validate_nss", fin, "compatibility conditions and action axioms of (N, R, theta)"},
        {"quotient_by_normal_subgroupoid", fin, "quotient G/N over P/N and its projection"},
        {"quotient_by_nss", fin, "quotient by a normal subgroupoid system and its projection"},
        {"compare_quotients", fin, "isomorphism test between the two finite quotients"},
        {"check_structure_jacobians", smooth, "analytic Jacobians against central differences"},
        {"check_multiplicative", smooth, "S is closed under tangent units, inverses and products"},
        {"check_rank_structure", smooth,
         "ranks of S, S cap TP, S cap T^tG, S cap T^sG; splitting; left translation of S^t"},
        {"check_ts_surjectivity", smooth, "Ts and Tt map S onto S cap TP"},
        {"check_involutive", smooth, "brackets of spanning fields of S stay in S"},
        {"check_completeness", smooth, "spanning fields up and down stay in the box over t_max"},
        {"check_first_integrals", smooth, "leaf labels are constant along S and S cap TP"},
        {"check_condition6", smooth,
         "g * ([s(g)] cap t^-1(s(g))) = [g] cap t^-1(t(g)) at sampled arrows"},
        {"validate_quotient_groupoid", smooth,
         "groupoid axioms on leaf labels and the morphism property of the projection"},
        {"check_lifted_structures", smooth,
         "tangent and cotangent products descend to the closed-form quotient"},
        {"check_ideal_system", smooth, "S cap AG is an ideal system for the object leaf relation"},
        {"check_lagrangian", dir, "D_G is isotropic of full rank"},
        {"check_integrable", dir, "D_G is closed under the Courant bracket"},
        {"characteristic_spaces", dir, "G0 of D_G has constant rank and equals the leaf distribution"},
        {"check_multiplicative_dirac", dir, "D_G is a subgroupoid of TG + T*G and G0 is multiplicative"},
        {"pushforward_dirac", dir,
         "push D_G to the leaf space: Poisson bivector, Jacobi identity, forward Dirac projection"},
    };
  }();
  return catalog;
}

std::vector<std::string> default_pipeline(const std::string& family) {
  std::vector<std::string> out;
  for (const auto& c : check_catalog()) {
    if (std::find(c.families.begin(), c.families.end(), family) == c.families.end()) continue;
    out.push_back(c.name);
  }
  return out;
}

std::string describe_family(const std::string& name) {
  static const std::map<std::string, std::string> text = {
      {"finite",
       "finite: exact finite groupoid with a normal subgroupoid N and a normal subgroupoid "
       "system.\n  params: instance = \"pair4\" | \"z4_bundle\", full_relation (bool, z4_bundle)\n"
       "          or groupoid (JSON tables), normal (arrow ids), nss (optional)\n"
       "          expect_isomorphic (optional bool, used by compare_quotients)\n"},
      {"pair",
       "pair: pair groupoid R^m x R^m with S = D x D for a constant distribution D.\n"
       "  params: m (dimension), d_basis (list of vectors in R^m spanning D)\n"},
      {"vb_trivial",
       "vb_trivial: vector bundle groupoid R^k x R^m over R^m with S = W x F.\n"
       "  params: k (fiber dimension), w_basis (vectors in R^k spanning W),\n"
       "          m (base dimension), f_basis (vectors in R^m spanning F)\n"},
      {"group_action_pair",
       "group_action_pair: pair groupoid R^m x R^m with R acting by diagonal translation.\n"
       "  params: m (dimension), direction (vector in R^m)\n"},
      {"presymplectic_pair_dirac",
       "presymplectic_pair_dirac: pair groupoid R^m x R^m with the minus double of the graph\n"
       "  of a constant presymplectic form; leaves are those of G0 = ker x ker.\n"
       "  params: omega (antisymmetric m x m matrix, degenerate),\n"
       "          weight_coordinate (optional k: use x_k omega instead)\n"},
  };
  const auto it = text.find(name);
  if (it == text.end()) throw ConfigError("unknown family '" + name + "'");
  std::string out = it->second + "  checks:";
  for (const auto& c : default_pipeline(name)) out += " " + c;
  return out + "\n";
}

ScenarioConfig parse_config(const Json& j) {
  require_keys(j, {"family", "params", "numeric", "pipeline"}, "config");
  if (!j.contains("family") || !j.at("family").is_string()) bad("config: 'family' must be a string");
  ScenarioConfig cfg;
  cfg.family = j.at("family").get<std::string>();
  const auto& fams = family_names();
  if (std::find(fams.begin(), fams.end(), cfg.family) == fams.end()) {
    bad("config: unknown family '" + cfg.family + "'");
  }
  if (j.contains("params")) {
    if (!j.at("params").is_object()) bad("config: 'params' must be an object");
    cfg.params = j.at("params");
  }
  if (j.contains("numeric")) cfg.numeric = parse_numeric(j.at("numeric"));
  if (j.contains("pipeline")) {
    const Json& pl = j.at("pipeline");
    if (!pl.is_array()) bad("config: 'pipeline' must be an array of check names");
    const auto allowed = default_pipeline(cfg.family);
    for (const auto& e : pl) {
      if (!e.is_string()) bad("config: pipeline entries must be strings");
      const auto name = e.get<std::string>();
      if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
        bad("config: check '" + name + "' is not available for family " + cfg.family);
      }
      cfg.pipeline.push_back(name);
    }
    if (cfg.pipeline.empty()) bad("config: pipeline is empty");
  } else {
    cfg.pipeline = default_pipeline(cfg.family);
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

RunResult run_scenario(const ScenarioConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const Instance inst = build_instance(config);

  RunResult out;
  Json& rep = out.report;
  rep["schema"] = 1;
  rep["config"] = {{"family", config.family},
                   {"params", config.params},
                   {"numeric", to_json(config.numeric)},
                   {"pipeline", config.pipeline}};
  rep["checks"] = Json::array();
  Json times = Json::object();
  Json failed = Json::array();
  Json short_circuit = nullptr;

  for (const auto& name : config.pipeline) {
    const auto t0 = clock::now();
    CheckReport cr;
    bool stop = false;
    try {
      cr = inst.finite ? run_finite_check(name, inst) : run_smooth_check(name, inst);
      stop = is_hypothesis_violation(name, cr);
    } catch (const RankDrift& e) {
      cr.name = name;
      cr.fail({{"error", "RankDrift"}, {"message", e.what()}, {"location", e.location()}});
      stop = true;
    } catch (const Condition6Violated& e) {
      cr.name = name;
      cr.fail({{"error", "Condition6Violated"},
                {"message", e.what()},
                {"witness", Json::parse(e.witness_json())}});
      stop = true;
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      cr.name = name;
      cr.fail({{"error", "exception"}, {"message", e.what()}});
    }
    cr.name = name;
    times[name] = std::chrono::duration<double>(clock::now() - t0).count();
    rep["checks"].push_back(cr.to_json());
    if (!cr.pass) failed.push_back(name);
    if (stop) {
      short_circuit = {{"check", name}, {"reason", "hypothesis violated"}};
      break;
    }
  }
  const Json q = quotient_summary(inst);
  if (!q.is_null()) rep["quotient"] = q;
  rep["summary"] = {{"pass", failed.empty() && short_circuit.is_null()},
                    {"checks_run", rep["checks"].size()},
                    {"failed", failed},
                    {"short_circuit", short_circuit}};
  times["total"] = std::chrono::duration<double>(clock::now() - start).count();
  rep["wall_times"] = times;
  out.exit_code = rep["summary"]["pass"].get<bool>() ? 0 : 1;
  return out;
}

Json without_wall_times(Json report) {
  report.erase("wall_times");
  return report;
}

}  // namespace folioid
