#include "folioid/fingroupoid.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "folioid/errors.hpp"

namespace folioid {

namespace {

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Smaller root wins so that roots are minimal ids.
    if (a < b) parent_[b] = a; else parent_[a] = b;
  }
  /// Class ids numbered 0.. in order of the smallest member.
  std::vector<int> labels() {
    std::vector<int> out(parent_.size(), -1);
    std::vector<int> root_label(parent_.size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < parent_.size(); ++i) {
      const int r = find(static_cast<int>(i));
      if (root_label[r] < 0) root_label[r] = next++;
      out[i] = root_label[r];
    }
    return out;
  }

 private:
  std::vector<int> parent_;
};

int count_classes(const std::vector<int>& labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

std::vector<std::vector<int>> members(const std::vector<int>& labels) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(count_classes(labels)));
  for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(static_cast<int>(i));
  return out;
}

std::string arrow_name(const FiniteGroupoid& g, int a) {
  return g.arrow_names().empty() ? std::to_string(a) : g.arrow_names()[a];
}

std::string object_name(const FiniteGroupoid& g, int p) {
  return g.object_names().empty() ? std::to_string(p) : g.object_names()[p];
}

std::vector<bool> mask_of(const FiniteGroupoid& g, const ArrowSet& n) {
  std::vector<bool> mask(static_cast<std::size_t>(g.num_arrows()), false);
  for (int a : n) {
    if (a < 0 || a >= g.num_arrows()) {
      throw StructuralError("arrow subset contains id " + std::to_string(a) + " out of range");
    }
    mask[a] = true;
  }
  return mask;
}

// Builds the quotient from arrow and object labelings. The product of two
// classes is computed by `product(rep_g, rep_h)` for every pair of
// representatives and must not depend on them.
FiniteQuotient build_quotient(const FiniteGroupoid& g, const std::vector<int>& arrow_cls,
                              const std::vector<int>& object_cls,
                              const std::function<std::vector<int>(int, int)>& products,
                              const char* what) {
  const int na = count_classes(arrow_cls);
  const int no = count_classes(object_cls);
  const auto arrow_members = members(arrow_cls);
  const auto object_members = members(object_cls);

  std::vector<int> src(na), tgt(na), inv(na), unit(no);
  for (int c = 0; c < na; ++c) {
    const int rep = arrow_members[c].front();
    src[c] = object_cls[g.src(rep)];
    tgt[c] = object_cls[g.tgt(rep)];
    inv[c] = arrow_cls[g.inv(rep)];
    for (int a : arrow_members[c]) {
      if (object_cls[g.src(a)] != src[c] || object_cls[g.tgt(a)] != tgt[c] ||
          arrow_cls[g.inv(a)] != inv[c]) {
        throw ConsistencyError(std::string(what) + ": induced source/target/inverse depends on "
                               "the representative of class " + std::to_string(c));
      }
    }
  }
  for (int c = 0; c < no; ++c) {
    unit[c] = arrow_cls[g.unit(object_members[c].front())];
    for (int p : object_members[c]) {
      if (arrow_cls[g.unit(p)] != unit[c]) {
        throw ConsistencyError(std::string(what) + ": induced unit depends on the representative");
      }
    }
  }

  std::vector<std::array<int, 3>> table;
  for (int c1 = 0; c1 < na; ++c1) {
    for (int c2 = 0; c2 < na; ++c2) {
      if (src[c1] != tgt[c2]) continue;
      int value = -1;
      for (int a : arrow_members[c1]) {
        for (int b : arrow_members[c2]) {
          for (int prod : products(a, b)) {
            const int cls = arrow_cls[prod];
            if (value < 0) value = cls;
            if (cls != value) {
              throw ConsistencyError(std::string(what) + ": induced multiplication of classes " +
                                     std::to_string(c1) + ", " + std::to_string(c2) +
                                     " is not well defined");
            }
          }
        }
      }
      if (value < 0) {
        throw ConsistencyError(std::string(what) + ": no representative product for classes " +
                               std::to_string(c1) + ", " + std::to_string(c2));
      }
      table.push_back({c1, c2, value});
    }
  }

  std::vector<std::string> onames(no), anames(na);
  for (int c = 0; c < no; ++c) onames[c] = "[" + object_name(g, object_members[c].front()) + "]";
  for (int c = 0; c < na; ++c) anames[c] = "[" + arrow_name(g, arrow_members[c].front()) + "]";

  FiniteQuotient out;
  out.quotient = FiniteGroupoid(no, src, tgt, unit, inv, table, onames, anames);
  const ValidationReport rep = validate_groupoid(out.quotient);
  if (!rep.valid()) {
    throw ConsistencyError(std::string(what) + ": quotient fails axiom " +
                           rep.violations.front().axiom);
  }
  out.projection = FiniteMorphism{g, out.quotient, arrow_cls, object_cls};
  const ValidationReport mrep = validate_morphism(out.projection);
  if (!mrep.valid()) {
    throw ConsistencyError(std::string(what) + ": projection is not a morphism (" +
                           mrep.violations.front().axiom + ")");
  }
  return out;
}

}  // namespace

FiniteGroupoid::FiniteGroupoid(int num_objects, std::vector<int> src, std::vector<int> tgt,
                               std::vector<int> unit, std::vector<int> inv,
                               const std::vector<std::array<int, 3>>& mul_table,
                               std::vector<std::string> object_names,
                               std::vector<std::string> arrow_names)
    : num_objects_(num_objects),
      src_(std::move(src)),
      tgt_(std::move(tgt)),
      unit_(std::move(unit)),
      inv_(std::move(inv)),
      object_names_(std::move(object_names)),
      arrow_names_(std::move(arrow_names)) {
  const int na = static_cast<int>(src_.size());
  if (num_objects_ < 0) throw StructuralError("negative object count");
  if (static_cast<int>(tgt_.size()) != na || static_cast<int>(inv_.size()) != na) {
    throw StructuralError("src, tgt and inv tables must have one entry per arrow");
  }
  if (static_cast<int>(unit_.size()) != num_objects_) {
    throw StructuralError("unit table must have one entry per object");
  }
  if (!object_names_.empty() && static_cast<int>(object_names_.size()) != num_objects_) {
    throw StructuralError("object name count does not match object count");
  }
  if (!arrow_names_.empty() && static_cast<int>(arrow_names_.size()) != na) {
    throw StructuralError("arrow name count does not match arrow count");
  }
  auto check_object = [&](int p, const char* table) {
    if (p < 0 || p >= num_objects_) {
      throw StructuralError(std::string(table) + " table: object id " + std::to_string(p) +
                            " out of range");
    }
  };
  auto check_arrow = [&](int a, const char* table) {
    if (a < 0 || a >= na) {
      throw StructuralError(std::string(table) + " table: arrow id " + std::to_string(a) +
                            " out of range");
    }
  };
  for (int a = 0; a < na; ++a) {
    check_object(src_[a], "src");
    check_object(tgt_[a], "tgt");
    check_arrow(inv_[a], "inv");
  }
  for (int p = 0; p < num_objects_; ++p) check_arrow(unit_[p], "unit");
  for (const auto& [g, h, gh] : mul_table) {
    check_arrow(g, "mul");
    check_arrow(h, "mul");
    check_arrow(gh, "mul");
    if (src_[g] != tgt_[h]) {
      throw StructuralError("mul table: entry for non-composable pair (" + std::to_string(g) +
                            ", " + std::to_string(h) + ")");
    }
    if (!mul_.emplace(key(g, h), gh).second) {
      throw StructuralError("mul table: duplicate entry for (" + std::to_string(g) + ", " +
                            std::to_string(h) + ")");
    }
  }
  for (int g = 0; g < na; ++g) {
    for (int h = 0; h < na; ++h) {
      if (src_[g] == tgt_[h] && !mul_.count(key(g, h))) {
        throw StructuralError("mul table: missing entry for composable pair (" +
                              std::to_string(g) + ", " + std::to_string(h) + ")");
      }
    }
  }
}

int FiniteGroupoid::mul(int g, int h) const {
  if (!composable(g, h)) {
    throw NotComposable("arrows " + std::to_string(g) + " and " + std::to_string(h) +
                        " are not composable");
  }
  return mul_.at(key(g, h));
}

std::optional<int> FiniteGroupoid::find_mul(int g, int h) const {
  const auto it = mul_.find(key(g, h));
  if (it == mul_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::array<int, 3>> FiniteGroupoid::mul_entries() const {
  std::vector<std::array<int, 3>> out;
  out.reserve(mul_.size());
  for (int g = 0; g < num_arrows(); ++g) {
    for (int h = 0; h < num_arrows(); ++h) {
      if (auto gh = find_mul(g, h)) out.push_back({g, h, *gh});
    }
  }
  return out;
}

std::vector<int> FiniteGroupoid::hom(int p, int q) const {
  std::vector<int> out;
  for (int a = 0; a < num_arrows(); ++a) {
    if (tgt_[a] == p && src_[a] == q) out.push_back(a);
  }
  return out;
}

FiniteGroupoid FiniteGroupoid::with_inverse(std::vector<int> inv) const {
  return FiniteGroupoid(num_objects_, src_, tgt_, unit_, std::move(inv), mul_entries(),
                        object_names_, arrow_names_);
}

FiniteGroupoid pair_groupoid(int n) {
  std::vector<int> src, tgt, inv, unit(static_cast<std::size_t>(n));
  std::vector<std::array<int, 3>> table;
  std::vector<std::string> onames, anames;
  for (int i = 0; i < n; ++i) {
    onames.push_back(std::to_string(i));
    unit[i] = i * n + i;
    for (int j = 0; j < n; ++j) {
      tgt.push_back(i);
      src.push_back(j);
      inv.push_back(j * n + i);
      anames.push_back("(" + std::to_string(i) + "," + std::to_string(j) + ")");
      for (int k = 0; k < n; ++k) table.push_back({i * n + j, j * n + k, i * n + k});
    }
  }
  return FiniteGroupoid(n, src, tgt, unit, inv, table, onames, anames);
}

FiniteGroupoid cyclic_group(int n) {
  std::vector<int> src(n, 0), tgt(n, 0), inv(n);
  std::vector<std::array<int, 3>> table;
  std::vector<std::string> anames;
  for (int a = 0; a < n; ++a) {
    inv[a] = (n - a) % n;
    anames.push_back(std::to_string(a));
    for (int b = 0; b < n; ++b) table.push_back({a, b, (a + b) % n});
  }
  return FiniteGroupoid(1, src, tgt, {0}, inv, table, {"*"}, anames);
}

FiniteGroupoid discrete_groupoid(int n) {
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<std::array<int, 3>> table;
  for (int p = 0; p < n; ++p) table.push_back({p, p, p});
  return FiniteGroupoid(n, ids, ids, ids, ids, table);
}

FiniteGroupoid product(const FiniteGroupoid& a, const FiniteGroupoid& b) {
  const int nb = b.num_arrows();
  const int pb = b.num_objects();
  const int na_total = a.num_arrows() * nb;
  std::vector<int> src(na_total), tgt(na_total), inv(na_total);
  std::vector<int> unit(static_cast<std::size_t>(a.num_objects() * pb));
  std::vector<std::string> anames(na_total), onames(unit.size());
  for (int x = 0; x < a.num_arrows(); ++x) {
    for (int y = 0; y < nb; ++y) {
      const int id = x * nb + y;
      src[id] = a.src(x) * pb + b.src(y);
      tgt[id] = a.tgt(x) * pb + b.tgt(y);
      inv[id] = a.inv(x) * nb + b.inv(y);
      anames[id] = "(" + arrow_name(a, x) + "," + arrow_name(b, y) + ")";
    }
  }
  for (int p = 0; p < a.num_objects(); ++p) {
    for (int q = 0; q < pb; ++q) {
      unit[p * pb + q] = a.unit(p) * nb + b.unit(q);
      onames[p * pb + q] = "(" + object_name(a, p) + "," + object_name(b, q) + ")";
    }
  }
  std::vector<std::array<int, 3>> table;
  const auto ea = a.mul_entries();
  const auto eb = b.mul_entries();
  for (const auto& [x1, x2, x12] : ea) {
    for (const auto& [y1, y2, y12] : eb) {
      table.push_back({x1 * nb + y1, x2 * nb + y2, x12 * nb + y12});
    }
  }
  return FiniteGroupoid(a.num_objects() * pb, src, tgt, unit, inv, table, onames, anames);
}

Json to_json(const FiniteGroupoid& g) {
  Json out;
  if (g.object_names().empty()) out["objects"] = g.num_objects();
  else out["objects"] = g.object_names();
  if (g.arrow_names().empty()) out["arrows"] = g.num_arrows();
  else out["arrows"] = g.arrow_names();
  out["src"] = g.src_table();
  out["tgt"] = g.tgt_table();
  out["unit"] = g.unit_table();
  out["inv"] = g.inv_table();
  out["mul"] = g.mul_entries();
  return out;
}

FiniteGroupoid groupoid_from_json(const Json& j) {
  try {
    int num_objects = 0;
    std::vector<std::string> onames, anames;
    if (j.at("objects").is_array()) {
      onames = j.at("objects").get<std::vector<std::string>>();
      num_objects = static_cast<int>(onames.size());
    } else {
      num_objects = j.at("objects").get<int>();
    }
    auto src = j.at("src").get<std::vector<int>>();
    if (j.at("arrows").is_array()) {
      anames = j.at("arrows").get<std::vector<std::string>>();
    } else if (j.at("arrows").get<int>() != static_cast<int>(src.size())) {
      throw StructuralError("arrow count does not match src table");
    }
    return FiniteGroupoid(num_objects, std::move(src), j.at("tgt").get<std::vector<int>>(),
                          j.at("unit").get<std::vector<int>>(), j.at("inv").get<std::vector<int>>(),
                          j.at("mul").get<std::vector<std::array<int, 3>>>(), onames, anames);
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("groupoid JSON: ") + e.what());
  }
}

ValidationReport validate_groupoid(const FiniteGroupoid& g) {
  ValidationReport rep;
  const int na = g.num_arrows();
  const int no = g.num_objects();

  // (i) source and target of products
  for (const auto& [a, b, ab] : g.mul_entries()) {
    if (g.src(ab) != g.src(b) || g.tgt(ab) != g.tgt(a)) {
      rep.add("(i) source/target of product", {{"g", a}, {"h", b}, {"gh", ab}});
    }
  }
  // (ii) associativity on composable triples
  for (int a = 0; a < na; ++a) {
    for (int b = 0; b < na; ++b) {
      if (!g.composable(a, b)) continue;
      const int ab = g.mul(a, b);
      for (int c = 0; c < na; ++c) {
        if (!g.composable(b, c) || !g.composable(ab, c)) continue;
        const int bc = g.mul(b, c);
        if (!g.composable(a, bc)) continue;
        if (g.mul(ab, c) != g.mul(a, bc)) {
          rep.add("(ii) associativity", {{"g", a}, {"h", b}, {"k", c}});
        }
      }
    }
  }
  // (iii) units sit over their objects
  for (int p = 0; p < no; ++p) {
    const int u = g.unit(p);
    if (g.src(u) != p || g.tgt(u) != p) rep.add("(iii) unit over object", {{"p", p}, {"unit", u}});
  }
  // (iv) unit laws
  for (int a = 0; a < na; ++a) {
    const int us = g.unit(g.src(a));
    const int ut = g.unit(g.tgt(a));
    if (!g.composable(a, us) || g.mul(a, us) != a) {
      rep.add("(iv) right unit", {{"g", a}, {"unit", us}});
    }
    if (!g.composable(ut, a) || g.mul(ut, a) != a) {
      rep.add("(iv) left unit", {{"g", a}, {"unit", ut}});
    }
  }
  // (v) two-sided inverses
  for (int a = 0; a < na; ++a) {
    const int ai = g.inv(a);
    const bool ok = g.src(ai) == g.tgt(a) && g.tgt(ai) == g.src(a) && g.composable(a, ai) &&
                    g.composable(ai, a) && g.mul(a, ai) == g.unit(g.tgt(a)) &&
                    g.mul(ai, a) == g.unit(g.src(a));
    if (!ok) rep.add("(v) inverse", {{"g", a}, {"inv", ai}});
  }
  // Cancellation: hg = g forces h = 1_t(g), gh = g forces h = 1_s(g), and
  // the inverse is the only two-sided inverse.
  for (int a = 0; a < na; ++a) {
    for (int b = 0; b < na; ++b) {
      if (g.composable(b, a) && g.mul(b, a) == a && b != g.unit(g.tgt(a))) {
        rep.add("unicity: left identity", {{"h", b}, {"g", a}});
      }
      if (g.composable(a, b) && g.mul(a, b) == a && b != g.unit(g.src(a))) {
        rep.add("unicity: right identity", {{"g", a}, {"h", b}});
      }
      if (b != g.inv(a) && g.composable(a, b) && g.composable(b, a) &&
          g.mul(a, b) == g.unit(g.tgt(a)) && g.mul(b, a) == g.unit(g.src(a))) {
        rep.add("unicity: inverse", {{"g", a}, {"other_inverse", b}});
      }
    }
  }
  return rep;
}

ValidationReport validate_morphism(const FiniteMorphism& f) {
  ValidationReport rep;
  const auto& g = f.source;
  const auto& h = f.target;
  if (static_cast<int>(f.arrow_map.size()) != g.num_arrows() ||
      static_cast<int>(f.object_map.size()) != g.num_objects()) {
    throw StructuralError("morphism tables do not match the source groupoid");
  }
  for (int a : f.arrow_map) {
    if (a < 0 || a >= h.num_arrows()) throw StructuralError("morphism arrow id out of range");
  }
  for (int p : f.object_map) {
    if (p < 0 || p >= h.num_objects()) throw StructuralError("morphism object id out of range");
  }
  for (int a = 0; a < g.num_arrows(); ++a) {
    const int fa = f.arrow_map[a];
    if (h.src(fa) != f.object_map[g.src(a)]) rep.add("source", {{"g", a}});
    if (h.tgt(fa) != f.object_map[g.tgt(a)]) rep.add("target", {{"g", a}});
  }
  for (int p = 0; p < g.num_objects(); ++p) {
    if (f.arrow_map[g.unit(p)] != h.unit(f.object_map[p])) rep.add("unit", {{"p", p}});
  }
  for (const auto& [a, b, ab] : g.mul_entries()) {
    const int fa = f.arrow_map[a];
    const int fb = f.arrow_map[b];
    if (!h.composable(fa, fb) || h.mul(fa, fb) != f.arrow_map[ab]) {
      rep.add("multiplication", {{"g", a}, {"h", b}});
    }
  }
  return rep;
}

void require_wide_subgroupoid(const FiniteGroupoid& g, const ArrowSet& n) {
  const auto in = mask_of(g, n);
  for (int p = 0; p < g.num_objects(); ++p) {
    if (!in[g.unit(p)]) {
      throw PreconditionError("subset is not wide: missing unit of object " + std::to_string(p));
    }
  }
  for (int a : n) {
    if (!in[g.inv(a)]) {
      throw PreconditionError("subset is not closed under inversion: inverse of arrow " +
                              std::to_string(a) + " missing");
    }
    for (int b : n) {
      if (g.composable(a, b) && !in[g.mul(a, b)]) {
        throw PreconditionError("subset is not closed under multiplication: product of " +
                                std::to_string(a) + " and " + std::to_string(b) + " missing");
      }
    }
  }
}

NormalityResult is_normal_subgroupoid(const FiniteGroupoid& g, const ArrowSet& n) {
  require_wide_subgroupoid(g, n);
  const auto in = mask_of(g, n);
  for (int x : n) {
    if (g.src(x) != g.tgt(x)) continue;
    for (int a = 0; a < g.num_arrows(); ++a) {
      if (g.src(a) != g.src(x)) continue;
      const int conj = g.mul(g.mul(a, x), g.inv(a));
      if (!in[conj]) return {false, Json{{"n", x}, {"g", a}, {"gng^-1", conj}}};
    }
  }
  return {true, std::nullopt};
}

FiniteQuotient quotient_by_normal_subgroupoid(const FiniteGroupoid& g, const ArrowSet& n) {
  const NormalityResult normal = is_normal_subgroupoid(g, n);
  if (!normal.normal) {
    throw PreconditionError("subgroupoid is not normal, witness " + normal.witness->dump());
  }
  UnionFind objects(g.num_objects());
  for (int x : n) objects.unite(g.src(x), g.tgt(x));
  UnionFind arrows(g.num_arrows());
  for (int a = 0; a < g.num_arrows(); ++a) {
    for (int n1 : n) {
      if (g.src(n1) != g.tgt(a)) continue;
      const int left = g.mul(n1, a);
      for (int n2 : n) {
        if (g.tgt(n2) == g.src(a)) arrows.unite(a, g.mul(left, n2));
      }
    }
  }
  // [g][h] = [g n h] for any n in N from t(h) to s(g).
  auto products = [&](int a, int b) {
    std::vector<int> out;
    for (int x : n) {
      if (g.tgt(x) == g.src(a) && g.src(x) == g.tgt(b)) out.push_back(g.mul(g.mul(a, x), b));
    }
    return out;
  };
  return build_quotient(g, arrows.labels(), objects.labels(), products,
                        "quotient by normal subgroupoid");
}

ArrowSet kernel_of_morphism(const FiniteMorphism& f) {
  const ValidationReport rep = validate_morphism(f);
  if (!rep.valid()) {
    throw PreconditionError("not a morphism: " + rep.violations.front().axiom + " fails at " +
                            rep.violations.front().witness.dump());
  }
  ArrowSet k;
  for (int a = 0; a < f.source.num_arrows(); ++a) {
    if (f.target.is_unit(f.arrow_map[a])) k.push_back(a);
  }
  const NormalityResult normal = is_normal_subgroupoid(f.source, k);
  if (!normal.normal) {
    throw ConsistencyError("kernel is not normal, witness " + normal.witness->dump());
  }
  return k;
}

std::vector<int> left_cosets(const FiniteGroupoid& g, const ArrowSet& n) {
  UnionFind uf(g.num_arrows());
  for (int a = 0; a < g.num_arrows(); ++a) {
    for (int x : n) {
      if (g.tgt(x) == g.src(a)) uf.unite(a, g.mul(a, x));
    }
  }
  return uf.labels();
}

namespace {

struct RelationTable {
  int size = 0;
  std::vector<bool> in;
  bool contains(int p, int q) const {
    return p >= 0 && q >= 0 && p < size && q < size && in[static_cast<std::size_t>(p * size + q)];
  }
};

RelationTable relation_table(const FiniteGroupoid& g,
                             const std::vector<std::pair<int, int>>& relation) {
  RelationTable r{g.num_objects(),
                  std::vector<bool>(static_cast<std::size_t>(g.num_objects() * g.num_objects()))};
  for (const auto& [p, q] : relation) {
    if (p < 0 || q < 0 || p >= r.size || q >= r.size) {
      throw StructuralError("relation contains object id out of range");
    }
    r.in[static_cast<std::size_t>(p * r.size + q)] = true;
  }
  return r;
}

void require_equivalence(const RelationTable& r) {
  for (int p = 0; p < r.size; ++p) {
    if (!r.contains(p, p)) {
      throw PreconditionError("relation is not reflexive at object " + std::to_string(p));
    }
    for (int q = 0; q < r.size; ++q) {
      if (r.contains(p, q) && !r.contains(q, p)) {
        throw PreconditionError("relation is not symmetric at (" + std::to_string(p) + ", " +
                                std::to_string(q) + ")");
      }
      for (int s = 0; s < r.size; ++s) {
        if (r.contains(p, q) && r.contains(q, s) && !r.contains(p, s)) {
          throw PreconditionError("relation is not transitive at (" + std::to_string(p) + ", " +
                                  std::to_string(q) + ", " + std::to_string(s) + ")");
        }
      }
    }
  }
}

// theta on cosets: (p, q, coset) -> coset, after checking entries.
class CosetAction {
 public:
  CosetAction(const FiniteGroupoid& g, const NormalSubgroupoidSystem& nss, const RelationTable& r)
      : coset_(left_cosets(g, nss.n)), num_cosets_(count_classes(coset_)) {
    for (const auto& [key, h] : nss.theta) {
      const auto [p, q, a] = key;
      if (a < 0 || a >= g.num_arrows() || h < 0 || h >= g.num_arrows()) {
        throw StructuralError("theta entry has arrow id out of range");
      }
      if (!r.contains(p, q)) {
        throw PreconditionError("theta entry for (" + std::to_string(p) + ", " +
                                std::to_string(q) + ") outside the relation");
      }
      if (g.tgt(a) != q) {
        throw PreconditionError("theta entry for arrow " + std::to_string(a) +
                                " whose target is not " + std::to_string(q));
      }
      const auto [it, inserted] = table_.emplace(std::make_tuple(p, q, coset_[a]), coset_[h]);
      if (!inserted && it->second != coset_[h]) {
        throw ThetaNotWellDefined("theta((" + std::to_string(p) + ", " + std::to_string(q) +
                                  "), gN) depends on the representative (arrow " +
                                  std::to_string(a) + ")");
      }
    }
    for (int p = 0; p < r.size; ++p) {
      for (int q = 0; q < r.size; ++q) {
        if (!r.contains(p, q)) continue;
        for (int a = 0; a < g.num_arrows(); ++a) {
          if (g.tgt(a) == q && !table_.count({p, q, coset_[a]})) {
            throw PreconditionError("theta is not total: missing ((" + std::to_string(p) + ", " +
                                    std::to_string(q) + "), coset of arrow " +
                                    std::to_string(a) + ")");
          }
        }
      }
    }
    cosets_ = members(coset_);
  }

  int coset(int a) const { return coset_[a]; }
  const std::vector<int>& members_of(int c) const { return cosets_[c]; }
  int apply(int p, int q, int c) const { return table_.at({p, q, c}); }
  int num_cosets() const { return num_cosets_; }

 private:
  std::vector<int> coset_;
  int num_cosets_;
  std::vector<std::vector<int>> cosets_;
  std::map<std::tuple<int, int, int>, int> table_;
};

}  // namespace

NormalSubgroupoidSystem make_nss(const FiniteGroupoid& g, ArrowSet n,
                                 std::vector<std::pair<int, int>> relation,
                                 const std::function<int(int, int, int)>& theta_rule) {
  NormalSubgroupoidSystem out{std::move(n), std::move(relation), {}};
  std::sort(out.n.begin(), out.n.end());
  for (const auto& [p, q] : out.relation) {
    for (int a = 0; a < g.num_arrows(); ++a) {
      if (g.tgt(a) == q) out.theta[{p, q, a}] = theta_rule(p, q, a);
    }
  }
  return out;
}

NormalSubgroupoidSystem kernel_system(const FiniteMorphism& f) {
  const ArrowSet k = kernel_of_morphism(f);
  const auto& g = f.source;
  std::vector<std::pair<int, int>> relation;
  for (int p = 0; p < g.num_objects(); ++p) {
    for (int q = 0; q < g.num_objects(); ++q) {
      if (f.object_map[p] == f.object_map[q]) relation.emplace_back(p, q);
    }
  }
  // (p, q) . gK = hK with F(h) = F(g) and t(h) = p.
  auto rule = [&](int p, int, int a) {
    for (int h = 0; h < g.num_arrows(); ++h) {
      if (g.tgt(h) == p && f.arrow_map[h] == f.arrow_map[a]) return h;
    }
    throw PreconditionError("morphism is not a fibration: no lift of arrow " + std::to_string(a) +
                            " with target " + std::to_string(p));
  };
  return make_nss(g, k, std::move(relation), rule);
}

Json to_json(const NormalSubgroupoidSystem& nss) {
  Json out;
  out["N"] = nss.n;
  Json rel = Json::array();
  for (const auto& [p, q] : nss.relation) rel.push_back({p, q});
  out["R"] = rel;
  Json theta = Json::array();
  for (const auto& [key, h] : nss.theta) {
    theta.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), h});
  }
  out["theta"] = theta;
  return out;
}

NormalSubgroupoidSystem nss_from_json(const Json& j) {
  try {
    NormalSubgroupoidSystem out;
    out.n = j.at("N").get<std::vector<int>>();
    std::sort(out.n.begin(), out.n.end());
    for (const auto& pair : j.at("R")) {
      out.relation.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
    }
    for (const auto& row : j.at("theta")) {
      const auto v = row.get<std::array<int, 4>>();
      out.theta[{v[0], v[1], v[2]}] = v[3];
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("normal subgroupoid system JSON: ") + e.what());
  }
}

ValidationReport validate_nss(const FiniteGroupoid& g, const NormalSubgroupoidSystem& nss) {
  require_wide_subgroupoid(g, nss.n);
  const RelationTable r = relation_table(g, nss.relation);
  require_equivalence(r);
  const CosetAction theta(g, nss, r);
  ValidationReport rep;
  const int no = g.num_objects();

  auto coset_target = [&](int c) { return g.tgt(theta.members_of(c).front()); };

  // Action axioms.
  for (int p = 0; p < no; ++p) {
    for (int q = 0; q < no; ++q) {
      if (!r.contains(p, q)) continue;
      for (int c = 0; c < theta.num_cosets(); ++c) {
        if (coset_target(c) != q) continue;
        const int d = theta.apply(p, q, c);
        if (coset_target(d) != p) {
          rep.add("action: J(theta((p,q),gN)) = p",
                  {{"p", p}, {"q", q}, {"g", theta.members_of(c).front()}});
        }
        if (p == q && d != c) {
          rep.add("action: unit", {{"q", q}, {"g", theta.members_of(c).front()}});
        }
        for (int s = 0; s < no; ++s) {
          if (!r.contains(s, p) || coset_target(d) != p) continue;
          if (theta.apply(s, p, d) != theta.apply(s, q, c)) {
            rep.add("action: composition",
                    {{"r", s}, {"p", p}, {"q", q}, {"g", theta.members_of(c).front()}});
          }
        }
      }
    }
  }

  // Condition 1: (s(h), s(g)) in R for theta((p,q), gN) = hN.
  for (int p = 0; p < no; ++p) {
    for (int q = 0; q < no; ++q) {
      if (!r.contains(p, q)) continue;
      for (int a = 0; a < g.num_arrows(); ++a) {
        if (g.tgt(a) != q) continue;
        for (int h : theta.members_of(theta.apply(p, q, theta.coset(a)))) {
          if (!r.contains(g.src(h), g.src(a))) {
            rep.add("condition 1", {{"p", p}, {"q", q}, {"g", a}, {"h", h}});
          }
        }
      }
      // Condition 2: theta((p,q), 1_q N) = 1_p N.
      const int image = theta.apply(p, q, theta.coset(g.unit(q)));
      if (image != theta.coset(g.unit(p))) {
        rep.add("condition 2", {{"p", p}, {"q", q}, {"image", theta.members_of(image).front()}});
      }
    }
  }

  // Condition 3: theta((p,q), ghN) = g'h'N.
  for (int p = 0; p < no; ++p) {
    for (int q = 0; q < no; ++q) {
      if (!r.contains(p, q)) continue;
      for (int a = 0; a < g.num_arrows(); ++a) {
        if (g.tgt(a) != q) continue;
        const int ga = theta.apply(p, q, theta.coset(a));
        for (int b = 0; b < g.num_arrows(); ++b) {
          if (g.tgt(b) != g.src(a)) continue;
          const int lhs = theta.apply(p, q, theta.coset(g.mul(a, b)));
          for (int gp : theta.members_of(ga)) {
            if (!r.contains(g.src(gp), g.src(a))) continue;  // reported under condition 1
            const int hb = theta.apply(g.src(gp), g.src(a), theta.coset(b));
            const int hp = theta.members_of(hb).front();
            if (!g.composable(gp, hp) || theta.coset(g.mul(gp, hp)) != lhs) {
              rep.add("condition 3", {{"p", p}, {"q", q}, {"g", a}, {"h", b}, {"g'", gp}});
            }
          }
        }
      }
    }
  }
  return rep;
}

FiniteQuotient quotient_by_nss(const FiniteGroupoid& g, const NormalSubgroupoidSystem& nss) {
  const ValidationReport rep = validate_nss(g, nss);
  if (!rep.valid()) {
    throw PreconditionError("normal subgroupoid system invalid: " + rep.violations.front().axiom +
                            " at " + rep.violations.front().witness.dump());
  }
  const RelationTable r = relation_table(g, nss.relation);
  const CosetAction theta(g, nss, r);

  UnionFind objects(g.num_objects());
  for (const auto& [p, q] : nss.relation) objects.unite(p, q);

  // (h, g) in S iff (t(h), t(g)) in R and theta((t(h), t(g)), gN) = hN.
  auto related = [&](int h, int a) {
    return r.contains(g.tgt(h), g.tgt(a)) &&
           theta.apply(g.tgt(h), g.tgt(a), theta.coset(a)) == theta.coset(h);
  };
  UnionFind arrows(g.num_arrows());
  for (int h = 0; h < g.num_arrows(); ++h) {
    for (int a = 0; a < g.num_arrows(); ++a) {
      if (related(h, a)) arrows.unite(h, a);
    }
  }
  const std::vector<int> arrow_cls = arrows.labels();
  for (int h = 0; h < g.num_arrows(); ++h) {
    for (int a = 0; a < g.num_arrows(); ++a) {
      if (arrow_cls[h] == arrow_cls[a] && !related(h, a)) {
        throw ConsistencyError("the set S is not an equivalence relation at arrows " +
                               std::to_string(h) + ", " + std::to_string(a));
      }
    }
  }

  // <gN> * <hN> = <g h' N> with h'N = theta((s(g), t(h)), hN).
  auto products = [&](int a, int b) {
    std::vector<int> out;
    if (!r.contains(g.src(a), g.tgt(b))) return out;
    for (int hp : theta.members_of(theta.apply(g.src(a), g.tgt(b), theta.coset(b)))) {
      out.push_back(g.mul(a, hp));
    }
    return out;
  };
  return build_quotient(g, arrow_cls, objects.labels(), products,
                        "quotient by normal subgroupoid system");
}

namespace {

struct IsoSearch {
  const FiniteGroupoid& a;
  const FiniteGroupoid& b;
  std::vector<int> order;
  std::vector<int> fmap;      // arrows of a -> arrows of b
  std::vector<int> omap;      // objects of a -> objects of b
  std::vector<bool> used;

  // Order of an arrow in its isotropy group (0 if not a loop).
  static int loop_order(const FiniteGroupoid& g, int x) {
    if (g.src(x) != g.tgt(x)) return 0;
    int k = 1;
    int y = x;
    while (!g.is_unit(y)) {
      y = g.mul(y, x);
      ++k;
    }
    return k;
  }

  bool consistent(int x, int y) const {
    if (omap[a.src(x)] >= 0 && omap[a.src(x)] != b.src(y)) return false;
    if (omap[a.tgt(x)] >= 0 && omap[a.tgt(x)] != b.tgt(y)) return false;
    if (a.src(x) == a.tgt(x) && b.src(y) != b.tgt(y)) return false;
    if (loop_order(a, x) != loop_order(b, y)) return false;
    for (int z = 0; z < a.num_arrows(); ++z) {
      const int fz = z == x ? y : fmap[z];
      if (fz < 0) continue;
      if (a.composable(x, z)) {
        const int xz = a.mul(x, z);
        const int fxz = xz == x ? y : fmap[xz];
        if (fxz >= 0 && (!b.composable(y, fz) || b.mul(y, fz) != fxz)) return false;
      }
      if (a.composable(z, x)) {
        const int zx = a.mul(z, x);
        const int fzx = zx == x ? y : fmap[zx];
        if (fzx >= 0 && (!b.composable(fz, y) || b.mul(fz, y) != fzx)) return false;
      }
      // z w = x with w = z^-1 x
      if (a.tgt(z) == a.tgt(x)) {
        const int w = a.mul(a.inv(z), x);
        const int fw = w == x ? y : fmap[w];
        if (fw >= 0 && (!b.composable(fz, fw) || b.mul(fz, fw) != y)) return false;
      }
    }
    return true;
  }

  bool search(std::size_t depth) {
    if (depth == order.size()) {
      return validate_morphism(FiniteMorphism{a, b, fmap, omap}).valid();
    }
    const int x = order[depth];
    for (int y = 0; y < b.num_arrows(); ++y) {
      if (used[y] || !consistent(x, y)) continue;
      const int old_s = omap[a.src(x)];
      const int old_t = omap[a.tgt(x)];
      omap[a.src(x)] = b.src(y);
      omap[a.tgt(x)] = b.tgt(y);
      fmap[x] = y;
      used[y] = true;
      if (search(depth + 1)) return true;
      used[y] = false;
      fmap[x] = -1;
      omap[a.tgt(x)] = old_t;
      omap[a.src(x)] = old_s;
    }
    return false;
  }
};

std::multiset<std::pair<int, int>> hom_profile(const FiniteGroupoid& g) {
  // (number of objects reachable, isotropy order) per object
  std::multiset<std::pair<int, int>> out;
  for (int p = 0; p < g.num_objects(); ++p) {
    int reach = 0;
    for (int q = 0; q < g.num_objects(); ++q) reach += g.hom(p, q).empty() ? 0 : 1;
    out.emplace(reach, static_cast<int>(g.hom(p, p).size()));
  }
  return out;
}

}  // namespace

std::optional<FiniteMorphism> find_isomorphism(const FiniteGroupoid& g, const FiniteGroupoid& h) {
  if (g.num_arrows() != h.num_arrows() || g.num_objects() != h.num_objects()) return std::nullopt;
  if (hom_profile(g) != hom_profile(h)) return std::nullopt;
  IsoSearch s{g, h, {}, std::vector<int>(g.num_arrows(), -1), std::vector<int>(g.num_objects(), -1),
              std::vector<bool>(h.num_arrows(), false)};
  // Units first so that the object map is fixed early, then the rest grouped
  // by target object.
  for (int p = 0; p < g.num_objects(); ++p) s.order.push_back(g.unit(p));
  for (int p = 0; p < g.num_objects(); ++p) {
    for (int a = 0; a < g.num_arrows(); ++a) {
      if (g.tgt(a) == p && !g.is_unit(a)) s.order.push_back(a);
    }
  }
  if (!s.search(0)) return std::nullopt;
  FiniteMorphism iso{g, h, s.fmap, s.omap};
  if (!validate_morphism(iso).valid()) {
    throw ConsistencyError("isomorphism search produced a non-morphism");
  }
  return iso;
}

}  // namespace folioid
