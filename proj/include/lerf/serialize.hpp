#pragma once

// JSON and DOT forms of groups, elements, subgroups, actions, certificates
// and fusion transcripts.

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lerf/amenability.hpp"
#include "lerf/chabauty.hpp"
#include "lerf/genericity.hpp"

namespace lerf {

using json = nlohmann::ordered_json;

inline std::string rational_text(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// ------------------------------------------------------------------ groups

inline json to_json(const MarkedGroup& g) {
  switch (g.kind()) {
    case MarkedGroup::Kind::free: return {{"kind", "free"}, {"rank", g.rank()}};
    case MarkedGroup::Kind::free_infinite: return {{"kind", "free_inf"}};
    case MarkedGroup::Kind::baumslag_solitar: return {{"kind", "bs"}, {"n", g.bs_parameter()}};
    case MarkedGroup::Kind::free_product: return {{"kind", "free_product"}, {"left", to_json(g.left())}, {"right", to_json(g.right())}};
  }
  return {};
}

inline MarkedGroup group_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "free") return MarkedGroup::free(j.at("rank").get<int>());
  if (kind == "free_inf") return MarkedGroup::free_infinite();
  if (kind == "bs") return MarkedGroup::baumslag_solitar(j.at("n").get<int>());
  if (kind == "free_product") return MarkedGroup::free_product(group_from_json(j.at("left")), group_from_json(j.at("right")));
  throw std::invalid_argument("unknown group kind '" + kind + "'");
}

/// "f2", "finf", "bs2", products "f1*f1", or a JSON descriptor.
inline MarkedGroup parse_group(const std::string& raw) {
  const std::string text = detail::trim(raw);
  if (!text.empty() && text.front() == '{') return group_from_json(json::parse(text));
  int depth = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '(') ++depth;
    if (text[i] == ')') --depth;
    if (text[i] == '*' && depth == 0) return MarkedGroup::free_product(parse_group(text.substr(0, i)), parse_group(text.substr(i + 1)));
  }
  if (text.size() > 2 && text.front() == '(' && text.back() == ')') return parse_group(text.substr(1, text.size() - 2));
  std::string lower;
  for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "finf" || lower == "f_inf") return MarkedGroup::free_infinite();
  auto number = [&](std::size_t from) {
    std::string digits = lower.substr(from);
    if (!digits.empty() && (digits.front() == ':' || digits.front() == '_')) digits.erase(0, 1);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("unknown group '" + raw + "'");
    return std::stoi(digits);
  };
  if (lower.rfind("bs", 0) == 0) return MarkedGroup::baumslag_solitar(number(2));
  if (lower.rfind("f", 0) == 0) return MarkedGroup::free(number(1));
  throw std::invalid_argument("unknown group '" + raw + "'");
}

// ---------------------------------------------------------------- elements

inline json to_json(const MarkedGroup& g, const Element& e) {
  if (g.kind() == MarkedGroup::Kind::baumslag_solitar) return json::array({e.bs().p, e.bs().m, e.bs().q});
  return to_string(g, e);
}

inline Element element_from_json(const MarkedGroup& g, const json& j) {
  if (j.is_array()) {
    if (g.kind() != MarkedGroup::Kind::baumslag_solitar || j.size() != 3)
      throw std::invalid_argument("only BS(1,n) elements are written as triples");
    BSWord w{j[0].get<std::int64_t>(), j[1].get<std::int64_t>(), j[2].get<std::int64_t>()};
    if (!bs_is_reduced(g.bs_parameter(), w)) throw std::domain_error("BS triple is not reduced");
    return w;
  }
  return parse_element(g, j.get<std::string>());
}

inline json to_json(const MarkedGroup& g, std::span<const Element> elems) {
  json out = json::array();
  for (const Element& e : elems) out.push_back(to_json(g, e));
  return out;
}

inline std::vector<Element> elements_from_json(const MarkedGroup& g, const json& j) {
  std::vector<Element> out;
  for (const auto& e : j) out.push_back(element_from_json(g, e));
  return out;
}

/// Comma separated words: "aa,b".
inline std::vector<Element> parse_element_list(const MarkedGroup& g, const std::string& text) {
  std::vector<Element> out;
  std::string cur;
  int depth = 0;
  for (char c : text + ",") {
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      if (!detail::trim(cur).empty()) out.push_back(parse_element(g, cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

// --------------------------------------------------------------- subgroups

inline json to_json(const SubgroupGraph& h) {
  json edges = json::array();
  for (const Edge& e : h.edges()) edges.push_back(json::array({e.from, letter_name(h.ambient(), e.generator), e.to}));
  return {{"rank", h.rank()}, {"vertices", h.vertex_count()}, {"base", SubgroupGraph::base}, {"edges", edges}};
}

inline SubgroupGraph graph_from_json(const json& j) {
  const int rank = j.at("rank").get<int>();
  const MarkedGroup g = MarkedGroup::free(rank);
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    const auto letters = detail::parse_letters(g, e.at(1).get<std::string>());
    if (letters.size() != 1 || letters[0] < 0) throw std::invalid_argument("edges carry one positive generator");
    edges.push_back({e.at(0).get<Vertex>(), letters[0], e.at(2).get<Vertex>()});
  }
  return SubgroupGraph::fold(rank, j.at("vertices").get<std::size_t>(), edges, true);
}

inline json to_json(const CosetTable& t) {
  const MarkedGroup g = t.ambient();
  json images = json::object();
  for (int i = 1; i <= t.rank(); ++i) images[letter_name(g, i)] = t.image(i);
  return {{"rank", t.rank()}, {"degree", t.degree()}, {"images", images}};
}

inline CosetTable table_from_json(const json& j) {
  const int rank = j.at("rank").get<int>();
  const MarkedGroup g = MarkedGroup::free(rank);
  std::vector<std::vector<State>> forward;
  for (int i = 1; i <= rank; ++i) forward.push_back(j.at("images").at(letter_name(g, i)).get<std::vector<State>>());
  return CosetTable(rank, std::move(forward));
}

inline std::string to_dot(const SubgroupGraph& h, const std::string& name = "H") {
  std::ostringstream out;
  out << "digraph " << name << " {\n  node [shape=circle];\n  0 [shape=doublecircle];\n";
  for (const Edge& e : h.edges()) out << "  " << e.from << " -> " << e.to << " [label=\"" << letter_name(h.ambient(), e.generator) << "\"];\n";
  out << "}\n";
  return out.str();
}

inline std::string to_dot(const CosetTable& t, const std::string& name = "K") {
  std::ostringstream out;
  out << "digraph " << name << " {\n  node [shape=circle];\n  0 [shape=doublecircle];\n";
  for (int g = 1; g <= t.rank(); ++g)
    for (State u = 0; u < t.degree(); ++u)
      out << "  " << u << " -> " << t.image(g)[u] << " [label=\"" << letter_name(t.ambient(), g) << "\"];\n";
  out << "}\n";
  return out.str();
}

inline json to_json(const SubgroupHandle& h) {
  const MarkedGroup& g = h.ambient();
  json out{{"kind", h.kind()}, {"group", to_json(g)}};
  std::visit(overloaded{
                 [&](const SubgroupHandle::Graph& x) { out["graph"] = to_json(x.graph); },
                 [&](const SubgroupHandle::Table& x) { out["table"] = to_json(x.table); },
                 [&](const SubgroupHandle::WordList& x) { out["generators"] = to_json(g, x.generators); },
                 [&](const SubgroupHandle::BSCyclic& x) { out["generator"] = to_json(g, Element(x.generator)); },
                 [&](const SubgroupHandle::Predicate& x) { out["name"] = x.name; },
             },
             h.value());
  return out;
}

inline SubgroupHandle handle_from_json(const json& j) {
  const MarkedGroup g = group_from_json(j.at("group"));
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "graph") return SubgroupHandle::graph(graph_from_json(j.at("graph")));
  if (kind == "table") return SubgroupHandle::table(table_from_json(j.at("table")));
  if (kind == "words") return SubgroupHandle::words(g, elements_from_json(g, j.at("generators")));
  if (kind == "bs_cyclic") return SubgroupHandle::bs_cyclic(g.bs_parameter(), element_from_json(g, j.at("generator")).bs());
  throw std::invalid_argument("subgroup handles of kind '" + kind + "' cannot be read back");
}

inline json to_json(const ChabautyBall& b) {
  return {{"center", to_json(b.center)}, {"window", to_json(b.center.ambient(), b.window)}};
}

inline ChabautyBall ball_from_json(const json& j) {
  SubgroupHandle center = handle_from_json(j.at("center"));
  std::vector<Element> window = elements_from_json(center.ambient(), j.at("window"));
  return ChabautyBall{std::move(center), std::move(window)};
}

// ----------------------------------------------------------------- actions

inline json to_json(const ActionExpr& act) {
  json out{{"kind", act.kind()}};
  std::visit(overloaded{
                 [&](const action::FinSupp& f) {
                   out["group"] = to_json(act.group());
                   json perms = json::array();
                   for (const FinitePerm& p : f.perms) {
                     json pairs = json::array();
                     for (auto [a, b] : p.mapping()) pairs.push_back({a, b});
                     perms.push_back(pairs);
                   }
                   out["perms"] = perms;
                 },
                 [&](const action::Translation&) { out["group"] = to_json(act.group()); },
                 [&](const action::AffineBS& a) { out["n"] = a.n; },
                 [&](const action::Schreier& s) { out["graph"] = to_json(s.subgroup); },
                 [&](const action::Coset& c) {
                   out["rank"] = c.rank;
                   json blocks = json::array();
                   for (const auto& b : c.blocks) blocks.push_back({{"table", to_json(b.table)}, {"embedding", b.embedding}});
                   out["blocks"] = blocks;
                 },
                 [&](const action::Conjugate& c) {
                   out["inner"] = to_json(c.inner);
                   json pins = json::array();
                   for (auto [d, t] : c.xi.pins()) pins.push_back({d, t});
                   out["pins"] = pins;
                 },
                 [&](const action::DisjointUnion& d) {
                   json parts = json::array();
                   for (const auto& p : d.parts) parts.push_back(to_json(p));
                   out["parts"] = parts;
                 },
                 [&](const action::FreeProductAmalgam& a) {
                   out["left"] = to_json(a.left);
                   out["right"] = to_json(a.right);
                 },
                 [&](const action::TrivialAugment& t) { out["inner"] = to_json(t.inner); },
                 [&](const action::FreezeOrbits& f) {
                   out["inner"] = to_json(f.inner);
                   out["frozen"] = std::vector<Point>(f.frozen.begin(), f.frozen.end());
                 },
             },
             act.node().value);
  return out;
}

inline ActionExpr action_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "finsupp" || kind == "trivial") {
    const MarkedGroup g = group_from_json(j.at("group"));
    std::vector<FinitePerm> perms;
    if (j.contains("perms"))
      for (const auto& p : j.at("perms")) {
        std::map<Point, Point> m;
        for (const auto& pair : p) {
          if (!m.emplace(pair.at(0).get<Point>(), pair.at(1).get<Point>()).second)
            throw std::invalid_argument("permutation lists a point twice");
        }
        perms.push_back(FinitePerm::from_map(m));
      }
    return ActionExpr::fin_supp(g, std::move(perms));
  }
  if (kind == "translation") return ActionExpr::translation(group_from_json(j.at("group")));
  if (kind == "affine_bs") return ActionExpr::affine_bs(j.at("n").get<int>());
  if (kind == "schreier") {
    if (j.contains("graph")) return ActionExpr::schreier(graph_from_json(j.at("graph")));
    const MarkedGroup g = MarkedGroup::free(j.at("rank").get<int>());
    return ActionExpr::schreier(graph_from_generators(g, elements_from_json(g, j.at("subgroup"))));
  }
  if (kind == "coset") {
    std::vector<ActionExpr::CosetBlock> blocks;
    for (const auto& b : j.at("blocks"))
      blocks.push_back({table_from_json(b.at("table")), b.at("embedding").get<std::vector<Point>>()});
    return ActionExpr::coset(j.at("rank").get<int>(), std::move(blocks));
  }
  if (kind == "conjugate") {
    std::map<Point, Point> pins;
    for (const auto& p : j.at("pins"))
      if (!pins.emplace(p.at(0).get<Point>(), p.at(1).get<Point>()).second)
        throw std::invalid_argument("bijection pins a point twice");
    return ActionExpr::conjugate(action_from_json(j.at("inner")), PinnedBijection(pins));
  }
  if (kind == "disjoint_union") {
    std::vector<ActionExpr> parts;
    for (const auto& p : j.at("parts")) parts.push_back(action_from_json(p));
    return ActionExpr::disjoint_union(std::move(parts));
  }
  if (kind == "free_product") return ActionExpr::free_product(action_from_json(j.at("left")), action_from_json(j.at("right")));
  if (kind == "augment") return ActionExpr::augment(action_from_json(j.at("inner")));
  if (kind == "freeze") {
    const auto pts = j.at("frozen").get<std::vector<Point>>();
    return ActionExpr::freeze(action_from_json(j.at("inner")), std::set<Point>(pts.begin(), pts.end()));
  }
  throw std::invalid_argument("unknown action kind '" + kind + "'");
}

inline json to_json(const ActionConstraint& c) {
  return {{"base", to_json(c.base)}, {"S", to_json(c.base.group(), c.elements)}, {"A", c.points}};
}

inline ActionConstraint constraint_from_json(const json& j) {
  ActionConstraint c{action_from_json(j.at("base")), {}, {}};
  if (j.contains("S")) c.elements = elements_from_json(c.base.group(), j.at("S"));
  if (j.contains("A")) c.points = j.at("A").get<std::vector<Point>>();
  return c;
}

inline json to_json(const Orbit& o) {
  json out{{"orbit", o.points}};
  if (!o.complete) {
    out["exceeded_budget"] = true;
    out["frontier"] = o.frontier;
  }
  return out;
}

/// The explored Schreier graph around a point.
inline std::string schreier_dot(const ActionExpr& act, const Orbit& o) {
  std::ostringstream out;
  out << "digraph orbit {\n";
  const std::unordered_set<Point> inside(o.points.begin(), o.points.end());
  for (Point p : o.points) out << "  " << p << ";\n";
  for (Point p : o.points)
    for (int g = 1; g <= act.active_generators(); ++g) {
      const Point q = act.apply_power(g, 1, p);
      if (inside.count(q)) out << "  " << p << " -> " << q << " [label=\"" << letter_name(act.group(), g) << "\"];\n";
    }
  out << "}\n";
  return out.str();
}

// ------------------------------------------------------------ certificates

inline json to_json(const MarkedGroup& g, const FolnerCertificate& c) {
  json ratios = json::object();
  for (std::size_t i = 0; i < c.omega.size(); ++i) ratios[to_string(g, c.omega[i])] = rational_text(c.ratios[i]);
  return {{"F", c.f}, {"omega", to_json(g, c.omega)}, {"epsilon", rational_text(c.epsilon)}, {"ratios", ratios}};
}

inline FolnerCertificate certificate_from_json(const MarkedGroup& g, const json& j) {
  FolnerCertificate c;
  c.f = j.at("F").get<std::vector<Point>>();
  c.omega = elements_from_json(g, j.at("omega"));
  c.epsilon = parse_rational(j.at("epsilon").get<std::string>());
  for (const Element& e : c.omega) c.ratios.push_back(parse_rational(j.at("ratios").at(to_string(g, e)).get<std::string>()));
  return c;
}

inline json to_json(const BSWitnessReport& r) {
  return {{"n", r.n},
          {"d_max", r.d_max},
          {"homomorphisms_per_degree", r.homomorphisms},
          {"homomorphisms", r.total},
          {"counterexamples", r.counterexamples},
          {"orders_coprime_to_n", r.orders_coprime_to_n}};
}

inline json to_json(const MarkedGroup& g, const Witness& w) {
  json out{{"x", w.x}};
  switch (w.kind) {
    case Witness::Kind::finite_orbit:
      out["kind"] = "finite_orbit";
      out["H"] = to_json(g, w.subgroup);
      out["orbit"] = w.orbit;
      break;
    case Witness::Kind::transitivity:
      out["kind"] = "transitivity";
      out["y"] = w.y;
      out["word"] = to_json(g, *w.word);
      break;
    case Witness::Kind::folner: {
      out["kind"] = "folner";
      out["certificate"] = to_json(g, *w.certificate);
      json reach = json::array();
      for (const auto& [p, e] : w.reach) reach.push_back({p, to_json(g, e)});
      out["reach"] = reach;
      break;
    }
  }
  return out;
}

inline json to_json(const FusionRun& run) {
  const MarkedGroup& g = run.initial.base.group();
  json stages = json::array();
  for (const FusionStage& s : run.stages)
    stages.push_back({{"provider", s.provider},
                      {"constraint", {{"S", to_json(g, s.constraint.elements)}, {"A", s.constraint.points}}},
                      {"witness", to_json(g, s.witness)}});
  json out{{"group", to_json(g)}, {"stages", stages}, {"nested", run.nested}, {"witnesses_hold", run.witnesses_hold}};
  if (run.aborted) out["aborted"] = {{"stage", run.aborted->first}, {"reason", run.aborted->second.reason}, {"detail", run.aborted->second.detail}};
  out["final_action"] = to_json(run.final_action());
  return out;
}

// --------------------------------------------------------------- schedules

/// [{"provider":"finite_orbit","H":["a","b"],"x":0},
///  {"provider":"transitivity","x":0,"y":3},
///  {"provider":"amenable_orbit","x":0,"epsilon":"1/2","S":["a"],"T":["b"]}]
inline std::vector<DensityProvider> schedule_from_json(const MarkedGroup& g, const json& j, std::size_t budget) {
  std::vector<DensityProvider> out;
  for (const auto& item : j) {
    const std::string kind = item.at("provider").get<std::string>();
    const Point x = item.value("x", Point{0});
    if (kind == "finite_orbit") {
      out.push_back(provider_finite_orbit(elements_from_json(g, item.at("H")), x, budget));
    } else if (kind == "transitivity") {
      out.push_back(provider_transitivity(x, item.at("y").get<Point>(), budget));
    } else if (kind == "amenable_orbit") {
      out.push_back(provider_amenable_orbit(x, parse_rational(item.at("epsilon").get<std::string>()),
                                            elements_from_json(g.left(), item.value("S", json::array())),
                                            elements_from_json(g.right(), item.value("T", json::array())), budget));
    } else {
      throw std::invalid_argument("unknown provider '" + kind + "'");
    }
  }
  return out;
}

}  // namespace lerf
