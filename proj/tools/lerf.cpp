#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lerf/lerf.hpp"

using namespace lerf;

namespace {

enum class Format { json, dot, text };

struct RunConfig {
  std::uint64_t seed = 0;
  Format format = Format::json;
  std::string out;
  bool verify = false;
  int jobs = 1;
  std::size_t budget = default_orbit_budget;
};

struct Artifact {
  json data;
  std::string dot;
  int status = 0;
};

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::size_t budget_from_env() {
  const char* raw = std::getenv("LERF_BUDGET");
  if (!raw || !*raw) return default_orbit_budget;
  try {
    const unsigned long long b = std::stoull(raw);
    if (b == 0) throw std::invalid_argument("zero");
    return static_cast<std::size_t>(b);
  } catch (const std::exception&) {
    throw usage_error(std::string("LERF_BUDGET is not a positive integer: ") + raw);
  }
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw usage_error(path + ": " + e.what());
  }
}

std::vector<Point> parse_points(const std::string& text) {
  std::vector<Point> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = detail::trim(item);
    if (item.empty()) continue;
    if (item.find_first_not_of("0123456789") != std::string::npos) throw usage_error("not a point: '" + item + "'");
    out.push_back(std::stoull(item));
  }
  return out;
}

Artifact refusal(const Refusal& r) {
  return {{{"refusal", {{"reason", r.reason}, {"detail", r.detail}}}}, {}, 2};
}

json words(const MarkedGroup& g, std::span<const Element> elems) { return to_json(g, elems); }

void flatten(const json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array() && std::any_of(j.begin(), j.end(), [](const json& e) { return e.is_object(); })) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out << prefix << ": " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
  }
}

std::string render(const Artifact& a, Format f) {
  switch (f) {
    case Format::json: return a.data.dump(2) + "\n";
    case Format::dot:
      if (a.status == 0 && a.dot.empty()) throw usage_error("this command has no DOT output");
      return a.dot.empty() ? a.data.dump(2) + "\n" : a.dot;
    case Format::text: {
      std::ostringstream out;
      json shown = a.data;
      if (shown.is_object()) shown.erase("dot");
      flatten(shown, "", out);
      return out.str();
    }
  }
  return {};
}

// ------------------------------------------------------------------ separate

struct SeparateArgs {
  std::string group = "f2";
  std::string subgroup;
  std::string element;
};

Artifact cmd_separate(const SeparateArgs& args, const RunConfig& cfg) {
  const MarkedGroup g = parse_group(args.group);
  if (g.kind() != MarkedGroup::Kind::free) throw usage_error("separate works in F_n");
  const auto gens = parse_element_list(g, args.subgroup);
  const Element e = parse_element(g, args.element);
  const SubgroupGraph h = graph_from_generators(g, gens);
  CosetTable k = CosetTable::trivial(g.rank());
  try {
    k = separate(h, e.free());
  } catch (const precondition_error& err) {
    Artifact a = refusal({"precondition", err.what()});
    a.data["refusal"]["witness"] = err.witness();
    return a;
  }
  auto transcript_for = [&](const CosetTable& t, bool& ok) {
    json lines = json::array();
    for (const Element& x : gens) {
      const bool fixed = t.stabilizes(x.free());
      ok = ok && fixed;
      lines.push_back("generator " + to_string(g, x) + " of H fixes coset 0: " + (fixed ? "yes" : "NO"));
    }
    const State end = t.read(0, e.free());
    ok = ok && end != 0;
    lines.push_back("element " + to_string(g, e) + " sends coset 0 to " + std::to_string(end) + (end != 0 ? ": not in K" : ": IN K"));
    return lines;
  };
  bool ok = true;
  Artifact a;
  a.data["group"] = g.name();
  a.data["subgroup"] = words(g, gens);
  a.data["element"] = to_string(g, e);
  a.data["graph"] = to_json(h);
  a.data["table"] = to_json(k);
  a.data["degree"] = k.degree();
  a.data["transcript"] = transcript_for(k, ok);
  a.dot = to_dot(k);
  a.data["dot"] = a.dot;
  if (cfg.verify) {
    bool again = true;
    transcript_for(table_from_json(a.data["table"]), again);
    a.data["verified"] = again;
    if (!again) throw std::logic_error("emitted coset table fails its re-check");
  }
  if (!ok) throw std::logic_error("separation transcript failed");
  return a;
}

// ----------------------------------------------------------------- chabauty

struct ChabautyArgs {
  std::string group = "f2";
  std::string subgroup;
  int radius = 2;
  std::string window;
  std::string ball;
};

json agreement(const MarkedGroup& g, const SubgroupHandle& l, const CosetTable& k, std::span<const Element> omega, bool& ok) {
  json rows = json::array();
  for (const Element& w : omega) {
    const bool in_l = l.contains(w);
    const bool in_k = k.stabilizes(w.free());
    ok = ok && in_l == in_k;
    rows.push_back({{"element", to_string(g, w)}, {"in_L", in_l}, {"in_K", in_k}});
  }
  return rows;
}

Artifact cmd_chabauty_approx(const ChabautyArgs& args, const RunConfig& cfg) {
  const MarkedGroup g = parse_group(args.group);
  if (g.kind() != MarkedGroup::Kind::free) throw usage_error("chabauty approx works in F_n");
  const auto gens = parse_element_list(g, args.subgroup);
  const std::vector<Element> omega = args.window.empty() ? ball(g, args.radius) : canonical(parse_element_list(g, args.window));
  const SubgroupHandle l = SubgroupHandle::words(g, gens);
  const SubgroupGraph graph = graph_from_generators(g, gens);
  const CosetTable k = approx_by_finite_index(graph, omega);
  bool ok = true;
  Artifact a;
  a.data["group"] = g.name();
  a.data["subgroup"] = words(g, gens);
  a.data["window"] = words(g, omega);
  a.data["table"] = to_json(k);
  a.data["degree"] = k.degree();
  a.data["transcript"] = agreement(g, l, k, omega, ok);
  a.data["agree"] = ok;
  a.dot = to_dot(k);
  a.data["dot"] = a.dot;
  if (cfg.verify) {
    bool again = true;
    agreement(g, l, table_from_json(a.data["table"]), omega, again);
    a.data["verified"] = again;
  }
  if (!ok) throw std::logic_error("K and L disagree on the window");
  return a;
}

Artifact cmd_chabauty_in_ball(const ChabautyArgs& args, const RunConfig&) {
  if (args.ball.empty()) throw usage_error("--ball is required");
  const ChabautyBall b = ball_from_json(read_json(args.ball));
  const MarkedGroup& g = b.center.ambient();
  const SubgroupHandle k = SubgroupHandle::words(g, parse_element_list(g, args.subgroup));
  json differ = json::array();
  for (const Element& w : b.window)
    if (k.contains(w) != b.center.contains(w)) differ.push_back(to_json(g, w));
  Artifact a;
  a.data["in_ball"] = differ.empty();
  a.data["disagreements"] = differ;
  return a;
}

// -------------------------------------------------------------------- orbit

struct OrbitArgs {
  std::string action;
  Point point = 0;
};

Artifact cmd_orbit(const OrbitArgs& args, const RunConfig& cfg) {
  const ActionExpr act = action_from_json(read_json(args.action));
  const Orbit o = orbit(act, args.point, cfg.budget);
  Artifact a{to_json(o), schreier_dot(act, o), o.complete ? 0 : 2};
  if (!o.complete) a.data["refusal"] = {{"reason", "budget"}, {"detail", "orbit exceeds " + std::to_string(cfg.budget) + " points"}};
  return a;
}

// ---------------------------------------------------------------- amenable

struct FolnerArgs {
  std::string action;
  std::string f;
  std::string omega;
  std::string epsilon = "1/2";
  Point point = 0;
  std::size_t min_size = 1;
};

std::vector<Element> omega_or_generators(const ActionExpr& act, const std::string& text) {
  if (!text.empty()) return parse_element_list(act.group(), text);
  std::vector<Element> out;
  for (int i = 1; i <= act.active_generators(); ++i) out.push_back(generator(act.group(), i));
  return out;
}

bool recheck(const ActionExpr& act, const json& cert_json) {
  const FolnerCertificate c = certificate_from_json(act.group(), cert_json);
  auto again = folner_check(act, c.f, c.omega, c.epsilon);
  return again && again->ratios == c.ratios;
}

Artifact cmd_folner_check(const FolnerArgs& args, const RunConfig&) {
  const ActionExpr act = action_from_json(read_json(args.action));
  const auto omega = omega_or_generators(act, args.omega);
  const auto f = parse_points(args.f);
  if (f.empty()) throw usage_error("--F must list at least one point");
  const Rational eps = parse_rational(args.epsilon);
  FolnerCertificate c{normalize_set(f), omega, eps, folner_ratios(act, f, omega)};
  Artifact a;
  a.data["folner"] = c.worst() < eps;
  a.data["certificate"] = to_json(act.group(), c);
  return a;
}

Artifact cmd_folner_search(const FolnerArgs& args, const RunConfig& cfg) {
  const ActionExpr act = action_from_json(read_json(args.action));
  const auto omega = omega_or_generators(act, args.omega);
  FolnerSearchOptions opts;
  opts.min_size = args.min_size;
  auto found = folner_search(act, args.point, omega, parse_rational(args.epsilon), cfg.budget, opts);
  if (!found) return refusal(found.refusal());
  Artifact a;
  a.data["certificate"] = to_json(act.group(), *found);
  if (cfg.verify) {
    a.data["verified"] = recheck(act, a.data["certificate"]);
    if (!a.data["verified"].get<bool>()) throw std::logic_error("emitted certificate fails folner_check");
  }
  return a;
}

struct CombineArgs {
  std::string sigma;
  std::string tau;
  Point point = 0;
  std::string epsilon = "1/2";
  std::string s, t, a;
};

Artifact cmd_combine(const CombineArgs& args, const RunConfig& cfg) {
  const ActionExpr sigma = action_from_json(read_json(args.sigma));
  const ActionExpr tau = action_from_json(read_json(args.tau));
  const auto s = omega_or_generators(sigma, args.s);
  const auto t = omega_or_generators(tau, args.t);
  const auto pts = parse_points(args.a);
  const Rational eps = parse_rational(args.epsilon);
  auto r = free_product_combine(sigma, tau, args.point, eps, s, t, pts, cfg.budget);
  if (!r) return refusal(r.refusal());
  const ActionExpr joint = ActionExpr::free_product(r->phi, r->psi);
  Artifact a;
  json& d = a.data;
  d["case"] = r->which == CombineResult::Case::finite_orbits ? "finite_orbits" : "infinite_orbit";
  d["swapped"] = r->swapped;
  d["B"] = r->b;
  d["C"] = r->c;
  d["D"] = r->d;
  d["frozen"] = r->frozen;
  if (r->reach) d["reach"] = {{"z", to_json(joint.group(), r->reach->z)}, {"y", r->reach->y}, {"trace", r->reach->trace}};
  json xi = json::array();
  for (auto [p, q] : r->xi.mapping())
    if (p < q) xi.push_back({p, q});
  d["xi"] = xi;
  d["checks"] = r->checks;
  d["phi"] = to_json(r->phi);
  d["psi"] = to_json(r->psi);
  d["certificate"] = to_json(joint.group(), r->certificate);
  if (cfg.verify) {
    const ActionExpr rebuilt = ActionExpr::free_product(action_from_json(d["phi"]), action_from_json(d["psi"]));
    d["verified"] = recheck(rebuilt, d["certificate"]);
    if (!d["verified"].get<bool>()) throw std::logic_error("emitted certificate fails folner_check");
  }
  return a;
}

struct WitnessArgs {
  int n = 2;
  int dmax = 4;
};

Artifact cmd_bs_witness(const WitnessArgs& args, const RunConfig& cfg) {
  const BSWitnessReport rep = bs_nonseparability_witness(args.n, args.dmax, cfg.jobs);
  Artifact a{to_json(rep), {}, 0};
  if (cfg.verify) {
    const json again = to_json(bs_nonseparability_witness(args.n, args.dmax, 1));
    a.data["verified"] = again == a.data;
  }
  return a;
}

// ---------------------------------------------------------------- generic

struct GenericArgs {
  std::string schedule;
  std::string group;
  std::string initial;
  int stages = -1;
  int random = 0;
};

ActionExpr default_action(const MarkedGroup& g) {
  switch (g.kind()) {
    case MarkedGroup::Kind::free:
      if (g.rank() == 1) return ActionExpr::translation(g);
      return ActionExpr::schreier(graph_from_generators(g.rank(), std::vector<FreeWord>{}));
    case MarkedGroup::Kind::free_infinite: return ActionExpr::trivial(g);
    case MarkedGroup::Kind::baumslag_solitar: return ActionExpr::affine_bs(g.bs_parameter());
    case MarkedGroup::Kind::free_product: return ActionExpr::free_product(default_action(g.left()), default_action(g.right()));
  }
  throw std::logic_error("unknown group kind");
}

json random_schedule(const MarkedGroup& g, int stages, std::uint64_t seed) {
  if (g.kind() != MarkedGroup::Kind::free) throw usage_error("--random schedules are generated for F_n");
  std::mt19937_64 rng(seed);
  auto pick = [&](std::uint64_t n) { return static_cast<std::uint64_t>(rng() % n); };
  json out = json::array();
  for (int i = 0; i < stages; ++i) {
    json h = json::array();
    const std::uint64_t count = 1 + pick(2);
    for (std::uint64_t j = 0; j < count; ++j) {
      std::vector<Letter> letters;
      const std::uint64_t len = 1 + pick(3);
      for (std::uint64_t k = 0; k < len; ++k) {
        const Letter gen = static_cast<Letter>(1 + pick(static_cast<std::uint64_t>(g.rank())));
        letters.push_back(pick(2) ? gen : -gen);
      }
      Element e = from_letters(g, letters);
      if (is_identity(g, e)) e = generator(g, 1);
      h.push_back(to_json(g, e));
    }
    out.push_back({{"provider", "finite_orbit"}, {"H", h}, {"x", pick(8)}});
  }
  return out;
}

Artifact cmd_generic_run(const GenericArgs& args, const RunConfig& cfg) {
  json items;
  std::optional<MarkedGroup> g;
  std::optional<ActionConstraint> initial;
  if (!args.group.empty()) g = parse_group(args.group);
  if (!args.schedule.empty()) {
    const json file = read_json(args.schedule);
    if (file.is_object()) {
      if (file.contains("group")) g = group_from_json(file.at("group"));
      if (file.contains("initial")) initial = constraint_from_json(file.at("initial"));
      items = file.at("schedule");
    } else {
      items = file;
    }
  } else if (args.random > 0) {
    if (!g) throw usage_error("--random needs --group");
    items = random_schedule(*g, args.random, cfg.seed);
  } else {
    throw usage_error("give --schedule or --random");
  }
  if (!args.initial.empty()) initial = constraint_from_json(read_json(args.initial));
  if (initial) g = initial->base.group();
  if (!g) throw usage_error("the schedule names no group; pass --group");
  if (!initial) initial = ActionConstraint{default_action(*g), {}, {}};
  if (!(initial->base.group() == *g)) throw usage_error("initial action and schedule act in different groups");
  if (!items.is_array()) throw usage_error("a schedule is a list of providers");
  if (args.stages >= 0 && static_cast<std::size_t>(args.stages) < items.size())
    items.erase(items.begin() + args.stages, items.end());
  const auto schedule = schedule_from_json(*g, items, cfg.budget);
  const FusionRun run = run_fusion(schedule, *initial, cfg.budget);
  Artifact a{to_json(run), {}, run.aborted ? 2 : 0};
  a.data["seed"] = cfg.seed;
  a.data["verified"] = run.verified();
  if (run.aborted) a.data["refusal"] = {{"reason", run.aborted->second.reason}, {"detail", run.aborted->second.detail}};
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subgroup separability, Chabauty approximation, Folner sets and generic actions"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string format = "json";
  std::optional<std::size_t> budget;
  app.add_option("--seed", cfg.seed, "seed for randomized schedules");
  app.add_option("--format", format, "json, dot or text")->check(CLI::IsMember({"json", "dot", "text"}));
  app.add_option("--out", cfg.out, "write the artifact here instead of stdout");
  app.add_flag("--verify", cfg.verify, "re-validate emitted certificates");
  app.add_option("--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--budget", budget, "orbit and search budget (default: LERF_BUDGET or 10000)")->check(CLI::PositiveNumber);

  std::function<Artifact()> run;
  auto sub = [&](CLI::App* parent, const std::string& name, const std::string& help) {
    CLI::App* s = parent->add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  SeparateArgs sep;
  {
    CLI::App* s = sub(&app, "separate", "finite-index K containing H and missing g");
    s->add_option("--group", sep.group);
    s->add_option("--subgroup", sep.subgroup, "comma separated generators")->required();
    s->add_option("--element", sep.element)->required();
    s->callback([&] { run = [&] { return cmd_separate(sep, cfg); }; });
  }

  ChabautyArgs cha;
  {
    CLI::App* c = sub(&app, "chabauty", "Chabauty balls and finite-index approximation");
    c->require_subcommand(1);
    CLI::App* ap = sub(c, "approx", "finite-index K agreeing with L on a window");
    ap->add_option("--group", cha.group);
    ap->add_option("--subgroup", cha.subgroup)->required();
    ap->add_option("--radius", cha.radius)->check(CLI::NonNegativeNumber);
    ap->add_option("--window", cha.window, "comma separated words; overrides --radius");
    ap->callback([&] { run = [&] { return cmd_chabauty_approx(cha, cfg); }; });
    CLI::App* ib = sub(c, "in-ball", "whether <words> lies in a ball");
    ib->add_option("--ball", cha.ball)->required();
    ib->add_option("--subgroup", cha.subgroup)->required();
    ib->callback([&] { run = [&] { return cmd_chabauty_in_ball(cha, cfg); }; });
  }

  OrbitArgs orb;
  auto orbit_options = [&](CLI::App* o) {
    o->add_option("--action", orb.action)->required();
    o->add_option("--point", orb.point);
    o->callback([&] { run = [&] { return cmd_orbit(orb, cfg); }; });
  };
  CLI::App* actions = sub(&app, "actions", "actions on N");
  actions->require_subcommand(1);
  orbit_options(sub(actions, "orbit", "orbit of a point"));
  orbit_options(sub(&app, "orbit", "orbit of a point"));

  FolnerArgs fol;
  CombineArgs com;
  WitnessArgs wit;
  auto check_options = [&](CLI::App* c) {
    c->add_option("--action", fol.action)->required();
    c->add_option("--F", fol.f, "comma separated points")->required();
    c->add_option("--omega", fol.omega, "comma separated words (default: generators)");
    c->add_option("--epsilon", fol.epsilon);
    c->callback([&] { run = [&] { return cmd_folner_check(fol, cfg); }; });
  };
  auto search_options = [&](CLI::App* c) {
    c->add_option("--action", fol.action)->required();
    c->add_option("--point", fol.point);
    c->add_option("--omega", fol.omega);
    c->add_option("--epsilon", fol.epsilon);
    c->add_option("--min-size", fol.min_size);
    c->callback([&] { run = [&] { return cmd_folner_search(fol, cfg); }; });
  };
  auto combine_options = [&](CLI::App* c) {
    c->add_option("--sigma", com.sigma)->required();
    c->add_option("--tau", com.tau)->required();
    c->add_option("--point", com.point);
    c->add_option("--epsilon", com.epsilon);
    c->add_option("--S", com.s, "words of the first factor (default: generators)");
    c->add_option("--T", com.t, "words of the second factor (default: generators)");
    c->add_option("--A", com.a, "comma separated points");
    c->callback([&] { run = [&] { return cmd_combine(com, cfg); }; });
  };
  auto witness_options = [&](CLI::App* c) {
    c->add_option("--n", wit.n)->check(CLI::Range(2, 64));
    c->add_option("--dmax", wit.dmax)->check(CLI::Range(1, 7));
    c->callback([&] { run = [&] { return cmd_bs_witness(wit, cfg); }; });
  };
  CLI::App* amen = sub(&app, "amen", "Folner sets and free product combination");
  amen->require_subcommand(1);
  check_options(sub(amen, "folner-check", "exact Folner ratios of a set"));
  search_options(sub(amen, "folner-search", "search an orbit for a Folner set"));
  combine_options(sub(amen, "combine", "free product combination"));
  witness_options(sub(amen, "bs-witness", "homomorphisms BS(1,n) -> S_d"));
  check_options(sub(&app, "folner-check", "exact Folner ratios of a set"));
  search_options(sub(&app, "folner-search", "search an orbit for a Folner set"));
  combine_options(sub(&app, "combine", "free product combination"));
  witness_options(sub(&app, "bs-witness", "homomorphisms BS(1,n) -> S_d"));

  GenericArgs gen;
  {
    CLI::App* g = sub(&app, "generic", "fusion of density providers");
    g->require_subcommand(1);
    CLI::App* r = sub(g, "run", "run a schedule");
    r->add_option("--schedule", gen.schedule);
    r->add_option("--group", gen.group);
    r->add_option("--initial", gen.initial, "constraint JSON");
    r->add_option("--stages", gen.stages, "use only the first stages")->check(CLI::NonNegativeNumber);
    r->add_option("--random", gen.random, "random finite-orbit schedule of this length, from --seed");
    r->callback([&] { run = [&] { return cmd_generic_run(gen, cfg); }; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  Artifact result;
  try {
    cfg.format = format == "dot" ? Format::dot : format == "text" ? Format::text : Format::json;
    cfg.budget = budget ? *budget : budget_from_env();
    result = run();
  } catch (const precondition_error& e) {
    result = refusal({"precondition", e.what()});
    result.data["refusal"]["witness"] = e.witness();
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return 1;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::string text;
  try {
    text = render(result, cfg.format);
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << cfg.out << "\n";
      return 1;
    }
    out << text;
  }
  if (result.status == 2) std::cerr << "refused: " << result.data["refusal"]["reason"].get<std::string>() << "\n";
  return result.status;
}
