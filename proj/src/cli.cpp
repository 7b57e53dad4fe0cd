#include "sheaflens/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sheaflens/cech.hpp"
#include "sheaflens/filtration.hpp"
#include "sheaflens/pointcloud.hpp"

namespace sheaflens::cli {

using nlohmann::json;

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

namespace {

[[noreturn]] void schema(const std::string& what) { fail(ErrorCode::schema_error, what); }

PseudometricSpace parse_stalk(const json& j) {
  std::string kind = j.value("kind", "");
  if (kind == "onepoint") return OnePointSpace{};
  if (kind == "euclidean") {
    EuclideanSpace e;
    e.dim = j.value("dim", 1);
    std::string metric = j.value("metric", "linf");
    if (metric == "linf")
      e.metric = Metric::linf;
    else if (metric == "l2")
      e.metric = Metric::l2;
    else
      schema("unknown metric '" + metric + "'");
    return e;
  }
  if (kind == "table") {
    FiniteTableSpace t;
    for (const auto& l : j.at("labels")) t.labels.push_back(l.get<std::string>());
    for (const auto& row : j.at("dist"))
      for (const auto& x : row) t.dist.push_back(x.get<double>());
    return t;
  }
  schema("unknown stalk kind '" + kind + "'");
}

MapBody parse_restriction(const json& j) {
  std::string kind = j.value("kind", "");
  if (kind == "collapse") return CollapseMap{};
  if (kind == "matrix") {
    LinearMap m;
    const auto& rows = j.at("data");
    m.rows = static_cast<int>(rows.size());
    for (const auto& row : rows) {
      if (m.rows && m.cols == 0) m.cols = static_cast<int>(row.size());
      if (static_cast<int>(row.size()) != m.cols) schema("ragged matrix");
      for (const auto& x : row) m.a.push_back(x.get<double>());
    }
    return m;
  }
  if (kind == "table") {
    TableMap t;
    for (const auto& x : j.at("map")) t.to.push_back(x.get<int>());
    return t;
  }
  schema("unknown restriction kind '" + kind + "'");
}

StalkValue parse_value(const json& j, const PseudometricSpace& stalk) {
  if (std::holds_alternative<OnePointSpace>(stalk)) {
    if (!j.is_null()) schema("one-point stalk takes a null value");
    return std::monostate{};
  }
  if (const auto* e = std::get_if<EuclideanSpace>(&stalk)) {
    if (!j.is_array()) schema("euclidean value must be an array");
    std::vector<double> v;
    for (const auto& x : j) v.push_back(x.get<double>());
    if (static_cast<int>(v.size()) != e->dim) schema("value dimension mismatch");
    return v;
  }
  const auto& t = std::get<FiniteTableSpace>(stalk);
  if (!j.is_string()) schema("table value must be a label string");
  std::string label = j.get<std::string>();
  for (std::size_t i = 0; i < t.labels.size(); ++i)
    if (t.labels[i] == label) return static_cast<int>(i);
  schema("unknown table label '" + label + "'");
}

json value_to_json(const PseudometricSpace& stalk, const StalkValue& v) {
  if (std::holds_alternative<OnePointSpace>(stalk)) return nullptr;
  if (std::holds_alternative<EuclideanSpace>(stalk)) {
    json arr = json::array();
    for (double x : std::get<std::vector<double>>(v)) arr.push_back(x);
    return arr;
  }
  return std::get<FiniteTableSpace>(stalk).labels[std::get<int>(v)];
}

std::pair<int, int> parse_edge_key(const std::string& key) {
  auto gt = key.find('>');
  if (gt == std::string::npos) schema("restriction key must look like 'V>U'");
  try {
    return {std::stoi(key.substr(0, gt)), std::stoi(key.substr(gt + 1))};
  } catch (const std::exception&) {
    schema("restriction key must hold two open ids");
  }
}

}  // namespace

ProblemFile parse_problem(const json& j) {
  ProblemFile p;
  if (!j.is_object()) schema("problem file must be a JSON object");
  p.version = j.value("version", "1");

  if (j.contains("space") == j.contains("poset"))
    schema("exactly one of 'space' or 'poset' is required");

  if (j.contains("space")) {
    const auto& sp = j.at("space");
    for (const auto& pt : sp.at("points")) p.points.push_back(pt.get<std::string>());
    for (const auto& open : sp.at("opens")) {
      std::vector<std::string> labels;
      for (const auto& l : open) labels.push_back(l.get<std::string>());
      p.opens.push_back(std::move(labels));
    }
    p.space = std::make_shared<FiniteSpace>(FiniteSpace::explicit_topology(p.points, p.opens));
  } else {
    p.from_poset = true;
    const auto& ps = j.at("poset");
    for (const auto& pt : ps.at("points")) p.points.push_back(pt.get<std::string>());
    for (const auto& pair : ps.at("leq"))
      p.leq.push_back({pair.at(0).get<std::string>(), pair.at(1).get<std::string>()});
    p.cap = ps.value("cap", 4096);
    p.poset_convention = ps.value("convention", "lower");
    OrderConvention conv =
        p.poset_convention == "upper" ? OrderConvention::upper_sets : OrderConvention::lower_sets;
    p.space = std::make_shared<FiniteSpace>(
        FiniteSpace::alexandrov(p.points, p.leq, static_cast<std::size_t>(p.cap), conv));
  }

  if (j.contains("options")) {
    const auto& o = j.at("options");
    p.field = o.value("field", "f2");
    p.objective = o.value("objective", "linf");
    p.tol = o.value("tol", 1e-6);
    p.cap = o.value("cap", p.cap);
  }
  if (p.field != "f2" && p.field != "q") schema("field must be 'f2' or 'q'");
  if (p.objective != "linf" && p.objective != "l2") schema("objective must be 'linf' or 'l2'");

  // Sheaf block.
  if (!j.contains("sheaf")) schema("missing 'sheaf' block");
  const auto& sh = j.at("sheaf");
  std::vector<PseudometricSpace> stalks(p.space->open_count(), OnePointSpace{});
  std::vector<char> have_stalk(p.space->open_count(), 0);
  for (const auto& [key, block] : sh.at("stalks").items()) {
    int id = -1;
    try {
      id = std::stoi(key);
    } catch (const std::exception&) {
      schema("stalk keys are open ids");
    }
    if (id < 0 || id >= p.space->open_count()) schema("stalk id out of range: " + key);
    p.stalk_blocks[id] = block;
    stalks[id] = parse_stalk(block);
    have_stalk[id] = 1;
  }
  for (int id = 0; id < p.space->open_count(); ++id)
    if (!have_stalk[id] && id != p.space->empty_id())
      schema("missing stalk for open " + std::to_string(id) + " " + p.space->open_label(id));

  std::map<std::pair<int, int>, MapBody> generators;
  if (sh.contains("restrictions"))
    for (const auto& [key, block] : sh.at("restrictions").items()) {
      auto edge = parse_edge_key(key);
      p.restriction_blocks[edge] = block;
      generators[edge] = parse_restriction(block);
    }
  // Collapse maps into one-point stalks may be left implicit.
  for (const auto& e : p.space->hasse_edges())
    if (!generators.count({e.sup, e.sub}) && std::holds_alternative<OnePointSpace>(stalks[e.sub]))
      generators[{e.sup, e.sub}] = CollapseMap{};

  p.sheaf = std::make_shared<MetricSheaf>(MetricSheaf::build(p.space, stalks, generators, 1e-9));

  // Assignment block.
  p.assignment = Assignment::empty(*p.sheaf);
  if (j.contains("assignment")) {
    const auto& as = j.at("assignment");
    std::vector<int> declared;
    if (as.contains("values"))
      for (const auto& [key, block] : as.at("values").items()) {
        int id = -1;
        try {
          id = std::stoi(key);
        } catch (const std::exception&) {
          schema("assignment keys are open ids");
        }
        if (id < 0 || id >= p.space->open_count()) schema("assignment id out of range: " + key);
        p.value_blocks[id] = block;
        p.assignment.set(id, parse_value(block, p.sheaf->stalk(id)), true);
        declared.push_back(id);
      }
    if (as.contains("support")) {
      p.support.clear();
      for (const auto& s : as.at("support")) p.support.push_back(s.get<int>());
      for (int id : declared) p.assignment.support[id] = 0;
      for (int id : p.support) {
        if (id < 0 || id >= p.space->open_count()) schema("support id out of range");
        if (!p.assignment.values[id]) schema("support id " + std::to_string(id) + " has no value");
        p.assignment.support[id] = 1;
      }
    } else {
      p.support = declared;
    }
  }
  return p;
}

ProblemFile parse_problem_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    schema(std::string("invalid JSON: ") + e.what());
  }
  return parse_problem(j);
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) schema("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str());
}

json serialize_problem(const ProblemFile& p) {
  json j;
  j["version"] = p.version;
  if (p.from_poset) {
    json ps;
    ps["points"] = p.points;
    json pairs = json::array();
    for (const auto& [a, b] : p.leq) pairs.push_back(json::array({a, b}));
    ps["leq"] = pairs;
    ps["cap"] = p.cap;
    ps["convention"] = p.poset_convention;
    j["poset"] = ps;
  } else {
    json sp;
    sp["points"] = p.points;
    json opens = json::array();
    for (const auto& o : p.opens) opens.push_back(o);
    sp["opens"] = opens;
    j["space"] = sp;
  }
  json stalks;
  for (const auto& [id, block] : p.stalk_blocks) stalks[std::to_string(id)] = block;
  json restrictions;
  for (const auto& [edge, block] : p.restriction_blocks)
    restrictions[std::to_string(edge.first) + ">" + std::to_string(edge.second)] = block;
  j["sheaf"] = json{{"stalks", stalks}, {"restrictions", restrictions}};
  json values;
  for (const auto& [id, block] : p.value_blocks) values[std::to_string(id)] = block;
  j["assignment"] = json{{"values", values}, {"support", p.support}};
  j["options"] =
      json{{"field", p.field}, {"objective", p.objective}, {"tol", p.tol}, {"cap", p.cap}};
  return j;
}

namespace {

struct Flags {
  bool extend = false;
  bool persist = false;
  bool plot_data = false;
  bool json_out = false;
  bool exact = false;
  std::string field;
  double tol = -1.0;
  int cap = -1;
  std::vector<std::string> positional;
};

Flags parse_flags(const std::vector<std::string>& args, std::size_t from) {
  Flags f;
  for (std::size_t i = from; i < args.size(); ++i) {
    const std::string& a = args[i];
    auto need_value = [&](const char* name) -> std::string {
      if (i + 1 >= args.size()) schema(std::string(name) + " needs a value");
      return args[++i];
    };
    if (a == "--extend")
      f.extend = true;
    else if (a == "--persist")
      f.persist = true;
    else if (a == "--plot-data")
      f.plot_data = true;
    else if (a == "--json")
      f.json_out = true;
    else if (a == "--exact")
      f.exact = true;
    else if (a == "--field")
      f.field = need_value("--field");
    else if (a == "--tol")
      f.tol = std::stod(need_value("--tol"));
    else if (a == "--cap")
      f.cap = std::stoi(need_value("--cap"));
    else if (!a.empty() && a[0] == '-')
      schema("unknown flag " + a);
    else
      f.positional.push_back(a);
  }
  if (f.exact) f.field = "q";
  return f;
}

int env_threads() {
  const char* v = std::getenv("SHEAFLENS_THREADS");
  if (!v) return 1;
  int n = std::atoi(v);
  return n > 0 ? n : 1;
}

ExtendOptions make_extend_options(const ProblemFile& p, const Flags& f) {
  ExtendOptions o;
  o.objective = p.objective == "l2" ? ExtendObjective::l2 : ExtendObjective::linf;
  o.tolerance = f.tol > 0 ? f.tol : p.tol;
  o.threads = env_threads();
  return o;
}

Assignment totalize(const ProblemFile& p, const Flags& f, json* report) {
  if (p.assignment.is_total() && !f.extend) return p.assignment;
  if (!f.extend)
    fail(ErrorCode::partial_assignment, "assignment is partial; pass --extend to optimize");
  ExtensionResult res = extend_minimize(*p.sheaf, p.assignment, make_extend_options(p, f));
  if (report) {
    (*report)["extension"] = {
        {"achieved_radius", res.achieved_radius},
        {"achieved_objective", res.achieved_objective},
        {"iterations", res.diagnostics.iterations},
        {"refined", res.diagnostics.refined},
    };
    json values;
    for (int id = 0; id < p.space->open_count(); ++id)
      values[std::to_string(id)] = value_to_json(p.sheaf->stalk(id), *res.assignment.values[id]);
    (*report)["extension"]["assignment"] = values;
  }
  return res.assignment;
}

json bars_to_json(const PersistenceDiagram& d, bool exact) {
  json arr = json::array();
  for (const auto& b : d.bars) {
    json bar;
    bar["degree"] = b.degree;
    if (exact) {
      bar["birth"] = b.birth;
      bar["death"] = std::isinf(b.death) ? json("inf") : json(b.death);
    } else {
      bar["birth"] = b.birth;
      bar["death"] = std::isinf(b.death) ? json("inf") : json(b.death);
    }
    bar["multiplicity"] = b.multiplicity;
    arr.push_back(bar);
  }
  return arr;
}

std::string bars_to_csv(const PersistenceDiagram& d) {
  std::ostringstream os;
  os << "degree,birth,death,multiplicity\n";
  for (const auto& b : d.bars)
    os << b.degree << ',' << format_number(b.birth) << ','
       << (std::isinf(b.death) ? "inf" : format_number(b.death)) << ',' << b.multiplicity << '\n';
  return os.str();
}

template <class F>
PersistenceDiagram filtration_diagram(const CoarseningFiltration& filt, int degree_cap) {
  return barcode(persistence_module_from_filtration<F>(filt, degree_cap));
}

PersistenceDiagram filtration_diagram_for_field(const CoarseningFiltration& filt, int degree_cap,
                                                const std::string& field) {
  return field == "q" ? filtration_diagram<Rat>(filt, degree_cap)
                      : filtration_diagram<F2>(filt, degree_cap);
}

constexpr int kDegreeCap = 2;

RunResult cmd_radius(const Flags& f) {
  if (f.positional.size() != 1) schema("radius takes exactly one problem file");
  ProblemFile p = load_problem(f.positional[0]);
  RunResult out;
  Assignment a = totalize(p, f, &out.report);

  auto thresholds = critical_thresholds(*p.sheaf, a);
  double radius = 0.0;
  for (const auto& t : thresholds) radius = std::max(radius, t.value);
  double k = sheaf_lipschitz(*p.sheaf);

  out.report["radius"] = radius;
  out.report["radius_l2"] = consistency_radius_l2(*p.sheaf, a);
  out.report["diameter"] = consistency_diameter(*p.sheaf, a);
  out.report["lipschitz"] = k;
  out.report["section_lower_bound"] = radius / (1.0 + k);
  json th = json::array();
  for (const auto& t : thresholds)
    th.push_back({{"U", p.space->open_label(t.sub)},
                  {"V", p.space->open_label(t.sup)},
                  {"value", t.value}});
  out.report["thresholds"] = th;

  std::ostringstream os;
  os << "consistency radius   " << format_number(radius) << "\n"
     << "radius (2-norm)      " << format_number(out.report["radius_l2"].get<double>()) << "\n"
     << "diameter             " << format_number(out.report["diameter"].get<double>()) << "\n"
     << "Lipschitz constant K " << format_number(k) << "\n"
     << "section bound c/(1+K) " << format_number(radius / (1.0 + k)) << "\n"
     << "critical thresholds\n";
  for (const auto& t : thresholds)
    os << "  " << p.space->open_label(t.sub) << " in " << p.space->open_label(t.sup) << "  "
       << format_number(t.value) << "\n";
  out.text = os.str();
  return out;
}

RunResult cmd_filtration(const Flags& f) {
  if (f.positional.size() != 1) schema("filtration takes exactly one problem file");
  ProblemFile p = load_problem(f.positional[0]);
  std::string field = f.field.empty() ? p.field : f.field;
  RunResult out;
  Assignment a = totalize(p, f, &out.report);

  CoarseningFiltration filt = consistency_filtration(*p.sheaf, a);
  out.report["breakpoints"] = filt.breakpoints;
  json covers = json::array();
  for (const auto& c : filt.covers) {
    json cover = json::array();
    for (int id : c.members) cover.push_back(p.space->open_label(id));
    covers.push_back(cover);
  }
  out.report["covers"] = covers;

  json ranks = json::array();
  for (const auto& c : filt.covers) {
    std::vector<int> r;
    if (field == "q") {
      auto h = cech_cohomology<Rat>(c, kDegreeCap);
      r = h.ranks;
    } else {
      auto h = cech_cohomology<F2>(c, kDegreeCap);
      r = h.ranks;
    }
    ranks.push_back(r);
  }
  out.report["cohomology_ranks"] = ranks;

  PersistenceDiagram diagram;
  if (f.persist || f.plot_data) {
    diagram = filtration_diagram_for_field(filt, kDegreeCap, field);
    out.report["barcode"] = bars_to_json(diagram, f.exact);
  }
  if (f.plot_data) {
    out.text = bars_to_csv(diagram);
    return out;
  }

  std::ostringstream os;
  os << "breakpoints ";
  for (double t : filt.breakpoints) os << format_number(t) << ' ';
  os << "\ncovers\n";
  for (std::size_t i = 0; i < filt.covers.size(); ++i) {
    os << "  (" << format_number(i == 0 ? 0.0 : filt.breakpoints[i - 1]) << ", "
       << (i < filt.breakpoints.size() ? format_number(filt.breakpoints[i]) : "inf") << "]  {";
    for (std::size_t k = 0; k < filt.covers[i].members.size(); ++k)
      os << (k ? ", " : " ") << p.space->open_label(filt.covers[i].members[k]);
    os << " }  ranks";
    for (int r : ranks[i].get<std::vector<int>>()) os << ' ' << r;
    os << "\n";
  }
  if (f.persist)
    for (const auto& b : diagram.bars)
      os << "bar degree " << b.degree << "  [" << format_number(b.birth) << ", "
         << (std::isinf(b.death) ? "inf" : format_number(b.death)) << ") x" << b.multiplicity
         << "\n";
  out.text = os.str();
  return out;
}

RunResult cmd_pointcloud(const Flags& f) {
  if (f.positional.size() != 1) schema("pointcloud takes exactly one cloud file");
  const std::string& path = f.positional[0];
  PointCloud cloud = path.size() > 5 && path.substr(path.size() - 5) == ".json"
                         ? PointCloud::from_json_file(path)
                         : PointCloud::from_csv_file(path);
  int cap = f.cap > 0 ? f.cap : kDefaultCloudCap;
  std::string field = f.field.empty() ? "f2" : f.field;

  CloudSheafBundle bundle = build_cloud_sheaf(cloud, cap);
  CoarseningFiltration filt = cloud_consistency_filtration(bundle);
  PersistenceDiagram pipeline = filtration_diagram_for_field(filt, 1, field);
  PersistenceDiagram oracle = field == "q" ? barcode(cech_oracle_module<Rat>(cloud, 1, cap))
                                           : barcode(cech_oracle_module<F2>(cloud, 1, cap));
  bool equal = diagrams_equal(pipeline, oracle, 1e-9);

  RunResult out;
  out.report["breakpoints"] = filt.breakpoints;
  out.report["pipeline"] = bars_to_json(pipeline, f.exact);
  out.report["oracle"] = bars_to_json(oracle, f.exact);
  out.report["equal"] = equal;

  if (f.plot_data) {
    out.text = bars_to_csv(pipeline);
    return out;
  }
  std::ostringstream os;
  os << "pipeline bars\n" << bars_to_csv(pipeline) << "oracle bars\n" << bars_to_csv(oracle);
  os << "barcodes equal: " << (equal ? "yes" : "no") << "\n";
  out.text = os.str();
  return out;
}

RunResult cmd_interleave(const Flags& f) {
  if (f.positional.size() != 2) schema("interleave takes two problem files");
  ProblemFile pa = load_problem(f.positional[0]);
  ProblemFile pb = load_problem(f.positional[1]);
  if (!pa.space->same_space(*pb.space))
    fail(ErrorCode::space_mismatch, "the two problems live on different spaces");
  std::string field = f.field.empty() ? pa.field : f.field;

  RunResult out;
  json extension_report;
  Assignment a = totalize(pa, f, &extension_report);
  Assignment b = totalize(pb, f, nullptr);

  CoarseningFiltration fa = consistency_filtration(*pa.sheaf, a);
  CoarseningFiltration fb = consistency_filtration(*pb.sheaf, b);
  double bound = interleaving_upper_bound(fa, fb);

  PersistenceDiagram da = filtration_diagram_for_field(fa, kDegreeCap, field);
  PersistenceDiagram db = filtration_diagram_for_field(fb, kDegreeCap, field);

  json bn;
  bool stable = true;
  for (int deg = 0; deg <= kDegreeCap; ++deg) {
    double d = bottleneck_degree(da, db, deg);
    bn[std::to_string(deg)] = d;
    if (d > bound + 1e-9) stable = false;
  }
  out.report["interleaving_upper_bound"] =
      std::isinf(bound) ? json("inf") : json(bound);
  out.report["bottleneck"] = bn;
  out.report["stability_ok"] = stable;

  std::ostringstream os;
  os << "interleaving upper bound " << (std::isinf(bound) ? "inf" : format_number(bound)) << "\n";
  for (auto& [deg, d] : bn.items())
    os << "bottleneck degree " << deg << "  " << format_number(d.get<double>()) << "\n";
  os << "bottleneck <= bound: " << (stable ? "yes" : "no") << "\n";
  out.text = os.str();
  return out;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::schema_error:
    case ErrorCode::missing_empty_or_whole:
    case ErrorCode::not_closed_under_union:
    case ErrorCode::not_closed_under_intersection:
    case ErrorCode::stalk_shape_mismatch:
    case ErrorCode::invalid_pseudometric:
    case ErrorCode::commutativity_violation:
      return 2;
    case ErrorCode::partial_assignment:
      return 3;
    case ErrorCode::cap_exceeded:
      return 4;
    case ErrorCode::space_mismatch:
      return 5;
    default:
      return 1;
  }
}

}  // namespace

RunResult run(const std::vector<std::string>& args) {
  try {
    if (args.empty()) schema("usage: sheaflens <radius|filtration|pointcloud|interleave> ...");
    const std::string& cmd = args[0];
    Flags f = parse_flags(args, 1);
    RunResult out;
    if (cmd == "radius")
      out = cmd_radius(f);
    else if (cmd == "filtration")
      out = cmd_filtration(f);
    else if (cmd == "pointcloud")
      out = cmd_pointcloud(f);
    else if (cmd == "interleave")
      out = cmd_interleave(f);
    else
      schema("unknown command '" + cmd + "'");
    if (f.json_out) out.text = out.report.dump(2) + "\n";
    return out;
  } catch (const SheafError& e) {
    RunResult out;
    out.exit_code = exit_code_for(e.code());
    out.report = json{{"error", error_code_name(e.code())}, {"message", e.what()}};
    out.text = out.report.dump(2) + "\n";
    return out;
  } catch (const std::exception& e) {
    RunResult out;
    out.exit_code = 1;
    out.report = json{{"error", "Unexpected"}, {"message", e.what()}};
    out.text = out.report.dump(2) + "\n";
    return out;
  }
}

}  // namespace sheaflens::cli
