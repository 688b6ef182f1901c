#include "config.hpp"

#include <fstream>
#include <sstream>

#include "hfq/fedosov.hpp"

namespace hfq::cli {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("config field '") + key + "' has the wrong type");
  }
}

Eigen::VectorXd vec(const json& j, const char* what, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw InputError(std::string("point field '") + what + "' must be an array of " + std::to_string(n) + " numbers");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_number()) throw InputError(std::string("point field '") + what + "' must hold numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

std::vector<PhasePoint> grid_points(const json& g, int n, Bundle bundle) {
  const int d = 2 * n;
  Eigen::VectorXd lo = vec(g.at("lower"), "lower", d), hi = vec(g.at("upper"), "upper", d);
  std::vector<int> counts = g.at("counts").get<std::vector<int>>();
  if (static_cast<int>(counts.size()) != d) throw InputError("grid counts must have 2n entries");
  for (int c : counts)
    if (c < 1) throw InputError("grid counts must be positive");
  std::vector<PhasePoint> pts;
  std::vector<int> idx(d, 0);
  while (true) {
    Eigen::VectorXd u(d);
    for (int k = 0; k < d; ++k)
      u[k] = counts[k] == 1 ? lo[k] : lo[k] + (hi[k] - lo[k]) * idx[k] / (counts[k] - 1);
    pts.push_back(PhasePoint::from_coords(u, bundle));
    int k = d - 1;
    while (k >= 0 && ++idx[k] == counts[k]) idx[k--] = 0;
    if (k < 0) break;
  }
  return pts;
}

std::string keyed_fiber(Bundle b) { return std::string(1, fiber_letter(b)); }

}  // namespace

JobConfig parse_config(const json& doc) {
  try {
    if (!doc.is_object()) throw InputError("config must be a JSON object");
    const int version = get_or<int>(doc, "schema_version", -1);
    if (version != kSchemaVersion)
      throw InputError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    JobConfig c;
    c.n = get_or<int>(doc, "n", 0);
    if (c.n < 1) throw InputError("config needs n >= 1");
    const std::string bundle = get_or<std::string>(doc, "bundle", "cotangent");
    if (bundle == "cotangent")
      c.bundle = Bundle::Cotangent;
    else if (bundle == "tangent")
      c.bundle = Bundle::Tangent;
    else
      throw InputError("bundle must be 'cotangent' or 'tangent'");

    if (!doc.contains("generator")) throw InputError("config needs a generator");
    const json& g = doc["generator"];
    if (g.is_string()) {
      c.expr = g.get<std::string>();
    } else if (g.is_object()) {
      c.expr = get_or<std::string>(g, "expr", "");
      c.family = get_or<std::string>(g, "family", "");
      if (c.expr.empty() == c.family.empty()) throw InputError("generator needs exactly one of 'expr' and 'family'");
      if (g.contains("params"))
        for (const auto& [k, v] : g["params"].items()) {
          if (!v.is_number()) throw InputError("family parameter '" + k + "' must be a number");
          c.params[k] = v.get<double>();
        }
      c.base_metric = get_or<std::vector<std::string>>(g, "base_metric", {});
      c.vielbein = get_or<std::vector<std::string>>(g, "vielbein", {});
      c.dual = get_or<std::string>(g, "dual", "");
    } else {
      throw InputError("generator must be DSL text or an object");
    }

    c.jet_order = 0;
    if (doc.contains("jet_order")) {
      const json& jo = doc["jet_order"];
      if (jo.is_string() && jo.get<std::string>() == "auto")
        c.jet_order = 0;
      else if (jo.is_number_integer() && jo.get<int>() >= 1 && jo.get<int>() <= kMaxJetOrder)
        c.jet_order = jo.get<int>();
      else
        throw InputError("jet_order must be \"auto\" or an integer in [1, 15]");
    }
    c.dmax = get_or<int>(doc, "dmax", 4);
    c.vmax = get_or<int>(doc, "vmax", 3);
    c.lambda = get_or<double>(doc, "lambda", 0.0);
    c.threads = get_or<int>(doc, "threads", 0);
    c.output = get_or<std::string>(doc, "output", "");
    if (doc.contains("flow")) {
      c.t_end = get_or<double>(doc["flow"], "t_end", 5.0);
      c.dt = get_or<double>(doc["flow"], "dt", 1e-3);
    }
    if (doc.contains("star")) {
      c.star_f = get_or<std::string>(doc["star"], "f", "");
      c.star_g = get_or<std::string>(doc["star"], "g", "");
      c.star_h = get_or<std::string>(doc["star"], "h", "");
    }

    if (doc.contains("points")) {
      const json& p = doc["points"];
      const std::string fk = keyed_fiber(c.bundle);
      if (p.is_array()) {
        for (const auto& e : p) {
          if (!e.contains("x") || !e.contains(fk))
            throw InputError("each point needs 'x' and '" + fk + "' arrays");
          c.points.emplace_back(vec(e["x"], "x", c.n), vec(e[fk], fk.c_str(), c.n), c.bundle);
        }
      } else if (p.is_object() && p.contains("grid")) {
        c.points = grid_points(p["grid"], c.n, c.bundle);
      } else if (p.is_object() && p.contains("random")) {
        const json& r = p["random"];
        c.points = sample_points(c.n, get_or<int>(r, "count", 10), get_or<std::uint64_t>(r, "seed", 1), c.bundle,
                                 get_or<double>(r, "base_radius", 0.5), get_or<double>(r, "fiber_radius", 0.8));
      } else {
        throw InputError("points must be a list, {\"grid\": ...} or {\"random\": ...}");
      }
    }
    if (c.dt <= 0.0 || c.t_end <= 0.0) throw InputError("flow needs t_end > 0 and dt > 0");
    if (c.vmax < 0) throw InputError("vmax must be >= 0");
    if (c.threads < 0) throw InputError("threads must be >= 0");
    // parse once so DSL errors surface at load time
    c.generator();
    c.dual_generator();
    return c;
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

JobConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

std::optional<Family> JobConfig::builtin() const {
  if (family.empty()) return std::nullopt;
  Family f = builtin_family(family, n, params);
  if (!base_metric.empty()) f.base_metric = base_metric;
  if (!vielbein.empty()) f.vielbein = vielbein;
  return f;
}

Expr JobConfig::generator() const {
  if (!expr.empty()) return parse(expr, n, bundle);
  Family f = *builtin();
  return bundle == Bundle::Cotangent ? family_hamiltonian(f) : family_lagrangian(f);
}

std::optional<Expr> JobConfig::dual_generator() const {
  const Bundle other = bundle == Bundle::Cotangent ? Bundle::Tangent : Bundle::Cotangent;
  if (!dual.empty()) return parse(dual, n, other);
  if (family.empty()) return std::nullopt;
  Family f = *builtin();
  if (bundle == Bundle::Cotangent) {
    if (f.lagrangian.empty()) return std::nullopt;
    return family_lagrangian(f);
  }
  return family_hamiltonian(f);
}

int JobConfig::geometry_jet_order() const {
  int k = jet_order > 0 ? jet_order : kGeometryJetOrder;
  if (k < kGeometryJetOrder)
    throw InputError("geometry jobs need jet_order >= " + std::to_string(kGeometryJetOrder));
  return k;
}

int JobConfig::quantize_jet_order() const {
  if (dmax < 2) throw InputError("quantize jobs need dmax >= 2");
  const int need = FedosovState::auto_jet_order(dmax);
  int k = jet_order > 0 ? jet_order : need;
  if (k < need) throw InputError("quantize jobs at dmax " + std::to_string(dmax) + " need jet_order >= " + std::to_string(need));
  return k;
}

nlohmann::ordered_json JobConfig::echo() const {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = n;
  j["bundle"] = bundle_name(bundle);
  nlohmann::ordered_json g;
  if (!expr.empty()) g["expr"] = expr;
  if (!family.empty()) {
    g["family"] = family;
    if (!params.empty()) g["params"] = params;
    if (!base_metric.empty()) g["base_metric"] = base_metric;
    if (!vielbein.empty()) g["vielbein"] = vielbein;
  }
  if (!dual.empty()) g["dual"] = dual;
  j["generator"] = g;
  if (jet_order > 0)
    j["jet_order"] = jet_order;
  else
    j["jet_order"] = "auto";
  j["dmax"] = dmax;
  j["vmax"] = vmax;
  j["lambda"] = lambda;
  j["flow"] = {{"t_end", t_end}, {"dt", dt}};
  if (!star_f.empty() || !star_g.empty() || !star_h.empty()) {
    nlohmann::ordered_json s;
    s["f"] = star_f;
    s["g"] = star_g;
    if (!star_h.empty()) s["h"] = star_h;
    j["star"] = s;
  }
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  const std::string fk = keyed_fiber(bundle);
  for (const auto& p : points) {
    nlohmann::ordered_json e;
    e["x"] = std::vector<double>(p.base.data(), p.base.data() + p.n());
    e[fk] = std::vector<double>(p.fiber.data(), p.fiber.data() + p.n());
    pts.push_back(e);
  }
  j["points"] = pts;
  return j;
}

PhasePoint parse_point(const std::string& text, int n, Bundle bundle) {
  const char fl = fiber_letter(bundle);
  std::vector<double> x, f;
  std::vector<double>* cur = nullptr;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.size() > 2 && tok[1] == '=') {
      if (tok[0] == 'x')
        cur = &x;
      else if (tok[0] == fl)
        cur = &f;
      else
        throw InputError("--point: unknown key '" + tok.substr(0, 1) + "'");
      tok = tok.substr(2);
    }
    if (!cur) throw InputError("--point must start with x= or " + std::string(1, fl) + "=");
    try {
      std::size_t used = 0;
      cur->push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw InputError("--point: cannot read number '" + tok + "'");
    }
  }
  if (static_cast<int>(x.size()) != n || static_cast<int>(f.size()) != n)
    throw InputError("--point needs " + std::to_string(n) + " values for x and for " + std::string(1, fl));
  return PhasePoint(Eigen::Map<Eigen::VectorXd>(x.data(), n), Eigen::Map<Eigen::VectorXd>(f.data(), n), bundle);
}

}  // namespace hfq::cli
