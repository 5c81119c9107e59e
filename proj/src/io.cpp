#include "mahler/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mahler {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ParseError("body document: " + path + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) bad(path + "/" + key, "missing field");
  return *it;
}

double need_num(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

Vec3 need_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) bad(path, "expected [x, y, z]");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = need_num(j[i], path + "/" + std::to_string(i));
  return v;
}

std::vector<Halfspace> need_halfspaces(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) bad(path, "expected a nonempty array of halfspaces");
  std::vector<Halfspace> hs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    if (!j[i].is_object()) bad(p, "expected {\"n\": [x,y,z], \"c\": r}");
    Halfspace h;
    h.n = need_vec3(need(j[i], "n", p), p + "/n");
    h.c = need_num(need(j[i], "c", p), p + "/c");
    hs.push_back(h);
  }
  return hs;
}

struct BuiltinSpec {
  std::vector<std::pair<const char*, double>> params; // name -> default
};

const std::map<std::string, BuiltinSpec>& builtin_table() {
  static const std::map<std::string, BuiltinSpec> t = {
      {"simplexD2", {{{"a", 1}, {"b", 1}, {"c", 1}}}},
      {"simplexD2polar", {{{"a", 1}, {"b", 1}, {"c", 1}}}},
      {"simplexS4", {{{"u", 1}}}},
      {"simplexS4polar", {{{"u", 1}}}},
      {"cube", {{{"half_width", 1}}}},
      {"ball", {{{"radius", 1}}}},
      {"ellipsoid", {{{"rx", 1}, {"ry", 1}, {"rz", 1}}}},
  };
  return t;
}

ConvexBody dispatch_builtin(const std::string& name, const std::vector<double>& v) {
  if (name == "simplexD2") return make_simplex_d2(v[0], v[1], v[2]);
  if (name == "simplexD2polar") return make_simplex_d2_polar(v[0], v[1], v[2]);
  if (name == "simplexS4") return make_simplex_s4(v[0]);
  if (name == "simplexS4polar") return make_simplex_s4_polar(v[0]);
  if (name == "cube") return make_cube(v[0]);
  if (name == "ball") return make_ball(v[0]);
  return make_ellipsoid(v[0], v[1], v[2]);
}

} // namespace

ConvexBody make_builtin(const std::string& name, const std::vector<double>& params) {
  const auto it = builtin_table().find(name);
  if (it == builtin_table().end()) {
    std::string known;
    for (const auto& [k, _] : builtin_table()) known += (known.empty() ? "" : ", ") + k;
    throw ParseError("unknown builtin \"" + name + "\" (known: " + known + ")");
  }
  const auto& spec = it->second.params;
  if (params.size() > spec.size())
    throw ParseError("builtin \"" + name + "\" takes at most " + std::to_string(spec.size()) +
                     " parameters");
  std::vector<double> v;
  for (std::size_t i = 0; i < spec.size(); ++i)
    v.push_back(i < params.size() ? params[i] : spec[i].second);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(v[i] > 0))
      throw ParseError("builtin \"" + name + "\": parameter " + spec[i].first +
                       " must be positive");
  return dispatch_builtin(name, v);
}

ConvexBody parse_body_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("body document: syntax error at byte " + std::to_string(e.byte) + ": " +
                     e.what());
  }
  if (!doc.is_object()) bad("", "expected a JSON object");
  const json& tj = need(doc, "type", "");
  if (!tj.is_string()) bad("/type", "expected a string");
  const std::string type = tj.get<std::string>();

  if (type == "vpolytope") {
    const json& vj = need(doc, "vertices", "");
    if (!vj.is_array() || vj.size() < 4) bad("/vertices", "expected at least 4 vertices");
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < vj.size(); ++i)
      pts.push_back(need_vec3(vj[i], "/vertices/" + std::to_string(i)));
    return ConvexBody::polytope(convex_hull(pts));
  }
  if (type == "hpolytope") {
    return ConvexBody::from_halfspaces(need_halfspaces(need(doc, "halfspaces", ""), "/halfspaces"));
  }
  if (type == "smooth") {
    const double p = need_num(need(doc, "p", ""), "/p");
    if (!(p >= 1)) bad("/p", "smoothing exponent must be >= 1");
    std::vector<Vec3> normals;
    for (const Halfspace& h : need_halfspaces(need(doc, "halfspaces", ""), "/halfspaces")) {
      if (!(h.c > 0)) bad("/halfspaces", "offsets must be positive (o interior)");
      normals.push_back(h.n / h.c);
    }
    return ConvexBody::smooth(normals, p);
  }
  if (type == "builtin") {
    const json& nj = need(doc, "name", "");
    if (!nj.is_string()) bad("/name", "expected a string");
    const std::string name = nj.get<std::string>();
    const auto it = builtin_table().find(name);
    if (it == builtin_table().end()) bad("/name", "unknown builtin \"" + name + "\"");
    std::vector<double> v;
    if (doc.contains("params")) {
      const json& pj = doc["params"];
      if (!pj.is_object()) bad("/params", "expected an object");
      for (const auto& [key, val] : pj.items()) {
        bool known = false;
        for (const auto& [pname, _] : it->second.params) known = known || key == pname;
        if (!known) bad("/params/" + key, "unknown parameter for builtin \"" + name + "\"");
        (void)val;
      }
      for (const auto& [pname, def] : it->second.params)
        v.push_back(pj.contains(pname) ? need_num(pj[pname], std::string("/params/") + pname)
                                       : def);
    }
    return make_builtin(name, v);
  }
  bad("/type", "unknown body type \"" + type + "\"");
}

ConvexBody parse_body_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open body file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_body_json(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

ConvexBody parse_body_arg(const std::string& arg) {
  if (arg.rfind("builtin:", 0) != 0) return parse_body_file(arg);
  const std::string rest = arg.substr(8);
  const auto colon = rest.find(':');
  const std::string name = rest.substr(0, colon);
  std::vector<double> params;
  if (colon != std::string::npos) {
    std::stringstream ss(rest.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        params.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("builtin parameter is not a number: \"" + tok + "\"");
      }
    }
  }
  return make_builtin(name, params);
}

Vec3 parse_vec3(const std::string& s) {
  std::string body = s;
  double sign = 1;
  if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
    sign = body[0] == '-' ? -1 : 1;
    body = body.substr(1);
  }
  if (body == "e1") return sign * Vec3::UnitX();
  if (body == "e2") return sign * Vec3::UnitY();
  if (body == "e3") return sign * Vec3::UnitZ();
  std::stringstream ss(s);
  std::string tok;
  std::vector<double> v;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("vector component is not a number: \"" + tok + "\"");
    }
  }
  if (v.size() != 3)
    throw ParseError("expected e1|e2|e3 (optionally signed) or \"x,y,z\", got \"" + s + "\"");
  return {v[0], v[1], v[2]};
}

// --- output -------------------------------------------------------------------

std::string format17(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void dump17_rec(const ojson& j, int indent, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  const std::string pad1(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, val] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad1 + ojson(key).dump() + ": ";
        dump17_rec(val, indent, depth + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad1;
        dump17_rec(j[i], indent, depth + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case ojson::value_t::number_float:
      out += format17(j.get<double>());
      return;
    default:
      out += j.dump(); // strings (escaped), integers, booleans, null
      return;
  }
}

} // namespace

std::string dump17(const ojson& j, int indent) {
  std::string out;
  dump17_rec(j, indent, 0, out);
  return out;
}

namespace {

ojson vec_json(const Vec3& v) { return ojson::array({v.x(), v.y(), v.z()}); }

} // namespace

ojson to_ojson(const EstimateReport& r) {
  ojson j;
  j["name"] = r.name;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["slack"] = r.slack;
  j["tolerance"] = r.tolerance;
  ojson in;
  for (const auto& [k, v] : r.inputs) in[k] = v;
  j["inputs"] = in;
  return j;
}

ojson to_ojson(const D2Partition& r) {
  ojson j;
  j["p"] = vec_json(r.p);
  j["s1"] = r.s1;
  j["s2"] = r.s2;
  j["s3"] = r.s3;
  j["residual"] = r.residual;
  j["zero_count"] = r.zero_count;
  j["tree_depth"] = r.tree_depth;
  j["newton_iters"] = r.newton_iters;
  return j;
}

ojson to_ojson(const S4Balance& r) {
  ojson j;
  j["u"] = r.u;
  j["c"] = r.c_val;
  j["beta"] = r.beta_val;
  j["residual"] = r.residual;
  j["bracket"] = ojson::array({r.bracket_lo, r.bracket_hi});
  j["iterations"] = r.iterations;
  return j;
}

ojson to_ojson(const SantaloResult& r) {
  ojson j;
  j["z"] = vec_json(r.z);
  j["polar_volume_at_z"] = r.polar_volume_at_z;
  j["iterations"] = r.iterations;
  j["displacement"] = r.displacement;
  return j;
}

ojson to_ojson(const ChainReport& r) {
  ojson j;
  j["run"] = r.run;
  if (!r.run) {
    j["skip_reason"] = r.skip_reason;
    return j;
  }
  ojson terms = ojson::array();
  for (const ChainTerm& t : r.terms) {
    ojson tj;
    tj["name"] = t.name;
    tj["lhs"] = t.lhs;
    tj["rhs"] = t.rhs;
    tj["identity"] = t.identity;
    tj["slack"] = t.slack();
    terms.push_back(tj);
  }
  j["terms"] = terms;
  j["final_bound"] = r.final_bound;
  ojson det;
  for (const auto& [k, v] : r.details) det[k] = v;
  j["details"] = det;
  return j;
}

ojson to_ojson(const VerifyReport& r) {
  ojson j;
  j["group"] = r.group;
  j["volume"] = r.volume;
  j["polar_volume"] = r.polar_volume;
  j["product"] = r.product;
  j["gap"] = r.gap;
  j["bound_ok"] = r.bound_ok;
  j["tolerance"] = r.tolerance;
  j["equality"] = r.equality;
  if (r.simplex_witness) {
    ojson rows = ojson::array();
    for (int i = 0; i < 3; ++i)
      rows.push_back(ojson::array({(*r.simplex_witness)(i, 0), (*r.simplex_witness)(i, 1),
                                   (*r.simplex_witness)(i, 2)}));
    j["simplex_witness"] = rows;
  } else {
    j["simplex_witness"] = nullptr;
  }
  j["chain"] = to_ojson(r.chain);
  return j;
}

std::string csv_header() {
  return "seed,group,nverts,volume,polar_volume,product,gap,equality_flag\n";
}

std::string csv_line(const SweepRow& r) {
  std::string out = std::to_string(r.seed) + "," + r.group + "," + std::to_string(r.nverts);
  for (const double v : {r.volume, r.polar_volume, r.product, r.gap}) out += "," + format17(v);
  out += "," + r.equality + "\n";
  return out;
}

} // namespace mahler
