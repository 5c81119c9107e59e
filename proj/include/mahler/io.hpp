#pragma once

#include "mahler/equipartition.hpp"
#include "mahler/estimates.hpp"
#include "mahler/mahler.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace mahler {

/// All emitted JSON keeps keys in insertion order so output is canonical.
using ojson = nlohmann::ordered_json;

// --- body input --------------------------------------------------------------

/// Body description document:
///   {"type":"vpolytope","vertices":[[x,y,z],...]}
///   {"type":"hpolytope","halfspaces":[{"n":[x,y,z],"c":r},...]}
///   {"type":"smooth","p":real,"halfspaces":[...]}
///   {"type":"builtin","name":"...","params":{...}}
/// Malformed documents raise ParseError carrying the JSON path (and the byte
/// offset for syntax errors).
ConvexBody parse_body_json(const std::string& text);
ConvexBody parse_body_file(const std::string& path);

/// CLI body argument: either a file path or "builtin:NAME[:p1,p2,...]".
ConvexBody parse_body_arg(const std::string& arg);

/// Built-in fixtures by name with positional parameters (defaults applied):
/// simplexD2(a,b,c), simplexD2polar(a,b,c), simplexS4(u), simplexS4polar(u),
/// cube(half_width), ball(radius), ellipsoid(rx,ry,rz).
ConvexBody make_builtin(const std::string& name, const std::vector<double>& params);

/// "e1".."e3" with optional leading '-', or a comma-separated triple "x,y,z".
Vec3 parse_vec3(const std::string& s);

// --- JSON output ---------------------------------------------------------------

/// %.17g — enough digits to round-trip any double.
std::string format17(double x);

/// Serialize with 17-significant-digit numbers (nlohmann's own dump would
/// use shortest-round-trip formatting instead). Non-finite values become null.
std::string dump17(const ojson& j, int indent = 2);

ojson to_ojson(const EstimateReport& r);
ojson to_ojson(const D2Partition& r);
ojson to_ojson(const S4Balance& r);
ojson to_ojson(const SantaloResult& r);
ojson to_ojson(const ChainReport& r);
ojson to_ojson(const VerifyReport& r);

// --- sweep CSV -----------------------------------------------------------------

struct SweepRow {
  std::uint64_t seed = 0;
  std::string group;
  int nverts = 0;
  double volume = 0;
  double polar_volume = 0;
  double product = 0;
  double gap = 0;
  std::string equality = "none"; // none | simplex | polar-simplex | error
};

std::string csv_header();
std::string csv_line(const SweepRow& row);

} // namespace mahler
