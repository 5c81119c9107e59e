// mahlerlab: volume products, equipartition solvers, bound verification and
// reproducible sweeps for symmetric convex bodies.
#include "mahler/io.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

namespace {

using namespace mahler;

// Exit codes are a stable contract:
//   0 ok, 2 parse, 3 geometry, 4 invariance, 5 solver/precondition, 6 bound.
constexpr int kExitParse = 2;
constexpr int kExitGeometry = 3;
constexpr int kExitInvariance = 4;
constexpr int kExitSolver = 5;
constexpr int kExitBound = 6;

int guarded(const std::function<int()>& run) {
  try {
    return run();
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return kExitGeometry;
  } catch (const InvarianceError& e) {
    std::cerr << "invariance error: " << e.what() << "\n";
    return kExitInvariance;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

double report_tolerance() {
  const char* s = std::getenv("MAHLERLAB_TOL");
  if (!s) return tol::report;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ParseError("MAHLERLAB_TOL is not a number: \"" + std::string(s) + "\"");
  }
}

void require_invariant(const ConvexBody& k, const SymmetryGroup& g) {
  if (!is_invariant(g, k, k.approximate ? 1e-6 : 1e-9))
    throw InvarianceError("body is not invariant under " + to_string(g.name));
}

std::string vec_text(const Vec3& v) {
  return "(" + format17(v.x()) + ", " + format17(v.y()) + ", " + format17(v.z()) + ")";
}

// --- product -----------------------------------------------------------------

int cmd_product(const std::string& body_arg, const std::string& mode, bool as_json) {
  const ConvexBody k = parse_body_arg(body_arg);
  const double vol = volume(k);
  std::optional<SantaloResult> s;
  double pvol;
  if (mode == "santalo") {
    s = santalo_point(k);
    pvol = s->polar_volume_at_z;
  } else {
    pvol = polar_volume(k);
  }
  if (as_json) {
    ojson j;
    j["mode"] = mode;
    j["volume"] = vol;
    if (s) j["santalo"] = to_ojson(*s);
    j["polar_volume"] = pvol;
    j["product"] = vol * pvol;
    std::cout << dump17(j) << "\n";
  } else {
    std::cout << "volume       = " << format17(vol) << "\n";
    if (s) std::cout << "santalo_z    = " << vec_text(s->z) << "\n";
    std::cout << "polar_volume = " << format17(pvol) << "\n"
              << "product      = " << format17(vol * pvol) << "\n";
  }
  return 0;
}

// --- equipartition -----------------------------------------------------------

int cmd_equipartition(const std::string& body_arg, const std::string& group, double tol,
                      bool as_json) {
  const ConvexBody k = parse_body_arg(body_arg);
  const SymmetryGroup g = SymmetryGroup::named(group);
  require_invariant(k, g);
  if (group == "D2") {
    const D2Partition part = solve_d2(k, tol > 0 ? tol : 1e-10);
    if (as_json) {
      std::cout << dump17(to_ojson(part)) << "\n";
    } else {
      std::cout << "p          = " << vec_text(part.p) << "\n"
                << "ratios     = (" << format17(part.s1) << ", " << format17(part.s2) << ", "
                << format17(part.s3) << ")\n"
                << "residual   = " << format17(part.residual) << "\n"
                << "diagnostics: zeros=" << part.zero_count << " tree_depth=" << part.tree_depth
                << " newton_iters=" << part.newton_iters << "\n";
    }
  } else {
    const S4Balance bal = solve_s4(k, tol > 0 ? tol : 1e-12);
    if (as_json) {
      std::cout << dump17(to_ojson(bal)) << "\n";
    } else {
      std::cout << "u          = " << format17(bal.u) << "\n"
                << "c          = " << format17(bal.c_val) << "\n"
                << "beta       = " << format17(bal.beta_val) << "\n"
                << "residual   = " << format17(bal.residual) << "\n"
                << "diagnostics: bracket=[" << format17(bal.bracket_lo) << ", "
                << format17(bal.bracket_hi) << "] iterations=" << bal.iterations << "\n";
    }
  }
  return 0;
}

// --- verify ------------------------------------------------------------------

int cmd_verify(const std::string& body_arg, const std::string& group, bool no_chain,
               bool as_json) {
  const ConvexBody k = parse_body_arg(body_arg);
  const SymmetryGroup g = SymmetryGroup::named(group);
  const VerifyReport r = verify(k, g, report_tolerance(), !no_chain);
  if (as_json) {
    std::cout << dump17(to_ojson(r)) << "\n";
  } else {
    std::cout << "group        = " << r.group << "\n"
              << "volume       = " << format17(r.volume) << "\n"
              << "polar_volume = " << format17(r.polar_volume) << "\n"
              << "product      = " << format17(r.product) << "\n"
              << "gap          = " << format17(r.gap) << "\n"
              << "bound_ok     = " << (r.bound_ok ? "true" : "false") << "\n"
              << "equality     = " << r.equality << "\n";
    if (!r.chain.run) {
      std::cout << "chain        = " << r.chain.skip_reason << "\n";
    } else {
      std::cout << "chain        = run, final_bound = " << format17(r.chain.final_bound) << "\n";
      for (const ChainTerm& t : r.chain.terms)
        std::cout << "  " << (t.identity ? "[=] " : "[>=] ") << t.name
                  << ": lhs=" << format17(t.lhs) << " rhs=" << format17(t.rhs)
                  << " slack=" << format17(t.slack()) << "\n";
    }
  }
  return r.bound_ok ? 0 : kExitBound;
}

// --- sweep ---------------------------------------------------------------------

int cmd_sweep(const std::string& group, int count, std::uint64_t seed, const std::string& kind,
              const std::string& csv_path, int jobs) {
  const SymmetryGroup g = SymmetryGroup::named(group);
  const BodyKind bk = kind == "smooth" ? BodyKind::Smooth : BodyKind::Polytope;
  const double tol = report_tolerance();

  std::vector<SweepRow> rows(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  const auto work = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      SweepRow& row = rows[static_cast<std::size_t>(i)];
      row.seed = seed + static_cast<std::uint64_t>(i);
      row.group = group;
      try {
        const ConvexBody k = random_invariant_body(g, 4, bk, row.seed);
        row.nverts = k.is_polytope() ? k.vform().nvertices()
                                     : static_cast<int>(std::get<SmoothBody>(k.shape).normals.size());
        const VerifyReport r = verify(k, g, tol, /*run_chain=*/false);
        row.volume = r.volume;
        row.polar_volume = r.polar_volume;
        row.product = r.product;
        row.gap = r.gap;
        row.equality = r.equality;
      } catch (const std::exception& e) {
        row.nverts = 0;
        row.volume = row.polar_volume = row.product = row.gap =
            std::numeric_limits<double>::quiet_NaN();
        row.equality = "error";
      }
    }
  };
  if (jobs <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  std::string csv = csv_header();
  for (const SweepRow& r : rows) csv += csv_line(r);
  if (csv_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw ParseError("cannot open CSV output file: " + csv_path);
    out << csv;
  }

  int failures = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  std::uint64_t argmin = seed;
  bool violated = false;
  for (const SweepRow& r : rows) {
    if (r.equality == "error" || std::isnan(r.gap)) {
      ++failures;
      continue;
    }
    if (r.gap < min_gap) {
      min_gap = r.gap;
      argmin = r.seed;
    }
    if (r.gap < -tol) violated = true;
  }
  std::cout << "sweep: bodies=" << count << " min_gap=" << format17(min_gap) << " at seed "
            << argmin << " failures=" << failures << "\n";
  return violated ? kExitBound : 0;
}

// --- estimate ------------------------------------------------------------------

Vec2 parse_vec2(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw ParseError("expected a 2D point \"x,y\", got \"" + s + "\"");
  try {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw ParseError("2D point components are not numbers: \"" + s + "\"");
  }
}

double parse_num(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected a number, got \"" + s + "\"");
  }
}

int cmd_estimate(const std::string& lemma, const std::vector<std::string>& args, bool as_json) {
  EstimateReport rep;
  if (lemma == "2.6") {
    if (args.size() != 6)
      throw ParseError("lemma 2.6 wants: L_area Lpolar_area a b apolar bpolar (2D points x,y)");
    rep = pairing_2d(parse_num(args[0]), parse_num(args[1]), parse_vec2(args[2]),
                     parse_vec2(args[3]), parse_vec2(args[4]), parse_vec2(args[5]));
  } else {
    if (args.empty()) throw ParseError("lemma " + lemma + " wants a body argument first");
    const ConvexBody k = parse_body_arg(args[0]);
    const std::vector<std::string> rest(args.begin() + 1, args.end());
    if (lemma == "2.4") {
      if (rest.size() != 2) throw ParseError("lemma 2.4 wants: body a b");
      const Vec3 a = boundary_point(k, parse_vec3(rest[0]));
      const Vec3 b = boundary_point(k, parse_vec3(rest[1]));
      rep = pairing_curve(k, a, b);
    } else if (lemma == "2.5" || lemma == "2.10") {
      std::vector<Vec3> gen, pgen;
      if (rest.size() == 1 && rest[0] == "octant") {
        gen = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
        pgen = gen;
      } else if (rest.size() == 3 || rest.size() == 6) {
        for (int i = 0; i < 3; ++i) gen.push_back(parse_vec3(rest[static_cast<std::size_t>(i)]));
        if (rest.size() == 6)
          for (int i = 3; i < 6; ++i)
            pgen.push_back(parse_vec3(rest[static_cast<std::size_t>(i)]));
        else
          for (const Vec3& v : gen) pgen.push_back(lambda_limit(k, boundary_point(k, v)));
      } else {
        throw ParseError("lemma " + lemma +
                         " wants: body octant | body g1 g2 g3 [pg1 pg2 pg3]");
      }
      rep = surface_estimate(k, gen, pgen);
    } else if (lemma == "2.9") {
      if (rest.size() != 2 && rest.size() != 4)
        throw ParseError("lemma 2.9 wants: body a b [apolar bpolar]");
      const Vec3 a = boundary_point(k, parse_vec3(rest[0]));
      const Vec3 b = boundary_point(k, parse_vec3(rest[1]));
      const Vec3 ap = rest.size() == 4 ? parse_vec3(rest[2]) : lambda_limit(k, a);
      const Vec3 bp = rest.size() == 4 ? parse_vec3(rest[3]) : lambda_limit(k, b);
      rep = cone_pair_2d(k, a, b, ap, bp);
    } else {
      throw ParseError("unknown lemma \"" + lemma + "\" (known: 2.4, 2.5, 2.6, 2.9, 2.10)");
    }
  }
  if (as_json) {
    std::cout << dump17(to_ojson(rep)) << "\n";
  } else {
    std::cout << rep.name << ": lhs=" << format17(rep.lhs) << " rhs=" << format17(rep.rhs)
              << " slack=" << format17(rep.slack) << " (tolerance " << format17(rep.tolerance)
              << ")\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"volume products and sharp lower bounds for symmetric convex bodies"};
  app.require_subcommand(1);

  std::string body_arg, mode = "at-origin", group, kind = "polytope", csv_path, lemma;
  std::vector<std::string> est_args;
  bool as_json = false, no_chain = false;
  double solver_tol = -1;
  int count = 1, jobs = 1;
  std::uint64_t seed = 1;

  CLI::App* product = app.add_subcommand("product", "volume product |K| |K°|");
  product->add_option("body", body_arg, "body file or builtin:NAME[:params]")->required();
  product->add_option("--mode", mode, "at-origin | santalo")
      ->check(CLI::IsMember({"at-origin", "santalo"}));
  product->add_flag("--json", as_json, "emit JSON");

  CLI::App* equi = app.add_subcommand("equipartition", "solve the group's partition condition");
  equi->add_option("body", body_arg, "body file or builtin:NAME[:params]")->required();
  equi->add_option("--group", group, "D2 | S4")
      ->required()
      ->check(CLI::IsMember({"D2", "S4"}));
  equi->add_option("--tol", solver_tol, "residual tolerance");
  equi->add_flag("--json", as_json, "emit JSON");

  CLI::App* verify_cmd = app.add_subcommand("verify", "full bound verification report");
  verify_cmd->add_option("body", body_arg, "body file or builtin:NAME[:params]")->required();
  verify_cmd->add_option("--group", group, "D2 | S4 | D2d | T | Td | Z2c")
      ->required()
      ->check(CLI::IsMember({"D2", "S4", "D2d", "T", "Td", "Z2c"}));
  verify_cmd->add_flag("--no-chain", no_chain, "skip the inequality-chain audit");
  verify_cmd->add_flag("--json", as_json, "emit JSON");

  CLI::App* sweep = app.add_subcommand("sweep", "verify random invariant bodies");
  sweep->add_option("--group", group, "D2 | S4 | D2d | T | Td")
      ->required()
      ->check(CLI::IsMember({"D2", "S4", "D2d", "T", "Td"}));
  sweep->add_option("--count", count, "number of bodies")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "base seed; body i uses seed+i");
  sweep->add_option("--kind", kind, "polytope | smooth")
      ->check(CLI::IsMember({"polytope", "smooth"}));
  sweep->add_option("--csv", csv_path, "CSV output path (default: stdout)");
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  CLI::App* estimate = app.add_subcommand("estimate", "evaluate one inequality oracle");
  estimate->add_option("--lemma", lemma, "2.4 | 2.5 | 2.6 | 2.9 | 2.10")
      ->required()
      ->check(CLI::IsMember({"2.4", "2.5", "2.6", "2.9", "2.10"}));
  estimate->add_option("args", est_args, "body and lemma-specific parameters");
  estimate->add_flag("--json", as_json, "emit JSON");

  CLI11_PARSE(app, argc, argv);

  if (product->parsed()) return guarded([&] { return cmd_product(body_arg, mode, as_json); });
  if (equi->parsed())
    return guarded([&] { return cmd_equipartition(body_arg, group, solver_tol, as_json); });
  if (verify_cmd->parsed())
    return guarded([&] { return cmd_verify(body_arg, group, no_chain, as_json); });
  if (sweep->parsed())
    return guarded([&] { return cmd_sweep(group, count, seed, kind, csv_path, jobs); });
  return guarded([&] { return cmd_estimate(lemma, est_args, as_json); });
}
