#include "gifslab/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <unordered_set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gifslab/io.hpp"

namespace gifslab {

namespace {

GoodSequence parse_good(const std::string& spec) {
  if (spec.rfind("geom:", 0) == 0) {
    std::string body = spec.substr(5);
    auto slash = body.find('/');
    if (slash == std::string::npos) throw CLI::ValidationError("--b", "expected geom:<c>/<d>");
    double c = std::stod(body.substr(0, slash));
    double d = std::stod(body.substr(slash + 1));
    if (d <= 0.0) throw CLI::ValidationError("--b", "denominator must be positive");
    return GoodSequence::geometric(c, 1.0 / d);
  }
  throw CLI::ValidationError("--b", "unknown scale spec " + spec);
}

OrdinalIndex parse_alpha(const std::string& s) {
  if (s == "w") return OrdinalIndex::omega();
  return OrdinalIndex::fin(static_cast<std::uint32_t>(std::stoul(s)));
}

// p specs: power:<p1>:m=<m> (p_{k+1} = p_k^m), power:<p1>:n (p_{k+1} = p_k^k),
// or list:<a,b,c,...>.
std::vector<BigInt> parse_p(const std::string& spec, std::size_t count) {
  if (spec.rfind("power:", 0) == 0) {
    std::string body = spec.substr(6);
    auto colon = body.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--p", "expected power:<p1>:m=<m>");
    BigInt p1(body.substr(0, colon));
    std::string mode = body.substr(colon + 1);
    if (mode == "n") return p_for_order(0, p1, PMode::PowerN, count);
    if (mode.rfind("m=", 0) == 0)
      return p_for_order(static_cast<std::uint32_t>(std::stoul(mode.substr(2))), p1, PMode::PowerM,
                         count);
    throw CLI::ValidationError("--p", "unknown power mode " + mode);
  }
  if (spec.rfind("list:", 0) == 0) {
    std::vector<BigInt> out;
    std::string body = spec.substr(5);
    std::size_t pos = 0;
    while (pos <= body.size()) {
      auto comma = body.find(',', pos);
      if (comma == std::string::npos) comma = body.size();
      out.emplace_back(body.substr(pos, comma - pos));
      pos = comma + 1;
    }
    return out;
  }
  throw CLI::ValidationError("--p", "unknown p spec " + spec);
}

std::vector<Point> parse_points_1d(const std::string& spec) {
  std::vector<Point> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    auto comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    Point p(1);
    p[0] = std::stod(spec.substr(pos, comma - pos));
    out.push_back(p);
    pos = comma + 1;
  }
  return out;
}

TreeSpec parse_tree(const std::string& kind, OrdinalIndex alpha, std::uint32_t n) {
  if (kind == "max") return tree_lambda_max();
  if (kind == "no-one") return tree_lambda_s();
  if (kind == "at-most-one") return tree_lambda_r();
  if (kind == "alpha") return tree_lambda_alpha(alpha);
  if (kind == "alpha-n") return tree_lambda_alpha_n(alpha, n);
  throw CLI::ValidationError("--tree", "unknown tree kind " + kind);
}

Json space_report_json(const SpaceReport& r) {
  Json j;
  j["ok"] = r.ok;
  j["min_margin"] = r.min_margin;
  j["min_gap"] = r.min_gap;
  Json failures = Json::array();
  for (const ConditionCheck& c : r.checks)
    if (!c.pass) failures.push_back(c.label);
  j["failures"] = failures;
  return j;
}

struct AttractorOutcome {
  bool ok = false;
  Json report;
};

AttractorOutcome check_attractor(const BuiltBundle& built, double tol) {
  bool all_symbolic = true;
  for (const GifsMap& f : built.gifs.maps) all_symbolic = all_symbolic && f.symbolic();
  AttractorOutcome out;
  if (all_symbolic) {
    AttractorReport r = verify_attractor_symbolic(built.gifs, *built.space);
    out.ok = r.exact;
    out.report["mode"] = "symbolic";
    out.report["exact"] = r.exact;
    out.report["space_size"] = r.space_size;
    out.report["image_size"] = r.image_size;
    out.report["extra"] = r.extra;
    out.report["missing"] = r.missing.size();
  } else {
    AttractorReport r = verify_attractor_numeric(built.gifs, *built.space);
    double threshold = std::max(tol, 2.0 * built.space->error_bound);
    out.ok = r.exact || r.residual <= threshold;
    out.report["mode"] = "numeric";
    out.report["exact"] = r.exact;
    out.report["residual"] = r.residual;
    out.report["threshold"] = threshold;
    out.report["space_size"] = r.space_size;
    out.report["image_size"] = r.image_size;
  }
  return out;
}

std::string load_space_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) return path + "/space.json";
  return path;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  if (const char* threads = std::getenv("GIFS_LAB_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(threads, &end, 10);
    if (end == threads || *end != '\0' || v < 1) {
      std::cerr << "GIFS_LAB_THREADS must be a positive integer\n";
      return 2;
    }
  }

  CLI::App app{"finite truncations of tree-coded compacta and their GIFS families"};
  app.require_subcommand(1);

  std::string tree_kind = "alpha", alpha_str = "1", b_spec = "geom:1/30";
  std::uint32_t n = 1, depth = 4, width = 6, m = 2, max_iter = 60;
  std::string p_spec, k_spec, inner_recipe = "scattered", out_path, in_path, format;
  std::size_t z_count = 17;
  double eps = 1.0, tol = 1e-6, delta = 0.0, gap = 0.0;
  std::uint64_t seed = 42;
  std::uint32_t profile_n = 6, profile_order = 1;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--b", b_spec, "scale spec, e.g. geom:1/30");
    c->add_option("--depth", depth, "truncation depth D");
    c->add_option("--width", width, "truncation width N");
  };

  CLI::App* space = app.add_subcommand("space", "realize and verify spaces");
  space->require_subcommand(1);
  CLI::App* space_build = space->add_subcommand("build", "realize a truncated space");
  space_build->add_option("--tree", tree_kind, "max | no-one | at-most-one | alpha | alpha-n");
  space_build->add_option("--alpha", alpha_str, "height index, w for the limit");
  space_build->add_option("--n", n, "top-level cardinality");
  add_common(space_build);
  space_build->add_option("-o,--out", out_path, "output space.json")->required();
  CLI::App* space_verify = space->add_subcommand("verify", "check the metric conditions");
  space_verify->add_option("file", in_path, "space.json")->required();

  CLI::App* gifs = app.add_subcommand("gifs", "build and check GIFS bundles");
  gifs->require_subcommand(1);
  CLI::App* gifs_build = gifs->add_subcommand("build", "build a bundle from a recipe");
  std::string recipe_kind;
  gifs_build->add_option("recipe", recipe_kind,
                         "scattered | sandwiched | mixed | component-space | densify")
      ->required();
  gifs_build->add_option("--alpha", alpha_str, "height index, w for the limit");
  gifs_build->add_option("--n", n, "top-level cardinality");
  gifs_build->add_option("--tree", tree_kind, "sandwiched boundary tree");
  gifs_build->add_option("--p", p_spec, "cluster cardinalities, e.g. power:2:m=2");
  gifs_build->add_option("--m", m, "GIFS order for mixed bundles");
  gifs_build->add_option("--z-count", z_count, "segment grid size for component-space");
  gifs_build->add_option("--K", k_spec, "densify anchors, comma separated");
  gifs_build->add_option("--eps", eps, "densify density bound");
  gifs_build->add_option("--inner", inner_recipe, "densify template recipe");
  add_common(gifs_build);
  gifs_build->add_option("--tol", tol, "numeric attractor tolerance");
  gifs_build->add_option("-o,--out", out_path, "output bundle directory")->required();

  CLI::App* gifs_iterate = gifs->add_subcommand("iterate", "Hutchinson iteration from a seed");
  gifs_iterate->add_option("bundle", in_path, "bundle directory")->required();
  gifs_iterate->add_option("--tol", tol, "stop threshold");
  gifs_iterate->add_option("--max-iter", max_iter, "iteration cap");
  gifs_iterate->add_option("--delta", delta, "net resolution");
  gifs_iterate->add_option("--seed", seed, "rng seed (unused by iteration, kept for parity)");
  gifs_iterate->add_option("-o,--out", out_path, "history CSV path");

  CLI::App* gifs_lip = gifs->add_subcommand("check-lip", "measure Lipschitz vs claims");
  gifs_lip->add_option("bundle", in_path, "bundle directory")->required();
  gifs_lip->add_option("--seed", seed, "sampling seed");

  CLI::App* gifs_verify = gifs->add_subcommand("verify-attractor", "re-check the attractor equation");
  gifs_verify->add_option("bundle", in_path, "bundle directory")->required();
  gifs_verify->add_option("--tol", tol, "numeric residual tolerance");

  CLI::App* rank = app.add_subcommand("rank", "derived-rank agreement for scattered trees");
  rank->add_option("--alpha", alpha_str, "height index")->required();
  rank->add_option("--n", n, "top-level cardinality");
  rank->add_option("--depth", depth, "truncation depth D");
  rank->add_option("--width", width, "truncation width N");

  CLI::App* quotient = app.add_subcommand("quotient", "component quotient of a bundle");
  quotient->add_option("bundle", in_path, "bundle directory")->required();
  quotient->add_option("--gap", gap, "clustering gap (default: half the measured separation)");

  CLI::App* profile = app.add_subcommand("bound-profile", "cardinality diagnostic c_n");
  profile->add_option("--p", p_spec, "cluster cardinalities")->required();
  profile->add_option("--order", profile_order, "diagnostic order m");
  profile->add_option("--n", profile_n, "profile length");

  CLI::App* exp = app.add_subcommand("export", "emit a space as json, csv or svg");
  exp->add_option("format", format, "json | csv | svg")->required();
  exp->add_option("path", in_path, "space.json or bundle directory")->required();
  exp->add_option("-o,--out", out_path, "output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (space_build->parsed()) {
      TreeSpec tree = parse_tree(tree_kind, parse_alpha(alpha_str), n);
      SpaceApprox s = realize_s_space(tree, parse_good(b_spec), depth, width);
      write_text_file(out_path, json_dump(space_to_json(s)));
      return 0;
    }
    if (space_verify->parsed()) {
      SpaceApprox s = space_from_json(read_json_file(in_path));
      SpaceReport r = verify_space_conditions(s);
      std::cout << json_dump(space_report_json(r));
      return r.ok ? 0 : 1;
    }
    if (gifs_build->parsed()) {
      BundleRecipe r;
      r.kind = recipe_kind;
      r.alpha = parse_alpha(alpha_str);
      r.n = n;
      r.b = parse_good(b_spec);
      r.D = depth;
      r.N = width;
      if (recipe_kind == "sandwiched") r.tree = parse_tree(tree_kind, r.alpha, n);
      if (recipe_kind == "mixed") {
        if (p_spec.empty()) throw CLI::ValidationError("--p", "mixed bundles need --p");
        r.p = parse_p(p_spec, width);
        r.m = m;
      }
      if (recipe_kind == "component-space") r.z_count = z_count;
      if (recipe_kind == "densify") {
        if (k_spec.empty()) throw CLI::ValidationError("--K", "densify needs --K");
        r.K = parse_points_1d(k_spec);
        r.eps = eps;
        auto inner = std::make_shared<BundleRecipe>(r);
        inner->kind = inner_recipe;
        inner->K.clear();
        inner->inner = nullptr;
        r.inner = inner;
      }
      BuiltBundle built = build_recipe(r);
      SpaceReport sr = verify_space_conditions(*built.space);
      AttractorOutcome at = check_attractor(built, tol);
      Json report;
      report["space_conditions"] = space_report_json(sr);
      report["attractor"] = at.report;
      if (!built.bound_profile.empty()) report["bound_profile"] = built.bound_profile;
      write_bundle(out_path, r, built, report);
      bool ok = at.ok && (r.kind == "densify" || sr.ok);
      if (!ok) std::cout << json_dump(report);
      return ok ? 0 : 1;
    }
    if (gifs_iterate->parsed()) {
      BuiltBundle built = build_recipe(read_bundle_recipe(in_path));
      Cloud seed_cloud;
      Address limit(std::vector<Entry>{Entry::omega()});
      if (built.space->has_address(limit))
        seed_cloud.push_back(built.space->point_of(limit));
      else
        seed_cloud.push_back(built.space->all_sites().front());
      IterationResult res = iterate_to_attractor(built.gifs, seed_cloud, tol, max_iter, delta);
      std::string csv = iteration_to_csv(res);
      if (out_path.empty())
        std::cout << csv;
      else
        write_text_file(out_path, csv);
      return res.converged ? 0 : 1;
    }
    if (gifs_lip->parsed()) {
      BuiltBundle built = build_recipe(read_bundle_recipe(in_path));
      bool ok = true;
      std::cout << "map,measured,claimed,exhaustive\n";
      for (const GifsMap& f : built.gifs.maps) {
        LipEstimate est = lipschitz_estimate(f, *built.space, seed);
        double claimed = f.claimed_lip.value_or(0.0);
        bool pass = !f.claimed_lip || est.value <= claimed + 1e-9;
        ok = ok && pass;
        std::cout << f.name << "," << est.value << "," << claimed << ","
                  << (est.exhaustive ? 1 : 0) << "\n";
      }
      return ok ? 0 : 1;
    }
    if (gifs_verify->parsed()) {
      BuiltBundle built = build_recipe(read_bundle_recipe(in_path));
      AttractorOutcome at = check_attractor(built, tol);
      std::cout << json_dump(at.report);
      return at.ok ? 0 : 1;
    }
    if (rank->parsed()) {
      OrdinalIndex alpha = parse_alpha(alpha_str);
      TreeSpec tree = n == 1 ? tree_lambda_alpha(alpha) : tree_lambda_alpha_n(alpha, n);
      auto [h, top] = cb_height_symbolic(tree);
      std::cout << "symbolic height " << (h.is_omega() ? std::string("w")
                                                       : std::to_string(h.fin_value()))
                << ", top count " << top << "\n";
      if (h.is_omega()) return 0;  // brute force needs a finite height
      auto ranks = cb_rank_bruteforce(enumerate_boundary(tree, depth, width), tree);
      std::uint32_t max_rank = 0;
      for (const auto& [_, rk] : ranks) max_rank = std::max(max_rank, rk);
      std::size_t count = 0;
      for (const auto& [_, rk] : ranks)
        if (rk == max_rank) ++count;
      std::cout << "derived max rank " << max_rank << ", count " << count << "\n";
      return (max_rank == h.fin_value() && count == top) ? 0 : 1;
    }
    if (quotient->parsed()) {
      BuiltBundle built = build_recipe(read_bundle_recipe(in_path));
      double g = gap;
      if (g <= 0.0) g = verify_space_conditions(*built.space).min_gap / 2.0;
      if (g <= 0.0)
        throw std::runtime_error(
            "quotient: the measured separation underflows at this truncation; "
            "pass an explicit --gap or rebuild with a smaller depth/width");
      auto [reps, assignment] = component_quotient(built.space->all_sites(), g);
      Gifs q = quotient_gifs(built.gifs, assignment);
      Cloud image = hutchinson_step(q, reps);
      std::unordered_set<std::string> rep_keys, img_keys;
      for (const Point& p : reps) rep_keys.insert(point_key(p));
      for (const Point& p : image) img_keys.insert(point_key(p));
      bool ok = rep_keys == img_keys;
      std::cout << "components " << reps.size() << ", quotient attractor "
                << (ok ? "exact" : "mismatch") << "\n";
      return ok ? 0 : 1;
    }
    if (profile->parsed()) {
      std::vector<BigInt> p = parse_p(p_spec, profile_n);
      std::vector<double> c = nonattractor_bound(p, profile_order, profile_n);
      std::cout << "n,c\n";
      for (std::size_t i = 0; i < c.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", c[i]);
        std::cout << (i + 1) << "," << buf << "\n";
      }
      return 0;
    }
    if (exp->parsed()) {
      SpaceApprox s = space_from_json(read_json_file(load_space_path(in_path)));
      std::string payload;
      if (format == "json")
        payload = json_dump(space_to_json(s));
      else if (format == "csv")
        payload = space_to_csv(s);
      else if (format == "svg")
        payload = space_to_svg(s);
      else
        throw CLI::ValidationError("format", "expected json, csv or svg");
      if (out_path.empty())
        std::cout << payload;
      else
        write_text_file(out_path, payload);
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace gifslab
