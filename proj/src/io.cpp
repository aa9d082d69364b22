#include "gifslab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gifslab {

namespace {

Json ordinal_to_json(OrdinalIndex a) {
  if (a.is_omega()) return Json("w");
  return Json(a.fin_value());
}

OrdinalIndex ordinal_from_json(const Json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "w") return OrdinalIndex::omega();
    throw std::invalid_argument("ordinal: expected number or \"w\"");
  }
  return OrdinalIndex::fin(j.get<std::uint32_t>());
}

Json point_to_json(const Point& p) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) arr.push_back(p[i]);
  return arr;
}

Point point_from_json(const Json& j) {
  Point p(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) p[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return p;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Json address_to_json(const Address& a) {
  Json arr = Json::array();
  for (const Entry& e : a.entries) {
    if (e.is_omega())
      arr.push_back("w");
    else
      arr.push_back(e.num_value());
  }
  return arr;
}

Address address_from_json(const Json& j) {
  std::vector<Entry> entries;
  for (const Json& e : j) {
    if (e.is_string()) {
      if (e.get<std::string>() != "w") throw std::invalid_argument("address: bad entry");
      entries.push_back(Entry::omega());
    } else {
      entries.push_back(Entry::num(e.get<std::uint32_t>()));
    }
  }
  return Address(std::move(entries));
}

Json tree_to_json(const TreeSpec& t) {
  Json j;
  switch (t.kind) {
    case TreeKind::LambdaMax:
      j["kind"] = "max";
      break;
    case TreeKind::LambdaS:
      j["kind"] = "no-one";
      break;
    case TreeKind::LambdaR:
      j["kind"] = "at-most-one";
      break;
    case TreeKind::LambdaAlpha:
      j["kind"] = "alpha";
      j["alpha"] = ordinal_to_json(t.alpha);
      break;
    case TreeKind::LambdaAlphaN:
      j["kind"] = "alpha-n";
      j["alpha"] = ordinal_to_json(t.alpha);
      j["n"] = t.n;
      break;
    case TreeKind::FromAddressSet: {
      j["kind"] = "subset";
      Json arr = Json::array();
      for (const Address& a : t.addresses) arr.push_back(address_to_json(a));
      j["addresses"] = arr;
      break;
    }
    case TreeKind::PrefixedUnion: {
      j["kind"] = "union";
      Json arr = Json::array();
      for (const auto& [k, sub] : t.branches) {
        Json b;
        b["k"] = k;
        b["tree"] = tree_to_json(sub);
        arr.push_back(b);
      }
      j["branches"] = arr;
      j["omega"] = t.union_omega;
      break;
    }
    case TreeKind::SubtreeShift1:
      j["kind"] = "shift1";
      j["base"] = tree_to_json(*t.base);
      j["eta"] = address_to_json(t.eta);
      break;
    case TreeKind::SubtreeShift2:
      j["kind"] = "shift2";
      j["base"] = tree_to_json(*t.base);
      j["eta"] = address_to_json(t.eta);
      j["k"] = t.shift_k;
      break;
  }
  return j;
}

TreeSpec tree_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "max") return tree_lambda_max();
  if (kind == "no-one") return tree_lambda_s();
  if (kind == "at-most-one") return tree_lambda_r();
  if (kind == "alpha") return tree_lambda_alpha(ordinal_from_json(j.at("alpha")));
  if (kind == "alpha-n")
    return tree_lambda_alpha_n(ordinal_from_json(j.at("alpha")), j.at("n").get<std::uint32_t>());
  if (kind == "subset") {
    std::vector<Address> addrs;
    for (const Json& a : j.at("addresses")) addrs.push_back(address_from_json(a));
    return tree_of_subset(addrs);
  }
  if (kind == "union") {
    std::vector<std::pair<std::uint32_t, TreeSpec>> branches;
    for (const Json& b : j.at("branches"))
      branches.emplace_back(b.at("k").get<std::uint32_t>(), tree_from_json(b.at("tree")));
    return tree_prefixed_union(std::move(branches), j.at("omega").get<bool>());
  }
  if (kind == "shift1")
    return subtree_shift1(tree_from_json(j.at("base")), address_from_json(j.at("eta")));
  if (kind == "shift2")
    return subtree_shift2(tree_from_json(j.at("base")), address_from_json(j.at("eta")),
                          j.at("k").get<std::uint32_t>());
  throw std::invalid_argument("tree: unknown kind " + kind);
}

Json good_to_json(const GoodSequence& b) {
  Json j;
  if (b.kind() == GoodSequence::Kind::Geometric) {
    j["kind"] = "geometric";
    j["c"] = b.b0();
    j["q"] = b.tail_ratio();
  } else {
    j["kind"] = "ratios";
    j["b0"] = b.b0();
    j["q"] = b.ratios();
    j["tail"] = b.tail_ratio();
  }
  return j;
}

GoodSequence good_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "geometric")
    return GoodSequence::geometric(j.at("c").get<double>(), j.at("q").get<double>());
  if (kind == "ratios")
    return GoodSequence::ratio_table(j.at("b0").get<double>(),
                                     j.at("q").get<std::vector<double>>(),
                                     j.at("tail").get<double>());
  throw std::invalid_argument("scale: unknown kind " + kind);
}

Json space_to_json(const SpaceApprox& s) {
  Json j;
  j["tree"] = tree_to_json(s.tree);
  j["b"] = good_to_json(s.b);
  j["dim"] = s.dim;
  j["D"] = s.D;
  j["N"] = s.N;
  j["origin"] = s.origin;
  j["error_bound"] = s.error_bound;
  Json pts = Json::array();
  for (const auto& [ba, p] : s.points) {
    Json e;
    e["addr"] = address_to_json(ba.prefix);
    e["x"] = point_to_json(p);
    e["exact"] = ba.exact();
    pts.push_back(e);
  }
  j["points"] = pts;
  if (!s.cluster_points.empty()) {
    Json cl = Json::array();
    for (const auto& [k, v] : s.cluster_points) {
      Json e;
      e["k"] = k;
      Json arr = Json::array();
      for (const Point& p : v) arr.push_back(point_to_json(p));
      e["points"] = arr;
      cl.push_back(e);
    }
    j["clusters"] = cl;
  }
  if (!s.copies.empty()) {
    Json cp = Json::array();
    for (const auto& [ba, v] : s.copies) {
      Json e;
      e["addr"] = address_to_json(ba.prefix);
      e["exact"] = ba.exact();
      Json arr = Json::array();
      for (const Point& p : v) arr.push_back(point_to_json(p));
      e["points"] = arr;
      cp.push_back(e);
    }
    j["copies"] = cp;
  }
  return j;
}

SpaceApprox space_from_json(const Json& j) {
  SpaceApprox s;
  s.tree = tree_from_json(j.at("tree"));
  s.b = good_from_json(j.at("b"));
  s.dim = j.at("dim").get<int>();
  s.D = j.at("D").get<std::uint32_t>();
  s.N = j.at("N").get<std::uint32_t>();
  s.origin = j.at("origin").get<double>();
  s.error_bound = j.at("error_bound").get<double>();
  for (const Json& e : j.at("points")) {
    BoundaryAddress ba{address_from_json(e.at("addr")),
                       e.at("exact").get<bool>() ? Exactness::Exact : Exactness::TruncatedPath};
    s.points.emplace_back(ba, point_from_json(e.at("x")));
  }
  if (j.contains("clusters")) {
    for (const Json& e : j.at("clusters")) {
      std::vector<Point> v;
      for (const Json& p : e.at("points")) v.push_back(point_from_json(p));
      s.cluster_points.emplace_back(e.at("k").get<std::uint32_t>(), std::move(v));
    }
  }
  if (j.contains("copies")) {
    for (const Json& e : j.at("copies")) {
      BoundaryAddress ba{address_from_json(e.at("addr")),
                         e.at("exact").get<bool>() ? Exactness::Exact : Exactness::TruncatedPath};
      std::vector<Point> v;
      for (const Json& p : e.at("points")) v.push_back(point_from_json(p));
      s.copies.emplace_back(ba, std::move(v));
    }
  }
  s.rebuild_index();
  return s;
}

Json recipe_to_json(const BundleRecipe& r) {
  Json j;
  j["recipe"] = r.kind;
  j["D"] = r.D;
  j["N"] = r.N;
  if (r.kind == "scattered" || r.kind == "mixed") {
    j["alpha"] = ordinal_to_json(r.alpha);
    j["n"] = r.n;
  }
  if (r.kind == "scattered" || r.kind == "sandwiched" || r.kind == "component-space")
    j["b"] = good_to_json(r.b);
  if (r.kind == "sandwiched" && r.tree) j["tree"] = tree_to_json(*r.tree);
  if (r.kind == "mixed") {
    Json arr = Json::array();
    for (const BigInt& v : r.p) arr.push_back(v.str());
    j["p"] = arr;
    j["m"] = r.m;
  }
  if (r.kind == "component-space") j["z_count"] = r.z_count;
  if (r.kind == "densify") {
    Json arr = Json::array();
    for (const Point& p : r.K) arr.push_back(point_to_json(p));
    j["K"] = arr;
    j["eps"] = r.eps;
    if (!r.inner) throw std::invalid_argument("recipe: densify needs an inner recipe");
    j["inner"] = recipe_to_json(*r.inner);
  }
  return j;
}

BundleRecipe recipe_from_json(const Json& j) {
  BundleRecipe r;
  r.kind = j.at("recipe").get<std::string>();
  r.D = j.at("D").get<std::uint32_t>();
  r.N = j.at("N").get<std::uint32_t>();
  if (j.contains("alpha")) r.alpha = ordinal_from_json(j.at("alpha"));
  if (j.contains("n")) r.n = j.at("n").get<std::uint32_t>();
  if (j.contains("b")) r.b = good_from_json(j.at("b"));
  if (j.contains("tree")) r.tree = tree_from_json(j.at("tree"));
  if (j.contains("p"))
    for (const Json& v : j.at("p")) r.p.emplace_back(v.get<std::string>());
  if (j.contains("m")) r.m = j.at("m").get<std::uint32_t>();
  if (j.contains("z_count")) r.z_count = j.at("z_count").get<std::size_t>();
  if (j.contains("K"))
    for (const Json& p : j.at("K")) r.K.push_back(point_from_json(p));
  if (j.contains("eps")) r.eps = j.at("eps").get<double>();
  if (j.contains("inner")) r.inner = std::make_shared<BundleRecipe>(recipe_from_json(j.at("inner")));
  return r;
}

Gifs quarter_segment_gifs() {
  Gifs g;
  for (int i = 0; i < 4; ++i) {
    GifsMap f;
    f.order = 2;
    f.name = "quarter" + std::to_string(i);
    f.claimed_lip = 0.25;
    double shift = i / 4.0;
    f.numeric_fn = [shift](const std::vector<Point>& xs) {
      Point out(1);
      out[0] = xs[0][0] / 4.0 + shift;
      return out;
    };
    g.maps.push_back(std::move(f));
  }
  return g;
}

BuiltBundle build_recipe(const BundleRecipe& r) {
  if (r.kind == "scattered") {
    ScatteredGifsBundle b = gifs_scattered(r.alpha, r.n, r.b, r.D, r.N);
    return {b.space, std::move(b.gifs), std::move(b.witnesses), {}};
  }
  if (r.kind == "sandwiched") {
    ScatteredGifsBundle b = gifs_sandwiched(r.tree ? *r.tree : tree_lambda_r(), r.b, r.D, r.N);
    return {b.space, std::move(b.gifs), std::move(b.witnesses), {}};
  }
  if (r.kind == "mixed") {
    if (r.p.empty()) throw std::invalid_argument("recipe: mixed needs p");
    GoodPair pair = pair_b_for_p(r.p, r.p.size());
    ScatteredGifsBundle inner = gifs_scattered(r.alpha, r.n, pair.b, r.D, r.N);
    MixedGifsBundle b = gifs_mixed(inner, pair, r.m, r.D, r.N);
    return {b.space, std::move(b.gifs), {}, std::move(b.bound_profile)};
  }
  if (r.kind == "component-space") {
    TemplateCloud Z = segment_grid(r.z_count);
    ScatteredGifsBundle b = gifs_component_space(quarter_segment_gifs(), Z, r.b, r.D, r.N);
    return {b.space, std::move(b.gifs), std::move(b.witnesses), {}};
  }
  if (r.kind == "densify") {
    if (!r.inner) throw std::invalid_argument("recipe: densify needs an inner recipe");
    BuiltBundle inner = build_recipe(*r.inner);
    auto [space, gifs] = densify(r.K, r.eps, *inner.space, inner.gifs);
    return {std::make_shared<SpaceApprox>(std::move(space)), std::move(gifs), {}, {}};
  }
  throw std::invalid_argument("recipe: unknown kind " + r.kind);
}

namespace {

Json map_descriptor(const GifsMap& f) {
  Json d;
  d["name"] = f.name;
  d["order"] = f.order;
  d["backend"] = f.symbolic() ? "symbolic" : "numeric";
  if (f.claimed_lip) d["claimed_lip"] = *f.claimed_lip;
  return d;
}

}  // namespace

void write_bundle(const std::string& dir, const BundleRecipe& recipe, const BuiltBundle& built,
                  const Json& report) {
  std::filesystem::create_directories(dir);
  write_text_file(dir + "/space.json", json_dump(space_to_json(*built.space)));

  Json gj;
  gj["recipe"] = recipe_to_json(recipe);
  gj["order"] = built.gifs.order();
  Json maps = Json::array();
  for (const GifsMap& f : built.gifs.maps) maps.push_back(map_descriptor(f));
  gj["maps"] = maps;
  if (!built.bound_profile.empty()) gj["bound_profile"] = built.bound_profile;
  write_text_file(dir + "/gifs.json", json_dump(gj));

  Json wj = Json::array();
  for (const auto& [name, f] : built.witnesses) {
    Json d = map_descriptor(f);
    d["witness"] = name;
    wj.push_back(d);
  }
  write_text_file(dir + "/witnesses.json", json_dump(wj));
  write_text_file(dir + "/report.json", json_dump(report));
}

BundleRecipe read_bundle_recipe(const std::string& dir) {
  std::string path = dir;
  if (std::filesystem::is_directory(path)) path += "/gifs.json";
  Json j = read_json_file(path);
  if (j.contains("recipe") && j.at("recipe").is_object()) return recipe_from_json(j.at("recipe"));
  return recipe_from_json(j);
}

std::string space_to_csv(const SpaceApprox& s) {
  std::ostringstream out;
  out << "site,addr,exact";
  for (int i = 0; i < s.dim; ++i) out << ",x" << i;
  out << "\n";
  auto row = [&](const char* site, const std::string& addr, bool exact, const Point& p) {
    out << site << "," << addr << "," << (exact ? 1 : 0);
    for (Eigen::Index i = 0; i < p.size(); ++i) out << "," << fmt_double(p[i]);
    out << "\n";
  };
  for (const auto& [ba, p] : s.points) row("point", ba.prefix.to_path(), ba.exact(), p);
  for (const auto& [ba, v] : s.copies)
    for (const Point& p : v) row("copy", ba.prefix.to_path(), ba.exact(), p);
  for (const auto& [k, v] : s.cluster_points)
    for (const Point& p : v) row("cluster", std::to_string(k), true, p);
  return out.str();
}

std::string iteration_to_csv(const IterationResult& r) {
  std::ostringstream out;
  out << "iter,hausdorff_step,set_size\n";
  for (std::size_t i = 0; i < r.history.size(); ++i)
    out << (i + 1) << "," << fmt_double(r.history[i]) << ","
        << (i < r.sizes.size() ? r.sizes[i] : r.set.size()) << "\n";
  return out.str();
}

std::string space_to_svg(const SpaceApprox& s) {
  const Cloud sites = s.all_sites();
  std::ostringstream out;
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return std::string(buf);
  };
  const double W = 800.0;
  if (s.dim == 1) {
    // Main line plus log-scale insets zooming toward the left end.
    double lo = sites[0][0], hi = sites[0][0];
    for (const Point& p : sites) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
    double span = std::max(hi - lo, 1e-300);
    const int rows = 4;
    const double rowh = 60.0;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\""
        << rows * static_cast<int>(rowh) << "\">\n";
    double zoom = 1.0;
    for (int rrow = 0; rrow < rows; ++rrow) {
      double y = rrow * rowh + rowh / 2.0;
      double window = span * zoom;
      out << "<line x1=\"0\" y1=\"" << num(y) << "\" x2=\"800\" y2=\"" << num(y)
          << "\" stroke=\"#999\"/>\n";
      out << "<text x=\"4\" y=\"" << num(y - 18.0) << "\" font-size=\"10\">window "
          << fmt_double(window) << "</text>\n";
      for (const Point& p : sites) {
        double t = (p[0] - lo) / window;
        if (t < 0.0 || t > 1.0) continue;
        out << "<circle cx=\"" << num(t * W) << "\" cy=\"" << num(y)
            << "\" r=\"1.5\" fill=\"#1b6\"/>\n";
      }
      zoom /= 16.0;
    }
    out << "</svg>\n";
  } else {
    double lox = sites[0][0], hix = sites[0][0], loy = sites[0][1], hiy = sites[0][1];
    for (const Point& p : sites) {
      lox = std::min(lox, p[0]);
      hix = std::max(hix, p[0]);
      loy = std::min(loy, p[1]);
      hiy = std::max(hiy, p[1]);
    }
    double spanx = std::max(hix - lox, 1e-300), spany = std::max(hiy - loy, 1e-300);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\">\n";
    for (const Point& p : sites)
      out << "<circle cx=\"" << num((p[0] - lox) / spanx * W) << "\" cy=\""
          << num(800.0 - (p[1] - loy) / spany * W) << "\" r=\"1.5\" fill=\"#1b6\"/>\n";
    out << "</svg>\n";
  }
  return out.str();
}

std::string json_dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace gifslab
