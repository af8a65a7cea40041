#include "quasisl/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "quasisl/errors.hpp"

namespace quasisl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

double want_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::string want_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Expr parse_coefficient(const json& j, const std::string& path) {
  std::string src = want_string(j, path);
  try {
    return Expr::parse(src, /*allow_imaginary=*/false);
  } catch (const ParseError& e) {
    fail(path, std::string("invalid expression: ") + e.what());
  }
}

Complex want_complex_pair(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(path, "expected a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

Problem build_problem(const json& root, double quad_tol) {
  if (!root.contains("partition")) fail("partition", "missing");
  const json& jp = root["partition"];
  if (!jp.is_array() || jp.size() < 2)
    fail("partition", "expected an array of at least two reals");
  std::vector<double> partition;
  for (std::size_t i = 0; i < jp.size(); ++i)
    partition.push_back(
        want_number(jp[i], "partition[" + std::to_string(i) + "]"));
  for (std::size_t i = 1; i < partition.size(); ++i)
    if (!(partition[i] > partition[i - 1]))
      fail("partition", "must be strictly increasing");

  if (!root.contains("intervals")) fail("intervals", "missing");
  const json& ji = root["intervals"];
  if (!ji.is_array() || ji.size() + 1 != partition.size())
    fail("intervals", "expected " + std::to_string(partition.size() - 1) +
                          " entries (partition length - 1)");

  std::vector<IntervalCoefficients> coeffs;
  for (std::size_t k = 0; k < ji.size(); ++k) {
    const std::string base = "intervals[" + std::to_string(k) + "]";
    const json& jk = ji[k];
    if (!jk.is_object()) fail(base, "expected an object");
    IntervalCoefficients c;
    if (jk.contains("p")) c.p = parse_coefficient(jk["p"], base + ".p");
    else c.p = Expr::constant(1.0);
    if (jk.contains("r")) c.r = parse_coefficient(jk["r"], base + ".r");
    else c.r = Expr::constant(0.0);

    PotentialSpec spec;
    const bool has_q = jk.contains("q") && !jk["q"].is_null();
    const bool has_Q = jk.contains("Q") && !jk["Q"].is_null();
    if (has_q && has_Q)
      fail(base, "supply either q or Q, not both");
    if (has_Q) {
      spec.direct_Q = parse_coefficient(jk["Q"], base + ".Q");
    } else if (has_q) {
      const json& jq = jk["q"];
      if (!jq.is_object()) fail(base + ".q", "expected an object");
      if (jq.contains("ac") && !jq["ac"].is_null())
        spec.ac_part = parse_coefficient(jq["ac"], base + ".q.ac");
      if (jq.contains("deltas")) {
        const json& jd = jq["deltas"];
        if (!jd.is_array()) fail(base + ".q.deltas", "expected an array");
        for (std::size_t d = 0; d < jd.size(); ++d) {
          const std::string dpath =
              base + ".q.deltas[" + std::to_string(d) + "]";
          if (!jd[d].is_object() || !jd[d].contains("at") ||
              !jd[d].contains("weight"))
            fail(dpath, "expected {at, weight}");
          Delta delta;
          delta.location = want_number(jd[d]["at"], dpath + ".at");
          delta.weight = want_number(jd[d]["weight"], dpath + ".weight");
          if (!(delta.location > partition[k] &&
                delta.location < partition[k + 1]))
            fail(dpath + ".at",
                 "delta must lie strictly inside (" +
                     std::to_string(partition[k]) + ", " +
                     std::to_string(partition[k + 1]) +
                     "); for a node interaction split the partition and use "
                     "a transmission-type K block");
          spec.deltas.push_back(delta);
        }
      }
    }
    try {
      c.Q = build_primitive(spec, partition[k], partition[k + 1], quad_tol);
    } catch (const Error& e) {
      fail(base + ".q", e.what());
    }
    if (jk.contains("breakpoints")) {
      const json& jb = jk["breakpoints"];
      if (!jb.is_array()) fail(base + ".breakpoints", "expected an array");
      std::vector<double> pts;
      for (std::size_t i = 0; i < jb.size(); ++i)
        pts.push_back(want_number(
            jb[i], base + ".breakpoints[" + std::to_string(i) + "]"));
      c.extra_breakpoints =
          BreakpointSet(std::move(pts), partition.back() - partition.front());
    }
    coeffs.push_back(std::move(c));
  }
  return Problem(std::move(partition), std::move(coeffs));
}

BoundaryMatrix build_boundary(const json& root, int m) {
  if (!root.contains("boundary")) fail("boundary", "missing");
  const json& jb = root["boundary"];
  if (!jb.is_object()) fail("boundary", "expected an object");
  Variant variant = Variant::Dissipative;
  if (jb.contains("variant")) {
    std::string v = want_string(jb["variant"], "boundary.variant");
    if (v == "dissipative") variant = Variant::Dissipative;
    else if (v == "accumulative") variant = Variant::Accumulative;
    else fail("boundary.variant", "expected 'dissipative' or 'accumulative'");
  }
  const bool has_K = jb.contains("K");
  const bool has_presets = jb.contains("presets");
  if (has_K == has_presets)
    fail("boundary", "supply exactly one of K or presets");
  if (has_K) {
    const json& jk = jb["K"];
    const int n = 2 * m;
    if (!jk.is_array() || static_cast<int>(jk.size()) != n)
      fail("boundary.K", "expected a " + std::to_string(n) + "x" +
                             std::to_string(n) + " array (2m x 2m)");
    MatrixXc K(n, n);
    for (int i = 0; i < n; ++i) {
      const std::string rpath = "boundary.K[" + std::to_string(i) + "]";
      if (!jk[i].is_array() || static_cast<int>(jk[i].size()) != n)
        fail(rpath, "expected " + std::to_string(n) + " entries");
      for (int j = 0; j < n; ++j)
        K(i, j) =
            want_complex_pair(jk[i][j], rpath + "[" + std::to_string(j) + "]");
    }
    return BoundaryMatrix(std::move(K), variant);
  }
  const json& jp = jb["presets"];
  if (!jp.is_array() || static_cast<int>(jp.size()) != m + 1)
    fail("boundary.presets",
         "expected " + std::to_string(m + 1) + " node entries (one per node)");
  std::vector<NodeBlockSpec> specs;
  for (int j = 0; j <= m; ++j) {
    const std::string path = "boundary.presets[" + std::to_string(j) + "]";
    const json& je = jp[j];
    NodeBlockSpec spec;
    if (je.is_string()) {
      spec.preset = je.get<std::string>();
    } else if (je.is_object() && je.contains("block")) {
      const json& blk = je["block"];
      if (!blk.is_array() || blk.empty())
        fail(path + ".block", "expected a square array of [re,im] pairs");
      const int len = static_cast<int>(blk.size());
      spec.block = MatrixXc(len, len);
      for (int r = 0; r < len; ++r) {
        if (!blk[r].is_array() || static_cast<int>(blk[r].size()) != len)
          fail(path + ".block", "expected a square array");
        for (int c = 0; c < len; ++c)
          spec.block(r, c) = want_complex_pair(
              blk[r][c], path + ".block[" + std::to_string(r) + "][" +
                             std::to_string(c) + "]");
      }
    } else {
      fail(path, "expected a preset name or {block: ...}");
    }
    specs.push_back(std::move(spec));
  }
  try {
    return BoundaryMatrix(expand_presets(specs, m), variant);
  } catch (const Error& e) {
    fail("boundary.presets", e.what());
  }
}

}  // namespace

ConfigDocument load_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");

  IntegratorOptions tol;
  double quad_tol = 1e-12;
  if (root.contains("tolerances")) {
    const json& jt = root["tolerances"];
    if (!jt.is_object()) fail("tolerances", "expected an object");
    if (jt.contains("rel")) tol.rel_tol = want_number(jt["rel"], "tolerances.rel");
    if (jt.contains("abs")) tol.abs_tol = want_number(jt["abs"], "tolerances.abs");
    if (jt.contains("quad")) quad_tol = want_number(jt["quad"], "tolerances.quad");
    if (!(tol.rel_tol > 0) || !(tol.abs_tol > 0) || !(quad_tol > 0))
      fail("tolerances", "tolerances must be positive");
  }

  Problem problem = build_problem(root, quad_tol);
  BoundaryMatrix boundary = build_boundary(root, problem.intervals());
  ConfigDocument doc(std::move(problem), std::move(boundary));
  doc.tolerances = tol;
  doc.quad_tol = quad_tol;

  if (root.contains("search")) {
    const json& js = root["search"];
    if (!js.is_object()) fail("search", "expected an object");
    for (const char* key : {"re_min", "re_max", "im_min", "im_max"})
      if (!js.contains(key)) fail(std::string("search.") + key, "missing");
    SearchRegion region{want_number(js["re_min"], "search.re_min"),
                        want_number(js["re_max"], "search.re_max"),
                        want_number(js["im_min"], "search.im_min"),
                        want_number(js["im_max"], "search.im_max")};
    if (!(region.re_max > region.re_min) || !(region.im_max > region.im_min))
      fail("search", "region must have positive extent");
    doc.search = region;
    if (js.contains("max_count")) {
      double mc = want_number(js["max_count"], "search.max_count");
      if (mc < 1) fail("search.max_count", "must be at least 1");
      doc.max_count = static_cast<int>(mc);
    }
  }
  return doc;
}

ConfigDocument load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config_text(ss.str());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace quasisl
