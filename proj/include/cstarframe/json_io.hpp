#pragma once

// JSON encodings of every domain value. Doubles are written in shortest
// round-trip form, so parse(serialize(v)) == v bit for bit.
//
//   AlgebraElement  {"spec": [d_1, ...], "blocks": [[[ [re, im], ... ], ...], ...]}   (row-major)
//   ModuleVector    {"rank": m, "entries": [AlgebraElement, ...]}
//   ModuleOperator  {"dom": m, "cod": k, "mat": [[AlgebraElement, ...], ...]}        (row i = domain index)
//   FrameSystem     {"module_rank": m, "vectors": [ModuleVector, ...]}
//
// Parse failures throw ParseError naming the JSON path of the bad node.

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cstarframe/cstar_core.hpp"
#include "cstarframe/errors.hpp"
#include "cstarframe/frame_core.hpp"
#include "cstarframe/hilbert_module.hpp"
#include "cstarframe/operator_frames.hpp"

namespace cstarframe::io {

using json = nlohmann::json;

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ParseError("at " + path + ": " + what);
}

inline const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing field \"") + key + "\"");
  return *it;
}

inline const json& array_at(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

inline bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

inline std::optional<double> optional_number(const json& j, const std::string& path) {
  if (j.is_null()) return std::nullopt;
  return number(j, path);
}

template <typename F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StructuralError& e) {
    fail(path, e.what());
  }
}

}  // namespace detail

// --- encoding --------------------------------------------------------------

inline json to_json(const AlgebraSpec& spec) { return spec.block_dims(); }

inline json to_json(const AlgebraElement& a) {
  json blocks = json::array();
  for (const Matrix& m : a.blocks()) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
      rows.push_back(std::move(row));
    }
    blocks.push_back(std::move(rows));
  }
  return {{"spec", to_json(a.spec())}, {"blocks", std::move(blocks)}};
}

inline json to_json(const ModuleVector& x) {
  json entries = json::array();
  for (const auto& e : x.entries()) entries.push_back(to_json(e));
  return {{"rank", x.rank()}, {"entries", std::move(entries)}};
}

inline json to_json(const ModuleOperator& t) {
  json mat = json::array();
  for (int i = 0; i < t.dom_rank(); ++i) {
    json row = json::array();
    for (int j = 0; j < t.cod_rank(); ++j) row.push_back(to_json(t.entry(i, j)));
    mat.push_back(std::move(row));
  }
  return {{"dom", t.dom_rank()}, {"cod", t.cod_rank()}, {"mat", std::move(mat)}};
}

inline json to_json(const FrameSystem& f) {
  json vs = json::array();
  for (const auto& v : f.vectors()) vs.push_back(to_json(v));
  return {{"module_rank", f.module_rank()}, {"vectors", std::move(vs)}};
}

inline json to_json(const FrameBounds& b) {
  return {{"lower", b.lower}, {"upper", b.upper}, {"flavor", to_string(b.flavor)}, {"is_frame", b.is_frame}};
}

inline json to_json(const DouglasReport& r) {
  json j;
  j["cond1_lambda"] = r.cond1_lambda ? json(*r.cond1_lambda) : json(nullptr);
  j["cond2_mu"] = r.cond2_mu ? json(*r.cond2_mu) : json(nullptr);
  j["cond2_spot_checks"] = r.cond2_spot_checks;
  j["cond2_violations"] = r.cond2_violations;
  j["cond3_solution"] = r.cond3_solution ? to_json(*r.cond3_solution) : json(nullptr);
  j["cond4_range_included"] = r.cond4_range_included;
  j["residual"] = r.residual;
  j["tol"] = r.tol;
  j["rank_tol"] = r.rank_tol;
  j["seed"] = r.seed;
  return j;
}

inline json to_json(const KFrameCertificate& c) {
  json j;
  j["frame"] = to_json(c.frame);
  j["K"] = to_json(c.k);
  j["lower"] = c.lower;
  j["upper"] = c.upper;
  j["psd_margin"] = c.psd_margin;
  j["upper_margin"] = c.upper_margin;
  j["witness_L"] = to_json(c.witness_l);
  j["range_included"] = c.range_included;
  j["valid"] = c.valid;
  j["tol"] = c.tol;
  j["warning"] = c.warning ? json(*c.warning) : json(nullptr);
  return j;
}

inline json to_json(const AtomicCertificate& c) {
  json j;
  j["frame"] = to_json(c.frame);
  j["K"] = to_json(c.k);
  j["solution_X"] = to_json(c.solution);
  j["coeff_bound"] = c.coeff_bound;
  j["bessel_bound"] = c.bessel_bound;
  j["residual"] = c.residual;
  j["valid"] = c.valid;
  j["tol"] = c.tol;
  return j;
}

// --- decoding --------------------------------------------------------------

inline AlgebraSpec spec_from_json(const json& j, const std::string& path = "$") {
  const json& arr = detail::array_at(j, path);
  std::vector<int> dims;
  for (std::size_t i = 0; i < arr.size(); ++i) dims.push_back(detail::integer(arr[i], path + "[" + std::to_string(i) + "]"));
  return detail::wrap(path, [&] { return AlgebraSpec(dims); });
}

inline AlgebraElement element_from_json(const json& j, const std::string& path = "$") {
  const AlgebraSpec spec = spec_from_json(detail::field(j, path, "spec"), path + ".spec");
  const std::string bpath = path + ".blocks";
  const json& blocks = detail::array_at(detail::field(j, path, "blocks"), bpath);
  if (blocks.size() != spec.num_blocks()) detail::fail(bpath, "block count does not match spec");
  std::vector<Matrix> out;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::string p = bpath + "[" + std::to_string(b) + "]";
    const json& rows = detail::array_at(blocks[b], p);
    const int d = spec.dim(b);
    if (static_cast<int>(rows.size()) != d) detail::fail(p, "expected " + std::to_string(d) + " rows");
    Matrix m(d, d);
    for (int r = 0; r < d; ++r) {
      const std::string rp = p + "[" + std::to_string(r) + "]";
      const json& row = detail::array_at(rows[r], rp);
      if (static_cast<int>(row.size()) != d) detail::fail(rp, "expected " + std::to_string(d) + " columns");
      for (int c = 0; c < d; ++c) {
        const std::string cp = rp + "[" + std::to_string(c) + "]";
        const json& z = detail::array_at(row[c], cp);
        if (z.size() != 2) detail::fail(cp, "expected [re, im]");
        m(r, c) = Complex(detail::number(z[0], cp + "[0]"), detail::number(z[1], cp + "[1]"));
      }
    }
    out.push_back(std::move(m));
  }
  return {spec, std::move(out)};
}

inline ModuleVector vector_from_json(const json& j, const std::string& path = "$") {
  const int rank = detail::integer(detail::field(j, path, "rank"), path + ".rank");
  const std::string epath = path + ".entries";
  const json& entries = detail::array_at(detail::field(j, path, "entries"), epath);
  if (static_cast<int>(entries.size()) != rank || rank < 1) detail::fail(epath, "entry count does not match rank");
  std::vector<AlgebraElement> elems;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    elems.push_back(element_from_json(entries[i], epath + "[" + std::to_string(i) + "]"));
  }
  return detail::wrap(path, [&] { return ModuleVector(elems); });
}

inline ModuleOperator operator_from_json(const json& j, const std::string& path = "$") {
  const int dom = detail::integer(detail::field(j, path, "dom"), path + ".dom");
  const int cod = detail::integer(detail::field(j, path, "cod"), path + ".cod");
  const std::string mpath = path + ".mat";
  const json& mat = detail::array_at(detail::field(j, path, "mat"), mpath);
  if (dom < 1 || cod < 1) detail::fail(path, "operator ranks must be >= 1");
  if (static_cast<int>(mat.size()) != dom) detail::fail(mpath, "row count does not match dom");
  std::vector<std::vector<AlgebraElement>> entries(dom);
  for (int i = 0; i < dom; ++i) {
    const std::string rp = mpath + "[" + std::to_string(i) + "]";
    const json& row = detail::array_at(mat[i], rp);
    if (static_cast<int>(row.size()) != cod) detail::fail(rp, "column count does not match cod");
    for (int c = 0; c < cod; ++c) entries[i].push_back(element_from_json(row[c], rp + "[" + std::to_string(c) + "]"));
  }
  return detail::wrap(path, [&] { return ModuleOperator(entries); });
}

inline FrameSystem frame_from_json(const json& j, const std::string& path = "$") {
  const int m = detail::integer(detail::field(j, path, "module_rank"), path + ".module_rank");
  const std::string vpath = path + ".vectors";
  const json& vs = detail::array_at(detail::field(j, path, "vectors"), vpath);
  std::vector<ModuleVector> vectors;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const std::string p = vpath + "[" + std::to_string(i) + "]";
    vectors.push_back(vector_from_json(vs[i], p));
    if (vectors.back().rank() != m) detail::fail(p, "vector rank does not match module_rank");
  }
  if (vectors.empty()) detail::fail(vpath, "frame system needs at least one vector");
  return detail::wrap(path, [&] { return FrameSystem(vectors); });
}

inline FrameBounds bounds_from_json(const json& j, const std::string& path = "$") {
  FrameBounds b;
  b.lower = detail::number(detail::field(j, path, "lower"), path + ".lower");
  b.upper = detail::number(detail::field(j, path, "upper"), path + ".upper");
  const json& fl = detail::field(j, path, "flavor");
  if (fl == "loewner") {
    b.flavor = BoundsFlavor::loewner;
  } else if (fl == "norm") {
    b.flavor = BoundsFlavor::norm;
  } else {
    detail::fail(path + ".flavor", "expected \"loewner\" or \"norm\"");
  }
  b.is_frame = detail::boolean(detail::field(j, path, "is_frame"), path + ".is_frame");
  return b;
}

inline DouglasReport douglas_report_from_json(const json& j, const std::string& path = "$") {
  DouglasReport r;
  r.cond1_lambda = detail::optional_number(detail::field(j, path, "cond1_lambda"), path + ".cond1_lambda");
  r.cond2_mu = detail::optional_number(detail::field(j, path, "cond2_mu"), path + ".cond2_mu");
  r.cond2_spot_checks = detail::integer(detail::field(j, path, "cond2_spot_checks"), path + ".cond2_spot_checks");
  r.cond2_violations = detail::integer(detail::field(j, path, "cond2_violations"), path + ".cond2_violations");
  const json& sol = detail::field(j, path, "cond3_solution");
  if (!sol.is_null()) r.cond3_solution = operator_from_json(sol, path + ".cond3_solution");
  r.cond4_range_included = detail::boolean(detail::field(j, path, "cond4_range_included"), path + ".cond4_range_included");
  r.residual = detail::number(detail::field(j, path, "residual"), path + ".residual");
  r.tol = detail::number(detail::field(j, path, "tol"), path + ".tol");
  r.rank_tol = detail::number(detail::field(j, path, "rank_tol"), path + ".rank_tol");
  const json& seed = detail::field(j, path, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) detail::fail(path + ".seed", "expected an integer");
  r.seed = seed.get<std::uint64_t>();
  return r;
}

inline KFrameCertificate kframe_certificate_from_json(const json& j, const std::string& path = "$") {
  KFrameCertificate c{frame_from_json(detail::field(j, path, "frame"), path + ".frame"),
                      operator_from_json(detail::field(j, path, "K"), path + ".K"),
                      detail::number(detail::field(j, path, "lower"), path + ".lower"),
                      detail::number(detail::field(j, path, "upper"), path + ".upper"),
                      detail::number(detail::field(j, path, "psd_margin"), path + ".psd_margin"),
                      detail::number(detail::field(j, path, "upper_margin"), path + ".upper_margin"),
                      operator_from_json(detail::field(j, path, "witness_L"), path + ".witness_L"),
                      detail::boolean(detail::field(j, path, "range_included"), path + ".range_included"),
                      detail::boolean(detail::field(j, path, "valid"), path + ".valid"),
                      detail::number(detail::field(j, path, "tol"), path + ".tol"),
                      std::nullopt};
  const json& w = detail::field(j, path, "warning");
  if (w.is_string()) {
    c.warning = w.get<std::string>();
  } else if (!w.is_null()) {
    detail::fail(path + ".warning", "expected a string or null");
  }
  return c;
}

inline AtomicCertificate atomic_certificate_from_json(const json& j, const std::string& path = "$") {
  return {frame_from_json(detail::field(j, path, "frame"), path + ".frame"),
          operator_from_json(detail::field(j, path, "K"), path + ".K"),
          operator_from_json(detail::field(j, path, "solution_X"), path + ".solution_X"),
          detail::number(detail::field(j, path, "coeff_bound"), path + ".coeff_bound"),
          detail::number(detail::field(j, path, "bessel_bound"), path + ".bessel_bound"),
          detail::number(detail::field(j, path, "residual"), path + ".residual"),
          detail::boolean(detail::field(j, path, "valid"), path + ".valid"),
          detail::number(detail::field(j, path, "tol"), path + ".tol")};
}

/// Parses text, turning syntax errors into ParseError with the byte offset.
inline json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace cstarframe::io
