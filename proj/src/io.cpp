#include "cltlab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cltlab/error.hpp"

namespace cltlab {
namespace {

std::int64_t get_int(const Json& v, const char* what) {
  if (!v.is_number_integer()) throw InvalidInstance(std::string(what) + " must be an integer");
  return v.get<std::int64_t>();
}

double get_double(const Json& v, const char* what) {
  if (!v.is_number()) throw InvalidInstance(std::string(what) + " must be a number");
  return v.get<double>();
}

const Json& require(const Json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    throw InvalidInstance(std::string("missing key '") + key + "'");
  return obj.at(key);
}

void dump_value(const Json& v, int indent, int depth, std::string& out) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_value(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_primitive(); });
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += flat && indent >= 0 ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        dump_value(e, indent, depth + 1, out);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: out += format_double(v.get<double>()); return;
    default: out += v.dump(); return;
  }
}

}  // namespace

Instance parse_instance(const Json& doc_in) {
  const Json& doc = doc_in.is_object() && doc_in.contains("instance") ? doc_in.at("instance") : doc_in;
  const Json& ja = require(doc, "a");
  const Json& origin = require(ja, "origin");
  if (!origin.is_array() || origin.size() != 2) throw InvalidInstance("a.origin must be [r, s]");
  const Json& rows = require(ja, "values");
  if (!rows.is_array() || rows.empty()) throw InvalidInstance("a.values must be a non-empty grid");
  std::vector<std::vector<double>> grid;
  for (const auto& row : rows) {
    if (!row.is_array()) throw InvalidInstance("a.values rows must be arrays");
    std::vector<double>& dst = grid.emplace_back();
    for (const auto& x : row) dst.push_back(get_double(x, "a.values entry"));
  }
  CoefficientArray a = CoefficientArray::from_rows(
      {get_int(origin[0], "a.origin"), get_int(origin[1], "a.origin")}, grid);

  const Json& jg = require(doc, "gamma");
  if (jg.contains("rects") == jg.contains("points"))
    throw InvalidInstance("gamma needs exactly one of 'rects' or 'points'");
  if (jg.contains("rects")) {
    std::vector<Rect> rects;
    for (const auto& r : jg.at("rects")) {
      if (!r.is_array() || r.size() != 4)
        throw InvalidInstance("each rect must be [Mlo, Mhi, Nlo, Nhi]");
      rects.push_back({get_int(r[0], "rect"), get_int(r[1], "rect"), get_int(r[2], "rect"),
                       get_int(r[3], "rect")});
    }
    return {std::move(a), Region::rect_union(std::move(rects))};
  }
  std::vector<LatticePoint> pts;
  for (const auto& p : jg.at("points")) {
    if (!p.is_array() || p.size() != 2) throw InvalidInstance("each point must be [j, k]");
    pts.push_back({get_int(p[0], "point"), get_int(p[1], "point")});
  }
  return {std::move(a), Region::point_set(std::move(pts))};
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInstance("cannot open instance file '" + path.string() + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidInstance(std::string("instance file is not valid JSON: ") + e.what());
  }
  return parse_instance(doc);
}

Json instance_to_json(const Instance& inst) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < inst.a.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < inst.a.cols(); ++j) row.push_back(inst.a.values()[i * inst.a.cols() + j]);
    rows.push_back(std::move(row));
  }
  Json gamma;
  if (inst.gamma.is_rect_union()) {
    gamma["rects"] = Json::array();
    for (const auto& r : inst.gamma.rects())
      gamma["rects"].push_back({r.row_lo, r.row_hi, r.col_lo, r.col_hi});
  } else {
    gamma["points"] = Json::array();
    for (const auto& p : inst.gamma.points()) gamma["points"].push_back({p.r, p.s});
  }
  return Json{{"a", {{"origin", {inst.a.origin().r, inst.a.origin().s}}, {"values", rows}}},
              {"gamma", gamma}};
}

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  std::string s(buf, res.ptr);
  // Keep a marker that this is a float so it parses back as one.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string dump_json(const Json& doc, int indent) {
  std::string out;
  dump_value(doc, indent, 0, out);
  out += '\n';
  return out;
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

std::string instance_hash(const Instance& inst) {
  return fnv1a64_hex(dump_json(instance_to_json(inst), -1));
}

Json weights_to_json(const WeightArray& b) {
  Json grid = Json::array();
  for (std::size_t i = 0; i < b.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < b.cols(); ++j) row.push_back(b.values()[i * b.cols() + j]);
    grid.push_back(std::move(row));
  }
  return Json{{"origin", {b.origin().r, b.origin().s}},
              {"grid", grid},
              {"sigma", b.sigma()},
              {"rho", b.rho()},
              {"argmax", {b.argmax().r, b.argmax().s}}};
}

std::string weights_to_csv(const WeightArray& b) {
  std::string out = "r,s,b\n";
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      out += std::to_string(b.origin().r + static_cast<std::int64_t>(i)) + ',' +
             std::to_string(b.origin().s + static_cast<std::int64_t>(j)) + ',' +
             format_double(b.values()[i * b.cols() + j]) + '\n';
    }
  return out;
}

Json bound_report_to_json(const BoundReport& r, bool include_probes) {
  Json probes_json = Json::array();
  std::size_t below = 0;
  for (const auto& p : r.block_probes) {
    probes_json.push_back({{"m", p.m},
                   {"n", p.n},
                   {"q", p.q},
                   {"bound", p.bound},
                   {"q_nested", p.q_nested},
                   {"bound_nested", p.bound_nested},
                   {"below_rho", p.below_rho}});
    below += p.below_rho ? 1 : 0;
  }
  Json ks = {{"value", r.ks_upper.value}, {"T", r.ks_upper.T}, {"eta", r.ks_upper.eta}};
  if (include_probes) {
    Json probes = Json::array();
    for (const auto& p : r.ks_upper.probes) probes.push_back({p.T, p.eta, p.value});
    ks["probes"] = std::move(probes);
    ks["probe_columns"] = {"T", "eta", "value"};
  }
  Json out = {{"provenance", {{"instance_hash", r.instance_hash}, {"tool", "clt_lab"}}},
              {"distribution", r.distribution},
              {"cardinality", r.cardinality},
              {"sigma", r.sigma},
              {"rho_exact", r.rho},
              {"argmax", {r.argmax.r, r.argmax.s}},
              {"norm1", r.norm1},
              {"norm2", r.norm2},
              {"crude_p1", r.crude_p1},
              {"crude_p2", r.crude_p2},
              {"block_bound_grid", probes_json},
              {"closed_form_audit", {{"probes", r.block_probes.size()}, {"closed_form_below_rho", below}}},
              {"ks_upper", ks}};
  if (r.rectangle) {
    out["rectangle_bound"] = {{"value", r.rectangle->value},
                              {"intermediate", r.rectangle->intermediate},
                              {"m", r.rectangle->block.m},
                              {"n", r.rectangle->block.n},
                              {"rect_count", r.rectangle->rect_count}};
  } else {
    out["rectangle_bound"] = nullptr;
  }
  return out;
}

Json simulation_report_to_json(const SimulationReport& r) {
  return Json{{"instance_hash", r.instance_hash},
              {"distribution", r.distribution},
              {"n_samples", r.n_samples},
              {"seed", r.seed},
              {"alpha", r.alpha},
              {"ks_empirical", r.ks_empirical},
              {"dkw_margin", r.dkw_margin},
              {"sample_mean", r.sample_mean},
              {"sample_variance", r.sample_variance},
              {"histogram",
               {{"lo", Histogram::kLo},
                {"hi", Histogram::kHi},
                {"bins", Histogram::kBins},
                {"counts", r.histogram.counts},
                {"underflow", r.histogram.underflow},
                {"overflow", r.histogram.overflow}}}};
}

std::string simulation_report_to_csv(const SimulationReport& r) {
  std::string out =
      "instance_hash,distribution,n_samples,seed,alpha,ks_empirical,dkw_margin,sample_mean,"
      "sample_variance\n";
  out += r.instance_hash + ',' + r.distribution + ',' + std::to_string(r.n_samples) + ',' +
         std::to_string(r.seed) + ',' + format_double(r.alpha) + ',' + format_double(r.ks_empirical) +
         ',' + format_double(r.dkw_margin) + ',' + format_double(r.sample_mean) + ',' +
         format_double(r.sample_variance) + '\n';
  return out;
}

Json certificate_to_json(const Certificate& c, const ExactConstants* exact,
                         const std::vector<std::string>& members) {
  Json out = {{"epsilon", c.epsilon}, {"T", c.T},         {"eta", c.eta},
              {"z", c.z},             {"jsharp", c.jsharp}, {"delta", c.delta},
              {"class", members}};
  if (exact != nullptr)
    out["exact"] = {{"epsilon", exact->epsilon},
                    {"T", exact->T},
                    {"eta", exact->eta},
                    {"chain_constant", exact->chain_constant}};
  return out;
}

Json sweep_to_json(const SweepResult& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"kappa", r.kappa},
                    {"kappa_norm", r.kappa_norm},
                    {"rho", r.rho},
                    {"ks_empirical", r.ks_empirical},
                    {"ks_upper", r.ks_upper},
                    {"ks_exact", r.ks_exact ? Json(*r.ks_exact) : Json(nullptr)},
                    {"dkw_margin", r.dkw_margin},
                    {"n_samples", r.n_samples},
                    {"seed", r.seed},
                    {"rect_count", r.rect_count},
                    {"descriptor", r.descriptor}});
  }
  return Json{{"rows", rows}, {"warnings", s.warnings}};
}

std::string sweep_to_csv(const SweepResult& s) {
  std::string out = "kappa,rho,ks_empirical,ks_upper,n_samples,seed\n";
  for (const auto& r : s.rows)
    out += format_double(r.kappa) + ',' + format_double(r.rho) + ',' +
           format_double(r.ks_empirical) + ',' + format_double(r.ks_upper) + ',' +
           std::to_string(r.n_samples) + ',' + std::to_string(r.seed) + '\n';
  return out;
}

std::string sweep_to_svg(const SweepResult& s) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 20, kTop = 30, kBottom = 50;
  double x_lo = 1e300, x_hi = 0, y_lo = 1e300, y_hi = 0;
  for (const auto& r : s.rows) {
    x_lo = std::min(x_lo, r.kappa);
    x_hi = std::max(x_hi, r.kappa);
    for (double y : {r.ks_empirical, r.ks_upper})
      if (y > 0) {
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
      }
  }
  if (s.rows.empty() || !(x_lo > 0) || !(y_lo > 0)) {
    x_lo = 1;
    x_hi = 10;
    y_lo = 1e-3;
    y_hi = 1;
  }
  const double lx0 = std::floor(std::log10(x_lo)), lx1 = std::max(lx0 + 1, std::ceil(std::log10(x_hi)));
  const double ly0 = std::floor(std::log10(y_lo)), ly1 = std::max(ly0 + 1, std::ceil(std::log10(y_hi)));
  const auto px = [&](double x) {
    return kLeft + (std::log10(x) - lx0) / (lx1 - lx0) * (kW - kLeft - kRight);
  };
  const auto py = [&](double y) {
    return kH - kBottom - (std::log10(y) - ly0) / (ly1 - ly0) * (kH - kTop - kBottom);
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (double e = lx0; e <= lx1; ++e) {
    const double x = px(std::pow(10.0, e));
    o << "<line x1=\"" << x << "\" y1=\"" << kTop << "\" x2=\"" << x << "\" y2=\"" << kH - kBottom
      << "\" stroke=\"#ddd\"/>\n<text x=\"" << x << "\" y=\"" << kH - kBottom + 16
      << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  for (double e = ly0; e <= ly1; ++e) {
    const double y = py(std::pow(10.0, e));
    o << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kW - kRight << "\" y2=\"" << y
      << "\" stroke=\"#ddd\"/>\n<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4
      << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  o << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 12
    << "\" text-anchor=\"middle\">kappa = sigma / ||a||</text>\n";
  o << "<text x=\"16\" y=\"" << (kTop + kH - kBottom) / 2 << "\" transform=\"rotate(-90 16 "
    << (kTop + kH - kBottom) / 2 << ")\" text-anchor=\"middle\">Kolmogorov distance</text>\n";

  const auto series = [&](const char* colour, auto get) {
    o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& r : s.rows)
      if (get(r) > 0) o << px(r.kappa) << ',' << py(get(r)) << ' ';
    o << "\"/>\n";
    for (const auto& r : s.rows)
      if (get(r) > 0)
        o << "<circle cx=\"" << px(r.kappa) << "\" cy=\"" << py(get(r)) << "\" r=\"3\" fill=\""
          << colour << "\"/>\n";
  };
  series("#1f77b4", [](const SweepRow& r) { return r.ks_empirical; });
  series("#d62728", [](const SweepRow& r) { return r.ks_upper; });
  o << "<text x=\"" << kW - kRight - 150 << "\" y=\"" << kTop + 4
    << "\" fill=\"#1f77b4\">empirical D_N</text>\n";
  o << "<text x=\"" << kW - kRight - 150 << "\" y=\"" << kTop + 18
    << "\" fill=\"#d62728\">certified upper bound</text>\n";
  o << "</svg>\n";
  return o.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParameter("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InvalidParameter("write to '" + path.string() + "' failed");
}

}  // namespace cltlab
