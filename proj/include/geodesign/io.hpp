#ifndef GEODESIGN_IO_HPP
#define GEODESIGN_IO_HPP

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "geodesign/design.hpp"
#include "geodesign/errors.hpp"
#include "geodesign/estimation.hpp"
#include "geodesign/field.hpp"
#include "geodesign/geometry.hpp"
#include "geodesign/harness.hpp"

namespace geodesign {

namespace detail {

// Shortest exactly-round-tripping decimal for a double.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    // try to shorten while preserving the value
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_double(const std::string& field, const std::string& context) {
  const std::string t = trim(field);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw validation_error(context + ": cannot parse number from '" + field + "'");
  }
  return v;
}

inline long parse_long(const std::string& field, const std::string& context) {
  const std::string t = trim(field);
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw validation_error(context + ": cannot parse integer from '" + field + "'");
  }
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

// All file output goes through write-temp-then-rename so partially written
// files are never observed under the target name.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw validation_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw validation_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw validation_error("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
}

// Externally supplied covariance parameters (typically a fit command's
// output) carried along a workflow for provenance.
struct SuppliedParams {
  CovarianceParams params;
  double intercept = 0.0;
};

// ------------------------------------------------------------------ designs

inline std::string design_sidecar_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

// CSV of id,x,y,role,parent_id plus a JSON sidecar carrying family,
// parameters, seed and warnings. Finite-set designs keep their candidate ids
// in the id column. supplied, when present, is recorded in the sidecar as
// the covariance model the design was generated for.
inline void write_design(const std::string& csv_path, const Design& design,
                         const SuppliedParams* supplied = nullptr) {
  const bool finite = !design.candidate_ids.empty();
  std::ostringstream csv;
  csv << "id,x,y,role,parent_id\n";
  auto row_id = [&](int i) {
    return finite ? design.candidate_ids[static_cast<std::size_t>(i)] : "p" + std::to_string(i);
  };
  const int n_inhib = design.n_inhibitory();
  for (int i = 0; i < design.n(); ++i) {
    const Point& p = design.points[static_cast<std::size_t>(i)];
    csv << row_id(i) << ',' << detail::fmt_double(p.x) << ',' << detail::fmt_double(p.y) << ',';
    if (design.is_close_pair(i)) {
      csv << "close_pair," << row_id(design.parents[static_cast<std::size_t>(i - n_inhib)]);
    } else {
      csv << "inhibitory,";
    }
    csv << '\n';
  }
  write_file_atomic(csv_path, csv.str());

  nlohmann::ordered_json meta;
  meta["family"] = family_name(design.family);
  meta["params"] = {
      {"n", design.params.n},         {"k", design.params.k},
      {"delta", design.params.delta}, {"delta_k", design.params.delta_k},
      {"zeta", design.params.zeta},   {"spacing", design.params.spacing},
      {"max_iter", design.params.max_iter},
  };
  meta["seed"] = design.seed;
  meta["packing_rho"] = design.packing_rho;
  meta["finite"] = finite;
  meta["warnings"] = design.warnings;
  if (supplied != nullptr) {
    meta["supplied_params"] = {
        {"intercept", supplied->intercept}, {"sigma2", supplied->params.sigma2},
        {"tau2", supplied->params.tau2},    {"phi", supplied->params.phi},
        {"kappa", supplied->params.kappa},
    };
  }
  write_file_atomic(design_sidecar_path(csv_path), meta.dump(2) + "\n");
}

inline Design read_design(const std::string& csv_path) {
  const std::string text = detail::read_file(csv_path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw validation_error(csv_path + ": empty file");
  if (detail::split_csv_line(line) != std::vector<std::string>{"id", "x", "y", "role", "parent_id"}) {
    throw validation_error(csv_path + ":1: expected header id,x,y,role,parent_id");
  }

  Design design;
  std::vector<std::string> ids;
  std::vector<std::string> parent_ids;
  std::unordered_map<std::string, int> index_of;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> f = detail::split_csv_line(line);
    const std::string ctx = csv_path + ":" + std::to_string(lineno);
    if (f.size() != 5) throw validation_error(ctx + ": expected 5 fields");
    ids.push_back(f[0]);
    index_of.emplace(f[0], static_cast<int>(design.points.size()));
    design.points.push_back(Point{detail::parse_double(f[1], ctx), detail::parse_double(f[2], ctx)});
    if (f[3] == "close_pair") {
      parent_ids.push_back(f[4]);
    } else if (f[3] == "inhibitory") {
      parent_ids.push_back("");
    } else {
      throw validation_error(ctx + ": unknown role '" + f[3] + "'");
    }
  }

  const nlohmann::json meta = nlohmann::json::parse(detail::read_file(design_sidecar_path(csv_path)));
  const std::string fam = meta.at("family").get<std::string>();
  if (fam == "si") design.family = DesignFamily::SI;
  else if (fam == "icp") design.family = DesignFamily::ICP;
  else if (fam == "crd") design.family = DesignFamily::CRD;
  else if (fam == "lattice") design.family = DesignFamily::Lattice;
  else if (fam == "lattice_cp") design.family = DesignFamily::LatticeCP;
  else throw validation_error(csv_path + ": sidecar has unknown family '" + fam + "'");
  const nlohmann::json& pj = meta.at("params");
  design.params.n = pj.at("n").get<int>();
  design.params.k = pj.at("k").get<int>();
  design.params.delta = pj.at("delta").get<double>();
  design.params.delta_k = pj.at("delta_k").get<double>();
  design.params.zeta = pj.at("zeta").get<double>();
  design.params.spacing = pj.at("spacing").get<double>();
  design.params.max_iter = pj.at("max_iter").get<long>();
  design.seed = meta.at("seed").get<std::uint64_t>();
  design.packing_rho = meta.at("packing_rho").get<double>();
  design.warnings = meta.at("warnings").get<std::vector<std::string>>();
  if (meta.at("finite").get<bool>()) design.candidate_ids = ids;

  for (std::size_t i = 0; i < parent_ids.size(); ++i) {
    if (parent_ids[i].empty()) continue;
    const auto it = index_of.find(parent_ids[i]);
    if (it == index_of.end()) {
      throw validation_error(csv_path + ": close pair references unknown parent id '" +
                             parent_ids[i] + "'");
    }
    design.parents.push_back(it->second);
  }
  return design;
}

// --------------------------------------------------------------- candidates

// CSV (header id,x,y, or headerless x,y) or GeoJSON point collection.
// Coincident coordinates are deduplicated with a warning; duplicate ids are
// an error.
inline CandidateSet read_candidates(const std::string& path,
                                    std::vector<std::string>* warnings = nullptr) {
  CandidateSet raw;
  const std::string text = detail::read_file(path);
  const std::string ext = std::filesystem::path(path).extension().string();
  const std::size_t first_char = text.find_first_not_of(" \t\r\n");
  const bool looks_json = ext == ".json" || ext == ".geojson" ||
                          (first_char != std::string::npos && text[first_char] == '{');

  if (looks_json) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features")) {
      throw validation_error(path + ": expected a GeoJSON FeatureCollection of points");
    }
    int index = 0;
    for (const nlohmann::json& feature : doc.at("features")) {
      const nlohmann::json& geom = feature.at("geometry");
      if (geom.value("type", "") != "Point") {
        throw validation_error(path + ": feature " + std::to_string(index) + " is not a Point");
      }
      const nlohmann::json& coords = geom.at("coordinates");
      if (!coords.is_array() || coords.size() < 2) {
        throw validation_error(path + ": feature " + std::to_string(index) + " has bad coordinates");
      }
      std::string id = "f" + std::to_string(index);
      if (feature.contains("id")) {
        id = feature["id"].is_string() ? feature["id"].get<std::string>() : feature["id"].dump();
      } else if (feature.contains("properties") && feature["properties"].is_object() &&
                 feature["properties"].contains("id")) {
        const nlohmann::json& pid = feature["properties"]["id"];
        id = pid.is_string() ? pid.get<std::string>() : pid.dump();
      }
      const Point p{coords[0].get<double>(), coords[1].get<double>()};
      if (!finite(p)) throw validation_error(path + ": non-finite coordinates at record " + id);
      raw.points.push_back(p);
      raw.ids.push_back(id);
      ++index;
    }
  } else {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool has_header = false;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::trim(line).empty()) continue;
      const std::vector<std::string> f = detail::split_csv_line(line);
      const std::string ctx = path + ":" + std::to_string(lineno);
      if (raw.points.empty() && !has_header) {
        // decide header by whether the first data-bearing line parses as numbers
        char* end = nullptr;
        const std::string probe = detail::trim(f[f.size() >= 2 ? f.size() - 1 : 0]);
        std::strtod(probe.c_str(), &end);
        if (probe.empty() || end != probe.c_str() + probe.size()) {
          header = f;
          for (std::string& h : header) h = detail::trim(h);
          has_header = true;
          continue;
        }
      }
      if (has_header) {
        std::map<std::string, std::string> rec;
        if (f.size() != header.size()) throw validation_error(ctx + ": field count mismatch");
        for (std::size_t i = 0; i < f.size(); ++i) rec[header[i]] = f[i];
        if (!rec.count("x") || !rec.count("y")) {
          throw validation_error(path + ": header must include x and y columns");
        }
        const std::string id =
            rec.count("id") ? detail::trim(rec["id"]) : "c" + std::to_string(raw.points.size());
        const Point p{detail::parse_double(rec["x"], ctx), detail::parse_double(rec["y"], ctx)};
        if (!finite(p)) throw validation_error(ctx + ": non-finite coordinates at record " + id);
        raw.points.push_back(p);
        raw.ids.push_back(id);
      } else {
        if (f.size() != 2) {
          throw validation_error(ctx + ": headerless candidate files must have exactly x,y columns");
        }
        const Point p{detail::parse_double(f[0], ctx), detail::parse_double(f[1], ctx)};
        if (!finite(p)) throw validation_error(ctx + ": non-finite coordinates");
        raw.points.push_back(p);
        raw.ids.push_back("c" + std::to_string(raw.points.size() - 1));
      }
    }
  }

  std::vector<std::string> dedup_warnings;
  CandidateSet out = detail::dedup_candidates(raw, &dedup_warnings);
  if (warnings != nullptr) {
    warnings->insert(warnings->end(), dedup_warnings.begin(), dedup_warnings.end());
  }
  std::set<std::string> seen;
  for (const std::string& id : out.ids) {
    if (id.find_first_of(",\n") != std::string::npos) {
      throw validation_error(path + ": candidate id '" + id + "' contains a comma or newline");
    }
    if (!seen.insert(id).second) {
      throw validation_error(path + ": duplicate candidate id '" + id + "'");
    }
  }
  if (out.points.empty()) throw validation_error(path + ": no candidate points found");
  return out;
}

inline void write_candidates_csv(const std::string& path, const CandidateSet& set) {
  std::ostringstream csv;
  csv << "id,x,y\n";
  for (std::size_t i = 0; i < set.points.size(); ++i) {
    csv << set.ids[i] << ',' << detail::fmt_double(set.points[i].x) << ','
        << detail::fmt_double(set.points[i].y) << '\n';
  }
  write_file_atomic(path, csv.str());
}

// --------------------------------------------------------------------- data

struct DataSet {
  std::vector<Point> points;
  std::vector<std::string> ids;
  Eigen::VectorXd values;
  std::vector<int> trials;  // empty unless the file has binomial columns
  std::vector<int> counts;
};

// CSV with header columns x,y,value (id, trials, counts optional).
inline DataSet read_data_csv(const std::string& path) {
  const std::string text = detail::read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw validation_error(path + ": empty file");
  std::vector<std::string> header = detail::split_csv_line(line);
  for (std::string& h : header) h = detail::trim(h);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  if (!col.count("x") || !col.count("y") || !col.count("value")) {
    throw validation_error(path + ":1: header must include x,y,value");
  }
  const bool binomial = col.count("trials") && col.count("counts");

  DataSet data;
  std::vector<double> values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> f = detail::split_csv_line(line);
    const std::string ctx = path + ":" + std::to_string(lineno);
    if (f.size() != header.size()) throw validation_error(ctx + ": field count mismatch");
    const Point p{detail::parse_double(f[col["x"]], ctx), detail::parse_double(f[col["y"]], ctx)};
    if (!finite(p)) throw validation_error(ctx + ": non-finite coordinates");
    data.points.push_back(p);
    data.ids.push_back(col.count("id") ? f[col["id"]] : "r" + std::to_string(lineno));
    values.push_back(detail::parse_double(f[col["value"]], ctx));
    if (binomial) {
      data.trials.push_back(static_cast<int>(detail::parse_long(f[col["trials"]], ctx)));
      data.counts.push_back(static_cast<int>(detail::parse_long(f[col["counts"]], ctx)));
    }
  }
  data.values = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return data;
}

// --------------------------------------------------------- experiment specs

// Flat key = value format, '#' comments, lists comma-separated.
inline ExperimentSpec parse_experiment_spec(const std::string& text, const std::string& origin = "spec") {
  ExperimentSpec spec;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<std::string> bad;
  bool saw_estimate_params = false;
  bool saw_replicates = false;

  auto parse_doubles = [&](const std::string& v, const std::string& ctx) {
    std::vector<double> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(detail::parse_double(item, ctx));
    return out;
  };

  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = detail::trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    const std::string ctx = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) {
      bad.push_back(ctx + ": expected key = value");
      continue;
    }
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    try {
      if (key == "model") {
        if (value == "gaussian") spec.model = ModelKind::Gaussian;
        else if (value == "binomial") spec.model = ModelKind::Binomial;
        else throw validation_error(ctx + ": model must be gaussian or binomial");
      } else if (key == "family") {
        if (value == "si") spec.family = DesignFamily::SI;
        else if (value == "icp") spec.family = DesignFamily::ICP;
        else throw validation_error(ctx + ": family must be si or icp");
      } else if (key == "n") {
        spec.n = static_cast<int>(detail::parse_long(value, ctx));
      } else if (key == "delta_grid") {
        spec.delta_grid = parse_doubles(value, ctx);
      } else if (key == "k_grid") {
        spec.k_grid.clear();
        std::istringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          spec.k_grid.push_back(static_cast<int>(detail::parse_long(item, ctx)));
        }
      } else if (key == "delta0") {
        spec.delta0 = detail::parse_double(value, ctx);
      } else if (key == "zeta") {
        spec.zeta = detail::parse_double(value, ctx);
      } else if (key == "sigma2") {
        spec.sigma2 = detail::parse_double(value, ctx);
      } else if (key == "kappa") {
        spec.kappa = detail::parse_double(value, ctx);
      } else if (key == "phi_grid") {
        spec.phi_grid = parse_doubles(value, ctx);
      } else if (key == "tau2_grid") {
        spec.tau2_grid = parse_doubles(value, ctx);
      } else if (key == "replicates") {
        spec.replicates = static_cast<int>(detail::parse_long(value, ctx));
        saw_replicates = true;
      } else if (key == "grid_nx") {
        spec.grid_nx = static_cast<int>(detail::parse_long(value, ctx));
      } else if (key == "grid_ny") {
        spec.grid_ny = static_cast<int>(detail::parse_long(value, ctx));
      } else if (key == "region") {
        if (value == "unit") {
          spec.region = Region::unit_square();
        } else {
          const std::vector<double> r = parse_doubles(value, ctx);
          if (r.size() != 4) throw validation_error(ctx + ": region needs xmin,ymin,xmax,ymax");
          spec.region = Region(r[0], r[1], r[2], r[3]);
        }
      } else if (key == "base_seed") {
        spec.base_seed = static_cast<std::uint64_t>(detail::parse_long(value, ctx));
      } else if (key == "estimate_params") {
        spec.estimate_params = (value == "true" || value == "1");
        if (!spec.estimate_params && value != "false" && value != "0") {
          throw validation_error(ctx + ": estimate_params must be true or false");
        }
        saw_estimate_params = true;
      } else if (key == "fresh_design") {
        spec.fresh_design = (value == "true" || value == "1");
        if (!spec.fresh_design && value != "false" && value != "0") {
          throw validation_error(ctx + ": fresh_design must be true or false");
        }
      } else if (key == "compute_mspe") {
        spec.compute_mspe = (value == "true" || value == "1");
        if (!spec.compute_mspe && value != "false" && value != "0") {
          throw validation_error(ctx + ": compute_mspe must be true or false");
        }
      } else if (key == "trials") {
        spec.trials = static_cast<int>(detail::parse_long(value, ctx));
      } else if (key == "offset") {
        spec.offset = detail::parse_double(value, ctx);
      } else if (key == "max_iter") {
        spec.max_iter = detail::parse_long(value, ctx);
      } else {
        bad.push_back(ctx + ": unknown key '" + key + "'");
      }
    } catch (const validation_error& e) {
      bad.push_back(e.what());
    }
  }
  if (!saw_estimate_params) {
    spec.estimate_params = spec.model == ModelKind::Gaussian;
  }
  (void)saw_replicates;
  if (!bad.empty()) {
    std::string msg = "invalid experiment spec";
    for (const std::string& b : bad) msg += "; " + b;
    throw validation_error(msg);
  }
  spec.validate();
  return spec;
}

inline ExperimentSpec read_experiment_spec(const std::string& path) {
  return parse_experiment_spec(detail::read_file(path), path);
}

// Canonical rendering used both for the report header hash and for replay.
inline std::string canonical_spec_string(const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "model = " << (spec.model == ModelKind::Gaussian ? "gaussian" : "binomial") << '\n';
  out << "family = " << family_name(spec.family) << '\n';
  out << "n = " << spec.n << '\n';
  if (spec.family == DesignFamily::SI) {
    out << "delta_grid = ";
    for (std::size_t i = 0; i < spec.delta_grid.size(); ++i) {
      out << (i ? "," : "") << detail::fmt_double(spec.delta_grid[i]);
    }
    out << '\n';
  } else {
    out << "k_grid = ";
    for (std::size_t i = 0; i < spec.k_grid.size(); ++i) out << (i ? "," : "") << spec.k_grid[i];
    out << '\n';
    out << "delta0 = " << detail::fmt_double(spec.delta0) << '\n';
    out << "zeta = " << detail::fmt_double(spec.zeta) << '\n';
  }
  out << "sigma2 = " << detail::fmt_double(spec.sigma2) << '\n';
  out << "kappa = " << detail::fmt_double(spec.kappa) << '\n';
  out << "phi_grid = ";
  for (std::size_t i = 0; i < spec.phi_grid.size(); ++i) {
    out << (i ? "," : "") << detail::fmt_double(spec.phi_grid[i]);
  }
  out << '\n';
  out << "tau2_grid = ";
  for (std::size_t i = 0; i < spec.tau2_grid.size(); ++i) {
    out << (i ? "," : "") << detail::fmt_double(spec.tau2_grid[i]);
  }
  out << '\n';
  out << "replicates = " << spec.effective_replicates() << '\n';
  out << "grid_nx = " << spec.grid_nx << '\n';
  out << "grid_ny = " << spec.grid_ny << '\n';
  out << "region = " << detail::fmt_double(spec.region.xmin) << ',' << detail::fmt_double(spec.region.ymin)
      << ',' << detail::fmt_double(spec.region.xmax) << ',' << detail::fmt_double(spec.region.ymax) << '\n';
  out << "base_seed = " << spec.base_seed << '\n';
  out << "estimate_params = " << (spec.estimate_params ? "true" : "false") << '\n';
  out << "fresh_design = " << (spec.fresh_design ? "true" : "false") << '\n';
  out << "compute_mspe = " << (spec.compute_mspe ? "true" : "false") << '\n';
  if (spec.model == ModelKind::Binomial) {
    out << "trials = " << spec.trials << '\n';
    out << "offset = " << detail::fmt_double(spec.offset) << '\n';
  }
  out << "max_iter = " << spec.max_iter << '\n';
  return out.str();
}

inline std::string spec_hash(const ExperimentSpec& spec) {
  return detail::hex64(detail::fnv1a64(canonical_spec_string(spec)));
}

// ------------------------------------------------------------------ reports

// One row per cell, plus a raw per-replicate file; both headers carry the
// spec hash and base seed for replay.
inline void write_report(const std::string& cells_csv_path, const std::string& raw_csv_path,
                         const ExperimentReport& report) {
  const std::string hash = spec_hash(report.spec);
  const std::string preamble =
      "# spec_hash=" + hash + "\n# base_seed=" + std::to_string(report.spec.base_seed) + "\n";

  std::ostringstream cells;
  cells << preamble;
  cells << "cell,family,model,delta,k,delta_k,zeta,phi,tau2,replicates,failures,"
           "apv_mean,apv_se,mspe_mean,mspe_se\n";
  for (std::size_t c = 0; c < report.cells.size(); ++c) {
    const CellResult& cell = report.cells[c];
    cells << c << ',' << family_name(report.spec.family) << ','
          << (report.spec.model == ModelKind::Gaussian ? "gaussian" : "binomial") << ',';
    if (std::isnan(cell.delta)) cells << ',';
    else cells << detail::fmt_double(cell.delta) << ',';
    if (cell.k < 0) cells << ',';
    else cells << cell.k << ',';
    cells << detail::fmt_double(cell.delta_k) << ',' << detail::fmt_double(cell.zeta) << ','
          << detail::fmt_double(cell.phi) << ',' << detail::fmt_double(cell.tau2) << ','
          << cell.replicates << ',' << cell.failures << ',' << detail::fmt_double(cell.apv_mean)
          << ',' << detail::fmt_double(cell.apv_se) << ',';
    if (std::isnan(cell.mspe_mean)) cells << ',';
    else cells << detail::fmt_double(cell.mspe_mean) << ',' << detail::fmt_double(cell.mspe_se);
    cells << '\n';
  }
  write_file_atomic(cells_csv_path, cells.str());

  std::ostringstream raw;
  raw << preamble << "cell,replicate,apv,mspe\n";
  for (std::size_t c = 0; c < report.cells.size(); ++c) {
    const CellResult& cell = report.cells[c];
    for (std::size_t r = 0; r < cell.apv_raw.size(); ++r) {
      raw << c << ',' << r << ',';
      if (!std::isnan(cell.apv_raw[r])) raw << detail::fmt_double(cell.apv_raw[r]);
      raw << ',';
      if (r < cell.mspe_raw.size() && !std::isnan(cell.mspe_raw[r])) {
        raw << detail::fmt_double(cell.mspe_raw[r]);
      }
      raw << '\n';
    }
  }
  write_file_atomic(raw_csv_path, raw.str());
}

// ----------------------------------------------------------------- surfaces

inline void write_surface_csv(const std::string& path, const PredictionSurface& surface,
                              const PredictionGrid& grid) {
  if (surface.mean.size() != grid.size() || surface.variance.size() != grid.size()) {
    throw validation_error("write_surface_csv: surface does not match grid");
  }
  std::ostringstream csv;
  csv << "x,y,mean,variance\n";
  for (int j = 0; j < grid.size(); ++j) {
    const Point& p = grid.points[static_cast<std::size_t>(j)];
    csv << detail::fmt_double(p.x) << ',' << detail::fmt_double(p.y) << ','
        << detail::fmt_double(surface.mean[j]) << ',' << detail::fmt_double(surface.variance[j])
        << '\n';
  }
  write_file_atomic(path, csv.str());
}

// -------------------------------------------------------------- fit results

// Natural-scale estimates in the conventional reporting order
// (intercept, sigma2, tau2, phi), then smoothness and optimizer metadata.
inline std::string fit_result_json(const FitResult& fit) {
  nlohmann::ordered_json j;
  j["intercept"] = fit.mean_hat;
  j["sigma2"] = fit.params_hat.sigma2;
  j["tau2"] = fit.params_hat.tau2;
  j["phi"] = fit.params_hat.phi;
  j["kappa"] = fit.params_hat.kappa;
  j["loglik"] = fit.loglik;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  return j.dump(2) + "\n";
}

inline void write_fit_json(const std::string& path, const FitResult& fit) {
  write_file_atomic(path, fit_result_json(fit));
}

// Parameters JSON as written by the fit command (or hand-authored): accepts
// the same field names, ignoring extras.
inline SuppliedParams read_params_json(const std::string& path) {
  const nlohmann::json j = nlohmann::json::parse(detail::read_file(path));
  SuppliedParams out;
  if (j.contains("intercept")) out.intercept = j.at("intercept").get<double>();
  out.params.sigma2 = j.at("sigma2").get<double>();
  out.params.tau2 = j.at("tau2").get<double>();
  out.params.phi = j.at("phi").get<double>();
  if (j.contains("kappa")) out.params.kappa = j.at("kappa").get<double>();
  out.params.validate();
  return out;
}

// --------------------------------------------------------- coordinate guard

// Heuristic for unprojected geographic coordinates: everything inside the
// lon/lat box but clearly not in a small unit-scale frame.
inline bool looks_like_lonlat(const std::vector<Point>& pts) {
  if (pts.empty()) return false;
  double max_abs_x = 0.0, max_abs_y = 0.0;
  for (const Point& p : pts) {
    max_abs_x = std::max(max_abs_x, std::abs(p.x));
    max_abs_y = std::max(max_abs_y, std::abs(p.y));
  }
  return max_abs_x <= 180.0 && max_abs_y <= 90.0 && std::max(max_abs_x, max_abs_y) > 1.5;
}

inline bool looks_like_lonlat(const Region& region) {
  return looks_like_lonlat({Point{region.xmin, region.ymin}, Point{region.xmax, region.ymax}});
}

}  // namespace geodesign

#endif  // GEODESIGN_IO_HPP
