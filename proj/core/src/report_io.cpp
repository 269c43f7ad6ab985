#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "levelstat/experiment.hpp"

namespace levelstat {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write to " + path.string() + " failed");
}

const char* flag(bool b) { return b ? "true" : "false"; }

void write_estimators(std::ostream& out, const ResultRecord& rec) {
  out << "experiment,quantity,n_samples,seed,estimate,std_error,ci_low,ci_high,bound,bound_satisfied,n_degenerate\n";
  for (const EstimatorReport& r : rec.reports) {
    out << csv_field(rec.experiment) << ',' << csv_field(r.quantity) << ',' << r.n_samples << ',' << r.seed << ','
        << format_double(r.estimate) << ',' << format_double(r.std_error) << ',' << format_double(r.ci_low) << ','
        << format_double(r.ci_high) << ',' << format_double(r.bound) << ',' << flag(r.bound_satisfied) << ','
        << r.n_degenerate_flagged << '\n';
  }
}

void write_grid(std::ostream& out, const DensityGrid& g) {
  out << "e1_low,e1_high,e2_low,e2_high,analytic_mass,mc_count\n";
  const std::size_t bl = g.bins_lower();
  for (std::size_t i = 0; i < g.bins_upper(); ++i) {
    for (std::size_t k = 0; k < bl; ++k) {
      out << format_double(g.upper_edges[i]) << ',' << format_double(g.upper_edges[i + 1]) << ','
          << format_double(g.lower_edges[k]) << ',' << format_double(g.lower_edges[k + 1]) << ','
          << format_double(g.analytic_mass[i * bl + k]) << ',' << g.mc_count[i * bl + k] << '\n';
    }
  }
}

void write_solutions(std::ostream& out, const ResultRecord& rec) {
  out << "solution";
  for (const std::size_t x : rec.free_sites) out << ",v_" << x;
  out << ",jacobian_det,factored,relative_error,agrees\n";
  for (std::size_t i = 0; i < rec.solutions.size(); ++i) {
    const SolutionRow& s = rec.solutions[i];
    out << i;
    for (Eigen::Index k = 0; k < s.potential.size(); ++k) out << ',' << format_double(s.potential[k]);
    out << ',' << format_double(s.jacobian_det) << ',' << format_double(s.factored) << ','
        << format_double(s.relative_error) << ',' << flag(s.agrees) << '\n';
  }
}

json record_json(const ResultRecord& rec) {
  json j;
  j["experiment"] = rec.experiment;
  j["config_hash"] = rec.config_hash;
  j["config"] = json::parse(rec.canonical_config);
  j["timestamp"] = rec.timestamp;
  j["version"] = rec.version;
  j["seed"] = rec.seed;
  j["bound_violation"] = rec.bound_violation;
  json reports = json::array();
  for (const EstimatorReport& r : rec.reports) {
    json e = {{"quantity", r.quantity},
              {"estimate", r.estimate},
              {"std_error", r.std_error},
              {"ci_low", r.ci_low},
              {"ci_high", r.ci_high},
              {"n_samples", r.n_samples},
              {"n_degenerate", r.n_degenerate_flagged},
              {"bound", r.bound},
              {"bound_satisfied", r.bound_satisfied},
              {"seed", r.seed}};
    if (r.conjecture_violated) e["conjecture_violated"] = *r.conjecture_violated;
    reports.push_back(std::move(e));
  }
  j["reports"] = std::move(reports);
  json metrics = json::object();
  for (const auto& [name, value] : rec.metrics) metrics[name] = value;
  j["metrics"] = std::move(metrics);
  if (rec.grid) {
    const DensityGrid& g = *rec.grid;
    j["grid"] = {{"upper_edges", g.upper_edges},     {"lower_edges", g.lower_edges},
                 {"analytic_mass", g.analytic_mass}, {"mc_count", g.mc_count},
                 {"n_samples", g.n_samples},         {"seed", g.seed},
                 {"out_of_range", g.out_of_range},   {"gap_violations", g.gap_violations},
                 {"trace_violations", g.trace_violations}, {"analytic_total", g.analytic_total},
                 {"l1", g.l1}};
  }
  if (rec.scaling) {
    json rows = json::array();
    for (const ScalingRow& r : rec.scaling->rows) rows.push_back({{"eps", r.eps}, {"mass", r.mass}});
    j["scaling"] = {{"rows", std::move(rows)}, {"exponent", rec.scaling->exponent ? json(*rec.scaling->exponent) : json()}};
  }
  if (!rec.bound_rows.empty()) {
    json rows = json::array();
    for (const BoundRow& r : rec.bound_rows) {
      rows.push_back({{"width", r.width},
                      {"probability", r.probability},
                      {"ratio_product", r.ratio_product},
                      {"ratio_modified", r.ratio_modified}});
    }
    j["bound_rows"] = std::move(rows);
  }
  if (!rec.free_sites.empty()) {
    json rows = json::array();
    for (const SolutionRow& s : rec.solutions) {
      rows.push_back({{"potential", std::vector<double>(s.potential.data(), s.potential.data() + s.potential.size())},
                      {"jacobian_det", s.jacobian_det},
                      {"factored", s.factored},
                      {"relative_error", s.relative_error},
                      {"agrees", s.agrees}});
    }
    j["free_sites"] = rec.free_sites;
    j["solutions"] = std::move(rows);
  }
  return j;
}

}  // namespace

void emit_csv(const ResultRecord& record, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  if (record.grid) {
    write_grid(out, *record.grid);
  } else if (!record.free_sites.empty()) {
    write_solutions(out, record);
  } else {
    write_estimators(out, record);
  }
  finish(out, path);
}

void emit_json(const ResultRecord& record, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << record_json(record).dump(2) << '\n';
  finish(out, path);
}

std::vector<std::filesystem::path> emit_all(const ResultRecord& record, const std::filesystem::path& dir,
                                            const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  written.push_back(dir / (stem + ".csv"));
  emit_csv(record, written.back());
  written.push_back(dir / (stem + ".json"));
  emit_json(record, written.back());
  if (record.scaling) {
    written.push_back(dir / (stem + "_scaling.csv"));
    std::ofstream out = open_output(written.back());
    out << "eps,mass\n";
    for (const ScalingRow& r : record.scaling->rows) out << format_double(r.eps) << ',' << format_double(r.mass) << '\n';
    finish(out, written.back());
  }
  if (!record.bound_rows.empty()) {
    written.push_back(dir / (stem + "_bounds.csv"));
    std::ofstream out = open_output(written.back());
    out << "width,probability,ratio_product,ratio_modified\n";
    for (const BoundRow& r : record.bound_rows) {
      out << format_double(r.width) << ',' << format_double(r.probability) << ',' << format_double(r.ratio_product)
          << ',' << format_double(r.ratio_modified) << '\n';
    }
    finish(out, written.back());
  }
  return written;
}

}  // namespace levelstat
