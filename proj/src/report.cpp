#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gblobs/genbench.hpp"

namespace gblobs {

namespace {

using nlohmann::json;

json cell_json(const CellStats& c) {
  json j;
  j["domain"] = c.domain;
  j["features"] = c.features;
  j["width"] = c.width;
  j["per_seed"] = c.per_seed;
  j["n_seeds"] = c.per_seed.size();
  j["mean"] = c.mean;
  j["stddev"] = c.stddev;
  j["rows"] = c.rows;
  j["skipped_objects"] = c.skipped_objects;
  return j;
}

std::string hex64(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string report_json_string(const Report& report) {
  json results;
  results["experiment"] = report.experiment;
  results["kind"] = report.kind;
  results["config_hash"] = hex64(report.config_hash);
  results["seeds"] = report.seeds;

  json cells = json::array();
  for (const CellStats& c : report.cells) cells.push_back(cell_json(c));
  results["cells"] = cells;

  json curve = json::array();
  for (const SweepPoint& p : report.curve) {
    json pj;
    pj["x"] = p.x;
    json pc = json::array();
    for (const CellStats& c : p.cells) pc.push_back(cell_json(c));
    pj["cells"] = pc;
    json occ;
    for (const auto& [k, v] : p.occupancy) occ[std::to_string(k)] = v;
    pj["occupancy"] = occ;
    pj["frac_le2"] = p.frac_le2;
    pj["total_voxels"] = p.total_voxels;
    curve.push_back(pj);
  }
  results["curve"] = curve;

  json failures = json::array();
  for (const SeedFailure& f : report.failures)
    failures.push_back(json{{"seed", f.seed}, {"error", f.error}});
  results["failures"] = failures;

  json root;
  root["results"] = results;
  root["meta"] = json{{"runtime_sec", report.runtime_sec}, {"created_utc", report.created_utc},
                      {"schema_version", 1}};
  return root.dump(2) + "\n";
}

void write_report_json(const std::string& path, const Report& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << report_json_string(report);
  if (!out) throw IoError("write failure on " + path);
}

void write_report_csv(const std::string& path, const Report& report) {
  std::ostringstream out;
  out.precision(10);
  if (report.curve.empty()) {
    out << "domain,features,width,n_seeds,mean,stddev,rows,skipped_objects\n";
    for (const CellStats& c : report.cells)
      out << c.domain << ',' << c.features << ',' << c.width << ',' << c.per_seed.size() << ',' << c.mean
          << ',' << c.stddev << ',' << c.rows << ',' << c.skipped_objects << '\n';
  } else {
    out << "x,features,width,n_seeds,mean,stddev,frac_le2,total_voxels\n";
    for (const SweepPoint& p : report.curve)
      for (const CellStats& c : p.cells)
        out << p.x << ',' << c.features << ',' << c.width << ',' << c.per_seed.size() << ',' << c.mean
            << ',' << c.stddev << ',' << p.frac_le2 << ',' << p.total_voxels << '\n';
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file << out.str();
  if (!file) throw IoError("write failure on " + path);
}

}  // namespace gblobs
