#pragma once

// Output formats. CSV files are RFC-4180 style (CRLF, header row, quoted
// text when needed, 17 significant digits) preceded by one '#' provenance
// line; JSON documents carry a "provenance" object; SVG plots carry it in an
// XML comment. Nothing time- or host-dependent is ever written.

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "reaper/config.hpp"
#include "reaper/solver.hpp"

namespace reaper {

struct Provenance {
  std::string config_hash;

  nlohmann::json to_json() const;
  /// "config_sha256=<hash> reaper=<v> closed_forms=<v> ..."
  std::string line() const;
};

std::string format_double(double v);  // 17 significant digits
std::string csv_field(const std::string& text);

/// Column-major numeric table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(const std::vector<double>& values);
  std::string render(const Provenance& prov) const;
};

/// Parses a table written by CsvTable::render (the provenance line is
/// returned separately). Throws StoreError on malformed input.
struct ParsedCsv {
  std::string provenance;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
ParsedCsv parse_csv(const std::string& text);

/// Pretty JSON with a trailing newline; `doc["provenance"]` is set.
std::string render_json(nlohmann::json doc, const Provenance& prov);

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

/// A trajectory persisted as a directory: manifest.json plus grid.csv and one
/// CSV per snapshot. The manifest holds the canonical config text, its hash,
/// the controller state and a SHA-256 for every data file.
struct StoredRun {
  RunConfig config;
  std::string config_text;
  Trajectory trajectory;
};

void save_trajectory(const std::filesystem::path& dir, const RunConfig& config, const Trajectory& traj);

/// Loads and verifies a store. Throws StoreError when files are missing,
/// checksums disagree or the config no longer hashes to the recorded value.
StoredRun load_trajectory(const std::filesystem::path& dir);

/// Minimal line plot into a fixed 800x600 viewBox.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

std::string render_svg_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                            const std::vector<PlotSeries>& series, const Provenance& prov);

}  // namespace reaper
