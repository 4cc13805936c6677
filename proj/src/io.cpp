#include "reaper/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "reaper/errors.hpp"
#include "reaper/version.hpp"

namespace reaper {

namespace fs = std::filesystem;

nlohmann::json Provenance::to_json() const {
  nlohmann::json modules = nlohmann::json::object();
  for (const auto& m : kModuleVersions) modules[std::string(m.name)] = std::string(m.version);
  return {{"config_sha256", config_hash}, {"reaper", std::string(kVersion)}, {"modules", modules}};
}

std::string Provenance::line() const {
  std::string out = fmt::format("config_sha256={} reaper={}", config_hash, kVersion);
  for (const auto& m : kModuleVersions) out += fmt::format(" {}={}", m.name, m.version);
  return out;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(format_double(v));
  rows.push_back(std::move(row));
}

std::string CsvTable::render(const Provenance& prov) const {
  std::string out = "# " + prov.line() + "\r\n";
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += "\r\n";
  };
  emit(header);
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw ContractViolation("CsvTable::render: row width differs from header");
    emit(r);
  }
  return out;
}

ParsedCsv parse_csv(const std::string& text) {
  ParsedCsv out;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!have_header && out.provenance.empty()) out.provenance = line.substr(line.size() > 1 ? 2 : 1);
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (!have_header) {
      out.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != out.header.size()) throw StoreError("parse_csv: row width differs from header");
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size()) throw StoreError(fmt::format("parse_csv: bad number '{}'", c));
      row.push_back(v);
    }
    out.rows.push_back(std::move(row));
  }
  if (!have_header) throw StoreError("parse_csv: missing header row");
  return out;
}

std::string render_json(nlohmann::json doc, const Provenance& prov) {
  doc["provenance"] = prov.to_json();
  return doc.dump(2) + "\n";
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256_hex: digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << bytes;
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

namespace {

constexpr const char* kStoreFormat = "reaper-trajectory";
constexpr int kStoreVersion = 1;

std::string snapshot_file(std::size_t k) { return fmt::format("snapshots/{:06d}.csv", k); }

nlohmann::json controller_json(const ControllerState& c) {
  return {{"dt", c.dt},
          {"streak", c.streak},
          {"steps", c.steps},
          {"newton_iterations", c.newton_iterations},
          {"rejected", c.rejected},
          {"dt_smallest", c.dt_smallest},
          {"dt_largest", c.dt_largest}};
}

ControllerState controller_from(const nlohmann::json& j) {
  ControllerState c;
  c.dt = j.at("dt").get<double>();
  c.streak = j.at("streak").get<int>();
  c.steps = j.at("steps").get<std::uint64_t>();
  c.newton_iterations = j.at("newton_iterations").get<std::uint64_t>();
  c.rejected = j.at("rejected").get<std::uint64_t>();
  c.dt_smallest = j.at("dt_smallest").get<double>();
  c.dt_largest = j.at("dt_largest").get<double>();
  return c;
}

}  // namespace

void save_trajectory(const fs::path& dir, const RunConfig& config, const Trajectory& traj) {
  const Provenance prov{config_hash(config)};
  fs::remove_all(dir / "snapshots");
  fs::create_directories(dir / "snapshots");

  nlohmann::json manifest;
  manifest["format"] = kStoreFormat;
  manifest["format_version"] = kStoreVersion;
  manifest["config"] = emit_config(config);
  manifest["config_sha256"] = prov.config_hash;
  manifest["boundary"] = traj.bc_description;
  manifest["initial"] = traj.initial_tag;
  manifest["outside_theory"] = traj.outside_theory;
  manifest["controller_state"] = controller_json(traj.controller);

  CsvTable grid_csv{{"x"}, {}};
  for (Eigen::Index i = 0; i < traj.grid.size(); ++i) grid_csv.add_row({traj.grid[i]});
  const std::string grid_text = grid_csv.render(prov);
  write_file(dir / "grid.csv", grid_text);
  manifest["grid"] = {{"file", "grid.csv"}, {"nodes", traj.grid.size()}, {"sha256", sha256_hex(grid_text)}};

  manifest["snapshots"] = nlohmann::json::array();
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const State& s = traj.snapshots[k];
    CsvTable t{{"x", "u"}, {}};
    for (Eigen::Index i = 0; i < s.u.size(); ++i) t.add_row({traj.grid[i], s.u[i]});
    const std::string text = t.render(prov);
    write_file(dir / snapshot_file(k), text);
    manifest["snapshots"].push_back({{"t", s.t}, {"file", snapshot_file(k)}, {"sha256", sha256_hex(text)}});
  }
  write_file(dir / "manifest.json", render_json(manifest, prov));
}

StoredRun load_trajectory(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw StoreError(fmt::format("no manifest.json in '{}'", dir.string()));
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw StoreError(fmt::format("manifest.json is not valid JSON: {}", e.what()));
  }

  StoredRun run;
  try {
    if (manifest.at("format") != kStoreFormat || manifest.at("format_version") != kStoreVersion) {
      throw StoreError("manifest.json: unsupported store format");
    }
    run.config_text = manifest.at("config").get<std::string>();
    try {
      run.config = parse_config(run.config_text);
    } catch (const ConfigError& e) {
      throw StoreError(fmt::format("stored config does not parse: {}", e.what()));
    }
    const std::string recorded = manifest.at("config_sha256").get<std::string>();
    if (config_hash(run.config) != recorded || sha256_hex(emit_config(run.config)) != recorded) {
      throw StoreError("provenance mismatch: stored config does not hash to the recorded value");
    }

    auto checked = [&](const nlohmann::json& entry) {
      const std::string file = entry.at("file").get<std::string>();
      const std::string text = read_file(dir / file);
      if (sha256_hex(text) != entry.at("sha256").get<std::string>()) {
        throw StoreError(fmt::format("checksum mismatch in '{}'", file));
      }
      const ParsedCsv csv = parse_csv(text);
      if (csv.provenance.find("config_sha256=" + recorded) != 0) {
        throw StoreError(fmt::format("'{}' belongs to a different config", file));
      }
      return csv;
    };

    Trajectory& traj = run.trajectory;
    traj.grid = run.config.grid.build();
    const ParsedCsv grid_csv = checked(manifest.at("grid"));
    if (static_cast<Eigen::Index>(grid_csv.rows.size()) != traj.grid.size()) throw StoreError("grid.csv: node count differs");
    for (Eigen::Index i = 0; i < traj.grid.size(); ++i) {
      if (grid_csv.rows[i][0] != traj.grid[i]) throw StoreError("grid.csv does not match the configured grid");
    }
    traj.bc_description = manifest.at("boundary").get<std::string>();
    traj.initial_tag = manifest.at("initial").get<std::string>();
    traj.outside_theory = manifest.at("outside_theory").get<bool>();
    traj.controller = controller_from(manifest.at("controller_state"));

    double last_t = -std::numeric_limits<double>::infinity();
    for (const auto& entry : manifest.at("snapshots")) {
      const ParsedCsv csv = checked(entry);
      State s;
      s.t = entry.at("t").get<double>();
      if (!(s.t > last_t)) throw StoreError("snapshot times are not strictly increasing");
      last_t = s.t;
      if (static_cast<Eigen::Index>(csv.rows.size()) != traj.grid.size()) {
        throw StoreError(fmt::format("snapshot at t={} has the wrong node count", s.t));
      }
      s.u.resize(traj.grid.size());
      for (Eigen::Index i = 0; i < traj.grid.size(); ++i) s.u[i] = csv.rows[i][1];
      traj.snapshots.push_back(std::move(s));
    }
    if (traj.snapshots.empty()) throw StoreError("store holds no snapshots");
  } catch (const nlohmann::json::exception& e) {
    throw StoreError(fmt::format("manifest.json is incomplete: {}", e.what()));
  }
  return run;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// 1-2-5 tick spacing covering [lo, hi] with about five ticks.
double tick_step(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return mag * (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0);
}

}  // namespace

std::string render_svg_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                            const std::vector<PlotSeries>& series, const Provenance& prov) {
  constexpr double W = 800, H = 600, left = 80, right = 30, top = 50, bottom = 70;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (W - left - right); };
  auto py = [&](double y) { return H - bottom - (y - ymin) / (ymax - ymin) * (H - top - bottom); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
  out += "<!-- " + xml_escape(prov.line()) + " -->\n";
  out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  out += fmt::format("<text x=\"400\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">{}</text>\n",
                     xml_escape(title));
  out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"black\"/>\n",
                     left, top, W - left - right, H - top - bottom);

  const double xs = tick_step(xmin, xmax), ys = tick_step(ymin, ymax);
  for (double t = std::ceil(xmin / xs) * xs; t <= xmax + 1e-12 * xs; t += xs) {
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#ddd\"/>\n", px(t), top,
                       H - bottom);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                       "font-size=\"12\">{:g}</text>\n",
                       px(t), H - bottom + 18, std::abs(t) < 1e-12 * xs ? 0.0 : t);
  }
  for (double t = std::ceil(ymin / ys) * ys; t <= ymax + 1e-12 * ys; t += ys) {
    out += fmt::format("<line x1=\"{1:.2f}\" y1=\"{0:.2f}\" x2=\"{2:.2f}\" y2=\"{0:.2f}\" stroke=\"#ddd\"/>\n", py(t), left,
                       W - right);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\" font-family=\"sans-serif\" "
                       "font-size=\"12\">{:g}</text>\n",
                       left - 6, py(t) + 4, std::abs(t) < 1e-12 * ys ? 0.0 : t);
  }
  out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                     "font-size=\"14\">{}</text>\n",
                     left + (W - left - right) / 2, H - 25, xml_escape(x_label));
  out += fmt::format("<text x=\"20\" y=\"{:.2f}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
                     "transform=\"rotate(-90 20 {:.2f})\">{}</text>\n",
                     top + (H - top - bottom) / 2, top + (H - top - bottom) / 2, xml_escape(y_label));

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::string points;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || s.y[i] < ymin || s.y[i] > ymax) continue;
      points += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
    }
    if (!points.empty()) points.pop_back();
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} points=\"{}\"/>\n", s.color,
                       s.dashed ? " stroke-dasharray=\"6 4\"" : "", points);
    const double ly = top + 18 + 18 * static_cast<double>(k);
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\"{}/>\n", left + 12, ly,
                       left + 40, ly, s.color, s.dashed ? " stroke-dasharray=\"6 4\"" : "");
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n", left + 46,
                       ly + 4, xml_escape(s.label));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace reaper
