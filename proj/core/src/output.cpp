#include "kflow/output.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace kflow {

namespace fs = std::filesystem;
using nlohmann::json;

OutputLayout OutputLayout::in(fs::path directory) {
  OutputLayout l;
  l.directory = std::move(directory);
  return l;
}

const std::vector<std::string>& timeseries_columns() {
  static const std::vector<std::string> cols = {
      "t",          "sup_v",       "sup_w",          "trace_min",     "trace_max", "equiv_cmin",
      "equiv_cmax", "Q_max",       "S_max",          "gradw_max",     "lp_energy", "dissipation",
      "ricci_residual", "heat_residual", "dt_used", "status"};
  return cols;
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string num(const std::optional<double>& x) { return x ? num(*x) : "NA"; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string snapshot_stem(const OutputLayout& l, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return l.snapshot_prefix + buf;
}

std::string little_endian(const std::vector<double>& values) {
  std::string bytes(values.size() * 8, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b)
      bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  }
  return bytes;
}

}  // namespace

std::string timeseries_csv(const MonitorReport& report) {
  std::ostringstream out;
  const auto& cols = timeseries_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const MonitorRecord& r : report.records) {
    out << num(r.t) << ',' << num(r.sup_v) << ',' << num(r.sup_w) << ',' << num(r.trace_min) << ','
        << num(r.trace_max) << ',' << num(r.equiv_cmin) << ',' << num(r.equiv_cmax) << ','
        << num(r.q_max) << ',' << num(r.s_max) << ',' << num(r.gradw_max) << ','
        << num(r.lp_energy) << ',' << num(r.dissipation) << ',' << num(r.ricci_residual) << ','
        << num(r.heat_residual) << ',' << num(r.dt_used) << ',' << r.status << '\n';
  }
  return out.str();
}

Manifest write_outputs(const MonitorReport& report, const Trajectory& traj,
                       const OutputLayout& layout, const std::string& summary_json) {
  std::set<std::string> names = {layout.timeseries, layout.manifest};
  if (names.size() != 2 || (!summary_json.empty() && !names.insert(layout.summary).second))
    throw std::runtime_error("output layout has colliding file names");
  for (const auto& n : names)
    if (n.rfind(layout.snapshot_prefix, 0) == 0)
      throw std::runtime_error("output file " + n + " collides with the snapshot prefix");

  std::error_code ec;
  fs::create_directories(layout.directory, ec);
  if (ec) throw std::runtime_error("cannot create " + layout.directory.string() + ": " + ec.message());

  Manifest manifest;
  auto emit = [&](const std::string& name, const std::string& text) {
    const fs::path path = layout.directory / name;
    write_text(path, text);
    manifest.files.push_back({name, fs::file_size(path)});
  };

  emit(layout.timeseries, timeseries_csv(report));
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const Snapshot& s = traj.snapshots[i];
    const Grid& g = *s.v.grid();
    const std::string stem = snapshot_stem(layout, i);
    json side = {{"model_kind", to_string(g.kind)},
                 {"n", g.n},
                 {"dims", g.dims},
                 {"spacings", g.spacing},
                 {"t", s.t},
                 {"value_count", s.v.size()},
                 {"dtype", "float64"},
                 {"byte_order", "little"},
                 {"layout", "row-major"},
                 {"binary", stem + ".bin"}};
    if (g.kind == ModelKind::radial_plane) {
      side["s_min"] = g.s_min;
      side["s_max"] = g.s_max;
    }
    emit(stem + ".bin", little_endian(s.v.data()));
    emit(stem + ".json", side.dump(2));
  }
  if (!summary_json.empty()) emit(layout.summary, summary_json);

  json m = {{"files", json::array()}};
  for (const auto& f : manifest.files) m["files"].push_back({{"path", f.path}, {"bytes", f.bytes}});
  write_text(layout.directory / layout.manifest, m.dump(2));
  return manifest;
}

SnapshotFile read_snapshot(const fs::path& sidecar) {
  std::ifstream in(sidecar);
  if (!in) throw std::runtime_error("cannot open " + sidecar.string());
  json side;
  try {
    side = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed sidecar " + sidecar.string() + ": " + e.what());
  }
  SnapshotFile out;
  const std::string kind = side.at("model_kind").get<std::string>();
  out.kind = kind == "radial_plane" ? ModelKind::radial_plane : ModelKind::periodic_torus;
  out.n = side.at("n").get<int>();
  out.dims = side.at("dims").get<std::vector<int>>();
  out.spacings = side.at("spacings").get<std::vector<double>>();
  out.t = side.at("t").get<double>();
  const auto count = side.at("value_count").get<std::size_t>();
  std::size_t expected = 1;
  for (int d : out.dims) expected *= static_cast<std::size_t>(d);
  if (count != expected) throw std::runtime_error("sidecar value count does not match its dims");

  const fs::path bin = sidecar.parent_path() / side.at("binary").get<std::string>();
  std::ifstream b(bin, std::ios::binary);
  if (!b) throw std::runtime_error("cannot open " + bin.string());
  std::string bytes((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  if (bytes.size() != count * 8) throw std::runtime_error("binary size does not match value count");
  out.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + static_cast<std::size_t>(k)]))
              << (8 * k);
    out.values[i] = std::bit_cast<double>(bits);
  }
  return out;
}

}  // namespace kflow
