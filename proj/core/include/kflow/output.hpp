#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kflow/run.hpp"

namespace kflow {

/// File names inside one output directory.
struct OutputLayout {
  std::filesystem::path directory;
  std::string timeseries = "timeseries.csv";
  std::string snapshot_prefix = "snapshot_";  ///< snapshot_0000.json + snapshot_0000.bin
  std::string summary = "summary.json";
  std::string manifest = "manifest.json";

  static OutputLayout in(std::filesystem::path directory);
};

struct ManifestEntry {
  std::string path;  ///< relative to the output directory
  std::uintmax_t bytes = 0;
};

struct Manifest {
  std::vector<ManifestEntry> files;
};

/// Fixed CSV column order.
const std::vector<std::string>& timeseries_columns();

/// Header plus one row per record; 17 significant digits, absent values as NA.
std::string timeseries_csv(const MonitorReport& report);

/// Writes the time series, every snapshot (JSON sidecar + little-endian
/// float64 row-major binary), the optional summary text and the manifest.
/// Throws std::runtime_error on I/O failure or colliding names.
Manifest write_outputs(const MonitorReport& report, const Trajectory& trajectory,
                       const OutputLayout& layout, const std::string& summary_json = {});

struct SnapshotFile {
  ModelKind kind = ModelKind::periodic_torus;
  int n = 1;
  std::vector<int> dims;
  std::vector<double> spacings;
  double t = 0.0;
  std::vector<double> values;
};

/// Reads a sidecar and its binary; checks the value count against the dims.
SnapshotFile read_snapshot(const std::filesystem::path& sidecar);

}  // namespace kflow
