#pragma once

// Serialization: binary checkpoints, legacy-VTK snapshots, diagnostics CSV
// and the trajectory index that lists a run's checkpoints.
//
// Checkpoint layout (all little-endian):
//   "KVCP"  u32 version  u32 dim  u32 n[3]  f64 length[3]  f64 t
//   f64 u[N*dim]  f64 v[N*dim]  f64 theta[N]
//   u64 FNV-1a hash of every preceding byte

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kvt/diagnostics.hpp"
#include "kvt/picard.hpp"

namespace kvt::io {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr const char* kCsvSchema = "# kvt-diagnostics v1";

std::vector<unsigned char> encode_checkpoint(const SimState& s);
/// Throws IoError (using `origin` as the path) on bad magic, version,
/// size or checksum.
SimState decode_checkpoint(std::span<const unsigned char> bytes, const std::string& origin = "<memory>");

void save_checkpoint(const SimState& s, const std::string& path);
SimState load_checkpoint(const std::string& path);

/// ASCII STRUCTURED_POINTS with point arrays displacement, velocity
/// (3 components, zero padded) and temperature.
void write_vtk(const SimState& s, const std::string& path);

/// VTK file at `vtk_path` plus a checkpoint with the same stem and
/// extension .kvcp. Returns the checkpoint path.
std::string write_snapshot(const SimState& s, const std::string& vtk_path);

/// Shortest round-trip text for a double (17 significant digits).
std::string format_number(double x);

class CsvWriter {
 public:
  /// Truncates `path`, writes the schema line and the header.
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(std::span<const double> values);
  void flush();
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
  std::size_t arity_;
  std::string buffer_;
};

/// Observer that streams one CSV row per diagnostics record.
class CsvRecorder : public Observer {
 public:
  CsvRecorder(const std::string& path, MaterialParams params);
  void on_start(const SimState& s) override;
  void on_step(const StepEvent& ev) override;
  const std::vector<DiagnosticsRecord>& records() const noexcept { return records_; }

 private:
  CsvWriter writer_;
  MaterialParams params_;
  std::vector<DiagnosticsRecord> records_;
};

struct TrajectoryEntry {
  double t = 0.0;
  std::string checkpoint;  // relative to the index file's directory, or absolute
};

void write_trajectory_index(const std::string& path, const std::vector<TrajectoryEntry>& entries);
std::vector<TrajectoryEntry> read_trajectory_index(const std::string& path);
/// Loads every checkpoint listed in an index, in order.
std::vector<SimState> load_trajectory(const std::string& index_path);

/// Writes a snapshot at step 0 and every `every` steps, maintaining
/// dir/trajectory.txt. every = 0 disables it.
class SnapshotWriter : public Observer {
 public:
  SnapshotWriter(std::string dir, int every);
  void on_start(const SimState& s) override;
  void on_step(const StepEvent& ev) override;
  int written() const noexcept { return static_cast<int>(entries_.size()); }
  std::string index_path() const;

 private:
  void write(const SimState& s, int step);

  std::string dir_;
  int every_;
  std::vector<TrajectoryEntry> entries_;
};

}  // namespace kvt::io
