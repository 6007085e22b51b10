#include "kvt/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace kvt::io {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'K', 'V', 'C', 'P'};
constexpr const char* kTrajectoryHeader = "# kvt-trajectory v1";

std::uint64_t fnv1a(std::span<const unsigned char> bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Cursor {
 public:
  Cursor(std::span<const unsigned char> b, const std::string& origin) : b_(b), origin_(origin) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t pos() const noexcept { return pos_; }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw IoError(origin_, "checkpoint is truncated");
  }
  std::span<const unsigned char> b_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

void write_file(const std::string& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  out.close();
  if (!out) throw IoError(path, "write failed");
}

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path, "read failed");
  return bytes;
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError(parent.string(), "cannot create directory: " + ec.message());
}

}  // namespace

std::vector<unsigned char> encode_checkpoint(const SimState& s) {
  const Grid& g = s.grid();
  std::vector<unsigned char> out;
  out.reserve(64 + 8 * (s.u.values().size() + s.v.values().size() + s.theta.values().size()));
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < 3; ++a) put_u32(out, static_cast<std::uint32_t>(g.n(a)));
  for (int a = 0; a < 3; ++a) put_f64(out, a < g.dim() ? g.length(a) : 0.0);
  put_f64(out, s.t);
  for (double x : s.u.values()) put_f64(out, x);
  for (double x : s.v.values()) put_f64(out, x);
  for (double x : s.theta.values()) put_f64(out, x);
  put_u64(out, fnv1a(out));
  return out;
}

SimState decode_checkpoint(std::span<const unsigned char> bytes, const std::string& origin) {
  if (bytes.size() < 4 + 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError(origin, "not a checkpoint (bad magic)");
  }
  const std::size_t body = bytes.size() - 8;
  Cursor tail(bytes.subspan(body), origin);
  if (tail.u64() != fnv1a(bytes.first(body))) throw IoError(origin, "checkpoint checksum mismatch");

  Cursor c(bytes.first(body), origin);
  c.u32();  // magic, already checked
  const std::uint32_t version = c.u32();
  if (version != kCheckpointVersion) {
    throw IoError(origin, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto dim = static_cast<int>(c.u32());
  std::array<int, 3> n{};
  for (auto& x : n) x = static_cast<int>(c.u32());
  std::array<double, 3> len{};
  for (auto& x : len) x = c.f64();
  if (dim < 1 || dim > 3) throw IoError(origin, "checkpoint has an invalid dimension");
  GridPtr grid;
  try {
    grid = make_grid(dim, n, len);
  } catch (const UsageError& e) {
    throw IoError(origin, std::string("checkpoint grid is invalid: ") + e.what());
  }
  SimState s(grid, 1.0, c.f64());
  const std::size_t expect =
      8 * (s.u.values().size() + s.v.values().size() + s.theta.values().size());
  if (body - c.pos() != expect) throw IoError(origin, "checkpoint payload size does not match its grid");
  for (double& x : s.u.values()) x = c.f64();
  for (double& x : s.v.values()) x = c.f64();
  for (double& x : s.theta.values()) x = c.f64();
  return s;
}

void save_checkpoint(const SimState& s, const std::string& path) {
  const auto bytes = encode_checkpoint(s);
  ensure_parent(path);
  write_file(path, bytes.data(), bytes.size());
}

SimState load_checkpoint(const std::string& path) {
  const auto bytes = read_file(path);
  return decode_checkpoint(bytes, path);
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_vtk(const SimState& s, const std::string& path) {
  const Grid& g = s.grid();
  std::string out;
  out.reserve(g.size() * 120);
  out += "# vtk DataFile Version 3.0\n";
  out += "kvt snapshot t=" + format_number(s.t) + "\n";
  out += "ASCII\nDATASET STRUCTURED_POINTS\n";
  out += "DIMENSIONS " + std::to_string(g.n(0)) + " " + std::to_string(g.n(1)) + " " +
         std::to_string(g.n(2)) + "\n";
  out += "ORIGIN 0 0 0\nSPACING";
  for (int a = 0; a < 3; ++a) out += " " + format_number(a < g.dim() ? g.h(a) : 1.0);
  out += "\nPOINT_DATA " + std::to_string(g.size()) + "\n";
  for (const auto* f : {&s.u, &s.v}) {
    out += f == &s.u ? "VECTORS displacement double\n" : "VECTORS velocity double\n";
    for (std::size_t n = 0; n < g.size(); ++n) {
      for (int c = 0; c < 3; ++c) {
        if (c) out += ' ';
        out += format_number(c < g.dim() ? (*f)(n, c) : 0.0);
      }
      out += '\n';
    }
  }
  out += "SCALARS temperature double 1\nLOOKUP_TABLE default\n";
  for (std::size_t n = 0; n < g.size(); ++n) {
    out += format_number(s.theta(n));
    out += '\n';
  }
  ensure_parent(path);
  write_file(path, out.data(), out.size());
}

std::string write_snapshot(const SimState& s, const std::string& vtk_path) {
  write_vtk(s, vtk_path);
  const std::string cp = fs::path(vtk_path).replace_extension(".kvcp").string();
  save_checkpoint(s, cp);
  return cp;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : path_(path), arity_(columns.size()) {
  ensure_parent(path);
  buffer_ = std::string(kCsvSchema) + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += columns[i];
  }
  buffer_ += '\n';
  write_file(path_, buffer_.data(), buffer_.size());
  buffer_.clear();
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != arity_) throw UsageError("CsvWriter: row arity does not match the header");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += format_number(values[i]);
  }
  buffer_ += '\n';
  if (buffer_.size() > (1u << 16)) flush();
}

void CsvWriter::flush() {
  if (buffer_.empty()) return;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw IoError(path_, "cannot open for appending");
  out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  out.close();
  if (!out) throw IoError(path_, "write failed");
  buffer_.clear();
}

CsvRecorder::CsvRecorder(const std::string& path, MaterialParams params)
    : writer_(path, DiagnosticsRecord::column_names()), params_(std::move(params)) {}

void CsvRecorder::on_start(const SimState& s) {
  records_.push_back(initial_record(s, params_));
  writer_.row(records_.back().values());
  writer_.flush();
}

void CsvRecorder::on_step(const StepEvent& ev) {
  records_.push_back(step_record(ev, params_));
  writer_.row(records_.back().values());
  writer_.flush();
}

void write_trajectory_index(const std::string& path, const std::vector<TrajectoryEntry>& entries) {
  std::string out = std::string(kTrajectoryHeader) + "\n";
  for (const auto& e : entries) out += format_number(e.t) + " " + e.checkpoint + "\n";
  ensure_parent(path);
  write_file(path, out.data(), out.size());
}

std::vector<TrajectoryEntry> read_trajectory_index(const std::string& path) {
  const auto bytes = read_file(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw IoError(path, "not a trajectory index (missing header)");
  }
  std::vector<TrajectoryEntry> out;
  int no = 1;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    TrajectoryEntry e;
    if (!(ls >> e.t >> e.checkpoint)) {
      throw IoError(path, "malformed entry on line " + std::to_string(no));
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<SimState> load_trajectory(const std::string& index_path) {
  const fs::path base = fs::path(index_path).parent_path();
  std::vector<SimState> states;
  for (const auto& e : read_trajectory_index(index_path)) {
    const fs::path p(e.checkpoint);
    states.push_back(load_checkpoint(p.is_absolute() ? p.string() : (base / p).string()));
  }
  return states;
}

SnapshotWriter::SnapshotWriter(std::string dir, int every) : dir_(std::move(dir)), every_(every) {
  if (every_ < 0) throw UsageError("SnapshotWriter: cadence must be >= 0");
}

std::string SnapshotWriter::index_path() const { return (fs::path(dir_) / "trajectory.txt").string(); }

void SnapshotWriter::on_start(const SimState& s) {
  entries_.clear();
  if (every_ > 0) write(s, 0);
}

void SnapshotWriter::on_step(const StepEvent& ev) {
  if (every_ > 0 && ev.step % every_ == 0) write(ev.after, ev.step);
}

void SnapshotWriter::write(const SimState& s, int step) {
  char name[32];
  std::snprintf(name, sizeof name, "snap_%06d", step);
  const std::string vtk = (fs::path(dir_) / (std::string(name) + ".vtk")).string();
  write_snapshot(s, vtk);
  entries_.push_back({s.t, std::string(name) + ".kvcp"});
  write_trajectory_index(index_path(), entries_);
}

}  // namespace kvt::io
