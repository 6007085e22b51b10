#include "kvt/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "kvt/mms.hpp"

namespace kvt {

namespace {

struct RawValue {
  std::string text;
  int line = 0;
};

using Section = std::map<std::string, RawValue>;

const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"grid", {"dim", "n", "length"}},
      {"material", {"lambda1", "mu1", "lambda2", "mu2", "k", "cv", "alpha", "beta"}},
      {"stepper", {"dt", "t_end", "picard_tol", "picard_max", "cg_tol", "cg_max", "theta_floor"}},
      {"initial", {"preset", "theta0", "theta_amp", "u_amp", "v_amp", "case", "path"}},
      {"sources", {"preset", "b", "g", "case"}},
      {"output", {"csv", "snapshot_every", "snapshot_dir"}},
      {"diagnostics", {"theta_underbar", "c0", "c1"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

class Reader {
 public:
  Reader(std::map<std::string, Section> sections, std::string origin, std::vector<std::string>& errors)
      : sections_(std::move(sections)), origin_(std::move(origin)), errors_(errors) {}

  const RawValue* find(const std::string& sec, const std::string& key) const {
    const auto s = sections_.find(sec);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  void number(const std::string& sec, const std::string& key, double& out) {
    if (const RawValue* v = find(sec, key)) {
      if (auto d = parse_number(v->text)) {
        out = *d;
      } else {
        fail(sec, key, *v, "expected a number");
      }
    }
  }

  void optional_number(const std::string& sec, const std::string& key, std::optional<double>& out) {
    if (find(sec, key)) {
      double d = 0.0;
      const std::size_t before = errors_.size();
      number(sec, key, d);
      if (errors_.size() == before) out = d;
    }
  }

  void integer(const std::string& sec, const std::string& key, int& out) {
    if (const RawValue* v = find(sec, key)) {
      if (auto i = parse_int(v->text)) {
        out = *i;
      } else {
        fail(sec, key, *v, "expected an integer");
      }
    }
  }

  void string(const std::string& sec, const std::string& key, std::string& out) {
    if (const RawValue* v = find(sec, key)) out = unquote(v->text);
  }

  // Scalar or [a, b, ...] with at most max_len entries.
  std::optional<std::vector<double>> numbers(const std::string& sec, const std::string& key,
                                             std::size_t max_len) {
    const RawValue* v = find(sec, key);
    if (!v) return std::nullopt;
    std::string t = v->text;
    std::vector<double> out;
    if (!t.empty() && t.front() == '[') {
      if (t.back() != ']') {
        fail(sec, key, *v, "unterminated array");
        return std::nullopt;
      }
      std::stringstream ss(t.substr(1, t.size() - 2));
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto d = parse_number(trim(item));
        if (!d) {
          fail(sec, key, *v, "array entry '" + trim(item) + "' is not a number");
          return std::nullopt;
        }
        out.push_back(*d);
      }
    } else if (auto d = parse_number(t)) {
      out.push_back(*d);
    } else {
      fail(sec, key, *v, "expected a number or an array");
      return std::nullopt;
    }
    if (out.empty() || out.size() > max_len) {
      std::ostringstream os;
      os << "expected 1 to " << max_len << " entries";
      fail(sec, key, *v, os.str());
      return std::nullopt;
    }
    return out;
  }

  void fail(const std::string& sec, const std::string& key, const RawValue& v, const std::string& what) {
    std::ostringstream os;
    os << origin_ << ":" << v.line << ": " << sec << "." << key << ": " << what;
    errors_.push_back(os.str());
  }

 private:
  static std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
  }
  static std::optional<double> parse_number(const std::string& s) {
    double d = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (b != e && *b == '+') ++b;
    const auto r = std::from_chars(b, e, d);
    if (r.ec != std::errc() || r.ptr != e) return std::nullopt;
    return d;
  }
  static std::optional<int> parse_int(const std::string& s) {
    int i = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), i);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
    return i;
  }

  std::map<std::string, Section> sections_;
  std::string origin_;
  std::vector<std::string>& errors_;
};

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

bool known_case(const std::string& id) {
  for (const auto& c : mms::builtin_case_ids()) {
    if (c == id) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> config_violations(const ScenarioConfig& cfg) {
  std::vector<std::string> out;
  const int d = cfg.grid.dim;
  if (d < 1 || d > 3) {
    out.push_back("grid.dim = " + std::to_string(d) + " must be 1, 2 or 3");
  } else {
    for (int a = 0; a < d; ++a) {
      const auto i = static_cast<std::size_t>(a);
      if (cfg.grid.n[i] < 3) out.push_back("grid.n: every axis needs at least 3 nodes");
      if (!(cfg.grid.length[i] > 0.0) || !std::isfinite(cfg.grid.length[i])) {
        out.push_back("grid.length: every axis length must be > 0");
      }
    }
  }
  for (const auto& v : cfg.material.violations()) out.push_back("material." + v);
  for (const auto& v : cfg.stepper.violations()) out.push_back("stepper." + v);
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) out.push_back("stepper.t_end must be > 0");

  const auto& ini = cfg.initial;
  std::ostringstream os;
  switch (ini.preset) {
    case InitialPreset::Rest:
    case InitialPreset::Bump: {
      const double tmin = ini.theta0 - (ini.preset == InitialPreset::Bump ? std::abs(ini.theta_amp) : 0.0);
      if (!(tmin > 0.0)) {
        os << "initial.theta0: minimum initial temperature " << tmin
           << " must be > 0 (positivity rule theta_0 >= theta_underbar > 0)";
        out.push_back(os.str());
      }
      break;
    }
    case InitialPreset::Manufactured:
      if (!known_case(ini.case_id)) {
        out.push_back("initial.case: unknown manufactured case '" + ini.case_id + "'");
      } else if (mms::builtin_case(ini.case_id).dim != d) {
        out.push_back("initial.case: case '" + ini.case_id + "' does not match grid.dim");
      }
      break;
    case InitialPreset::Checkpoint:
      if (ini.path.empty()) out.push_back("initial.path: required for the checkpoint preset");
      break;
  }

  const auto& src = cfg.sources;
  if (src.preset == SourcePreset::Constant) {
    for (double x : src.b) {
      if (!std::isfinite(x)) out.push_back("sources.b must be finite");
    }
    if (!std::isfinite(src.g)) out.push_back("sources.g must be finite");
  } else if (src.preset == SourcePreset::Manufactured) {
    if (!known_case(src.case_id)) {
      out.push_back("sources.case: unknown manufactured case '" + src.case_id + "'");
    } else if (mms::builtin_case(src.case_id).dim != d) {
      out.push_back("sources.case: case '" + src.case_id + "' does not match grid.dim");
    }
  }
  if (cfg.output.snapshot_every < 0) out.push_back("output.snapshot_every must be >= 0");
  if (cfg.output.snapshot_every > 0 && cfg.output.snapshot_dir.empty()) {
    out.push_back("output.snapshot_dir: required when snapshots are enabled");
  }
  const auto& dg = cfg.diagnostics;
  if (dg.theta_underbar && !(*dg.theta_underbar > 0.0)) {
    out.push_back("diagnostics.theta_underbar must be > 0");
  }
  if (dg.c0 && !(*dg.c0 >= 0.0)) out.push_back("diagnostics.c0 must be >= 0");
  if (dg.c1 && !(*dg.c1 >= 0.0)) out.push_back("diagnostics.c1 must be >= 0");
  return out;
}

ScenarioConfig parse_config(std::string_view text, const std::string& origin,
                            const std::string& base_dir) {
  std::vector<std::string> errors;
  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  const auto& keys = known_keys();
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto where = origin + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "malformed section header");
        continue;
      }
      current = trim(line.substr(1, line.size() - 2));
      if (!keys.count(current)) errors.push_back(where + "unknown section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (current.empty()) {
      errors.push_back(where + "key '" + key + "' outside any section");
      continue;
    }
    const auto known = keys.find(current);
    if (known == keys.end()) continue;  // already reported
    if (std::find(known->second.begin(), known->second.end(), key) == known->second.end()) {
      errors.push_back(where + "unknown key " + current + "." + key);
      continue;
    }
    if (value.empty()) {
      errors.push_back(where + current + "." + key + ": missing value");
      continue;
    }
    auto& sec = sections[current];
    if (sec.count(key)) {
      errors.push_back(where + "duplicate key " + current + "." + key);
      continue;
    }
    sec[key] = RawValue{value, line_no};
  }

  ScenarioConfig cfg;
  Reader r(std::move(sections), origin, errors);

  r.integer("grid", "dim", cfg.grid.dim);
  const int d = std::clamp(cfg.grid.dim, 1, 3);
  if (auto n = r.numbers("grid", "n", 3)) {
    if (n->size() != 1 && n->size() != static_cast<std::size_t>(d)) {
      r.fail("grid", "n", *r.find("grid", "n"), "needs one entry or one per axis");
    } else {
      for (int a = 0; a < 3; ++a) {
        const double x = (*n)[n->size() == 1 ? 0 : static_cast<std::size_t>(std::min(a, d - 1))];
        if (x != std::floor(x)) r.fail("grid", "n", *r.find("grid", "n"), "node counts must be integers");
        cfg.grid.n[static_cast<std::size_t>(a)] = static_cast<int>(x);
      }
    }
  }
  if (auto l = r.numbers("grid", "length", 3)) {
    if (l->size() != 1 && l->size() != static_cast<std::size_t>(d)) {
      r.fail("grid", "length", *r.find("grid", "length"), "needs one entry or one per axis");
    } else {
      for (int a = 0; a < 3; ++a) {
        cfg.grid.length[static_cast<std::size_t>(a)] =
            (*l)[l->size() == 1 ? 0 : static_cast<std::size_t>(std::min(a, d - 1))];
      }
    }
  }

  auto& m = cfg.material;
  r.number("material", "lambda1", m.lambda1);
  r.number("material", "mu1", m.mu1);
  r.number("material", "lambda2", m.lambda2);
  r.number("material", "mu2", m.mu2);
  r.number("material", "k", m.k);
  r.number("material", "cv", m.cv);
  r.number("material", "beta", m.beta);
  if (auto a = r.numbers("material", "alpha", 6)) {
    if (a->size() == 1) {
      m.alpha = SymTensor::diag((*a)[0], (*a)[0], (*a)[0]);
    } else if (a->size() == 6) {
      for (int k = 0; k < 6; ++k) m.alpha[k] = (*a)[static_cast<std::size_t>(k)];
    } else {
      r.fail("material", "alpha", *r.find("material", "alpha"),
             "give one isotropic value or six components xx, yy, zz, xy, xz, yz");
    }
  }

  auto& st = cfg.stepper;
  r.number("stepper", "dt", st.dt);
  r.number("stepper", "t_end", cfg.t_end);
  r.number("stepper", "picard_tol", st.picard_tol);
  r.integer("stepper", "picard_max", st.picard_max);
  r.number("stepper", "cg_tol", st.cg_tol);
  r.integer("stepper", "cg_max", st.cg_max);
  r.optional_number("stepper", "theta_floor", st.theta_floor);

  auto& ini = cfg.initial;
  std::string preset;
  r.string("initial", "preset", preset);
  if (!preset.empty()) {
    if (preset == "rest") ini.preset = InitialPreset::Rest;
    else if (preset == "bump") ini.preset = InitialPreset::Bump;
    else if (preset == "manufactured") ini.preset = InitialPreset::Manufactured;
    else if (preset == "checkpoint") ini.preset = InitialPreset::Checkpoint;
    else r.fail("initial", "preset", *r.find("initial", "preset"), "expected rest, bump, manufactured or checkpoint");
  }
  r.number("initial", "theta0", ini.theta0);
  r.number("initial", "theta_amp", ini.theta_amp);
  r.number("initial", "u_amp", ini.u_amp);
  r.number("initial", "v_amp", ini.v_amp);
  r.string("initial", "case", ini.case_id);
  r.string("initial", "path", ini.path);
  ini.path = resolve(ini.path, base_dir);

  auto& src = cfg.sources;
  preset.clear();
  r.string("sources", "preset", preset);
  if (!preset.empty()) {
    if (preset == "zero") src.preset = SourcePreset::Zero;
    else if (preset == "constant") src.preset = SourcePreset::Constant;
    else if (preset == "manufactured") src.preset = SourcePreset::Manufactured;
    else r.fail("sources", "preset", *r.find("sources", "preset"), "expected zero, constant or manufactured");
  }
  if (auto b = r.numbers("sources", "b", 3)) {
    for (std::size_t i = 0; i < b->size(); ++i) src.b[i] = (*b)[i];
  }
  r.number("sources", "g", src.g);
  r.string("sources", "case", src.case_id);

  r.string("output", "csv", cfg.output.csv);
  r.integer("output", "snapshot_every", cfg.output.snapshot_every);
  r.string("output", "snapshot_dir", cfg.output.snapshot_dir);
  cfg.output.csv = resolve(cfg.output.csv, base_dir);
  cfg.output.snapshot_dir = resolve(cfg.output.snapshot_dir, base_dir);

  r.optional_number("diagnostics", "theta_underbar", cfg.diagnostics.theta_underbar);
  r.optional_number("diagnostics", "c0", cfg.diagnostics.c0);
  r.optional_number("diagnostics", "c1", cfg.diagnostics.c1);

  for (auto& v : config_violations(cfg)) errors.push_back(origin + ": " + v);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path, "read failed");
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse_config(ss.str(), path, dir);
}

}  // namespace kvt
