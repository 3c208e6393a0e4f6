#include <cmath>
#include <fstream>
#include <sstream>

#include "kakulab/harness.hpp"

namespace kakulab::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

bool valid_gamma(double g) { return g > -1.0 && g < 0.0; }

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key=value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    for (auto& c : key)
      if (c == '_') c = '-';
    out[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_key_values(ss.str());
}

std::pair<int, int> parse_index_range(const std::string& key, const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    const int lo = std::stoi(text.substr(0, colon));
    const int hi = std::stoi(text.substr(colon + 1));
    if (lo > hi) throw ConfigError(key, "empty range " + text);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ConfigError(key, "expected lo:hi, got '" + text + "'");
  }
}

std::vector<double> parse_number_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const std::string t = trim(item);
      out.push_back(std::stod(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::logic_error&) {
      throw ConfigError(key, "expected comma-separated numbers, got '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

void ExperimentConfig::validate() const {
  require(valid_gamma(gamma1), "gamma1", "gamma must lie in (-1, 0)");
  require(valid_gamma(gamma2), "gamma2", "gamma must lie in (-1, 0)");
  require(valid_gamma(single_gamma), "single-gamma", "gamma must lie in (-1, 0)");
  require(mode == "pure" || mode == "normalized", "mode", "must be pure or normalized");
  require(depth >= 2 && depth <= 88, "depth", "must lie in [2, 88]");
  require(C > 0.0, "C", "must be positive");
  require(samples >= 1, "samples", "must be positive");
  require(t >= 0.0 && std::isfinite(t), "t", "must be a finite nonnegative time");
  require(m >= 1 && m <= 16, "m", "must lie in [1, 16]");
  require(R >= 0.0 && std::isfinite(R), "R", "must be finite and nonnegative");
  require(delta >= 0.0, "delta", "must be nonnegative (0 selects the default)");
  require(epsilon > 0.0 && epsilon < 1.0, "epsilon", "must lie in (0, 1)");
  require(tol > 1e-4 && tol < 0.1, "tol", "must lie in (1e-4, 1e-1)");
  require(family >= 1 && family <= 20, "family", "must lie in [1, 20]");
  require(epsilon1 > 0.0, "epsilon1", "must be positive");
  require(epsilon2 >= 0.0, "epsilon2", "must be nonnegative (0 selects the default)");
  require(centers >= 1, "centers", "must be positive");
  require(T >= 1e3, "T", "must be at least 1e3");
  require(points >= 1, "points", "must be positive");
  require(times >= 2, "times", "must be at least 2");
  require(sample >= 200, "sample", "must be at least 200");
  parse_index_range("s-range", s_range);
  parse_index_range("n-range", n_range);
  for (double r : parse_number_list("R-grid", r_grid)) require(r > 0.0 && r <= 1e4, "R-grid", "entries must lie in (0, 1e4]");
}

}  // namespace kakulab::harness
