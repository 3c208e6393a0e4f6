#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kakulab::harness {

enum ExitCode : int { kOk = 0, kValidation = 2, kCapacity = 3, kAcceptanceFailure = 4 };

/// Invalid configuration value; `key()` names the offending setting.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// ---------------------------------------------------------------- output

/// RFC 4180 field quoting.
std::string csv_escape(std::string_view field);

/// Shortest text that round-trips a double.
std::string format_double(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parse RFC 4180 text: header row first.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

class Manifest {
 public:
  void set(const std::string& key, const std::string& value);
  std::string str() const;
  void write(const std::filesystem::path& path) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// ---------------------------------------------------------------- config

/// key=value lines; '#' starts a comment; blank lines ignored.
std::map<std::string, std::string> parse_key_values(std::string_view text);
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

/// Every setting any scenario reads. Keys in config files use the long flag
/// names without dashes, with '-' or '_' accepted interchangeably.
struct ExperimentConfig {
  std::string alpha1 = "golden";
  std::string alpha2 = "sqrt2m1";
  double gamma1 = -0.8;
  double gamma2 = -0.5;
  std::string mode = "pure";
  int depth = 40;
  double C = 2.0;

  int samples = 200;
  std::string s_range = "4:18";
  std::string n_range = "4:8";

  double t = 100.0;
  int m = 4;
  double R = 200.0;
  double delta = 0.0;
  double epsilon = 0.1;
  bool solve_fr = false;
  double tol = 0.01;
  double shift = -1.0;

  int family = 1;
  double epsilon1 = 0.1;
  double epsilon2 = 0.0;
  int centers = 5;

  double T = 1e5;
  int points = 20;
  int times = 256;

  std::string r_grid = "100,316.227766016838,1000,3162.27766016838";
  int sample = 300;
  double single_gamma = -0.5;

  unsigned long long seed = 1;
  std::string out = ".";

  /// Checks ranges; throws ConfigError naming the key.
  void validate() const;
};

std::pair<int, int> parse_index_range(const std::string& key, const std::string& text);
std::vector<double> parse_number_list(const std::string& key, const std::string& text);

/// Entry point of the kakulab tool; returns the process exit status.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace kakulab::harness
