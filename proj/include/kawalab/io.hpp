#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "kawalab/configuration.hpp"
#include "kawalab/errors.hpp"
#include "kawalab/estimators.hpp"
#include "kawalab/hierarchy.hpp"
#include "kawalab/simulator.hpp"
#include "kawalab/version.hpp"

namespace kawalab {

// Shortest round-trip decimal form of a double.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <std::size_t D>
void write_configuration_csv(const std::string& path,
                             const Configuration<D>& cfg) {
  std::ofstream out(path);
  require(out.good(), "io: cannot write " + path);
  out << "x1";
  for (std::size_t k = 1; k < D; ++k) out << ",x" << k + 1;
  out << "\n";
  for (const auto& p : cfg.points()) {
    out << fmt_double(p[0]);
    for (std::size_t k = 1; k < D; ++k) out << "," << fmt_double(p[k]);
    out << "\n";
  }
}

// Column count of the header decides the dimension.
inline std::size_t configuration_csv_dimension(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "io: cannot open " + path);
  std::string header;
  require(static_cast<bool>(std::getline(in, header)), "io: empty csv " + path);
  return 1 + static_cast<std::size_t>(
                 std::count(header.begin(), header.end(), ','));
}

template <std::size_t D>
Configuration<D> read_configuration_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "io: cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "io: empty csv " + path);
  std::vector<Point<D>> pts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Point<D> p{};
    std::size_t pos = 0;
    for (std::size_t k = 0; k < D; ++k) {
      const auto next = line.find(',', pos);
      const std::string cell = line.substr(
          pos, next == std::string::npos ? std::string::npos : next - pos);
      p[k] = std::stod(cell);
      require(k + 1 == D || next != std::string::npos,
              "io: short row in " + path);
      pos = next + 1;
    }
    pts.push_back(p);
  }
  return Configuration<D>(std::move(pts));
}

template <std::size_t D>
nlohmann::json configuration_envelope(const Configuration<D>& cfg) {
  return {{"d", D}, {"count", cfg.size()}, {"psi_total", cfg.psi_total()}};
}

template <std::size_t D>
void write_events_csv(const std::string& path, const PathSample<D>& path_sample) {
  std::ofstream out(path);
  require(out.good(), "io: cannot write " + path);
  out << "t,mover";
  for (std::size_t k = 0; k < D; ++k) out << ",from_x" << k + 1;
  for (std::size_t k = 0; k < D; ++k) out << ",to_x" << k + 1;
  out << "\n";
  for (const auto& e : path_sample.events) {
    out << fmt_double(e.t) << "," << e.mover;
    for (std::size_t k = 0; k < D; ++k) out << "," << fmt_double(e.from[k]);
    for (std::size_t k = 0; k < D; ++k) out << "," << fmt_double(e.to[k]);
    out << "\n";
  }
}

inline nlohmann::json record_to_json(const ReportRecord& r) {
  return {{"check_id", r.check_id},     {"bound_ref", r.bound_ref},
          {"measured", r.measured},     {"std_error", r.std_error},
          {"target", r.target},         {"tolerance_rule", r.tolerance_rule},
          {"verdict", to_string(r.verdict)}, {"meta", r.meta}};
}

inline void write_records_jsonl(const std::string& path,
                                const std::vector<ReportRecord>& records) {
  std::ofstream out(path);
  require(out.good(), "io: cannot write " + path);
  for (const auto& r : records) out << record_to_json(r).dump() << "\n";
}

inline std::string records_jsonl_string(const std::vector<ReportRecord>& rs) {
  std::string out;
  for (const auto& r : rs) out += record_to_json(r).dump() + "\n";
  return out;
}

inline void print_records_table(std::ostream& out,
                                const std::vector<ReportRecord>& records) {
  out << std::left << std::setw(34) << "check" << std::setw(9) << "verdict"
      << std::setw(15) << "measured" << std::setw(15) << "target"
      << "rule\n";
  for (const auto& r : records) {
    out << std::left << std::setw(34) << r.check_id << std::setw(9)
        << to_string(r.verdict) << std::setw(15) << r.measured << std::setw(15)
        << r.target << r.tolerance_rule << "\n";
  }
}

// Artifact directories are staged and renamed into place so interrupted runs
// never leave a half-written result at the final path.
class ArtifactDir {
 public:
  explicit ArtifactDir(const std::string& final_path)
      : final_(final_path), staging_(final_path + ".staging") {
    std::filesystem::remove_all(staging_);
    std::filesystem::create_directories(staging_);
  }

  ~ArtifactDir() {
    if (!committed_) std::filesystem::remove_all(staging_);
  }

  std::string path(const std::string& name) const {
    return (std::filesystem::path(staging_) / name).string();
  }

  void commit() {
    std::filesystem::remove_all(final_);
    std::filesystem::create_directories(
        std::filesystem::path(final_).parent_path().empty()
            ? "."
            : std::filesystem::path(final_).parent_path().string());
    std::filesystem::rename(staging_, final_);
    committed_ = true;
  }

 private:
  std::string final_;
  std::string staging_;
  bool committed_ = false;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  require(out.good(), "io: cannot write " + path);
  out << text;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline void write_correlation_csv(const std::string& dir,
                                  const CorrelationTable& k) {
  {
    std::ofstream out(dir + "/k1.csv");
    out << "x,value\n";
    for (std::size_t i = 0; i < k.grid.nodes; ++i)
      out << fmt_double(k.grid.node(i)) << "," << fmt_double(k.k1[i]) << "\n";
  }
  if (k.n_max >= 2) {
    std::ofstream out(dir + "/k2.csv");
    out << "x,y,value\n";
    for (std::size_t i = 0; i < k.grid.nodes; ++i)
      for (std::size_t j = 0; j < k.grid.nodes; ++j)
        out << fmt_double(k.grid.node(i)) << "," << fmt_double(k.grid.node(j))
            << "," << fmt_double(k.at2(i, j)) << "\n";
  }
  if (k.n_max >= 3) {
    std::ofstream out(dir + "/k3.csv");
    out << "x,y,z,value\n";
    for (std::size_t i = 0; i < k.grid.nodes; ++i)
      for (std::size_t j = 0; j < k.grid.nodes; ++j)
        for (std::size_t l = 0; l < k.grid.nodes; ++l)
          out << fmt_double(k.grid.node(i)) << "," << fmt_double(k.grid.node(j))
              << "," << fmt_double(k.grid.node(l)) << ","
              << fmt_double(k.at3(i, j, l)) << "\n";
  }
}

}  // namespace kawalab
