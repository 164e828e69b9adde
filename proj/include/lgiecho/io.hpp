#pragma once

// Number formatting, CSV/JSON writers and atomic file output.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "photon.hpp"
#include "quantum.hpp"
#include "tomography.hpp"

#ifndef LGIECHO_VERSION
#define LGIECHO_VERSION "1.0.0"
#endif

namespace lgiecho {

inline constexpr const char* kVersion = LGIECHO_VERSION;

/// Shortest decimal form that round-trips; "nan", "inf", "-inf" otherwise.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// Seconds to nanoseconds, rounded to 1e-6 ns so grid times print cleanly.
inline double to_ns(double seconds) { return std::round(seconds * 1e15) / 1e6; }

inline std::string csv_comment(const std::string& scenario, std::uint64_t seed) {
  return std::string("# lgi-echo v") + kVersion + " scenario=" + scenario + " seed=" + std::to_string(seed) + "\n";
}

/// Small CSV builder: header comment, column row, then rows of numbers or text.
class CsvWriter {
 public:
  CsvWriter(const std::string& scenario, std::uint64_t seed, const std::vector<std::string>& columns)
      : text_(csv_comment(scenario, seed)) {
    row_strings(columns);
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> s;
    for (double v : values) s.push_back(format_number(v));
    row_strings(s);
  }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) text_ += ',';
      text_ += cells[k];
    }
    text_ += '\n';
  }

  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

/// Writes files into one directory, each via a temporary name and rename.
/// rollback() deletes everything written so far.
class OutputDirectory {
 public:
  explicit OutputDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& path() const { return dir_; }
  const std::vector<std::string>& written() const { return written_; }

  void write(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir_);
    const auto target = dir_ / name;
    const auto tmp = dir_ / ("." + name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      out.flush();
      if (!out) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("write failed: " + tmp.string());
      }
    }
    std::filesystem::rename(tmp, target);
    written_.push_back(name);
  }

  void rollback() noexcept {
    for (const auto& name : written_) {
      std::error_code ec;
      std::filesystem::remove(dir_ / name, ec);
    }
    written_.clear();
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> written_;
};

// ---------------------------------------------------------------------------
// Per-type exports

inline std::string histogram_csv(const CoincidenceHistogram& h, const std::string& scenario, std::uint64_t seed) {
  CsvWriter w(scenario, seed, {"bin_start_ns", "count"});
  for (std::size_t i = 0; i < h.counts.size(); ++i) w.row({to_ns(h.bin_start(i)), static_cast<double>(h.counts[i])});
  return w.str();
}

inline nlohmann::ordered_json g2_json(const G2Result& g) {
  return {{"g2", g.g2}, {"sigma", g.sigma}, {"n_peak", g.n_peak}, {"n_offset", g.n_offset}};
}

inline nlohmann::ordered_json matrix_json(const Matrix2& m) {
  auto cell = [](Complex z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); };
  return nlohmann::ordered_json::array({nlohmann::ordered_json::array({cell(m(0, 0)), cell(m(0, 1))}),
                                        nlohmann::ordered_json::array({cell(m(1, 0)), cell(m(1, 1))})});
}

/// ReconstructionResult with the density matrix in the HV basis as [re, im] pairs.
inline nlohmann::ordered_json reconstruction_json(const ReconstructionResult& r) {
  return {{"basis", "HV"},
          {"rho", matrix_json(r.rho.hv())},
          {"log_likelihood", r.log_likelihood},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"degenerate", r.degenerate}};
}

inline std::string tomography_csv(const TomographyData& d, const std::string& scenario, std::uint64_t seed) {
  CsvWriter w(scenario, seed, {"basis", "shots", "count"});
  for (std::size_t b = 0; b < d.bases.size(); ++b)
    w.row_strings({d.labels[b], std::to_string(d.shots[b]), std::to_string(d.counts[b])});
  return w.str();
}

/// Reads `basis,shots,count` rows (comment lines starting with '#' skipped).
inline TomographyData parse_tomography_csv(const std::string& text) {
  TomographyData d;
  d.labels.clear();
  d.bases.clear();
  std::size_t pos = 0;
  bool header = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "basis,shots,count") throw DomainError("tomography CSV: expected header basis,shots,count");
      header = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw DomainError("tomography CSV: malformed row '" + line + "'");
    const std::string label = line.substr(0, c1);
    const auto stats = standard_tomography_labels();
    const auto bases = standard_tomography_bases();
    bool found = false;
    for (std::size_t k = 0; k < stats.size(); ++k)
      if (stats[k] == label) {
        d.bases.push_back(bases[k]);
        found = true;
      }
    if (!found) throw DomainError("tomography CSV: unknown basis '" + label + "'");
    d.labels.push_back(label);
    d.shots.push_back(std::stoll(line.substr(c1 + 1, c2 - c1 - 1)));
    d.counts.push_back(std::stoll(line.substr(c2 + 1)));
  }
  d.validate();
  return d;
}

}  // namespace lgiecho
