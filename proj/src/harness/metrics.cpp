#include "flame/harness/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace flame::harness {

std::vector<std::string> metrics_columns() {
  std::vector<std::string> cols{"step",   "episode_return", "actor_loss", "critic_loss", "alpha",
                                "entropy_estimate", "cov_g1",  "cov_g2",     "cov_g3",      "cov_g4",
                                "w1"};
  for (int n : kNestColumns) cols.push_back("loglik_mse_nest" + std::to_string(n));
  return cols;
}

std::string MetricsRow::first_non_finite() const {
  const auto bad = [](const std::optional<double>& v) { return v && !std::isfinite(*v); };
  if (bad(episode_return)) return "episode_return";
  if (bad(actor_loss)) return "actor_loss";
  if (bad(critic_loss)) return "critic_loss";
  if (bad(alpha)) return "alpha";
  if (bad(entropy_estimate)) return "entropy_estimate";
  for (const auto& c : coverage)
    if (bad(c)) return "coverage";
  if (bad(w1)) return "w1";
  for (const auto& m : loglik_mse)
    if (bad(m)) return "loglik_mse";
  return "";
}

namespace {

void cell(std::string& out, const std::optional<double>& v) {
  out += ',';
  if (!v) return;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  out += buf;
}

}  // namespace

std::string format_metrics_row(const MetricsRow& row) {
  std::string out = std::to_string(row.step);
  cell(out, row.episode_return);
  cell(out, row.actor_loss);
  cell(out, row.critic_loss);
  cell(out, row.alpha);
  cell(out, row.entropy_estimate);
  for (const auto& c : row.coverage) cell(out, c);
  cell(out, row.w1);
  for (const auto& m : row.loglik_mse) cell(out, m);
  return out;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot write metrics file " + path.string());
  out_ << kMetricsSchema << '\n';
  const auto cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
  out_ << '\n' << std::flush;
}

void MetricsWriter::append(const MetricsRow& row) {
  out_ << format_metrics_row(row) << '\n' << std::flush;
  ++rows_;
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& c : columns)
    if (c == name) return true;
  return false;
}

Vector CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] != name) continue;
    Vector v(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) v(static_cast<Index>(i)) = rows[i][j];
    return v;
  }
  throw std::runtime_error("CSV has no column '" + name + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto parts = split(line);
    if (!header) {
      t.columns = parts;
      header = true;
      continue;
    }
    if (parts.size() != t.columns.size()) {
      throw std::runtime_error("CSV line " + std::to_string(lineno) + ": expected " +
                               std::to_string(t.columns.size()) + " cells, got " + std::to_string(parts.size()));
    }
    std::vector<double> row;
    for (const auto& p : parts) {
      if (p.empty()) {
        row.push_back(NAN);
        continue;
      }
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(p, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != p.size() || pos == 0) {
        throw std::runtime_error("CSV line " + std::to_string(lineno) + ": non-numeric cell '" + p + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (!header) throw std::runtime_error("CSV has no header line");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_csv(in);
}

}  // namespace flame::harness
