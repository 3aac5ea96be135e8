#include "supcar/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace supcar {
namespace {

void put(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

double parse_num(const std::string& field, std::size_t line_no) {
  char* end = nullptr;
  const double x = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0')
    throw std::invalid_argument("CSV: bad number \"" + field + "\" on line " +
                                std::to_string(line_no));
  return x;
}

// Header line + uniform-width numeric rows.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table parse_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("CSV: empty document");
  Table t;
  t.header = split(line, ',');
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != t.header.size())
      throw std::invalid_argument("CSV: row width mismatch on line " +
                                  std::to_string(line_no));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_num(f, line_no));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace

std::string csv_of_acf(const AcfTable& table) {
  bool empirical = false;
  for (const auto& r : table.rows) empirical = empirical || r.r_empirical;
  std::string out = "tau,r_analytic";
  if (empirical) out += ",r_empirical,ci_half_width";
  out += '\n';
  for (const auto& r : table.rows) {
    put(out, r.tau);
    out += ',';
    put(out, r.r_analytic);
    if (empirical) {
      out += ',';
      put(out, r.r_empirical.value_or(0.0));
      out += ',';
      put(out, r.ci_half_width.value_or(0.0));
    }
    out += '\n';
  }
  return out;
}

std::string csv_of_paths(const PathSet& paths) {
  std::string out = "t";
  for (std::size_t p = 0; p < paths.values.size(); ++p)
    out += ",path_" + std::to_string(p);
  out += '\n';
  for (std::size_t i = 0; i < paths.times.size(); ++i) {
    put(out, paths.times[i]);
    for (const auto& path : paths.values) {
      out += ',';
      put(out, path[i]);
    }
    out += '\n';
  }
  return out;
}

std::string csv_of_comparison(const ComparisonReport& report) {
  std::string out = "tau,r_analytic,r_empirical,ci_half_width,r_atomized\n";
  for (std::size_t i = 0; i < report.table.rows.size(); ++i) {
    const auto& r = report.table.rows[i];
    put(out, r.tau);
    out += ',';
    put(out, r.r_analytic);
    out += ',';
    put(out, r.r_empirical.value_or(0.0));
    out += ',';
    put(out, r.ci_half_width.value_or(0.0));
    out += ',';
    put(out, report.r_atomized[i]);
    out += '\n';
  }
  return out;
}

AcfTable acf_from_csv(const std::string& text) {
  Table t = parse_table(text);
  const bool empirical = t.header.size() == 4;
  if (t.header.size() != 2 && !empirical)
    throw std::invalid_argument("CSV: not an acf table");
  if (t.header[0] != "tau" || t.header[1] != "r_analytic" ||
      (empirical && (t.header[2] != "r_empirical" ||
                     t.header[3] != "ci_half_width")))
    throw std::invalid_argument("CSV: not an acf table");
  AcfTable out;
  for (const auto& row : t.rows) {
    AcfRow r;
    r.tau = row[0];
    r.r_analytic = row[1];
    if (empirical) {
      r.r_empirical = row[2];
      r.ci_half_width = row[3];
    }
    out.rows.push_back(r);
  }
  return out;
}

PathSet paths_from_csv(const std::string& text) {
  Table t = parse_table(text);
  if (t.header.empty() || t.header[0] != "t")
    throw std::invalid_argument("CSV: not a paths table");
  PathSet out;
  out.values.resize(t.header.size() - 1);
  for (const auto& row : t.rows) {
    out.times.push_back(row[0]);
    for (std::size_t p = 1; p < row.size(); ++p)
      out.values[p - 1].push_back(row[p]);
  }
  if (out.times.size() >= 2) out.dt = out.times[1] - out.times[0];
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  out << content;
  if (!out.flush()) throw std::invalid_argument("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace supcar
