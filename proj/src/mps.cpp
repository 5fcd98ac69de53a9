#include "bellvis/mps.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "bellvis/errors.hpp"

namespace bellvis {

namespace {

// Shortest decimal that parses back to exactly the same double. The value is
// the last field on every record written here, so it may overrun the nominal
// 12-character fixed-format field when exactness needs more digits.
std::string format_value(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// Fixed-format data record: fields start at columns 5, 15, 25, 40, 50.
std::string record(const std::string& f2, const std::string& f3, const std::string& f4,
                   const std::string& f5 = "", const std::string& f6 = "") {
  std::string line = "    " + pad(f2, 10) + pad(f3, 10) + pad(f4, 15);
  if (!f5.empty()) line += pad(f5, 10) + f6;
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line;
}

}  // namespace

void write_mps(const ImplicitLp& lp, const std::string& path) {
  const std::size_t m = lp.rows();
  std::size_t nnz = m * lp.row_nnz();
  for (double v : lp.last_column()) {
    if (v != 0.0) ++nnz;
  }
  if (nnz > kMpsNonzeroCap) {
    throw SizeCapError("MPS export nonzero cap exceeded");
  }

  std::ofstream out(path);
  if (!out) throw IoError("cannot write MPS file: " + path);

  out << "* Maximization LP; the COST row below is the negated objective,\n";
  out << "* so minimizing this file reproduces the original optimum up to sign.\n";
  out << "NAME          " << "BELLVIS\n";
  out << "ROWS\n";
  out << " N  COST\n";
  for (std::size_t i = 0; i < m; ++i) out << " E  R" << (i + 1) << "\n";

  out << "COLUMNS\n";
  const std::size_t na = lp.assignment_cols();
  for (std::size_t j = 0; j < na; ++j) {
    const std::string col = "C" + std::to_string(j + 1);
    for (std::uint32_t i : lp.col_rows(j)) {
      out << record(col, "R" + std::to_string(i + 1), format_value(1.0)) << "\n";
    }
  }
  out << record("VIS", "COST", format_value(-1.0)) << "\n";
  for (std::size_t i = 0; i < m; ++i) {
    const double v = lp.last_column()[i];
    if (v == 0.0) continue;
    out << record("VIS", "R" + std::to_string(i + 1), format_value(v)) << "\n";
  }

  out << "RHS\n";
  for (std::size_t i = 0; i < m; ++i) {
    out << record("RHS", "R" + std::to_string(i + 1), format_value(lp.rhs_value())) << "\n";
  }

  out << "BOUNDS\n";
  for (std::size_t j = 0; j < na; ++j) {
    out << " UP " << pad("BND", 10) << pad("C" + std::to_string(j + 1), 10)
        << format_value(1.0) << "\n";
  }
  out << " UP " << pad("BND", 10) << pad("VIS", 10) << format_value(1.0) << "\n";
  out << "ENDATA\n";
  if (!out) throw IoError("MPS write failed: " + path);
}

reference::DenseLp read_mps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open MPS file: " + path);

  enum class Section { None, Rows, Columns, Rhs, Bounds, Done };
  Section section = Section::None;

  std::string objective_row;
  std::map<std::string, std::size_t> row_index;
  std::vector<std::string> row_names;
  std::map<std::string, std::size_t> col_index;
  std::vector<std::string> col_names;
  // (row, col) -> value, plus per-column objective coefficients
  std::vector<std::map<std::size_t, double>> col_entries;
  std::vector<double> col_obj;
  std::vector<double> rhs_by_row;
  std::vector<double> upper_by_col;

  auto column_slot = [&](const std::string& name) -> std::size_t {
    auto it = col_index.find(name);
    if (it != col_index.end()) return it->second;
    const std::size_t j = col_names.size();
    col_index.emplace(name, j);
    col_names.push_back(name);
    col_entries.emplace_back();
    col_obj.push_back(0.0);
    upper_by_col.push_back(std::numeric_limits<double>::infinity());
    return j;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ss(line);
    const bool header = line[0] != ' ' && line[0] != '\t';
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    const auto fail = [&](const std::string& what) {
      throw IoError("MPS parse error at line " + std::to_string(lineno) + ": " + what);
    };

    if (header) {
      const std::string& kw = tok[0];
      if (kw == "NAME") continue;
      if (kw == "ROWS") section = Section::Rows;
      else if (kw == "COLUMNS") section = Section::Columns;
      else if (kw == "RHS") section = Section::Rhs;
      else if (kw == "BOUNDS") section = Section::Bounds;
      else if (kw == "RANGES") fail("RANGES sections are not supported");
      else if (kw == "ENDATA") { section = Section::Done; break; }
      else fail("unknown section: " + kw);
      continue;
    }

    switch (section) {
      case Section::Rows: {
        if (tok.size() != 2) fail("malformed ROWS record");
        if (tok[0] == "N") {
          if (!objective_row.empty()) fail("multiple objective rows");
          objective_row = tok[1];
        } else if (tok[0] == "E") {
          if (row_index.count(tok[1])) fail("duplicate row name");
          row_index.emplace(tok[1], row_names.size());
          row_names.push_back(tok[1]);
        } else {
          fail("only N and E rows are supported");
        }
        break;
      }
      case Section::Columns: {
        if (tok.size() != 3 && tok.size() != 5) fail("malformed COLUMNS record");
        const std::size_t j = column_slot(tok[0]);
        for (std::size_t f = 1; f + 1 < tok.size(); f += 2) {
          const std::string& row = tok[f];
          const double value = std::strtod(tok[f + 1].c_str(), nullptr);
          if (row == objective_row) {
            col_obj[j] = value;
          } else {
            auto it = row_index.find(row);
            if (it == row_index.end()) fail("unknown row: " + row);
            col_entries[j][it->second] = value;
          }
        }
        break;
      }
      case Section::Rhs: {
        if (tok.size() != 3 && tok.size() != 5) fail("malformed RHS record");
        if (rhs_by_row.empty()) rhs_by_row.assign(row_names.size(), 0.0);
        for (std::size_t f = 1; f + 1 < tok.size(); f += 2) {
          auto it = row_index.find(tok[f]);
          if (it == row_index.end()) fail("unknown RHS row: " + tok[f]);
          rhs_by_row[it->second] = std::strtod(tok[f + 1].c_str(), nullptr);
        }
        break;
      }
      case Section::Bounds: {
        if (tok.size() != 4) fail("malformed BOUNDS record");
        if (tok[0] != "UP") fail("only UP bounds are supported");
        auto it = col_index.find(tok[2]);
        if (it == col_index.end()) fail("unknown bound column: " + tok[2]);
        upper_by_col[it->second] = std::strtod(tok[3].c_str(), nullptr);
        break;
      }
      default:
        fail("data record outside any section");
    }
  }
  if (section != Section::Done) throw IoError("MPS file missing ENDATA: " + path);
  if (objective_row.empty()) throw IoError("MPS file has no objective row: " + path);

  const std::size_t m = row_names.size();
  const std::size_t n = col_names.size();
  if (m == 0 || n == 0) throw IoError("MPS file defines an empty LP: " + path);
  if (m * n > reference::kDenseEntryCap) {
    throw SizeCapError("MPS file too large to materialize densely");
  }

  reference::DenseLp lp;
  lp.m = m;
  lp.n = n;
  lp.a.assign(m * n, 0.0);
  lp.b = rhs_by_row.empty() ? std::vector<double>(m, 0.0) : rhs_by_row;
  lp.c.resize(n);
  lp.u = upper_by_col;
  for (std::size_t j = 0; j < n; ++j) {
    lp.c[j] = -col_obj[j];  // undo the writer's negation
    for (const auto& [i, v] : col_entries[j]) lp.at(i, j) = v;
  }
  return lp;
}

}  // namespace bellvis
