#include <covmiss/csv_io.hpp>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace covmiss {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

bool is_missing_token(const std::string& t) {
  if (t.empty()) return true;
  return t.size() == 2 && (t[0] == 'n' || t[0] == 'N') && (t[1] == 'a' || t[1] == 'A');
}

bool parse_number(const std::string& t, double& out) {
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) lines.push_back(line);
  }
  if (lines.empty()) throw DataError("'" + path + "' holds no data");
  return lines;
}

}  // namespace

NamedMaskedData read_masked_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);

  std::vector<std::string> names;
  std::size_t first = 0;
  {
    const std::vector<std::string> head = split_line(lines[0]);
    bool header = false;
    for (const std::string& t : head) {
      double unused;
      if (!is_missing_token(t) && !parse_number(t, unused)) {
        header = true;
        break;
      }
    }
    if (header) {
      names = head;
      first = 1;
      if (lines.size() < 2) throw DataError("'" + path + "' has a header but no data rows");
    }
  }

  const std::size_t n = lines.size() - first;
  const std::vector<std::string> row0 = split_line(lines[first]);
  const std::size_t p = row0.size();
  if (p == 0) throw DataError("'" + path + "' has an empty data row");
  if (!names.empty() && names.size() != p)
    throw DataError("'" + path + "' header and data column counts differ");

  Matrix<double> values = Matrix<double>::Zero(static_cast<Index>(p), static_cast<Index>(n));
  Matrix<double> mask = Matrix<double>::Zero(static_cast<Index>(p), static_cast<Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const std::vector<std::string> cells = split_line(lines[first + r]);
    if (cells.size() != p)
      throw DataError("'" + path + "' row " + std::to_string(r + 1) + " has " +
                      std::to_string(cells.size()) + " cells, expected " + std::to_string(p));
    for (std::size_t c = 0; c < p; ++c) {
      if (is_missing_token(cells[c])) continue;
      double v;
      if (!parse_number(cells[c], v))
        throw DataError("'" + path + "' row " + std::to_string(r + 1) + " column " +
                        std::to_string(c + 1) + ": cannot parse '" + cells[c] + "'");
      values(static_cast<Index>(c), static_cast<Index>(r)) = v;
      mask(static_cast<Index>(c), static_cast<Index>(r)) = 1.0;
    }
  }
  return {MaskedMatrix<double>(std::move(values), std::move(mask)), std::move(names)};
}

Matrix<double> read_matrix_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  const std::size_t rows = lines.size();
  const std::size_t cols = split_line(lines[0]).size();
  Matrix<double> m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::vector<std::string> cells = split_line(lines[r]);
    if (cells.size() != cols)
      throw DataError("'" + path + "' row " + std::to_string(r + 1) +
                      " has a different cell count");
    for (std::size_t c = 0; c < cols; ++c) {
      double v;
      if (!parse_number(cells[c], v))
        throw DataError("'" + path + "' row " + std::to_string(r + 1) + " column " +
                        std::to_string(c + 1) + ": cannot parse '" + cells[c] + "'");
      m(static_cast<Index>(r), static_cast<Index>(c)) = v;
    }
  }
  return m;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_matrix_csv(const Matrix<double>& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_matrix_csv(const std::string& path, const Matrix<double>& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << format_matrix_csv(m);
  if (!out) throw DataError("write to '" + path + "' failed");
}

}  // namespace covmiss
