#pragma once

#include <string>
#include <vector>

#include <covmiss/masked_matrix.hpp>

namespace covmiss {

struct NamedMaskedData {
  MaskedMatrix<double> data;       // p variables x n samples (file transposed)
  std::vector<std::string> names;  // header row when present, else empty
};

// Data CSV: rows are samples, columns are variables. Empty cells and NA in
// any case are missing. A first row containing any token that is neither
// numeric nor missing is treated as a header.
NamedMaskedData read_masked_csv(const std::string& path);

// Strict numeric matrix in file orientation: no header, no missing cells.
Matrix<double> read_matrix_csv(const std::string& path);

// One row per line, cells joined by commas, printed with %.17g so a write
// followed by a read reproduces every entry bit for bit.
std::string format_matrix_csv(const Matrix<double>& m);
void write_matrix_csv(const std::string& path, const Matrix<double>& m);

std::string format_double(double v);  // %.17g

}  // namespace covmiss
