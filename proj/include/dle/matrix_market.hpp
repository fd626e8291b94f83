#pragma once

// Matrix Market I/O: "coordinate real {general,symmetric}" for sparse
// matrices and "array real general" for dense blocks.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "dle/dense.hpp"
#include "dle/errors.hpp"
#include "dle/sparse.hpp"

namespace dle {

/// Write `contents` to a sibling temp file, then rename over `path`.
inline void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Shortest round-trip-safe text for a double (17 significant digits).
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

struct MmHeader {
  bool coordinate = true;
  bool symmetric = false;
};

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline MmHeader parse_header(const std::string& line) {
  std::istringstream in(line);
  std::string banner, object, format, field, symmetry;
  in >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", 1);
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw ParseError("unsupported object '" + object + "'", 1);
  MmHeader h;
  if (format == "coordinate") {
    h.coordinate = true;
  } else if (format == "array") {
    h.coordinate = false;
  } else {
    throw ParseError("unsupported format '" + format + "'", 1);
  }
  if (field != "real" && field != "integer" && field != "double") {
    throw ParseError("unsupported field '" + field + "'", 1);
  }
  if (symmetry == "general") {
    h.symmetric = false;
  } else if (symmetry == "symmetric") {
    h.symmetric = true;
  } else {
    throw ParseError("unsupported symmetry '" + symmetry + "'", 1);
  }
  return h;
}

struct MmContents {
  MmHeader header;
  Index rows = 0;
  Index cols = 0;
  // coordinate: (row, col, value, line); array: values column-major
  std::vector<std::tuple<Index, Index, double, std::size_t>> entries;
  std::vector<double> values;
};

inline MmContents read_contents(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  MmContents out;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  ++lineno;
  out.header = parse_header(line);

  auto next_data_line = [&](std::string& l) {
    while (std::getline(in, l)) {
      ++lineno;
      const auto first = l.find_first_not_of(" \t\r");
      if (first == std::string::npos || l[first] == '%') continue;
      return true;
    }
    return false;
  };

  if (!next_data_line(line)) throw ParseError("missing size line", lineno + 1);
  std::istringstream size_in(line);
  long long rows = 0, cols = 0, nnz = 0;
  if (out.header.coordinate) {
    if (!(size_in >> rows >> cols >> nnz)) {
      throw ParseError("size line needs 'rows cols nnz'", lineno);
    }
  } else if (!(size_in >> rows >> cols)) {
    throw ParseError("size line needs 'rows cols'", lineno);
  }
  std::string extra;
  if (size_in >> extra) throw ParseError("unexpected field count on size line", lineno);
  // array files may have zero columns (a rank-0 factor)
  if (rows < 1 || cols < (out.header.coordinate ? 1 : 0) || nnz < 0) {
    throw ParseError("invalid dimensions", lineno);
  }
  if (out.header.symmetric && rows != cols) {
    throw ParseError("symmetric matrix must be square", lineno);
  }
  out.rows = rows;
  out.cols = cols;

  if (out.header.coordinate) {
    out.entries.reserve(static_cast<std::size_t>(nnz));
    for (long long e = 0; e < nnz; ++e) {
      if (!next_data_line(line)) {
        throw ParseError("expected " + std::to_string(nnz) + " entries, found " +
                             std::to_string(e),
                         lineno + 1);
      }
      std::istringstream ein(line);
      long long r = 0, c = 0;
      double v = 0.0;
      if (!(ein >> r >> c >> v)) throw ParseError("entry needs 'row col value'", lineno);
      if (ein >> extra) throw ParseError("unexpected field count in entry", lineno);
      if (r < 1 || r > rows || c < 1 || c > cols) {
        throw ParseError("index out of range", lineno);
      }
      out.entries.emplace_back(r - 1, c - 1, v, lineno);
    }
  } else {
    const long long count = out.header.symmetric ? rows * (rows + 1) / 2 : rows * cols;
    out.values.reserve(static_cast<std::size_t>(count));
    for (long long e = 0; e < count; ++e) {
      if (!next_data_line(line)) {
        throw ParseError("expected " + std::to_string(count) + " values, found " +
                             std::to_string(e),
                         lineno + 1);
      }
      std::istringstream ein(line);
      double v = 0.0;
      if (!(ein >> v)) throw ParseError("expected a value", lineno);
      if (ein >> extra) throw ParseError("unexpected field count in value line", lineno);
      out.values.push_back(v);
    }
  }
  if (next_data_line(line)) throw ParseError("trailing data after last entry", lineno);
  return out;
}

}  // namespace detail

inline Matrix read_matrix_market_dense(const std::filesystem::path& path);

/// Coordinate file to sparse matrix; symmetric files are mirrored into full
/// storage. Duplicate entries are rejected. Array files are sparsified.
inline SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  auto mm = detail::read_contents(path);
  if (!mm.header.coordinate) return read_matrix_market_dense(path).sparseView(0.0, 0.0);
  auto& entries = mm.entries;
  if (mm.header.symmetric) {
    const std::size_t stored = entries.size();
    for (std::size_t i = 0; i < stored; ++i) {
      const auto [r, c, v, line] = entries[i];
      if (r != c) entries.emplace_back(c, r, v, line);
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  std::vector<Triplet> triplets;
  triplets.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [r, c, v, line] = entries[i];
    if (i > 0 && std::get<0>(entries[i - 1]) == r && std::get<1>(entries[i - 1]) == c) {
      throw ParseError("duplicate entry (" + std::to_string(r + 1) + ", " +
                           std::to_string(c + 1) + ")",
                       std::max(line, std::get<3>(entries[i - 1])));
    }
    triplets.emplace_back(r, c, v);
  }
  SparseMatrix a(mm.rows, mm.cols);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

/// Dense block from an array file (or a coordinate file, densified).
inline Matrix read_matrix_market_dense(const std::filesystem::path& path) {
  auto mm = detail::read_contents(path);
  if (mm.header.coordinate) return Matrix(read_matrix_market(path));
  Matrix m(mm.rows, mm.cols);
  if (mm.header.symmetric) {
    std::size_t k = 0;
    for (Index j = 0; j < mm.cols; ++j) {
      for (Index i = j; i < mm.rows; ++i) m(i, j) = m(j, i) = mm.values[k++];
    }
  } else {
    std::size_t k = 0;
    for (Index j = 0; j < mm.cols; ++j) {
      for (Index i = 0; i < mm.rows; ++i) m(i, j) = mm.values[k++];
    }
  }
  return m;
}

inline std::string matrix_market_string(const SparseMatrix& a) {
  std::ostringstream out;
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  for (Index r = 0; r < a.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << format_double(it.value()) << '\n';
    }
  }
  return out.str();
}

inline std::string matrix_market_string(const Matrix& m) {
  std::ostringstream out;
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) out << format_double(m(i, j)) << '\n';
  }
  return out.str();
}

inline void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path) {
  atomic_write(path, matrix_market_string(a));
}

inline void write_matrix_market(const Matrix& m, const std::filesystem::path& path) {
  atomic_write(path, matrix_market_string(m));
}

}  // namespace dle
