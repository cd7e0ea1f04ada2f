#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "innerprec/errors.hpp"
#include "innerprec/sparse_matrix.hpp"
#include "innerprec/vector_ops.hpp"

namespace innerprec::mm {

enum class Format { Coordinate, Array };
enum class Field { Real, Integer, Pattern };
enum class Symmetry { General, Symmetric };

struct Header {
  Format format = Format::Coordinate;
  Field field = Field::Real;
  Symmetry symmetry = Symmetry::General;
};

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

inline bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

/// Next line that is neither a `%` comment nor blank. Returns false at EOF.
inline bool next_data_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    if (line.front() == '%') continue;
    return true;
  }
  return false;
}

inline double parse_real(const std::string& tok, std::size_t lineno) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(lineno) + ": non-numeric value token '" + tok + "'");
  }
  return v;
}

inline std::size_t parse_index(const std::string& tok, std::size_t lineno) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("line " + std::to_string(lineno) + ": bad integer token '" + tok + "'");
  }
  return v;
}

} // namespace detail

inline Header parse_banner(const std::string& line) {
  const auto t = detail::tokens(line);
  if (t.size() != 5 || t[0] != "%%MatrixMarket") {
    throw ParseError("malformed banner: expected '%%MatrixMarket matrix <format> <field> <symmetry>'");
  }
  if (detail::lower(t[1]) != "matrix") throw ParseError("malformed banner: object must be 'matrix'");
  Header h;
  const auto fmt = detail::lower(t[2]);
  if (fmt == "coordinate") h.format = Format::Coordinate;
  else if (fmt == "array") h.format = Format::Array;
  else throw ParseError("malformed banner: unsupported format '" + t[2] + "'");
  const auto field = detail::lower(t[3]);
  if (field == "real") h.field = Field::Real;
  else if (field == "integer") h.field = Field::Integer;
  else if (field == "pattern") h.field = Field::Pattern;
  else throw ParseError("malformed banner: unsupported field '" + t[3] + "'");
  const auto sym = detail::lower(t[4]);
  if (sym == "general") h.symmetry = Symmetry::General;
  else if (sym == "symmetric") h.symmetry = Symmetry::Symmetric;
  else throw ParseError("malformed banner: unsupported symmetry '" + t[4] + "'");
  if (h.format == Format::Array && h.field == Field::Pattern) {
    throw ParseError("malformed banner: array format cannot have pattern field");
  }
  return h;
}

/// Reads a Matrix Market stream. Symmetric storage is expanded to both
/// triangles, pattern entries become 1.0, duplicates are summed.
inline SparseMatrix read(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty input: missing banner");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const Header h = parse_banner(line);

  if (!detail::next_data_line(in, line, lineno)) throw ParseError("missing size line");
  const auto size = detail::tokens(line);
  const std::size_t want = h.format == Format::Coordinate ? 3 : 2;
  if (size.size() != want) {
    throw ParseError("line " + std::to_string(lineno) + ": size line must have " +
                     std::to_string(want) + " fields");
  }
  const std::size_t m = detail::parse_index(size[0], lineno);
  const std::size_t n = detail::parse_index(size[1], lineno);
  if (h.symmetry == Symmetry::Symmetric && m != n) {
    throw ParseError("symmetric matrix must be square");
  }

  std::vector<Triplet> entries;
  auto push = [&](std::size_t i, std::size_t j, double v) {
    entries.push_back({i, j, v});
    if (h.symmetry == Symmetry::Symmetric && i != j) entries.push_back({j, i, v});
  };

  if (h.format == Format::Coordinate) {
    const std::size_t nnz = detail::parse_index(size[2], lineno);
    entries.reserve(h.symmetry == Symmetry::Symmetric ? 2 * nnz : nnz);
    const std::size_t fields = h.field == Field::Pattern ? 2 : 3;
    for (std::size_t k = 0; k < nnz; ++k) {
      if (!detail::next_data_line(in, line, lineno)) {
        throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(k));
      }
      const auto t = detail::tokens(line);
      if (t.size() != fields) {
        throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(fields) +
                         " fields");
      }
      const std::size_t i = detail::parse_index(t[0], lineno);
      const std::size_t j = detail::parse_index(t[1], lineno);
      if (i < 1 || i > m || j < 1 || j > n) {
        throw ParseError("line " + std::to_string(lineno) + ": index (" + t[0] + ", " + t[1] +
                         ") out of declared bounds " + std::to_string(m) + "x" + std::to_string(n));
      }
      if (h.symmetry == Symmetry::Symmetric && j > i) {
        throw ParseError("line " + std::to_string(lineno) +
                         ": symmetric storage must list the lower triangle only");
      }
      const double v = h.field == Field::Pattern ? 1.0 : detail::parse_real(t[2], lineno);
      push(i - 1, j - 1, v);
    }
  } else {
    // Column-major; symmetric arrays list the lower triangle only.
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = (h.symmetry == Symmetry::Symmetric ? j : 0); i < m; ++i) {
        if (!detail::next_data_line(in, line, lineno)) throw ParseError("array data ended early");
        const auto t = detail::tokens(line);
        if (t.size() != 1) throw ParseError("line " + std::to_string(lineno) + ": expected one value");
        const double v = detail::parse_real(t[0], lineno);
        if (v != 0.0) push(i, j, v);
      }
    }
  }
  if (detail::next_data_line(in, line, lineno)) {
    throw ParseError("line " + std::to_string(lineno) + ": unexpected trailing data");
  }
  return SparseMatrix::from_triplets(m, n, std::move(entries));
}

inline SparseMatrix read_string(const std::string& text) {
  std::istringstream in(text);
  return read(in);
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Coordinate real output with 17 significant digits. With `symmetric` set
/// only the lower triangle is written.
inline std::string write(const SparseMatrix& a, bool symmetric) {
  if (symmetric) {
    if (!a.is_square()) throw NotSymmetricError("mm write: symmetric flag on a non-square matrix");
    if (a.asymmetry() > 1e-12) throw NotSymmetricError("mm write: symmetric flag on an asymmetric matrix");
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j : a.row_cols(i)) {
      if (!symmetric || j <= i) ++count;
    }
  }
  std::ostringstream out;
  out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
  out << a.rows() << ' ' << a.cols() << ' ' << count << '\n';
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (symmetric && cols[k] > i) continue;
      out << (i + 1) << ' ' << (cols[k] + 1) << ' ' << format_real(vals[k]) << '\n';
    }
  }
  return out.str();
}

/// Reads a right-hand side: a Matrix Market array/coordinate with one column
/// when the stream starts with a banner, otherwise one value per line.
inline Vector read_vector(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string first;
  std::istringstream body(text);
  std::getline(body, first);
  if (first.rfind("%%MatrixMarket", 0) == 0) {
    const SparseMatrix v = read_string(text);
    if (v.cols() != 1) throw ParseError("vector file must have exactly one column");
    Vector out(v.rows(), 0.0);
    for (std::size_t i = 0; i < v.rows(); ++i) out[i] = v.at(i, 0);
    return out;
  }
  Vector out;
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (detail::next_data_line(lines, line, lineno)) {
    for (const auto& tok : detail::tokens(line)) out.push_back(detail::parse_real(tok, lineno));
  }
  return out;
}

inline std::string write_vector(std::span<const double> v) {
  std::ostringstream out;
  out << "%%MatrixMarket matrix array real general\n" << v.size() << " 1\n";
  for (double x : v) out << format_real(x) << '\n';
  return out.str();
}

} // namespace innerprec::mm
