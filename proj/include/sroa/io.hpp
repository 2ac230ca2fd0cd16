#ifndef SROA_IO_HPP_
#define SROA_IO_HPP_

// Text formats.
//   tensor: "p n" on the first line, then n^p whitespace-separated entries in
//           row-major lexicographic order. Input is symmetrized on read.
//   matrix: "d", then d^2 entries row-major.

#include "sroa/experiments.hpp"
#include "sroa/tensor.hpp"

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sroa {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

namespace detail {

struct Token {
  std::string text;
  int line = 0;
  int column = 0;
};

class Tokenizer {
 public:
  explicit Tokenizer(std::istream& in) : in_(in) {}

  bool next(Token& tok) {
    int c;
    while ((c = in_.get()) != EOF) {
      if (c == '\n') {
        ++line_;
        column_ = 1;
        continue;
      }
      if (std::isspace(c)) {
        ++column_;
        continue;
      }
      tok.line = line_;
      tok.column = column_;
      tok.text.clear();
      while (c != EOF && !std::isspace(c)) {
        tok.text.push_back(static_cast<char>(c));
        ++column_;
        c = in_.get();
      }
      if (c != EOF) in_.unget();
      return true;
    }
    return false;
  }

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::istream& in_;
  int line_ = 1;
  int column_ = 1;
};

inline double parse_real(const Token& tok) {
  double value = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ParseError("expected a number, got '" + tok.text + "'", tok.line, tok.column);
  if (!std::isfinite(value)) throw ParseError("entry is not finite", tok.line, tok.column);
  return value;
}

inline int parse_positive_int(const Token& tok, const char* what) {
  int value = 0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || value <= 0)
    throw ParseError(std::string("expected positive integer ") + what + ", got '" + tok.text + "'", tok.line, tok.column);
  return value;
}

inline std::vector<double> read_entries(Tokenizer& tz, std::size_t count) {
  std::vector<double> out;
  out.reserve(count);
  Token tok;
  while (out.size() < count) {
    if (!tz.next(tok))
      throw ParseError("expected " + std::to_string(count) + " entries, found " + std::to_string(out.size()),
                       tz.line(), tz.column());
    out.push_back(parse_real(tok));
  }
  if (tz.next(tok)) throw ParseError("unexpected trailing token '" + tok.text + "'", tok.line, tok.column);
  return out;
}

}  // namespace detail

struct TensorFile {
  SymmetricTensor tensor;
  double max_symmetrization_correction = 0.0;
};

inline TensorFile read_tensor(std::istream& in) {
  detail::Tokenizer tz(in);
  detail::Token tok;
  if (!tz.next(tok)) throw ParseError("missing header 'p n'", 1, 1);
  const int p = detail::parse_positive_int(tok, "order");
  if (p < 2) throw ParseError("order must be at least 2", tok.line, tok.column);
  if (!tz.next(tok)) throw ParseError("missing dimension in header", tz.line(), tz.column());
  const int n = detail::parse_positive_int(tok, "dimension");
  if (std::pow(static_cast<double>(n), p) > 1e8) throw ParseError("tensor too large", tok.line, tok.column);
  const auto entries = detail::read_entries(tz, detail::checked_pow(n, p));
  auto sym = symmetrize_with_report(entries, p, n);
  return {std::move(sym.tensor), sym.max_correction};
}

inline Matrix read_matrix(std::istream& in) {
  detail::Tokenizer tz(in);
  detail::Token tok;
  if (!tz.next(tok)) throw ParseError("missing header 'd'", 1, 1);
  const int d = detail::parse_positive_int(tok, "dimension");
  const auto entries = detail::read_entries(tz, static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = entries[static_cast<std::size_t>(i * d + j)];
  return 0.5 * (m + m.transpose());
}

inline void write_tensor(std::ostream& os, const SymmetricTensor& t) {
  os << t.order() << ' ' << t.dim() << '\n';
  const auto e = t.entries();
  const auto n = static_cast<std::size_t>(t.dim());
  for (std::size_t i = 0; i < e.size(); ++i) os << format_double(e[i]) << ((i + 1) % n == 0 ? '\n' : ' ');
}

inline void write_matrix(std::ostream& os, const Matrix& m) {
  os << m.rows() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << format_double(m(i, j)) << (j + 1 == m.cols() ? '\n' : ' ');
}

template <class Reader>
auto read_file(const std::filesystem::path& path, Reader&& reader) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return reader(in);
}

/// Write via a temporary sibling and rename, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot write " + path.string());
  }
}

}  // namespace sroa

#endif  // SROA_IO_HPP_
