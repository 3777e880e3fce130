#include "gcheb/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "gcheb/errors.hpp"

namespace gcheb::mm {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && tok.front() == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw UnreadableMatrix("bad numeric token '" + tok + "'");
  }
  return v;
}

std::size_t parse_index(const std::string& tok) {
  std::size_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw UnreadableMatrix("bad index token '" + tok + "'");
  }
  return v;
}

struct Header {
  std::string format;    // coordinate | array
  std::string field;     // complex | real | integer
  std::string symmetry;  // general | symmetric | hermitian | skew-symmetric
};

Header read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw UnreadableMatrix("empty Matrix Market stream");
  std::istringstream ss(line);
  std::string banner, object;
  Header h;
  ss >> banner >> object >> h.format >> h.field >> h.symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") {
    throw UnreadableMatrix("missing %%MatrixMarket matrix banner");
  }
  h.format = lower(h.format);
  h.field = lower(h.field);
  h.symmetry = lower(h.symmetry);
  if (h.field != "complex" && h.field != "real" && h.field != "integer") {
    throw UnreadableMatrix("unsupported field '" + h.field + "'");
  }
  if (h.symmetry != "general" && h.symmetry != "symmetric" && h.symmetry != "hermitian" &&
      h.symmetry != "skew-symmetric") {
    throw UnreadableMatrix("unsupported symmetry '" + h.symmetry + "'");
  }
  return h;
}

// Next non-comment, non-blank line split on whitespace.
bool next_tokens(std::istream& in, std::vector<std::string>& tokens) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    tokens.clear();
    for (std::string t; ss >> t;) tokens.push_back(t);
    if (!tokens.empty()) return true;
  }
  return false;
}

cplx parse_value(const std::vector<std::string>& tok, std::size_t at, const Header& h) {
  const std::size_t need = at + (h.field == "complex" ? 2 : 1);
  if (tok.size() < need) throw UnreadableMatrix("entry line has too few fields");
  const double re = parse_double(tok[at]);
  const double im = h.field == "complex" ? parse_double(tok[at + 1]) : 0.0;
  return {re, im};
}

}  // namespace

SparseMatrix read(std::istream& in) {
  const Header h = read_header(in);
  if (h.format != "coordinate") throw UnreadableMatrix("matrix must be in coordinate format");
  std::vector<std::string> tok;
  if (!next_tokens(in, tok) || tok.size() < 3) throw UnreadableMatrix("missing size line");
  const std::size_t rows = parse_index(tok[0]);
  const std::size_t cols = parse_index(tok[1]);
  const std::size_t nnz = parse_index(tok[2]);
  if (h.symmetry != "general" && rows != cols) {
    throw UnreadableMatrix("symmetric storage needs a square matrix");
  }
  std::vector<Triplet> entries;
  entries.reserve(h.symmetry == "general" ? nnz : 2 * nnz);
  for (std::size_t e = 0; e < nnz; ++e) {
    if (!next_tokens(in, tok)) throw UnreadableMatrix("file ends before all entries were read");
    const std::size_t i = parse_index(tok[0]);
    const std::size_t j = tok.size() > 1 ? parse_index(tok[1]) : 0;
    if (i < 1 || j < 1 || i > rows || j > cols) {
      throw UnreadableMatrix("entry index out of range at entry " + std::to_string(e + 1));
    }
    const cplx v = parse_value(tok, 2, h);
    entries.push_back({i - 1, j - 1, v});
    if (i != j) {
      if (h.symmetry == "symmetric") entries.push_back({j - 1, i - 1, v});
      if (h.symmetry == "hermitian") entries.push_back({j - 1, i - 1, std::conj(v)});
      if (h.symmetry == "skew-symmetric") entries.push_back({j - 1, i - 1, -v});
    }
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(entries));
}

SparseMatrix read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableMatrix("cannot open " + path.string());
  try {
    return read(in);
  } catch (const UnreadableMatrix& e) {
    throw UnreadableMatrix(path.string() + ": " + e.what());
  }
}

void write(std::ostream& out, const SparseMatrix& a, const std::string& comment) {
  out << "%%MatrixMarket matrix coordinate complex general\n";
  if (!comment.empty()) {
    std::istringstream lines(comment);
    for (std::string l; std::getline(lines, l);) out << "% " << l << '\n';
  }
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p) {
      const cplx v = a.values()[p];
      out << i + 1 << ' ' << a.col_indices()[p] + 1 << ' ' << format_double(v.real()) << ' '
          << format_double(v.imag()) << '\n';
    }
  }
}

void write(const std::filesystem::path& path, const SparseMatrix& a, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write(out, a, comment);
  if (!out) throw IoError("write failed for " + path.string());
}

void write_vector(const std::filesystem::path& path, const ComplexVector& v) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "%%MatrixMarket matrix array complex general\n" << v.size() << " 1\n";
  for (const auto& z : v) out << format_double(z.real()) << ' ' << format_double(z.imag()) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

ComplexVector read_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableMatrix("cannot open " + path.string());
  const Header h = read_header(in);
  if (h.format != "array") throw UnreadableMatrix(path.string() + ": vector must be an array");
  std::vector<std::string> tok;
  if (!next_tokens(in, tok) || tok.size() < 2) throw UnreadableMatrix("missing size line");
  const std::size_t rows = parse_index(tok[0]);
  if (parse_index(tok[1]) != 1) throw UnreadableMatrix("vector file must have one column");
  std::vector<cplx> vals;
  vals.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!next_tokens(in, tok)) throw UnreadableMatrix("vector file truncated");
    vals.push_back(parse_value(tok, 0, h));
  }
  return ComplexVector(std::move(vals));
}

void write_metadata(const std::filesystem::path& path,
                    const std::map<std::string, std::string>& entries) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::map<std::string, std::string> read_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, std::string> out;
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

}  // namespace gcheb::mm
