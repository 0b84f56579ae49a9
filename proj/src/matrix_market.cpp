#include "ftk/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace ftk {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

CsrMatrix read_matrix_market(std::istream& in) {
  std::string line;
  long lineno = 0;

  if (!std::getline(in, line))
    throw MatrixMarketError("empty stream", 1);
  ++lineno;

  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (lower(banner) != "%%matrixmarket" || lower(object) != "matrix")
    throw MatrixMarketError("not a Matrix Market matrix header", lineno);
  if (lower(format) != "coordinate")
    throw MatrixMarketError("unsupported format '" + format +
                                "' (coordinate required)",
                            lineno);
  if (lower(field) != "real")
    throw MatrixMarketError("unsupported field '" + field + "' (real required)",
                            lineno);
  const std::string sym = lower(symmetry);
  if (sym != "general" && sym != "symmetric")
    throw MatrixMarketError("unsupported symmetry '" + symmetry + "'", lineno);

  // Size line, skipping comments and blank lines.
  index_t nrows = 0, ncols = 0, nstored = 0;
  for (;;) {
    if (!std::getline(in, line))
      throw MatrixMarketError("missing size line", lineno);
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream sizes(line);
    if (!(sizes >> nrows >> ncols >> nstored))
      throw MatrixMarketError("malformed size line", lineno);
    if (nrows <= 0 || ncols <= 0 || nstored < 0)
      throw MatrixMarketError("invalid matrix dimensions", lineno);
    break;
  }

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(sym == "symmetric" ? 2 * nstored
                                                               : nstored));
  index_t seen = 0;
  while (seen < nstored) {
    if (!std::getline(in, line))
      throw MatrixMarketError("unexpected end of stream: expected " +
                                  std::to_string(nstored) + " entries, got " +
                                  std::to_string(seen),
                              lineno);
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream entry(line);
    index_t r, c;
    double v;
    if (!(entry >> r >> c >> v))
      throw MatrixMarketError("malformed coordinate entry", lineno);
    if (r < 1 || r > nrows || c < 1 || c > ncols)
      throw MatrixMarketError("coordinate out of range", lineno);
    triplets.emplace_back(r - 1, c - 1, v);
    if (sym == "symmetric" && r != c) triplets.emplace_back(c - 1, r - 1, v);
    ++seen;
  }
  return csr_from_triplets(nrows, ncols, std::move(triplets));
}

CsrMatrix read_matrix_market_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MatrixMarketError("cannot open '" + path + "'", 0);
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const CsrMatrix& A) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.nrows << " " << A.ncols << " " << A.nnz() << "\n";
  char buf[96];
  for (index_t i = 0; i < A.nrows; ++i) {
    for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g",
                    static_cast<long long>(i + 1),
                    static_cast<long long>(A.col_idx[k] + 1), A.values[k]);
      out << buf << "\n";
    }
  }
}

}  // namespace ftk
