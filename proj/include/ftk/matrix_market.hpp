#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "ftk/csr.hpp"

namespace ftk {

/// Parse failure in a Matrix Market stream; `line` is the 1-based line
/// number the error was detected on (0 when unknown).
class MatrixMarketError : public std::runtime_error {
 public:
  MatrixMarketError(const std::string& what, long line)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")"
                                    : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Reads a Matrix Market coordinate-format stream, real-valued, general or
/// symmetric. Indices are converted to 0-based, duplicate entries summed,
/// symmetric storage expanded to general.
CsrMatrix read_matrix_market(std::istream& in);
CsrMatrix read_matrix_market_file(const std::string& path);

/// Writes coordinate real general format with 1-based indices. Values are
/// printed with enough digits to round-trip exactly.
void write_matrix_market(std::ostream& out, const CsrMatrix& A);

}  // namespace ftk
