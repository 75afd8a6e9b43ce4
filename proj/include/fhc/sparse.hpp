#pragma once

#include <map>
#include <utility>
#include <vector>

namespace fhc {

// Compressed sparse rows holding the full symmetric pattern. Column indices
// strictly increase within a row and every diagonal entry is stored, even
// when numerically zero.
struct SparseSymMatrix {
  int n = 0;
  std::vector<int> row_ptr;   // size n+1
  std::vector<int> col_idx;
  std::vector<double> value;
  bool symmetric = true;

  int nnz() const { return (int)col_idx.size(); }

  // Entry lookup by binary search; zero when outside the pattern.
  double at(int i, int j) const;

  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  std::vector<double> diagonal() const;

  // y = value-scaled copy: this stays, result = alpha*A applied on construction.
  SparseSymMatrix scaled(double alpha) const;

  // Same-pattern sum a*this + b*other; patterns must match exactly.
  SparseSymMatrix axpby(double a, const SparseSymMatrix& other, double b) const;

  void check_invariants() const;
};

// ca*A + cb*B on the union pattern (row-wise two-pointer merge).
SparseSymMatrix merged_add(const SparseSymMatrix& A, double ca, const SparseSymMatrix& B,
                           double cb);

// Incremental builder keyed on (row, col); symmetrizes the pattern and
// inserts missing diagonals on finalize.
class SparseBuilder {
 public:
  explicit SparseBuilder(int n) : n_(n) {}
  void add(int i, int j, double v);
  SparseSymMatrix finalize() const;

 private:
  int n_;
  std::map<std::pair<int, int>, double> entries_;
};

}  // namespace fhc
