#include "fhc/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fhc {

double SparseSymMatrix::at(int i, int j) const {
  auto b = col_idx.begin() + row_ptr[i];
  auto e = col_idx.begin() + row_ptr[i + 1];
  auto it = std::lower_bound(b, e, j);
  if (it == e || *it != j) return 0.0;
  return value[it - col_idx.begin()];
}

void SparseSymMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) acc += value[k] * x[col_idx[k]];
    y[i] = acc;
  }
}

std::vector<double> SparseSymMatrix::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i) d[i] = at(i, i);
  return d;
}

SparseSymMatrix SparseSymMatrix::scaled(double alpha) const {
  SparseSymMatrix r = *this;
  for (double& v : r.value) v *= alpha;
  return r;
}

SparseSymMatrix SparseSymMatrix::axpby(double a, const SparseSymMatrix& other, double b) const {
  if (n != other.n || row_ptr != other.row_ptr || col_idx != other.col_idx)
    throw std::invalid_argument("SparseSymMatrix::axpby: pattern mismatch");
  SparseSymMatrix r = *this;
  for (size_t k = 0; k < value.size(); ++k) r.value[k] = a * value[k] + b * other.value[k];
  return r;
}

void SparseSymMatrix::check_invariants() const {
  if ((int)row_ptr.size() != n + 1) throw std::logic_error("csr: row_ptr size");
  if (row_ptr[0] != 0 || row_ptr[n] != nnz()) throw std::logic_error("csr: row_ptr range");
  for (int i = 0; i < n; ++i) {
    bool diag = false;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      if (k > row_ptr[i] && col_idx[k] <= col_idx[k - 1])
        throw std::logic_error("csr: columns not strictly increasing");
      if (col_idx[k] < 0 || col_idx[k] >= n) throw std::logic_error("csr: column out of range");
      if (col_idx[k] == i) diag = true;
      if (!std::isfinite(value[k])) throw std::logic_error("csr: non-finite entry");
    }
    if (!diag) throw std::logic_error("csr: missing diagonal");
  }
  for (int i = 0; i < n; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      int j = col_idx[k];
      auto b = col_idx.begin() + row_ptr[j];
      auto e = col_idx.begin() + row_ptr[j + 1];
      if (!std::binary_search(b, e, i)) throw std::logic_error("csr: pattern not symmetric");
    }
}

void SparseBuilder::add(int i, int j, double v) {
  if (i < 0 || i >= n_ || j < 0 || j >= n_)
    throw std::out_of_range("SparseBuilder::add: index out of range");
  entries_[{i, j}] += v;
}

SparseSymMatrix merged_add(const SparseSymMatrix& A, double ca, const SparseSymMatrix& B,
                           double cb) {
  if (A.n != B.n) throw std::invalid_argument("merged_add: size mismatch");
  SparseSymMatrix C;
  C.n = A.n;
  C.row_ptr.assign(A.n + 1, 0);
  for (int i = 0; i < A.n; ++i) {
    int pa = A.row_ptr[i], ea = A.row_ptr[i + 1];
    int pb = B.row_ptr[i], eb = B.row_ptr[i + 1];
    while (pa < ea || pb < eb) {
      int ja = pa < ea ? A.col_idx[pa] : C.n;
      int jb = pb < eb ? B.col_idx[pb] : C.n;
      if (ja == jb) {
        C.col_idx.push_back(ja);
        C.value.push_back(ca * A.value[pa++] + cb * B.value[pb++]);
      } else if (ja < jb) {
        C.col_idx.push_back(ja);
        C.value.push_back(ca * A.value[pa++]);
      } else {
        C.col_idx.push_back(jb);
        C.value.push_back(cb * B.value[pb++]);
      }
    }
    C.row_ptr[i + 1] = (int)C.col_idx.size();
  }
  C.check_invariants();
  return C;
}

SparseSymMatrix SparseBuilder::finalize() const {
  // Symmetrize the pattern and force diagonals before laying out CSR.
  std::map<std::pair<int, int>, double> full = entries_;
  for (const auto& [ij, v] : entries_) {
    (void)v;
    full.emplace(std::make_pair(ij.second, ij.first), 0.0);
  }
  for (int i = 0; i < n_; ++i) full.emplace(std::make_pair(i, i), 0.0);

  SparseSymMatrix A;
  A.n = n_;
  A.row_ptr.assign(n_ + 1, 0);
  A.col_idx.reserve(full.size());
  A.value.reserve(full.size());
  for (const auto& [ij, v] : full) {
    A.row_ptr[ij.first + 1]++;
    A.col_idx.push_back(ij.second);
    A.value.push_back(v);
  }
  for (int i = 0; i < n_; ++i) A.row_ptr[i + 1] += A.row_ptr[i];
  A.check_invariants();
  return A;
}

}  // namespace fhc
