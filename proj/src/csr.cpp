#include "cosserat/csr.hpp"
#include <functional>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace cosserat {

Csr csr_from_triplets(int rows, int cols, std::span<const Triplet> triplets,
                      double drop_tol) {
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw std::invalid_argument("csr_from_triplets: index out of range");
  }

  // Counting sort by row keeps the original order within each row.
  std::vector<int> count(static_cast<size_t>(rows) + 1, 0);
  for (const Triplet& t : triplets) ++count[static_cast<size_t>(t.row) + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<int> order(triplets.size());
  {
    std::vector<int> next(count.begin(), count.end() - 1);
    for (int k = 0; k < static_cast<int>(triplets.size()); ++k)
      order[static_cast<size_t>(next[triplets[static_cast<size_t>(k)].row]++)] = k;
  }

  Csr a;
  a.rows = rows;
  a.cols = cols;
  a.row_ptr.assign(static_cast<size_t>(rows) + 1, 0);
  a.col_idx.reserve(triplets.size());
  a.val.reserve(triplets.size());

  std::vector<int> perm;
  for (int r = 0; r < rows; ++r) {
    const int lo = count[static_cast<size_t>(r)];
    const int hi = count[static_cast<size_t>(r) + 1];
    perm.assign(order.begin() + lo, order.begin() + hi);
    std::stable_sort(perm.begin(), perm.end(), [&](int i, int j) {
      return triplets[static_cast<size_t>(i)].col < triplets[static_cast<size_t>(j)].col;
    });
    size_t k = 0;
    while (k < perm.size()) {
      const int c = triplets[static_cast<size_t>(perm[k])].col;
      double sum = 0.0;
      while (k < perm.size() && triplets[static_cast<size_t>(perm[k])].col == c) {
        sum += triplets[static_cast<size_t>(perm[k])].value;
        ++k;
      }
      if (drop_tol < 0.0 || std::abs(sum) > drop_tol) {
        a.col_idx.push_back(c);
        a.val.push_back(sum);
      }
    }
    a.row_ptr[static_cast<size_t>(r) + 1] = static_cast<int>(a.col_idx.size());
  }
  return a;
}

Csr csr_transpose(const Csr& a) {
  Csr t;
  t.rows = a.cols;
  t.cols = a.rows;
  t.row_ptr.assign(static_cast<size_t>(a.cols) + 1, 0);
  for (int idx : a.col_idx) ++t.row_ptr[static_cast<size_t>(idx) + 1];
  std::partial_sum(t.row_ptr.begin(), t.row_ptr.end(), t.row_ptr.begin());
  t.col_idx.resize(a.col_idx.size());
  t.val.resize(a.val.size());
  std::vector<int> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int r = 0; r < a.rows; ++r) {
    for (int k = a.row_ptr[static_cast<size_t>(r)]; k < a.row_ptr[static_cast<size_t>(r) + 1]; ++k) {
      const int c = a.col_idx[static_cast<size_t>(k)];
      const int dst = next[static_cast<size_t>(c)]++;
      t.col_idx[static_cast<size_t>(dst)] = r;
      t.val[static_cast<size_t>(dst)] = a.val[static_cast<size_t>(k)];
    }
  }
  return t;
}

std::vector<double> csr_diagonal(const Csr& a) {
  std::vector<double> d(static_cast<size_t>(a.rows), 0.0);
  for (int r = 0; r < a.rows; ++r) {
    for (int k = a.row_ptr[static_cast<size_t>(r)]; k < a.row_ptr[static_cast<size_t>(r) + 1]; ++k)
      if (a.col_idx[static_cast<size_t>(k)] == r) d[static_cast<size_t>(r)] = a.val[static_cast<size_t>(k)];
  }
  return d;
}

void spmv_serial(const Csr& a, const double* x, double* y) {
  for (int r = 0; r < a.rows; ++r) {
    double sum = 0.0;
    for (int k = a.row_ptr[static_cast<size_t>(r)]; k < a.row_ptr[static_cast<size_t>(r) + 1]; ++k)
      sum += a.val[static_cast<size_t>(k)] * x[a.col_idx[static_cast<size_t>(k)]];
    y[r] = sum;
  }
}

void spmv(const Csr& a, const double* x, double* y) {
  // Each row is one fixed-order sum owned by a single thread, so the result
  // does not depend on the thread count.
#pragma omp parallel for schedule(static)
  for (int r = 0; r < a.rows; ++r) {
    double sum = 0.0;
    for (int k = a.row_ptr[static_cast<size_t>(r)]; k < a.row_ptr[static_cast<size_t>(r) + 1]; ++k)
      sum += a.val[static_cast<size_t>(k)] * x[a.col_idx[static_cast<size_t>(k)]];
    y[r] = sum;
  }
}

void spmv(const Csr& a, const std::vector<double>& x, std::vector<double>& y) {
  y.resize(static_cast<size_t>(a.rows));
  spmv(a, x.data(), y.data());
}

double max_abs(const Csr& a) {
  double m = 0.0;
  for (double v : a.val) m = std::max(m, std::abs(v));
  return m;
}

std::vector<int> sparse_connected_components(const Csr& a) {
  if (a.rows != a.cols) throw std::invalid_argument("sparse_connected_components: matrix not square");
  std::vector<int> parent(static_cast<size_t>(a.rows));
  for (int i = 0; i < a.rows; ++i) parent[static_cast<size_t>(i)] = i;
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  for (int r = 0; r < a.rows; ++r)
    for (int k = a.row_ptr[static_cast<size_t>(r)]; k < a.row_ptr[static_cast<size_t>(r) + 1]; ++k) {
      const int ra = find(r);
      const int rb = find(a.col_idx[static_cast<size_t>(k)]);
      if (ra != rb) parent[static_cast<size_t>(std::max(ra, rb))] = std::min(ra, rb);
    }
  std::vector<int> label(static_cast<size_t>(a.rows), -1);
  int next = 0;
  for (int i = 0; i < a.rows; ++i) {
    const int root = find(i);
    if (label[static_cast<size_t>(root)] < 0) label[static_cast<size_t>(root)] = next++;
    label[static_cast<size_t>(i)] = label[static_cast<size_t>(root)];
  }
  return label;
}

double max_asymmetry(const Csr& a) {
  if (a.rows != a.cols) throw std::invalid_argument("max_asymmetry: matrix not square");
  const Csr t = csr_transpose(a);
  double m = 0.0;
  for (int r = 0; r < a.rows; ++r) {
    int ka = a.row_ptr[static_cast<size_t>(r)];
    int kt = t.row_ptr[static_cast<size_t>(r)];
    const int ea = a.row_ptr[static_cast<size_t>(r) + 1];
    const int et = t.row_ptr[static_cast<size_t>(r) + 1];
    while (ka < ea || kt < et) {
      const int ca = ka < ea ? a.col_idx[static_cast<size_t>(ka)] : a.cols;
      const int ct = kt < et ? t.col_idx[static_cast<size_t>(kt)] : t.cols;
      if (ca == ct) {
        m = std::max(m, std::abs(a.val[static_cast<size_t>(ka)] - t.val[static_cast<size_t>(kt)]));
        ++ka;
        ++kt;
      } else if (ca < ct) {
        m = std::max(m, std::abs(a.val[static_cast<size_t>(ka)]));
        ++ka;
      } else {
        m = std::max(m, std::abs(t.val[static_cast<size_t>(kt)]));
        ++kt;
      }
    }
  }
  return m;
}

}  // namespace cosserat
