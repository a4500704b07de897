// Compares the parallel kernels against their serial references on an
// assembled system, and reports block statistics of the lumped matrix.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "cosserat/solve.hpp"
#include "cosserat/study.hpp"
#ifdef _OPENMP
#include <omp.h>
#endif

using namespace cosserat;

namespace {

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

template <class F>
double time_best(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now();
    f();
    best = std::min(best, now() - t0);
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 48;
#ifdef _OPENMP
  std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("openmp disabled (serial build)\n");
#endif

  Mesh mesh = build_structured_square(n);
  SchemeSpaces spaces = build_spaces(mesh, Scheme::Bdm1P0);
  ManufacturedCase mc;
  mc.dim = 2;
  mc.ell = LengthScale::make_constant(1.0);
  SaddleSystem ms = build_msmfe_system(spaces, Scheme::Bdm1P0, mc);
  BlockDiagFactor factor(ms.A);

  std::printf("mesh n=%d: %d cells, stress dofs %d, schur dim %d\n", n, mesh.num_cells(),
              ms.layout.nx(), ms.layout.ny());
  std::printf("lumped blocks: %d, max size %d\n", factor.num_blocks(), factor.max_block_size());

  const int nx = ms.layout.nx();
  std::vector<double> x(static_cast<size_t>(nx), 1.0), y(static_cast<size_t>(nx));
  const double ts = time_best(5, [&] { spmv_serial(ms.A, x.data(), y.data()); });
  const double tp = time_best(5, [&] { spmv(ms.A, x.data(), y.data()); });
  std::printf("spmv (nnz %d):        serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n",
              ms.A.nnz(), 1e3 * ts, 1e3 * tp, ts / tp);

  const double bs = time_best(5, [&] { factor.apply(x.data(), y.data()); });
  std::printf("block solve:          parallel %8.3f ms\n", 1e3 * bs);

  const int m = 700;
  DenseMatrix dm(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) {
      dm(i, j) = dm(j, i) = 1.0 / (1.0 + std::abs(i - j));
    }
  for (int i = 0; i < m; ++i) dm(i, i) += m;
  DenseMatrix c1, c2;
  const double cs = time_best(3, [&] {
    c1 = dm;
    cholesky_inplace_serial(c1);
  });
  const double cp = time_best(3, [&] {
    c2 = dm;
    cholesky_inplace(c2);
  });
  std::printf("cholesky %dx%d:      serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n", m, m,
              1e3 * cs, 1e3 * cp, cs / cp);

  DenseMatrix z(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) z(i, j) = std::sin(0.01 * i * j);
  DenseMatrix g1, g2;
  const double gs = time_best(3, [&] { gram_matrix_serial(z, g1); });
  const double gp = time_best(3, [&] { gram_matrix(z, g2); });
  std::printf("gram %dx%d:          serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n", m, m,
              1e3 * gs, 1e3 * gp, gs / gp);

  // Equality of serial and parallel results, bitwise.
  bool same = c1.a == c2.a && g1.a == g2.a;
  std::vector<double> y2(static_cast<size_t>(nx));
  spmv_serial(ms.A, x.data(), y2.data());
  spmv(ms.A, x.data(), y.data());
  same = same && y == y2;
  std::printf("serial == parallel:   %s\n", same ? "bitwise identical" : "MISMATCH");
  return same ? 0 : 1;
}
