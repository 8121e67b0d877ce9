// Walks one coherent state through three measurement schemes and a spin
// through a finite quorum, printing how well each reconstruction does.

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "qtomo/qtomo.hpp"

using namespace qtomo;

namespace {

void report(const char* name, const ReconstructedMatrix& r, const Matrix& truth, double seconds) {
  double worst = 0.0, max_err = 0.0;
  for (int k = 0; k < r.dim; ++k)
    for (int n = 0; n < r.dim; ++n)
      if (r.estimated(k, n)) {
        max_err = std::max(max_err, std::abs(r.mean(k, n) - truth(k, n)));
        if (r.std_error(k, n) > 0.0) worst = std::max(worst, std::abs(r.mean(k, n) - truth(k, n)) / r.std_error(k, n));
      }
  // Trace distance only makes sense when every element was estimated.
  if (r.estimated.all())
    std::printf("%-9s %8zu shots  trace distance %.4f", name, r.n_samples,
                compare_states(r.hermitized(), truth).trace_distance);
  else
    std::printf("%-9s %8zu shots  max element error %.4f", name, r.n_samples, max_err);
  std::printf("  worst element %.2f SE  (%.2f s)\n", worst, seconds);
  for (const auto& w : r.warnings) std::printf("          note: %s\n", w.c_str());
}

template <class F>
auto timed(double& seconds, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  auto out = f();
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

int main() {
  const int dim = 8, block = 4;
  EstimatorConfig cfg;
  cfg.dim = dim;
  const auto rho = make_state({states::Coherent{cplx{0.5, 0.2}}, dim});
  const Matrix truth = rho.matrix().topLeftCorner(block, block);
  std::printf("coherent(0.5 + 0.2i), dim %d, reconstructing the %dx%d low block\n", dim, block, block);

  double t = 0.0;
  const auto hom = timed(t, [&] {
    return reconstruct_matrix(sample_homodyne(rho, 200000, 1), Method::homodyne, cfg, block - 1);
  });
  report("homodyne", hom, truth, t);
  const auto par = timed(t, [&] {
    return reconstruct_matrix(sample_displaced_parity(rho, 200000, 2), Method::parity, cfg, block - 1);
  });
  report("parity", par, truth, t);
  const auto ker = timed(t, [&] {
    return reconstruct_matrix(sample_kerr_phase(rho, 200000, 3), Method::kerr, cfg, block - 1);
  });
  report("kerr", ker, truth, t);
  const auto exact = reconstruct_matrix_nonunitary(rho, cfg, block - 1);
  std::printf("%-9s    exact        max element error %.2e\n", "phase",
              (exact.mean - truth).cwiseAbs().maxCoeff());

  const HalfInteger s{2};
  const auto spin_rho = make_state({states::RandomMixed{4}, spin_dim(s)});
  std::printf("\nrandom spin-1 state\n");
  const auto spn = timed(t, [&] { return reconstruct_matrix(sample_spin(spin_rho, s, 200000, 5), Method::spin, cfg); });
  report("spin", spn, spin_rho.matrix(), t);

  const auto quorum = build_quorum({"weigert", 3, s});
  const auto dual = gram_schmidt_dual(quorum).dual;
  const auto probe = spin_component(s, {0.0, 0.0, 1.0});
  std::printf("weigert quorum: %zu projectors, bi-orthogonality %.1e, S_z rebuilt to %.1e\n", quorum.size(),
              check_biorthogonality(quorum, dual, 1e-10).max_violation,
              (reconstruct(quorum, dual, probe).matrix() - probe.matrix()).cwiseAbs().maxCoeff());
}
