// Microbenchmarks for the dense kernels: operator assembly, propagator
// construction, cycle composition, and state handling. Sizes stay in the
// library's practical range (dense matrices, <= 13 spins).

#include <random>

#include <benchmark/benchmark.h>

#include "spinstore/protocols.hpp"

namespace {

using namespace spinstore;

CouplingMatrix chain_couplings(int n) {
  return dipolar_couplings(build_chain(n, 1.0), field_along({0, 0, 1}));
}

void BM_dipolar_hamiltonian(benchmark::State& state) {
  const CouplingMatrix c = chain_couplings(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(dipolar_hamiltonian(c, HamiltonianKind::Dz));
}
BENCHMARK(BM_dipolar_hamiltonian)->Arg(6)->Arg(8)->Arg(10);

void BM_propagator(benchmark::State& state) {
  const HermitianOperator h = dipolar_hamiltonian(
      chain_couplings(static_cast<int>(state.range(0))), HamiltonianKind::Dz);
  for (auto _ : state) benchmark::DoNotOptimize(expm_hermitian(h, 0.37));
}
BENCHMARK(BM_propagator)->Arg(6)->Arg(8)->Arg(10);

void BM_chain_reversal_cycle(benchmark::State& state) {
  const CouplingMatrix c = chain_couplings(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(chain_reversal_unitary(c, 0.25));
}
BENCHMARK(BM_chain_reversal_cycle)->Arg(6)->Arg(8);

void BM_pulse_cycle_explicit(benchmark::State& state) {
  const CouplingMatrix c = chain_couplings(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        pulse_storage_unitary(c, 0.1, PulseModel::ExplicitPulses));
}
BENCHMARK(BM_pulse_cycle_explicit)->Arg(6)->Arg(8);

void BM_fidelity(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(state.range(0));
  const DensityMatrix a = random_pure_density(n, rng);
  const DensityMatrix b = random_pure_density(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fidelity(a, b));
}
BENCHMARK(BM_fidelity)->Arg(6)->Arg(8);

void BM_partial_trace(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const int n = static_cast<int>(state.range(0));
  const DensityMatrix rho = random_pure_density(n, rng);
  std::vector<int> traced;
  for (int site = n / 2; site < n; ++site) traced.push_back(site);
  for (auto _ : state) benchmark::DoNotOptimize(partial_trace(rho, traced));
}
BENCHMARK(BM_partial_trace)->Arg(6)->Arg(8)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
