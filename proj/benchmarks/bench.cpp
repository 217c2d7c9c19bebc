#include <benchmark/benchmark.h>

#include "mdual/fixtures.hpp"
#include "mdual/integrand.hpp"
#include "mdual/io.hpp"
#include "mdual/primal_dual.hpp"

namespace {

using mdual::ConvexIntegrand;
using mdual::Vector;

Vector point(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

void BM_ConjugateClosedForm(benchmark::State& state) {
  const auto f = ConvexIntegrand::area(2);
  const Vector x = point({0.0});
  const Vector p = point({0.3, -0.4});
  for (auto _ : state) benchmark::DoNotOptimize(mdual::conjugate(f, x, p));
}
BENCHMARK(BM_ConjugateClosedForm);

void BM_ConjugateSearch(benchmark::State& state) {
  const auto f = ConvexIntegrand::area(static_cast<int>(state.range(0)));
  const Vector x = point({0.0});
  const Vector p = Vector::Constant(state.range(0), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(mdual::conjugate_search(f, x, p));
}
BENCHMARK(BM_ConjugateSearch)->Arg(1)->Arg(2);

void BM_MollifiedEval(benchmark::State& state) {
  const auto f = mdual::mollify(ConvexIntegrand::abs(), 0.1);
  const Vector x = point({0.0});
  const Vector z = point({0.05});
  for (auto _ : state) benchmark::DoNotOptimize(f(x, z));
}
BENCHMARK(BM_MollifiedEval);

void BM_SolveDual(benchmark::State& state) {
  const auto file = mdual::problem_file_from_json(mdual::make_fixture("area_1d_16"), "area_1d_16");
  for (auto _ : state) benchmark::DoNotOptimize(mdual::solve_dual(file.problem));
}
BENCHMARK(BM_SolveDual)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
