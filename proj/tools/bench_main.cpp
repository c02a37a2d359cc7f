// Benchmark: serial reference vs OpenMP execution of the per-sample adaptive
// Monte Carlo loop. Both modes must produce bit-identical results (each
// sample's rng stream is derived from its index alone); the program exits
// nonzero if they ever diverge.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "mccp/adaptive_mc.hpp"
#include "mccp/mlp.hpp"
#include "mccp/parallel.hpp"
#include "mccp/rng.hpp"

using namespace mccp;

namespace {

struct Workload {
  Mlp net;
  std::vector<Vec> inputs;
  AdaptiveConfig adaptive;
};

Workload make_workload(std::size_t n_samples, int input_dim) {
  Rng rng(derive_seed(99, 1));
  MlpSpec spec;
  spec.layer_widths = {input_dim, 64, 64, 3};
  spec.head = Head::Softmax;
  spec.dropout_rate = 0.5;
  Workload w{init_mlp(spec, rng), {}, {}};
  w.inputs.assign(n_samples, Vec(input_dim));
  for (auto& x : w.inputs) {
    for (auto& v : x) v = rng.next_normal();
  }
  w.adaptive.max_passes = 200;
  w.adaptive.delta = 1e-4;
  w.adaptive.patience = 10;
  return w;
}

std::vector<AdaptiveResult> run(const Workload& w, ExecMode mode,
                                double* seconds) {
  const MlpPredictor predictor(&w.net);
  const Rng base(derive_seed(99, 2));
  std::vector<AdaptiveResult> out(w.inputs.size());
  const auto t0 = std::chrono::steady_clock::now();
  for_each_index(w.inputs.size(), mode, [&](std::size_t i) {
    Rng rng = base.child(i);
    out[i] = adaptive_mc_dropout(predictor, w.inputs[i], w.adaptive, rng);
  });
  const auto t1 = std::chrono::steady_clock::now();
  *seconds = std::chrono::duration<double>(t1 - t0).count();
  return out;
}

bool identical(const std::vector<AdaptiveResult>& a,
               const std::vector<AdaptiveResult>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].passes != b[i].passes || a[i].converged != b[i].converged) {
      return false;
    }
    if (std::memcmp(a[i].mean.data(), b[i].mean.data(),
                    a[i].mean.size() * sizeof(double)) != 0 ||
        std::memcmp(a[i].variance.data(), b[i].variance.data(),
                    a[i].variance.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n_samples = 256;
  if (argc > 1) n_samples = static_cast<std::size_t>(std::atol(argv[1]));

  const Workload w = make_workload(n_samples, 8);
  std::printf("adaptive MC workload: %zu samples, net 8-64-64-3, K=%d\n",
              w.inputs.size(), w.adaptive.max_passes);
  std::printf("hardware threads available: %d\n", max_threads());

  double serial_s = 0.0, parallel_s = 0.0;
  const auto serial = run(w, ExecMode::Serial, &serial_s);
  const auto parallel = run(w, ExecMode::Parallel, &parallel_s);

  long long total_passes = 0;
  for (const auto& r : serial) total_passes += r.passes;

  std::printf("serial   : %8.3f s  (%.1f passes/sample avg)\n", serial_s,
              static_cast<double>(total_passes) /
                  static_cast<double>(serial.size()));
  std::printf("parallel : %8.3f s  (speedup %.2fx)\n", parallel_s,
              serial_s / parallel_s);

  if (!identical(serial, parallel)) {
    std::printf("FAIL: serial and parallel results differ\n");
    return 1;
  }
  std::printf("serial and parallel results are bit-identical\n");
  return 0;
}
