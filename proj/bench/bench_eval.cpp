// Throughput comparison of the serial reference evaluator against the
// OpenMP batch kernels, on an HCLT sized like the training workloads.
//
//   pcgrow_bench [num_vars] [hidden] [samples]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pcgrow/chow_liu.hpp"
#include "pcgrow/eval.hpp"
#include "pcgrow/flow.hpp"
#include "pcgrow/hclt.hpp"
#include "pcgrow/kernels.hpp"
#include "pcgrow/mutual_info.hpp"

using namespace pcg;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

DiscreteData make_random_rows(Rng& rng, const std::vector<int>& domains, int64_t n) {
    DiscreteData d;
    d.num_vars = static_cast<int>(domains.size());
    d.domains = domains;
    d.values.resize(n * d.num_vars);
    for (auto& v : d.values) v = static_cast<int32_t>(rng.uniform_int(domains[0]));
    return d;
}

}  // namespace

int main(int argc, char** argv) {
    int num_vars = argc > 1 ? std::atoi(argv[1]) : 64;
    int hidden = argc > 2 ? std::atoi(argv[2]) : 16;
    int64_t n = argc > 3 ? std::atoll(argv[3]) : 20000;

    Rng rng(7);
    std::vector<int> domains(num_vars, 8);
    DiscreteData data = make_random_rows(rng, domains, n);
    MITable mi = pairwise_mutual_information(data);
    TreeStructure tree = chow_liu_tree(mi, 0);
    Circuit c = build_hclt(tree, hidden, 1, domains, &data, rng);

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    int64_t edges = c.num_edges();
    std::printf("circuit: %d units, %lld edges; %lld samples; %d threads\n", c.num_units(),
                static_cast<long long>(edges), static_cast<long long>(n), threads);

    // serial reference: one query at a time through eval_values
    auto t0 = clock_type::now();
    double serial_sum = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        Evidence x = Evidence::observed(
            std::vector<int32_t>(data.row(i), data.row(i) + num_vars));
        serial_sum += log_likelihood(c, x, 0);
    }
    double serial_s = seconds_since(t0);

    // parallel batch kernel
    t0 = clock_type::now();
    std::vector<double> lls = batch_log_likelihood(c, data, 0);
    double batch_s = seconds_since(t0);
    double batch_sum = std::accumulate(lls.begin(), lls.end(), 0.0);

    // parallel flows (forward + backward)
    LabeledBatch batch{data, std::vector<int>(n, 0)};
    t0 = clock_type::now();
    FlowTable flows = compute_flows(c, batch);
    double flow_s = seconds_since(t0);

    double eps = static_cast<double>(n) * edges;
    std::printf("serial eval:    %8.3f s  (%6.2f M edge-ops/s)\n", serial_s, eps / serial_s / 1e6);
    std::printf("batch eval:     %8.3f s  (%6.2f M edge-ops/s, %.2fx)\n", batch_s,
                eps / batch_s / 1e6, serial_s / batch_s);
    std::printf("batch flows:    %8.3f s  (fwd+bwd, %.2fx serial eval)\n", flow_s,
                serial_s / flow_s);
    std::printf("check: |serial - batch| = %.3g, root flow = %.1f\n",
                std::fabs(serial_sum - batch_sum), flows.unit_flow[c.roots[0]]);
    return 0;
}
