#pragma once

#include <vector>

#include "pcgrow/circuit.hpp"
#include "pcgrow/data.hpp"
#include "pcgrow/flow.hpp"
#include "pcgrow/rng.hpp"

namespace pcg {

struct EmStepConfig {
    double leaf_pseudocount = 0.1;  // per category; keeps unseen values off zero
    double edge_smoothing = 1e-4;   // per sum edge, applied before normalization
};

// One EM step from accumulated flows: target weights are smoothed normalized
// edge flows, blended as theta := (1 - eta) * theta + eta * theta_target;
// leaf tables update the same way from leaf flows. Weight and table
// normalization is restored exactly. eta must lie in (0, 1]; eta = 1 is the
// exact full-batch EM step.
void em_update(Circuit& c, const FlowTable& flows, double step_size, const EmStepConfig& cfg = {});

struct TrainConfig {
    int epochs = 50;
    int batch_size = 256;
    double lr_start = 0.1;
    double lr_end = 0.01;
    EmStepConfig step;
};

// Mini-batch EM over shuffled epochs with the step size annealed linearly
// from lr_start to lr_end. Returns the per-epoch mean train log-likelihood
// (computed from the forward passes, i.e. under the parameters the epoch
// started from when batch_size covers the data).
std::vector<double> train_em(Circuit& c, const LabeledBatch& batch, const TrainConfig& cfg, Rng& rng);

// LL trace as `epoch,mean_ll_nats` CSV.
std::string format_ll_trace(const std::vector<double>& trace);

}  // namespace pcg
