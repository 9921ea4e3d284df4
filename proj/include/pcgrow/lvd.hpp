#pragma once

#include <vector>

#include "pcgrow/circuit.hpp"
#include "pcgrow/cluster.hpp"
#include "pcgrow/data.hpp"
#include "pcgrow/grow.hpp"
#include "pcgrow/patch.hpp"

namespace pcg {

struct TiedConditional {
    Circuit circuit;                       // K-headed, shared across positions
    ClusterMap shared;                     // over the aggregated records
    std::vector<ClusterMap> per_position;  // slices of the shared discretization
};

// Aggregate every position's (x_i, h_i) pairs into one dataset (position
// major) and run progressive growing once; the resulting circuit is tied
// across all positions. Patch datasets must agree in shape; domains unify to
// the elementwise max.
TiedConditional tie_and_train_conditional(const std::vector<EmbeddedDataset>& patch_datasets,
                                          const GrowConfig& config, Rng& rng);

struct PriorConfig {
    int hidden_size = 16;  // a single latent position collapses this to 1
    int epochs = 50;
    EmStepConfig step;
};

// HCLT over the latent grid fit by full-batch EM.
Circuit train_prior(const DiscreteData& z_data, const PriorConfig& config, Rng& rng);

// The composed model p(x) = sum_z p(z) prod_i p(x_i | z_i): every categorical
// leaf of the prior becomes a sum over pass-through products wrapping the
// position's instance of the (parameter-tied) conditional heads.
struct AssembledModel {
    Circuit composed;
    Circuit prior;
    Circuit conditional;
    PatchLayout layout;
    int num_categories = 0;

    // per composed unit: latent position of the gadget sum, or -1
    std::vector<int> gadget_position;

    // log p(x, Z = z) by clamping every gadget to its position's category.
    double joint_log_likelihood(const int32_t* x, const std::vector<int>& z) const;
};

AssembledModel assemble(const Circuit& prior, const Circuit& conditional, const PatchLayout& layout);

// Full-batch EM on the composed circuit with the latents marginalized.
// Returns the per-epoch mean log-likelihood trace.
std::vector<double> finetune(AssembledModel& model, const DiscreteData& images, int epochs,
                             const EmStepConfig& step = {});

struct GapReport {
    double lvd_objective = 0.0;    // sum of log p(x, z = lambda(h))
    double true_ll = 0.0;          // sum of log p(x)
    double variational_gap = 0.0;  // true_ll - lvd_objective
};

// Both objectives are computed from the composed circuit's current
// parameters, so variational_gap >= 0 holds sample by sample.
GapReport gap_report(const AssembledModel& model, const DiscreteData& images,
                     const std::vector<std::vector<int>>& z_labels);

// bpd = -(mean log-likelihood in nats) / (ln 2 * V).
double bits_per_dimension(const Circuit& model, const DiscreteData& test, int head = 0);

// Numeric check that the joint-form and ELBO-form objectives differ exactly
// by E_q[log q(z|x)], a constant in the circuit parameters: recomputes the
// difference under `num_reparams` random re-parameterizations and returns the
// largest deviation from the per-sample entropy term. q is factorized per
// position, row-major positions x K per sample.
double appendix_a_check(const Circuit& prior, const Circuit& conditional, const PatchLayout& layout,
                        const DiscreteData& images, const std::vector<std::vector<double>>& q,
                        int num_reparams, Rng& rng);

}  // namespace pcg
