#ifndef TSRAG_ADAMW_HPP
#define TSRAG_ADAMW_HPP

#include <cstdint>
#include <vector>

#include "tsrag/linalg.hpp"

namespace tsrag {

struct AdamWHyper {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// First/second moment accumulators, one buffer per parameter tensor.
struct AdamWState {
    std::vector<Vec> m;
    std::vector<Vec> v;
    std::uint64_t step = 0;
    AdamWHyper hyper;

    static AdamWState init(const std::vector<Vec*>& params, const AdamWHyper& hyper);
};

// One decoupled-weight-decay Adam step over all tensors. Decay multiplies the
// weights directly by (1 - lr*wd); it never flows through the moments.
// A NaN/Inf gradient aborts the step (NUMERIC) naming the offending tensor.
void adamw_step(const std::vector<Vec*>& params, const std::vector<const Vec*>& grads,
                AdamWState& state);

} // namespace tsrag

#endif
