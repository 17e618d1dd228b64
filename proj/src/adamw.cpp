#include "tsrag/adamw.hpp"

#include <cmath>

#include "tsrag/error.hpp"

namespace tsrag {

AdamWState AdamWState::init(const std::vector<Vec*>& params, const AdamWHyper& hyper) {
    AdamWState s;
    s.hyper = hyper;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Vec* p : params) {
        s.m.emplace_back(p->size(), 0.0);
        s.v.emplace_back(p->size(), 0.0);
    }
    return s;
}

void adamw_step(const std::vector<Vec*>& params, const std::vector<const Vec*>& grads,
                AdamWState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw TsragError(ErrorCategory::DIM_MISMATCH, "adamw_step: tensor count mismatch");
    }
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (params[t]->size() != grads[t]->size() || params[t]->size() != state.m[t].size()) {
            throw TsragError(ErrorCategory::DIM_MISMATCH,
                             "adamw_step: shape mismatch in tensor " + std::to_string(t));
        }
        for (double g : *grads[t]) {
            if (!std::isfinite(g)) {
                throw TsragError(ErrorCategory::NUMERIC,
                                 "adamw_step: non-finite gradient in tensor " + std::to_string(t) +
                                     " at step " + std::to_string(state.step + 1));
            }
        }
    }

    const AdamWHyper& h = state.hyper;
    state.step += 1;
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));

    for (std::size_t t = 0; t < params.size(); ++t) {
        Vec& w = *params[t];
        const Vec& g = *grads[t];
        Vec& m = state.m[t];
        Vec& v = state.v[t];
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] *= 1.0 - h.lr * h.weight_decay;
            m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
            v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= h.lr * mhat / (std::sqrt(vhat) + h.eps);
        }
    }
}

} // namespace tsrag
