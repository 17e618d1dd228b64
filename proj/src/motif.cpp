#include "tsrag/motif.hpp"

#include <cmath>

#include "tsrag/error.hpp"
#include "tsrag/rng.hpp"

namespace tsrag {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
}

std::vector<Motif> make_motif_bank(const MotifBankOptions& opts) {
    Rng rng(opts.seed);
    std::vector<Motif> bank;
    bank.reserve(opts.size);
    for (std::size_t i = 0; i < opts.size; ++i) {
        Motif m;
        switch (i % 3) {
            case 0: m.kind = MotifKind::Sine; break;
            case 1: m.kind = MotifKind::Sawtooth; break;
            default: m.kind = MotifKind::Trend; break;
        }
        const double raw_period =
            opts.period_scale * rng.uniform(static_cast<double>(opts.min_period),
                                            static_cast<double>(opts.max_period));
        m.period = static_cast<std::uint32_t>(std::max(2.0, std::round(raw_period)));
        m.amplitude = opts.amplitude_scale * rng.uniform(0.5, 2.0);
        m.phase = rng.uniform01();
        m.slope = rng.uniform(-1.0, 1.0) * m.amplitude / 512.0;
        bank.push_back(m);
    }
    return bank;
}

double motif_value(const Motif& m, std::uint64_t t) {
    const double cycles =
        static_cast<double>(t % m.period) / static_cast<double>(m.period) + m.phase;
    switch (m.kind) {
        case MotifKind::Sine:
            return m.amplitude * std::sin(kTwoPi * cycles);
        case MotifKind::Sawtooth: {
            const double frac = cycles - std::floor(cycles);
            return m.amplitude * (2.0 * frac - 1.0);
        }
        case MotifKind::Trend:
            return m.slope * static_cast<double>(t);
    }
    return 0.0;
}

std::vector<Series> generate_motif_corpus(const std::vector<Motif>& bank,
                                          const MotifCorpusOptions& opts) {
    if (bank.empty()) throw TsragError(ErrorCategory::FORMAT, "motif bank is empty");
    std::vector<Series> corpus;
    corpus.reserve(opts.n_series);
    for (std::size_t s = 0; s < opts.n_series; ++s) {
        Rng rng(mix_seed(opts.seed, s));
        const std::size_t n_components = 1 + rng.below(3); // 1..3
        std::vector<std::size_t> idx(n_components);
        std::vector<double> w(n_components);
        double wsum = 0.0;
        for (std::size_t c = 0; c < n_components; ++c) {
            idx[c] = rng.below(bank.size());
            w[c] = rng.uniform(0.1, 1.0);
            wsum += w[c];
        }
        for (double& x : w) x /= wsum;

        Series series;
        series.id = opts.source_tag + "-" + std::to_string(s);
        series.source_tag = opts.source_tag;
        series.values.resize(opts.series_len);
        for (std::size_t t = 0; t < opts.series_len; ++t) {
            double v = 0.0;
            for (std::size_t c = 0; c < n_components; ++c) {
                v += w[c] * motif_value(bank[idx[c]], t);
            }
            if (opts.noise_std > 0.0) v += opts.noise_std * rng.gaussian();
            series.values[t] = v;
        }
        corpus.push_back(std::move(series));
    }
    return corpus;
}

std::vector<Series> generate_motif_corpus(std::uint64_t seed, std::size_t n_series,
                                          std::size_t len, std::size_t motif_bank_size,
                                          double noise_std) {
    MotifBankOptions bank_opts;
    bank_opts.seed = seed;
    bank_opts.size = motif_bank_size;
    MotifCorpusOptions opts;
    opts.seed = seed;
    opts.n_series = n_series;
    opts.series_len = len;
    opts.noise_std = noise_std;
    return generate_motif_corpus(make_motif_bank(bank_opts), opts);
}

} // namespace tsrag
