#include "tsrag/arm.hpp"

#include <cmath>

#include "tsrag/error.hpp"
#include "tsrag/rng.hpp"

namespace tsrag {

void ArmConfig::validate() const {
    if (heads == 0 || d % heads != 0) {
        throw TsragError(ErrorCategory::DIM_MISMATCH,
                         "arm config: d (" + std::to_string(d) + ") must be divisible by heads (" +
                             std::to_string(heads) + ")");
    }
    if (d == 0 || ffn_hidden == 0 || proj_hidden == 0 || horizon_len == 0) {
        throw TsragError(ErrorCategory::DIM_MISMATCH, "arm config: zero dimension");
    }
    if (dropout_p < 0.0 || dropout_p >= 1.0) {
        throw TsragError(ErrorCategory::FORMAT, "arm config: dropout_p must be in [0, 1)");
    }
}

std::vector<Vec*> ArmParams::tensors() {
    return {&proj_w1.data, &proj_b1, &proj_w2.data, &proj_b2, &wq.data, &bq,
            &wk.data,      &bk,      &wv.data,      &bv,      &wo.data, &bo,
            &ffn_w1.data,  &ffn_b1,  &ffn_w2.data,  &ffn_b2,  &score_w, &score_b};
}

std::vector<const Vec*> ArmParams::tensors() const {
    return {&proj_w1.data, &proj_b1, &proj_w2.data, &proj_b2, &wq.data, &bq,
            &wk.data,      &bk,      &wv.data,      &bv,      &wo.data, &bo,
            &ffn_w1.data,  &ffn_b1,  &ffn_w2.data,  &ffn_b2,  &score_w, &score_b};
}

std::vector<std::string> ArmParams::tensor_names() {
    return {"proj_w1", "proj_b1", "proj_w2", "proj_b2", "wq", "bq",
            "wk",      "bk",      "wv",      "bv",      "wo", "bo",
            "ffn_w1",  "ffn_b1",  "ffn_w2",  "ffn_b2",  "score_w", "score_b"};
}

void ArmGrads::accumulate(const ArmGrads& other) {
    auto mine = tensors();
    auto theirs = other.tensors();
    for (std::size_t t = 0; t < mine.size(); ++t) {
        for (std::size_t i = 0; i < mine[t]->size(); ++i) (*mine[t])[i] += (*theirs[t])[i];
    }
    for (std::size_t i = 0; i < d_e_q.size(); ++i) d_e_q[i] += other.d_e_q[i];
}

void ArmGrads::scale(double s) {
    for (Vec* t : tensors()) {
        for (double& x : *t) x *= s;
    }
    for (double& x : d_e_q) x *= s;
}

namespace {

void fill_uniform(Vec& v, double bound, Rng& rng) {
    for (double& x : v) x = rng.uniform(-bound, bound);
}

double inv_sqrt(std::size_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); }

ArmParams make_shaped(const ArmConfig& cfg) {
    ArmParams p;
    p.config = cfg;
    p.proj_w1 = Mat(cfg.horizon_len, cfg.proj_hidden);
    p.proj_b1.assign(cfg.proj_hidden, 0.0);
    p.proj_w2 = Mat(cfg.proj_hidden, cfg.d);
    p.proj_b2.assign(cfg.d, 0.0);
    p.wq = Mat(cfg.d, cfg.d);
    p.wk = Mat(cfg.d, cfg.d);
    p.wv = Mat(cfg.d, cfg.d);
    p.bq.assign(cfg.d, 0.0);
    p.bk.assign(cfg.d, 0.0);
    p.bv.assign(cfg.d, 0.0);
    p.wo = Mat(cfg.d, cfg.d);
    p.bo.assign(cfg.d, 0.0);
    p.ffn_w1 = Mat(cfg.d, cfg.ffn_hidden);
    p.ffn_b1.assign(cfg.ffn_hidden, 0.0);
    p.ffn_w2 = Mat(cfg.ffn_hidden, cfg.d);
    p.ffn_b2.assign(cfg.d, 0.0);
    p.score_w.assign(cfg.d, 0.0);
    p.score_b.assign(1, 0.0);
    return p;
}

} // namespace

ArmParams init_arm(const ArmConfig& config) {
    config.validate();
    ArmParams p = make_shaped(config);
    Rng rng(config.seed);
    fill_uniform(p.proj_w1.data, inv_sqrt(config.horizon_len), rng);
    fill_uniform(p.proj_w2.data, inv_sqrt(config.proj_hidden), rng);
    fill_uniform(p.wq.data, inv_sqrt(config.d), rng);
    fill_uniform(p.wk.data, inv_sqrt(config.d), rng);
    fill_uniform(p.wv.data, inv_sqrt(config.d), rng);
    fill_uniform(p.wo.data, inv_sqrt(config.d), rng);
    fill_uniform(p.ffn_w1.data, inv_sqrt(config.d), rng);
    fill_uniform(p.ffn_w2.data, inv_sqrt(config.ffn_hidden), rng);
    fill_uniform(p.score_w, inv_sqrt(config.d), rng);
    return p;
}

ArmParams zeros_like(const ArmParams& params) { return make_shaped(params.config); }

Mat project_horizons(const std::vector<Vec>& horizons, const ArmParams& params) {
    const auto& cfg = params.config;
    Mat out(horizons.size(), cfg.d);
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        require_len(horizons[i], cfg.horizon_len, "project_horizons input");
        Vec h = vecmat(horizons[i], params.proj_w1);
        for (std::size_t j = 0; j < h.size(); ++j) h[j] = std::max(0.0, h[j] + params.proj_b1[j]);
        Vec row = vecmat(h, params.proj_w2);
        for (std::size_t j = 0; j < row.size(); ++j) out(i, j) = row[j] + params.proj_b2[j];
    }
    return out;
}

ArmTrace arm_forward(const Vec& e_q, const std::vector<Vec>& horizons, const ArmParams& params,
                     ArmMode mode, std::uint64_t rng_seed) {
    const auto& cfg = params.config;
    cfg.validate();
    require_len(e_q, cfg.d, "arm_forward e_q");
    if (horizons.size() > cfg.k) {
        throw TsragError(ErrorCategory::DIM_MISMATCH,
                         "arm_forward: got " + std::to_string(horizons.size()) +
                             " horizons but config.k = " + std::to_string(cfg.k));
    }

    const std::size_t k = horizons.size();
    const std::size_t rows = k + 1;
    const std::size_t dh = cfg.head_dim();
    ArmTrace tr;
    tr.mode = mode;

    // Horizon projector, one row per retrieved horizon.
    tr.proj_hidden = Mat(k, cfg.proj_hidden);
    tr.e_ret = Mat(k, cfg.d);
    for (std::size_t i = 0; i < k; ++i) {
        require_len(horizons[i], cfg.horizon_len, "arm_forward horizon");
        Vec h = vecmat(horizons[i], params.proj_w1);
        for (std::size_t j = 0; j < cfg.proj_hidden; ++j) {
            tr.proj_hidden(i, j) = std::max(0.0, h[j] + params.proj_b1[j]);
        }
        for (std::size_t j = 0; j < cfg.d; ++j) {
            double s = params.proj_b2[j];
            for (std::size_t l = 0; l < cfg.proj_hidden; ++l) {
                s += tr.proj_hidden(i, l) * params.proj_w2(l, j);
            }
            tr.e_ret(i, j) = s;
        }
    }

    // Stack the query embedding on top of the projected horizons.
    tr.e_concat = Mat(rows, cfg.d);
    for (std::size_t j = 0; j < cfg.d; ++j) tr.e_concat(0, j) = e_q[j];
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < cfg.d; ++j) tr.e_concat(i + 1, j) = tr.e_ret(i, j);
    }

    // Multi-head self-attention with residual, no positional encoding.
    tr.q = matmul(tr.e_concat, params.wq);
    tr.kk = matmul(tr.e_concat, params.wk);
    tr.v = matmul(tr.e_concat, params.wv);
    add_row_bias(tr.q, params.bq);
    add_row_bias(tr.kk, params.bk);
    add_row_bias(tr.v, params.bv);

    tr.heads_concat = Mat(rows, cfg.d);
    tr.attn.clear();
    tr.attn.reserve(cfg.heads);
    const double scale = inv_sqrt(dh);
    for (std::size_t h = 0; h < cfg.heads; ++h) {
        const std::size_t off = h * dh;
        Mat scores(rows, rows);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < rows; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < dh; ++l) s += tr.q(i, off + l) * tr.kk(j, off + l);
                scores(i, j) = s * scale;
            }
        }
        softmax_rows(scores);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t l = 0; l < dh; ++l) {
                double s = 0.0;
                for (std::size_t j = 0; j < rows; ++j) s += scores(i, j) * tr.v(j, off + l);
                tr.heads_concat(i, off + l) = s;
            }
        }
        tr.attn.push_back(std::move(scores));
    }
    tr.e_att = matmul(tr.heads_concat, params.wo);
    add_row_bias(tr.e_att, params.bo);
    for (std::size_t i = 0; i < tr.e_att.data.size(); ++i) tr.e_att.data[i] += tr.e_concat.data[i];

    // Position-wise FFN; dropout on its output only, then residual.
    Mat z = matmul(tr.e_att, params.ffn_w1);
    add_row_bias(z, params.ffn_b1);
    tr.ffn_hidden = Mat(rows, cfg.ffn_hidden);
    for (std::size_t i = 0; i < z.data.size(); ++i) {
        tr.ffn_hidden.data[i] = std::max(0.0, z.data[i]);
    }
    tr.ffn_out = matmul(tr.ffn_hidden, params.ffn_w2);
    add_row_bias(tr.ffn_out, params.ffn_b2);

    tr.dropout_mask = Mat(rows, cfg.d);
    tr.dropout_mask.fill(1.0);
    tr.dropout_keep = 1.0;
    Mat dropped = tr.ffn_out;
    if (mode == ArmMode::Train && cfg.dropout_p > 0.0) {
        Rng rng(rng_seed);
        tr.dropout_keep = 1.0 - cfg.dropout_p;
        const double inv_keep = 1.0 / tr.dropout_keep;
        for (std::size_t i = 0; i < dropped.data.size(); ++i) {
            const bool keep = rng.uniform01() >= cfg.dropout_p;
            tr.dropout_mask.data[i] = keep ? 1.0 : 0.0;
            dropped.data[i] = keep ? dropped.data[i] * inv_keep : 0.0;
        }
    }
    tr.e_ffn = Mat(rows, cfg.d);
    for (std::size_t i = 0; i < tr.e_ffn.data.size(); ++i) {
        tr.e_ffn.data[i] = dropped.data[i] + tr.e_att.data[i];
    }

    // Scorer: one logit per row, softmax across the k+1 rows.
    tr.scores.assign(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        tr.scores[i] = params.score_b[0];
        for (std::size_t j = 0; j < cfg.d; ++j) tr.scores[i] += params.score_w[j] * tr.e_ffn(i, j);
    }
    tr.alpha = softmax(tr.scores);

    // Weighted sum plus the skip back to the query embedding.
    tr.e_final.assign(cfg.d, 0.0);
    for (std::size_t j = 0; j < cfg.d; ++j) {
        double s = e_q[j];
        for (std::size_t i = 0; i < rows; ++i) s += tr.alpha[i] * tr.e_ffn(i, j);
        tr.e_final[j] = s;
    }
    return tr;
}

ArmGrads arm_backward(const ArmTrace& tr, const Vec& d_e_final, const ArmParams& params,
                      const Vec& e_q, const std::vector<Vec>& horizons) {
    const auto& cfg = params.config;
    require_len(d_e_final, cfg.d, "arm_backward upstream");
    require_len(e_q, cfg.d, "arm_backward e_q");
    const std::size_t k = horizons.size();
    const std::size_t rows = k + 1;
    if (tr.e_ffn.rows != rows || tr.e_ffn.cols != cfg.d) {
        throw TsragError(ErrorCategory::DIM_MISMATCH, "arm_backward: trace does not match inputs");
    }
    const std::size_t dh = cfg.head_dim();

    ArmGrads g;
    g.tensors_like = zeros_like(params);
    g.d_e_q.assign(cfg.d, 0.0);
    ArmParams& gp = g.tensors_like;

    // e_final = e_q + sum_i alpha_i * E_ffn_i
    for (std::size_t j = 0; j < cfg.d; ++j) g.d_e_q[j] += d_e_final[j];
    Vec d_alpha(rows, 0.0);
    Mat d_e_ffn(rows, cfg.d);
    for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cfg.d; ++j) {
            s += d_e_final[j] * tr.e_ffn(i, j);
            d_e_ffn(i, j) = tr.alpha[i] * d_e_final[j];
        }
        d_alpha[i] = s;
    }

    // Scorer softmax backward.
    double inner = 0.0;
    for (std::size_t i = 0; i < rows; ++i) inner += tr.alpha[i] * d_alpha[i];
    for (std::size_t i = 0; i < rows; ++i) {
        const double d_score = tr.alpha[i] * (d_alpha[i] - inner);
        gp.score_b[0] += d_score;
        for (std::size_t j = 0; j < cfg.d; ++j) {
            gp.score_w[j] += d_score * tr.e_ffn(i, j);
            d_e_ffn(i, j) += d_score * params.score_w[j];
        }
    }

    // E_ffn = Dropout(FFN(E_att)) + E_att
    Mat d_e_att = d_e_ffn; // residual branch
    Mat d_ffn_out(rows, cfg.d);
    if (tr.mode == ArmMode::Train && tr.dropout_keep < 1.0) {
        const double inv_keep = 1.0 / tr.dropout_keep;
        for (std::size_t i = 0; i < d_ffn_out.data.size(); ++i) {
            d_ffn_out.data[i] = d_e_ffn.data[i] * tr.dropout_mask.data[i] * inv_keep;
        }
    } else {
        d_ffn_out.data = d_e_ffn.data;
    }

    Mat d_ffn_w2 = matmul_tn(tr.ffn_hidden, d_ffn_out);
    gp.ffn_w2.data = d_ffn_w2.data;
    gp.ffn_b2 = col_sums(d_ffn_out);
    Mat d_hidden = matmul_nt(d_ffn_out, params.ffn_w2);
    for (std::size_t i = 0; i < d_hidden.data.size(); ++i) {
        if (tr.ffn_hidden.data[i] <= 0.0) d_hidden.data[i] = 0.0;
    }
    Mat d_ffn_w1 = matmul_tn(tr.e_att, d_hidden);
    gp.ffn_w1.data = d_ffn_w1.data;
    gp.ffn_b1 = col_sums(d_hidden);
    Mat d_from_ffn = matmul_nt(d_hidden, params.ffn_w1);
    for (std::size_t i = 0; i < d_e_att.data.size(); ++i) d_e_att.data[i] += d_from_ffn.data[i];

    // E_att = MHA(E_concat) + E_concat
    Mat d_x = d_e_att; // residual branch
    Mat d_heads = matmul_nt(d_e_att, params.wo);
    Mat d_wo = matmul_tn(tr.heads_concat, d_e_att);
    gp.wo.data = d_wo.data;
    gp.bo = col_sums(d_e_att);

    Mat d_q(rows, cfg.d), d_k(rows, cfg.d), d_v(rows, cfg.d);
    const double scale = inv_sqrt(dh);
    for (std::size_t h = 0; h < cfg.heads; ++h) {
        const std::size_t off = h * dh;
        const Mat& attn = tr.attn[h];
        // d(attention weights) and d(V_h)
        Mat d_attn(rows, rows);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < rows; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < dh; ++l) s += d_heads(i, off + l) * tr.v(j, off + l);
                d_attn(i, j) = s;
            }
        }
        for (std::size_t j = 0; j < rows; ++j) {
            for (std::size_t l = 0; l < dh; ++l) {
                double s = 0.0;
                for (std::size_t i = 0; i < rows; ++i) s += attn(i, j) * d_heads(i, off + l);
                d_v(j, off + l) = s;
            }
        }
        // softmax rows backward, then the 1/sqrt(dh) score scale
        for (std::size_t i = 0; i < rows; ++i) {
            double row_inner = 0.0;
            for (std::size_t j = 0; j < rows; ++j) row_inner += d_attn(i, j) * attn(i, j);
            for (std::size_t j = 0; j < rows; ++j) {
                d_attn(i, j) = attn(i, j) * (d_attn(i, j) - row_inner) * scale;
            }
        }
        // d(Q_h) = dS * K_h ; d(K_h) = dS^T * Q_h
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t l = 0; l < dh; ++l) {
                double sq = 0.0;
                for (std::size_t j = 0; j < rows; ++j) sq += d_attn(i, j) * tr.kk(j, off + l);
                d_q(i, off + l) = sq;
            }
        }
        for (std::size_t j = 0; j < rows; ++j) {
            for (std::size_t l = 0; l < dh; ++l) {
                double sk = 0.0;
                for (std::size_t i = 0; i < rows; ++i) sk += d_attn(i, j) * tr.q(i, off + l);
                d_k(j, off + l) = sk;
            }
        }
    }

    Mat d_wq = matmul_tn(tr.e_concat, d_q);
    Mat d_wk = matmul_tn(tr.e_concat, d_k);
    Mat d_wv = matmul_tn(tr.e_concat, d_v);
    gp.wq.data = d_wq.data;
    gp.wk.data = d_wk.data;
    gp.wv.data = d_wv.data;
    gp.bq = col_sums(d_q);
    gp.bk = col_sums(d_k);
    gp.bv = col_sums(d_v);
    Mat d_x_q = matmul_nt(d_q, params.wq);
    Mat d_x_k = matmul_nt(d_k, params.wk);
    Mat d_x_v = matmul_nt(d_v, params.wv);
    for (std::size_t i = 0; i < d_x.data.size(); ++i) {
        d_x.data[i] += d_x_q.data[i] + d_x_k.data[i] + d_x_v.data[i];
    }

    // Concat rows: row 0 is the query, rows 1..k are projected horizons.
    for (std::size_t j = 0; j < cfg.d; ++j) g.d_e_q[j] += d_x(0, j);

    // Projector backward, row by row.
    for (std::size_t i = 0; i < k; ++i) {
        Vec d_hidden_row(cfg.proj_hidden, 0.0);
        for (std::size_t l = 0; l < cfg.proj_hidden; ++l) {
            const double hval = tr.proj_hidden(i, l);
            double s = 0.0;
            for (std::size_t j = 0; j < cfg.d; ++j) {
                const double dr = d_x(i + 1, j);
                gp.proj_w2(l, j) += hval * dr;
                s += params.proj_w2(l, j) * dr;
            }
            d_hidden_row[l] = hval > 0.0 ? s : 0.0;
        }
        for (std::size_t j = 0; j < cfg.d; ++j) gp.proj_b2[j] += d_x(i + 1, j);
        for (std::size_t l = 0; l < cfg.proj_hidden; ++l) {
            const double dz = d_hidden_row[l];
            if (dz == 0.0) continue;
            gp.proj_b1[l] += dz;
            for (std::size_t m = 0; m < cfg.horizon_len; ++m) {
                gp.proj_w1(m, l) += horizons[i][m] * dz;
            }
        }
    }

    return g;
}

std::vector<Vec*> GateParams::tensors() {
    return {&proj_w1.data, &proj_b1, &proj_w2.data, &proj_b2, &gate};
}

std::vector<const Vec*> GateParams::tensors() const {
    return {&proj_w1.data, &proj_b1, &proj_w2.data, &proj_b2, &gate};
}

GateParams init_gate(const ArmConfig& config) {
    config.validate();
    GateParams p;
    p.config = config;
    p.proj_w1 = Mat(config.horizon_len, config.proj_hidden);
    p.proj_b1.assign(config.proj_hidden, 0.0);
    p.proj_w2 = Mat(config.proj_hidden, config.d);
    p.proj_b2.assign(config.d, 0.0);
    p.gate.assign(1, 0.0);
    Rng rng(mix_seed(config.seed, 0x6a7e));
    fill_uniform(p.proj_w1.data, inv_sqrt(config.horizon_len), rng);
    fill_uniform(p.proj_w2.data, inv_sqrt(config.proj_hidden), rng);
    return p;
}

GateTrace gated_fusion_forward(const Vec& e_q, const std::vector<Vec>& horizons,
                               const GateParams& params) {
    const auto& cfg = params.config;
    require_len(e_q, cfg.d, "gated_fusion e_q");
    GateTrace tr;
    const std::size_t k = horizons.size();
    if (k == 0) {
        tr.sigma = 1.0;
        tr.e_final = e_q;
        return tr;
    }
    tr.proj_hidden = Mat(k, cfg.proj_hidden);
    tr.e_ret = Mat(k, cfg.d);
    for (std::size_t i = 0; i < k; ++i) {
        require_len(horizons[i], cfg.horizon_len, "gated_fusion horizon");
        Vec h = vecmat(horizons[i], params.proj_w1);
        for (std::size_t j = 0; j < cfg.proj_hidden; ++j) {
            tr.proj_hidden(i, j) = std::max(0.0, h[j] + params.proj_b1[j]);
        }
        for (std::size_t j = 0; j < cfg.d; ++j) {
            double s = params.proj_b2[j];
            for (std::size_t l = 0; l < cfg.proj_hidden; ++l) {
                s += tr.proj_hidden(i, l) * params.proj_w2(l, j);
            }
            tr.e_ret(i, j) = s;
        }
    }
    tr.mean_ret.assign(cfg.d, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < cfg.d; ++j) tr.mean_ret[j] += tr.e_ret(i, j);
    }
    for (double& x : tr.mean_ret) x /= static_cast<double>(k);
    tr.sigma = 1.0 / (1.0 + std::exp(-params.gate[0]));
    tr.e_final.assign(cfg.d, 0.0);
    for (std::size_t j = 0; j < cfg.d; ++j) {
        tr.e_final[j] = tr.sigma * e_q[j] + (1.0 - tr.sigma) * tr.mean_ret[j];
    }
    return tr;
}

GateGrads gated_fusion_backward(const GateTrace& tr, const Vec& d_e_final,
                                const GateParams& params, const Vec& e_q,
                                const std::vector<Vec>& horizons) {
    const auto& cfg = params.config;
    GateGrads g;
    g.tensors_like = init_gate(cfg);
    for (Vec* t : g.tensors_like.tensors()) std::fill(t->begin(), t->end(), 0.0);
    g.d_e_q.assign(cfg.d, 0.0);
    const std::size_t k = horizons.size();
    if (k == 0) {
        g.d_e_q = d_e_final;
        return g;
    }
    GateParams& gp = g.tensors_like;

    double d_sigma = 0.0;
    Vec d_mean(cfg.d, 0.0);
    for (std::size_t j = 0; j < cfg.d; ++j) {
        d_sigma += d_e_final[j] * (e_q[j] - tr.mean_ret[j]);
        d_mean[j] = d_e_final[j] * (1.0 - tr.sigma);
        g.d_e_q[j] = d_e_final[j] * tr.sigma;
    }
    gp.gate[0] = d_sigma * tr.sigma * (1.0 - tr.sigma);

    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) {
        Vec d_hidden_row(cfg.proj_hidden, 0.0);
        for (std::size_t l = 0; l < cfg.proj_hidden; ++l) {
            const double hval = tr.proj_hidden(i, l);
            double s = 0.0;
            for (std::size_t j = 0; j < cfg.d; ++j) {
                const double dr = d_mean[j] * inv_k;
                gp.proj_w2(l, j) += hval * dr;
                s += params.proj_w2(l, j) * dr;
            }
            d_hidden_row[l] = hval > 0.0 ? s : 0.0;
        }
        for (std::size_t j = 0; j < cfg.d; ++j) gp.proj_b2[j] += d_mean[j] * inv_k;
        for (std::size_t l = 0; l < cfg.proj_hidden; ++l) {
            const double dz = d_hidden_row[l];
            if (dz == 0.0) continue;
            gp.proj_b1[l] += dz;
            for (std::size_t m = 0; m < cfg.horizon_len; ++m) {
                gp.proj_w1(m, l) += horizons[i][m] * dz;
            }
        }
    }
    return g;
}

} // namespace tsrag
