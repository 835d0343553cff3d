#include <algorithm>
#include <cmath>

#include "nsbench/error.hpp"
#include "nsbench/reasoners.hpp"

#include "json.hpp"

namespace nsb {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// numerically stable BCE with logits
double bce(double logit, double y) {
    return std::max(logit, 0.0) - y * logit + std::log1p(std::exp(-std::abs(logit)));
}

void affine(const double* w, const double* b, const std::vector<double>& x, int rows, int cols,
            std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(rows), 0.0);
    for (int r = 0; r < rows; ++r) {
        double acc = b[r];
        const double* row = w + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) acc += row[c] * x[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = acc;
    }
}

std::vector<double> relu(const std::vector<double>& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

struct Layout {
    int in = 0;
    int h = 0;
    std::size_t w1, b1, w2, b2, w3, b3, w4, b4, total;

    Layout(int input, int hidden) : in(input), h(hidden) {
        const auto hi = static_cast<std::size_t>(h);
        const auto ii = static_cast<std::size_t>(in);
        w1 = 0;
        b1 = w1 + hi * ii;
        w2 = b1 + hi;
        b2 = w2 + hi * hi;
        w3 = b2 + hi;
        b3 = w3 + hi * hi;
        w4 = b3 + hi;
        b4 = w4 + hi;
        total = b4 + 1;
    }
};

struct Cache {
    std::vector<std::vector<double>> z1pre, z1, z2pre, z2;
    std::vector<double> h_sum, upre, u;
    double logit = 0.0;
};

Cache run_forward(const Layout& L, const std::vector<double>& p,
                  const std::vector<std::vector<double>>& objects) {
    Cache c;
    c.h_sum.assign(static_cast<std::size_t>(L.h), 0.0);
    for (const auto& x : objects) {
        std::vector<double> z1pre;
        affine(&p[L.w1], &p[L.b1], x, L.h, L.in, z1pre);
        std::vector<double> z1 = relu(z1pre);
        std::vector<double> z2pre;
        affine(&p[L.w2], &p[L.b2], z1, L.h, L.h, z2pre);
        std::vector<double> z2 = relu(z2pre);
        for (int i = 0; i < L.h; ++i) c.h_sum[static_cast<std::size_t>(i)] += z2[static_cast<std::size_t>(i)];
        c.z1pre.push_back(std::move(z1pre));
        c.z1.push_back(std::move(z1));
        c.z2pre.push_back(std::move(z2pre));
        c.z2.push_back(std::move(z2));
    }
    affine(&p[L.w3], &p[L.b3], c.h_sum, L.h, L.h, c.upre);
    c.u = relu(c.upre);
    double logit = p[L.b4];
    for (int i = 0; i < L.h; ++i) logit += p[L.w4 + static_cast<std::size_t>(i)] * c.u[static_cast<std::size_t>(i)];
    c.logit = logit;
    return c;
}

} // namespace

NsclReasoner::NsclReasoner(const AttributeSchema& schema, std::uint64_t seed, NsclOptions options)
    : schema_(schema), options_(options), seed_(seed) {
    input_width_ = schema.position_dims();
    for (int c = 0; c < schema.num_concepts(); ++c) input_width_ += schema.domain_size(c);
}

std::vector<std::vector<double>> NsclReasoner::encode(const GroundedScene& scene) const {
    const auto table = scene.sym.attribute_table(schema_);
    std::vector<std::vector<double>> out;
    out.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        std::vector<double> x(static_cast<std::size_t>(input_width_), 0.0);
        std::size_t base = 0;
        for (int c = 0; c < schema_.num_concepts(); ++c) {
            const int v = table[i][static_cast<std::size_t>(c)];
            if (v >= 0) x[base + static_cast<std::size_t>(v)] = 1.0;
            base += static_cast<std::size_t>(schema_.domain_size(c));
        }
        for (int d = 0; d < schema_.position_dims(); ++d) {
            x[base + static_cast<std::size_t>(d)] =
                i < scene.coords.size() &&
                        d < static_cast<int>(scene.coords[i].size())
                    ? scene.coords[i][static_cast<std::size_t>(d)]
                    : 0.0;
        }
        out.push_back(std::move(x));
    }
    return out;
}

double NsclReasoner::logit(const GroundedScene& scene) const {
    if (params_.empty()) throw Error("EMPTY_TRAINING_SET", "nscl not fitted");
    const Layout L(input_width_, options_.hidden);
    return run_forward(L, params_, encode(scene)).logit;
}

double NsclReasoner::probability(const GroundedScene& scene) const { return sigmoid(logit(scene)); }

bool NsclReasoner::predict(const GroundedScene& scene) const { return logit(scene) > 0.0; }

double NsclReasoner::loss_and_grad(const std::vector<std::vector<std::vector<double>>>& batch,
                                   const std::vector<char>& labels,
                                   std::vector<double>* grad) const {
    const Layout L(input_width_, options_.hidden);
    if (grad) grad->assign(L.total, 0.0);
    const double inv = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    const auto& p = params_;
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const double y = labels[s] ? 1.0 : 0.0;
        const Cache c = run_forward(L, p, batch[s]);
        loss += bce(c.logit, y) * inv;
        if (!grad) continue;
        std::vector<double>& g = *grad;

        const double dl = (sigmoid(c.logit) - y) * inv;
        g[L.b4] += dl;
        std::vector<double> du(static_cast<std::size_t>(L.h), 0.0);
        for (int i = 0; i < L.h; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            g[L.w4 + ii] += dl * c.u[ii];
            du[ii] = dl * p[L.w4 + ii] * (c.upre[ii] > 0.0 ? 1.0 : 0.0);
        }
        std::vector<double> dh(static_cast<std::size_t>(L.h), 0.0);
        for (int r = 0; r < L.h; ++r) {
            const auto rr = static_cast<std::size_t>(r);
            if (du[rr] == 0.0) continue;
            g[L.b3 + rr] += du[rr];
            for (int cidx = 0; cidx < L.h; ++cidx) {
                const auto cc = static_cast<std::size_t>(cidx);
                g[L.w3 + rr * static_cast<std::size_t>(L.h) + cc] += du[rr] * c.h_sum[cc];
                dh[cc] += du[rr] * p[L.w3 + rr * static_cast<std::size_t>(L.h) + cc];
            }
        }
        for (std::size_t o = 0; o < batch[s].size(); ++o) {
            std::vector<double> dz2(static_cast<std::size_t>(L.h));
            for (int i = 0; i < L.h; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                dz2[ii] = dh[ii] * (c.z2pre[o][ii] > 0.0 ? 1.0 : 0.0);
            }
            std::vector<double> dz1(static_cast<std::size_t>(L.h), 0.0);
            for (int r = 0; r < L.h; ++r) {
                const auto rr = static_cast<std::size_t>(r);
                if (dz2[rr] == 0.0) continue;
                g[L.b2 + rr] += dz2[rr];
                for (int cidx = 0; cidx < L.h; ++cidx) {
                    const auto cc = static_cast<std::size_t>(cidx);
                    g[L.w2 + rr * static_cast<std::size_t>(L.h) + cc] += dz2[rr] * c.z1[o][cc];
                    dz1[cc] += dz2[rr] * p[L.w2 + rr * static_cast<std::size_t>(L.h) + cc];
                }
            }
            for (int r = 0; r < L.h; ++r) {
                const auto rr = static_cast<std::size_t>(r);
                const double d = dz1[rr] * (c.z1pre[o][rr] > 0.0 ? 1.0 : 0.0);
                if (d == 0.0) continue;
                g[L.b1 + rr] += d;
                for (int cidx = 0; cidx < L.in; ++cidx) {
                    const auto cc = static_cast<std::size_t>(cidx);
                    g[L.w1 + rr * static_cast<std::size_t>(L.in) + cc] += d * batch[s][o][cc];
                }
            }
        }
    }
    return loss;
}

void NsclReasoner::fit(const std::vector<const GroundedScene*>& scenes,
                       const std::vector<char>& labels) {
    if (scenes.empty()) throw Error("EMPTY_TRAINING_SET", "nscl requires training scenes");
    if (scenes.size() != labels.size()) throw Error("LENGTH_MISMATCH", "scenes vs labels");

    const Layout L(input_width_, options_.hidden);
    Rng rng(seed_);
    params_.assign(L.total, 0.0);
    auto init = [&](std::size_t offset, int rows, int cols) {
        const double bound = std::sqrt(6.0 / (rows + cols));
        for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * cols; ++i) {
            params_[offset + i] = rng.uniform(-bound, bound);
        }
    };
    init(L.w1, L.h, L.in);
    init(L.w2, L.h, L.h);
    init(L.w3, L.h, L.h);
    init(L.w4, 1, L.h);

    std::vector<std::vector<std::vector<double>>> encoded;
    encoded.reserve(scenes.size());
    for (const GroundedScene* s : scenes) encoded.push_back(encode(*s));

    std::vector<int> order(scenes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    std::vector<double> grad;
    for (int epoch = 0; epoch < options_.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        long batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(options_.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(options_.batch_size));
            std::vector<std::vector<std::vector<double>>> batch;
            std::vector<char> batch_y;
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(encoded[static_cast<std::size_t>(order[i])]);
                batch_y.push_back(labels[static_cast<std::size_t>(order[i])]);
            }
            const double loss = loss_and_grad(batch, batch_y, &grad);
            if (!std::isfinite(loss)) {
                throw Error("NON_FINITE_LOSS", "epoch " + std::to_string(epoch) + " batch " +
                                                   std::to_string(batches));
            }
            for (std::size_t i = 0; i < params_.size(); ++i) {
                params_[i] -= options_.lr * grad[i];
            }
            epoch_loss += loss;
            ++batches;
        }
        if (batches > 0 && epoch_loss / batches < options_.early_stop_loss) break;
    }
}

std::string NsclReasoner::serialize() const {
    nlohmann::json doc;
    doc["engine"] = "nscl";
    doc["input_width"] = input_width_;
    doc["hidden"] = options_.hidden;
    doc["params"] = params_;
    return doc.dump();
}

} // namespace nsb
