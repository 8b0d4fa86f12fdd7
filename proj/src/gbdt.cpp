#include "trendlab/gbdt.h"

#include "trendlab/error.h"
#include "trendlab/parallel.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace trendlab::gbdt {

void GbdtParams::validate() const {
    const auto fail = [](const std::string& what) { throw ConfigError("gbdt: " + what); };
    if (n_estimators < 1) fail("n_estimators must be >= 1");
    if (max_depth < 1) fail("max_depth must be >= 1");
    if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
    if (!(reg_lambda >= 0.0)) fail("reg_lambda must be >= 0");
    if (!(reg_alpha >= 0.0)) fail("reg_alpha must be >= 0");
    if (!(subsample > 0.0 && subsample <= 1.0)) fail("subsample must be in (0, 1]");
    if (!(scale_pos_weight > 0.0)) fail("scale_pos_weight must be > 0");
    if (!(min_child_weight >= 0.0)) fail("min_child_weight must be >= 0");
    if (!(gamma >= 0.0)) fail("gamma must be >= 0");
}

const std::vector<std::string>& param_names() {
    static const std::vector<std::string> names{
        "n_estimators", "max_depth",        "learning_rate",    "reg_lambda", "reg_alpha",
        "subsample",    "scale_pos_weight", "min_child_weight", "gamma",      "seed"};
    return names;
}

void set_param(GbdtParams& p, std::string_view name, double value) {
    const auto as_int = [&] {
        if (value != std::floor(value)) {
            throw ConfigError("gbdt: " + std::string(name) + " must be an integer");
        }
        return static_cast<int>(value);
    };
    if (name == "n_estimators") p.n_estimators = as_int();
    else if (name == "max_depth") p.max_depth = as_int();
    else if (name == "learning_rate") p.learning_rate = value;
    else if (name == "reg_lambda") p.reg_lambda = value;
    else if (name == "reg_alpha" || name == "reg_alfa") p.reg_alpha = value;
    else if (name == "subsample") p.subsample = value;
    else if (name == "scale_pos_weight") p.scale_pos_weight = value;
    else if (name == "min_child_weight") p.min_child_weight = value;
    else if (name == "gamma") p.gamma = value;
    else if (name == "seed") p.seed = static_cast<std::uint64_t>(as_int());
    else throw ConfigError("gbdt: unknown parameter '" + std::string(name) + "'");
}

double get_param(const GbdtParams& p, std::string_view name) {
    if (name == "n_estimators") return p.n_estimators;
    if (name == "max_depth") return p.max_depth;
    if (name == "learning_rate") return p.learning_rate;
    if (name == "reg_lambda") return p.reg_lambda;
    if (name == "reg_alpha" || name == "reg_alfa") return p.reg_alpha;
    if (name == "subsample") return p.subsample;
    if (name == "scale_pos_weight") return p.scale_pos_weight;
    if (name == "min_child_weight") return p.min_child_weight;
    if (name == "gamma") return p.gamma;
    if (name == "seed") return static_cast<double>(p.seed);
    throw ConfigError("gbdt: unknown parameter '" + std::string(name) + "'");
}

double sigmoid(double margin) {
    if (margin >= 0.0) return 1.0 / (1.0 + std::exp(-margin));
    const double e = std::exp(margin);
    return e / (1.0 + e);
}

namespace {

double soft_threshold(double g, double alpha) {
    if (g > alpha) return g - alpha;
    if (g < -alpha) return g + alpha;
    return 0.0;
}

double node_score(double g, double h, const GbdtParams& p) {
    const double denom = h + p.reg_lambda;
    if (!(denom > 0.0)) return 0.0;
    const double t = soft_threshold(g, p.reg_alpha);
    return t * t / denom;
}

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

struct SplitCandidate {
    double gain = 0.0;
    double threshold = 0.0;
    int feature = -1;
};

double midpoint(double a, double b) {
    const double m = a + (b - a) / 2.0;
    return a < m ? m : b;
}

}  // namespace

double split_gain(double gl, double hl, double gr, double hr, const GbdtParams& p) {
    return 0.5 * (node_score(gl, hl, p) + node_score(gr, hr, p) - node_score(gl + gr, hl + hr, p)) -
           p.gamma;
}

double leaf_weight(double g, double h, const GbdtParams& p) {
    const double denom = h + p.reg_lambda;
    if (!(denom > 0.0)) return 0.0;
    return -soft_threshold(g, p.reg_alpha) / denom;
}

double Tree::predict(std::span<const double> x) const {
    int n = 0;
    while (!nodes[static_cast<std::size_t>(n)].is_leaf()) {
        const auto& node = nodes[static_cast<std::size_t>(n)];
        const double v = x[static_cast<std::size_t>(node.feature)];
        if (std::isnan(v)) {
            n = node.default_left ? node.left : node.right;
        } else {
            n = v < node.threshold ? node.left : node.right;
        }
    }
    return nodes[static_cast<std::size_t>(n)].value;
}

int Tree::depth() const {
    std::vector<int> depth(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, depth[i]);
        if (!nodes[i].is_leaf()) {
            depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
            depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
        }
    }
    return deepest;
}

double GbdtModel::margin(std::span<const double> x) const {
    double m = base_logit;
    for (const auto& t : trees) m += t.predict(x);
    return m;
}

GbdtModel fit(const Matrix& X, std::span<const std::uint8_t> y, const GbdtParams& params,
              FitReport* report) {
    params.validate();
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();
    if (n == 0 || d == 0) throw ShapeError("gbdt fit: empty feature matrix");
    if (y.size() != n) {
        throw ShapeError("gbdt fit: " + std::to_string(n) + " rows but " +
                         std::to_string(y.size()) + " targets");
    }
    for (auto v : y) {
        if (v > 1) throw ShapeError("gbdt fit: targets must be 0 or 1");
    }

    GbdtModel model;
    model.params = params;
    model.n_features = d;
    model.base_logit = 0.0;

    const auto positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    if (report) {
        report->single_class = positives == 0 || positives == n;
        report->train_loss.clear();
    }

    // Sort every feature once; each level then scans these orders.
    std::vector<std::vector<std::uint32_t>> order(d);
    parallel_for(d, params.threads, [&](std::size_t f) {
        auto& o = order[f];
        o.resize(n);
        std::iota(o.begin(), o.end(), 0u);
        std::stable_sort(o.begin(), o.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return X(a, f) < X(b, f); });
    });

    std::vector<double> weight(n), margin(n, model.base_logit), grad(n), hess(n);
    for (std::size_t i = 0; i < n; ++i) weight[i] = y[i] ? params.scale_pos_weight : 1.0;
    const double weight_sum = std::accumulate(weight.begin(), weight.end(), 0.0);

    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
    const std::size_t sample_size =
        params.subsample >= 1.0
            ? n
            : std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(n))));

    std::vector<int> position(n);
    for (int round = 0; round < params.n_estimators; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            grad[i] = weight[i] * (p - static_cast<double>(y[i]));
            hess[i] = weight[i] * p * (1.0 - p);
        }

        if (sample_size < n) {
            std::fill(position.begin(), position.end(), -1);
            std::seed_seq seq{static_cast<std::uint32_t>(params.seed & 0xffffffffu),
                              static_cast<std::uint32_t>(params.seed >> 32),
                              static_cast<std::uint32_t>(round)};
            std::mt19937_64 rng(seq);
            std::vector<std::size_t> pool = all_rows;
            for (std::size_t k = 0; k < sample_size; ++k) {
                std::uniform_int_distribution<std::size_t> pick(k, n - 1);
                std::swap(pool[k], pool[pick(rng)]);
                position[pool[k]] = 0;
            }
        } else {
            std::fill(position.begin(), position.end(), 0);
        }

        Tree tree;
        std::vector<double> node_g, node_h;
        tree.nodes.emplace_back();
        node_g.push_back(0.0);
        node_h.push_back(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (position[i] == 0) {
                node_g[0] += grad[i];
                node_h[0] += hess[i];
            }
        }

        std::vector<int> frontier{0};
        for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
            std::vector<int> slot_of(tree.nodes.size(), -1);
            for (std::size_t s = 0; s < frontier.size(); ++s) {
                slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
            }
            const std::size_t slots = frontier.size();

            // best[f][slot]: lowest-threshold maximum for feature f.
            std::vector<std::vector<SplitCandidate>> best(d, std::vector<SplitCandidate>(slots));
            parallel_for(d, params.threads, [&](std::size_t f) {
                struct Scan {
                    double g = 0.0, h = 0.0, last = 0.0;
                    bool any = false;
                };
                std::vector<Scan> scan(slots);
                auto& out = best[f];
                for (auto r : order[f]) {
                    const int node = position[r];
                    if (node < 0) continue;
                    const int slot = slot_of[static_cast<std::size_t>(node)];
                    if (slot < 0) continue;
                    auto& s = scan[static_cast<std::size_t>(slot)];
                    const double x = X(r, f);
                    if (s.any && x > s.last) {
                        const double gl = s.g, hl = s.h;
                        const double gr = node_g[static_cast<std::size_t>(node)] - gl;
                        const double hr = node_h[static_cast<std::size_t>(node)] - hl;
                        if (hl >= params.min_child_weight && hr >= params.min_child_weight) {
                            const double gain = split_gain(gl, hl, gr, hr, params);
                            auto& b = out[static_cast<std::size_t>(slot)];
                            if (gain > b.gain) {
                                b.gain = gain;
                                b.threshold = midpoint(s.last, x);
                                b.feature = static_cast<int>(f);
                            }
                        }
                    }
                    s.g += grad[r];
                    s.h += hess[r];
                    s.last = x;
                    s.any = true;
                }
            });

            std::vector<int> next;
            std::vector<int> split_slot(tree.nodes.size(), -1);
            for (std::size_t s = 0; s < slots; ++s) {
                SplitCandidate chosen;
                for (std::size_t f = 0; f < d; ++f) {
                    if (best[f][s].gain > chosen.gain) chosen = best[f][s];
                }
                if (chosen.feature < 0) continue;
                const auto id = static_cast<std::size_t>(frontier[s]);
                const int left = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                node_g.resize(tree.nodes.size(), 0.0);
                node_h.resize(tree.nodes.size(), 0.0);
                auto& node = tree.nodes[id];
                node.feature = chosen.feature;
                node.threshold = chosen.threshold;
                node.gain = chosen.gain;
                node.left = left;
                node.right = left + 1;
                next.push_back(left);
                next.push_back(left + 1);
            }
            if (next.empty()) break;
            for (std::size_t i = 0; i < n; ++i) {
                const int node = position[i];
                if (node < 0) continue;
                const auto& parent = tree.nodes[static_cast<std::size_t>(node)];
                if (parent.is_leaf()) continue;
                const int child = X(i, static_cast<std::size_t>(parent.feature)) < parent.threshold
                                      ? parent.left
                                      : parent.right;
                position[i] = child;
                node_g[static_cast<std::size_t>(child)] += grad[i];
                node_h[static_cast<std::size_t>(child)] += hess[i];
            }
            frontier = std::move(next);
        }

        for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
            auto& node = tree.nodes[id];
            node.cover = node_h[id];
            if (node.is_leaf()) {
                node.value = params.learning_rate * leaf_weight(node_g[id], node_h[id], params);
            }
        }

        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            margin[i] += tree.predict(X.row(i));
            if (report) loss += weight[i] * softplus(y[i] ? -margin[i] : margin[i]);
        }
        if (report) report->train_loss.push_back(loss / weight_sum);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

std::vector<double> predict_proba(const GbdtModel& model, const Matrix& X) {
    if (X.cols() != model.n_features && X.rows() > 0) {
        throw ShapeError("model expects " + std::to_string(model.n_features) + " features, got " +
                         std::to_string(X.cols()));
    }
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = sigmoid(model.margin(X.row(i)));
    return out;
}

std::vector<std::uint8_t> classify(std::span<const double> probabilities, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ConfigError("classification threshold must lie in (0, 1)");
    }
    std::vector<std::uint8_t> out(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        out[i] = probabilities[i] >= threshold ? 1 : 0;
    }
    return out;
}

std::vector<std::uint8_t> predict(const GbdtModel& model, const Matrix& X, double threshold) {
    return classify(predict_proba(model, X), threshold);
}

}  // namespace trendlab::gbdt
