#include "topictrace/nn.hpp"

#include "topictrace/errors.hpp"
#include "topictrace/io.hpp"
#include "topictrace/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace topictrace::nn {

using nlohmann::json;

namespace {
constexpr double kBceEps = 1e-7;
} // namespace

const char* layer_kind_name(const LayerSpec& spec) {
    if (std::holds_alternative<EmbeddingSpec>(spec)) return "embedding";
    if (std::holds_alternative<Conv1dSpec>(spec)) return "conv1d";
    if (std::holds_alternative<MaxPoolSpec>(spec)) return "maxpool";
    if (std::holds_alternative<GlobalMaxPoolSpec>(spec)) return "global_maxpool";
    if (std::holds_alternative<DenseSpec>(spec)) return "dense";
    return "sigmoid";
}

const char* arch_name(Arch a) {
    return a == Arch::ModelA ? "modelA" : "modelB";
}

ModelShape ModelShape::model_a_default() {
    ModelShape s;
    s.embed_dim = 32;
    s.conv_channels = {64, 64};
    s.conv_kernels = {3, 4};
    s.pool_width = 2;
    return s;
}

ModelShape ModelShape::model_b_default() {
    ModelShape s;
    s.embed_dim = 32;
    s.conv_channels = {64, 64, 64, 64};
    s.conv_kernels = {3, 3, 3, 3};
    s.pool_width = 2;
    return s;
}

namespace {

std::vector<LayerSpec> build_specs(Arch arch, int vocab_size, int num_outputs,
                                   const ModelShape& shape) {
    const std::size_t n_convs = arch == Arch::ModelA ? 2 : 4;
    if (shape.conv_channels.size() != n_convs || shape.conv_kernels.size() != n_convs)
        throw ConfigError("model shape must define one channel count and kernel per conv layer");

    std::vector<LayerSpec> specs;
    specs.push_back(EmbeddingSpec{vocab_size, shape.embed_dim});
    int ch = shape.embed_dim;
    auto conv = [&](std::size_t i) {
        specs.push_back(Conv1dSpec{ch, shape.conv_channels[i], shape.conv_kernels[i], true});
        ch = shape.conv_channels[i];
    };
    if (arch == Arch::ModelA) {
        conv(0);
        conv(1);
        specs.push_back(GlobalMaxPoolSpec{});
    } else {
        conv(0);
        specs.push_back(MaxPoolSpec{shape.pool_width});
        conv(1);
        conv(2);
        specs.push_back(MaxPoolSpec{shape.pool_width});
        conv(3);
        specs.push_back(GlobalMaxPoolSpec{});
    }
    specs.push_back(DenseSpec{ch, num_outputs});
    specs.push_back(SigmoidSpec{});
    return specs;
}

void init_uniform(std::vector<double>& w, double fan_in, double fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& x : w) x = rng.uniform(-a, a);
}

} // namespace

Network init_network(Arch arch, int vocab_size, int num_outputs, std::uint64_t seed,
                     const ModelShape* shape_override) {
    if (vocab_size < 2) throw ConfigError("vocab_size must be >= 2");
    if (arch == Arch::ModelB) num_outputs = 1;
    if (num_outputs < 1) throw ConfigError("num_outputs must be >= 1");

    Network net;
    net.arch = arch;
    net.vocab_size = vocab_size;
    net.num_outputs = num_outputs;
    net.seed = seed;
    net.shape = shape_override ? *shape_override
                               : (arch == Arch::ModelA ? ModelShape::model_a_default()
                                                       : ModelShape::model_b_default());
    if (net.shape.embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
    if (net.shape.pool_width < 1) throw ConfigError("pool_width must be >= 1");
    for (int k : net.shape.conv_kernels)
        if (k < 1) throw ConfigError("conv kernel must be >= 1");
    for (int c : net.shape.conv_channels)
        if (c < 1) throw ConfigError("conv channels must be >= 1");

    Rng rng(seed);
    for (const auto& spec : build_specs(arch, vocab_size, num_outputs, net.shape)) {
        Layer layer;
        layer.spec = spec;
        if (auto* e = std::get_if<EmbeddingSpec>(&spec)) {
            layer.w.assign(std::size_t(e->vocab_size) * std::size_t(e->dim), 0.0);
            init_uniform(layer.w, e->vocab_size, e->dim, rng);
        } else if (auto* c = std::get_if<Conv1dSpec>(&spec)) {
            layer.w.assign(std::size_t(c->out_channels) * std::size_t(c->in_channels) *
                               std::size_t(c->kernel),
                           0.0);
            init_uniform(layer.w, double(c->in_channels) * c->kernel,
                         double(c->out_channels) * c->kernel, rng);
            layer.b.assign(std::size_t(c->out_channels), 0.0);
        } else if (auto* d = std::get_if<DenseSpec>(&spec)) {
            layer.w.assign(std::size_t(d->out) * std::size_t(d->in), 0.0);
            init_uniform(layer.w, d->in, d->out, rng);
            layer.b.assign(std::size_t(d->out), 0.0);
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

int min_input_length(const Network& net) {
    int required = 1;
    for (auto it = net.layers.rbegin(); it != net.layers.rend(); ++it) {
        if (auto* c = std::get_if<Conv1dSpec>(&it->spec)) {
            required += c->kernel - 1;
        } else if (auto* p = std::get_if<MaxPoolSpec>(&it->spec)) {
            required = (required - 1) * p->width + 1;
        }
    }
    return required;
}

Mat conv1d_forward(const Mat& input, const std::vector<double>& kernel, int out_channels,
                   int kernel_width, const std::vector<double>& bias, bool relu) {
    const int in_channels = input.rows;
    const int length = input.cols;
    if (length < kernel_width)
        throw NumericError("conv1d: input length " + std::to_string(length) +
                           " shorter than kernel " + std::to_string(kernel_width));
    if (kernel.size() != std::size_t(out_channels) * std::size_t(in_channels) * std::size_t(kernel_width))
        throw NumericError("conv1d: kernel size mismatch");
    if (bias.size() != std::size_t(out_channels)) throw NumericError("conv1d: bias size mismatch");

    const int out_len = length - kernel_width + 1;
    Mat out(out_channels, out_len);
    for (int o = 0; o < out_channels; ++o) {
        double* orow = out.row(o);
        for (int t = 0; t < out_len; ++t) orow[t] = bias[std::size_t(o)];
        for (int i = 0; i < in_channels; ++i) {
            const double* irow = input.row(i);
            const double* kbase =
                kernel.data() + (std::size_t(o) * std::size_t(in_channels) + std::size_t(i)) *
                                    std::size_t(kernel_width);
            for (int j = 0; j < kernel_width; ++j) {
                const double kv = kbase[j];
                const double* shifted = irow + j;
                for (int t = 0; t < out_len; ++t) orow[t] += kv * shifted[t];
            }
        }
        if (relu) {
            for (int t = 0; t < out_len; ++t) orow[t] = std::max(0.0, orow[t]);
        }
    }
    return out;
}

namespace {

Mat embedding_forward(const Layer& layer, const text::EncodedText& x) {
    const auto& spec = std::get<EmbeddingSpec>(layer.spec);
    const int length = int(x.ids.size());
    Mat out(spec.dim, length);
    for (int t = 0; t < length; ++t) {
        const std::int32_t id = x.ids[std::size_t(t)];
        if (id < 0 || id >= spec.vocab_size)
            throw DataError("token id " + std::to_string(id) + " outside vocabulary of size " +
                            std::to_string(spec.vocab_size));
        const double* erow = layer.w.data() + std::size_t(id) * std::size_t(spec.dim);
        for (int c = 0; c < spec.dim; ++c) out.at(c, t) = erow[c];
    }
    return out;
}

Mat maxpool_forward(const Mat& input, int width, std::vector<int>* arg) {
    const int out_len = (input.cols + width - 1) / width; // ceil: last window may be narrower
    Mat out(input.rows, out_len);
    if (arg) arg->assign(std::size_t(input.rows) * std::size_t(out_len), 0);
    for (int c = 0; c < input.rows; ++c) {
        const double* irow = input.row(c);
        for (int t = 0; t < out_len; ++t) {
            const int lo = t * width;
            const int hi = std::min(input.cols, lo + width);
            int best = lo;
            for (int u = lo + 1; u < hi; ++u)
                if (irow[u] > irow[best]) best = u;
            out.at(c, t) = irow[best];
            if (arg) (*arg)[std::size_t(c) * std::size_t(out_len) + std::size_t(t)] = best;
        }
    }
    return out;
}

Mat global_maxpool_forward(const Mat& input, std::vector<int>* arg) {
    Mat out(input.rows, 1);
    if (arg) arg->assign(std::size_t(input.rows), 0);
    for (int c = 0; c < input.rows; ++c) {
        const double* irow = input.row(c);
        int best = 0;
        for (int u = 1; u < input.cols; ++u)
            if (irow[u] > irow[best]) best = u;
        out.at(c, 0) = irow[best];
        if (arg) (*arg)[std::size_t(c)] = best;
    }
    return out;
}

Mat dense_forward(const Layer& layer, const Mat& input) {
    const auto& spec = std::get<DenseSpec>(layer.spec);
    if (input.rows != spec.in || input.cols != 1)
        throw NumericError("dense: expected input vector of size " + std::to_string(spec.in));
    Mat out(spec.out, 1);
    for (int o = 0; o < spec.out; ++o) {
        const double* wrow = layer.w.data() + std::size_t(o) * std::size_t(spec.in);
        double acc = layer.b[std::size_t(o)];
        for (int i = 0; i < spec.in; ++i) acc += wrow[i] * input.at(i, 0);
        out.at(o, 0) = acc;
    }
    return out;
}

SampleTrace run_sample(const Network& net, const text::EncodedText& x) {
    SampleTrace trace;
    trace.outputs.reserve(net.layers.size());
    trace.arg.resize(net.layers.size());
    const Mat* current = nullptr;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const Layer& layer = net.layers[li];
        Mat out;
        if (std::holds_alternative<EmbeddingSpec>(layer.spec)) {
            out = embedding_forward(layer, x);
        } else if (auto* c = std::get_if<Conv1dSpec>(&layer.spec)) {
            out = conv1d_forward(*current, layer.w, c->out_channels, c->kernel, layer.b, c->relu);
        } else if (auto* p = std::get_if<MaxPoolSpec>(&layer.spec)) {
            out = maxpool_forward(*current, p->width, &trace.arg[li]);
        } else if (std::holds_alternative<GlobalMaxPoolSpec>(layer.spec)) {
            out = global_maxpool_forward(*current, &trace.arg[li]);
        } else if (std::holds_alternative<DenseSpec>(layer.spec)) {
            out = dense_forward(layer, *current);
        } else { // sigmoid
            out = *current;
            for (auto& v : out.v) v = 1.0 / (1.0 + std::exp(-v));
        }
        trace.outputs.push_back(std::move(out));
        current = &trace.outputs.back();
    }
    return trace;
}

} // namespace

Mat forward(const Network& net, std::span<const text::EncodedText> batch, ForwardCache* cache) {
    if (batch.empty()) throw NumericError("forward: empty batch");
    Mat probs(int(batch.size()), net.num_outputs);
    if (cache) {
        cache->inputs.assign(batch.begin(), batch.end());
        cache->traces.clear();
        cache->traces.reserve(batch.size());
    }
    for (std::size_t s = 0; s < batch.size(); ++s) {
        SampleTrace trace = run_sample(net, batch[s]);
        const Mat& final_out = trace.outputs.back();
        if (final_out.rows != net.num_outputs || final_out.cols != 1)
            throw NumericError("forward: output shape mismatch");
        for (int o = 0; o < net.num_outputs; ++o) probs.at(int(s), o) = final_out.at(o, 0);
        if (cache) cache->traces.push_back(std::move(trace));
    }
    if (cache) cache->probs = probs;
    return probs;
}

double bce_loss(const Mat& probs, const Mat& labels) {
    if (probs.rows != labels.rows || probs.cols != labels.cols)
        throw NumericError("bce_loss: shape mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.v.size(); ++i) {
        const double p = std::clamp(probs.v[i], kBceEps, 1.0 - kBceEps);
        const double y = labels.v[i];
        sum += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    }
    return sum / double(probs.v.size());
}

Gradients backward(const Network& net, const ForwardCache& cache, const Mat& labels) {
    const int batch_n = int(cache.inputs.size());
    if (cache.probs.rows != batch_n || labels.rows != batch_n || labels.cols != net.num_outputs)
        throw NumericError("backward: cache/labels mismatch");
    if (cache.traces.size() != std::size_t(batch_n))
        throw NumericError("backward: stale cache");

    Gradients grads;
    grads.w.resize(net.layers.size());
    grads.b.resize(net.layers.size());
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        grads.w[li].assign(net.layers[li].w.size(), 0.0);
        grads.b[li].assign(net.layers[li].b.size(), 0.0);
    }

    const double scale = 1.0 / double(std::size_t(batch_n) * std::size_t(net.num_outputs));

    for (int s = 0; s < batch_n; ++s) {
        const SampleTrace& trace = cache.traces[std::size_t(s)];

        // d(mean BCE)/d(pre-sigmoid) = (p - y) * scale
        Mat grad(net.num_outputs, 1);
        for (int o = 0; o < net.num_outputs; ++o)
            grad.at(o, 0) = (cache.probs.at(s, o) - labels.at(s, o)) * scale;

        for (int li = int(net.layers.size()) - 2; li >= 0; --li) {
            const Layer& layer = net.layers[li];
            const Mat& out = trace.outputs[std::size_t(li)];
            const Mat* input = li > 0 ? &trace.outputs[std::size_t(li) - 1] : nullptr;

            if (auto* d = std::get_if<DenseSpec>(&layer.spec)) {
                Mat gin(d->in, 1);
                for (int o = 0; o < d->out; ++o) {
                    const double go = grad.at(o, 0);
                    grads.b[std::size_t(li)][std::size_t(o)] += go;
                    const double* wrow = layer.w.data() + std::size_t(o) * std::size_t(d->in);
                    double* gwrow = grads.w[std::size_t(li)].data() + std::size_t(o) * std::size_t(d->in);
                    for (int i = 0; i < d->in; ++i) {
                        gwrow[i] += go * input->at(i, 0);
                        gin.at(i, 0) += go * wrow[i];
                    }
                }
                grad = std::move(gin);
            } else if (std::holds_alternative<GlobalMaxPoolSpec>(layer.spec)) {
                Mat gin(input->rows, input->cols);
                const auto& arg = trace.arg[std::size_t(li)];
                for (int c = 0; c < input->rows; ++c)
                    gin.at(c, arg[std::size_t(c)]) += grad.at(c, 0);
                grad = std::move(gin);
            } else if (std::holds_alternative<MaxPoolSpec>(layer.spec)) {
                Mat gin(input->rows, input->cols);
                const auto& arg = trace.arg[std::size_t(li)];
                for (int c = 0; c < out.rows; ++c)
                    for (int t = 0; t < out.cols; ++t)
                        gin.at(c, arg[std::size_t(c) * std::size_t(out.cols) + std::size_t(t)]) +=
                            grad.at(c, t);
                grad = std::move(gin);
            } else if (auto* cs = std::get_if<Conv1dSpec>(&layer.spec)) {
                // ReLU mask: output is zero exactly where the preactivation was <= 0
                Mat gpre = grad;
                if (cs->relu) {
                    for (std::size_t i = 0; i < gpre.v.size(); ++i)
                        if (out.v[i] <= 0.0) gpre.v[i] = 0.0;
                }
                const int out_len = out.cols;
                Mat gin(input->rows, input->cols);
                for (int o = 0; o < cs->out_channels; ++o) {
                    const double* grow = gpre.row(o);
                    double acc_b = 0.0;
                    for (int t = 0; t < out_len; ++t) acc_b += grow[t];
                    grads.b[std::size_t(li)][std::size_t(o)] += acc_b;
                    for (int i = 0; i < cs->in_channels; ++i) {
                        const double* irow = input->row(i);
                        double* ginrow = gin.row(i);
                        const std::size_t kbase =
                            (std::size_t(o) * std::size_t(cs->in_channels) + std::size_t(i)) *
                            std::size_t(cs->kernel);
                        for (int j = 0; j < cs->kernel; ++j) {
                            double acc_w = 0.0;
                            const double* shifted = irow + j;
                            for (int t = 0; t < out_len; ++t) acc_w += grow[t] * shifted[t];
                            grads.w[std::size_t(li)][kbase + std::size_t(j)] += acc_w;
                            const double kv = layer.w[kbase + std::size_t(j)];
                            double* gshift = ginrow + j;
                            for (int t = 0; t < out_len; ++t) gshift[t] += kv * grow[t];
                        }
                    }
                }
                grad = std::move(gin);
            } else if (auto* e = std::get_if<EmbeddingSpec>(&layer.spec)) {
                const auto& ids = cache.inputs[std::size_t(s)].ids;
                for (int t = 0; t < int(ids.size()); ++t) {
                    double* egrow = grads.w[std::size_t(li)].data() +
                                    std::size_t(ids[std::size_t(t)]) * std::size_t(e->dim);
                    for (int c = 0; c < e->dim; ++c) egrow[c] += grad.at(c, t);
                }
            }
        }
    }
    return grads;
}

Dataset make_dataset(const corpus::Corpus& c, const text::Vocabulary& vocab, int length,
                     const std::vector<std::string>& label_tags) {
    if (label_tags.empty()) throw ConfigError("make_dataset: no label tags");
    Dataset ds;
    ds.inputs.reserve(c.size());
    ds.labels = Mat(int(c.size()), int(label_tags.size()));
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& doc = c.documents[i];
        ds.inputs.push_back(text::encode(text::tokenize(doc.text), vocab, length));
        for (std::size_t t = 0; t < label_tags.size(); ++t)
            ds.labels.at(int(i), int(t)) = doc.has_tag(label_tags[t]) ? 1.0 : 0.0;
    }
    return ds;
}

namespace {

struct AdamState {
    std::vector<std::vector<double>> mw, vw, mb, vb;
    long step = 0;

    explicit AdamState(const Network& net) {
        mw.resize(net.layers.size());
        vw.resize(net.layers.size());
        mb.resize(net.layers.size());
        vb.resize(net.layers.size());
        for (std::size_t li = 0; li < net.layers.size(); ++li) {
            mw[li].assign(net.layers[li].w.size(), 0.0);
            vw[li].assign(net.layers[li].w.size(), 0.0);
            mb[li].assign(net.layers[li].b.size(), 0.0);
            vb[li].assign(net.layers[li].b.size(), 0.0);
        }
    }
};

void adam_update(std::vector<double>& w, const std::vector<double>& g, std::vector<double>& m,
                 std::vector<double>& v, long step, const TrainConfig& cfg, double l2) {
    const double bc1 = 1.0 - std::pow(cfg.beta1, double(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, double(step));
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = g[i] + l2 * w[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
        w[i] -= cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_epsilon);
    }
}

Mat label_rows(const Mat& labels, const std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi) {
    Mat out(int(hi - lo), labels.cols);
    for (std::size_t r = lo; r < hi; ++r)
        for (int c = 0; c < labels.cols; ++c) out.at(int(r - lo), c) = labels.at(int(idx[r]), c);
    return out;
}

} // namespace

TrainResult train(Network net, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg) {
    if (train_set.size() == 0) throw ConfigError("train: empty training set");
    if (cfg.epochs < 1 || cfg.batch_size < 1) throw ConfigError("train: bad epochs/batch_size");
    if (!(cfg.beta1 > 0 && cfg.beta1 < 1 && cfg.beta2 > 0 && cfg.beta2 < 1))
        throw ConfigError("train: adam betas must lie in (0,1)");
    if (cfg.learning_rate < 0 || cfg.l2_weight < 0 || cfg.early_stop_patience < 0)
        throw ConfigError("train: negative hyperparameter");
    if (train_set.labels.cols != net.num_outputs)
        throw ConfigError("train: label width does not match network outputs");

    Rng rng(cfg.seed);
    AdamState adam(net);
    TrainResult result;
    Network best = net;
    double best_val = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        long n_batches = 0;

        for (std::size_t lo = 0; lo < order.size(); lo += std::size_t(cfg.batch_size)) {
            const std::size_t hi = std::min(order.size(), lo + std::size_t(cfg.batch_size));
            std::vector<text::EncodedText> batch;
            batch.reserve(hi - lo);
            for (std::size_t r = lo; r < hi; ++r)
                batch.push_back(train_set.inputs[order[r]]);
            const Mat batch_labels = label_rows(train_set.labels, order, lo, hi);

            ForwardCache cache;
            const Mat probs = forward(net, batch, &cache);
            loss_sum += bce_loss(probs, batch_labels);
            ++n_batches;

            const Gradients grads = backward(net, cache, batch_labels);
            ++adam.step;
            for (std::size_t li = 0; li < net.layers.size(); ++li) {
                if (!net.layers[li].w.empty())
                    adam_update(net.layers[li].w, grads.w[li], adam.mw[li], adam.vw[li], adam.step,
                                cfg, cfg.l2_weight);
                if (!net.layers[li].b.empty())
                    adam_update(net.layers[li].b, grads.b[li], adam.mb[li], adam.vb[li], adam.step,
                                cfg, 0.0); // no decay on biases
            }
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / double(n_batches);
        if (val_set.size() > 0) {
            stats.val = evaluate(net, val_set);
            stats.val_loss = stats.val.bce_loss;
        } else {
            stats.val_loss = stats.train_loss;
        }
        result.history.push_back(stats);

        if (stats.val_loss < best_val) {
            best_val = stats.val_loss;
            best = net;
            stale_epochs = 0;
        } else {
            ++stale_epochs;
            if (stale_epochs >= cfg.early_stop_patience) break;
        }
    }

    result.net = std::move(best);
    return result;
}

Metrics evaluate(const Network& net, const Dataset& ds) {
    if (ds.size() == 0) throw ConfigError("evaluate: empty dataset");
    constexpr std::size_t kChunk = 256;
    Metrics m;
    double loss_sum = 0.0;
    long tp = 0, fp = 0, tn = 0, fn = 0, exact_rows = 0;

    for (std::size_t lo = 0; lo < ds.size(); lo += kChunk) {
        const std::size_t hi = std::min(ds.size(), lo + kChunk);
        std::span<const text::EncodedText> chunk(ds.inputs.data() + lo, hi - lo);
        const Mat probs = forward(net, chunk);
        for (std::size_t r = lo; r < hi; ++r) {
            bool row_exact = true;
            for (int c = 0; c < probs.cols; ++c) {
                const double p = std::clamp(probs.at(int(r - lo), c), kBceEps, 1.0 - kBceEps);
                const double y = ds.labels.at(int(r), c);
                loss_sum += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
                const bool pred = probs.at(int(r - lo), c) > 0.5;
                const bool truth = y > 0.5;
                if (pred && truth) ++tp;
                else if (pred && !truth) ++fp;
                else if (!pred && truth) ++fn;
                else ++tn;
                if (pred != truth) row_exact = false;
            }
            if (row_exact) ++exact_rows;
        }
    }

    const double total = double(tp + fp + tn + fn);
    m.bce_loss = loss_sum / total;
    m.accuracy = double(tp + tn) / total;
    m.precision = (tp + fp) > 0 ? double(tp) / double(tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? double(tp) / double(tp + fn) : 0.0;
    m.multilabel_accuracy = double(exact_rows) / double(ds.size());
    return m;
}

std::vector<double> score(const Network& net, const corpus::Document& doc,
                          const text::Vocabulary& vocab, int length) {
    const text::EncodedText enc = text::encode(text::tokenize(doc.text), vocab, length);
    const Mat probs = forward(net, std::span<const text::EncodedText>(&enc, 1));
    std::vector<double> out(std::size_t(probs.cols));
    for (int c = 0; c < probs.cols; ++c) out[std::size_t(c)] = probs.at(0, c);
    return out;
}

corpus::Corpus topic_filter(const corpus::Corpus& c, const Network& model_b,
                            const text::Vocabulary& vocab, int length, double threshold) {
    if (model_b.num_outputs != 1)
        throw ConfigError("topic_filter: expected a binary (modelB) network");
    std::vector<corpus::Document> kept;
    for (const auto& doc : c.documents) {
        if (score(model_b, doc, vocab, length)[0] > threshold) kept.push_back(doc);
    }
    return corpus::make_corpus(std::move(kept), c.range_start, c.range_end);
}

std::string checkpoint_to_json(const Network& net, int encode_length) {
    json j;
    j["version"] = 1;
    j["arch"] = arch_name(net.arch);
    j["vocab_size"] = net.vocab_size;
    j["seed"] = net.seed;
    j["encode_length"] = encode_length;
    j["labels"] = net.label_names;
    j["shape"] = {{"embed_dim", net.shape.embed_dim},
                  {"conv_channels", net.shape.conv_channels},
                  {"conv_kernels", net.shape.conv_kernels},
                  {"pool_width", net.shape.pool_width}};
    json layers = json::array();
    for (const auto& layer : net.layers) {
        json lj;
        lj["kind"] = layer_kind_name(layer.spec);
        if (auto* e = std::get_if<EmbeddingSpec>(&layer.spec)) {
            lj["shape"] = {e->vocab_size, e->dim};
        } else if (auto* c = std::get_if<Conv1dSpec>(&layer.spec)) {
            lj["shape"] = {c->out_channels, c->in_channels, c->kernel};
            lj["relu"] = c->relu;
        } else if (auto* p = std::get_if<MaxPoolSpec>(&layer.spec)) {
            lj["shape"] = {p->width};
        } else if (auto* d = std::get_if<DenseSpec>(&layer.spec)) {
            lj["shape"] = {d->out, d->in};
        } else {
            lj["shape"] = json::array();
        }
        if (!layer.w.empty()) lj["values"] = layer.w;
        if (!layer.b.empty()) lj["bias"] = layer.b;
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    return j.dump() + "\n";
}

void save_checkpoint(const Network& net, int encode_length, const std::string& path) {
    io::write_text_file_atomic(path, checkpoint_to_json(net, encode_length));
}

Checkpoint checkpoint_from_json(const std::string& content) {
    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("invalid checkpoint JSON: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != 1) throw DataError("unsupported checkpoint version");
        const std::string arch_str = j.at("arch").get<std::string>();
        Arch arch;
        if (arch_str == "modelA") arch = Arch::ModelA;
        else if (arch_str == "modelB") arch = Arch::ModelB;
        else throw DataError("unknown arch \"" + arch_str + "\"");

        ModelShape shape;
        const auto& sj = j.at("shape");
        shape.embed_dim = sj.at("embed_dim").get<int>();
        shape.conv_channels = sj.at("conv_channels").get<std::vector<int>>();
        shape.conv_kernels = sj.at("conv_kernels").get<std::vector<int>>();
        shape.pool_width = sj.at("pool_width").get<int>();

        const auto labels = j.at("labels").get<std::vector<std::string>>();
        const int num_outputs = arch == Arch::ModelA ? int(labels.size()) : 1;

        Checkpoint ck;
        ck.net = init_network(arch, j.at("vocab_size").get<int>(), num_outputs,
                              j.at("seed").get<std::uint64_t>(), &shape);
        ck.net.label_names = labels;
        ck.encode_length = j.at("encode_length").get<int>();

        const auto& layers = j.at("layers");
        if (layers.size() != ck.net.layers.size()) throw DataError("checkpoint layer count mismatch");
        for (std::size_t li = 0; li < ck.net.layers.size(); ++li) {
            auto& layer = ck.net.layers[li];
            const auto& lj = layers[li];
            if (lj.at("kind").get<std::string>() != layer_kind_name(layer.spec))
                throw DataError("checkpoint layer kind mismatch at index " + std::to_string(li));
            if (!layer.w.empty()) {
                const auto values = lj.at("values").get<std::vector<double>>();
                if (values.size() != layer.w.size())
                    throw DataError("checkpoint tensor size mismatch at index " + std::to_string(li));
                layer.w = values;
            }
            if (!layer.b.empty()) {
                const auto bias = lj.at("bias").get<std::vector<double>>();
                if (bias.size() != layer.b.size())
                    throw DataError("checkpoint bias size mismatch at index " + std::to_string(li));
                layer.b = bias;
            }
        }
        return ck;
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    return checkpoint_from_json(io::read_text_file(path));
}

} // namespace topictrace::nn
