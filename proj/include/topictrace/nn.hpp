#pragma once

#include "topictrace/corpus.hpp"
#include "topictrace/text.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace topictrace::nn {

// Dense row-major matrix of doubles. Activations use rows = channels,
// cols = positions; batch outputs use rows = samples.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), v(std::size_t(r) * std::size_t(c), 0.0) {}

    double& at(int r, int c) { return v[std::size_t(r) * std::size_t(cols) + std::size_t(c)]; }
    double at(int r, int c) const { return v[std::size_t(r) * std::size_t(cols) + std::size_t(c)]; }
    double* row(int r) { return v.data() + std::size_t(r) * std::size_t(cols); }
    const double* row(int r) const { return v.data() + std::size_t(r) * std::size_t(cols); }
};

struct EmbeddingSpec {
    int vocab_size = 0;
    int dim = 0;
};
struct Conv1dSpec {
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 0;
    bool relu = true;
};
struct MaxPoolSpec {
    int width = 2; // stride = width; output length = ceil(len / width)
};
struct GlobalMaxPoolSpec {};
struct DenseSpec {
    int in = 0;
    int out = 0;
};
struct SigmoidSpec {};

using LayerSpec =
    std::variant<EmbeddingSpec, Conv1dSpec, MaxPoolSpec, GlobalMaxPoolSpec, DenseSpec, SigmoidSpec>;

const char* layer_kind_name(const LayerSpec& spec);

struct Layer {
    LayerSpec spec;
    std::vector<double> w; // embedding: vocab*dim; conv: out*in*k; dense: out*in
    std::vector<double> b; // conv/dense bias
};

enum class Arch { ModelA, ModelB };

const char* arch_name(Arch a);

// Layer widths. The paper fixes the layer counts; kernel/channel sizes are
// free, so they stay configurable (the gradient-check harness runs the same
// topology at toy sizes).
struct ModelShape {
    int embed_dim = 32;
    std::vector<int> conv_channels;
    std::vector<int> conv_kernels;
    int pool_width = 2;

    static ModelShape model_a_default(); // convs 32->64 k3, 64->64 k4
    static ModelShape model_b_default(); // convs k3,k3,k3,k3, pools width 2
};

struct Network {
    Arch arch = Arch::ModelB;
    int vocab_size = 0;
    int num_outputs = 1;
    std::uint64_t seed = 0;
    ModelShape shape;
    std::vector<Layer> layers;
    std::vector<std::string> label_names; // modelA: tag per output; modelB: {target_tag}
};

// modelA: embedding -> conv1d x2 -> global_maxpool -> dense(num_tags) -> sigmoid
// modelB: embedding -> conv1d -> maxpool -> conv1d -> conv1d -> maxpool
//         -> conv1d -> global_maxpool -> dense(1) -> sigmoid
// Weights: uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)); biases zero.
Network init_network(Arch arch, int vocab_size, int num_outputs, std::uint64_t seed,
                     const ModelShape* shape_override = nullptr);

// Minimum input length the conv/pool stack can digest.
int min_input_length(const Network& net);

// Valid cross-correlation: out[o,t] = bias[o] + sum_{i,j} kernel[o,i,j] * input[i,t+j],
// then ReLU when requested. kernel is flat [out][in][k].
Mat conv1d_forward(const Mat& input, const std::vector<double>& kernel, int out_channels,
                   int kernel_width, const std::vector<double>& bias, bool relu);

struct SampleTrace {
    std::vector<Mat> outputs;            // one per layer
    std::vector<std::vector<int>> arg;   // pool layers: winning input position per output element
};

struct ForwardCache {
    std::vector<text::EncodedText> inputs;
    std::vector<SampleTrace> traces;
    Mat probs; // batch x num_outputs
};

Mat forward(const Network& net, std::span<const text::EncodedText> batch,
            ForwardCache* cache = nullptr);

// Mean over all entries of -[y ln p + (1-y) ln(1-p)], p clamped to [1e-7, 1-1e-7].
double bce_loss(const Mat& probs, const Mat& labels);

struct Gradients {
    std::vector<std::vector<double>> w; // parallel to net.layers
    std::vector<std::vector<double>> b;
};

Gradients backward(const Network& net, const ForwardCache& cache, const Mat& labels);

struct TrainConfig {
    int epochs = 20;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double l2_weight = 1e-5;
    int early_stop_patience = 3;
    std::uint64_t seed = 0;
};

struct Metrics {
    double bce_loss = 0.0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double multilabel_accuracy = 0.0; // exact match over the full label vector
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    Metrics val;
};

struct Dataset {
    std::vector<text::EncodedText> inputs;
    Mat labels; // n x num_outputs

    std::size_t size() const { return inputs.size(); }
};

// Label columns follow label_tags: modelA passes the tag universe, modelB a
// single target tag.
Dataset make_dataset(const corpus::Corpus& c, const text::Vocabulary& vocab, int length,
                     const std::vector<std::string>& label_tags);

struct TrainResult {
    Network net; // parameters of the best-validation epoch
    std::vector<EpochStats> history;
};

// Adam with L2 weight decay, deterministic shuffling, early stop on val loss.
TrainResult train(Network net, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg);

Metrics evaluate(const Network& net, const Dataset& ds);

std::vector<double> score(const Network& net, const corpus::Document& doc,
                          const text::Vocabulary& vocab, int length);

// Documents whose modelB probability is strictly greater than the threshold,
// canonical order preserved.
corpus::Corpus topic_filter(const corpus::Corpus& c, const Network& model_b,
                            const text::Vocabulary& vocab, int length, double threshold = 0.999);

// Versioned JSON checkpoint; numbers round-trip exactly.
std::string checkpoint_to_json(const Network& net, int encode_length);
void save_checkpoint(const Network& net, int encode_length, const std::string& path);

struct Checkpoint {
    Network net;
    int encode_length = 64;
};
Checkpoint checkpoint_from_json(const std::string& content);
Checkpoint load_checkpoint(const std::string& path);

} // namespace topictrace::nn
