#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uwiq/image.hpp"
#include "uwiq/mixing.hpp"

namespace uwiq {

// Dense row-major tensor; shape conventions per layer kind are documented
// next to layer_names().
struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        std::size_t n = 1;
        for (int d : shape) n *= static_cast<std::size_t>(d);
        v.assign(n, 0.0);
    }
    std::size_t size() const { return v.size(); }
};

// Scorer shape and training hyperparameters. The scorer is a stack of
// stride-1 3x3 conv blocks with ReLU and 2x2 max-pooling between blocks,
// a global average pool, two hidden FC layers and a scalar output.
struct RankerConfig {
    std::vector<int> conv_channels{8, 16, 32};
    int kernel_size = 3;
    std::vector<int> fc_widths{32, 16};  // hidden widths; scalar output follows
    double epsilon = 0.5;                // ranking margin
    double learning_rate = 1e-6;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int epochs = 20;
    std::uint64_t seed = 0;
    int train_max_side = 128;  // training images are downscaled to this cap
};

// Throws std::invalid_argument when shapes are inconsistent.
void validate_config(const RankerConfig& cfg);

struct RankerModel {
    int version = 1;
    RankerConfig config;
    std::vector<Tensor> params;  // order matches layer_names(config)

    std::size_t parameter_count() const;
};

// Fixed serialization order: convN.weight [out,in,k,k], convN.bias [out],
// then fcN.weight [out,in], fcN.bias [out], then out.weight [1,in],
// out.bias [1].
std::vector<std::string> layer_names(const RankerConfig& cfg);

struct QualityScore {
    double value = 0.0;
};

struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long t = 0;
};

AdamState make_adam_state(const RankerModel& model);

// Everything the backward pass (and kink-distance diagnostics) needs from
// one forward evaluation.
struct ForwardTrace {
    std::vector<Tensor> conv_in;    // input to conv block i (planar CHW)
    std::vector<Tensor> conv_pre;   // pre-ReLU conv outputs
    std::vector<Tensor> relu_out;   // post-ReLU maps (pool or GAP input)
    std::vector<std::vector<int>> pool_argmax;
    std::vector<double> gap_out;
    std::vector<std::vector<double>> fc_pre;  // pre-activation per FC layer
    double score = 0.0;
};

// Fan-in-scaled Gaussian init, deterministic in cfg.seed. Conv and hidden
// FC weights use sqrt(2/fan_in); the output layer is scaled down hard so a
// fresh scorer starts close to the zero function and rank training sets
// the readout direction rather than fighting a random one.
RankerModel init_model(const RankerConfig& cfg);

// Scalar quality score; accepts any image with both sides >= 8 px.
QualityScore forward(const RankerModel& model, const ImageRGB& img);

ForwardTrace forward_trace(const RankerModel& model, const ImageRGB& img);

// max(0, (s1 - s2) * gamma + epsilon); gamma must be +1 or -1.
double margin_rank_loss(double s1, double s2, int gamma, double epsilon);

// Gradients of the pair loss w.r.t. the shared parameters (both branches
// accumulated). Inactive hinge (including the kink itself) yields zeros.
// Returns the loss through *loss_out when non-null.
std::vector<Tensor> backward(const RankerModel& model, const RankedPair& pair,
                             double epsilon, double* loss_out = nullptr);

// Standard Adam with bias correction; increments state.t.
void adam_step(RankerModel& model, const std::vector<Tensor>& grads,
               AdamState& state, double lr);

struct TrainSample {
    std::string id;
    ImageRGB hq;
    ImageRGB lq;
};

struct TrainLog {
    std::vector<double> epoch_mean_loss;
};

// Per iteration: draw a fresh ratio pair, blend the sample twice, forward
// both branches, hinge loss, backward, Adam step (batch size 1). Sample
// order is reshuffled every epoch. Deterministic given cfg.seed.
TrainLog train(RankerModel& model, const std::vector<TrainSample>& dataset,
               const RankerConfig& cfg);

// Versioned JSON round trip of config and weights. load_model throws on
// version mismatch or any corruption; it never returns a partial model.
void save_model(const RankerModel& model, const std::string& path);
RankerModel load_model(const std::string& path);

}  // namespace uwiq
