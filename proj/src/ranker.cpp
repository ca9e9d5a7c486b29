#include "uwiq/ranker.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "uwiq/kernels.hpp"
#include "uwiq/rng.hpp"

namespace uwiq {

using nlohmann::json;

namespace {

constexpr int kMinSide = 8;

int gap_dim(const RankerConfig& cfg) { return cfg.conv_channels.back(); }

// Expected parameter tensor shapes in serialization order.
std::vector<std::vector<int>> layer_shapes(const RankerConfig& cfg) {
    std::vector<std::vector<int>> shapes;
    int in_ch = 3;
    for (int out_ch : cfg.conv_channels) {
        shapes.push_back({out_ch, in_ch, cfg.kernel_size, cfg.kernel_size});
        shapes.push_back({out_ch});
        in_ch = out_ch;
    }
    int in_dim = gap_dim(cfg);
    for (int width : cfg.fc_widths) {
        shapes.push_back({width, in_dim});
        shapes.push_back({width});
        in_dim = width;
    }
    shapes.push_back({1, in_dim});
    shapes.push_back({1});
    return shapes;
}

std::vector<double> planar_from_image(const ImageRGB& img) {
    const std::size_t n = img.pixel_count();
    std::vector<double> out(n * 3);
    for (int c = 0; c < 3; ++c) {
        double* plane = out.data() + c * n;
        for (std::size_t i = 0; i < n; ++i) plane[i] = img.data[3 * i + c];
    }
    return out;
}

// y = W x + b with W stored row-major [out, in].
std::vector<double> fc_apply(const Tensor& w, const Tensor& b,
                             const std::vector<double>& x) {
    const int out = w.shape[0];
    const int in = w.shape[1];
    std::vector<double> y(out);
    for (int o = 0; o < out; ++o) {
        double acc = b.v[o];
        const double* row = w.v.data() + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) acc += row[i] * x[i];
        y[o] = acc;
    }
    return y;
}

void check_grad_shapes(const RankerModel& model, const std::vector<Tensor>& grads) {
    if (grads.size() != model.params.size()) {
        throw std::invalid_argument("gradient list does not match parameter list");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (grads[i].shape != model.params[i].shape) {
            throw std::invalid_argument("gradient shape mismatch at tensor " +
                                        std::to_string(i));
        }
    }
}

// Accumulates dscore * (branch gradients) into acc.
void branch_backward(const RankerModel& model, const ForwardTrace& t, double dscore,
                     std::vector<Tensor>& acc) {
    const RankerConfig& cfg = model.config;
    const int nconv = static_cast<int>(cfg.conv_channels.size());
    const int base_fc = 2 * nconv;  // index of fc1.weight in params

    // FC stack backward. fc activations: gap -> fc1(ReLU) -> fc2(ReLU) -> out.
    std::vector<double> d_out{dscore};
    std::vector<double> d_in;
    std::vector<const std::vector<double>*> fc_inputs(3);
    std::vector<std::vector<double>> relu_cache(2);
    relu_cache[0].resize(t.fc_pre[0].size());
    relu_cache[1].resize(t.fc_pre[1].size());
    for (int l = 0; l < 2; ++l) {
        for (std::size_t i = 0; i < t.fc_pre[l].size(); ++i) {
            relu_cache[l][i] = t.fc_pre[l][i] > 0.0 ? t.fc_pre[l][i] : 0.0;
        }
    }
    fc_inputs[0] = &t.gap_out;
    fc_inputs[1] = &relu_cache[0];
    fc_inputs[2] = &relu_cache[1];

    for (int l = 2; l >= 0; --l) {
        const Tensor& w = model.params[base_fc + 2 * l];
        Tensor& gw = acc[base_fc + 2 * l];
        Tensor& gb = acc[base_fc + 2 * l + 1];
        const std::vector<double>& x = *fc_inputs[l];
        const int out = w.shape[0];
        const int in = w.shape[1];
        d_in.assign(in, 0.0);
        for (int o = 0; o < out; ++o) {
            const double g = d_out[o];
            gb.v[o] += g;
            if (g == 0.0) continue;
            const double* row = w.v.data() + static_cast<std::size_t>(o) * in;
            double* grow = gw.v.data() + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) {
                grow[i] += g * x[i];
                d_in[i] += g * row[i];
            }
        }
        if (l > 0) {
            // through the ReLU in front of this layer
            for (int i = 0; i < in; ++i) {
                if (t.fc_pre[l - 1][i] <= 0.0) d_in[i] = 0.0;
            }
        }
        d_out = d_in;
    }

    // d_out now holds the gradient w.r.t. gap_out. Spread over the last maps.
    const Tensor& last = t.relu_out.back();
    const int lc = last.shape[0], lh = last.shape[1], lw = last.shape[2];
    Tensor d_relu(last.shape);
    const double inv = 1.0 / (static_cast<double>(lh) * lw);
    for (int c = 0; c < lc; ++c) {
        const double g = d_out[c] * inv;
        double* plane = d_relu.v.data() + static_cast<std::size_t>(c) * lh * lw;
        for (int i = 0; i < lh * lw; ++i) plane[i] = g;
    }

    // Conv stack backward.
    for (int l = nconv - 1; l >= 0; --l) {
        const Tensor& pre = t.conv_pre[l];
        const Tensor& in = t.conv_in[l];
        const Tensor& w = model.params[2 * l];
        const int co = pre.shape[0], h = pre.shape[1], ww = pre.shape[2];
        const int ci = in.shape[0];

        Tensor d_pre(pre.shape);
        kern::relu_grad(pre.v.data(), d_relu.v.data(), d_pre.v.data(), pre.size());

        Tensor gw(w.shape);
        Tensor gb(std::vector<int>{co});
        kern::conv2d_same_grad_params(d_pre.v.data(), co, h, ww, in.v.data(), ci,
                                      model.config.kernel_size, gw.v.data(), gb.v.data());
        for (std::size_t i = 0; i < gw.size(); ++i) acc[2 * l].v[i] += gw.v[i];
        for (std::size_t i = 0; i < gb.size(); ++i) acc[2 * l + 1].v[i] += gb.v[i];

        if (l == 0) break;
        Tensor d_pool(in.shape);
        kern::conv2d_same_grad_input(d_pre.v.data(), co, h, ww, w.v.data(), ci,
                                     model.config.kernel_size, d_pool.v.data());
        // back through pool l-1 to the previous block's ReLU output
        const Tensor& prev = t.relu_out[l - 1];
        d_relu = Tensor(prev.shape);
        kern::maxpool2_grad(d_pool.v.data(), in.shape[0], in.shape[1], in.shape[2],
                            t.pool_argmax[l - 1].data(), d_relu.v.data(), d_relu.size());
    }
}

json config_to_json(const RankerConfig& cfg) {
    return json{{"conv_channels", cfg.conv_channels},
                {"kernel_size", cfg.kernel_size},
                {"fc_widths", cfg.fc_widths},
                {"epsilon", cfg.epsilon},
                {"learning_rate", cfg.learning_rate},
                {"adam_beta1", cfg.adam_beta1},
                {"adam_beta2", cfg.adam_beta2},
                {"adam_eps", cfg.adam_eps},
                {"epochs", cfg.epochs},
                {"seed", cfg.seed},
                {"train_max_side", cfg.train_max_side}};
}

RankerConfig config_from_json(const json& j) {
    RankerConfig cfg;
    cfg.conv_channels = j.at("conv_channels").get<std::vector<int>>();
    cfg.kernel_size = j.at("kernel_size").get<int>();
    cfg.fc_widths = j.at("fc_widths").get<std::vector<int>>();
    cfg.epsilon = j.at("epsilon").get<double>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.adam_beta1 = j.at("adam_beta1").get<double>();
    cfg.adam_beta2 = j.at("adam_beta2").get<double>();
    cfg.adam_eps = j.at("adam_eps").get<double>();
    cfg.epochs = j.at("epochs").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.train_max_side = j.at("train_max_side").get<int>();
    return cfg;
}

}  // namespace

void validate_config(const RankerConfig& cfg) {
    if (cfg.conv_channels.empty()) {
        throw std::invalid_argument("config: conv_channels must not be empty");
    }
    for (int c : cfg.conv_channels) {
        if (c <= 0) throw std::invalid_argument("config: conv channels must be positive");
    }
    if (cfg.kernel_size < 1 || cfg.kernel_size % 2 == 0) {
        throw std::invalid_argument("config: kernel_size must be odd and positive");
    }
    if (cfg.fc_widths.size() != 2) {
        throw std::invalid_argument("config: exactly two hidden FC widths required");
    }
    for (int f : cfg.fc_widths) {
        if (f <= 0) throw std::invalid_argument("config: fc widths must be positive");
    }
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be > 0");
    if (!(cfg.learning_rate >= 0.0)) {
        throw std::invalid_argument("config: learning_rate must be >= 0");
    }
    if (!(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0) ||
        !(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0)) {
        throw std::invalid_argument("config: adam betas must lie in [0,1)");
    }
    if (!(cfg.adam_eps > 0.0)) throw std::invalid_argument("config: adam_eps must be > 0");
    if (cfg.epochs < 0) throw std::invalid_argument("config: epochs must be >= 0");
    if (cfg.train_max_side < kMinSide) {
        throw std::invalid_argument("config: train_max_side must be >= 8");
    }
}

std::size_t RankerModel::parameter_count() const {
    std::size_t n = 0;
    for (const Tensor& t : params) n += t.size();
    return n;
}

std::vector<std::string> layer_names(const RankerConfig& cfg) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < cfg.conv_channels.size(); ++i) {
        names.push_back("conv" + std::to_string(i + 1) + ".weight");
        names.push_back("conv" + std::to_string(i + 1) + ".bias");
    }
    for (std::size_t i = 0; i < cfg.fc_widths.size(); ++i) {
        names.push_back("fc" + std::to_string(i + 1) + ".weight");
        names.push_back("fc" + std::to_string(i + 1) + ".bias");
    }
    names.push_back("out.weight");
    names.push_back("out.bias");
    return names;
}

AdamState make_adam_state(const RankerModel& model) {
    AdamState st;
    for (const Tensor& t : model.params) {
        st.m.emplace_back(t.shape);
        st.v.emplace_back(t.shape);
    }
    return st;
}

RankerModel init_model(const RankerConfig& cfg) {
    validate_config(cfg);
    RankerModel model;
    model.config = cfg;
    Rng rng(cfg.seed);
    const auto shapes = layer_shapes(cfg);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        Tensor t(shapes[i]);
        const bool is_weight = shapes[i].size() > 1;
        if (is_weight) {
            std::size_t fan_in = 1;
            for (std::size_t d = 1; d < shapes[i].size(); ++d) {
                fan_in *= static_cast<std::size_t>(shapes[i][d]);
            }
            double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
            if (i == shapes.size() - 2) {
                // output layer: near-zero start, see header
                scale = 0.01 * std::sqrt(1.0 / static_cast<double>(fan_in));
            }
            for (double& v : t.v) v = scale * rng.gauss();
        }
        model.params.push_back(std::move(t));
    }
    return model;
}

ForwardTrace forward_trace(const RankerModel& model, const ImageRGB& img) {
    require_valid(img);
    if (img.width < kMinSide || img.height < kMinSide) {
        throw std::invalid_argument("forward: image smaller than 8x8");
    }
    const RankerConfig& cfg = model.config;
    const int nconv = static_cast<int>(cfg.conv_channels.size());

    ForwardTrace t;
    int h = img.height, w = img.width;
    Tensor cur(std::vector<int>{3, h, w});
    cur.v = planar_from_image(img);

    int in_ch = 3;
    for (int l = 0; l < nconv; ++l) {
        const int out_ch = cfg.conv_channels[l];
        t.conv_in.push_back(cur);
        Tensor pre(std::vector<int>{out_ch, h, w});
        kern::conv2d_same(cur.v.data(), in_ch, h, w, model.params[2 * l].v.data(),
                          model.params[2 * l + 1].v.data(), out_ch, cfg.kernel_size,
                          pre.v.data());
        Tensor act(pre.shape);
        kern::relu(pre.v.data(), act.v.data(), pre.size());
        t.conv_pre.push_back(std::move(pre));
        t.relu_out.push_back(act);

        if (l < nconv - 1) {
            if (h < 2 || w < 2) {
                throw std::invalid_argument("forward: image too small for network depth");
            }
            const int ho = h / 2, wo = w / 2;
            Tensor pooled(std::vector<int>{out_ch, ho, wo});
            std::vector<int> argmax(pooled.size());
            kern::maxpool2(act.v.data(), out_ch, h, w, pooled.v.data(), argmax.data());
            t.pool_argmax.push_back(std::move(argmax));
            cur = std::move(pooled);
            h = ho;
            w = wo;
        } else {
            cur = std::move(act);
        }
        in_ch = out_ch;
    }

    t.gap_out.resize(in_ch);
    kern::gap(cur.v.data(), in_ch, h, w, t.gap_out.data());

    const int base_fc = 2 * nconv;
    std::vector<double> x = t.gap_out;
    for (int l = 0; l < 2; ++l) {
        std::vector<double> pre = fc_apply(model.params[base_fc + 2 * l],
                                           model.params[base_fc + 2 * l + 1], x);
        t.fc_pre.push_back(pre);
        x.resize(pre.size());
        for (std::size_t i = 0; i < pre.size(); ++i) x[i] = pre[i] > 0.0 ? pre[i] : 0.0;
    }
    std::vector<double> out = fc_apply(model.params[base_fc + 4],
                                       model.params[base_fc + 5], x);
    t.fc_pre.push_back(out);
    t.score = out[0];
    return t;
}

QualityScore forward(const RankerModel& model, const ImageRGB& img) {
    return QualityScore{forward_trace(model, img).score};
}

double margin_rank_loss(double s1, double s2, int gamma, double epsilon) {
    if (gamma != 1 && gamma != -1) {
        throw std::invalid_argument("margin_rank_loss: gamma must be +1 or -1");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("margin_rank_loss: epsilon must be > 0");
    }
    const double v = (s1 - s2) * static_cast<double>(gamma) + epsilon;
    return v > 0.0 ? v : 0.0;
}

std::vector<Tensor> backward(const RankerModel& model, const RankedPair& pair,
                             double epsilon, double* loss_out) {
    const ForwardTrace t1 = forward_trace(model, pair.x1);
    const ForwardTrace t2 = forward_trace(model, pair.x2);
    const double loss = margin_rank_loss(t1.score, t2.score, pair.gamma, epsilon);
    if (loss_out) *loss_out = loss;

    std::vector<Tensor> grads;
    grads.reserve(model.params.size());
    for (const Tensor& p : model.params) grads.emplace_back(p.shape);
    if (loss > 0.0) {
        const double g = static_cast<double>(pair.gamma);
        branch_backward(model, t1, g, grads);
        branch_backward(model, t2, -g, grads);
    }
    return grads;
}

void adam_step(RankerModel& model, const std::vector<Tensor>& grads,
               AdamState& state, double lr) {
    check_grad_shapes(model, grads);
    const double b1 = model.config.adam_beta1;
    const double b2 = model.config.adam_beta2;
    const double eps = model.config.adam_eps;
    state.t += 1;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < grads.size(); ++i) {
        double* m = state.m[i].v.data();
        double* v = state.v[i].v.data();
        double* p = model.params[i].v.data();
        const double* g = grads[i].v.data();
        const std::size_t n = grads[i].size();
        for (std::size_t j = 0; j < n; ++j) {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            const double mhat = m[j] / c1;
            const double vhat = v[j] / c2;
            p[j] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

TrainLog train(RankerModel& model, const std::vector<TrainSample>& dataset,
               const RankerConfig& cfg) {
    validate_config(cfg);
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");

    // Cap the working size once up front.
    std::vector<TrainSample> working;
    working.reserve(dataset.size());
    for (const TrainSample& s : dataset) {
        const int side = std::max(s.hq.width, s.hq.height);
        if (side <= cfg.train_max_side) {
            working.push_back(s);
        } else {
            const double scale = static_cast<double>(cfg.train_max_side) / side;
            const int nw = std::max(kMinSide, static_cast<int>(std::lround(s.hq.width * scale)));
            const int nh = std::max(kMinSide, static_cast<int>(std::lround(s.hq.height * scale)));
            working.push_back({s.id, resize_bilinear(s.hq, nw, nh),
                               resize_bilinear(s.lq, nw, nh)});
        }
    }

    Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ull);
    RatioSampler sampler(rng);
    AdamState state = make_adam_state(model);
    TrainLog log;

    std::vector<std::size_t> order(working.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            const TrainSample& s = working[idx];
            const MixRatioPair ratios = sampler.sample();
            const RankedPair pair = make_ranked_pair(s.hq, s.lq, ratios);
            double loss = 0.0;
            const std::vector<Tensor> grads = backward(model, pair, cfg.epsilon, &loss);
            adam_step(model, grads, state, cfg.learning_rate);
            loss_sum += loss;
        }
        log.epoch_mean_loss.push_back(loss_sum / static_cast<double>(working.size()));
    }
    return log;
}

void save_model(const RankerModel& model, const std::string& path) {
    json j;
    j["version"] = model.version;
    j["config"] = config_to_json(model.config);
    json layers = json::array();
    const auto names = layer_names(model.config);
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        layers.push_back(json{{"name", names[i]},
                              {"shape", model.params[i].shape},
                              {"values", model.params[i].v}});
    }
    j["layers"] = std::move(layers);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << j.dump(1) << "\n";
    if (!out) throw std::runtime_error("model write failed: " + path);
}

RankerModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("corrupt model file: " + path + " (" + e.what() + ")");
    }
    try {
        if (!j.contains("version") || !j["version"].is_number_integer()) {
            throw std::runtime_error("corrupt model file: missing version");
        }
        const int version = j["version"].get<int>();
        if (version != 1) {
            throw std::runtime_error("unsupported model version " +
                                     std::to_string(version) + " (expected 1)");
        }
        RankerModel model;
        model.version = version;
        model.config = config_from_json(j.at("config"));
        validate_config(model.config);

        const auto names = layer_names(model.config);
        const auto shapes = layer_shapes(model.config);
        const json& layers = j.at("layers");
        if (!layers.is_array() || layers.size() != names.size()) {
            throw std::runtime_error("corrupt model file: wrong layer count");
        }
        for (std::size_t i = 0; i < names.size(); ++i) {
            const json& layer = layers[i];
            if (layer.at("name").get<std::string>() != names[i]) {
                throw std::runtime_error("corrupt model file: unexpected layer order");
            }
            if (layer.at("shape").get<std::vector<int>>() != shapes[i]) {
                throw std::runtime_error("corrupt model file: layer shape mismatch");
            }
            Tensor t(shapes[i]);
            const json& values = layer.at("values");
            if (!values.is_array() || values.size() != t.size()) {
                throw std::runtime_error("corrupt model file: value count mismatch");
            }
            for (std::size_t k = 0; k < t.size(); ++k) {
                t.v[k] = values[k].get<double>();
                if (!std::isfinite(t.v[k])) {
                    throw std::runtime_error("corrupt model file: non-finite weight");
                }
            }
            model.params.push_back(std::move(t));
        }
        return model;
    } catch (const json::exception& e) {
        throw std::runtime_error("corrupt model file: " + path + " (" + e.what() + ")");
    }
}

}  // namespace uwiq
