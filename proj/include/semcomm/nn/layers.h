#pragma once

#include <string>
#include <vector>

#include "semcomm/core/rng.h"
#include "semcomm/nn/tensor.h"

namespace semcomm::nn {

enum class LayerKind { conv, conv_transpose, batchnorm, dense };

// Trainable state of one layer.
//   conv:           weight [Cout, Cin, k, k], bias [Cout]
//   conv_transpose: weight [Cin, Cout, k, k], bias [Cout]
//   batchnorm:      weight = scale [C], bias = shift [C], running stats [C]
//   dense:          weight [out, in], bias [out]
struct LayerParams {
    LayerKind kind = LayerKind::dense;
    Tensor weight;
    Tensor bias;
    Tensor running_mean;
    Tensor running_var;
    double momentum = 0.1;
    double eps = 1e-5;
    // Eval-mode batchnorm refuses to run until a train step or an explicit
    // seed has populated the running statistics.
    bool stats_ready = false;

    // Without a bias the bias tensor is empty; used in front of batchnorm,
    // whose shift makes it redundant.
    static LayerParams conv(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, bool with_bias = true);
    static LayerParams conv_transpose(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
                                      bool with_bias = true);
    static LayerParams batchnorm(std::size_t channels);
    static LayerParams dense(std::size_t in, std::size_t out);

    // Kaiming-uniform: weights ~ U(-b, b) with b = sqrt(6 / fan_in); bias 0.
    // Batchnorm resets to scale 1, shift 0.
    void init(Rng& rng, double fan_in);
    // Running mean 0, variance 1.
    void seed_running_stats();

    void zero_grad();
};

std::string to_string(LayerKind kind);

// Output spatial size of a strided convolution.
std::size_t conv_out_size(std::size_t in, std::size_t kernel, int stride, int padding);
std::size_t conv_transpose_out_size(std::size_t in, std::size_t kernel, int stride, int padding);

Tensor conv2d(const Tensor& input, const LayerParams& params, int stride, int padding);
// Returns dL/dinput; accumulates dL/dweight and dL/dbias into the parameter
// gradient buffers when they are enabled.
Tensor conv2d_backward(const Tensor& input, LayerParams& params, const Tensor& grad_out,
                       int stride, int padding);

// Adjoint of conv2d with the same weight and geometry (plus bias).
Tensor conv_transpose2d(const Tensor& input, const LayerParams& params, int stride, int padding);
Tensor conv_transpose2d_backward(const Tensor& input, LayerParams& params,
                                 const Tensor& grad_out, int stride, int padding);

enum class BatchNormMode { train, eval };

struct BatchNormCache {
    Tensor normalized;            // x_hat, same shape as the input
    std::vector<double> inv_std;  // per channel
};

// Accepts [N, C, H, W] or [N, C]. Train mode normalizes with batch
// statistics and updates the running stats; eval mode uses running stats.
Tensor batchnorm(const Tensor& input, LayerParams& params, BatchNormMode mode,
                 BatchNormCache* cache = nullptr);
Tensor batchnorm_eval(const Tensor& input, const LayerParams& params);
Tensor batchnorm_backward(const BatchNormCache& cache, LayerParams& params, const Tensor& grad_out);

enum class Activation { relu, sigmoid, tanh };

Tensor activation(const Tensor& input, Activation kind);
// Uses the forward *output*, which is enough for all three kinds.
Tensor activation_backward(const Tensor& output, const Tensor& grad_out, Activation kind);

// input [N, in] or [in]; out = W in + b.
Tensor dense(const Tensor& input, const LayerParams& params);
Tensor dense_backward(const Tensor& input, LayerParams& params, const Tensor& grad_out);

}  // namespace semcomm::nn
