#pragma once

#include <string>
#include <vector>

#include "semcomm/core/rng.h"
#include "semcomm/nn/adam.h"
#include "semcomm/nn/layers.h"

namespace semcomm::codec {

using nn::LayerParams;
using nn::Tensor;

// Collects named views of a block's tensors.
struct ParamSink {
    std::vector<nn::ParamRef>& out;
    bool include_state;  // running statistics too, not just trainable tensors

    void layer(const std::string& prefix, LayerParams& p);
};

// conv 3x3 stride 2 -> batchnorm -> ReLU.
struct DownStage {
    LayerParams conv;
    LayerParams bn;

    struct Cache {
        Tensor input;
        nn::BatchNormCache bn;
        Tensor output;
    };

    DownStage() = default;
    DownStage(std::size_t in_ch, std::size_t out_ch);
    void init(Rng& rng);
    Tensor forward_train(const Tensor& x, Cache& cache);
    Tensor forward_eval(const Tensor& x) const;
    Tensor backward(const Cache& cache, const Tensor& grad_out);
    void collect(const std::string& prefix, ParamSink& sink);
};

// Two 3x3 convs with batchnorm and ReLU between them; the stride sits on the
// first conv. The skip path is identity when the shape is preserved and a
// stride-matched 1x1 projection otherwise.
struct ResidualBlock {
    LayerParams conv1, bn1, conv2, bn2, proj;
    int stride = 1;
    bool has_proj = false;
    bool final_relu = true;

    struct Cache {
        Tensor input;
        Tensor h1;
        nn::BatchNormCache bn1;
        Tensor a1;
        Tensor h2;
        nn::BatchNormCache bn2;
        Tensor output;
    };

    ResidualBlock() = default;
    ResidualBlock(std::size_t in_ch, std::size_t out_ch, int stride, bool final_relu);
    void init(Rng& rng);
    Tensor forward_train(const Tensor& x, Cache& cache);
    Tensor forward_eval(const Tensor& x) const;
    Tensor backward(const Cache& cache, const Tensor& grad_out);
    void collect(const std::string& prefix, ParamSink& sink);
};

// conv-transpose 4x4 stride 2 -> residual block -> batchnorm -> ReLU.
struct UpResidualStage {
    LayerParams deconv;
    ResidualBlock res;
    LayerParams bn;

    struct Cache {
        Tensor input;
        Tensor up;
        ResidualBlock::Cache res;
        nn::BatchNormCache bn;
        Tensor output;
    };

    UpResidualStage() = default;
    UpResidualStage(std::size_t in_ch, std::size_t out_ch);
    void init(Rng& rng);
    Tensor forward_train(const Tensor& x, Cache& cache);
    Tensor forward_eval(const Tensor& x) const;
    Tensor backward(const Cache& cache, const Tensor& grad_out);
    void collect(const std::string& prefix, ParamSink& sink);
};

// conv-transpose 4x4 stride 2 -> batchnorm -> ReLU, or, for the output
// stage, conv-transpose -> (tanh + 1) / 2.
struct UpStage {
    LayerParams deconv;
    LayerParams bn;
    bool output_stage = false;

    struct Cache {
        Tensor input;
        nn::BatchNormCache bn;
        Tensor tanh_out;
        Tensor output;
    };

    UpStage() = default;
    UpStage(std::size_t in_ch, std::size_t out_ch, bool output_stage);
    void init(Rng& rng);
    Tensor forward_train(const Tensor& x, Cache& cache);
    Tensor forward_eval(const Tensor& x) const;
    Tensor backward(const Cache& cache, const Tensor& grad_out);
    void collect(const std::string& prefix, ParamSink& sink);
};

// Elementwise helpers shared by the codec graph.
Tensor add(const Tensor& a, const Tensor& b);
void add_in_place(Tensor& a, const Tensor& b);

}  // namespace semcomm::codec
