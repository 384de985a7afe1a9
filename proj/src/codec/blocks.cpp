#include "semcomm/codec/blocks.h"

#include "semcomm/core/errors.h"

namespace semcomm::codec {

using nn::Activation;
using nn::BatchNormMode;

namespace {

constexpr int kConvKernel = 3;
constexpr int kDeconvKernel = 4;

double conv_fan_in(const LayerParams& p)
{
    const auto& s = p.weight.shape();
    return static_cast<double>(s[1] * s[2] * s[3]);
}

// Each output of a stride-2 4x4 transpose conv sees Cin * (4/2)^2 inputs.
double deconv_fan_in(const LayerParams& p)
{
    const auto& s = p.weight.shape();
    return static_cast<double>(s[0] * s[2] * s[3]) / 4.0;
}

}  // namespace

void ParamSink::layer(const std::string& prefix, LayerParams& p)
{
    out.push_back({prefix + ".weight", &p.weight});
    if (!p.bias.empty()) out.push_back({prefix + ".bias", &p.bias});
    if (include_state && p.kind == nn::LayerKind::batchnorm) {
        out.push_back({prefix + ".running_mean", &p.running_mean});
        out.push_back({prefix + ".running_var", &p.running_var});
    }
}

Tensor add(const Tensor& a, const Tensor& b)
{
    Tensor out = a;
    add_in_place(out, b);
    return out;
}

void add_in_place(Tensor& a, const Tensor& b)
{
    if (a.shape() != b.shape()) {
        throw ConfigError("add: shape mismatch " + nn::shape_string(a.shape()) + " vs " +
                          nn::shape_string(b.shape()));
    }
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

// DownStage

DownStage::DownStage(std::size_t in_ch, std::size_t out_ch)
    : conv(LayerParams::conv(in_ch, out_ch, kConvKernel, false)), bn(LayerParams::batchnorm(out_ch))
{
}

void DownStage::init(Rng& rng)
{
    conv.init(rng, conv_fan_in(conv));
    bn.init(rng, 1.0);
}

Tensor DownStage::forward_train(const Tensor& x, Cache& cache)
{
    cache.input = x;
    Tensor h = nn::conv2d(x, conv, 2, 1);
    h = nn::batchnorm(h, bn, BatchNormMode::train, &cache.bn);
    cache.output = nn::activation(h, Activation::relu);
    return cache.output;
}

Tensor DownStage::forward_eval(const Tensor& x) const
{
    Tensor h = nn::conv2d(x, conv, 2, 1);
    h = nn::batchnorm_eval(h, bn);
    return nn::activation(h, Activation::relu);
}

Tensor DownStage::backward(const Cache& cache, const Tensor& grad_out)
{
    Tensor g = nn::activation_backward(cache.output, grad_out, Activation::relu);
    g = nn::batchnorm_backward(cache.bn, bn, g);
    return nn::conv2d_backward(cache.input, conv, g, 2, 1);
}

void DownStage::collect(const std::string& prefix, ParamSink& sink)
{
    sink.layer(prefix + ".conv", conv);
    sink.layer(prefix + ".bn", bn);
}

// ResidualBlock

ResidualBlock::ResidualBlock(std::size_t in_ch, std::size_t out_ch, int stride_, bool final_relu_)
    : conv1(LayerParams::conv(in_ch, out_ch, kConvKernel, false)),
      bn1(LayerParams::batchnorm(out_ch)),
      conv2(LayerParams::conv(out_ch, out_ch, kConvKernel, false)),
      bn2(LayerParams::batchnorm(out_ch)),
      stride(stride_),
      has_proj(in_ch != out_ch || stride_ != 1),
      final_relu(final_relu_)
{
    if (has_proj) proj = LayerParams::conv(in_ch, out_ch, 1);
}

void ResidualBlock::init(Rng& rng)
{
    conv1.init(rng, conv_fan_in(conv1));
    bn1.init(rng, 1.0);
    conv2.init(rng, conv_fan_in(conv2));
    bn2.init(rng, 1.0);
    if (has_proj) proj.init(rng, conv_fan_in(proj));
}

Tensor ResidualBlock::forward_train(const Tensor& x, Cache& cache)
{
    cache.input = x;
    cache.h1 = nn::conv2d(x, conv1, stride, 1);
    Tensor b1 = nn::batchnorm(cache.h1, bn1, BatchNormMode::train, &cache.bn1);
    cache.a1 = nn::activation(b1, Activation::relu);
    cache.h2 = nn::conv2d(cache.a1, conv2, 1, 1);
    Tensor sum = nn::batchnorm(cache.h2, bn2, BatchNormMode::train, &cache.bn2);
    add_in_place(sum, has_proj ? nn::conv2d(x, proj, stride, 0) : x);
    cache.output = final_relu ? nn::activation(sum, Activation::relu) : sum;
    return cache.output;
}

Tensor ResidualBlock::forward_eval(const Tensor& x) const
{
    Tensor h = nn::conv2d(x, conv1, stride, 1);
    h = nn::activation(nn::batchnorm_eval(h, bn1), Activation::relu);
    h = nn::batchnorm_eval(nn::conv2d(h, conv2, 1, 1), bn2);
    add_in_place(h, has_proj ? nn::conv2d(x, proj, stride, 0) : x);
    return final_relu ? nn::activation(h, Activation::relu) : h;
}

Tensor ResidualBlock::backward(const Cache& cache, const Tensor& grad_out)
{
    const Tensor g_sum = final_relu ? nn::activation_backward(cache.output, grad_out, Activation::relu)
                                    : grad_out;
    Tensor g = nn::batchnorm_backward(cache.bn2, bn2, g_sum);
    g = nn::conv2d_backward(cache.a1, conv2, g, 1, 1);
    g = nn::activation_backward(cache.a1, g, Activation::relu);
    g = nn::batchnorm_backward(cache.bn1, bn1, g);
    Tensor g_in = nn::conv2d_backward(cache.input, conv1, g, stride, 1);
    if (has_proj) {
        add_in_place(g_in, nn::conv2d_backward(cache.input, proj, g_sum, stride, 0));
    } else {
        add_in_place(g_in, g_sum);
    }
    return g_in;
}

void ResidualBlock::collect(const std::string& prefix, ParamSink& sink)
{
    sink.layer(prefix + ".conv1", conv1);
    sink.layer(prefix + ".bn1", bn1);
    sink.layer(prefix + ".conv2", conv2);
    sink.layer(prefix + ".bn2", bn2);
    if (has_proj) sink.layer(prefix + ".proj", proj);
}

// UpResidualStage

UpResidualStage::UpResidualStage(std::size_t in_ch, std::size_t out_ch)
    : deconv(LayerParams::conv_transpose(in_ch, out_ch, kDeconvKernel)),
      res(out_ch, out_ch, 1, true),
      bn(LayerParams::batchnorm(out_ch))
{
}

void UpResidualStage::init(Rng& rng)
{
    deconv.init(rng, deconv_fan_in(deconv));
    res.init(rng);
    bn.init(rng, 1.0);
}

Tensor UpResidualStage::forward_train(const Tensor& x, Cache& cache)
{
    cache.input = x;
    cache.up = nn::conv_transpose2d(x, deconv, 2, 1);
    Tensor h = res.forward_train(cache.up, cache.res);
    h = nn::batchnorm(h, bn, BatchNormMode::train, &cache.bn);
    cache.output = nn::activation(h, Activation::relu);
    return cache.output;
}

Tensor UpResidualStage::forward_eval(const Tensor& x) const
{
    Tensor h = res.forward_eval(nn::conv_transpose2d(x, deconv, 2, 1));
    return nn::activation(nn::batchnorm_eval(h, bn), Activation::relu);
}

Tensor UpResidualStage::backward(const Cache& cache, const Tensor& grad_out)
{
    Tensor g = nn::activation_backward(cache.output, grad_out, Activation::relu);
    g = nn::batchnorm_backward(cache.bn, bn, g);
    g = res.backward(cache.res, g);
    return nn::conv_transpose2d_backward(cache.input, deconv, g, 2, 1);
}

void UpResidualStage::collect(const std::string& prefix, ParamSink& sink)
{
    sink.layer(prefix + ".deconv", deconv);
    res.collect(prefix + ".res", sink);
    sink.layer(prefix + ".bn", bn);
}

// UpStage

UpStage::UpStage(std::size_t in_ch, std::size_t out_ch, bool output_stage_)
    : deconv(LayerParams::conv_transpose(in_ch, out_ch, kDeconvKernel, output_stage_)), output_stage(output_stage_)
{
    if (!output_stage) bn = LayerParams::batchnorm(out_ch);
}

void UpStage::init(Rng& rng)
{
    deconv.init(rng, deconv_fan_in(deconv));
    if (!output_stage) bn.init(rng, 1.0);
}

Tensor UpStage::forward_train(const Tensor& x, Cache& cache)
{
    cache.input = x;
    Tensor h = nn::conv_transpose2d(x, deconv, 2, 1);
    if (output_stage) {
        cache.tanh_out = nn::activation(h, Activation::tanh);
        cache.output = Tensor(h.shape());
        for (std::size_t i = 0; i < h.size(); ++i) cache.output[i] = 0.5 * (cache.tanh_out[i] + 1.0);
        return cache.output;
    }
    h = nn::batchnorm(h, bn, BatchNormMode::train, &cache.bn);
    cache.output = nn::activation(h, Activation::relu);
    return cache.output;
}

Tensor UpStage::forward_eval(const Tensor& x) const
{
    Tensor h = nn::conv_transpose2d(x, deconv, 2, 1);
    if (output_stage) {
        h = nn::activation(h, Activation::tanh);
        for (auto& v : h.values()) v = 0.5 * (v + 1.0);
        return h;
    }
    return nn::activation(nn::batchnorm_eval(h, bn), Activation::relu);
}

Tensor UpStage::backward(const Cache& cache, const Tensor& grad_out)
{
    Tensor g;
    if (output_stage) {
        Tensor half(grad_out.shape());
        for (std::size_t i = 0; i < half.size(); ++i) half[i] = 0.5 * grad_out[i];
        g = nn::activation_backward(cache.tanh_out, half, Activation::tanh);
    } else {
        g = nn::activation_backward(cache.output, grad_out, Activation::relu);
        g = nn::batchnorm_backward(cache.bn, bn, g);
    }
    return nn::conv_transpose2d_backward(cache.input, deconv, g, 2, 1);
}

void UpStage::collect(const std::string& prefix, ParamSink& sink)
{
    sink.layer(prefix + ".deconv", deconv);
    if (!output_stage) sink.layer(prefix + ".bn", bn);
}

}  // namespace semcomm::codec
