#include "semcomm/nn/layers.h"

#include <Eigen/Core>
#include <cmath>

#include "semcomm/core/errors.h"

namespace semcomm::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

struct ConvGeom {
    std::size_t channels, height, width;  // the "image" side of the conv
    std::size_t kernel;
    int stride, padding;
    std::size_t out_h, out_w;             // the "column" side
};

// cols[(c*k + ky)*k + kx][oy*out_w + ox] = img[c][oy*s + ky - p][ox*s + kx - p]
void im2col(const double* img, const ConvGeom& g, double* cols)
{
    const std::size_t k = g.kernel;
    const std::size_t ncols = g.out_h * g.out_w;
    for (std::size_t c = 0; c < g.channels; ++c) {
        const double* plane = img + c * g.height * g.width;
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
                double* row = cols + ((c * k + ky) * k + kx) * ncols;
                for (std::size_t oy = 0; oy < g.out_h; ++oy) {
                    const long iy = static_cast<long>(oy) * g.stride + static_cast<long>(ky) - g.padding;
                    double* dst = row + oy * g.out_w;
                    if (iy < 0 || iy >= static_cast<long>(g.height)) {
                        for (std::size_t ox = 0; ox < g.out_w; ++ox) dst[ox] = 0.0;
                        continue;
                    }
                    const double* src = plane + static_cast<std::size_t>(iy) * g.width;
                    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                        const long ix = static_cast<long>(ox) * g.stride + static_cast<long>(kx) - g.padding;
                        dst[ox] = (ix < 0 || ix >= static_cast<long>(g.width)) ? 0.0 : src[ix];
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatter-add columns back into the image.
void col2im(const double* cols, const ConvGeom& g, double* img)
{
    const std::size_t k = g.kernel;
    const std::size_t ncols = g.out_h * g.out_w;
    for (std::size_t c = 0; c < g.channels; ++c) {
        double* plane = img + c * g.height * g.width;
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
                const double* row = cols + ((c * k + ky) * k + kx) * ncols;
                for (std::size_t oy = 0; oy < g.out_h; ++oy) {
                    const long iy = static_cast<long>(oy) * g.stride + static_cast<long>(ky) - g.padding;
                    if (iy < 0 || iy >= static_cast<long>(g.height)) continue;
                    double* dst = plane + static_cast<std::size_t>(iy) * g.width;
                    const double* src = row + oy * g.out_w;
                    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                        const long ix = static_cast<long>(ox) * g.stride + static_cast<long>(kx) - g.padding;
                        if (ix >= 0 && ix < static_cast<long>(g.width)) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

void check_geometry(int stride, int padding)
{
    if (stride < 1) throw ConfigError("stride must be >= 1, got " + std::to_string(stride));
    if (padding < 0) throw ConfigError("padding must be >= 0, got " + std::to_string(padding));
}

void check_rank4(const Tensor& t, const char* what)
{
    if (t.rank() != 4) {
        throw ConfigError(std::string(what) + ": expected NCHW input, got " + shape_string(t.shape()));
    }
}

void check_channels(const char* what, std::size_t expected, std::size_t actual)
{
    if (expected != actual) {
        throw ConfigError(std::string(what) + ": input has " + std::to_string(actual) +
                          " channels, kernel expects " + std::to_string(expected));
    }
}

void accumulate(Tensor& t, const RowMat& m)
{
    MapMat g(t.grad().data(), m.rows(), m.cols());
    g += m;
}

}  // namespace

std::string to_string(LayerKind kind)
{
    switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::conv_transpose: return "conv-transpose";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::dense: return "dense";
    }
    return "?";
}

LayerParams LayerParams::conv(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, bool with_bias)
{
    LayerParams p;
    p.kind = LayerKind::conv;
    p.weight = Tensor({out_ch, in_ch, kernel, kernel});
    if (with_bias) p.bias = Tensor({out_ch});
    return p;
}

LayerParams LayerParams::conv_transpose(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
                                        bool with_bias)
{
    LayerParams p;
    p.kind = LayerKind::conv_transpose;
    p.weight = Tensor({in_ch, out_ch, kernel, kernel});
    if (with_bias) p.bias = Tensor({out_ch});
    return p;
}

LayerParams LayerParams::batchnorm(std::size_t channels)
{
    LayerParams p;
    p.kind = LayerKind::batchnorm;
    p.weight = Tensor({channels}, 1.0);
    p.bias = Tensor({channels}, 0.0);
    p.running_mean = Tensor({channels}, 0.0);
    p.running_var = Tensor({channels}, 1.0);
    return p;
}

LayerParams LayerParams::dense(std::size_t in, std::size_t out)
{
    LayerParams p;
    p.kind = LayerKind::dense;
    p.weight = Tensor({out, in});
    p.bias = Tensor({out});
    return p;
}

void LayerParams::init(Rng& rng, double fan_in)
{
    if (kind == LayerKind::batchnorm) {
        weight.fill(1.0);
        bias.fill(0.0);
        running_mean.fill(0.0);
        running_var.fill(1.0);
        stats_ready = false;
        return;
    }
    const double bound = std::sqrt(6.0 / fan_in);
    for (auto& w : weight.values()) w = rng.uniform(-bound, bound);
    bias.fill(0.0);
}

void LayerParams::seed_running_stats()
{
    running_mean.fill(0.0);
    running_var.fill(1.0);
    stats_ready = true;
}

void LayerParams::zero_grad()
{
    weight.zero_grad();
    bias.zero_grad();
}

std::size_t conv_out_size(std::size_t in, std::size_t kernel, int stride, int padding)
{
    const long span = static_cast<long>(in) + 2L * padding - static_cast<long>(kernel);
    if (span < 0) {
        throw ConfigError("kernel " + std::to_string(kernel) + " larger than padded input " +
                          std::to_string(in + 2 * padding));
    }
    return static_cast<std::size_t>(span / stride + 1);
}

std::size_t conv_transpose_out_size(std::size_t in, std::size_t kernel, int stride, int padding)
{
    const long out = (static_cast<long>(in) - 1) * stride - 2L * padding + static_cast<long>(kernel);
    if (out <= 0) throw ConfigError("conv-transpose geometry yields empty output");
    return static_cast<std::size_t>(out);
}

Tensor conv2d(const Tensor& input, const LayerParams& params, int stride, int padding)
{
    check_geometry(stride, padding);
    check_rank4(input, "conv2d");
    const auto& w = params.weight.shape();
    check_channels("conv2d", w[1], input.dim(1));
    const std::size_t n = input.dim(0), cout = w[0], k = w[2];
    ConvGeom g{input.dim(1), input.dim(2), input.dim(3), k, stride, padding,
               conv_out_size(input.dim(2), k, stride, padding),
               conv_out_size(input.dim(3), k, stride, padding)};
    const std::size_t rows = g.channels * k * k, ncols = g.out_h * g.out_w;

    Tensor out({n, cout, g.out_h, g.out_w});
    RowMat cols(rows, ncols);
    ConstMapMat wm(params.weight.data().data(), cout, rows);
    for (std::size_t b = 0; b < n; ++b) {
        im2col(input.data().data() + b * g.channels * g.height * g.width, g, cols.data());
        MapMat o(out.data().data() + b * cout * ncols, cout, ncols);
        o.noalias() = wm * cols;
        if (!params.bias.empty()) {
            for (std::size_t c = 0; c < cout; ++c) o.row(c).array() += params.bias[c];
        }
    }
    return out;
}

Tensor conv2d_backward(const Tensor& input, LayerParams& params, const Tensor& grad_out,
                       int stride, int padding)
{
    const auto& w = params.weight.shape();
    const std::size_t n = input.dim(0), cout = w[0], k = w[2];
    ConvGeom g{input.dim(1), input.dim(2), input.dim(3), k, stride, padding,
               grad_out.dim(2), grad_out.dim(3)};
    const std::size_t rows = g.channels * k * k, ncols = g.out_h * g.out_w;

    Tensor grad_in(input.shape());
    RowMat cols(rows, ncols);
    RowMat gcols(rows, ncols);
    RowMat gw = RowMat::Zero(cout, rows);
    ConstMapMat wm(params.weight.data().data(), cout, rows);
    for (std::size_t b = 0; b < n; ++b) {
        ConstMapMat go(grad_out.data().data() + b * cout * ncols, cout, ncols);
        if (params.weight.has_grad()) {
            im2col(input.data().data() + b * g.channels * g.height * g.width, g, cols.data());
            gw.noalias() += go * cols.transpose();
        }
        if (!params.bias.empty() && params.bias.has_grad()) {
            for (std::size_t c = 0; c < cout; ++c) params.bias.grad()[c] += go.row(c).sum();
        }
        gcols.noalias() = wm.transpose() * go;
        col2im(gcols.data(), g, grad_in.data().data() + b * g.channels * g.height * g.width);
    }
    if (params.weight.has_grad()) accumulate(params.weight, gw);
    return grad_in;
}

Tensor conv_transpose2d(const Tensor& input, const LayerParams& params, int stride, int padding)
{
    check_geometry(stride, padding);
    check_rank4(input, "conv_transpose2d");
    const auto& w = params.weight.shape();
    check_channels("conv_transpose2d", w[0], input.dim(1));
    const std::size_t n = input.dim(0), cin = w[0], cout = w[1], k = w[2];
    const std::size_t hi = input.dim(2), wi = input.dim(3);
    ConvGeom g{cout, conv_transpose_out_size(hi, k, stride, padding),
               conv_transpose_out_size(wi, k, stride, padding), k, stride, padding, hi, wi};
    const std::size_t rows = cout * k * k, ncols = hi * wi;

    Tensor out({n, cout, g.height, g.width});
    RowMat cols(rows, ncols);
    ConstMapMat wm(params.weight.data().data(), cin, rows);
    const std::size_t plane = g.height * g.width;
    for (std::size_t b = 0; b < n; ++b) {
        ConstMapMat x(input.data().data() + b * cin * ncols, cin, ncols);
        cols.noalias() = wm.transpose() * x;
        double* o = out.data().data() + b * cout * plane;
        col2im(cols.data(), g, o);
        if (params.bias.empty()) continue;
        for (std::size_t c = 0; c < cout; ++c) {
            for (std::size_t i = 0; i < plane; ++i) o[c * plane + i] += params.bias[c];
        }
    }
    return out;
}

Tensor conv_transpose2d_backward(const Tensor& input, LayerParams& params,
                                 const Tensor& grad_out, int stride, int padding)
{
    const auto& w = params.weight.shape();
    const std::size_t n = input.dim(0), cin = w[0], cout = w[1], k = w[2];
    const std::size_t hi = input.dim(2), wi = input.dim(3);
    ConvGeom g{cout, grad_out.dim(2), grad_out.dim(3), k, stride, padding, hi, wi};
    const std::size_t rows = cout * k * k, ncols = hi * wi;
    const std::size_t plane = g.height * g.width;

    Tensor grad_in(input.shape());
    RowMat gcols(rows, ncols);
    RowMat gw = RowMat::Zero(cin, rows);
    ConstMapMat wm(params.weight.data().data(), cin, rows);
    for (std::size_t b = 0; b < n; ++b) {
        const double* go = grad_out.data().data() + b * cout * plane;
        im2col(go, g, gcols.data());
        MapMat gx(grad_in.data().data() + b * cin * ncols, cin, ncols);
        gx.noalias() = wm * gcols;
        if (params.weight.has_grad()) {
            ConstMapMat x(input.data().data() + b * cin * ncols, cin, ncols);
            gw.noalias() += x * gcols.transpose();
        }
        if (!params.bias.empty() && params.bias.has_grad()) {
            for (std::size_t c = 0; c < cout; ++c) {
                double s = 0.0;
                for (std::size_t i = 0; i < plane; ++i) s += go[c * plane + i];
                params.bias.grad()[c] += s;
            }
        }
    }
    if (params.weight.has_grad()) accumulate(params.weight, gw);
    return grad_in;
}

namespace {

struct ChannelLayout {
    std::size_t batch, channels, spatial;
};

ChannelLayout channel_layout(const Tensor& t, const LayerParams& p)
{
    if (t.rank() != 4 && t.rank() != 2) {
        throw ConfigError("batchnorm: expected [N,C,H,W] or [N,C], got " + shape_string(t.shape()));
    }
    const std::size_t c = t.dim(1);
    check_channels("batchnorm", p.weight.size(), c);
    const std::size_t spatial = t.rank() == 4 ? t.dim(2) * t.dim(3) : 1;
    return {t.dim(0), c, spatial};
}

}  // namespace

Tensor batchnorm_eval(const Tensor& input, const LayerParams& params)
{
    const auto lay = channel_layout(input, params);
    if (!params.stats_ready) throw ConfigError("batchnorm: uninitialized running stats");
    Tensor out(input.shape());
    for (std::size_t c = 0; c < lay.channels; ++c) {
        const double inv = 1.0 / std::sqrt(params.running_var[c] + params.eps);
        const double scale = params.weight[c] * inv;
        const double shift = params.bias[c] - params.running_mean[c] * scale;
        for (std::size_t b = 0; b < lay.batch; ++b) {
            const std::size_t base = (b * lay.channels + c) * lay.spatial;
            for (std::size_t i = 0; i < lay.spatial; ++i) out[base + i] = input[base + i] * scale + shift;
        }
    }
    return out;
}

Tensor batchnorm(const Tensor& input, LayerParams& params, BatchNormMode mode, BatchNormCache* cache)
{
    if (mode == BatchNormMode::eval) return batchnorm_eval(input, params);

    const auto lay = channel_layout(input, params);
    const std::size_t count = lay.batch * lay.spatial;
    if (count < 2) {
        throw ConfigError("batchnorm: train mode needs at least 2 values per channel, got " +
                          std::to_string(count));
    }
    Tensor out(input.shape());
    Tensor normalized(input.shape());
    std::vector<double> inv_std(lay.channels);
    for (std::size_t c = 0; c < lay.channels; ++c) {
        double mean = 0.0;
        for (std::size_t b = 0; b < lay.batch; ++b) {
            const std::size_t base = (b * lay.channels + c) * lay.spatial;
            for (std::size_t i = 0; i < lay.spatial; ++i) mean += input[base + i];
        }
        mean /= static_cast<double>(count);
        double var = 0.0;
        for (std::size_t b = 0; b < lay.batch; ++b) {
            const std::size_t base = (b * lay.channels + c) * lay.spatial;
            for (std::size_t i = 0; i < lay.spatial; ++i) {
                const double d = input[base + i] - mean;
                var += d * d;
            }
        }
        var /= static_cast<double>(count);
        const double inv = 1.0 / std::sqrt(var + params.eps);
        inv_std[c] = inv;
        for (std::size_t b = 0; b < lay.batch; ++b) {
            const std::size_t base = (b * lay.channels + c) * lay.spatial;
            for (std::size_t i = 0; i < lay.spatial; ++i) {
                const double xh = (input[base + i] - mean) * inv;
                normalized[base + i] = xh;
                out[base + i] = xh * params.weight[c] + params.bias[c];
            }
        }
        // Running variance tracks the unbiased estimate.
        const double unbiased = var * static_cast<double>(count) / static_cast<double>(count - 1);
        params.running_mean[c] = (1.0 - params.momentum) * params.running_mean[c] + params.momentum * mean;
        params.running_var[c] = (1.0 - params.momentum) * params.running_var[c] + params.momentum * unbiased;
    }
    params.stats_ready = true;
    if (cache) {
        cache->normalized = std::move(normalized);
        cache->inv_std = std::move(inv_std);
    }
    return out;
}

Tensor batchnorm_backward(const BatchNormCache& cache, LayerParams& params, const Tensor& grad_out)
{
    const auto lay = channel_layout(grad_out, params);
    const double count = static_cast<double>(lay.batch * lay.spatial);
    Tensor grad_in(grad_out.shape());
    for (std::size_t c = 0; c < lay.channels; ++c) {
        double sum_g = 0.0, sum_gx = 0.0;
        for (std::size_t b = 0; b < lay.batch; ++b) {
            const std::size_t base = (b * lay.channels + c) * lay.spatial;
            for (std::size_t i = 0; i < lay.spatial; ++i) {
                sum_g += grad_out[base + i];
                sum_gx += grad_out[base + i] * cache.normalized[base + i];
            }
        }
        if (params.weight.has_grad()) params.weight.grad()[c] += sum_gx;
        if (params.bias.has_grad()) params.bias.grad()[c] += sum_g;
        const double k = params.weight[c] * cache.inv_std[c] / count;
        for (std::size_t b = 0; b < lay.batch; ++b) {
            const std::size_t base = (b * lay.channels + c) * lay.spatial;
            for (std::size_t i = 0; i < lay.spatial; ++i) {
                grad_in[base + i] =
                    k * (count * grad_out[base + i] - sum_g - cache.normalized[base + i] * sum_gx);
            }
        }
    }
    return grad_in;
}

Tensor activation(const Tensor& input, Activation kind)
{
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        const double x = input[i];
        switch (kind) {
        case Activation::relu: out[i] = x > 0.0 ? x : 0.0; break;
        case Activation::sigmoid: out[i] = 1.0 / (1.0 + std::exp(-x)); break;
        case Activation::tanh: out[i] = std::tanh(x); break;
        }
    }
    return out;
}

Tensor activation_backward(const Tensor& output, const Tensor& grad_out, Activation kind)
{
    Tensor grad_in(output.shape());
    for (std::size_t i = 0; i < output.size(); ++i) {
        const double y = output[i];
        double d = 0.0;
        switch (kind) {
        case Activation::relu: d = y > 0.0 ? 1.0 : 0.0; break;
        case Activation::sigmoid: d = y * (1.0 - y); break;
        case Activation::tanh: d = 1.0 - y * y; break;
        }
        grad_in[i] = grad_out[i] * d;
    }
    return grad_in;
}

Tensor dense(const Tensor& input, const LayerParams& params)
{
    const std::size_t out_dim = params.weight.dim(0), in_dim = params.weight.dim(1);
    const bool batched = input.rank() == 2;
    const std::size_t n = batched ? input.dim(0) : 1;
    const std::size_t len = batched ? input.dim(1) : input.size();
    if (len != in_dim) {
        throw ConfigError("dense: input length " + std::to_string(len) + " does not match " +
                          std::to_string(in_dim) + " weight columns");
    }
    Tensor out(batched ? Shape{n, out_dim} : Shape{out_dim});
    ConstMapMat w(params.weight.data().data(), out_dim, in_dim);
    ConstMapMat x(input.data().data(), n, in_dim);
    MapMat y(out.data().data(), n, out_dim);
    y.noalias() = x * w.transpose();
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t o = 0; o < out_dim; ++o) y(b, o) += params.bias[o];
    }
    return out;
}

Tensor dense_backward(const Tensor& input, LayerParams& params, const Tensor& grad_out)
{
    const std::size_t out_dim = params.weight.dim(0), in_dim = params.weight.dim(1);
    const std::size_t n = input.rank() == 2 ? input.dim(0) : 1;
    ConstMapMat w(params.weight.data().data(), out_dim, in_dim);
    ConstMapMat x(input.data().data(), n, in_dim);
    ConstMapMat g(grad_out.data().data(), n, out_dim);
    if (params.weight.has_grad()) {
        RowMat gw = g.transpose() * x;
        accumulate(params.weight, gw);
    }
    if (!params.bias.empty() && params.bias.has_grad()) {
        for (std::size_t o = 0; o < out_dim; ++o) params.bias.grad()[o] += g.col(o).sum();
    }
    Tensor grad_in(input.shape());
    MapMat gi(grad_in.data().data(), n, in_dim);
    gi.noalias() = g * w;
    return grad_in;
}

}  // namespace semcomm::nn
