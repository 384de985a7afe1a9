#include "semcomm/nn/tensor.h"

#include <algorithm>
#include <functional>
#include <numeric>

#include "semcomm/core/errors.h"

namespace semcomm::nn {

std::size_t shape_numel(const Shape& shape)
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape)
{
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill)
{
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values))
{
    if (data_.size() != shape_numel(shape_)) {
        throw ConfigError("tensor shape " + shape_string(shape_) + " needs " +
                          std::to_string(shape_numel(shape_)) + " values, got " +
                          std::to_string(data_.size()));
    }
}

void Tensor::zero_grad()
{
    grad_.assign(data_.size(), 0.0);
    grad_enabled_ = true;
}

void Tensor::reshape(Shape shape)
{
    if (shape_numel(shape) != data_.size()) {
        throw ConfigError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    }
    shape_ = std::move(shape);
}

void Tensor::fill(double v)
{
    std::fill(data_.begin(), data_.end(), v);
}

double dot(const Tensor& a, const Tensor& b)
{
    if (a.size() != b.size()) {
        throw ConfigError("dot: size mismatch " + shape_string(a.shape()) + " vs " +
                          shape_string(b.shape()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace semcomm::nn
