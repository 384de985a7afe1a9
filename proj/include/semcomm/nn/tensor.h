#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace semcomm::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major float64 tensor with an optional gradient buffer of the
// same shape. Conv layers use NCHW.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> values);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // NCHW element access.
    double& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w)
    {
        return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }
    double at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const
    {
        return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }

    bool has_grad() const { return grad_enabled_; }
    // Allocates (if needed) and zeroes the gradient buffer.
    void zero_grad();
    void drop_grad()
    {
        grad_.clear();
        grad_enabled_ = false;
    }
    std::span<double> grad() { return grad_; }
    std::span<const double> grad() const { return grad_; }

    void reshape(Shape shape);
    void fill(double v);

    // Values and shape equal; gradients are ignored.
    bool operator==(const Tensor& other) const
    {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    Shape shape_;
    std::vector<double> data_;
    std::vector<double> grad_;
    bool grad_enabled_ = false;
};

double dot(const Tensor& a, const Tensor& b);

}  // namespace semcomm::nn
