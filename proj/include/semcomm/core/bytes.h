#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semcomm/core/errors.h"

namespace semcomm {

// Little-endian serialization into a growable buffer.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { put(v); }
    void u32(std::uint32_t v) { put(v); }
    void u64(std::uint64_t v) { put(v); }
    void f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
    void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
    void text(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

    std::size_t size() const { return buf_.size(); }
    std::vector<std::uint8_t>& buffer() { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    template <typename T>
    void put(T v)
    {
        for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    std::vector<std::uint8_t> buf_;
};

// Little-endian cursor over a byte span. Reading past the end throws E with
// the supplied context message.
template <typename E = ProtocolError>
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> data, std::string context)
        : data_(data), context_(std::move(context)) {}

    std::uint8_t u8() { return get<std::uint8_t>(); }
    std::uint16_t u16() { return get<std::uint16_t>(); }
    std::uint32_t u32() { return get<std::uint32_t>(); }
    std::uint64_t u64() { return get<std::uint64_t>(); }
    float f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }

    std::span<const std::uint8_t> bytes(std::size_t n)
    {
        need(n);
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }
    std::string text(std::size_t n)
    {
        auto b = bytes(n);
        return std::string(b.begin(), b.end());
    }

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }
    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const
    {
        if (data_.size() - pos_ < n) throw E(context_);
    }

    template <typename T>
    T get()
    {
        need(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(data_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return v;
    }

    std::span<const std::uint8_t> data_;
    std::string context_;
    std::size_t pos_ = 0;
};

}  // namespace semcomm
