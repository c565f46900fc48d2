#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcolor/error.hpp"

namespace dcolor::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written with a little-endian host layout");

class ByteWriter {
public:
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
    void text(std::string_view s) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
        out_.insert(out_.end(), p, p + s.size());
    }
    template <typename T>
    void scalar(T v) {
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, &v, sizeof(T));
        out_.insert(out_.end(), raw, raw + sizeof(T));
    }
    void u16(std::uint16_t v) { scalar(v); }
    void u32(std::uint32_t v) { scalar(v); }
    void u64(std::uint64_t v) { scalar(v); }
    void f32(float v) { scalar(v); }
    void f64(double v) { scalar(v); }
    void string(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        text(s);
    }
    /// Appends a u64 length prefix followed by the section payload.
    void section(const ByteWriter& payload) {
        u64(payload.out_.size());
        bytes(payload.out_);
    }

    const std::vector<std::uint8_t>& data() const { return out_; }
    std::vector<std::uint8_t> release() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::span<const std::uint8_t> take(std::size_t n) {
        if (n > in_.size() - pos_) {
            throw FormatError("unexpected end of data");
        }
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    template <typename T>
    T scalar() {
        const auto raw = take(sizeof(T));
        T v;
        std::memcpy(&v, raw.data(), sizeof(T));
        return v;
    }
    std::uint16_t u16() { return scalar<std::uint16_t>(); }
    std::uint32_t u32() { return scalar<std::uint32_t>(); }
    std::uint64_t u64() { return scalar<std::uint64_t>(); }
    float f32() { return scalar<float>(); }
    double f64() { return scalar<double>(); }
    std::string string() {
        const auto n = u32();
        const auto raw = take(n);
        return {reinterpret_cast<const char*>(raw.data()), raw.size()};
    }
    ByteReader section() {
        const auto n = u64();
        return ByteReader(take(static_cast<std::size_t>(n)));
    }

    std::size_t remaining() const { return in_.size() - pos_; }
    bool done() const { return remaining() == 0; }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

}  // namespace dcolor::detail
