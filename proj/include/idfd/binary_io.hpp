#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "idfd/errors.hpp"

namespace idfd::binary {

/// Little-endian writer into a growable byte buffer.
class Writer {
public:
    template <class UInt>
    void put(UInt v) {
        for (std::size_t i = 0; i < sizeof(UInt); ++i) {
            bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void put_f64(double x) { put(std::bit_cast<std::uint64_t>(x)); }
    void put_bytes(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
    void put_tag(const char* tag, std::size_t len) {
        put_bytes({reinterpret_cast<const std::uint8_t*>(tag), len});
    }
    const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

/// Little-endian reader; throws TruncatedFile on reads past the end.
class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <class UInt>
    UInt get() {
        need(sizeof(UInt));
        UInt v = 0;
        for (std::size_t i = 0; i < sizeof(UInt); ++i) {
            v |= static_cast<UInt>(static_cast<UInt>(bytes_[pos_ + i]) << (8 * i));
        }
        pos_ += sizeof(UInt);
        return v;
    }
    double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
    std::span<const std::uint8_t> get_bytes(std::size_t n) {
        need(n);
        auto out = bytes_.subspan(pos_, n);
        pos_ += n;
        return out;
    }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            throw TruncatedFile("unexpected end of file at byte " + std::to_string(pos_));
        }
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace idfd::binary
