#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "srce/error.hpp"

namespace srce::io {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return v;
}

/// Little-endian binary writer with path context on failure.
class Writer {
public:
    explicit Writer(std::string path) : path_(std::move(path)), out_(path_, std::ios::binary | std::ios::trunc) {
        if (!out_) throw IoError(path_, "cannot open for writing");
    }

    template <typename T>
    void put(T v) {
        v = to_little(v);
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
        check();
    }

    void put_bytes(std::span<const char> bytes) {
        out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        check();
    }

    void put_doubles(std::span<const double> values) {
        if constexpr (std::endian::native == std::endian::little) {
            out_.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
            check();
        } else {
            for (double v : values) put(v);
        }
    }

    void close() {
        out_.close();
        if (!out_) throw IoError(path_, "write failed on close");
    }

private:
    void check() {
        if (!out_) throw IoError(path_, "write failed");
    }
    std::string path_;
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(std::string path) : path_(std::move(path)), in_(path_, std::ios::binary) {
        if (!in_) throw IoError(path_, "cannot open for reading");
    }

    template <typename T>
    T get() {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in_) throw IoError(path_, "unexpected end of file");
        return to_little(v);
    }

    void get_bytes(std::span<char> bytes) {
        in_.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!in_) throw IoError(path_, "unexpected end of file");
    }

    void get_doubles(std::span<double> values) {
        if constexpr (std::endian::native == std::endian::little) {
            in_.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
            if (!in_) throw IoError(path_, "unexpected end of file");
        } else {
            for (double& v : values) v = get<double>();
        }
    }

    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
    std::ifstream in_;
};

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    out << text;
    out.close();
    if (!out) throw IoError(path, "write failed");
}

}  // namespace srce::io
