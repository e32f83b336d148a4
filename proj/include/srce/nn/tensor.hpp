#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <memory>
#include <new>
#include <vector>

#include "srce/error.hpp"

namespace srce::nn {

/// Allocator whose value-less construct() default-initializes, so resize()
/// on doubles skips zeroing. Storage is 64-byte aligned: Eigen's vectorized
/// reductions round differently depending on the start address, and training
/// must be bit-reproducible.
template <typename T>
struct DefaultInitAllocator : std::allocator<T> {
    static constexpr std::align_val_t kAlign{64};
    template <typename U>
    struct rebind {
        using other = DefaultInitAllocator<U>;
    };
    using std::allocator<T>::allocator;
    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }
    template <typename U>
    void construct(U* p) noexcept(std::is_nothrow_default_constructible_v<U>) {
        ::new (static_cast<void*>(p)) U;
    }
    template <typename U, typename... Args>
    void construct(U* p, Args&&... args) {
        ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
    }
};

/// Dense (batch, channels, height, width) array of doubles, row-major
/// (width fastest).
class Tensor4 {
public:
    using Dims = std::array<std::size_t, 4>;

    Tensor4() = default;
    explicit Tensor4(Dims dims, double fill = 0.0) : dims_(dims), data_(count(dims), fill) {}
    Tensor4(std::size_t b, std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
        : Tensor4(Dims{b, c, h, w}, fill) {}

    static std::size_t count(const Dims& d) { return d[0] * d[1] * d[2] * d[3]; }

    /// Storage left unset; for outputs that are fully overwritten.
    static Tensor4 uninitialized(Dims dims) {
        Tensor4 t;
        t.dims_ = dims;
        t.data_.resize(count(dims));
        return t;
    }

    const Dims& dims() const noexcept { return dims_; }
    std::size_t batch() const noexcept { return dims_[0]; }
    std::size_t channels() const noexcept { return dims_[1]; }
    std::size_t height() const noexcept { return dims_[2]; }
    std::size_t width() const noexcept { return dims_[3]; }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t plane() const noexcept { return dims_[2] * dims_[3]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::span<double> span() noexcept { return data_; }
    std::span<const double> span() const noexcept { return data_; }

    double& operator()(std::size_t b, std::size_t c, std::size_t h, std::size_t w) {
        return data_[((b * dims_[1] + c) * dims_[2] + h) * dims_[3] + w];
    }
    double operator()(std::size_t b, std::size_t c, std::size_t h, std::size_t w) const {
        return data_[((b * dims_[1] + c) * dims_[2] + h) * dims_[3] + w];
    }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Pointer to the (channels x height x width) block of sample b.
    double* sample(std::size_t b) noexcept { return data_.data() + b * dims_[1] * plane(); }
    const double* sample(std::size_t b) const noexcept { return data_.data() + b * dims_[1] * plane(); }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
    }

    friend bool operator==(const Tensor4&, const Tensor4&) = default;

private:
    Dims dims_{0, 0, 0, 0};
    std::vector<double, DefaultInitAllocator<double>> data_;
};

inline std::string dims_string(const Tensor4::Dims& d) {
    return "(" + std::to_string(d[0]) + ", " + std::to_string(d[1]) + ", " + std::to_string(d[2]) + ", " +
           std::to_string(d[3]) + ")";
}

inline void require_same_shape(const Tensor4& a, const Tensor4& b, const char* what) {
    if (a.dims() != b.dims())
        throw InputError(std::string(what) + ": shape mismatch " + dims_string(a.dims()) + " vs " + dims_string(b.dims()));
}

}  // namespace srce::nn
