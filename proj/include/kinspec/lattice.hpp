#pragma once

#include <array>
#include <memory>

#include "kinspec/common.hpp"

namespace kinspec {

// Fourier lattice on the torus [0, box)^d with n points per axis, stored in
// FFT order: axis index j <-> integer mode m = j (j < n/2) or j - n.
// Convention: f(x) = sum_k fhat_k exp(i k.x), k = 2 pi m / box.
class Lattice {
public:
    Lattice(int d, int n, double box = 2.0 * M_PI);
    int dim() const { return d_; }
    int n() const { return n_; }
    double box() const { return box_; }
    int size() const { return size_; }
    std::array<int, 3> mode(int i) const;  // integer m
    VecR k(int i) const;
    double k2(int i) const;
    int index(const std::array<int, 3>& m) const;  // -1 if outside
    int conj_index(int i) const;                   // mode -m
    bool kept(int i) const { return keep_[i]; }    // 2/3 rule: all |m_j| <= n/3
    int kept_count() const;
    double bracket(int i, double s) const { return std::pow(1.0 + k2(i), s); }  // <k>^{2s}

private:
    int d_, n_, size_;
    double box_;
    std::vector<char> keep_;
};

// Batched complex FFT over `howmany` interleaved fields: element (mode i,
// field a) lives at data[i * howmany + a].
class FFT {
public:
    FFT(const Lattice& lat, int howmany);
    ~FFT();
    FFT(const FFT&) = delete;
    FFT& operator=(const FFT&) = delete;
    // fhat -> grid values
    void to_grid(const cplx* in, cplx* out) const;
    // grid values -> fhat (normalized by 1/n^d)
    void to_modes(const cplx* in, cplx* out) const;
    int howmany() const { return howmany_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int howmany_;
    int total_ = 0;
    double scale_;
};

}  // namespace kinspec
