#include "kinspec/lattice.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace kinspec {

Lattice::Lattice(int d, int n, double box) : d_(d), n_(n), box_(box) {
    if (d < 1 || d > 3 || n < 2) throw Error("InvalidLattice", "need 1 <= d <= 3 and n >= 2");
    size_ = 1;
    for (int j = 0; j < d; ++j) size_ *= n;
    keep_.resize(size_);
    for (int i = 0; i < size_; ++i) {
        auto m = mode(i);
        bool ok = true;
        for (int j = 0; j < d; ++j) ok = ok && 3 * std::abs(m[j]) <= n;
        keep_[i] = ok;
    }
}

std::array<int, 3> Lattice::mode(int i) const {
    std::array<int, 3> m{0, 0, 0};
    for (int j = d_ - 1; j >= 0; --j) {
        int a = i % n_;
        i /= n_;
        m[j] = a < (n_ + 1) / 2 ? a : a - n_;
    }
    return m;
}

VecR Lattice::k(int i) const {
    auto m = mode(i);
    VecR v(d_);
    for (int j = 0; j < d_; ++j) v(j) = 2.0 * M_PI * m[j] / box_;
    return v;
}

double Lattice::k2(int i) const { return k(i).squaredNorm(); }

int Lattice::index(const std::array<int, 3>& m) const {
    int i = 0;
    for (int j = 0; j < d_; ++j) {
        int a = m[j] < 0 ? m[j] + n_ : m[j];
        if (a < 0 || a >= n_) return -1;
        i = i * n_ + a;
    }
    return i;
}

int Lattice::conj_index(int i) const {
    auto m = mode(i);
    std::array<int, 3> c{0, 0, 0};
    for (int j = 0; j < d_; ++j) c[j] = (n_ - (m[j] < 0 ? m[j] + n_ : m[j])) % n_;
    int out = 0;
    for (int j = 0; j < d_; ++j) out = out * n_ + c[j];
    return out;
}

int Lattice::kept_count() const {
    int c = 0;
    for (char k : keep_) c += k;
    return c;
}

namespace {
std::mutex plan_mutex;  // FFTW planning is not thread-safe
}

struct FFT::Impl {
    fftw_plan fwd = nullptr, bwd = nullptr;
};

FFT::FFT(const Lattice& lat, int howmany) : impl_(std::make_unique<Impl>()), howmany_(howmany) {
    int dims[3] = {lat.n(), lat.n(), lat.n()};
    const int total = lat.size();
    total_ = total;
    scale_ = 1.0 / total;
    std::vector<cplx> a(size_t(total) * howmany), b(size_t(total) * howmany);
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    std::lock_guard<std::mutex> lock(plan_mutex);
    impl_->bwd = fftw_plan_many_dft(lat.dim(), dims, howmany, pa, nullptr, howmany, 1, pb, nullptr, howmany, 1,
                                    FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    impl_->fwd = fftw_plan_many_dft(lat.dim(), dims, howmany, pa, nullptr, howmany, 1, pb, nullptr, howmany, 1,
                                    FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!impl_->fwd || !impl_->bwd) throw Error("FFT", "plan creation failed");
}

FFT::~FFT() {
    std::lock_guard<std::mutex> lock(plan_mutex);
    if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
    if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
}

void FFT::to_grid(const cplx* in, cplx* out) const {
    // new-array execution is thread-safe; FFTW does not modify `in` out of place
    fftw_execute_dft(impl_->bwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void FFT::to_modes(const cplx* in, cplx* out) const {
    fftw_execute_dft(impl_->fwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
    const size_t count = size_t(total_) * howmany_;
    for (size_t i = 0; i < count; ++i) out[i] *= scale_;
}

}  // namespace kinspec
