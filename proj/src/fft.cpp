#include "thickspray/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace thickspray::fft {

namespace {

std::mutex g_plan_mutex;

fftw_plan get_plan(int d, int n, int sign) {
    static std::map<std::tuple<int, int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto key = std::make_tuple(d, n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::size_t total = d == 1 ? n : static_cast<std::size_t>(n) * n;
    fftw_complex* in = fftw_alloc_complex(total);
    fftw_complex* out = fftw_alloc_complex(total);
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = d == 1 ? fftw_plan_dft_1d(n, in, out, sign, flags)
                            : fftw_plan_dft_2d(n, n, in, out, sign, flags);
    fftw_free(in);
    fftw_free(out);
    cache.emplace(key, plan);
    return plan;
}

std::vector<cplx> execute(const std::vector<cplx>& in, int d, int n, int sign) {
    std::vector<cplx> out(in.size());
    std::vector<cplx> copy(in);  // fftw takes a non-const input pointer
    fftw_execute_dft(get_plan(d, n, sign), reinterpret_cast<fftw_complex*>(copy.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

}  // namespace

std::vector<cplx> forward(const std::vector<cplx>& values, int d, int n) {
    auto out = execute(values, d, n, FFTW_FORWARD);
    double scale = 1.0 / static_cast<double>(values.size());
    for (auto& c : out) c *= scale;
    return out;
}

std::vector<cplx> forward(const std::vector<double>& values, int d, int n) {
    return forward(std::vector<cplx>(values.begin(), values.end()), d, n);
}

std::vector<cplx> inverse(const std::vector<cplx>& coeffs, int d, int n) {
    return execute(coeffs, d, n, FFTW_BACKWARD);
}

std::vector<double> inverse_real(const std::vector<cplx>& coeffs, int d, int n) {
    auto c = inverse(coeffs, d, n);
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
    return out;
}

}  // namespace thickspray::fft
