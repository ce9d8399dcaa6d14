#include "isac/fft.hpp"

#include <fftw3.h>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace isac::fft {

namespace {

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

// Plans are never destroyed; the cache lives for the whole process.
fftw_plan get_plan(std::size_t n, int sign) {
    static std::map<std::pair<std::size_t, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    CVector scratch(n);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(int(n), p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, plan);
    return plan;
}

void run(std::span<Complex> data, int sign) {
    if (data.empty()) return;
    fftw_plan plan = get_plan(data.size(), sign);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

void scale(std::span<Complex> data, double s) {
    for (auto& v : data) v *= s;
}

} // namespace

void forward(std::span<Complex> data) { run(data, FFTW_FORWARD); }
void inverse(std::span<Complex> data) { run(data, FFTW_BACKWARD); }

void forward_unitary(std::span<Complex> data) {
    forward(data);
    scale(data, 1.0 / std::sqrt(double(data.size())));
}

void inverse_unitary(std::span<Complex> data) {
    inverse(data);
    scale(data, 1.0 / std::sqrt(double(data.size())));
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace isac::fft
