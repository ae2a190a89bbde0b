#include "dwt/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace dwt::fft {
namespace {

// FFTW planning is not thread-safe; execution of an existing plan with the
// new-array interface is. Plans are created once per (n, sign) and kept.
struct PlanCache {
    std::mutex mu;
    std::map<std::pair<int, int>, fftw_plan> plans;

    fftw_plan get(int n, int sign) {
        std::lock_guard<std::mutex> lock(mu);
        auto key = std::make_pair(n, sign);
        auto it = plans.find(key);
        if (it != plans.end()) return it->second;
        auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        fftw_plan p = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        if (!p) throw std::runtime_error("fftw planning failed");
        plans.emplace(key, p);
        return p;
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void run(std::complex<double>* data, int n, int sign) {
    if (n <= 0) return;
    fftw_plan p = cache().get(n, sign);
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, d, d);
}

}  // namespace

void forward(std::complex<double>* data, int n) { run(data, n, FFTW_FORWARD); }
void backward(std::complex<double>* data, int n) { run(data, n, FFTW_BACKWARD); }

Eigen::VectorXcd forward(const Eigen::VectorXcd& in) {
    Eigen::VectorXcd out = in;
    forward(out.data(), static_cast<int>(out.size()));
    return out;
}

Eigen::VectorXcd backward(const Eigen::VectorXcd& in) {
    Eigen::VectorXcd out = in;
    backward(out.data(), static_cast<int>(out.size()));
    return out;
}

}  // namespace dwt::fft
