#include "stepbunch/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "stepbunch/error.hpp"

namespace stepbunch {

namespace {

struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created with FFTW_UNALIGNED so they accept any buffer.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  const Plans& get(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<double> r(n);
    std::vector<fftw_complex> c(n / 2 + 1);
    const int ni = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Plans p;
    p.forward = fftw_plan_dft_r2c_1d(ni, r.data(), c.data(), flags);
    p.backward = fftw_plan_dft_c2r_1d(ni, c.data(), r.data(), flags | FFTW_DESTROY_INPUT);
    return plans_.emplace(n, p).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, Plans> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

std::vector<cplx> rfft(std::span<const double> f) {
  const std::size_t n = f.size();
  if (n < 2 || n % 2 != 0) throw ConfigurationError("rfft: size must be even and >= 2");
  const Plans& p = cache().get(n);
  std::vector<double> in(f.begin(), f.end());
  std::vector<cplx> out(n / 2 + 1);
  fftw_execute_dft_r2c(p.forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& c : out) c *= scale;
  return out;
}

std::vector<double> irfft(std::span<const cplx> c, std::size_t n) {
  if (n < 2 || n % 2 != 0 || c.size() != n / 2 + 1)
    throw ConfigurationError("irfft: spectrum size does not match N/2 + 1");
  const Plans& p = cache().get(n);
  std::vector<cplx> in(c.begin(), c.end());
  in[0].imag(0.0);
  in[n / 2].imag(0.0);
  std::vector<double> out(n);
  fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  return out;
}

}  // namespace stepbunch
