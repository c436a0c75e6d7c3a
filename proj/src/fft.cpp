#include "toa/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace toa::fft {
namespace {

// Plans are created in place with FFTW_UNALIGNED so they can be reused on any
// buffer of the same length through the new-array execute interface, which is
// thread safe. Planning itself is not, hence the lock.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    CVec scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(std::span<cplx> data, int sign) {
  if (data.empty()) return;
  fftw_plan plan = cache().get(data.size(), sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace

void forward(std::span<cplx> data) { execute(data, FFTW_FORWARD); }
void backward(std::span<cplx> data) { execute(data, FFTW_BACKWARD); }

}  // namespace toa::fft
