#include "semsec/dft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "semsec/errors.hpp"

namespace semsec {

namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) {
      fftw_destroy_plan(plan);
    }
  }

  fftw_plan get(std::size_t n, bool inverse) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(n, inverse);
    if (auto it = plans_.find(key); it != plans_.end()) {
      return it->second;
    }
    // Planning with FFTW_ESTIMATE never touches the arrays' contents.
    std::vector<cplx> in(n), out(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()),
                                      inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, bool>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

CVec run(std::span<const cplx> x, bool inverse) {
  if (x.empty()) {
    throw ParameterError("dft: empty input");
  }
  fftw_plan plan = plan_cache().get(x.size(), inverse);
  CVec in(x.begin(), x.end());
  CVec out(x.size());
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

CVec dft(std::span<const cplx> x) { return run(x, false); }

CVec unitary_dft(std::span<const cplx> x, bool inverse) {
  CVec out = run(x, inverse);
  const double scale = 1.0 / std::sqrt(static_cast<double>(x.size()));
  for (auto& v : out) {
    v *= scale;
  }
  return out;
}

}  // namespace semsec
