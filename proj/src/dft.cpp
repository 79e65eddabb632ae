#include "bloch2d/dft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace bloch2d {

namespace {

// FFTW's planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanCache {
  std::map<std::pair<int, int>, fftw_plan> plans;
  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

fftw_plan cached_plan(int L, int sign) {
  static PlanCache cache;
  std::lock_guard lock(planner_mutex());
  auto key = std::make_pair(L, sign);
  auto it = cache.plans.find(key);
  if (it != cache.plans.end()) return it->second;
  std::vector<cplx> scratch(static_cast<std::size_t>(L) * L);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan = fftw_plan_dft_2d(L, L, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan) throw Error("FFTW could not create a plan");
  cache.plans.emplace(key, plan);
  return plan;
}

void check_size(const std::vector<cplx>& data, int L) {
  if (data.size() != static_cast<std::size_t>(L) * L) {
    throw InvalidArgument("DFT buffer does not match the window size");
  }
}

}  // namespace

Dft2d::Dft2d(int L)
    : L_(L), forward_plan_(cached_plan(L, FFTW_FORWARD)), inverse_plan_(cached_plan(L, FFTW_BACKWARD)) {}

void Dft2d::forward(std::vector<cplx>& data) const {
  check_size(data, L_);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), buf, buf);
}

void Dft2d::inverse(std::vector<cplx>& data) const {
  check_size(data, L_);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), buf, buf);
  const double scale = 1.0 / (static_cast<double>(L_) * L_);
  for (auto& x : data) x *= scale;
}

}  // namespace bloch2d
