#include "bloch2d/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <thread>

#include "bloch2d/dft.hpp"

namespace bloch2d {

namespace {

// exp(i s k_p) for p in [0, L).
std::vector<cplx> mode_phases(const LatticeWindow& w, int s) {
  std::vector<cplx> out(static_cast<std::size_t>(w.size()));
  for (int p = 0; p < w.size(); ++p) out[p] = std::polar(1.0, s * w.quasimomentum(p));
  return out;
}

// exp(-i eta j) for j = lo..hi.
std::vector<cplx> site_phases(const LatticeWindow& w, double eta_axis) {
  std::vector<cplx> out(static_cast<std::size_t>(w.size()));
  for (int j = w.lo(); j <= w.hi(); ++j) out[j - w.lo()] = std::polar(1.0, -eta_axis * j);
  return out;
}

void multiply_US(std::vector<cplx>& amps, const LatticeWindow& w, const PhaseState& phase) {
  const auto p1 = site_phases(w, phase.eta1);
  const auto p2 = site_phases(w, phase.eta2);
  const std::size_t L = w.size();
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < L; ++j) amps[i * L + j] *= p1[i] * p2[j];
  }
}

// Pairs (shift, chi) with one representative per +/- partner.
std::vector<std::pair<Shift, cplx>> representatives(const ChiTable& chis) {
  std::vector<std::pair<Shift, cplx>> out;
  for (const auto& [s, c] : chis.entries()) {
    auto partner = chis.entries().find(-s);
    if (partner == chis.entries().end()) {
      std::ostringstream os;
      os << "chi table has (" << s.u << "," << s.v << ") but not its partner";
      throw IncompleteChiTable(os.str());
    }
    if (-s < s) continue;
    out.emplace_back(s, c);
  }
  return out;
}

// Multiplies the spectrum by exp(-i E(k)), E = sum_a chi_a e^{i a.k} (real).
void multiply_UI(std::vector<cplx>& spectrum, const LatticeWindow& w,
                 const std::vector<std::pair<Shift, cplx>>& reps,
                 const ChiTable& chis) {
  const std::size_t L = w.size();
  std::vector<double> energy(L * L, 0.0);
  for (const auto& [s, c] : reps) {
    const cplx partner = chis.at(-s);
    const auto e1 = mode_phases(w, s.u);
    const auto e2 = mode_phases(w, s.v);
    for (std::size_t p = 0; p < L; ++p) {
      for (std::size_t q = 0; q < L; ++q) {
        const cplx e = e1[p] * e2[q];
        energy[p * L + q] += std::real(c * e + partner * std::conj(e));
      }
    }
  }
  for (std::size_t i = 0; i < L * L; ++i) spectrum[i] *= std::polar(1.0, -energy[i]);
}

struct Moments {
  double n1 = 0, n2 = 0, n1sq = 0, n2sq = 0, n12 = 0, boundary = 0;
};

Moments measure(const std::vector<cplx>& amps, const LatticeWindow& w) {
  Moments out;
  const int L = w.size();
  for (int i = 0; i < L; ++i) {
    const double m = w.lo() + i;
    const bool edge_m = i < 2 || i >= L - 2;
    double row = 0.0, row_n = 0.0, row_n2 = 0.0, row_edge = 0.0;
    for (int j = 0; j < L; ++j) {
      const double n = w.lo() + j;
      const double p = std::norm(amps[static_cast<std::size_t>(i) * L + j]);
      row += p;
      row_n += p * n;
      row_n2 += p * n * n;
      if (edge_m || j < 2 || j >= L - 2) row_edge += p;
    }
    out.n1 += m * row;
    out.n1sq += m * m * row;
    out.n2 += row_n;
    out.n2sq += row_n2;
    out.n12 += m * row_n;
    out.boundary += row_edge;
  }
  return out;
}

}  // namespace

LatticeState apply_US(const LatticeState& state, const PhaseState& phase) {
  std::vector<cplx> amps = state.amplitudes();
  multiply_US(amps, state.window(), phase);
  return LatticeState(state.window(), std::move(amps));
}

LatticeState apply_US(const LatticeState& state, const FieldSpec& field, double t) {
  return apply_US(state, eta(field, t));
}

LatticeState apply_UI(const LatticeState& state, const ChiTable& chis) {
  const auto reps = representatives(chis);
  const LatticeWindow& w = state.window();
  Dft2d dft(w.size());
  std::vector<cplx> amps = state.amplitudes();
  dft.forward(amps);
  multiply_UI(amps, w, reps, chis);
  dft.inverse(amps);
  return LatticeState(w, std::move(amps));
}

LatticeState apply_UI(const LatticeState& state, const CouplingSet& couplings,
                      const ChiTable& chis) {
  if (!chis.covers(couplings)) throw IncompleteChiTable("chi table does not cover the coupling set");
  return apply_UI(state, chis);
}

double overlap_modulus(const LatticeState& a, const LatticeState& b) {
  if (!(a.window() == b.window())) throw InvalidArgument("states live on different windows");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < a.amplitudes().size(); ++i) {
    acc += std::conj(a.amplitudes()[i]) * b.amplitudes()[i];
  }
  return std::abs(acc);
}

double distance(const LatticeState& a, const LatticeState& b) {
  if (!(a.window() == b.window())) throw InvalidArgument("states live on different windows");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.amplitudes().size(); ++i) {
    acc += std::norm(a.amplitudes()[i] - b.amplitudes()[i]);
  }
  return std::sqrt(acc);
}

TrajectoryRecord evolve(const PropagationPlan& plan, const LatticeState& initial,
                        const WarningSink& sink) {
  const auto& grid = plan.t_grid;
  if (grid.empty()) throw InvalidArgument("time grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw InvalidArgument("time grid must be non-negative");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidArgument("time grid must be strictly increasing");
  }
  if (!(initial.window() == plan.window)) throw InvalidArgument("initial state does not match the window");
  if (std::abs(initial.norm_squared() - 1.0) > 1e-10) throw InvalidArgument("initial state is not normalized");

  // Phase data first: time-dependent magnitudes are integrated incrementally.
  std::vector<PhaseState> phases;
  std::vector<ChiTable> tables;
  phases.reserve(grid.size());
  tables.reserve(grid.size());
  if (plan.field.is_constant()) {
    for (double t : grid) {
      phases.push_back(eta(plan.field, t));
      tables.push_back(chi(plan.field, plan.couplings, t));
    }
  } else {
    PhaseIntegrator integ(plan.field, plan.couplings);
    for (double t : grid) {
      integ.advance_to(t);
      phases.push_back(integ.phase());
      tables.push_back(integ.table());
    }
  }

  const LatticeWindow& w = plan.window;
  Dft2d dft(w.size());
  std::vector<cplx> spectrum0 = initial.amplitudes();
  dft.forward(spectrum0);

  const std::size_t count = grid.size();
  std::vector<Moments> measured(count);
  std::vector<cplx> final_amps;

  auto run = [&](std::size_t begin, std::size_t end, std::size_t stride) {
    std::vector<cplx> work;
    for (std::size_t i = begin; i < end; i += stride) {
      work = spectrum0;
      multiply_UI(work, w, representatives(tables[i]), tables[i]);
      dft.inverse(work);
      multiply_US(work, w, phases[i]);
      measured[i] = measure(work, w);
      if (i + 1 == count) final_amps = work;
    }
  };

  int threads = plan.threads;
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    run(0, count, 1);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(run, k, count, threads);
    for (auto& th : pool) th.join();
  }

  TrajectoryRecord rec{{}, LatticeState(w, std::move(final_amps)), 0.0, {}};
  const int q = plan.field.q();
  const int r = plan.field.r();
  const double qr2 = q * q + r * r;
  for (std::size_t i = 0; i < count; ++i) {
    const Moments& m = measured[i];
    if (m.boundary > kBoundaryErrorThreshold) {
      std::ostringstream os;
      os << "boundary ring occupancy " << m.boundary << " exceeds " << kBoundaryErrorThreshold
         << " at t = " << grid[i] << "; enlarge the window";
      throw BoundaryOverflow(os.str());
    }
    rec.boundary_max = std::max(rec.boundary_max, m.boundary);
    if (plan.records.moments) rec.samples.push_back(make_sample(grid[i], m.n1, m.n2, m.n1sq, m.n2sq));
    if (plan.records.orthogonal_variance) {
      const double p = (r * m.n1 - q * m.n2) / qr2;
      const double p2 = (r * r * m.n1sq + q * q * m.n2sq - 2.0 * r * q * m.n12) / (qr2 * qr2);
      rec.orthogonal_variance.push_back(p2 - p * p);
    }
  }
  if (rec.boundary_max > kBoundaryWarnThreshold) {
    std::ostringstream os;
    os << "boundary ring occupancy reached " << rec.boundary_max << " during propagation";
    emit_warning(sink, {"boundary", os.str(), rec.boundary_max});
  }
  return rec;
}

}  // namespace bloch2d
