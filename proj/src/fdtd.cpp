#include "pcc/fdtd.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>

#include "pcc/errors.hpp"

namespace pcc {

namespace {

constexpr double kPi = 3.14159265358979323846;

int axis_of(FieldComponent c) { return static_cast<int>(c) % 3; }
bool is_electric(FieldComponent c) { return static_cast<int>(c) < 3; }

// True when component c sits at a half-integer position along axis q.
bool half_along(FieldComponent c, int q) {
  return is_electric(c) ? (q == axis_of(c)) : (q != axis_of(c));
}

const char* kComponentNames[6] = {"Ex", "Ey", "Ez", "Hx", "Hy", "Hz"};

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* context) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError(std::string(context) + ": unknown key '" + it.key() + "'");
  }
}

MirrorParity parity_from_string(const std::string& s) {
  if (s == "none") return MirrorParity::None;
  if (s == "even") return MirrorParity::Even;
  if (s == "odd") return MirrorParity::Odd;
  throw ConfigError("symmetry parity must be none|even|odd, got '" + s + "'");
}

// Persistent worker pool; chunk results are written to disjoint ranges, so
// field bytes are identical for any worker count.
class Pool {
 public:
  explicit Pool(int workers) {
    if (workers <= 1) return;
    threads_.reserve(workers);
    for (int id = 0; id < workers; ++id)
      threads_.emplace_back([this, id, workers] { worker(id, workers); });
  }
  ~Pool() {
    if (!threads_.empty()) {
      {
        std::lock_guard<std::mutex> lk(m_);
        stop_ = true;
        ++generation_;
      }
      start_.notify_all();
      for (auto& t : threads_) t.join();
    }
  }
  void run(int lo, int hi, const std::function<void(int, int)>& fn) {
    if (threads_.empty() || hi - lo <= 1) {
      if (hi > lo) fn(lo, hi);
      return;
    }
    {
      std::lock_guard<std::mutex> lk(m_);
      lo_ = lo;
      hi_ = hi;
      job_ = &fn;
      pending_ = static_cast<int>(threads_.size());
      ++generation_;
    }
    start_.notify_all();
    std::unique_lock<std::mutex> lk(m_);
    done_.wait(lk, [this] { return pending_ == 0; });
  }

 private:
  void worker(int id, int n) {
    long seen = 0;
    for (;;) {
      std::unique_lock<std::mutex> lk(m_);
      start_.wait(lk, [&] { return generation_ != seen; });
      seen = generation_;
      if (stop_) return;
      long lo = lo_, hi = hi_;
      const auto* job = job_;
      lk.unlock();
      long span = hi - lo;
      int b = static_cast<int>(lo + span * id / n);
      int e = static_cast<int>(lo + span * (id + 1) / n);
      if (b < e) (*job)(b, e);
      lk.lock();
      if (--pending_ == 0) {
        lk.unlock();
        done_.notify_one();
      }
    }
  }

  std::vector<std::thread> threads_;
  std::mutex m_;
  std::condition_variable start_, done_;
  const std::function<void(int, int)>* job_ = nullptr;
  long generation_ = 0;
  long lo_ = 0, hi_ = 0;
  int pending_ = 0;
  bool stop_ = false;
};

}  // namespace

FieldComponent component_from_name(const std::string& name) {
  for (int i = 0; i < 6; ++i)
    if (name == kComponentNames[i]) return static_cast<FieldComponent>(i);
  throw ConfigError("unknown field component '" + name + "'");
}

std::string component_name(FieldComponent c) { return kComponentNames[static_cast<int>(c)]; }

SymmetrySpec SymmetrySpec::from_json(const json& j) {
  reject_unknown_keys(j, {"x", "y", "z"}, "symmetry");
  SymmetrySpec s;
  if (j.contains("x")) s.x = parity_from_string(j.at("x").get<std::string>());
  if (j.contains("y")) s.y = parity_from_string(j.at("y").get<std::string>());
  if (j.contains("z")) s.z = parity_from_string(j.at("z").get<std::string>());
  return s;
}

PmlSpec PmlSpec::from_json(const json& j) {
  reject_unknown_keys(j, {"cells", "grading_order", "reflection_target", "alpha_max"}, "pml");
  PmlSpec p;
  if (j.contains("cells")) p.cells = j.at("cells").get<int>();
  if (j.contains("grading_order")) p.grading_order = j.at("grading_order").get<double>();
  if (j.contains("reflection_target")) p.reflection_target = j.at("reflection_target").get<double>();
  if (j.contains("alpha_max")) p.alpha_max = j.at("alpha_max").get<double>();
  if (p.cells < 0) throw ConfigError("pml.cells must be >= 0");
  if (p.grading_order < 1) throw ConfigError("pml.grading_order must be >= 1");
  if (p.reflection_target <= 0 || p.reflection_target >= 1)
    throw ConfigError("pml.reflection_target must lie in (0, 1)");
  if (p.alpha_max < 0) throw ConfigError("pml.alpha_max must be >= 0");
  return p;
}

SourceSpec SourceSpec::from_json(const json& j) {
  reject_unknown_keys(j, {"position", "component", "center_frequency", "bandwidth"}, "source");
  SourceSpec s;
  if (j.contains("position")) {
    auto v = j.at("position").get<std::vector<int>>();
    if (v.size() != 3) throw ConfigError("source.position must have 3 entries");
    s.position = {v[0], v[1], v[2]};
  }
  if (j.contains("component")) s.component = component_from_name(j.at("component").get<std::string>());
  if (j.contains("center_frequency")) s.center_frequency = j.at("center_frequency").get<double>();
  if (j.contains("bandwidth")) s.bandwidth = j.at("bandwidth").get<double>();
  if (s.center_frequency <= 0) throw ConfigError("source.center_frequency must be > 0");
  if (s.bandwidth <= 0) throw ConfigError("source.bandwidth must be > 0");
  return s;
}

struct Solver::Impl {
  RunConfig cfg;
  int N[3];       // cells per axis
  int M[3];       // node array extents (N+1)
  bool act[3];    // axes with more than one cell; others are invariant
  MirrorParity mir[3];
  double delta;   // cell size, units of a
  double dtv;     // time step, units of a/c
  std::size_t s[3];
  std::size_t total;

  std::array<std::vector<double>, 6> f;    // Ex Ey Ez Hx Hy Hz on Yee nodes
  std::array<std::vector<double>, 3> ce;   // dt / eps at E nodes
  // Split-field memory for the two curl terms of each component.
  std::array<std::array<std::vector<double>, 2>, 6> psi;
  std::array<std::vector<double>, 3> b_int, a_int, b_half, a_half;
  bool pml_low[3]{}, pml_high[3]{};
  int W = 0;

  std::array<std::vector<double>, 3> hprev;
  std::vector<double> energy_trace;
  double last_conserved = 0;

  std::array<std::vector<std::complex<double>>, 6> acc;  // DFT accumulators

  int steps_taken = 0;
  int off_step = 0;
  double src_t0 = 0, src_sigma_t = 0;

  // grid metadata carried into snapshots
  std::array<int, 3> gdims{};
  std::array<double, 3> gorigin{};
  double gspacing = 0, ga = 0;

  std::unique_ptr<Pool> pool;

  std::size_t idx(int i, int j, int k) const { return i + s[1] * j + s[2] * k; }

  void parallel_for(int lo, int hi, const std::function<void(int, int)>& fn) {
    if (pool)
      pool->run(lo, hi, fn);
    else if (hi > lo)
      fn(lo, hi);
  }

  void setup(const PermittivityGrid& grid);
  void setup_pml();
  void update_e_comp(int a);
  void update_h_comp(int a);
  void pml_correct_e(int a, int term);
  void pml_correct_h(int a, int term);
  double source_wave(double t) const;
  void accumulate_dft();
  void step();
  double plain_energy() const;
};

double Solver::Impl::source_wave(double t) const {
  const double u = t - src_t0;
  return std::sin(2 * kPi * cfg.source->center_frequency * u) *
         std::exp(-0.5 * u * u / (src_sigma_t * src_sigma_t));
}

void Solver::Impl::setup(const PermittivityGrid& grid) {
  if (grid.dims[0] < 1 || grid.dims[1] < 1 || grid.dims[2] < 1)
    throw ConfigError("grid has empty dimensions");
  if (grid.spacing <= 0 || grid.a <= 0) throw ConfigError("grid spacing and a must be positive");
  if (cfg.steps < 1) throw ConfigError("steps must be >= 1");
  if (cfg.courant_factor <= 0 || cfg.courant_factor > 1)
    throw ConfigError("courant_factor must lie in (0, 1]");
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");

  mir[0] = cfg.symmetry.x;
  mir[1] = cfg.symmetry.y;
  mir[2] = cfg.symmetry.z;

  int active_axes = 0;
  for (int q = 0; q < 3; ++q) {
    N[q] = grid.dims[q];
    M[q] = N[q] + 1;
    act[q] = N[q] > 1;
    if (act[q]) ++active_axes;
    if (!act[q] && mir[q] != MirrorParity::None)
      throw ConfigError("symmetry plane on a single-cell axis");
  }
  if (active_axes == 0) throw ConfigError("grid must have at least one axis with > 1 cell");

  delta = grid.spacing / grid.a;
  dtv = cfg.courant_factor * delta / std::sqrt(static_cast<double>(active_axes));

  s[0] = 1;
  s[1] = static_cast<std::size_t>(M[0]);
  s[2] = static_cast<std::size_t>(M[0]) * M[1];
  total = static_cast<std::size_t>(M[0]) * M[1] * M[2];

  for (auto& v : f) v.assign(total, 0.0);

  // dt/eps with the edge-adjacent cell average; untouched nodes keep eps = 1.
  for (int a = 0; a < 3; ++a) {
    ce[a].assign(total, dtv);
    const int t1 = (a + 1) % 3, t2 = (a + 2) % 3;
    int hi[3];
    hi[a] = act[a] ? N[a] - 1 : 0;
    hi[t1] = act[t1] ? N[t1] : 0;
    hi[t2] = act[t2] ? N[t2] : 0;
    for (int k = 0; k <= hi[2]; ++k)
      for (int j = 0; j <= hi[1]; ++j)
        for (int i = 0; i <= hi[0]; ++i) {
          int co[3] = {i, j, k};
          int own = act[a] ? co[a] : 0;
          auto clamp_cell = [&](int q, int v) {
            return act[q] ? std::clamp(v, 0, N[q] - 1) : 0;
          };
          double eps = 0;
          for (int u = 0; u < 2; ++u)
            for (int v = 0; v < 2; ++v) {
              int cell[3];
              cell[a] = own;
              cell[t1] = clamp_cell(t1, co[t1] - 1 + u);
              cell[t2] = clamp_cell(t2, co[t2] - 1 + v);
              eps += grid.at(cell[0], cell[1], cell[2]);
            }
          eps *= 0.25;
          ce[a][idx(i, j, k)] = dtv / eps;
        }
  }

  setup_pml();

  if (cfg.source) {
    const auto& src = *cfg.source;
    for (int q = 0; q < 3; ++q) {
      int p = src.position[q];
      if (p < 0 || p > (act[q] ? N[q] : 0))
        throw ConfigError("source position outside the grid");
    }
    const double sigma_f = src.bandwidth / 2;
    src_sigma_t = 1.0 / (2 * kPi * sigma_f);
    src_t0 = 5 * src_sigma_t;
    off_step = static_cast<int>(std::ceil(2 * src_t0 / dtv));
    if (src.center_frequency + src.bandwidth >= 1.0 / (2 * dtv))
      throw ConfigError("source spectrum exceeds the grid Nyquist frequency");
  }

  for (const auto& p : cfg.probes)
    for (int q = 0; q < 3; ++q)
      if (p.position[q] < 0 || p.position[q] > (act[q] ? N[q] : 0))
        throw ConfigError("probe position outside the grid");

  if (cfg.dft) {
    if (cfg.dft->frequency <= 0 || cfg.dft->frequency >= 1.0 / (2 * dtv))
      throw ConfigError("dft frequency must lie below the grid Nyquist frequency");
    for (FieldComponent c : cfg.dft->components)
      acc[static_cast<int>(c)].assign(total, std::complex<double>(0, 0));
  }

  if (cfg.monitor_energy)
    for (auto& v : hprev) v.assign(total, 0.0);

  gdims = grid.dims;
  gorigin = grid.origin;
  gspacing = grid.spacing;
  ga = grid.a;

  if (cfg.workers > 1) pool = std::make_unique<Pool>(cfg.workers);
}

void Solver::Impl::setup_pml() {
  W = cfg.pml.cells;
  for (int q = 0; q < 3; ++q) {
    pml_low[q] = W > 0 && act[q] && mir[q] == MirrorParity::None;
    pml_high[q] = W > 0 && act[q];
    if ((pml_low[q] || pml_high[q])) {
      const int need = W * (pml_low[q] ? 2 : 1) + 4;
      if (N[q] < need)
        throw ConfigError("grid too small for the absorbing layers along axis " +
                          std::to_string(q));
    }
  }
  if (W == 0) return;

  const double m = cfg.pml.grading_order;
  const double smax = -(m + 1) * std::log(cfg.pml.reflection_target) / (2 * W * delta);
  const double amax = cfg.pml.alpha_max;

  auto coef = [&](int q, double pos, double& b, double& a) {
    double xi = 0;
    if (pml_low[q] && pos < W)
      xi = (W - pos) / W;
    else if (pml_high[q] && pos > N[q] - W)
      xi = (pos - (N[q] - W)) / W;
    if (xi <= 0) {
      b = 1.0;
      a = 0.0;
      return;
    }
    const double sig = smax * std::pow(xi, m);
    const double alp = amax * (1 - xi);
    b = std::exp(-(sig + alp) * dtv);
    a = sig / (sig + alp) * (b - 1.0);
  };

  for (int q = 0; q < 3; ++q) {
    if (!(pml_low[q] || pml_high[q])) continue;
    b_int[q].resize(M[q]);
    a_int[q].resize(M[q]);
    b_half[q].resize(N[q]);
    a_half[q].resize(N[q]);
    for (int i = 0; i <= N[q]; ++i) coef(q, i, b_int[q][i], a_int[q][i]);
    for (int i = 0; i < N[q]; ++i) coef(q, i + 0.5, b_half[q][i], a_half[q][i]);
  }

  for (int c = 0; c < 6; ++c) {
    const int a = c % 3;
    const int d[2] = {(a + 1) % 3, (a + 2) % 3};
    for (int t = 0; t < 2; ++t)
      if (pml_low[d[t]] || pml_high[d[t]]) psi[c][t].assign(total, 0.0);
  }
}

void Solver::Impl::update_e_comp(int a) {
  const int d1 = (a + 1) % 3, d2 = (a + 2) % 3;
  double* F = f[a].data();
  const double* P = f[3 + d2].data();  // dE_a/dt = +d_{d1} H_{d2} - d_{d2} H_{d1}
  const double* Q = f[3 + d1].data();
  const double* C = ce[a].data();
  const double inv = 1.0 / delta;
  const bool use1 = act[d1], use2 = act[d2];
  const std::ptrdiff_t s1 = s[d1], s2 = s[d2];

  int lo[3], hi[3];
  bool dbl[3] = {false, false, false};
  for (int q = 0; q < 3; ++q) {
    if (!act[q]) {
      lo[q] = hi[q] = 0;
    } else if (q == a) {
      lo[q] = 0;
      hi[q] = N[q] - 1;
    } else {
      const bool pmc = mir[q] == MirrorParity::Even;
      lo[q] = pmc ? 0 : 1;
      hi[q] = N[q] - 1;
      dbl[q] = pmc;
    }
  }

  parallel_for(lo[2], hi[2] + 1, [&](int k0, int k1) {
    for (int k = k0; k < k1; ++k)
      for (int j = lo[1]; j <= hi[1]; ++j) {
        const std::size_t row = idx(0, j, k);
        for (int i = lo[0]; i <= hi[0]; ++i) {
          const std::size_t n = row + i;
          const int co[3] = {i, j, k};
          double t1 = 0, t2 = 0;
          if (use1) t1 = (dbl[d1] && co[d1] == 0) ? 2 * P[n] : P[n] - P[n - s1];
          if (use2) t2 = (dbl[d2] && co[d2] == 0) ? 2 * Q[n] : Q[n] - Q[n - s2];
          F[n] += C[n] * (t1 - t2) * inv;
        }
      }
  });
}

void Solver::Impl::update_h_comp(int a) {
  const int d1 = (a + 1) % 3, d2 = (a + 2) % 3;
  double* F = f[3 + a].data();
  const double* P = f[d2].data();  // dH_a/dt = -(d_{d1} E_{d2} - d_{d2} E_{d1})
  const double* Q = f[d1].data();
  const double inv = 1.0 / delta;
  const bool use1 = act[d1], use2 = act[d2];
  const std::ptrdiff_t s1 = s[d1], s2 = s[d2];

  int lo[3], hi[3];
  for (int q = 0; q < 3; ++q) {
    if (!act[q]) {
      lo[q] = hi[q] = 0;
    } else if (q == a) {
      lo[q] = 0;
      hi[q] = N[q];
    } else {
      lo[q] = 0;
      hi[q] = N[q] - 1;
    }
  }

  parallel_for(lo[2], hi[2] + 1, [&](int k0, int k1) {
    for (int k = k0; k < k1; ++k)
      for (int j = lo[1]; j <= hi[1]; ++j) {
        const std::size_t row = idx(0, j, k);
        for (int i = lo[0]; i <= hi[0]; ++i) {
          const std::size_t n = row + i;
          const double t1 = use1 ? P[n + s1] - P[n] : 0.0;
          const double t2 = use2 ? Q[n + s2] - Q[n] : 0.0;
          F[n] -= dtv * (t1 - t2) * inv;
        }
      }
  });
}

void Solver::Impl::pml_correct_e(int a, int term) {
  if (psi[a][term].empty()) return;
  const int d = term == 0 ? (a + 1) % 3 : (a + 2) % 3;
  const int dsrc = term == 0 ? (a + 2) % 3 : (a + 1) % 3;
  const double sign = term == 0 ? 1.0 : -1.0;
  double* F = f[a].data();
  const double* S = f[3 + dsrc].data();
  const double* C = ce[a].data();
  double* PS = psi[a][term].data();
  const double* bc = b_int[d].data();
  const double* ac = a_int[d].data();
  const double inv = 1.0 / delta;
  const std::ptrdiff_t sd = s[d];

  int lo[3], hi[3];
  for (int q = 0; q < 3; ++q) {
    if (!act[q]) {
      lo[q] = hi[q] = 0;
    } else if (q == a) {
      lo[q] = 0;
      hi[q] = N[q] - 1;
    } else {
      lo[q] = mir[q] == MirrorParity::Even ? 0 : 1;
      hi[q] = N[q] - 1;
    }
  }

  auto sweep = [&](int dlo, int dhi) {  // inclusive slab range along d
    int rl[3] = {lo[0], lo[1], lo[2]}, rh[3] = {hi[0], hi[1], hi[2]};
    rl[d] = std::max(lo[d], dlo);
    rh[d] = std::min(hi[d], dhi);
    if (rl[d] > rh[d]) return;
    parallel_for(rl[2], rh[2] + 1, [&](int k0, int k1) {
      for (int k = k0; k < k1; ++k)
        for (int j = rl[1]; j <= rh[1]; ++j) {
          const std::size_t row = idx(0, j, k);
          for (int i = rl[0]; i <= rh[0]; ++i) {
            const std::size_t n = row + i;
            const int co[3] = {i, j, k};
            const int p = co[d];
            const double dn = (S[n] - S[n - sd]) * inv;
            PS[n] = bc[p] * PS[n] + ac[p] * dn;
            F[n] += sign * C[n] * PS[n];
          }
        }
    });
  };

  if (pml_low[d]) sweep(1, W - 1);
  if (pml_high[d]) sweep(N[d] - W + 1, N[d] - 1);
}

void Solver::Impl::pml_correct_h(int a, int term) {
  if (psi[3 + a][term].empty()) return;
  const int d = term == 0 ? (a + 1) % 3 : (a + 2) % 3;
  const int dsrc = term == 0 ? (a + 2) % 3 : (a + 1) % 3;
  const double sign = term == 0 ? 1.0 : -1.0;
  double* F = f[3 + a].data();
  const double* S = f[dsrc].data();
  double* PS = psi[3 + a][term].data();
  const double* bc = b_half[d].data();
  const double* ac = a_half[d].data();
  const double inv = 1.0 / delta;
  const std::ptrdiff_t sd = s[d];

  int lo[3], hi[3];
  for (int q = 0; q < 3; ++q) {
    if (!act[q]) {
      lo[q] = hi[q] = 0;
    } else if (q == a) {
      lo[q] = 0;
      hi[q] = N[q];
    } else {
      lo[q] = 0;
      hi[q] = N[q] - 1;
    }
  }

  auto sweep = [&](int dlo, int dhi) {
    int rl[3] = {lo[0], lo[1], lo[2]}, rh[3] = {hi[0], hi[1], hi[2]};
    rl[d] = std::max(lo[d], dlo);
    rh[d] = std::min(hi[d], dhi);
    if (rl[d] > rh[d]) return;
    parallel_for(rl[2], rh[2] + 1, [&](int k0, int k1) {
      for (int k = k0; k < k1; ++k)
        for (int j = rl[1]; j <= rh[1]; ++j) {
          const std::size_t row = idx(0, j, k);
          for (int i = rl[0]; i <= rh[0]; ++i) {
            const std::size_t n = row + i;
            const int co[3] = {i, j, k};
            const int p = co[d];
            const double dn = (S[n + sd] - S[n]) * inv;
            PS[n] = bc[p] * PS[n] + ac[p] * dn;
            F[n] -= sign * dtv * PS[n];
          }
        }
    });
  };

  if (pml_low[d]) sweep(0, W - 1);
  if (pml_high[d]) sweep(N[d] - W, N[d] - 1);
}

void Solver::Impl::accumulate_dft() {
  const double freq = cfg.dft->frequency;
  const double t_e = steps_taken * dtv;
  for (FieldComponent comp : cfg.dft->components) {
    const int c = static_cast<int>(comp);
    const double t = is_electric(comp) ? t_e : t_e - 0.5 * dtv;
    const std::complex<double> phase =
        std::polar(dtv, 2 * kPi * freq * t);
    const double* F = f[c].data();
    std::complex<double>* A = acc[c].data();
    const int nk = M[2];
    parallel_for(0, nk, [&](int k0, int k1) {
      const std::size_t b = static_cast<std::size_t>(k0) * s[2];
      const std::size_t e = static_cast<std::size_t>(k1) * s[2];
      for (std::size_t n = b; n < e; ++n) A[n] += F[n] * phase;
    });
  }
}

void Solver::Impl::step() {
  if (cfg.monitor_energy)
    for (int a = 0; a < 3; ++a) hprev[a] = f[3 + a];

  for (int a = 0; a < 3; ++a) update_h_comp(a);
  for (int a = 0; a < 3; ++a)
    for (int t = 0; t < 2; ++t) pml_correct_h(a, t);

  if (cfg.source && steps_taken < off_step) {
    const auto& src = *cfg.source;
    if (!is_electric(src.component)) {
      const double g = source_wave((steps_taken + 0.5) * dtv);
      f[static_cast<int>(src.component)]
       [idx(src.position[0], src.position[1], src.position[2])] += dtv * g;
    }
  }

  if (cfg.monitor_energy) {
    // E at step n, H at n -/+ 1/2: this staggered product is exactly conserved
    // by the closed-box update (the plain quadratic form is not).
    double ue = 0, uh = 0;
    for (int a = 0; a < 3; ++a) {
      const double* F = f[a].data();
      const double* C = ce[a].data();
      for (std::size_t n = 0; n < total; ++n) ue += (dtv / C[n]) * F[n] * F[n];
      const double* H0 = hprev[a].data();
      const double* H1 = f[3 + a].data();
      for (std::size_t n = 0; n < total; ++n) uh += H0[n] * H1[n];
    }
    last_conserved = 0.5 * (ue + uh) * delta * delta * delta;
    energy_trace.push_back(last_conserved);
  }

  for (int a = 0; a < 3; ++a) update_e_comp(a);
  for (int a = 0; a < 3; ++a)
    for (int t = 0; t < 2; ++t) pml_correct_e(a, t);

  if (cfg.source && steps_taken < off_step) {
    const auto& src = *cfg.source;
    if (is_electric(src.component)) {
      const double g = source_wave((steps_taken + 1.0) * dtv);
      f[static_cast<int>(src.component)]
       [idx(src.position[0], src.position[1], src.position[2])] += dtv * g;
    }
  }

  ++steps_taken;

  if (cfg.dft && steps_taken > off_step) accumulate_dft();
}

double Solver::Impl::plain_energy() const {
  double u = 0;
  for (int a = 0; a < 3; ++a) {
    const double* F = f[a].data();
    const double* C = ce[a].data();
    for (std::size_t n = 0; n < total; ++n) u += (dtv / C[n]) * F[n] * F[n];
    const double* H = f[3 + a].data();
    for (std::size_t n = 0; n < total; ++n) u += H[n] * H[n];
  }
  return 0.5 * u * delta * delta * delta;
}

Solver::Solver(const PermittivityGrid& grid, const RunConfig& config)
    : impl_(std::make_unique<Impl>()) {
  impl_->cfg = config;
  impl_->setup(grid);
}

Solver::~Solver() = default;

void Solver::step() { impl_->step(); }
int Solver::steps_taken() const { return impl_->steps_taken; }
double Solver::dt() const { return impl_->dtv; }
double Solver::time() const { return impl_->steps_taken * impl_->dtv; }
int Solver::source_off_step() const { return impl_->off_step; }
double Solver::total_energy() const { return impl_->plain_energy(); }

double Solver::conserved_energy() const {
  if (!impl_->cfg.monitor_energy) throw ConfigError("energy monitoring is disabled");
  if (impl_->energy_trace.empty()) throw ConfigError("no step has been taken yet");
  return impl_->last_conserved;
}

const std::vector<double>& Solver::energy_trace() const { return impl_->energy_trace; }

double Solver::field(FieldComponent c, int i, int j, int k) const {
  auto& im = *impl_;
  if (i < 0 || i >= im.M[0] || j < 0 || j >= im.M[1] || k < 0 || k >= im.M[2])
    throw ConfigError("field index outside the grid");
  return im.f[static_cast<int>(c)][im.idx(i, j, k)];
}

void Solver::set_field(FieldComponent c, int i, int j, int k, double value) {
  auto& im = *impl_;
  if (i < 0 || i >= im.M[0] || j < 0 || j >= im.M[1] || k < 0 || k >= im.M[2])
    throw ConfigError("field index outside the grid");
  im.f[static_cast<int>(c)][im.idx(i, j, k)] = value;
}

double Solver::probe_sample(const ProbeSpec& p) const {
  return field(p.component, p.position[0], p.position[1], p.position[2]);
}

double Solver::max_divergence_h(int exclusion_radius) const {
  auto& im = *impl_;
  const double inv = 1.0 / im.delta;
  double worst = 0;
  for (int k = 0; k < im.N[2]; ++k)
    for (int j = 0; j < im.N[1]; ++j)
      for (int i = 0; i < im.N[0]; ++i) {
        if (im.cfg.source) {
          const auto& p = im.cfg.source->position;
          const int dist = std::max({std::abs(i - p[0]), std::abs(j - p[1]), std::abs(k - p[2])});
          if (dist <= exclusion_radius) continue;
        }
        const std::size_t n = im.idx(i, j, k);
        double div = 0;
        for (int q = 0; q < 3; ++q)
          if (im.act[q]) div += (im.f[3 + q][n + im.s[q]] - im.f[3 + q][n]) * inv;
        worst = std::max(worst, std::abs(div));
      }
  return worst;
}

FieldSnapshot Solver::assemble_snapshot() const {
  auto& im = *impl_;
  if (!im.cfg.dft) throw ConfigError("no dft accumulation was configured");
  FieldSnapshot snap;
  snap.dims = im.gdims;
  snap.spacing = im.gspacing;
  snap.a = im.ga;
  snap.frequency = im.cfg.dft->frequency;
  snap.origin = im.gorigin;

  for (FieldComponent comp : im.cfg.dft->components) {
    const int c = static_cast<int>(comp);
    std::vector<std::complex<double>> cell(snap.cell_count());
    for (int k = 0; k < im.N[2]; ++k)
      for (int j = 0; j < im.N[1]; ++j)
        for (int i = 0; i < im.N[0]; ++i) {
          // average the bracketing nodes along every integer axis of the
          // component to land on the cell center
          std::complex<double> v(0, 0);
          int count = 0;
          const int co[3] = {i, j, k};
          int off[3];
          const int nmax[3] = {
              half_along(comp, 0) || !im.act[0] ? 1 : 2,
              half_along(comp, 1) || !im.act[1] ? 1 : 2,
              half_along(comp, 2) || !im.act[2] ? 1 : 2,
          };
          for (off[2] = 0; off[2] < nmax[2]; ++off[2])
            for (off[1] = 0; off[1] < nmax[1]; ++off[1])
              for (off[0] = 0; off[0] < nmax[0]; ++off[0]) {
                v += im.acc[c][im.idx(co[0] + off[0], co[1] + off[1], co[2] + off[2])];
                ++count;
              }
          cell[snap.index(i, j, k)] = v / static_cast<double>(count);
        }
    snap.components[component_name(comp)] = std::move(cell);
  }
  return snap;
}

RunResult run(const PermittivityGrid& grid, const RunConfig& config) {
  Solver solver(grid, config);
  RunResult result;
  result.source_off_step = solver.source_off_step();

  std::vector<ProbeRecord> records(config.probes.size());
  for (std::size_t p = 0; p < config.probes.size(); ++p) {
    records[p].location = config.probes[p].position;
    records[p].component = component_name(config.probes[p].component);
    records[p].dt = solver.dt();
    records[p].short_run_warning = config.steps <= result.source_off_step;
  }

  for (int n = 0; n < config.steps; ++n) {
    solver.step();
    if (solver.steps_taken() > result.source_off_step)
      for (std::size_t p = 0; p < config.probes.size(); ++p)
        records[p].samples.push_back(solver.probe_sample(config.probes[p]));
  }

  result.probes = std::move(records);
  if (config.dft) result.snapshot = solver.assemble_snapshot();
  if (config.monitor_energy) result.energy_trace = solver.energy_trace();
  return result;
}

PermittivityGrid crop_octant(const PermittivityGrid& grid, const SymmetrySpec& symmetry) {
  PermittivityGrid out;
  out.spacing = grid.spacing;
  out.a = grid.a;
  out.n_slab = grid.n_slab;
  int lo[3];
  for (int q = 0; q < 3; ++q) {
    if (symmetry.axis(q) != MirrorParity::None) {
      if (grid.dims[q] % 2 != 0)
        throw ConfigError("mirrored axis must have an even cell count");
      lo[q] = grid.dims[q] / 2;
    } else {
      lo[q] = 0;
    }
    out.dims[q] = grid.dims[q] - lo[q];
    out.origin[q] = grid.origin[q] + lo[q] * grid.spacing;
  }
  out.values.resize(out.cell_count());
  for (int k = 0; k < out.dims[2]; ++k)
    for (int j = 0; j < out.dims[1]; ++j)
      for (int i = 0; i < out.dims[0]; ++i)
        out.values[out.index(i, j, k)] = grid.at(i + lo[0], j + lo[1], k + lo[2]);
  return out;
}

FieldSnapshot mirror_expand(const FieldSnapshot& snapshot, const SymmetrySpec& symmetry) {
  FieldSnapshot out;
  out.spacing = snapshot.spacing;
  out.a = snapshot.a;
  out.frequency = snapshot.frequency;
  bool mirrored[3];
  for (int q = 0; q < 3; ++q) {
    mirrored[q] = symmetry.axis(q) != MirrorParity::None;
    out.dims[q] = mirrored[q] ? 2 * snapshot.dims[q] : snapshot.dims[q];
    out.origin[q] =
        mirrored[q] ? snapshot.origin[q] - snapshot.dims[q] * snapshot.spacing : snapshot.origin[q];
  }

  for (const auto& [name, src] : snapshot.components) {
    const FieldComponent comp = component_from_name(name);
    const int ca = axis_of(comp);
    const bool electric = is_electric(comp);
    double sign_axis[3];
    for (int q = 0; q < 3; ++q) {
      if (!mirrored[q]) {
        sign_axis[q] = 1;
        continue;
      }
      // s_tan: parity of the tangential electric field on the plane
      const double s_tan = symmetry.axis(q) == MirrorParity::Odd ? -1.0 : 1.0;
      if (electric)
        sign_axis[q] = (ca == q) ? -s_tan : s_tan;
      else
        sign_axis[q] = (ca == q) ? s_tan : -s_tan;
    }
    std::vector<std::complex<double>> dst(out.cell_count());
    for (int k = 0; k < out.dims[2]; ++k)
      for (int j = 0; j < out.dims[1]; ++j)
        for (int i = 0; i < out.dims[0]; ++i) {
          int co[3] = {i, j, k};
          double sign = 1;
          int rc[3];
          for (int q = 0; q < 3; ++q) {
            if (mirrored[q] && co[q] < snapshot.dims[q]) {
              rc[q] = snapshot.dims[q] - 1 - co[q];
              sign *= sign_axis[q];
            } else {
              rc[q] = mirrored[q] ? co[q] - snapshot.dims[q] : co[q];
            }
          }
          dst[out.index(i, j, k)] = sign * src[snapshot.index(rc[0], rc[1], rc[2])];
        }
    out.components[name] = std::move(dst);
  }
  return out;
}

}  // namespace pcc
