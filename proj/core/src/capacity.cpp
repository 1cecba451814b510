#include "wiretap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wiretap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double neg_plogp(double p) {
  if (p <= kZeroProbEps) return 0.0;
  return -p * std::log2(p);
}

double buffer_entropy(const std::vector<double>& t) {
  double h = 0.0;
  for (double v : t) h += neg_plogp(v);
  return h;
}

// Which two-term objective a search maximizes; t1 is the keyed term, t2 the
// plain decoding term, and the objective value is min(t1, t2).
enum class Mode {
  corollary,  // I(X;Y|S) - I(X;Z|S) + H(S|Z) + R_f  vs  I(X;Y|S)
  upper,      // I(X;Y|Z,S) + H(S|Z) + R_f           vs  I(X;Y|S)
  nofb2,      // H(S|Z,X)                            vs  I(X;Y|S)
  main_only,  // maximize I(X;Y|S) alone
  outfb,      // I(X;Y|Z,S) + H(Y|X,Z,S)             vs  I(X;Y|S)
};

// Allocation-free evaluation of the term pairs over p(s) p(x|s) p(y,z|x,s).
class TermEvaluator {
public:
  explicit TermEvaluator(const WiretapSystem& sys)
      : ns_(sys.num_states()), nx_(sys.num_inputs()),
        ny_(sys.num_main_outputs()), nz_(sys.num_eve_outputs()) {
    ps_.resize(static_cast<size_t>(ns_));
    for (int s = 0; s < ns_; ++s) ps_[static_cast<size_t>(s)] = sys.state_law()[s];
    pyz_.resize(static_cast<size_t>(nx_) * ns_ * ny_ * nz_);
    for (int x = 0; x < nx_; ++x) {
      for (int s = 0; s < ns_; ++s) {
        for (int y = 0; y < ny_; ++y) {
          for (int z = 0; z < nz_; ++z) {
            pyz_[idx4(x, s, y, z)] = sys.p_yz(y, z, x, s);
          }
        }
      }
    }
    m_xys_.resize(static_cast<size_t>(nx_) * ny_ * ns_);
    m_xzs_.resize(static_cast<size_t>(nx_) * nz_ * ns_);
    m_yzs_.resize(static_cast<size_t>(ny_) * nz_ * ns_);
    m_full_.resize(static_cast<size_t>(nx_) * ns_ * ny_ * nz_);
    m_xs_.resize(static_cast<size_t>(nx_) * ns_);
    m_ys_.resize(static_cast<size_t>(ny_) * ns_);
    m_zs_.resize(static_cast<size_t>(nz_) * ns_);
    m_xz_.resize(static_cast<size_t>(nx_) * nz_);
    m_z_.resize(static_cast<size_t>(nz_));
    m_s_.resize(static_cast<size_t>(ns_));
  }

  int num_states() const { return ns_; }
  int num_inputs() const { return nx_; }

  // pol is a flat [s * nx + x] table of conditionals p(x|s)
  double eval(Mode mode, const double* pol, double rf, double* t1_out = nullptr,
              double* t2_out = nullptr) {
    bool need_yz = (mode == Mode::upper || mode == Mode::outfb);
    bool need_xz = (mode == Mode::nofb2);
    bool need_z = (mode != Mode::main_only);

    auto zero = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
    zero(m_xys_); zero(m_xs_); zero(m_ys_); zero(m_s_);
    if (need_z) { zero(m_xzs_); zero(m_zs_); zero(m_z_); }
    if (need_yz) { zero(m_yzs_); zero(m_full_); }
    if (need_xz) zero(m_xz_);

    for (int s = 0; s < ns_; ++s) {
      for (int x = 0; x < nx_; ++x) {
        double pxs = ps_[static_cast<size_t>(s)] * pol[s * nx_ + x];
        if (pxs == 0.0) continue;
        m_xs_[static_cast<size_t>(x) * ns_ + s] += pxs;
        m_s_[static_cast<size_t>(s)] += pxs;
        for (int y = 0; y < ny_; ++y) {
          double pxys = 0.0;
          for (int z = 0; z < nz_; ++z) {
            double v = pxs * pyz_[idx4(x, s, y, z)];
            pxys += v;
            if (need_z) {
              m_xzs_[(static_cast<size_t>(x) * nz_ + z) * ns_ + s] += v;
              m_zs_[static_cast<size_t>(z) * ns_ + s] += v;
              m_z_[static_cast<size_t>(z)] += v;
            }
            if (need_yz) {
              m_yzs_[(static_cast<size_t>(y) * nz_ + z) * ns_ + s] += v;
              m_full_[idx4(x, s, y, z)] = v;
            }
            if (need_xz) m_xz_[static_cast<size_t>(x) * nz_ + z] += v;
          }
          m_xys_[(static_cast<size_t>(x) * ny_ + y) * ns_ + s] += pxys;
          m_ys_[static_cast<size_t>(y) * ns_ + s] += pxys;
        }
      }
    }

    double h_xys = buffer_entropy(m_xys_);
    double h_xs = buffer_entropy(m_xs_);
    double h_ys = buffer_entropy(m_ys_);
    double h_s = buffer_entropy(m_s_);
    double i_xy_s = h_xs + h_ys - h_xys - h_s;

    double t1 = kInf;
    double t2 = i_xy_s;
    if (mode == Mode::corollary) {
      double h_xzs = buffer_entropy(m_xzs_);
      double h_zs = buffer_entropy(m_zs_);
      double h_z = buffer_entropy(m_z_);
      double i_xz_s = h_xs + h_zs - h_xzs - h_s;
      double h_s_z = h_zs - h_z;
      t1 = i_xy_s - i_xz_s + h_s_z + rf;
    } else if (mode == Mode::upper) {
      double h_xzs = buffer_entropy(m_xzs_);
      double h_zs = buffer_entropy(m_zs_);
      double h_z = buffer_entropy(m_z_);
      double h_yzs = buffer_entropy(m_yzs_);
      double h_full = buffer_entropy(m_full_);
      double i_xy_zs = h_xzs + h_yzs - h_full - h_zs;
      double h_s_z = h_zs - h_z;
      t1 = i_xy_zs + h_s_z + rf;
    } else if (mode == Mode::nofb2) {
      double h_xzs = buffer_entropy(m_xzs_);
      double h_xz = buffer_entropy(m_xz_);
      t1 = h_xzs - h_xz;  // H(S|Z,X); feedback added by the caller
    } else if (mode == Mode::outfb) {
      double h_xzs = buffer_entropy(m_xzs_);
      double h_zs = buffer_entropy(m_zs_);
      double h_yzs = buffer_entropy(m_yzs_);
      double h_full = buffer_entropy(m_full_);
      double i_xy_zs = h_xzs + h_yzs - h_full - h_zs;
      double h_y_xzs = h_full - h_xzs;
      t1 = i_xy_zs + h_y_xzs;
    }
    if (t1_out) *t1_out = t1;
    if (t2_out) *t2_out = t2;
    return std::min(t1, t2);
  }

private:
  size_t idx4(int x, int s, int y, int z) const {
    return ((static_cast<size_t>(x) * ns_ + s) * ny_ + y) * nz_ + z;
  }

  int ns_, nx_, ny_, nz_;
  std::vector<double> ps_, pyz_;
  std::vector<double> m_xys_, m_xzs_, m_yzs_, m_full_;
  std::vector<double> m_xs_, m_ys_, m_zs_, m_xz_, m_z_, m_s_;
};

// Golden-section maximization on [a,b]; returns the best point evaluated,
// preferring the smaller abscissa on exact ties.
template <typename F>
std::pair<double, double> golden_max(F&& f, double a, double b, double tol) {
  double best_t = a;
  double best_f = f(a);
  auto consider = [&](double t, double v) {
    if (v > best_f) {
      best_f = v;
      best_t = t;
    }
  };
  consider(b, f(b));
  const double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  consider(c, fc);
  consider(d, fd);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
      consider(d, fd);
    }
  }
  return {best_t, best_f};
}

struct SearchResult {
  std::vector<double> pol;  // flat [s * nx + x]
  double value = -kInf;
};

// Binary inputs: cycle over the per-state scalar p(x=0|s) with a coarse grid
// scan on the first pass and golden-section refinement on every pass.
SearchResult coordinate_search_binary(TermEvaluator& ev, Mode mode, double rf,
                                      bool tied, const OptimizeOptions& opts) {
  int ns = ev.num_states();
  int ncoord = tied ? 1 : ns;
  std::vector<double> t(static_cast<size_t>(ncoord), 0.5);
  std::vector<double> pol(static_cast<size_t>(ns) * 2);
  auto feval = [&]() {
    for (int s = 0; s < ns; ++s) {
      double tc = t[static_cast<size_t>(tied ? 0 : s)];
      pol[static_cast<size_t>(s) * 2] = tc;
      pol[static_cast<size_t>(s) * 2 + 1] = 1.0 - tc;
    }
    return ev.eval(mode, pol.data(), rf);
  };
  long long grid_n = std::max<long long>(1, std::llround(1.0 / opts.resolution));
  double best = feval();
  for (int cycle = 0; cycle < 8; ++cycle) {
    double at_cycle_start = best;
    for (int c = 0; c < ncoord; ++c) {
      auto line = [&](double v) {
        t[static_cast<size_t>(c)] = v;
        return feval();
      };
      double center = t[static_cast<size_t>(c)];
      if (cycle == 0) {
        double grid_best_t = 0.0;
        double grid_best = -kInf;
        for (long long i = 0; i <= grid_n; ++i) {
          double v = static_cast<double>(i) / static_cast<double>(grid_n);
          double fv = line(v);
          if (fv > grid_best) {
            grid_best = fv;
            grid_best_t = v;
          }
        }
        center = grid_best_t;
      }
      double lo = std::max(0.0, center - opts.resolution);
      double hi = std::min(1.0, center + opts.resolution);
      auto [arg, val] = golden_max(line, lo, hi, opts.refine_tol);
      t[static_cast<size_t>(c)] = arg;
      best = line(arg);
      (void)val;
    }
    if (cycle > 0 && best - at_cycle_start <= 1e-13) break;
  }
  SearchResult out;
  best = feval();
  out.pol = pol;
  out.value = best;
  return out;
}

void project_to_simplex(double* p, int n) {
  // Euclidean projection onto the probability simplex
  std::vector<double> u(p, p + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0;
  double theta = 0.0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    css += u[static_cast<size_t>(i)];
    double cand = (css - 1.0) / (i + 1);
    if (u[static_cast<size_t>(i)] - cand > 0.0) {
      rho = i;
      theta = cand;
    }
  }
  (void)rho;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    p[i] = std::max(0.0, p[i] - theta);
    sum += p[i];
  }
  for (int i = 0; i < n; ++i) p[i] /= sum;
}

// Larger input alphabets: deterministic multi-start projected subgradient
// ascent on min(t1, t2), finished with pairwise mass-transfer line searches.
SearchResult subgradient_search(TermEvaluator& ev, Mode mode, double rf,
                                bool tied, const OptimizeOptions& opts) {
  int ns = ev.num_states();
  int nx = ev.num_inputs();
  int blocks = tied ? 1 : ns;
  int dim = blocks * nx;
  std::vector<double> pol(static_cast<size_t>(ns) * nx);
  auto feval = [&](const std::vector<double>& p) {
    for (int s = 0; s < ns; ++s) {
      const double* block = p.data() + static_cast<size_t>(tied ? 0 : s) * nx;
      std::copy(block, block + nx, pol.begin() + static_cast<size_t>(s) * nx);
    }
    return ev.eval(mode, pol.data(), rf);
  };
  auto active_term = [&](const std::vector<double>& p) {
    for (int s = 0; s < ns; ++s) {
      const double* block = p.data() + static_cast<size_t>(tied ? 0 : s) * nx;
      std::copy(block, block + nx, pol.begin() + static_cast<size_t>(s) * nx);
    }
    double t1 = 0.0, t2 = 0.0;
    ev.eval(mode, pol.data(), rf, &t1, &t2);
    return (t1 < t2) ? 1 : 2;
  };
  auto term_value = [&](const std::vector<double>& p, int term) {
    for (int s = 0; s < ns; ++s) {
      const double* block = p.data() + static_cast<size_t>(tied ? 0 : s) * nx;
      std::copy(block, block + nx, pol.begin() + static_cast<size_t>(s) * nx);
    }
    double t1 = 0.0, t2 = 0.0;
    ev.eval(mode, pol.data(), rf, &t1, &t2);
    return term == 1 ? t1 : t2;
  };

  std::vector<std::vector<double>> starts;
  {
    std::vector<double> u(static_cast<size_t>(dim), 1.0 / nx);
    starts.push_back(u);
    for (int x0 = 0; x0 < nx; ++x0) {
      std::vector<double> p(static_cast<size_t>(dim), 0.15 / (nx - 1));
      for (int b = 0; b < blocks; ++b) p[static_cast<size_t>(b) * nx + x0] = 0.85;
      starts.push_back(std::move(p));
    }
    if (!tied && blocks > 1) {
      for (int shift = 0; shift < 2; ++shift) {
        std::vector<double> p(static_cast<size_t>(dim), 0.15 / (nx - 1));
        for (int b = 0; b < blocks; ++b) {
          p[static_cast<size_t>(b) * nx + (b + shift) % nx] = 0.85;
        }
        starts.push_back(std::move(p));
      }
    }
  }

  SearchResult out;
  const double h = 1e-6;
  for (const auto& start : starts) {
    std::vector<double> p = start;
    double fp = feval(p);
    std::vector<double> best_p = p;
    double best_f = fp;
    std::vector<double> trial;
    for (int iter = 0; iter < 300; ++iter) {
      int term = (mode == Mode::main_only) ? 2 : active_term(p);
      std::vector<double> dir(static_cast<size_t>(dim), 0.0);
      for (int b = 0; b < blocks; ++b) {
        for (int x = 1; x < nx; ++x) {
          trial = p;
          auto bump = [&](double sign) {
            trial[static_cast<size_t>(b) * nx + x] += sign * h;
            trial[static_cast<size_t>(b) * nx] -= sign * h;
            double* block = trial.data() + static_cast<size_t>(b) * nx;
            double sum = 0.0;
            for (int i = 0; i < nx; ++i) {
              block[i] = std::max(0.0, block[i]);
              sum += block[i];
            }
            for (int i = 0; i < nx; ++i) block[i] /= sum;
          };
          trial = p;
          bump(+1.0);
          double f_plus = term_value(trial, term);
          trial = p;
          bump(-1.0);
          double f_minus = term_value(trial, term);
          double d = (f_plus - f_minus) / (2.0 * h);
          dir[static_cast<size_t>(b) * nx + x] += d;
          dir[static_cast<size_t>(b) * nx] -= d;
        }
      }
      double step = 0.15 / std::sqrt(static_cast<double>(iter + 1));
      for (int i = 0; i < dim; ++i) p[static_cast<size_t>(i)] += step * dir[static_cast<size_t>(i)];
      for (int b = 0; b < blocks; ++b) project_to_simplex(p.data() + static_cast<size_t>(b) * nx, nx);
      fp = feval(p);
      if (fp > best_f) {
        best_f = fp;
        best_p = p;
      }
    }
    // pairwise mass-transfer polish
    p = best_p;
    for (int sweep = 0; sweep < 4; ++sweep) {
      for (int b = 0; b < blocks; ++b) {
        for (int i = 0; i < nx; ++i) {
          for (int j = i + 1; j < nx; ++j) {
            double mass = p[static_cast<size_t>(b) * nx + i] + p[static_cast<size_t>(b) * nx + j];
            if (mass <= 1e-12) continue;
            auto line = [&](double tau) {
              p[static_cast<size_t>(b) * nx + i] = tau;
              p[static_cast<size_t>(b) * nx + j] = mass - tau;
              return feval(p);
            };
            auto [arg, val] = golden_max(line, 0.0, mass, opts.refine_tol);
            p[static_cast<size_t>(b) * nx + i] = arg;
            p[static_cast<size_t>(b) * nx + j] = mass - arg;
            if (val > best_f) {
              best_f = val;
              best_p = p;
            }
          }
        }
      }
    }
    double final_f = feval(best_p);
    if (final_f > out.value) {
      out.value = final_f;
      out.pol.assign(static_cast<size_t>(ns) * nx, 0.0);
      for (int s = 0; s < ns; ++s) {
        const double* block = best_p.data() + static_cast<size_t>(tied ? 0 : s) * nx;
        std::copy(block, block + nx, out.pol.begin() + static_cast<size_t>(s) * nx);
      }
    }
  }
  return out;
}

SearchResult maximize(const WiretapSystem& sys, Mode mode, double rf, bool tied,
                      const OptimizeOptions& opts) {
  TermEvaluator ev(sys);
  if (sys.num_inputs() == 1) {
    SearchResult out;
    out.pol.assign(static_cast<size_t>(sys.num_states()), 1.0);
    out.value = ev.eval(mode, out.pol.data(), rf);
    return out;
  }
  if (sys.num_inputs() == 2) {
    return coordinate_search_binary(ev, mode, rf, tied, opts);
  }
  return subgradient_search(ev, mode, rf, tied, opts);
}

InputPolicy policy_from_flat(const std::vector<double>& flat, int ns, int nx) {
  InputPolicy pol;
  pol.x_given_s.reserve(static_cast<size_t>(ns));
  for (int s = 0; s < ns; ++s) {
    std::vector<double> row(flat.begin() + static_cast<size_t>(s) * nx,
                            flat.begin() + static_cast<size_t>(s + 1) * nx);
    pol.x_given_s.emplace_back(std::move(row));
  }
  return pol;
}

bool state_independent_channels(const WiretapSystem& sys, double tol = 1e-12) {
  for (int x = 0; x < sys.num_inputs(); ++x) {
    for (int y = 0; y < sys.num_main_outputs(); ++y) {
      for (int z = 0; z < sys.num_eve_outputs(); ++z) {
        double ref = sys.p_yz(y, z, x, 0);
        for (int s = 1; s < sys.num_states(); ++s) {
          if (std::abs(sys.p_yz(y, z, x, s) - ref) > tol) return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

InputPolicy InputPolicy::uniform(int num_inputs, int num_states) {
  InputPolicy pol;
  for (int s = 0; s < num_states; ++s) pol.x_given_s.push_back(Pmf::uniform(num_inputs));
  return pol;
}

InputPolicy InputPolicy::tied(const Pmf& x, int num_states) {
  InputPolicy pol;
  for (int s = 0; s < num_states; ++s) pol.x_given_s.push_back(x);
  return pol;
}

AuxPolicy AuxPolicy::identity(const Pmf& p_x, int num_states) {
  AuxPolicy aux{p_x, num_states, p_x.size(), {}, Channel(1, 1, {1.0})};
  aux.u_map.resize(static_cast<size_t>(p_x.size()) * num_states);
  for (int u = 0; u < p_x.size(); ++u) {
    for (int s = 0; s < num_states; ++s) {
      aux.u_map[static_cast<size_t>(u) * num_states + s] = u;
    }
  }
  std::vector<double> rows(static_cast<size_t>(p_x.size()) * num_states * p_x.size(), 0.0);
  for (int u = 0; u < p_x.size(); ++u) {
    for (int s = 0; s < num_states; ++s) {
      rows[(static_cast<size_t>(u) * num_states + s) * p_x.size() + u] = 1.0;
    }
  }
  aux.x_given_us = Channel(p_x.size() * num_states, p_x.size(), std::move(rows));
  return aux;
}

AuxPolicy AuxPolicy::per_state(const InputPolicy& policy) {
  int ns = policy.num_states();
  int nx = policy.num_inputs();
  long long aux_size = 1;
  for (int s = 0; s < ns; ++s) {
    aux_size *= nx;
    if (aux_size > (1 << 20)) {
      throw std::invalid_argument("AuxPolicy::per_state: tuple alphabet too large");
    }
  }
  auto digit = [&](long long a, int s) {
    for (int i = 0; i < s; ++i) a /= nx;
    return static_cast<int>(a % nx);
  };
  std::vector<double> pu(static_cast<size_t>(aux_size));
  std::vector<int> umap(static_cast<size_t>(aux_size) * ns);
  for (long long a = 0; a < aux_size; ++a) {
    double prob = 1.0;
    for (int s = 0; s < ns; ++s) {
      int xs = digit(a, s);
      prob *= policy.x_given_s[static_cast<size_t>(s)][xs];
      umap[static_cast<size_t>(a) * ns + s] = xs;
    }
    pu[static_cast<size_t>(a)] = prob;
  }
  std::vector<double> rows(static_cast<size_t>(nx) * ns * nx, 0.0);
  for (int u = 0; u < nx; ++u) {
    for (int s = 0; s < ns; ++s) {
      rows[(static_cast<size_t>(u) * ns + s) * nx + u] = 1.0;
    }
  }
  AuxPolicy aux{Pmf(std::move(pu)), ns, nx, std::move(umap),
                Channel(nx * ns, nx, std::move(rows))};
  return aux;
}

JointPmf policy_joint(const WiretapSystem& sys, const InputPolicy& policy) {
  int ns = sys.num_states(), nx = sys.num_inputs();
  int ny = sys.num_main_outputs(), nz = sys.num_eve_outputs();
  if (policy.num_states() != ns || policy.num_inputs() != nx) {
    throw std::invalid_argument("policy_joint: policy shape mismatch");
  }
  std::vector<double> table(static_cast<size_t>(ns) * nx * ny * nz);
  size_t i = 0;
  for (int s = 0; s < ns; ++s) {
    for (int x = 0; x < nx; ++x) {
      double pxs = sys.state_law()[s] * policy.x_given_s[static_cast<size_t>(s)][x];
      for (int y = 0; y < ny; ++y) {
        for (int z = 0; z < nz; ++z) {
          table[i++] = pxs * sys.p_yz(y, z, x, s);
        }
      }
    }
  }
  return JointPmf({ns, nx, ny, nz}, std::move(table), {"S", "X", "Y", "Z"});
}

JointPmf aux_joint(const WiretapSystem& sys, const AuxPolicy& aux) {
  int ns = sys.num_states(), nx = sys.num_inputs();
  int ny = sys.num_main_outputs(), nz = sys.num_eve_outputs();
  int na = aux.aux_size(), nu = aux.aux_out;
  if (aux.num_states != ns) {
    throw std::invalid_argument("aux_joint: state count mismatch");
  }
  if (aux.x_given_us.inputs() != nu * ns || aux.x_given_us.outputs() != nx) {
    throw std::invalid_argument("aux_joint: x_given_us shape mismatch");
  }
  std::vector<double> table(static_cast<size_t>(ns) * na * nu * nx * ny * nz, 0.0);
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      double base = sys.state_law()[s] * aux.p_u[a];
      if (base == 0.0) continue;
      int u = aux.map_at(a, s);
      for (int x = 0; x < nx; ++x) {
        double pxu = aux.x_given_us.at(u * ns + s, x);
        if (pxu == 0.0) continue;
        for (int y = 0; y < ny; ++y) {
          for (int z = 0; z < nz; ++z) {
            size_t idx = ((((static_cast<size_t>(s) * na + a) * nu + u) * nx + x) * ny + y) * nz + z;
            table[idx] = base * pxu * sys.p_yz(y, z, x, s);
          }
        }
      }
    }
  }
  return JointPmf({ns, na, nu, nx, ny, nz}, std::move(table),
                  {"S", "U'", "U", "X", "Y", "Z"});
}

InfoTerms info_terms(const WiretapSystem& sys, const InputPolicy& policy) {
  JointPmf j = policy_joint(sys, policy);
  InfoTerms t;
  t.i_xy_s = mutual_information(j, {1}, {2}, {0});
  t.i_xz_s = mutual_information(j, {1}, {3}, {0});
  t.h_s_z = conditional_entropy(j, {0}, {3});
  t.i_xy_zs = mutual_information(j, {1}, {2}, {0, 3});
  t.i_uy_s = t.i_xy_s;
  t.i_uz_s = t.i_xz_s;
  t.h_s_zu = conditional_entropy(j, {0}, {3, 1});
  return t;
}

InfoTerms info_terms(const WiretapSystem& sys, const AuxPolicy& aux) {
  JointPmf j = aux_joint(sys, aux);
  InfoTerms t;
  t.i_xy_s = mutual_information(j, {3}, {4}, {0});
  t.i_xz_s = mutual_information(j, {3}, {5}, {0});
  t.h_s_z = conditional_entropy(j, {0}, {5});
  t.i_xy_zs = mutual_information(j, {3}, {4}, {0, 5});
  t.i_uy_s = mutual_information(j, {2}, {4}, {0});
  t.i_uz_s = mutual_information(j, {2}, {5}, {0});
  t.h_s_zu = conditional_entropy(j, {0}, {5, 2});
  return t;
}

AuxCodecTerms aux_codec_terms(const WiretapSystem& sys, const AuxPolicy& aux) {
  JointPmf j = aux_joint(sys, aux);
  AuxCodecTerms t;
  t.i_up_ys = mutual_information(j, {1}, {4, 0});
  t.i_up_zs = mutual_information(j, {1}, {5, 0});
  return t;
}

LowerBoundResult lower_bound(const WiretapSystem& sys, const AuxPolicy& aux,
                             double feedback_rate) {
  if (feedback_rate < 0.0) {
    throw std::invalid_argument("lower_bound: negative feedback rate");
  }
  JointPmf j = aux_joint(sys, aux);
  LowerBoundResult r;
  double i_uy_s = mutual_information(j, {2}, {4}, {0});
  double i_uz_s = mutual_information(j, {2}, {5}, {0});
  double h_s_z = conditional_entropy(j, {0}, {5});
  double h_s_zu = conditional_entropy(j, {0}, {5, 2});
  r.r_hat1 = i_uy_s - i_uz_s + h_s_z + feedback_rate;
  r.r_hat2 = i_uy_s;
  r.r_hat3 = h_s_zu + feedback_rate;

  // branch 2 needs U independent of S
  JointPmf su = j.marginal({0, 2});
  Pmf ps = su.marginal_pmf(0);
  Pmf pu = su.marginal_pmf(1);
  r.branch2_valid = true;
  for (int s = 0; s < ps.size() && r.branch2_valid; ++s) {
    for (int u = 0; u < pu.size(); ++u) {
      if (std::abs(su.at({s, u}) - ps[s] * pu[u]) > 1e-12) {
        r.branch2_valid = false;
        break;
      }
    }
  }

  r.value = std::min(r.r_hat1, r.r_hat2);
  r.branch = 1;
  if (r.branch2_valid) {
    double b2 = std::min(r.r_hat3, r.r_hat2);
    if (b2 > r.value) {
      r.value = b2;
      r.branch = 2;
    }
  }
  r.value = std::max(0.0, r.value);
  return r;
}

double upper_bound(const WiretapSystem& sys, const InputPolicy& policy,
                   double feedback_rate) {
  if (feedback_rate < 0.0) {
    throw std::invalid_argument("upper_bound: negative feedback rate");
  }
  JointPmf j = policy_joint(sys, policy);
  double i_xy_zs = mutual_information(j, {1}, {2}, {0, 3});
  double h_s_z = conditional_entropy(j, {0}, {3});
  double i_xy_s = mutual_information(j, {1}, {2}, {0});
  return std::min(i_xy_zs + h_s_z + feedback_rate, i_xy_s);
}

BoundReport optimize(const WiretapSystem& sys, double feedback_rate,
                     Objective objective, const OptimizeOptions& opts) {
  if (feedback_rate < 0.0) {
    throw std::invalid_argument("optimize: negative feedback rate");
  }
  Mode mode = (objective == Objective::upper) ? Mode::upper : Mode::corollary;
  SearchResult best = maximize(sys, mode, feedback_rate, /*tied=*/false, opts);

  TermEvaluator ev(sys);
  double c1 = 0.0, c2 = 0.0, u1 = 0.0, u2 = 0.0, k1 = 0.0, k2 = 0.0;
  ev.eval(Mode::corollary, best.pol.data(), feedback_rate, &c1, &c2);
  ev.eval(Mode::upper, best.pol.data(), feedback_rate, &u1, &u2);
  ev.eval(Mode::nofb2, best.pol.data(), feedback_rate, &k1, &k2);

  BoundReport report;
  report.feedback_rate = feedback_rate;
  report.r_hat1 = std::max(0.0, c1);
  report.r_hat2 = std::max(0.0, c2);
  report.r_hat3 = std::max(0.0, k1 + feedback_rate);
  report.lower = std::max(0.0, std::min(c1, c2));
  report.upper = std::max(0.0, std::min(u1, u2));
  report.branch = 1;
  report.argmax = policy_from_flat(best.pol, sys.num_states(), sys.num_inputs());
  return report;
}

double corollary_capacity(const WiretapSystem& sys, double feedback_rate,
                          const OptimizeOptions& opts) {
  DegradednessReport deg = check_degraded(sys);
  if (!deg.degraded) {
    throw NotDegraded("corollary_capacity: eavesdropper is not a degraded version "
                      "of the main output (residual " + std::to_string(deg.residual) + ")");
  }
  return optimize(sys, feedback_rate, Objective::corollary, opts).lower;
}

double bsc_nostate_capacity(const BscScenario& scn, double feedback_rate) {
  if (feedback_rate < 0.0) {
    throw std::invalid_argument("bsc_nostate_capacity: negative feedback rate");
  }
  double hy = binary_entropy(scn.p_y);
  double hcasc = binary_entropy(binary_convolve(scn.p_y, scn.p_z));
  return std::min(1.0 - hy, hcasc - hy + feedback_rate);
}

double bsc_state_capacity(const BscScenario& scn, double feedback_rate) {
  if (feedback_rate < 0.0) {
    throw std::invalid_argument("bsc_state_capacity: negative feedback rate");
  }
  double q = scn.q;
  double h0 = binary_entropy(scn.p_s0);
  double h1 = binary_entropy(scn.p_s1);
  double h0z = binary_entropy(binary_convolve(scn.p_s0, scn.p_z));
  double h1z = binary_entropy(binary_convolve(scn.p_s1, scn.p_z));
  double decode = 1.0 - (1.0 - q) * h0 - q * h1;
  double keyed = (1.0 - q) * h0z + q * h1z - (1.0 - q) * h0 - q * h1 +
                 binary_entropy(q) + feedback_rate;
  return std::min(decode, keyed);
}

double special_case(const WiretapSystem& sys, double feedback_rate,
                    SpecialCase which, const OptimizeOptions& opts) {
  if (feedback_rate < 0.0) {
    throw std::invalid_argument("special_case: negative feedback rate");
  }
  double h_s = entropy(sys.state_law());
  switch (which) {
    case SpecialCase::degraded_no_state: {
      if (!state_independent_channels(sys)) {
        throw StructuralAssumptionViolated(
            "degraded_no_state: channel depends on the state");
      }
      DegradednessReport deg = check_degraded(sys);
      if (!deg.degraded) {
        throw NotDegraded("degraded_no_state: eavesdropper not degraded");
      }
      // with a tied input and state-independent channels H(S|Z) = H(S)
      SearchResult r = maximize(sys, Mode::corollary, feedback_rate, /*tied=*/true, opts);
      return std::max(0.0, r.value);
    }
    case SpecialCase::less_noisy_eve: {
      if (!state_independent_channels(sys)) {
        throw StructuralAssumptionViolated(
            "less_noisy_eve: channel depends on the state");
      }
      SearchResult r = maximize(sys, Mode::main_only, feedback_rate, /*tied=*/true, opts);
      return std::max(0.0, std::min(h_s + feedback_rate, r.value));
    }
    case SpecialCase::no_feedback: {
      SearchResult b1 = maximize(sys, Mode::corollary, 0.0, /*tied=*/false, opts);
      SearchResult b2 = maximize(sys, Mode::nofb2, 0.0, /*tied=*/true, opts);
      return std::max(0.0, std::max(b1.value, b2.value));
    }
    case SpecialCase::decoder_only_csi: {
      if (feedback_rate + 1e-12 < h_s) {
        throw StructuralAssumptionViolated(
            "decoder_only_csi: feedback budget below the state entropy");
      }
      SearchResult r = maximize(sys, Mode::corollary, 0.0, /*tied=*/false, opts);
      return std::max(0.0, r.value);
    }
    case SpecialCase::output_feedback: {
      if (sys.num_states() != 1) {
        throw StructuralAssumptionViolated("output_feedback: needs a stateless channel");
      }
      SearchResult r = maximize(sys, Mode::outfb, feedback_rate, /*tied=*/true, opts);
      return std::max(0.0, r.value);
    }
    case SpecialCase::feedback_only: {
      if (sys.num_states() != 1) {
        throw StructuralAssumptionViolated("feedback_only: needs a stateless channel");
      }
      SearchResult r = maximize(sys, Mode::upper, feedback_rate, /*tied=*/true, opts);
      return std::max(0.0, r.value);
    }
  }
  throw std::invalid_argument("special_case: unknown case");
}

IdentityCheckReport identity_check_decoder_only_csi(int trials, Rng& rng) {
  IdentityCheckReport report;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    int ns = 2 + static_cast<int>(rng.uniform_int(2));
    int nu = 2 + static_cast<int>(rng.uniform_int(2));
    int nx = 2 + static_cast<int>(rng.uniform_int(2));
    int ny = 2 + static_cast<int>(rng.uniform_int(2));
    int nz = 2 + static_cast<int>(rng.uniform_int(2));
    auto dirichlet = [&](int n) {
      std::vector<double> w(static_cast<size_t>(n));
      for (double& v : w) v = -std::log(1.0 - rng.uniform01());
      return Pmf::normalized(std::move(w));
    };
    Pmf ps = dirichlet(ns);
    Pmf pu = dirichlet(nu);
    std::vector<Pmf> px_u, pz_x;
    for (int u = 0; u < nu; ++u) px_u.push_back(dirichlet(nx));
    for (int x = 0; x < nx; ++x) pz_x.push_back(dirichlet(nz));
    std::vector<std::vector<Pmf>> py_xs(static_cast<size_t>(nx));
    for (int x = 0; x < nx; ++x) {
      for (int s = 0; s < ns; ++s) py_xs[static_cast<size_t>(x)].push_back(dirichlet(ny));
    }

    std::vector<double> table(static_cast<size_t>(ns) * nu * nx * ny * nz);
    size_t i = 0;
    for (int s = 0; s < ns; ++s) {
      for (int u = 0; u < nu; ++u) {
        for (int x = 0; x < nx; ++x) {
          double base = ps[s] * pu[u] * px_u[static_cast<size_t>(u)][x];
          for (int y = 0; y < ny; ++y) {
            double withy = base * py_xs[static_cast<size_t>(x)][static_cast<size_t>(s)][y];
            for (int z = 0; z < nz; ++z) {
              table[i++] = withy * pz_x[static_cast<size_t>(x)][z];
            }
          }
        }
      }
    }
    JointPmf j({ns, nu, nx, ny, nz}, std::move(table), {"S", "U", "X", "Y", "Z"});
    double i_uy_s = mutual_information(j, {1}, {3}, {0});
    double lhs = i_uy_s - mutual_information(j, {1}, {4}) + entropy(j, {0});
    double rhs = i_uy_s - mutual_information(j, {1}, {4}, {0}) +
                 conditional_entropy(j, {0}, {4});
    double dev = std::abs(lhs - rhs);
    report.max_deviation = std::max(report.max_deviation, dev);
    if (dev > 1e-10) ++report.violations;
  }
  return report;
}

AuxSearchResult search_aux_lower_bound(const WiretapSystem& sys,
                                       double feedback_rate,
                                       const AuxSearchOptions& opts) {
  int ns = sys.num_states();
  int nx = sys.num_inputs();
  int max_aux = std::min(opts.max_aux, nx * ns);

  AuxSearchResult out;
  out.best = AuxPolicy::identity(Pmf::uniform(nx), ns);
  out.result = lower_bound(sys, out.best, feedback_rate);
  out.evaluations = 1;

  auto compositions = [](int total, int parts) {
    std::vector<std::vector<int>> list;
    std::vector<int> cur(static_cast<size_t>(parts), 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
      if (pos == parts - 1) {
        cur[static_cast<size_t>(pos)] = left;
        list.push_back(cur);
        return;
      }
      for (int k = 0; k <= left; ++k) {
        cur[static_cast<size_t>(pos)] = k;
        self(self, pos + 1, left - k);
      }
    };
    rec(rec, 0, total);
    return list;
  };

  auto pow_ll = [](int base, int exp) {
    double est = std::pow(static_cast<double>(base), exp);
    if (est > 9e17) return static_cast<long long>(9e17);
    return static_cast<long long>(est);
  };

  for (int a = 1; a <= max_aux; ++a) {
    auto comps = compositions(opts.prob_steps, a);
    long long n_pu = static_cast<long long>(comps.size());
    // tiers: s-dependent maps, then s-independent, then identity-like
    int umap_digits = a * ns;
    int xmap_digits = a * ns;
    long long n_umap = pow_ll(a, umap_digits);
    long long n_xmap = pow_ll(nx, xmap_digits);
    bool umap_sdep = true, xmap_sdep = true;
    long long remaining = opts.budget - out.evaluations;
    if (remaining <= 0) break;
    auto total = [&]() {
      return n_pu * n_umap * n_xmap;
    };
    if (total() > remaining) {
      umap_sdep = false;
      n_umap = pow_ll(a, a);
    }
    if (total() > remaining) {
      xmap_sdep = false;
      n_xmap = pow_ll(nx, a);
    }
    if (total() > remaining) {
      n_umap = 1;  // identity map only
    }
    if (total() > remaining) continue;

    int u_digits = umap_sdep ? umap_digits : a;
    int x_digits = xmap_sdep ? xmap_digits : a;
    std::vector<int> umap_flat(static_cast<size_t>(a) * ns);
    for (long long um = 0; um < n_umap; ++um) {
      long long code = um;
      if (n_umap == 1) {
        for (int up = 0; up < a; ++up) {
          for (int s = 0; s < ns; ++s) umap_flat[static_cast<size_t>(up) * ns + s] = up;
        }
      } else {
        std::vector<int> digits(static_cast<size_t>(u_digits));
        for (int d = 0; d < u_digits; ++d) {
          digits[static_cast<size_t>(d)] = static_cast<int>(code % a);
          code /= a;
        }
        for (int up = 0; up < a; ++up) {
          for (int s = 0; s < ns; ++s) {
            umap_flat[static_cast<size_t>(up) * ns + s] =
                umap_sdep ? digits[static_cast<size_t>(up * ns + s)]
                          : digits[static_cast<size_t>(up)];
          }
        }
      }
      for (long long xm = 0; xm < n_xmap; ++xm) {
        long long xcode = xm;
        std::vector<int> xdigits(static_cast<size_t>(x_digits));
        for (int d = 0; d < x_digits; ++d) {
          xdigits[static_cast<size_t>(d)] = static_cast<int>(xcode % nx);
          xcode /= nx;
        }
        std::vector<double> rows(static_cast<size_t>(a) * ns * nx, 0.0);
        for (int u = 0; u < a; ++u) {
          for (int s = 0; s < ns; ++s) {
            int x = xmap_sdep ? xdigits[static_cast<size_t>(u * ns + s)]
                              : xdigits[static_cast<size_t>(u)];
            rows[(static_cast<size_t>(u) * ns + s) * nx + x] = 1.0;
          }
        }
        Channel x_given_us(a * ns, nx, rows);
        for (const auto& comp : comps) {
          std::vector<double> pu(static_cast<size_t>(a));
          for (int i = 0; i < a; ++i) {
            pu[static_cast<size_t>(i)] =
                static_cast<double>(comp[static_cast<size_t>(i)]) / opts.prob_steps;
          }
          AuxPolicy aux{Pmf(std::move(pu)), ns, a, umap_flat, x_given_us};
          LowerBoundResult r = lower_bound(sys, aux, feedback_rate);
          ++out.evaluations;
          if (r.value > out.result.value) {
            out.result = r;
            out.best = std::move(aux);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace wiretap
