#include "wiretap/channels.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace wiretap {
namespace {

using nlohmann::json;

// Lawson-Hanson non-negative least squares: min ||Ax - b|| s.t. x >= 0.
// A is row-major m x n. Sizes here are tiny (n <= |Y|*|Z|).
std::vector<double> nnls(int m, int n, const std::vector<double>& A,
                         const std::vector<double>& b) {
  auto a_at = [&](int r, int c) { return A[static_cast<size_t>(r) * n + c]; };
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  std::vector<char> passive(static_cast<size_t>(n), 0);

  auto residual_vec = [&]() {
    std::vector<double> r(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += a_at(i, j) * x[static_cast<size_t>(j)];
      r[static_cast<size_t>(i)] = b[static_cast<size_t>(i)] - dot;
    }
    return r;
  };

  // unconstrained least squares restricted to the passive columns,
  // via normal equations with partial pivoting
  auto solve_passive = [&](std::vector<double>& z) {
    std::vector<int> cols;
    for (int j = 0; j < n; ++j) {
      if (passive[static_cast<size_t>(j)]) cols.push_back(j);
    }
    int k = static_cast<int>(cols.size());
    std::vector<double> G(static_cast<size_t>(k) * k, 0.0);
    std::vector<double> rhs(static_cast<size_t>(k), 0.0);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        double dot = 0.0;
        for (int r = 0; r < m; ++r) dot += a_at(r, cols[i]) * a_at(r, cols[j]);
        G[static_cast<size_t>(i) * k + j] = dot;
      }
      double dot = 0.0;
      for (int r = 0; r < m; ++r) dot += a_at(r, cols[i]) * b[static_cast<size_t>(r)];
      rhs[static_cast<size_t>(i)] = dot;
    }
    for (int col = 0; col < k; ++col) {
      int piv = col;
      for (int r = col + 1; r < k; ++r) {
        if (std::abs(G[static_cast<size_t>(r) * k + col]) >
            std::abs(G[static_cast<size_t>(piv) * k + col])) {
          piv = r;
        }
      }
      for (int c = 0; c < k; ++c) {
        std::swap(G[static_cast<size_t>(col) * k + c],
                  G[static_cast<size_t>(piv) * k + c]);
      }
      std::swap(rhs[static_cast<size_t>(col)], rhs[static_cast<size_t>(piv)]);
      double d = G[static_cast<size_t>(col) * k + col];
      if (std::abs(d) < 1e-13) {
        d = (d < 0 ? -1e-13 : 1e-13);  // rank-deficient; keep it stable
      }
      for (int r = col + 1; r < k; ++r) {
        double f = G[static_cast<size_t>(r) * k + col] / d;
        for (int c = col; c < k; ++c) {
          G[static_cast<size_t>(r) * k + c] -= f * G[static_cast<size_t>(col) * k + c];
        }
        rhs[static_cast<size_t>(r)] -= f * rhs[static_cast<size_t>(col)];
      }
    }
    std::vector<double> sol(static_cast<size_t>(k));
    for (int r = k - 1; r >= 0; --r) {
      double acc = rhs[static_cast<size_t>(r)];
      for (int c = r + 1; c < k; ++c) {
        acc -= G[static_cast<size_t>(r) * k + c] * sol[static_cast<size_t>(c)];
      }
      double d = G[static_cast<size_t>(r) * k + r];
      if (std::abs(d) < 1e-13) d = (d < 0 ? -1e-13 : 1e-13);
      sol[static_cast<size_t>(r)] = acc / d;
    }
    std::fill(z.begin(), z.end(), 0.0);
    for (int i = 0; i < k; ++i) z[static_cast<size_t>(cols[i])] = sol[static_cast<size_t>(i)];
  };

  const double w_tol = 1e-12;
  for (int outer = 0; outer < 4 * n + 16; ++outer) {
    std::vector<double> r = residual_vec();
    int best = -1;
    double best_w = w_tol;
    for (int j = 0; j < n; ++j) {
      if (passive[static_cast<size_t>(j)]) continue;
      double w = 0.0;
      for (int i = 0; i < m; ++i) w += a_at(i, j) * r[static_cast<size_t>(i)];
      if (w > best_w) {
        best_w = w;
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<size_t>(best)] = 1;

    std::vector<double> z(static_cast<size_t>(n), 0.0);
    for (int inner = 0; inner < 4 * n + 16; ++inner) {
      solve_passive(z);
      double min_z = 1.0;
      for (int j = 0; j < n; ++j) {
        if (passive[static_cast<size_t>(j)]) min_z = std::min(min_z, z[static_cast<size_t>(j)]);
      }
      if (min_z > 0.0) break;
      double alpha = 1.0;
      for (int j = 0; j < n; ++j) {
        if (!passive[static_cast<size_t>(j)] || z[static_cast<size_t>(j)] > 0.0) continue;
        double denom = x[static_cast<size_t>(j)] - z[static_cast<size_t>(j)];
        if (denom > 0.0) alpha = std::min(alpha, x[static_cast<size_t>(j)] / denom);
      }
      for (int j = 0; j < n; ++j) {
        if (!passive[static_cast<size_t>(j)]) continue;
        x[static_cast<size_t>(j)] += alpha * (z[static_cast<size_t>(j)] - x[static_cast<size_t>(j)]);
        if (x[static_cast<size_t>(j)] <= 1e-14) {
          x[static_cast<size_t>(j)] = 0.0;
          passive[static_cast<size_t>(j)] = 0;
        }
      }
    }
    for (int j = 0; j < n; ++j) {
      if (passive[static_cast<size_t>(j)]) x[static_cast<size_t>(j)] = z[static_cast<size_t>(j)];
    }
  }
  return x;
}

void require_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " outside [0,1]");
  }
}

}  // namespace

WiretapSystem::WiretapSystem(Pmf state_law, int num_inputs, Channel y_given_xs,
                             std::variant<GeneralEve, DegradedEve> eve)
    : state_law_(std::move(state_law)), num_x_(num_inputs), num_z_(0),
      main_(std::move(y_given_xs)), eve_(std::move(eve)) {
  if (num_x_ <= 0) throw std::invalid_argument("WiretapSystem: no inputs");
  if (main_.inputs() != num_x_ * state_law_.size()) {
    throw std::invalid_argument("WiretapSystem: main channel must be indexed by (x,s)");
  }
  if (const auto* g = std::get_if<GeneralEve>(&eve_)) {
    if (g->z_given_xs.inputs() != num_x_ * state_law_.size()) {
      throw std::invalid_argument("WiretapSystem: eve channel must be indexed by (x,s)");
    }
    num_z_ = g->z_given_xs.outputs();
  } else {
    const auto& d = std::get<DegradedEve>(eve_);
    if (d.z_given_y.inputs() != main_.outputs()) {
      throw std::invalid_argument("WiretapSystem: degraded eve must be indexed by y");
    }
    num_z_ = d.z_given_y.outputs();
  }
}

double WiretapSystem::p_z(int z, int x, int s) const {
  if (const auto* g = std::get_if<GeneralEve>(&eve_)) {
    return g->z_given_xs.at(xs_index(x, s), z);
  }
  const auto& d = std::get<DegradedEve>(eve_);
  double sum = 0.0;
  for (int y = 0; y < main_.outputs(); ++y) {
    sum += p_y(y, x, s) * d.z_given_y.at(y, z);
  }
  return sum;
}

double WiretapSystem::p_yz(int y, int z, int x, int s) const {
  if (const auto* g = std::get_if<GeneralEve>(&eve_)) {
    return p_y(y, x, s) * g->z_given_xs.at(xs_index(x, s), z);
  }
  const auto& d = std::get<DegradedEve>(eve_);
  return p_y(y, x, s) * d.z_given_y.at(y, z);
}

Channel WiretapSystem::eve_xs() const {
  int rows = num_x_ * num_states();
  std::vector<double> flat(static_cast<size_t>(rows) * num_z_);
  for (int x = 0; x < num_x_; ++x) {
    for (int s = 0; s < num_states(); ++s) {
      for (int z = 0; z < num_z_; ++z) {
        flat[static_cast<size_t>(xs_index(x, s)) * num_z_ + z] = p_z(z, x, s);
      }
    }
  }
  return Channel(rows, num_z_, std::move(flat));
}

Channel make_bsc(double crossover) {
  require_prob(crossover, "make_bsc: crossover");
  return Channel(2, 2,
                 {1.0 - crossover, crossover, crossover, 1.0 - crossover});
}

Channel cascade(const Channel& first, const Channel& second) {
  if (first.outputs() != second.inputs()) {
    throw std::invalid_argument("cascade: inner alphabet mismatch");
  }
  std::vector<double> flat(static_cast<size_t>(first.inputs()) * second.outputs(), 0.0);
  for (int x = 0; x < first.inputs(); ++x) {
    for (int z = 0; z < second.outputs(); ++z) {
      double sum = 0.0;
      for (int y = 0; y < first.outputs(); ++y) {
        sum += first.at(x, y) * second.at(y, z);
      }
      flat[static_cast<size_t>(x) * second.outputs() + z] = sum;
    }
  }
  return Channel(first.inputs(), second.outputs(), std::move(flat));
}

WiretapSystem make_state_bsc(const BscScenario& scn, bool with_state) {
  require_prob(scn.p_y, "p_y");
  require_prob(scn.p_z, "p_z");
  require_prob(scn.p_s0, "p_s0");
  require_prob(scn.p_s1, "p_s1");
  require_prob(scn.q, "q");
  if (!with_state) {
    return WiretapSystem(Pmf::point_mass(1, 0), 2, make_bsc(scn.p_y),
                         DegradedEve{make_bsc(scn.p_z)});
  }
  // main rows indexed x*|S|+s
  Channel bsc0 = make_bsc(scn.p_s0);
  Channel bsc1 = make_bsc(scn.p_s1);
  std::vector<double> rows;
  rows.reserve(8);
  for (int x = 0; x < 2; ++x) {
    for (int s = 0; s < 2; ++s) {
      const Channel& c = (s == 0) ? bsc0 : bsc1;
      rows.push_back(c.at(x, 0));
      rows.push_back(c.at(x, 1));
    }
  }
  return WiretapSystem(Pmf({1.0 - scn.q, scn.q}), 2, Channel(4, 2, std::move(rows)),
                       DegradedEve{make_bsc(scn.p_z)});
}

DegradednessReport check_degraded(const WiretapSystem& sys, double tol) {
  const int ny = sys.num_main_outputs();
  const int nz = sys.num_eve_outputs();
  const int pairs = sys.num_inputs() * sys.num_states();
  const int n = ny * nz;          // unknown W(y,z)
  const int m = pairs * nz + ny;  // factorization equations + row sums

  std::vector<double> A(static_cast<size_t>(m) * n, 0.0);
  std::vector<double> b(static_cast<size_t>(m), 0.0);
  int row = 0;
  for (int x = 0; x < sys.num_inputs(); ++x) {
    for (int s = 0; s < sys.num_states(); ++s) {
      for (int z = 0; z < nz; ++z, ++row) {
        for (int y = 0; y < ny; ++y) {
          A[static_cast<size_t>(row) * n + (y * nz + z)] = sys.p_y(y, x, s);
        }
        b[static_cast<size_t>(row)] = sys.p_z(z, x, s);
      }
    }
  }
  for (int y = 0; y < ny; ++y, ++row) {
    for (int z = 0; z < nz; ++z) {
      A[static_cast<size_t>(row) * n + (y * nz + z)] = 1.0;
    }
    b[static_cast<size_t>(row)] = 1.0;
  }

  std::vector<double> w = nnls(m, n, A, b);

  double residual = 0.0;
  for (int i = 0; i < m; ++i) {
    double dot = 0.0;
    for (int j = 0; j < n; ++j) dot += A[static_cast<size_t>(i) * n + j] * w[static_cast<size_t>(j)];
    residual = std::max(residual, std::abs(dot - b[static_cast<size_t>(i)]));
  }

  DegradednessReport report;
  report.residual = residual;
  report.degraded = residual <= tol;
  if (report.degraded) {
    std::vector<double> flat(static_cast<size_t>(ny) * nz);
    for (int y = 0; y < ny; ++y) {
      double sum = 0.0;
      for (int z = 0; z < nz; ++z) {
        double v = std::max(0.0, w[static_cast<size_t>(y * nz + z)]);
        flat[static_cast<size_t>(y) * nz + z] = v;
        sum += v;
      }
      for (int z = 0; z < nz; ++z) flat[static_cast<size_t>(y) * nz + z] /= sum;
    }
    report.witness = Channel(ny, nz, std::move(flat));
  }
  return report;
}

std::vector<int> sample_states(const WiretapSystem& sys, int n, Rng& rng) {
  if (n < 0) throw std::invalid_argument("sample_states: negative length");
  std::vector<int> s(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<size_t>(i)] = rng.sample(sys.state_law().probs());
  return s;
}

std::pair<std::vector<int>, std::vector<int>> sample_block(
    const WiretapSystem& sys, const std::vector<int>& x_seq,
    const std::vector<int>& s_seq, Rng& rng) {
  if (x_seq.size() != s_seq.size()) {
    throw std::invalid_argument("sample_block: length mismatch");
  }
  std::vector<int> y_seq(x_seq.size());
  std::vector<int> z_seq(x_seq.size());
  const auto* deg = std::get_if<DegradedEve>(&sys.eve());
  const auto* gen = std::get_if<GeneralEve>(&sys.eve());
  for (size_t i = 0; i < x_seq.size(); ++i) {
    int xs = sys.xs_index(x_seq[i], s_seq[i]);
    int y = rng.sample(sys.main().row_span(xs));
    int z = deg ? rng.sample(deg->z_given_y.row_span(y))
                : rng.sample(gen->z_given_xs.row_span(xs));
    y_seq[i] = y;
    z_seq[i] = z;
  }
  return {std::move(y_seq), std::move(z_seq)};
}

BscScenario scenario_from_json(const json& j) {
  BscScenario scn;
  scn.p_y = j.value("p_y", scn.p_y);
  scn.p_z = j.value("p_z", scn.p_z);
  scn.p_s0 = j.value("p_s0", scn.p_s0);
  scn.p_s1 = j.value("p_s1", scn.p_s1);
  scn.q = j.value("q", scn.q);
  return scn;
}

json scenario_to_json(const BscScenario& scn) {
  return json{{"p_y", scn.p_y},
              {"p_z", scn.p_z},
              {"p_s0", scn.p_s0},
              {"p_s1", scn.p_s1},
              {"q", scn.q}};
}

WiretapSystem system_from_json(const json& j) {
  Pmf state_law(j.at("state_law").get<std::vector<double>>());
  auto main3 = j.at("main").get<std::vector<std::vector<std::vector<double>>>>();
  int nx = static_cast<int>(main3.size());
  int ns = state_law.size();
  if (nx == 0 || static_cast<int>(main3.front().size()) != ns) {
    throw std::invalid_argument("system_from_json: main must be [x][s][y]");
  }
  int ny = static_cast<int>(main3.front().front().size());
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(nx) * ns * ny);
  for (int x = 0; x < nx; ++x) {
    if (static_cast<int>(main3[static_cast<size_t>(x)].size()) != ns) {
      throw std::invalid_argument("system_from_json: ragged main table");
    }
    for (int s = 0; s < ns; ++s) {
      const auto& row = main3[static_cast<size_t>(x)][static_cast<size_t>(s)];
      if (static_cast<int>(row.size()) != ny) {
        throw std::invalid_argument("system_from_json: ragged main table");
      }
      flat.insert(flat.end(), row.begin(), row.end());
    }
  }
  Channel main(nx * ns, ny, std::move(flat));

  if (j.contains("eve_degraded")) {
    auto rows = j.at("eve_degraded").get<std::vector<std::vector<double>>>();
    return WiretapSystem(std::move(state_law), nx, std::move(main),
                         DegradedEve{Channel::from_rows(rows)});
  }
  if (!j.contains("eve_general")) {
    throw std::invalid_argument("system_from_json: need eve_degraded or eve_general");
  }
  auto eve3 = j.at("eve_general").get<std::vector<std::vector<std::vector<double>>>>();
  if (static_cast<int>(eve3.size()) != nx) {
    throw std::invalid_argument("system_from_json: eve_general must be [x][s][z]");
  }
  int nz = static_cast<int>(eve3.front().front().size());
  std::vector<double> eflat;
  eflat.reserve(static_cast<size_t>(nx) * ns * nz);
  for (int x = 0; x < nx; ++x) {
    for (int s = 0; s < ns; ++s) {
      const auto& row = eve3[static_cast<size_t>(x)][static_cast<size_t>(s)];
      if (static_cast<int>(row.size()) != nz) {
        throw std::invalid_argument("system_from_json: ragged eve table");
      }
      eflat.insert(eflat.end(), row.begin(), row.end());
    }
  }
  return WiretapSystem(std::move(state_law), nx, std::move(main),
                       GeneralEve{Channel(nx * ns, nz, std::move(eflat))});
}

json system_to_json(const WiretapSystem& sys) {
  json j;
  j["state_law"] = std::vector<double>(sys.state_law().probs().begin(),
                                       sys.state_law().probs().end());
  std::vector<std::vector<std::vector<double>>> main3(
      static_cast<size_t>(sys.num_inputs()));
  for (int x = 0; x < sys.num_inputs(); ++x) {
    auto& per_state = main3[static_cast<size_t>(x)];
    per_state.resize(static_cast<size_t>(sys.num_states()));
    for (int s = 0; s < sys.num_states(); ++s) {
      auto row = sys.main().row_span(sys.xs_index(x, s));
      per_state[static_cast<size_t>(s)].assign(row.begin(), row.end());
    }
  }
  j["main"] = main3;
  if (const auto* d = std::get_if<DegradedEve>(&sys.eve())) {
    std::vector<std::vector<double>> rows(static_cast<size_t>(d->z_given_y.inputs()));
    for (int y = 0; y < d->z_given_y.inputs(); ++y) {
      auto row = d->z_given_y.row_span(y);
      rows[static_cast<size_t>(y)].assign(row.begin(), row.end());
    }
    j["eve_degraded"] = rows;
  } else {
    const auto& g = std::get<GeneralEve>(sys.eve());
    std::vector<std::vector<std::vector<double>>> eve3(
        static_cast<size_t>(sys.num_inputs()));
    for (int x = 0; x < sys.num_inputs(); ++x) {
      auto& per_state = eve3[static_cast<size_t>(x)];
      per_state.resize(static_cast<size_t>(sys.num_states()));
      for (int s = 0; s < sys.num_states(); ++s) {
        auto row = g.z_given_xs.row_span(sys.xs_index(x, s));
        per_state[static_cast<size_t>(s)].assign(row.begin(), row.end());
      }
    }
    j["eve_general"] = eve3;
  }
  return j;
}

WiretapSystem load_system(const json& j, bool with_state) {
  if (j.contains("state_law")) return system_from_json(j);
  return make_state_bsc(scenario_from_json(j), with_state);
}

}  // namespace wiretap
