#pragma once

#include <vector>

#include "wiretap/channels.hpp"
#include "wiretap/errors.hpp"
#include "wiretap/prob.hpp"
#include "wiretap/rng.hpp"

namespace wiretap {

// Input distribution conditioned on the causal state, p(x|s).
struct InputPolicy {
  std::vector<Pmf> x_given_s;

  static InputPolicy uniform(int num_inputs, int num_states);
  static InputPolicy tied(const Pmf& x, int num_states);

  int num_states() const { return static_cast<int>(x_given_s.size()); }
  int num_inputs() const {
    return x_given_s.empty() ? 0 : x_given_s.front().size();
  }
};

// Auxiliary codebook variable: codewords carry U' ~ p_u i.i.d.; the transmitted
// letter is drawn from p(x|u,s) where u = u_map[u' * num_states + s].
struct AuxPolicy {
  Pmf p_u;
  int num_states = 1;
  int aux_out = 1;              // alphabet size of the mapped symbol U
  std::vector<int> u_map;       // [u' * num_states + s] -> u
  Channel x_given_us;           // rows indexed u * num_states + s

  static AuxPolicy identity(const Pmf& p_x, int num_states);
  // Functional representation of a per-state input policy: U' ranges over
  // tuples (x_0, ..., x_{|S|-1}) and the state selects the coordinate.
  static AuxPolicy per_state(const InputPolicy& policy);

  int aux_size() const { return p_u.size(); }
  int map_at(int u_prime, int s) const {
    return u_map[static_cast<size_t>(u_prime) * num_states + s];
  }
};

struct InfoTerms {
  double i_xy_s = 0.0;
  double i_xz_s = 0.0;
  double h_s_z = 0.0;
  double i_xy_zs = 0.0;
  double i_uy_s = 0.0;
  double i_uz_s = 0.0;
  double h_s_zu = 0.0;
};

struct AuxCodecTerms {
  double i_up_ys = 0.0;  // I(U' ; Y, S)
  double i_up_zs = 0.0;  // I(U' ; Z, S)
};

struct LowerBoundResult {
  double r_hat1 = 0.0;  // signed; may be negative before clamping
  double r_hat2 = 0.0;
  double r_hat3 = 0.0;
  double value = 0.0;   // clamped at zero
  int branch = 1;
  bool branch2_valid = false;
};

struct BoundReport {
  double r_hat1 = 0.0;
  double r_hat2 = 0.0;
  double r_hat3 = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double feedback_rate = 0.0;
  int branch = 1;
  InputPolicy argmax;
};

enum class Objective { lower, upper, corollary };

struct OptimizeOptions {
  double resolution = 1e-3;   // coarse grid pitch for the scalar searches
  double refine_tol = 1e-7;   // golden-section bracket width at termination
};

// Joint law p(s, x, y, z) induced by a per-state input policy.
JointPmf policy_joint(const WiretapSystem& sys, const InputPolicy& policy);
// Joint law p(s, u', u, x, y, z) induced by an auxiliary policy.
JointPmf aux_joint(const WiretapSystem& sys, const AuxPolicy& aux);

// Single-letter terms with U := X.
InfoTerms info_terms(const WiretapSystem& sys, const InputPolicy& policy);
InfoTerms info_terms(const WiretapSystem& sys, const AuxPolicy& aux);
AuxCodecTerms aux_codec_terms(const WiretapSystem& sys, const AuxPolicy& aux);

// Achievable-rate branches for one auxiliary policy.  Branch 2 is admitted
// only when the mapped symbol is numerically independent of the state.
LowerBoundResult lower_bound(const WiretapSystem& sys, const AuxPolicy& aux,
                             double feedback_rate);

// min{ I(X;Y|Z,S) + H(S|Z) + R_f , I(X;Y|S) } at one input policy.
double upper_bound(const WiretapSystem& sys, const InputPolicy& policy,
                   double feedback_rate);

// Maximizes the selected objective over per-state input policies and reports
// both bound values evaluated at the argmax.
BoundReport optimize(const WiretapSystem& sys, double feedback_rate,
                     Objective objective, const OptimizeOptions& opts = {});

// Exact secrecy capacity of a physically degraded system; throws NotDegraded
// when the degradedness certificate fails.
double corollary_capacity(const WiretapSystem& sys, double feedback_rate,
                          const OptimizeOptions& opts = {});

// Closed forms for the binary-symmetric scenarios.
double bsc_nostate_capacity(const BscScenario& scn, double feedback_rate);
double bsc_state_capacity(const BscScenario& scn, double feedback_rate);

enum class SpecialCase {
  degraded_no_state,
  less_noisy_eve,
  no_feedback,
  decoder_only_csi,
  output_feedback,
  feedback_only,
};

// Reduced-setting values; throws StructuralAssumptionViolated (or NotDegraded)
// when the system does not satisfy the reduction's hypotheses.
double special_case(const WiretapSystem& sys, double feedback_rate,
                    SpecialCase which, const OptimizeOptions& opts = {});

struct IdentityCheckReport {
  int trials = 0;
  int violations = 0;
  double max_deviation = 0.0;
};

// On random systems where Z depends on X alone, checks
// I(U;Y|S) - I(U;Z) + H(S)  ==  I(U;Y|S) - I(U;Z|S) + H(S|Z)
// through independent marginalization routes.
IdentityCheckReport identity_check_decoder_only_csi(int trials, Rng& rng);

struct AuxSearchOptions {
  int max_aux = 4;        // largest auxiliary alphabet tried
  int prob_steps = 4;     // quantization of p_u (masses are k/prob_steps)
  long long budget = 200'000;  // cap on lower_bound evaluations
};

struct AuxSearchResult {
  AuxPolicy best = AuxPolicy::identity(Pmf::uniform(1), 1);
  LowerBoundResult result;
  long long evaluations = 0;
};

// Grid search over quantized auxiliary policies with deterministic maps;
// degrades map families (state-dependent -> shared -> identity) to fit budget.
AuxSearchResult search_aux_lower_bound(const WiretapSystem& sys,
                                       double feedback_rate,
                                       const AuxSearchOptions& opts = {});

}  // namespace wiretap
