#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "wiretap/prob.hpp"
#include "wiretap/rng.hpp"

namespace wiretap {

// Eavesdropper observes through her own channel p(z|x,s).
struct GeneralEve {
  Channel z_given_xs;  // inputs flattened as x*|S|+s
};

// Eavesdropper sees a degraded copy of the legitimate output, p(z|y).
struct DegradedEve {
  Channel z_given_y;
};

// State-dependent broadcast law: p(s) i.i.d., p(y|x,s) to the receiver and
// either p(z|x,s) or p(z|y) to the eavesdropper. Y and Z are conditionally
// independent given (X,S) in the general form.
class WiretapSystem {
public:
  WiretapSystem(Pmf state_law, int num_inputs, Channel y_given_xs,
                std::variant<GeneralEve, DegradedEve> eve);

  int num_states() const { return state_law_.size(); }
  int num_inputs() const { return num_x_; }
  int num_main_outputs() const { return main_.outputs(); }
  int num_eve_outputs() const { return num_z_; }

  const Pmf& state_law() const { return state_law_; }
  const Channel& main() const { return main_; }
  const std::variant<GeneralEve, DegradedEve>& eve() const { return eve_; }
  bool eve_is_degraded() const {
    return std::holds_alternative<DegradedEve>(eve_);
  }

  int xs_index(int x, int s) const { return x * num_states() + s; }

  double p_y(int y, int x, int s) const { return main_.at(xs_index(x, s), y); }
  // marginal eavesdropper law, summed through y when the form is degraded
  double p_z(int z, int x, int s) const;
  // joint channel law p(y,z|x,s); this is where the two forms differ
  double p_yz(int y, int z, int x, int s) const;
  // marginal eavesdropper law as an (x,s)-indexed channel
  Channel eve_xs() const;

private:
  Pmf state_law_;
  int num_x_;
  int num_z_;
  Channel main_;
  std::variant<GeneralEve, DegradedEve> eve_;
};

// Crossover parameters of the binary-symmetric study family. p_y drives the
// stateless main channel; (p_s0, p_s1, q) the state-dependent one; p_z the
// additional degradation seen by the eavesdropper.
struct BscScenario {
  double p_y = 0.1;
  double p_z = 0.1;
  double p_s0 = 0.05;
  double p_s1 = 0.15;
  double q = 0.1;
};

Channel make_bsc(double crossover);
// second applied after first: p(z|x) = sum_y first(y|x) second(z|y)
Channel cascade(const Channel& first, const Channel& second);
WiretapSystem make_state_bsc(const BscScenario& scn, bool with_state);

struct DegradednessReport {
  bool degraded = false;
  double residual = 0.0;  // max-abs defect of the best stochastic factorization
  std::optional<Channel> witness;  // p(z|y) when degraded
};

// Decides whether some stochastic p(z|y) factors the eavesdropper through the
// main output, via non-negative least squares on the linear system.
DegradednessReport check_degraded(const WiretapSystem& sys, double tol = 1e-9);

std::vector<int> sample_states(const WiretapSystem& sys, int n, Rng& rng);
// samples (y_seq, z_seq) for given input and state sequences
std::pair<std::vector<int>, std::vector<int>> sample_block(
    const WiretapSystem& sys, const std::vector<int>& x_seq,
    const std::vector<int>& s_seq, Rng& rng);

BscScenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const BscScenario& scn);
WiretapSystem system_from_json(const nlohmann::json& j);
nlohmann::json system_to_json(const WiretapSystem& sys);
// dispatches on shape: explicit tables if "state_law" present, else the
// BSC scenario form expanded by make_state_bsc
WiretapSystem load_system(const nlohmann::json& j, bool with_state = true);

}  // namespace wiretap
