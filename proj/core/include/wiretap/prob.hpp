#pragma once

#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace wiretap {

// Probabilities at or below this magnitude are treated as exact zeros inside
// entropy sums; keeps 0*log(0) from producing NaN without renormalizing.
inline constexpr double kZeroProbEps = 1e-15;
// Allowed |sum - 1| for a distribution at construction time.
inline constexpr double kMassTol = 1e-12;

class Pmf {
public:
  explicit Pmf(std::vector<double> probs);

  static Pmf uniform(int n);
  static Pmf point_mass(int n, int at);
  // Scales arbitrary non-negative weights to unit mass (explicit opt-in).
  static Pmf normalized(std::vector<double> weights);

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[static_cast<size_t>(i)]; }
  std::span<const double> probs() const { return p_; }

private:
  std::vector<double> p_;
};

// Row-stochastic matrix p(out|in), rows indexed by the input symbol.
class Channel {
public:
  Channel(int inputs, int outputs, std::vector<double> row_major);
  static Channel from_rows(const std::vector<std::vector<double>>& rows);

  int inputs() const { return in_; }
  int outputs() const { return out_; }
  double at(int in, int out) const {
    return p_[static_cast<size_t>(in) * out_ + out];
  }
  Pmf row(int in) const;
  std::span<const double> row_span(int in) const {
    return {p_.data() + static_cast<size_t>(in) * out_,
            static_cast<size_t>(out_)};
  }

private:
  int in_ = 0;
  int out_ = 0;
  std::vector<double> p_;
};

// Dense joint distribution over a small product of finite axes.
// Storage is row-major with the last axis fastest.
class JointPmf {
public:
  JointPmf(std::vector<int> axis_sizes, std::vector<double> table,
           std::vector<std::string> axis_names = {});

  int rank() const { return static_cast<int>(sizes_.size()); }
  int axis_size(int axis) const;
  const std::vector<int>& axis_sizes() const { return sizes_; }
  const std::vector<std::string>& axis_names() const { return names_; }
  std::span<const double> table() const { return p_; }
  double at(std::span<const int> index) const;
  double at(std::initializer_list<int> index) const {
    return at(std::span<const int>(index.begin(), index.size()));
  }

  // Marginal over the kept axes, in the order given.
  JointPmf marginal(std::span<const int> keep) const;
  JointPmf marginal(std::initializer_list<int> keep) const {
    return marginal(std::span<const int>(keep.begin(), keep.size()));
  }
  Pmf marginal_pmf(int axis) const;

private:
  std::vector<int> sizes_;
  std::vector<size_t> strides_;
  std::vector<double> p_;
  std::vector<std::string> names_;
};

double entropy(const Pmf& p);
double entropy(const JointPmf& joint);
double entropy(const JointPmf& joint, std::span<const int> axes);
inline double entropy(const JointPmf& joint, std::initializer_list<int> axes) {
  return entropy(joint, std::span<const int>(axes.begin(), axes.size()));
}

double binary_entropy(double p);
// a*(1-b) + (1-a)*b, the crossover of two cascaded binary symmetric channels
double binary_convolve(double a, double b);

// Two-axis joint p(x) * p(y|x); axes named "X", "Y" unless overridden.
JointPmf joint_from(const Pmf& input, const Channel& ch,
                    std::string in_name = "X", std::string out_name = "Y");

// H(target | given); the axis sets must be disjoint.
double conditional_entropy(const JointPmf& joint, std::span<const int> target,
                           std::span<const int> given);
inline double conditional_entropy(const JointPmf& joint,
                                  std::initializer_list<int> target,
                                  std::initializer_list<int> given) {
  return conditional_entropy(
      joint, std::span<const int>(target.begin(), target.size()),
      std::span<const int>(given.begin(), given.size()));
}

// I(a ; b | cond); all three axis sets must be pairwise disjoint.
double mutual_information(const JointPmf& joint, std::span<const int> a,
                          std::span<const int> b,
                          std::span<const int> cond = {});
inline double mutual_information(const JointPmf& joint,
                                 std::initializer_list<int> a,
                                 std::initializer_list<int> b,
                                 std::initializer_list<int> cond = {}) {
  return mutual_information(joint,
                            std::span<const int>(a.begin(), a.size()),
                            std::span<const int>(b.begin(), b.size()),
                            std::span<const int>(cond.begin(), cond.size()));
}

}  // namespace wiretap
