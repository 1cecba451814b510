#include "wiretap/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wiretap {
namespace {

constexpr size_t kMaxTableCells = size_t{1} << 26;

void validate_mass(std::vector<double>& p, const char* what) {
  double sum = 0.0;
  for (double& v : p) {
    if (v < -kZeroProbEps) {
      throw std::invalid_argument(std::string(what) + ": negative probability");
    }
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (std::abs(sum - 1.0) > kMassTol) {
    throw std::invalid_argument(std::string(what) + ": mass off by " +
                                std::to_string(sum - 1.0));
  }
}

double neg_plogp(double p) {
  if (p <= kZeroProbEps) return 0.0;
  return -p * std::log2(p);
}

double table_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) h += neg_plogp(v);
  return h;
}

void check_axes(const JointPmf& j, std::span<const int> axes) {
  for (int a : axes) {
    if (a < 0 || a >= j.rank()) {
      throw std::invalid_argument("axis index out of range");
    }
  }
  for (size_t i = 0; i < axes.size(); ++i) {
    for (size_t k = i + 1; k < axes.size(); ++k) {
      if (axes[i] == axes[k]) {
        throw std::invalid_argument("duplicate axis in axis set");
      }
    }
  }
}

void check_disjoint(std::span<const int> a, std::span<const int> b) {
  for (int x : a) {
    for (int y : b) {
      if (x == y) throw std::invalid_argument("axis sets must be disjoint");
    }
  }
}

std::vector<int> concat(std::span<const int> a, std::span<const int> b) {
  std::vector<int> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

Pmf::Pmf(std::vector<double> probs) : p_(std::move(probs)) {
  if (p_.empty()) throw std::invalid_argument("Pmf: empty support");
  validate_mass(p_, "Pmf");
}

Pmf Pmf::uniform(int n) {
  if (n <= 0) throw std::invalid_argument("Pmf::uniform: n must be positive");
  return Pmf(std::vector<double>(static_cast<size_t>(n), 1.0 / n));
}

Pmf Pmf::point_mass(int n, int at) {
  if (n <= 0 || at < 0 || at >= n) {
    throw std::invalid_argument("Pmf::point_mass: bad support or index");
  }
  std::vector<double> p(static_cast<size_t>(n), 0.0);
  p[static_cast<size_t>(at)] = 1.0;
  return Pmf(std::move(p));
}

Pmf Pmf::normalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("Pmf::normalized: negative weight");
    sum += w;
  }
  if (sum <= 0.0) throw std::invalid_argument("Pmf::normalized: zero total weight");
  for (double& w : weights) w /= sum;
  return Pmf(std::move(weights));
}

Channel::Channel(int inputs, int outputs, std::vector<double> row_major)
    : in_(inputs), out_(outputs), p_(std::move(row_major)) {
  if (in_ <= 0 || out_ <= 0) {
    throw std::invalid_argument("Channel: alphabet sizes must be positive");
  }
  if (p_.size() != static_cast<size_t>(in_) * out_) {
    throw std::invalid_argument("Channel: table size mismatch");
  }
  for (int i = 0; i < in_; ++i) {
    std::vector<double> row(p_.begin() + static_cast<ptrdiff_t>(i) * out_,
                            p_.begin() + static_cast<ptrdiff_t>(i + 1) * out_);
    validate_mass(row, "Channel row");
    std::copy(row.begin(), row.end(),
              p_.begin() + static_cast<ptrdiff_t>(i) * out_);
  }
}

Channel Channel::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("Channel: no rows");
  size_t out = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * out);
  for (const auto& r : rows) {
    if (r.size() != out) throw std::invalid_argument("Channel: ragged rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Channel(static_cast<int>(rows.size()), static_cast<int>(out),
                 std::move(flat));
}

Pmf Channel::row(int in) const {
  if (in < 0 || in >= in_) throw std::invalid_argument("Channel::row: bad input");
  return Pmf(std::vector<double>(p_.begin() + static_cast<ptrdiff_t>(in) * out_,
                                 p_.begin() + static_cast<ptrdiff_t>(in + 1) * out_));
}

JointPmf::JointPmf(std::vector<int> axis_sizes, std::vector<double> table,
                   std::vector<std::string> axis_names)
    : sizes_(std::move(axis_sizes)), p_(std::move(table)),
      names_(std::move(axis_names)) {
  if (sizes_.empty()) throw std::invalid_argument("JointPmf: no axes");
  size_t cells = 1;
  for (int s : sizes_) {
    if (s <= 0) throw std::invalid_argument("JointPmf: axis size must be positive");
    if (cells > kMaxTableCells / static_cast<size_t>(s)) {
      throw std::invalid_argument("JointPmf: table too large");
    }
    cells *= static_cast<size_t>(s);
  }
  if (p_.size() != cells) throw std::invalid_argument("JointPmf: table size mismatch");
  if (!names_.empty() && names_.size() != sizes_.size()) {
    throw std::invalid_argument("JointPmf: axis name count mismatch");
  }
  validate_mass(p_, "JointPmf");
  strides_.assign(sizes_.size(), 1);
  for (int a = static_cast<int>(sizes_.size()) - 2; a >= 0; --a) {
    strides_[static_cast<size_t>(a)] =
        strides_[static_cast<size_t>(a) + 1] *
        static_cast<size_t>(sizes_[static_cast<size_t>(a) + 1]);
  }
}

int JointPmf::axis_size(int axis) const {
  if (axis < 0 || axis >= rank()) throw std::invalid_argument("axis out of range");
  return sizes_[static_cast<size_t>(axis)];
}

double JointPmf::at(std::span<const int> index) const {
  if (index.size() != sizes_.size()) {
    throw std::invalid_argument("JointPmf::at: index rank mismatch");
  }
  size_t flat = 0;
  for (size_t a = 0; a < index.size(); ++a) {
    if (index[a] < 0 || index[a] >= sizes_[a]) {
      throw std::invalid_argument("JointPmf::at: index out of range");
    }
    flat += static_cast<size_t>(index[a]) * strides_[a];
  }
  return p_[flat];
}

JointPmf JointPmf::marginal(std::span<const int> keep) const {
  check_axes(*this, keep);
  if (keep.empty()) throw std::invalid_argument("marginal: need at least one axis");
  std::vector<int> out_sizes;
  std::vector<std::string> out_names;
  out_sizes.reserve(keep.size());
  for (int a : keep) {
    out_sizes.push_back(sizes_[static_cast<size_t>(a)]);
    if (!names_.empty()) out_names.push_back(names_[static_cast<size_t>(a)]);
  }
  std::vector<size_t> out_strides(keep.size(), 1);
  for (int a = static_cast<int>(keep.size()) - 2; a >= 0; --a) {
    out_strides[static_cast<size_t>(a)] =
        out_strides[static_cast<size_t>(a) + 1] *
        static_cast<size_t>(out_sizes[static_cast<size_t>(a) + 1]);
  }
  size_t out_cells = out_strides.front() * static_cast<size_t>(out_sizes.front());
  std::vector<double> out(out_cells, 0.0);

  std::vector<int> idx(sizes_.size(), 0);
  for (size_t flat = 0; flat < p_.size(); ++flat) {
    size_t out_flat = 0;
    for (size_t k = 0; k < keep.size(); ++k) {
      out_flat += static_cast<size_t>(idx[static_cast<size_t>(keep[k])]) *
                  out_strides[k];
    }
    out[out_flat] += p_[flat];
    for (int a = static_cast<int>(sizes_.size()) - 1; a >= 0; --a) {
      if (++idx[static_cast<size_t>(a)] < sizes_[static_cast<size_t>(a)]) break;
      idx[static_cast<size_t>(a)] = 0;
    }
  }
  return JointPmf(std::move(out_sizes), std::move(out), std::move(out_names));
}

Pmf JointPmf::marginal_pmf(int axis) const {
  const int keep[] = {axis};
  JointPmf m = marginal(std::span<const int>(keep, 1));
  return Pmf(std::vector<double>(m.table().begin(), m.table().end()));
}

double entropy(const Pmf& p) { return table_entropy(p.probs()); }

double entropy(const JointPmf& joint) { return table_entropy(joint.table()); }

double entropy(const JointPmf& joint, std::span<const int> axes) {
  check_axes(joint, axes);
  if (axes.empty()) throw std::invalid_argument("entropy: empty axis set");
  return table_entropy(joint.marginal(axes).table());
}

double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) {
    throw std::domain_error("binary_entropy: p outside [0,1]");
  }
  return neg_plogp(p) + neg_plogp(1.0 - p);
}

double binary_convolve(double a, double b) {
  if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0) {
    throw std::domain_error("binary_convolve: argument outside [0,1]");
  }
  return a * (1.0 - b) + (1.0 - a) * b;
}

JointPmf joint_from(const Pmf& input, const Channel& ch, std::string in_name,
                    std::string out_name) {
  if (ch.inputs() != input.size()) {
    throw std::invalid_argument("joint_from: input size does not match channel");
  }
  std::vector<double> table(static_cast<size_t>(input.size()) * ch.outputs());
  for (int x = 0; x < input.size(); ++x) {
    for (int y = 0; y < ch.outputs(); ++y) {
      table[static_cast<size_t>(x) * ch.outputs() + y] = input[x] * ch.at(x, y);
    }
  }
  return JointPmf({input.size(), ch.outputs()}, std::move(table),
                  {std::move(in_name), std::move(out_name)});
}

double conditional_entropy(const JointPmf& joint, std::span<const int> target,
                           std::span<const int> given) {
  check_axes(joint, target);
  check_axes(joint, given);
  check_disjoint(target, given);
  if (target.empty()) throw std::invalid_argument("conditional_entropy: empty target");
  std::vector<int> both = concat(target, given);
  double h_both = table_entropy(joint.marginal(both).table());
  if (given.empty()) return h_both;
  double h_given = table_entropy(joint.marginal(given).table());
  return h_both - h_given;
}

double mutual_information(const JointPmf& joint, std::span<const int> a,
                          std::span<const int> b, std::span<const int> cond) {
  check_axes(joint, a);
  check_axes(joint, b);
  check_axes(joint, cond);
  check_disjoint(a, b);
  check_disjoint(a, cond);
  check_disjoint(b, cond);
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("mutual_information: empty axis set");
  }
  // I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)
  std::vector<int> ac = concat(a, cond);
  std::vector<int> bc = concat(b, cond);
  std::vector<int> abc = concat(std::span<const int>(ac), b);
  double h_ac = table_entropy(joint.marginal(ac).table());
  double h_bc = table_entropy(joint.marginal(bc).table());
  double h_abc = table_entropy(joint.marginal(abc).table());
  double h_c = cond.empty() ? 0.0 : table_entropy(joint.marginal(cond).table());
  return h_ac + h_bc - h_abc - h_c;
}

}  // namespace wiretap
