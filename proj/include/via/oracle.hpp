#ifndef VIA_ORACLE_HPP
#define VIA_ORACLE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "via/policies.hpp"
#include "via/types.hpp"

// Brute-force validator: each joint chain is written down as an explicit
// (truncated) transition matrix and solved numerically. Nothing here calls
// into the closed forms.

namespace via::oracle {

using Label = std::vector<int>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct FiniteChain {
  std::vector<Label> states;
  SparseRowMatrix matrix;
  std::string truncation_note;

  std::size_t size() const { return states.size(); }

  std::size_t index(const Label& label) const {
    const auto it = lookup_.find(label);
    if (it == lookup_.end()) throw InvalidParameter("state not in chain");
    return it->second;
  }

  bool contains(const Label& label) const { return lookup_.count(label) != 0; }

  /// Largest deviation of a row sum from 1; negative entries count as +inf.
  double max_row_error() const {
    double worst = 0.0;
    for (int row = 0; row < matrix.outerSize(); ++row) {
      double sum = 0.0;
      for (SparseRowMatrix::InnerIterator it(matrix, row); it; ++it) {
        if (it.value() < 0.0) return std::numeric_limits<double>::infinity();
        sum += it.value();
      }
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
  }

  bool row_stochastic(double tol = 1e-12) const { return max_row_error() <= tol; }

  friend class ChainBuilder;

 private:
  std::map<Label, std::size_t> lookup_;
};

/// Collects labeled states and weighted edges; parallel edges add up.
class ChainBuilder {
 public:
  std::size_t state(const Label& label) {
    const auto [it, inserted] = chain_.lookup_.emplace(label, chain_.states.size());
    if (inserted) chain_.states.push_back(label);
    return it->second;
  }

  void edge(const Label& from, const Label& to, double prob) {
    const std::size_t i = state(from);
    const std::size_t j = state(to);
    if (prob != 0.0) triplets_.emplace_back(static_cast<int>(i), static_cast<int>(j), prob);
  }

  FiniteChain build(std::string note = {}) && {
    const auto n = static_cast<int>(chain_.states.size());
    chain_.matrix.resize(n, n);
    chain_.matrix.setFromTriplets(triplets_.begin(), triplets_.end());
    chain_.matrix.makeCompressed();
    chain_.truncation_note = std::move(note);
    return std::move(chain_);
  }

 private:
  FiniteChain chain_;
  std::vector<Eigen::Triplet<double>> triplets_;
};

namespace detail {

struct SlotOutcome {
  double prob;
  int x;
  int x_hat;
  bool changed;
  bool sampled;
  bool delivered;
};

/// Every outcome of one slot from (x, x_hat): source move, sampling
/// decision on the new state, channel success, receiver update.
inline std::vector<SlotOutcome> slot_outcomes(const PolicySpec& policy, const SourceParams& src,
                                              const ChannelParams& ch, int x, int x_hat) {
  std::vector<SlotOutcome> out;
  const double move = (x == 0) ? src.p : src.q;
  for (int flip = 0; flip <= 1; ++flip) {
    const double p_move = flip ? move : 1.0 - move;
    if (p_move == 0.0) continue;
    const int nx = flip ? 1 - x : x;
    double p_sample = 0.0;
    switch (policy.kind()) {
      case PolicyKind::RandomizedStationary: p_sample = *policy.p_sample(); break;
      case PolicyKind::ChangeAware: p_sample = flip ? 1.0 : 0.0; break;
      case PolicyKind::SemanticsAware: p_sample = (nx != x_hat) ? 1.0 : 0.0; break;
    }
    if (1.0 - p_sample > 0.0) {
      out.push_back({p_move * (1.0 - p_sample), nx, x_hat, flip == 1, false, false});
    }
    if (p_sample > 0.0) {
      if (ch.p_s > 0.0) out.push_back({p_move * p_sample * ch.p_s, nx, nx, flip == 1, true, true});
      if (ch.p_s < 1.0) {
        out.push_back({p_move * p_sample * (1.0 - ch.p_s), nx, x_hat, flip == 1, true, false});
      }
    }
  }
  return out;
}

inline std::string clamp_note(std::size_t levels, const char* what) {
  return "levels above " + std::to_string(levels) + " of " + what +
         " are folded into level " + std::to_string(levels);
}

}  // namespace detail

/// (X, VIA) chain under randomized stationary sampling, edge by edge.
inline FiniteChain build_via_chain(const SourceParams& src, const ChannelParams& ch,
                                   double p_sample, std::size_t levels) {
  if (levels < 2) throw InvalidParameter("truncation must be at least 2");
  const double rho = p_sample * ch.p_s;
  const double r = 1.0 - rho;
  const int top = static_cast<int>(levels);
  ChainBuilder b;
  for (int v = 0; v <= top; ++v) {
    const int up = std::min(v + 1, top);
    for (int x = 0; x <= 1; ++x) {
      const double stay = (x == 0) ? 1.0 - src.p : 1.0 - src.q;
      const double move = (x == 0) ? src.p : src.q;
      b.edge({x, v}, {x, 0}, stay * rho);
      b.edge({x, v}, {x, v}, stay * r);
      b.edge({x, v}, {1 - x, 0}, move * rho);
      b.edge({x, v}, {1 - x, up}, move * r);
    }
  }
  return std::move(b).build(detail::clamp_note(levels, "VIA"));
}

/// (X, X_hat, VIA) chain for any policy, generated from the slot rules.
inline FiniteChain build_joint_via_chain(const PolicySpec& policy, const SourceParams& src,
                                         const ChannelParams& ch, std::size_t levels) {
  if (levels < 2) throw InvalidParameter("truncation must be at least 2");
  const int top = static_cast<int>(levels);
  ChainBuilder b;
  for (int v = 0; v <= top; ++v) {
    for (int x = 0; x <= 1; ++x) {
      for (int xh = 0; xh <= 1; ++xh) {
        for (const auto& o : detail::slot_outcomes(policy, src, ch, x, xh)) {
          const int nv = o.delivered ? 0 : (o.changed ? std::min(v + 1, top) : v);
          b.edge({x, xh, v}, {o.x, o.x_hat, nv}, o.prob);
        }
      }
    }
  }
  return std::move(b).build(detail::clamp_note(levels, "VIA"));
}

/// Four-state (X, X_hat, AoIV) chain; the other four triples are
/// unreachable for a two-state source.
inline FiniteChain build_aoiv_chain(const PolicySpec& policy, const SourceParams& src,
                                    const ChannelParams& ch) {
  const double p = src.p;
  const double q = src.q;
  ChainBuilder b;
  for (const Label& s : {Label{0, 0, 0}, Label{0, 1, 1}, Label{1, 0, 1}, Label{1, 1, 0}}) b.state(s);

  if (policy.kind() == PolicyKind::ChangeAware) {
    const double ps = ch.p_s;
    b.edge({0, 0, 0}, {0, 0, 0}, 1 - p);
    b.edge({0, 0, 0}, {1, 1, 0}, p * ps);
    b.edge({0, 0, 0}, {1, 0, 1}, p * (1 - ps));
    b.edge({0, 1, 1}, {0, 1, 1}, 1 - p);
    b.edge({0, 1, 1}, {1, 1, 0}, p);
    b.edge({1, 0, 1}, {1, 0, 1}, 1 - q);
    b.edge({1, 0, 1}, {0, 0, 0}, q);
    b.edge({1, 1, 0}, {1, 1, 0}, 1 - q);
    b.edge({1, 1, 0}, {0, 0, 0}, q * ps);
    b.edge({1, 1, 0}, {0, 1, 1}, q * (1 - ps));
    return std::move(b).build();
  }

  // Randomized stationary delivers with p_sample * p_s in every slot;
  // semantics-aware transmits whenever it matters, so delivery is p_s.
  const double rho = policy.kind() == PolicyKind::RandomizedStationary
                         ? *policy.p_sample() * ch.p_s
                         : ch.p_s;
  b.edge({0, 0, 0}, {0, 0, 0}, 1 - p);
  b.edge({0, 0, 0}, {1, 0, 1}, p * (1 - rho));
  b.edge({0, 0, 0}, {1, 1, 0}, p * rho);
  b.edge({0, 1, 1}, {0, 1, 1}, (1 - p) * (1 - rho));
  b.edge({0, 1, 1}, {0, 0, 0}, (1 - p) * rho);
  b.edge({0, 1, 1}, {1, 1, 0}, p);
  b.edge({1, 0, 1}, {0, 0, 0}, q);
  b.edge({1, 0, 1}, {1, 0, 1}, (1 - q) * (1 - rho));
  b.edge({1, 0, 1}, {1, 1, 0}, (1 - q) * rho);
  b.edge({1, 1, 0}, {1, 1, 0}, 1 - q);
  b.edge({1, 1, 0}, {0, 1, 1}, q * (1 - rho));
  b.edge({1, 1, 0}, {0, 0, 0}, q * rho);
  return std::move(b).build();
}

/// (X, X_hat) chain under randomized stationary sampling.
inline FiniteChain build_recon_chain(const SourceParams& src, const ChannelParams& ch,
                                     double p_sample) {
  const double p = src.p;
  const double q = src.q;
  const double rho = p_sample * ch.p_s;
  ChainBuilder b;
  for (const Label& s : {Label{0, 0}, Label{0, 1}, Label{1, 0}, Label{1, 1}}) b.state(s);
  b.edge({0, 0}, {0, 0}, 1 - p);
  b.edge({0, 0}, {1, 1}, p * rho);
  b.edge({0, 0}, {1, 0}, p * (1 - rho));
  b.edge({0, 1}, {0, 1}, (1 - p) * (1 - rho));
  b.edge({0, 1}, {0, 0}, (1 - p) * rho);
  b.edge({0, 1}, {1, 1}, p);
  b.edge({1, 0}, {1, 0}, (1 - q) * (1 - rho));
  b.edge({1, 0}, {0, 0}, q);
  b.edge({1, 0}, {1, 1}, (1 - q) * rho);
  b.edge({1, 1}, {1, 1}, 1 - q);
  b.edge({1, 1}, {0, 1}, q * (1 - rho));
  b.edge({1, 1}, {0, 0}, q * rho);
  return std::move(b).build();
}

/// (X, X_hat) chain for any policy, generated from the slot rules.
inline FiniteChain build_recon_chain(const PolicySpec& policy, const SourceParams& src,
                                     const ChannelParams& ch) {
  ChainBuilder b;
  for (int x = 0; x <= 1; ++x) {
    for (int xh = 0; xh <= 1; ++xh) {
      b.state({x, xh});
      for (const auto& o : detail::slot_outcomes(policy, src, ch, x, xh)) {
        b.edge({x, xh}, {o.x, o.x_hat}, o.prob);
      }
    }
  }
  return std::move(b).build();
}

/// (X, X_hat, AoII) chain. Synced states carry AoII = 0; erroneous states
/// carry AoII in 1..levels.
inline FiniteChain build_aoii_chain(const PolicySpec& policy, const SourceParams& src,
                                    const ChannelParams& ch, std::size_t levels) {
  if (levels < 2) throw InvalidParameter("truncation must be at least 2");
  const int top = static_cast<int>(levels);
  ChainBuilder b;
  auto expand = [&](int x, int xh, int age) {
    for (const auto& o : detail::slot_outcomes(policy, src, ch, x, xh)) {
      const int next_age = (o.x != o.x_hat) ? std::min(age + 1, top) : 0;
      b.edge({x, xh, age}, {o.x, o.x_hat, next_age}, o.prob);
    }
  };
  expand(0, 0, 0);
  expand(1, 1, 0);
  for (int age = 1; age <= top; ++age) {
    expand(0, 1, age);
    expand(1, 0, age);
  }
  return std::move(b).build(detail::clamp_note(levels, "AoII"));
}

struct StationaryOptions {
  double residual_tolerance = 1e-13;
  std::size_t max_iterations = 1'000'000;
  std::size_t dense_limit = 64;
};

/// Number of closed communicating classes of the transition graph.
inline std::size_t closed_class_count(const FiniteChain& chain) {
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;
  const std::size_t n = chain.size();
  Graph g(n);
  for (int row = 0; row < chain.matrix.outerSize(); ++row) {
    for (SparseRowMatrix::InnerIterator it(chain.matrix, row); it; ++it) {
      if (it.value() > 0.0) boost::add_edge(static_cast<std::size_t>(row), static_cast<std::size_t>(it.col()), g);
    }
  }
  std::vector<int> component(n);
  const int count = boost::strong_components(
      g, boost::make_iterator_property_map(component.begin(), boost::get(boost::vertex_index, g)));
  std::vector<bool> closed(static_cast<std::size_t>(count), true);
  for (int row = 0; row < chain.matrix.outerSize(); ++row) {
    for (SparseRowMatrix::InnerIterator it(chain.matrix, row); it; ++it) {
      if (it.value() > 0.0 && component[static_cast<std::size_t>(row)] != component[static_cast<std::size_t>(it.col())]) {
        closed[static_cast<std::size_t>(component[static_cast<std::size_t>(row)])] = false;
      }
    }
  }
  return static_cast<std::size_t>(std::count(closed.begin(), closed.end(), true));
}

inline double stationary_residual(const FiniteChain& chain, const Eigen::VectorXd& pi) {
  const Eigen::VectorXd next = chain.matrix.transpose() * pi;
  return (next - pi).lpNorm<Eigen::Infinity>();
}

/// Stationary vector of a chain with exactly one closed class. Small chains
/// are solved directly; larger (truncated) chains by power iteration on
/// the lazy chain (P + I) / 2, which shares the stationary law and is
/// aperiodic.
namespace detail {

/// Solves (P^T - I) pi = 0 with component `pin` fixed at 1, then
/// normalizes. Pinning keeps the system as sparse as the chain; P - I is
/// factored (reset transitions make columns of P dense, which the column
/// ordering handles) and the transposed solve applied. The pinned state
/// should carry non-negligible mass or the solve is badly conditioned.
inline bool sparse_solve(const FiniteChain& chain, Eigen::Index pin, Eigen::VectorXd& pi) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  const Eigen::Index m = n - 1;
  auto reduced = [pin](Eigen::Index i) { return i < pin ? i : i - 1; };
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(chain.matrix.nonZeros() + n));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (int row = 0; row < chain.matrix.outerSize(); ++row) {
    for (SparseRowMatrix::InnerIterator it(chain.matrix, row); it; ++it) {
      if (it.col() == pin) continue;
      if (row == pin) rhs(reduced(it.col())) -= it.value();
      else entries.emplace_back(reduced(row), reduced(it.col()), it.value());
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) entries.emplace_back(i, i, -1.0);
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) return false;
  const Eigen::VectorXd x = lu.transpose().solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) return false;
  pi.resize(n);
  pi.head(pin) = x.head(pin);
  pi(pin) = 1.0;
  pi.tail(n - pin - 1) = x.tail(m - pin);
  const double total = pi.sum();
  if (!(total > 0.0)) return false;
  pi /= total;
  return true;
}

inline bool sparse_solve(const FiniteChain& chain, Eigen::VectorXd& pi) {
  if (!sparse_solve(chain, 0, pi)) return false;
  Eigen::Index heaviest = 0;
  pi.maxCoeff(&heaviest);
  return heaviest == 0 || sparse_solve(chain, heaviest, pi);
}

}  // namespace detail

inline std::vector<double> stationary(const FiniteChain& chain, const StationaryOptions& opts = {}) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  if (n == 0) throw InvalidParameter("empty chain");
  if (!chain.row_stochastic()) throw InvalidParameter("transition matrix is not row-stochastic");
  if (closed_class_count(chain) != 1) {
    throw ReducibleChain("chain has more than one closed class; stationary law is not unique");
  }

  Eigen::VectorXd pi;
  if (static_cast<std::size_t>(n) <= opts.dense_limit) {
    Eigen::MatrixXd a = Eigen::MatrixXd(chain.matrix).transpose();
    a -= Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    pi = a.fullPivLu().solve(rhs);
  } else if (!detail::sparse_solve(chain, pi)) {
    // Power iteration stops on the step size, which for slowly mixing
    // chains overstates accuracy; the direct solve is preferred.
    const SparseRowMatrix transposed = chain.matrix.transpose();
    pi = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    bool converged = false;
    for (std::size_t iter = 1; iter <= opts.max_iterations; ++iter) {
      Eigen::VectorXd next = transposed * pi;
      if (iter % 32 == 0) {
        const double residual = (next - pi).lpNorm<Eigen::Infinity>();
        if (residual < opts.residual_tolerance) {
          pi = next / next.sum();
          converged = true;
          break;
        }
      }
      pi = 0.5 * (pi + next);
    }
    if (!converged) throw NonConvergence("power iteration hit its iteration cap");
  }
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  if (stationary_residual(chain, pi) >= 1e-12) {
    throw NonConvergence("stationary residual above 1e-12");
  }
  return {pi.data(), pi.data() + pi.size()};
}

/// Sum of pi over states whose label satisfies `pred`.
template <typename Pred>
double mass_where(const FiniteChain& chain, const std::vector<double>& pi, Pred&& pred) {
  double total = 0.0;
  for (std::size_t s = 0; s < chain.size(); ++s) {
    if (pred(chain.states[s])) total += pi[s];
  }
  return total;
}

/// E[label[field]] under pi.
inline double expectation(const FiniteChain& chain, const std::vector<double>& pi,
                          std::size_t field) {
  double total = 0.0;
  for (std::size_t s = 0; s < chain.size(); ++s) {
    total += pi[s] * static_cast<double>(chain.states[s].at(field));
  }
  return total;
}

/// Law of the label field `field`, indexed by its value 0..max.
inline std::vector<double> marginal(const FiniteChain& chain, const std::vector<double>& pi,
                                    std::size_t field) {
  std::vector<double> out;
  for (std::size_t s = 0; s < chain.size(); ++s) {
    const auto v = static_cast<std::size_t>(chain.states[s].at(field));
    if (out.size() <= v) out.resize(v + 1, 0.0);
    out[v] += pi[s];
  }
  return out;
}

/// Long-run sampling rate, from the stationary (X, X_hat) law.
inline double sampling_rate(const PolicySpec& policy, const SourceParams& src,
                            const ChannelParams& ch) {
  const FiniteChain chain = build_recon_chain(policy, src, ch);
  const std::vector<double> pi = stationary(chain);
  double rate = 0.0;
  for (std::size_t s = 0; s < chain.size(); ++s) {
    const Label& l = chain.states[s];
    for (const auto& o : detail::slot_outcomes(policy, src, ch, l[0], l[1])) {
      if (o.sampled) rate += pi[s] * o.prob;
    }
  }
  return rate;
}

}  // namespace via::oracle

#endif  // VIA_ORACLE_HPP
