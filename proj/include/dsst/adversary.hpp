#pragma once

#include <set>
#include <variant>
#include <vector>

#include "dsst/model.hpp"
#include "dsst/numeric.hpp"
#include "dsst/types.hpp"

namespace dsst {

// Spoofs node i as if the plant had started from fake_x0: the node's window
// is a valid trajectory window, so the local sanity check never fires.
struct ConsistentFakeState {
  Vector fake_x0;  // n-vector
};

// Window-space drift evolved by the companion matrix: the perturbation obeys
// the same recursion as honest windows and stays invisible to the check.
struct CompanionDrift {
  Vector seed;  // n-vector, the initial window perturbation
};

// Additive step: zero before t0, constant offset from t0 on.
struct JumpAttack {
  long t0 = 0;
  double offset = 0.0;
};

using AttackKind = std::variant<ConsistentFakeState, CompanionDrift, JumpAttack>;

struct NodeAttack {
  int node = 0;  // 0-based
  AttackKind kind;
};

// Fixed attack support over the whole run.
struct AttackPlan {
  std::vector<NodeAttack> attacks;

  std::vector<int> support() const {
    std::vector<int> nodes;
    nodes.reserve(attacks.size());
    for (const NodeAttack& a : attacks) nodes.push_back(a.node);
    return nodes;
  }
};

inline void validate_attack_plan(const AttackPlan& plan, const LtiSystem& sys, int s) {
  if (static_cast<int>(plan.attacks.size()) > s)
    throw Error("attack plan: support larger than the sparsity budget s");
  std::set<int> seen;
  for (const NodeAttack& a : plan.attacks) {
    if (a.node < 0 || a.node >= sys.p()) throw Error("attack plan: node out of range");
    if (!seen.insert(a.node).second) throw Error("attack plan: duplicate node");
    if (const auto* fake = std::get_if<ConsistentFakeState>(&a.kind)) {
      if (fake->fake_x0.size() != sys.n())
        throw DimensionError("attack plan: fake state dimension mismatch");
    } else if (const auto* drift = std::get_if<CompanionDrift>(&a.kind)) {
      if (drift->seed.size() != sys.n())
        throw DimensionError("attack plan: drift seed dimension mismatch");
    }
  }
}

// Additive measurement terms e[t] (one scalar per node, zero off-support).
// Deterministic in (plan, t); x_true is the plant state at time t.
inline Vector generate_attack(const AttackPlan& plan, const LtiSystem& sys, const Vector& x_true,
                              long t) {
  if (x_true.size() != sys.n()) throw DimensionError("generate_attack: state dimension mismatch");
  Vector e = Vector::Zero(sys.p());
  for (const NodeAttack& a : plan.attacks) {
    if (a.node < 0 || a.node >= sys.p()) throw Error("generate_attack: node out of range");
    if (const auto* fake = std::get_if<ConsistentFakeState>(&a.kind)) {
      const Vector fake_x = matrix_power(sys.A(), t) * fake->fake_x0;
      e(a.node) = sys.sensor_row(a.node).dot(fake_x - x_true);
    } else if (const auto* drift = std::get_if<CompanionDrift>(&a.kind)) {
      // Scalar stream whose length-n windows follow A_hat exactly: the first
      // n samples replay the seed, later ones are the last entry of the
      // evolved window.
      const int n = sys.n();
      if (t < n) {
        e(a.node) = drift->seed(t);
      } else {
        const Vector window = matrix_power(sys.A_hat(), t - n + 1) * drift->seed;
        e(a.node) = window(n - 1);
      }
    } else if (const auto* jump = std::get_if<JumpAttack>(&a.kind)) {
      e(a.node) = t >= jump->t0 ? jump->offset : 0.0;
    }
  }
  return e;
}

struct SanityResult {
  bool pass = false;
  double residual = 0.0;
};

// Per-node trajectory-consistency test: ||Z[t+1] - A_hat Z[t]||_2 <= eps.
// Honest windows satisfy the companion recursion, so a failure certifies an
// attack; the converse does not hold.
inline SanityResult local_sanity_check(const Vector& window_prev, const Vector& window_next,
                                       const Matrix& a_hat, double eps) {
  if (window_prev.size() != a_hat.rows() || window_next.size() != a_hat.rows())
    throw DimensionError("local_sanity_check: window length must equal the state dimension");
  const double residual = (window_next - a_hat * window_prev).norm();
  return SanityResult{residual <= eps, residual};
}

}  // namespace dsst
