#include "mocot/theory/information.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mocot::theory {

namespace {

double plogq(double p, double ratio) { return p > 0.0 ? p * std::log2(ratio) : 0.0; }

double mutual_information(const std::vector<std::vector<double>>& joint) {
  double total = 0.0;
  for (const auto& row : joint) total += std::accumulate(row.begin(), row.end(), 0.0);
  if (total <= 0.0) return 0.0;
  std::vector<double> px(joint.size(), 0.0);
  std::vector<double> py(joint.front().size(), 0.0);
  for (std::size_t x = 0; x < joint.size(); ++x) {
    for (std::size_t y = 0; y < py.size(); ++y) {
      px[x] += joint[x][y] / total;
      py[y] += joint[x][y] / total;
    }
  }
  double mi = 0.0;
  for (std::size_t x = 0; x < joint.size(); ++x) {
    for (std::size_t y = 0; y < py.size(); ++y) {
      const double p = joint[x][y] / total;
      if (p > 0.0) mi += plogq(p, p / (px[x] * py[y]));
    }
  }
  return std::max(mi, 0.0);
}

std::vector<std::vector<double>> noisy_reads(double eta, std::size_t n) {
  // X, Y independent given S ~ U[n]; each read equals S w.p. 1−η, else uniform.
  const double b = static_cast<double>(n);
  if (eta >= 1.0) return std::vector<std::vector<double>>(n, std::vector<double>(n, 1.0 / (b * b)));
  const double hit = (1.0 - eta) + eta / b;
  const double miss = eta / b;
  std::vector<std::vector<double>> joint(n, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      joint[x][y] = x == y ? (hit * hit + (b - 1.0) * miss * miss) / b : (2.0 * hit * miss + (b - 2.0) * miss * miss) / b;
    }
  }
  return joint;
}

}  // namespace

void validate(const JointTable& table) {
  if (table.p.empty() || table.p.front().empty() || table.p.front().front().empty()) {
    throw std::invalid_argument("joint table is empty");
  }
  double total = 0.0;
  const auto nx = table.p.front().size();
  const auto ny = table.p.front().front().size();
  for (const auto& slice : table.p) {
    if (slice.size() != nx) throw std::invalid_argument("joint table is not rectangular");
    for (const auto& row : slice) {
      if (row.size() != ny) throw std::invalid_argument("joint table is not rectangular");
      for (double v : row) {
        if (!(v >= 0.0)) throw std::invalid_argument("joint table has a negative entry");
        total += v;
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("joint table does not sum to 1");
}

double conditional_mi(const JointTable& table) {
  validate(table);
  double out = 0.0;
  for (const auto& slice : table.p) {
    double pc = 0.0;
    for (const auto& row : slice) pc += std::accumulate(row.begin(), row.end(), 0.0);
    if (pc > 0.0) out += pc * mutual_information(slice);
  }
  return out;
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binary entropy needs p in [0,1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double typed_disent_bound(double epsilon, double delta, std::size_t typed_states) {
  if (!(epsilon >= 0.0) || typed_states < 1) throw std::invalid_argument("bound needs epsilon >= 0 and B_t >= 1");
  return epsilon + binary_entropy(delta) + delta * std::log2(static_cast<double>(typed_states));
}

double mediator_noise_for(double epsilon, std::size_t typed_states) {
  if (epsilon <= 0.0) return 1.0;
  if (epsilon >= mutual_information(noisy_reads(0.0, typed_states))) return 0.0;
  double lo = 0.0;  // MI too high
  double hi = 1.0;  // MI too low
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mutual_information(noisy_reads(mid, typed_states)) > epsilon ? lo : hi) = mid;
  }
  return hi;
}

JointTable mediator_family(double epsilon, double delta, std::size_t typed_states, std::size_t contexts) {
  if (!(delta >= 0.0 && delta <= 1.0) || typed_states < 2 || contexts < 1) {
    throw std::invalid_argument("mediator family needs delta in [0,1], B_t >= 2, contexts >= 1");
  }
  const auto quiet = noisy_reads(mediator_noise_for(epsilon, typed_states), typed_states);
  const double b = static_cast<double>(typed_states);
  JointTable table;
  for (std::size_t c = 0; c < contexts; ++c) {
    std::vector<std::vector<double>> slice(typed_states, std::vector<double>(typed_states, 0.0));
    for (std::size_t x = 0; x < typed_states; ++x) {
      for (std::size_t y = 0; y < typed_states; ++y) {
        slice[x][y] = ((1.0 - delta) * quiet[x][y] + (x == y ? delta / b : 0.0)) / static_cast<double>(contexts);
      }
    }
    table.p.push_back(std::move(slice));
  }
  return table;
}

void validate(const ModuleJoint& joint) {
  if (joint.sizes.size() < 2) throw std::invalid_argument("coupling needs at least two modules");
  std::size_t cells = 1;
  for (auto s : joint.sizes) {
    if (s < 1) throw std::invalid_argument("module with no outcomes");
    cells *= s;
  }
  if (joint.p.size() != cells) throw std::invalid_argument("joint size does not match module sizes");
  double total = 0.0;
  for (double v : joint.p) {
    if (!(v >= 0.0)) throw std::invalid_argument("joint has a negative entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("joint does not sum to 1");
}

double coupling_kl(const ModuleJoint& joint) {
  validate(joint);
  const auto k = joint.sizes.size();
  std::vector<std::size_t> stride(k, 1);
  for (std::size_t i = k - 1; i > 0; --i) stride[i - 1] = stride[i] * joint.sizes[i];
  const auto digit = [&](std::size_t cell, std::size_t module) { return cell / stride[module] % joint.sizes[module]; };

  double worst = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      std::vector<double> pi(joint.sizes[i], 0.0);
      std::vector<double> pj(joint.sizes[j], 0.0);
      std::vector<std::vector<double>> pij(joint.sizes[j], std::vector<double>(joint.sizes[i], 0.0));
      for (std::size_t cell = 0; cell < joint.p.size(); ++cell) {
        pi[digit(cell, i)] += joint.p[cell];
        pj[digit(cell, j)] += joint.p[cell];
        pij[digit(cell, j)][digit(cell, i)] += joint.p[cell];
      }
      for (std::size_t b = 0; b < pj.size(); ++b) {
        if (pj[b] <= 0.0) continue;
        double kl = 0.0;
        for (std::size_t a = 0; a < pi.size(); ++a) {
          const double cond = pij[b][a] / pj[b];
          if (cond <= 0.0) continue;
          if (pi[a] <= 0.0) throw std::domain_error("conditional has mass outside the marginal support");
          kl += plogq(cond, cond / pi[a]);
        }
        worst = std::max(worst, kl);
      }
    }
  }
  return worst;
}

ModuleJoint leakage_pair(std::size_t outcomes, double lambda) {
  if (outcomes < 1 || !(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("leakage needs lambda in [0,1]");
  const double m = static_cast<double>(outcomes);
  ModuleJoint joint{{outcomes, outcomes}, std::vector<double>(outcomes * outcomes, 0.0)};
  for (std::size_t a = 0; a < outcomes; ++a) {
    for (std::size_t b = 0; b < outcomes; ++b) {
      joint.p[a * outcomes + b] = (1.0 - lambda) / (m * m) + (a == b ? lambda / m : 0.0);
    }
  }
  return joint;
}

ValueGap value_decomposition_gap(const std::vector<ModuleValue>& modules, double epsilon) {
  if (modules.empty()) throw std::invalid_argument("value decomposition needs at least one module");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("leakage must lie in [0,1]");
  const auto m = modules.front().p.size();
  double cells = 1.0;
  for (const auto& module : modules) {
    if (module.p.size() != m || module.reward.size() != m) {
      throw std::invalid_argument("modules must share one outcome alphabet");
    }
    cells *= static_cast<double>(m);
  }
  if (cells > 1e6) throw std::invalid_argument("value decomposition enumeration is too large");

  const auto k = modules.size();
  ModuleJoint joint{std::vector<std::size_t>(k, m), std::vector<double>(static_cast<std::size_t>(cells), 0.0)};
  ValueGap out;
  std::vector<std::size_t> outcome(k, 0);
  for (std::size_t cell = 0; cell < joint.p.size(); ++cell) {
    std::size_t rest = cell;
    for (std::size_t i = k; i-- > 0;) {
      outcome[i] = rest % m;
      rest /= m;
    }
    double prob = modules[0].p[outcome[0]];
    double reward = modules[0].reward[outcome[0]];
    for (std::size_t i = 1; i < k; ++i) {
      prob *= (1.0 - epsilon) * modules[i].p[outcome[i]] + (outcome[i] == outcome[i - 1] ? epsilon : 0.0);
      reward += modules[i].reward[outcome[i]];
    }
    joint.p[cell] = prob;
    out.enumerated_value += prob * reward;
  }
  // Same value through the chain marginals q_k = (1−ε)p_k + ε·q_{k−1}; with ε = 0
  // this reproduces the per-module sums bit for bit.
  std::vector<double> q = modules[0].p;
  for (std::size_t i = 0; i < k; ++i) {
    if (i > 0) {
      for (std::size_t z = 0; z < m; ++z) q[z] = (1.0 - epsilon) * modules[i].p[z] + epsilon * q[z];
    }
    for (std::size_t z = 0; z < m; ++z) {
      out.global_value += q[z] * modules[i].reward[z];
      out.module_sum += modules[i].p[z] * modules[i].reward[z];
    }
  }
  if (std::abs(out.global_value - out.enumerated_value) > 1e-12 * std::max(1.0, std::abs(out.global_value))) {
    throw std::logic_error("enumerated and chained values disagree");
  }
  out.gap = std::abs(out.global_value - out.module_sum);
  out.coupling = k >= 2 ? coupling_kl(joint) : 0.0;
  return out;
}

std::vector<ModuleValue> standard_value_family(std::size_t modules, std::size_t outcomes) {
  if (modules < 1 || outcomes < 2 || outcomes % 2 != 0) {
    throw std::invalid_argument("value family needs K >= 1 and an even outcome count >= 2");
  }
  const std::size_t half = outcomes / 2;
  std::vector<ModuleValue> out;
  for (std::size_t k = 0; k < modules; ++k) {
    // even modules favour the lower block, odd modules the upper block
    ModuleValue module{std::vector<double>(outcomes), std::vector<double>(outcomes)};
    for (std::size_t z = 0; z < outcomes; ++z) {
      const bool own = (z < half) == (k % 2 == 0);
      module.p[z] = (own ? 0.8 : 0.2) / static_cast<double>(half);
      module.reward[z] = own ? 1.0 : 0.0;
    }
    out.push_back(std::move(module));
  }
  return out;
}

}  // namespace mocot::theory
