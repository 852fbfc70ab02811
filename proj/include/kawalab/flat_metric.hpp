#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <vector>

#include "kawalab/configuration.hpp"
#include "kawalab/errors.hpp"
#include "kawalab/geometry.hpp"
#include "kawalab/model.hpp"

namespace kawalab {

// Distance between configurations measured through their psi-weighted point
// measures:
//     sup_g  sum_{x in g1} g(x) psi(x) - sum_{x in g2} g(x) psi(x)
// over g with |g| <= 1 and Lipschitz constant <= 1 on the support points;
// McShane extension makes the finite restriction lossless.
//
// Solved exactly through the transportation dual: move the positive part of
// the signed weight vector to the negative part at Euclidean cost, or pay 1
// per unit to create/destroy mass.  Successive shortest paths with node
// potentials; instance size is capped because the metric is only used on
// desk-scale configurations.

namespace flat_detail {

struct Instance {
  std::vector<std::vector<double>> coords;  // support points, aggregated
  std::vector<double> net;                  // psi-weight of g1 minus g2
};

template <std::size_t D>
Instance build_instance(const Configuration<D>& g1,
                        const Configuration<D>& g2) {
  std::map<std::array<double, D>, double> acc;
  for (const auto& p : g1.points()) acc[p] += psi<D>(p);
  for (const auto& p : g2.points()) acc[p] -= psi<D>(p);
  Instance inst;
  for (const auto& [p, w] : acc) {
    inst.coords.push_back(std::vector<double>(p.begin(), p.end()));
    inst.net.push_back(w);
  }
  require(inst.coords.size() <= 400,
          "bl_metric: instance exceeds the 400 support-point cap");
  return inst;
}

inline double euclid(const std::vector<double>& a,
                     const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Min-cost transportation on the bipartite graph
//   sources: positive-net points, plus a creation node,
//   sinks:   negative-net points, plus a destruction node,
// uncapacitated arcs source->sink; creation->sink and source->destruction
// cost 1, creation->destruction cost 0, point-to-point cost = distance.
inline double solve_transport(const Instance& inst) {
  std::vector<std::size_t> src_idx, snk_idx;
  std::vector<double> supply, demand;
  for (std::size_t i = 0; i < inst.net.size(); ++i) {
    if (inst.net[i] > 0.0) {
      src_idx.push_back(i);
      supply.push_back(inst.net[i]);
    } else if (inst.net[i] < 0.0) {
      snk_idx.push_back(i);
      demand.push_back(-inst.net[i]);
    }
  }
  const std::size_t ns = src_idx.size();
  const std::size_t nt = snk_idx.size();
  double total_supply = 0.0, total_demand = 0.0;
  for (double s : supply) total_supply += s;
  for (double d : demand) total_demand += d;
  supply.push_back(total_demand);  // creation node
  demand.push_back(total_supply);  // destruction node
  const std::size_t NS = ns + 1, NT = nt + 1;

  auto arc_cost = [&](std::size_t u, std::size_t v) -> double {
    if (u == ns && v == nt) return 0.0;
    if (u == ns || v == nt) return 1.0;
    return euclid(inst.coords[src_idx[u]], inst.coords[snk_idx[v]]);
  };

  // Node indexing: sources 0..NS-1, sinks NS..NS+NT-1.
  const std::size_t N = NS + NT;
  std::vector<std::vector<double>> flow(NS, std::vector<double>(NT, 0.0));
  std::vector<double> pi(N, 0.0);
  const double inf = std::numeric_limits<double>::infinity();

  const double eps = 1e-13 * std::max(1.0, total_supply + total_demand);
  std::size_t guard = 64 * N * N + 1024;
  for (;;) {
    double active = 0.0;
    for (double s : supply) active = std::max(active, s);
    if (active <= eps) break;
    check_internal(guard-- > 0, "bl_metric: flow solver did not converge");
    // Dijkstra with reduced costs rc(u->v) = c + pi(u) - pi(v) >= 0.
    std::vector<double> dist(N, inf);
    std::vector<int> prev(N, -1);
    std::vector<bool> done(N, false);
    for (std::size_t u = 0; u < NS; ++u)
      if (supply[u] > eps) dist[u] = 0.0;
    for (;;) {
      int x = -1;
      double best = inf;
      for (std::size_t i = 0; i < N; ++i)
        if (!done[i] && dist[i] < best) best = dist[i], x = static_cast<int>(i);
      if (x < 0) break;
      done[x] = true;
      if (static_cast<std::size_t>(x) < NS) {
        const std::size_t u = x;
        for (std::size_t v = 0; v < NT; ++v) {
          if (done[NS + v]) continue;
          const double rc = arc_cost(u, v) + pi[u] - pi[NS + v];
          if (dist[u] + rc < dist[NS + v] - 1e-18) {
            dist[NS + v] = dist[u] + rc;
            prev[NS + v] = x;
          }
        }
      } else {
        const std::size_t v = x - NS;
        for (std::size_t u = 0; u < NS; ++u) {
          if (done[u]) continue;
          if (flow[u][v] > 1e-15) {
            const double rc = -arc_cost(u, v) + pi[NS + v] - pi[u];
            if (dist[NS + v] + rc < dist[u] - 1e-18) {
              dist[u] = dist[NS + v] + rc;
              prev[u] = x;
            }
          }
        }
      }
    }
    int target = -1;
    double bestd = inf;
    for (std::size_t v = 0; v < NT; ++v)
      if (demand[v] > eps && dist[NS + v] < bestd)
        bestd = dist[NS + v], target = static_cast<int>(NS + v);
    check_internal(target >= 0, "bl_metric: no augmenting path");

    // Bottleneck along the path: path start's supply, target's demand, and
    // any backward arcs in between.
    double push = demand[target - NS];
    std::size_t hops = 0;
    for (int x = target; prev[x] >= 0; x = prev[x]) {
      check_internal(++hops <= N + 2, "bl_metric: malformed augmenting path");
      const int p = prev[x];
      if (static_cast<std::size_t>(x) >= NS)
        ;  // forward arc p(u) -> x(v): uncapacitated
      else
        push = std::min(push, flow[x][p - NS]);  // backward arc
      if (prev[p] < 0) push = std::min(push, supply[p]);
    }
    check_internal(std::isfinite(push) && push > 0.0,
                   "bl_metric: degenerate augmentation");
    for (int x = target; prev[x] >= 0; x = prev[x]) {
      const int p = prev[x];
      if (static_cast<std::size_t>(x) >= NS)
        flow[p][x - NS] += push;
      else
        flow[x][p - NS] -= push;
      if (prev[p] < 0) supply[p] -= push;
    }
    demand[target - NS] -= push;

    const double dcap = dist[target];
    for (std::size_t i = 0; i < N; ++i)
      pi[i] += std::min(dist[i], dcap);
  }

  double cost = 0.0;
  for (std::size_t u = 0; u < NS; ++u)
    for (std::size_t v = 0; v < NT; ++v)
      if (flow[u][v] > 0.0) cost += flow[u][v] * arc_cost(u, v);
  return cost;
}

}  // namespace flat_detail

template <std::size_t D>
double bl_metric(const Configuration<D>& g1, const Configuration<D>& g2) {
  const auto inst = flat_detail::build_instance(g1, g2);
  bool any = false;
  for (double w : inst.net) any = any || w != 0.0;
  if (!any) return 0.0;
  return flat_detail::solve_transport(inst);
}

}  // namespace kawalab
