/*
 * Copyright 2026 The aoicast Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "aoicast/sim.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace aoicast {

SimState init_state(const NetworkGraph& g, double initial_aoi) {
  if (initial_aoi < 0.0)
    throw std::invalid_argument("init_state: initial_aoi must be >= 0");
  SimState s;
  s.graph = g;
  s.aoi = Eigen::VectorXd::Zero(g.node_count());
  for (int d : g.destinations()) s.aoi[d] = initial_aoi;
  return s;
}

void set_graph(SimState& s, NetworkGraph g) {
  if (g.node_count() != s.graph.node_count())
    throw std::invalid_argument("set_graph: node count changed");
  s.graph = std::move(g);
}

namespace {

/// Root-to-u node sequence inside the tree; ascending-id tie handling is
/// irrelevant here because tree paths are unique.
std::vector<int> tree_path(const MulticastTree& t, int u) {
  int max_id = t.root;
  for (const Edge& e : t.edges) max_id = std::max({max_id, e.u, e.v});
  std::vector<std::vector<int>> nbrs(max_id + 1);
  for (const Edge& e : t.edges) {
    nbrs[e.u].push_back(e.v);
    nbrs[e.v].push_back(e.u);
  }
  std::vector<int> parent(max_id + 1, -2);
  std::deque<int> queue;
  parent[t.root] = -1;
  queue.push_back(t.root);
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    for (int y : nbrs[x]) {
      if (parent[y] == -2) {
        parent[y] = x;
        queue.push_back(y);
      }
    }
  }
  if (u < 0 || u > max_id || parent[u] == -2)
    throw std::domain_error("tree path: node not reachable from root");
  std::vector<int> path;
  for (int x = u; x != -1; x = parent[x]) path.push_back(x);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

void inject_tree(SimState& s, const MulticastTree& t,
                 const std::vector<int>& selected) {
  if (selected.empty()) return;  // no packets, no charge
  for (int u : selected) {
    if (!std::binary_search(t.covered.begin(), t.covered.end(), u))
      throw std::domain_error("inject_tree: destination " + std::to_string(u) +
                              " not covered by the tree");
  }
  for (const Edge& e : t.edges) {
    if (!s.graph.has_edge(e.u, e.v))
      throw std::domain_error("inject_tree: tree edge absent from graph");
  }
  const double energy = tree_energy(t);
  s.energy_total += energy;
  s.energy_pending += energy;
  s.trees_issued += 1;
  for (int u : selected) {
    Packet p;
    p.id = s.next_packet_id++;
    p.generated_at = s.clock;
    p.dest = u;
    p.route = tree_path(t, u);
    p.position = 0;
    s.in_flight.push_back(std::move(p));
  }
}

void advance_slot(SimState& s, MetricsTrace& trace) {
  s.clock += 1;
  // move packets one hop; drop at vanished links, then collect arrivals
  std::vector<Packet> still_flying;
  std::vector<std::pair<int, int>> arrivals;  // (dest, age) candidates
  std::vector<int> arrival_gen_slot(s.graph.node_count(), -1);
  std::vector<double> best_age(s.graph.node_count(), -1.0);
  for (Packet& p : s.in_flight) {
    const int here = p.route[p.position];
    const int next = p.route[p.position + 1];
    if (!s.graph.has_edge(here, next)) {
      s.packets_dropped += 1;
      continue;
    }
    p.position += 1;
    if (p.position + 1 == static_cast<int>(p.route.size())) {
      const int age = s.clock - p.generated_at;
      if (best_age[p.dest] < 0.0 || age < best_age[p.dest]) {
        best_age[p.dest] = age;
        arrival_gen_slot[p.dest] = p.generated_at;
      }
    } else {
      still_flying.push_back(std::move(p));
    }
  }
  s.in_flight = std::move(still_flying);

  SlotRecord rec;
  rec.slot = s.clock;
  for (int d : s.graph.destinations()) {
    const double pre_update = s.aoi[d] + 1.0;
    if (best_age[d] >= 0.0) {
      rec.arrivals.push_back(
          ArrivalRecord{s.clock, d, arrival_gen_slot[d], pre_update});
      s.aoi[d] = best_age[d];
    } else {
      s.aoi[d] = pre_update;
    }
  }
  rec.aoi = s.aoi;
  rec.energy_charged = s.energy_pending;
  s.energy_pending = 0.0;
  trace.append(std::move(rec));
}

int predicted_arrival(const MulticastTree& t, int u, int gen_slot) {
  if (!std::binary_search(t.covered.begin(), t.covered.end(), u))
    throw std::domain_error("predicted_arrival: destination not covered");
  return gen_slot + tree_hops(t, u);
}

double avg_weighted_aoi(const MetricsTrace& trace, const NetworkGraph& g) {
  if (trace.slot_count() == 0)
    throw std::domain_error("avg_weighted_aoi: empty trace");
  double total = 0.0;
  const std::vector<int> dests = g.destinations();
  for (const SlotRecord& rec : trace.slots()) {
    for (int d : dests) total += g.weight(d) * rec.aoi[d];
  }
  return total / trace.slot_count();
}

double weighted_peak_age(const MetricsTrace& trace, const NetworkGraph& g) {
  double total = 0.0;
  int count = 0;
  for (const SlotRecord& rec : trace.slots()) {
    for (const ArrivalRecord& a : rec.arrivals) {
      total += g.weight(a.dest) * a.pre_update_aoi;
      ++count;
    }
  }
  if (count == 0)
    throw std::domain_error("weighted_peak_age: no arrivals in trace");
  return total / count;
}

double avg_energy(const MetricsTrace& trace) {
  if (trace.slot_count() == 0)
    throw std::domain_error("avg_energy: empty trace");
  double total = 0.0;
  for (const SlotRecord& rec : trace.slots()) total += rec.energy_charged;
  return total / trace.slot_count();
}

}  // namespace aoicast
