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

#pragma once

#include <Eigen/Core>
#include <vector>

#include "aoicast/graph.hpp"

namespace aoicast {

/// A time-stamped update in flight along a frozen route (node sequence from
/// the tree root to the destination).  position indexes the node currently
/// holding the packet.
struct Packet {
  int id = -1;
  int generated_at = 0;
  int dest = -1;
  std::vector<int> route;
  int position = 0;
};

/// One delivered update: the destination's age-of-information is reset at
/// `slot` by a packet generated at `generated_at`.  pre_update_aoi is the
/// value the destination's age had grown to just before the reset.
struct ArrivalRecord {
  int slot = 0;
  int dest = -1;
  int generated_at = 0;
  double pre_update_aoi = 0.0;
};

/// Per-slot measurement: post-update ages, energy charged during the slot,
/// and the updates delivered in it.
struct SlotRecord {
  int slot = 0;
  Eigen::VectorXd aoi;  // per-node; zero for non-destinations
  double energy_charged = 0.0;
  std::vector<ArrivalRecord> arrivals;
};

class MetricsTrace {
 public:
  void append(SlotRecord rec) { slots_.push_back(std::move(rec)); }
  const std::vector<SlotRecord>& slots() const { return slots_; }
  int slot_count() const { return static_cast<int>(slots_.size()); }

 private:
  std::vector<SlotRecord> slots_;
};

/// Slotted simulator state.  Per slot the driver may inject one multicast
/// tree (generating one packet per selected destination, all charged the full
/// tree energy once), then advances the clock: every in-flight packet crosses
/// one hop if its next edge still exists, otherwise it is dropped.  Packets
/// reaching their destination reset that node's age to the packet age; among
/// simultaneous arrivals the smallest age wins; all other destinations age
/// by one.
struct SimState {
  int clock = 0;
  NetworkGraph graph;
  std::vector<Packet> in_flight;
  Eigen::VectorXd aoi;  // per-node; non-destinations stay 0
  double energy_total = 0.0;
  double energy_pending = 0.0;  // charged since the last advance
  int trees_issued = 0;
  int packets_dropped = 0;
  int next_packet_id = 0;
};

/// Fresh state at clock 0 with every destination's age set to initial_aoi.
SimState init_state(const NetworkGraph& g, double initial_aoi);

/// Replaces the working topology (slot-boundary resampling).  In-flight
/// packets keep their frozen routes; missing edges surface as drops on the
/// next advance.
void set_graph(SimState& s, NetworkGraph g);

/// Issues one packet per selected destination along the tree's root-to-leaf
/// paths and charges tree_energy(t) once.  selected must be covered by t.
void inject_tree(SimState& s, const MulticastTree& t,
                 const std::vector<int>& selected);

/// Advances the clock one slot, moving packets, handling drops and arrivals,
/// and appending one SlotRecord to the trace.
void advance_slot(SimState& s, MetricsTrace& trace);

/// Slot at which destination u receives the packet generated at gen_slot
/// through tree t on a static topology: gen_slot + tree_hops(t, u).
int predicted_arrival(const MulticastTree& t, int u, int gen_slot);

/// Mean over recorded slots of sum_u weight_u * age_u.
double avg_weighted_aoi(const MetricsTrace& trace, const NetworkGraph& g);

/// Mean over delivered updates of weight_dest * pre-update age.
/// Throws std::domain_error when the trace holds no arrivals.
double weighted_peak_age(const MetricsTrace& trace, const NetworkGraph& g);

/// Total charged energy divided by the number of recorded slots.
double avg_energy(const MetricsTrace& trace);

}  // namespace aoicast
