#ifndef STRAINFLOW_TRACKING_HPP
#define STRAINFLOW_TRACKING_HPP

#include <string>
#include <vector>

#include "strainflow/topo.hpp"

namespace strainflow {

struct overlap_link {
  int from_region = 0;  // region id in frame t
  int to_region = 0;    // region id in frame t+1
  int weight = 0;       // shared sample count, >= 1
  bool part_of_merge = false;
  bool part_of_split = false;
};

struct tracking_graph {
  std::vector<region> regions;        // indexed by region id
  std::vector<overlap_link> links;    // sorted by (from, to)
  std::vector<std::uint8_t> birth;    // per region: no incoming link
  std::vector<std::uint8_t> death;    // per region: no outgoing link
  int frame_count = 0;

  int merge_event_count() const;  // regions with >= 2 incoming links
  int split_event_count() const;  // regions with >= 2 outgoing links
};

// Maximal run of regions joined by pure continuation links (links that are
// part of neither a merge nor a split).
struct node_chain {
  std::vector<int> region_ids;  // consecutive frames
  int first_frame = 0;
  int last_frame = 0;
  double peak_max_evm = 0.0;
  int peak_area = 0;
};

// Shared sample count on the reference grid lattice.
int overlap(const region& a, const region& b);

// regions_by_frame[t] holds frame t's regions; frames must be consecutive.
tracking_graph build_tracking_graph(
    const std::vector<std::vector<region>>& regions_by_frame);

std::vector<node_chain> node_chains(const tracking_graph& graph);

std::string tracking_graph_json(const tracking_graph& graph);
tracking_graph parse_tracking_graph_json(const std::string& text);

}  // namespace strainflow

#endif
