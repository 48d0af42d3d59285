#include "strainflow/tracking.hpp"

#include <algorithm>
#include <unordered_map>

#include <json.hpp>

namespace strainflow {

int overlap(const region& a, const region& b) {
  if (a.xmax < b.xmin || b.xmax < a.xmin || a.ymax < b.ymin ||
      b.ymax < a.ymin)
    return 0;
  // both sample lists are raster-sorted
  int count = 0;
  std::size_t i = 0, j = 0;
  while (i < a.samples.size() && j < b.samples.size()) {
    const coord& p = a.samples[i];
    const coord& q = b.samples[j];
    if (p == q) {
      ++count;
      ++i;
      ++j;
    } else if (p < q) {
      ++i;
    } else {
      ++j;
    }
  }
  return count;
}

int tracking_graph::merge_event_count() const {
  std::vector<int> indeg(regions.size(), 0);
  for (const overlap_link& l : links) ++indeg[l.to_region];
  int n = 0;
  for (int d : indeg)
    if (d >= 2) ++n;
  return n;
}

int tracking_graph::split_event_count() const {
  std::vector<int> outdeg(regions.size(), 0);
  for (const overlap_link& l : links) ++outdeg[l.from_region];
  int n = 0;
  for (int d : outdeg)
    if (d >= 2) ++n;
  return n;
}

tracking_graph build_tracking_graph(
    const std::vector<std::vector<region>>& regions_by_frame) {
  tracking_graph g;
  g.frame_count = static_cast<int>(regions_by_frame.size());

  int total = 0;
  for (int t = 0; t < g.frame_count; ++t) {
    for (const region& r : regions_by_frame[t]) {
      if (r.frame_index != t)
        throw error("tracking: region " + std::to_string(r.id) +
                    " has frame index " + std::to_string(r.frame_index) +
                    " but sits in frame bucket " + std::to_string(t));
      if (r.id != total)
        throw error("tracking: region ids must be consecutive, expected " +
                    std::to_string(total) + " got " + std::to_string(r.id));
      g.regions.push_back(r);
      ++total;
    }
  }

  // Label grid of the next frame makes the frame-pair overlap pass linear
  // in the total sample count; equivalent to all-pairs intersection.
  std::vector<int> labels;
  for (int t = 0; t + 1 < g.frame_count; ++t) {
    const auto& next = regions_by_frame[t + 1];
    if (next.empty() || regions_by_frame[t].empty()) continue;

    int w = 0, h = 0;
    for (const region& r : next) {
      w = std::max(w, r.xmax + 1);
      h = std::max(h, r.ymax + 1);
    }
    for (const region& r : regions_by_frame[t]) {
      w = std::max(w, r.xmax + 1);
      h = std::max(h, r.ymax + 1);
    }
    labels.assign(static_cast<std::size_t>(w) * h, -1);
    for (const region& r : next)
      for (const coord& c : r.samples) labels[c.y * w + c.x] = r.id;

    for (const region& r : regions_by_frame[t]) {
      std::unordered_map<int, int> weights;
      for (const coord& c : r.samples) {
        const int to = labels[c.y * w + c.x];
        if (to >= 0) ++weights[to];
      }
      std::vector<std::pair<int, int>> sorted(weights.begin(), weights.end());
      std::sort(sorted.begin(), sorted.end());
      for (const auto& [to, weight] : sorted)
        g.links.push_back({r.id, to, weight, false, false});
    }
  }

  std::sort(g.links.begin(), g.links.end(),
            [](const overlap_link& a, const overlap_link& b) {
              return a.from_region != b.from_region
                         ? a.from_region < b.from_region
                         : a.to_region < b.to_region;
            });

  std::vector<int> indeg(g.regions.size(), 0), outdeg(g.regions.size(), 0);
  for (const overlap_link& l : g.links) {
    ++outdeg[l.from_region];
    ++indeg[l.to_region];
  }
  for (overlap_link& l : g.links) {
    l.part_of_merge = indeg[l.to_region] >= 2;
    l.part_of_split = outdeg[l.from_region] >= 2;
  }
  g.birth.resize(g.regions.size());
  g.death.resize(g.regions.size());
  for (std::size_t i = 0; i < g.regions.size(); ++i) {
    g.birth[i] = indeg[i] == 0;
    g.death[i] = outdeg[i] == 0;
  }
  return g;
}

std::vector<node_chain> node_chains(const tracking_graph& graph) {
  const int n = static_cast<int>(graph.regions.size());
  std::vector<int> next(n, -1), prev(n, -1);
  for (const overlap_link& l : graph.links) {
    if (l.part_of_merge || l.part_of_split) continue;
    next[l.from_region] = l.to_region;
    prev[l.to_region] = l.from_region;
  }

  std::vector<node_chain> chains;
  for (int id = 0; id < n; ++id) {
    if (prev[id] >= 0) continue;  // not a chain head
    node_chain c;
    c.first_frame = graph.regions[id].frame_index;
    for (int cur = id; cur >= 0; cur = next[cur]) {
      const region& r = graph.regions[cur];
      c.region_ids.push_back(cur);
      c.last_frame = r.frame_index;
      c.peak_max_evm = std::max(c.peak_max_evm, r.max_evm);
      c.peak_area = std::max(c.peak_area, r.area);
    }
    chains.push_back(std::move(c));
  }
  return chains;
}

std::string tracking_graph_json(const tracking_graph& graph) {
  nlohmann::ordered_json j;
  j["regions"] = nlohmann::ordered_json::array();
  for (const region& r : graph.regions) {
    nlohmann::ordered_json jr;
    jr["id"] = r.id;
    jr["frame"] = r.frame_index;
    jr["area"] = r.area;
    jr["max_evm"] = r.max_evm;
    jr["bbox"] = {r.xmin, r.ymin, r.xmax, r.ymax};
    j["regions"].push_back(std::move(jr));
  }
  j["links"] = nlohmann::ordered_json::array();
  for (const overlap_link& l : graph.links) {
    nlohmann::ordered_json jl;
    jl["from"] = l.from_region;
    jl["to"] = l.to_region;
    jl["weight"] = l.weight;
    jl["merge"] = l.part_of_merge;
    jl["split"] = l.part_of_split;
    j["links"].push_back(std::move(jl));
  }
  j["births"] = nlohmann::ordered_json::array();
  j["deaths"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < graph.regions.size(); ++i) {
    if (graph.birth[i]) j["births"].push_back(static_cast<int>(i));
    if (graph.death[i]) j["deaths"].push_back(static_cast<int>(i));
  }
  return j.dump(2) + "\n";
}

tracking_graph parse_tracking_graph_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw error(std::string("tracking: bad graph JSON: ") + e.what());
  }
  tracking_graph g;
  try {
    for (const auto& jr : j.at("regions")) {
      region r;
      r.id = jr.at("id").get<int>();
      r.frame_index = jr.at("frame").get<int>();
      r.area = jr.at("area").get<int>();
      r.max_evm = jr.at("max_evm").get<double>();
      const auto& bb = jr.at("bbox");
      r.xmin = bb.at(0).get<int>();
      r.ymin = bb.at(1).get<int>();
      r.xmax = bb.at(2).get<int>();
      r.ymax = bb.at(3).get<int>();
      g.frame_count = std::max(g.frame_count, r.frame_index + 1);
      g.regions.push_back(std::move(r));
    }
    for (const auto& jl : j.at("links")) {
      overlap_link l;
      l.from_region = jl.at("from").get<int>();
      l.to_region = jl.at("to").get<int>();
      l.weight = jl.at("weight").get<int>();
      l.part_of_merge = jl.at("merge").get<bool>();
      l.part_of_split = jl.at("split").get<bool>();
      g.links.push_back(l);
    }
  } catch (const nlohmann::json::exception& e) {
    throw error(std::string("tracking: bad graph JSON: ") + e.what());
  }
  g.birth.assign(g.regions.size(), 1);
  g.death.assign(g.regions.size(), 1);
  for (const overlap_link& l : g.links) {
    if (l.to_region >= 0 && l.to_region < static_cast<int>(g.birth.size()))
      g.birth[l.to_region] = 0;
    if (l.from_region >= 0 &&
        l.from_region < static_cast<int>(g.death.size()))
      g.death[l.from_region] = 0;
  }
  return g;
}

}  // namespace strainflow
