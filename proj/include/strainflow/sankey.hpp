#ifndef STRAINFLOW_SANKEY_HPP
#define STRAINFLOW_SANKEY_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "strainflow/tracking.hpp"

namespace strainflow {

struct rgb {
  int r = 0, g = 0, b = 0;
  bool operator==(const rgb&) const = default;
};

struct color_anchor {
  double t = 0.0;
  rgb color;
};

struct layout_config {
  double canvas_width = 1200.0;
  double canvas_height = 800.0;
  double node_width = 8.0;
  double column_gap = 12.0;  // minimum; columns stretch to fill the canvas
  double node_gap = 4.0;
  double min_node_height = 2.0;
  double min_link_thickness = 1.0;
  int barycenter_sweeps = 4;
  std::vector<color_anchor> colormap = default_colormap();

  static std::vector<color_anchor> default_colormap();
  void validate() const;
};

struct sankey_node {
  int region_id = 0;
  int column = 0;  // frame index
  double x = 0.0;
  double y = 0.0;
  double height = 0.0;
  rgb color;
  int lane = 0;
};

struct sankey_link {
  int from_region = 0;
  int to_region = 0;
  double thickness = 0.0;
  // ribbon anchor y of the band's top edge at each end
  double y_from = 0.0;
  double y_to = 0.0;
};

struct sankey_layout {
  layout_config config;
  double width = 0.0;   // final SVG size; >= canvas when content overflows
  double height = 0.0;
  std::vector<sankey_node> nodes;  // one per region, indexed by region id
  std::vector<sankey_link> links;
};

// Per-column node orders, columns indexed by frame.
using column_orders = std::vector<std::vector<int>>;

column_orders initial_order(const tracking_graph& graph);

// Alternating directional passes (left-to-right first); after all passes the
// visited state with the fewest crossings wins, the initial order included.
column_orders barycenter_sweep(const column_orders& orders,
                               const tracking_graph& graph, int sweeps);

// Strict inversion count over all consecutive column pairs.
long count_crossings(const column_orders& orders, const tracking_graph& graph);

// Forward lane inheritance from the heaviest predecessor plus a backward
// alignment pass; fills node lane ids and y/height geometry.
sankey_layout lane_packing(const column_orders& orders,
                           const tracking_graph& graph,
                           const layout_config& config);

rgb color_of(double max_evm, double global_max,
             const std::vector<color_anchor>& anchors);

sankey_layout layout_graph(const tracking_graph& graph,
                           const layout_config& config);

std::string emit_svg(const sankey_layout& layout);

std::string layout_json(const sankey_layout& layout);

}  // namespace strainflow

#endif
