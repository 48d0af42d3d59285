#include "strainflow/sankey.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace strainflow {

namespace {

constexpr double kMargin = 12.0;

// ordinal position of every region inside its column
std::vector<int> positions_of(const column_orders& orders, int n_regions) {
  std::vector<int> pos(n_regions, -1);
  for (const auto& col : orders)
    for (std::size_t i = 0; i < col.size(); ++i)
      pos[col[i]] = static_cast<int>(i);
  return pos;
}

struct fenwick {
  std::vector<int> tree;
  explicit fenwick(int n) : tree(n + 1, 0) {}
  void add(int i) {
    for (++i; i < static_cast<int>(tree.size()); i += i & -i) ++tree[i];
  }
  int prefix(int i) const {  // count of inserted values <= i
    int s = 0;
    for (++i; i > 0; i -= i & -i) s += tree[i];
    return s;
  }
};

}  // namespace

std::vector<color_anchor> layout_config::default_colormap() {
  return {{0.00, {68, 1, 84}},
          {0.25, {59, 82, 139}},
          {0.50, {33, 145, 140}},
          {0.75, {94, 201, 98}},
          {1.00, {253, 231, 37}}};
}

void layout_config::validate() const {
  if (!(canvas_width > 0) || !(canvas_height > 0) || !(node_width > 0) ||
      !(column_gap > 0) || !(node_gap > 0) || !(min_node_height > 0) ||
      !(min_link_thickness > 0))
    throw error("sankey: all layout lengths must be > 0");
  if (barycenter_sweeps < 1)
    throw error("sankey: barycenter sweep count must be >= 1");
  if (colormap.size() < 2) throw error("sankey: colormap needs >= 2 anchors");
}

column_orders initial_order(const tracking_graph& graph) {
  column_orders orders(graph.frame_count);
  for (const region& r : graph.regions)
    orders[r.frame_index].push_back(r.id);
  for (auto& col : orders) std::sort(col.begin(), col.end());
  return orders;
}

long count_crossings(const column_orders& orders,
                     const tracking_graph& graph) {
  const std::vector<int> pos =
      positions_of(orders, static_cast<int>(graph.regions.size()));

  // bucket links per source column
  std::vector<std::vector<std::pair<int, int>>> by_col(orders.size());
  for (const overlap_link& l : graph.links) {
    const int c = graph.regions[l.from_region].frame_index;
    by_col[c].push_back({pos[l.from_region], pos[l.to_region]});
  }

  long total = 0;
  for (std::size_t c = 0; c + 1 < orders.size(); ++c) {
    auto& links = by_col[c];
    if (links.size() < 2) continue;
    std::sort(links.begin(), links.end());
    // strict inversions of the to-positions, counted with a Fenwick tree
    fenwick bit(static_cast<int>(orders[c + 1].size()));
    int inserted = 0;
    for (const auto& [from_p, to_p] : links) {
      total += inserted - bit.prefix(to_p);
      bit.add(to_p);
      ++inserted;
    }
  }
  return total;
}

column_orders barycenter_sweep(const column_orders& orders,
                               const tracking_graph& graph, int sweeps) {
  if (sweeps < 1) throw error("sankey: sweep count must be >= 1");
  const int n = static_cast<int>(graph.regions.size());

  std::vector<std::vector<int>> in_nbrs(n), out_nbrs(n);
  for (const overlap_link& l : graph.links) {
    in_nbrs[l.to_region].push_back(l.from_region);
    out_nbrs[l.from_region].push_back(l.to_region);
  }

  column_orders cur = orders;
  column_orders best = orders;
  long best_crossings = count_crossings(orders, graph);

  for (int pass = 0; pass < sweeps; ++pass) {
    const bool left_to_right = pass % 2 == 0;
    std::vector<int> pos = positions_of(cur, n);

    auto resort_column = [&](std::size_t c, bool use_in) {
      auto& col = cur[c];
      if (col.size() < 2) return;
      std::vector<std::pair<double, int>> keyed;
      keyed.reserve(col.size());
      for (int id : col) {
        const auto& nbrs = use_in ? in_nbrs[id] : out_nbrs[id];
        double key;
        if (nbrs.empty()) {
          key = pos[id];
        } else {
          double sum = 0.0;
          for (int nb : nbrs) sum += pos[nb];
          key = sum / static_cast<double>(nbrs.size());
        }
        keyed.push_back({key, id});
      }
      std::sort(keyed.begin(), keyed.end());
      for (std::size_t i = 0; i < col.size(); ++i) {
        col[i] = keyed[i].second;
        pos[col[i]] = static_cast<int>(i);
      }
    };

    if (left_to_right) {
      for (std::size_t c = 1; c < cur.size(); ++c) resort_column(c, true);
    } else {
      for (std::size_t c = cur.size(); c-- > 1;) resort_column(c - 1, false);
    }

    const long crossings = count_crossings(cur, graph);
    if (crossings < best_crossings) {
      best_crossings = crossings;
      best = cur;
    }
  }
  return best;
}

rgb color_of(double max_evm, double global_max,
             const std::vector<color_anchor>& anchors) {
  if (!(global_max > 0.0))
    throw error("sankey: colormap needs a positive global maximum");
  double t = max_evm / global_max;
  t = std::clamp(t, 0.0, 1.0);

  std::size_t hi = 1;
  while (hi + 1 < anchors.size() && t > anchors[hi].t) ++hi;
  const color_anchor& a = anchors[hi - 1];
  const color_anchor& b = anchors[hi];
  const double u = (t - a.t) / (b.t - a.t);
  auto mix = [u](int x, int y) {
    return static_cast<int>(std::floor(x + u * (y - x) + 0.5));
  };
  return {mix(a.color.r, b.color.r), mix(a.color.g, b.color.g),
          mix(a.color.b, b.color.b)};
}

sankey_layout lane_packing(const column_orders& orders,
                           const tracking_graph& graph,
                           const layout_config& config) {
  config.validate();
  const int n = static_cast<int>(graph.regions.size());
  const int n_cols = static_cast<int>(orders.size());

  sankey_layout layout;
  layout.config = config;
  layout.nodes.assign(n, sankey_node{});

  // heaviest predecessor / successor per region; ties favor the lower id
  std::vector<int> heavy_pred(n, -1), heavy_succ(n, -1);
  std::vector<int> pred_w(n, 0), succ_w(n, 0);
  for (const overlap_link& l : graph.links) {
    if (l.weight > pred_w[l.to_region] ||
        (l.weight == pred_w[l.to_region] &&
         (heavy_pred[l.to_region] < 0 ||
          l.from_region < heavy_pred[l.to_region]))) {
      pred_w[l.to_region] = l.weight;
      heavy_pred[l.to_region] = l.from_region;
    }
    if (l.weight > succ_w[l.from_region] ||
        (l.weight == succ_w[l.from_region] &&
         (heavy_succ[l.from_region] < 0 ||
          l.to_region < heavy_succ[l.from_region]))) {
      succ_w[l.from_region] = l.weight;
      heavy_succ[l.from_region] = l.to_region;
    }
  }

  // forward pass: inherit the heaviest predecessor's lane when that keeps
  // lanes strictly increasing down the column, else open the next index
  std::vector<int> lane(n, -1);
  int lane_count = 0;
  for (int c = 0; c < n_cols; ++c) {
    int prev_lane = -1;
    for (int id : orders[c]) {
      int cand = -1;
      if (heavy_pred[id] >= 0) cand = lane[heavy_pred[id]];
      if (cand <= prev_lane) cand = prev_lane + 1;
      lane[id] = cand;
      prev_lane = cand;
      lane_count = std::max(lane_count, cand + 1);
    }
  }

  // node heights from a single global area scale, solved so the lane bands
  // fill the usable canvas height; min-height clamps re-solved iteratively
  std::vector<int> lane_max_area(lane_count, 0);
  for (int id = 0; id < n; ++id)
    lane_max_area[lane[id]] =
        std::max(lane_max_area[lane[id]], graph.regions[id].area);

  const double fixed_total = lane_count * config.node_gap;
  double usable =
      std::max(config.canvas_height - 2.0 * kMargin,
               lane_count * (config.min_node_height + config.node_gap) + 1.0);
  double scale = 1.0;
  if (lane_count > 0) {
    std::vector<std::uint8_t> clamped(lane_count, 0);
    for (int iter = 0; iter < lane_count + 1; ++iter) {
      double area_sum = 0.0;
      double clamp_sum = 0.0;
      for (int L = 0; L < lane_count; ++L) {
        if (clamped[L])
          clamp_sum += config.min_node_height;
        else
          area_sum += lane_max_area[L];
      }
      if (area_sum <= 0.0) break;
      scale = (usable - fixed_total - clamp_sum) / area_sum;
      bool changed = false;
      for (int L = 0; L < lane_count; ++L) {
        if (!clamped[L] && scale * lane_max_area[L] < config.min_node_height) {
          clamped[L] = 1;
          changed = true;
        }
      }
      if (!changed) break;
    }
    if (!(scale > 0.0)) scale = config.min_node_height;
  }

  std::vector<double> content(lane_count, 0.0);
  for (int L = 0; L < lane_count; ++L)
    content[L] = std::max(scale * lane_max_area[L], config.min_node_height);
  std::vector<double> lane_start(lane_count, 0.0);
  double acc = kMargin;
  for (int L = 0; L < lane_count; ++L) {
    lane_start[L] = acc;
    acc += content[L] + config.node_gap;
  }

  // column x positions stretch across the canvas but never tighter than
  // node_width + column_gap; the page grows when the columns need more room
  const double usable_w = config.canvas_width - 2.0 * kMargin;
  double pitch = config.node_width + config.column_gap;
  if (n_cols > 1)
    pitch = std::max(pitch, (usable_w - config.node_width) / (n_cols - 1));
  layout.width = std::max(
      config.canvas_width,
      2.0 * kMargin + config.node_width + (n_cols - 1) * pitch);
  layout.height = std::max(config.canvas_height, acc - config.node_gap + kMargin);

  double global_max = 0.0;
  for (const region& r : graph.regions)
    global_max = std::max(global_max, r.max_evm);

  for (int id = 0; id < n; ++id) {
    const region& r = graph.regions[id];
    sankey_node& node = layout.nodes[id];
    node.region_id = id;
    node.column = r.frame_index;
    node.lane = lane[id];
    node.height = std::max(scale * r.area, config.min_node_height);
    node.x = kMargin + r.frame_index * pitch;
    node.y = lane_start[lane[id]] + 0.5 * (content[lane[id]] - node.height);
    node.color = global_max > 0.0
                     ? color_of(r.max_evm, global_max, config.colormap)
                     : config.colormap.front().color;
  }

  // backward pass: center-align on the heaviest successor when the move
  // keeps this column's vertical order and gaps intact
  for (int c = n_cols - 2; c >= 0; --c) {
    const auto& col = orders[c];
    for (std::size_t i = 0; i < col.size(); ++i) {
      const int id = col[i];
      const int succ = heavy_succ[id];
      if (succ < 0) continue;
      sankey_node& node = layout.nodes[id];
      const sankey_node& s = layout.nodes[succ];
      const double target = s.y + 0.5 * (s.height - node.height);
      double lo = kMargin;
      double hi = layout.height - kMargin - node.height;
      if (i > 0) {
        const sankey_node& above = layout.nodes[col[i - 1]];
        lo = std::max(lo, above.y + above.height + config.node_gap);
      }
      if (i + 1 < col.size()) {
        const sankey_node& below = layout.nodes[col[i + 1]];
        hi = std::min(hi, below.y - config.node_gap - node.height);
      }
      if (target >= lo && target <= hi) node.y = target;
    }
  }

  // link ribbons: thickness on the shared scale, attachment slots stacked
  // by the far end's vertical position so ribbons fan out without twisting
  layout.links.reserve(graph.links.size());
  for (const overlap_link& l : graph.links) {
    sankey_link sl;
    sl.from_region = l.from_region;
    sl.to_region = l.to_region;
    sl.thickness = std::max(scale * l.weight, config.min_link_thickness);
    sl.thickness = std::min({sl.thickness, layout.nodes[l.from_region].height,
                             layout.nodes[l.to_region].height});
    layout.links.push_back(sl);
  }
  std::vector<std::vector<int>> out_of(n), in_of(n);
  for (std::size_t i = 0; i < layout.links.size(); ++i) {
    out_of[layout.links[i].from_region].push_back(static_cast<int>(i));
    in_of[layout.links[i].to_region].push_back(static_cast<int>(i));
  }
  for (int id = 0; id < n; ++id) {
    auto by_far_y = [&](bool outgoing) {
      return [&, outgoing](int a, int b) {
        const int ra = outgoing ? layout.links[a].to_region
                                : layout.links[a].from_region;
        const int rb = outgoing ? layout.links[b].to_region
                                : layout.links[b].from_region;
        if (layout.nodes[ra].y != layout.nodes[rb].y)
          return layout.nodes[ra].y < layout.nodes[rb].y;
        return ra < rb;
      };
    };
    std::sort(out_of[id].begin(), out_of[id].end(), by_far_y(true));
    std::sort(in_of[id].begin(), in_of[id].end(), by_far_y(false));
    double off = layout.nodes[id].y;
    for (int li : out_of[id]) {
      layout.links[li].y_from = off;
      off += layout.links[li].thickness;
    }
    off = layout.nodes[id].y;
    for (int li : in_of[id]) {
      layout.links[li].y_to = off;
      off += layout.links[li].thickness;
    }
  }
  return layout;
}

sankey_layout layout_graph(const tracking_graph& graph,
                           const layout_config& config) {
  const column_orders init = initial_order(graph);
  const column_orders ordered =
      barycenter_sweep(init, graph, config.barycenter_sweeps);
  return lane_packing(ordered, graph, config);
}

std::string emit_svg(const sankey_layout& layout) {
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         format_fixed2(layout.width) + "\" height=\"" +
         format_fixed2(layout.height) + "\" viewBox=\"0 0 " +
         format_fixed2(layout.width) + " " + format_fixed2(layout.height) +
         "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + format_fixed2(layout.width) +
         "\" height=\"" + format_fixed2(layout.height) +
         "\" fill=\"#ffffff\"/>\n";

  // links first (sorted by (from, to) id), nodes painted on top
  std::vector<int> link_order(layout.links.size());
  for (std::size_t i = 0; i < link_order.size(); ++i)
    link_order[i] = static_cast<int>(i);
  std::sort(link_order.begin(), link_order.end(), [&](int a, int b) {
    const sankey_link& la = layout.links[a];
    const sankey_link& lb = layout.links[b];
    if (la.from_region != lb.from_region)
      return la.from_region < lb.from_region;
    return la.to_region < lb.to_region;
  });
  const double nw = layout.config.node_width;
  for (int li : link_order) {
    const sankey_link& l = layout.links[li];
    const sankey_node& a = layout.nodes[l.from_region];
    const sankey_node& b = layout.nodes[l.to_region];
    const double x0 = a.x + nw;
    const double x1 = b.x;
    const double mx = 0.5 * (x0 + x1);
    const double t0 = l.y_from;
    const double t1 = l.y_to;
    const double b0 = t0 + l.thickness;
    const double b1 = t1 + l.thickness;
    const rgb& c = a.color;
    svg += "<path d=\"M " + format_fixed2(x0) + " " + format_fixed2(t0) +
           " C " + format_fixed2(mx) + " " + format_fixed2(t0) + ", " +
           format_fixed2(mx) + " " + format_fixed2(t1) + ", " +
           format_fixed2(x1) + " " + format_fixed2(t1) + " L " +
           format_fixed2(x1) + " " + format_fixed2(b1) + " C " +
           format_fixed2(mx) + " " + format_fixed2(b1) + ", " +
           format_fixed2(mx) + " " + format_fixed2(b0) + ", " +
           format_fixed2(x0) + " " + format_fixed2(b0) + " Z\" fill=\"rgb(" +
           std::to_string(c.r) + "," + std::to_string(c.g) + "," +
           std::to_string(c.b) + ")\" fill-opacity=\"0.55\"/>\n";
  }

  std::vector<int> node_order(layout.nodes.size());
  for (std::size_t i = 0; i < node_order.size(); ++i)
    node_order[i] = static_cast<int>(i);
  std::sort(node_order.begin(), node_order.end(), [&](int a, int b) {
    const sankey_node& na = layout.nodes[a];
    const sankey_node& nb = layout.nodes[b];
    if (na.column != nb.column) return na.column < nb.column;
    return na.region_id < nb.region_id;
  });
  for (int ni : node_order) {
    const sankey_node& node = layout.nodes[ni];
    svg += "<rect x=\"" + format_fixed2(node.x) + "\" y=\"" +
           format_fixed2(node.y) + "\" width=\"" + format_fixed2(nw) +
           "\" height=\"" + format_fixed2(node.height) + "\" fill=\"rgb(" +
           std::to_string(node.color.r) + "," + std::to_string(node.color.g) +
           "," + std::to_string(node.color.b) + ")\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string layout_json(const sankey_layout& layout) {
  nlohmann::ordered_json j;
  j["width"] = layout.width;
  j["height"] = layout.height;
  j["nodes"] = nlohmann::ordered_json::array();
  for (const sankey_node& n : layout.nodes) {
    nlohmann::ordered_json jn;
    jn["id"] = n.region_id;
    jn["column"] = n.column;
    jn["lane"] = n.lane;
    jn["x"] = n.x;
    jn["y"] = n.y;
    jn["height"] = n.height;
    jn["color"] = {n.color.r, n.color.g, n.color.b};
    j["nodes"].push_back(std::move(jn));
  }
  j["links"] = nlohmann::ordered_json::array();
  for (const sankey_link& l : layout.links) {
    nlohmann::ordered_json jl;
    jl["from"] = l.from_region;
    jl["to"] = l.to_region;
    jl["thickness"] = l.thickness;
    jl["y_from"] = l.y_from;
    jl["y_to"] = l.y_to;
    j["links"].push_back(std::move(jl));
  }
  return j.dump(2) + "\n";
}

}  // namespace strainflow
