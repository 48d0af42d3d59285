#include "strainflow/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "strainflow/strain.hpp"

namespace strainflow {

namespace {

std::string indexed_name(const char* stem, int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%03d%s", stem, index, ext);
  return buf;
}

std::string cell_svg_name(int threshold_index, int persistence_index) {
  return "sankey_it" + std::to_string(threshold_index) + "_ih" +
         std::to_string(persistence_index) + ".svg";
}

nlohmann::ordered_json config_json(const run_config& config, double p95,
                                   double tau, double h) {
  nlohmann::ordered_json j;
  j["input"] = config.input_manifest.string();
  j["output"] = config.output_dir.string();
  j["threshold_index"] = config.threshold_index;
  j["persistence_index"] = config.persistence_index;
  j["p95"] = p95;
  j["tau"] = tau;
  j["h"] = h;
  j["dump_strain"] = config.dump_strain;
  j["dump_regions"] = config.dump_regions;
  j["dump_graph"] = config.dump_graph;
  j["dump_layout"] = config.dump_layout;
  const layout_config& lc = config.layout;
  j["layout"] = {{"canvas_width", lc.canvas_width},
                 {"canvas_height", lc.canvas_height},
                 {"node_width", lc.node_width},
                 {"column_gap", lc.column_gap},
                 {"node_gap", lc.node_gap},
                 {"min_node_height", lc.min_node_height},
                 {"min_link_thickness", lc.min_link_thickness},
                 {"barycenter_sweeps", lc.barycenter_sweeps}};
  return j;
}

}  // namespace

std::string pipeline_summary::line() const {
  return "frames=" + std::to_string(frames) +
         " regions=" + std::to_string(regions) +
         " births=" + std::to_string(births) +
         " merges=" + std::to_string(merges) +
         " splits=" + std::to_string(splits) +
         " deaths=" + std::to_string(deaths) + " svg=" + svg_path.string();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw error("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw error("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw error("read failed: " + path.string());
  return bytes;
}

pipeline_cache pipeline_cache::build(sequence seq) {
  pipeline_cache cache;
  cache.seq = std::move(seq);
  cache.strain.reserve(cache.seq.frames.size());
  for (const displacement_frame& frame : cache.seq.frames)
    cache.strain.push_back(compute_strain_frame(frame));
  cache.filtered.resize(4);
  cache.p95_by_ih.assign(4, -1.0);
  return cache;
}

const std::vector<std::vector<double>>& pipeline_cache::fields_for(
    int persistence_index) {
  double tau_unused, h;
  thresholds(1, persistence_index, 1.0, tau_unused, h);
  auto& fields = filtered[persistence_index];
  if (fields.empty() && !strain.empty()) {
    fields.reserve(strain.size());
    std::vector<std::vector<std::uint8_t>> masks;
    masks.reserve(strain.size());
    for (const strain_frame& sf : strain) {
      std::vector<double> filled = fill_invalid(sf.evm, sf.valid);
      fields.push_back(h_maxima(filled, sf.grid, h));
      masks.push_back(sf.valid);
    }
    p95_by_ih[persistence_index] = dataset_p95(fields, masks);
  }
  return fields;
}

pipeline_summary run_pipeline_cached(const run_config& config,
                                     pipeline_cache& cache) {
  const auto& fields = cache.fields_for(config.persistence_index);
  const double p95 = cache.p95_by_ih[config.persistence_index];
  double tau, h;
  thresholds(config.threshold_index, config.persistence_index, p95, tau, h);

  std::vector<std::vector<region>> regions_by_frame;
  regions_by_frame.reserve(fields.size());
  int next_id = 0;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    regions_by_frame.push_back(superlevel_components(
        fields[f], cache.seq.grid, tau, static_cast<int>(f), next_id));
    next_id += static_cast<int>(regions_by_frame.back().size());
  }

  const tracking_graph graph = build_tracking_graph(regions_by_frame);
  const sankey_layout layout = layout_graph(graph, config.layout);

  std::filesystem::create_directories(config.output_dir);
  const std::filesystem::path svg_path =
      config.output_dir /
      cell_svg_name(config.threshold_index, config.persistence_index);
  write_file(svg_path, emit_svg(layout));

  if (config.dump_strain) {
    for (const strain_frame& sf : cache.strain)
      write_file(config.output_dir /
                     indexed_name("strain_f", sf.frame_index, ".csv"),
                 strain_frame_csv(sf));
  }
  if (config.dump_regions)
    write_file(config.output_dir / "regions.jsonl",
               regions_jsonl(graph.regions));
  if (config.dump_graph)
    write_file(config.output_dir / "graph.json", tracking_graph_json(graph));
  if (config.dump_layout)
    write_file(config.output_dir / "layout.json", layout_json(layout));

  pipeline_summary summary;
  summary.frames = static_cast<int>(cache.seq.frames.size());
  summary.regions = static_cast<int>(graph.regions.size());
  for (std::uint8_t b : graph.birth) summary.births += b;
  for (std::uint8_t d : graph.death) summary.deaths += d;
  summary.merges = graph.merge_event_count();
  summary.splits = graph.split_event_count();
  summary.p95 = p95;
  summary.svg_path = svg_path;
  return summary;
}

pipeline_summary run_pipeline(const run_config& config) {
  pipeline_cache cache = pipeline_cache::build(load_sequence(config.input_manifest));
  pipeline_summary summary = run_pipeline_cached(config, cache);

  double tau, h;
  thresholds(config.threshold_index, config.persistence_index, summary.p95,
             tau, h);
  write_file(config.output_dir / "run_config.json",
             config_json(config, summary.p95, tau, h).dump(2) + "\n");
  return summary;
}

sweep_result run_sweep(const run_config& config, int only_threshold,
                       int only_persistence) {
  pipeline_cache cache = pipeline_cache::build(load_sequence(config.input_manifest));

  sweep_result result;
  nlohmann::ordered_json index;
  index["input"] = config.input_manifest.string();
  index["cells"] = nlohmann::ordered_json::array();
  const bool one_it = only_threshold >= 1 && only_threshold <= 4;
  const bool one_ih = only_persistence >= 0 && only_persistence <= 3;
  for (int it = one_it ? only_threshold : 1; it <= (one_it ? only_threshold : 4);
       ++it) {
    for (int ih = one_ih ? only_persistence : 0;
         ih <= (one_ih ? only_persistence : 3); ++ih) {
      run_config cell = config;
      cell.threshold_index = it;
      cell.persistence_index = ih;
      try {
        pipeline_summary s = run_pipeline_cached(cell, cache);
        nlohmann::ordered_json jc;
        jc["threshold_index"] = it;
        jc["persistence_index"] = ih;
        jc["svg"] = cell_svg_name(it, ih);
        jc["p95"] = s.p95;
        jc["regions"] = s.regions;
        jc["births"] = s.births;
        jc["merges"] = s.merges;
        jc["splits"] = s.splits;
        jc["deaths"] = s.deaths;
        index["cells"].push_back(std::move(jc));
        result.cells.push_back(std::move(s));
      } catch (const std::exception& e) {
        result.failures.push_back(cell_svg_name(it, ih) + ": " + e.what());
      }
    }
  }
  std::filesystem::create_directories(config.output_dir);
  result.index_path = config.output_dir / "sweep_index.json";
  write_file(result.index_path, index.dump(2) + "\n");
  return result;
}

std::filesystem::path run_generate(const std::string& scenario,
                                   const grid_spec& grid, int n_frames,
                                   const scenario_params& params,
                                   const std::filesystem::path& out_dir) {
  scenario_truth truth;
  const sequence seq =
      generate_scenario(scenario, grid, n_frames, params, truth);
  return save_sequence(seq, out_dir, &truth);
}

lic_outputs run_lic_frame(const sequence& seq, int frame,
                          const lic_config& config,
                          const std::vector<color_anchor>& colormap,
                          const std::filesystem::path& out_dir) {
  if (frame < 0 || frame >= static_cast<int>(seq.frames.size()))
    throw error("lic: frame " + std::to_string(frame) +
                " out of range, sequence has " +
                std::to_string(seq.frames.size()) + " frames");
  const strain_frame sf = compute_strain_frame(seq.frames[frame]);
  const line_field field = make_line_field(sf);
  const gray_image img = lic_image(field, config);

  const std::vector<double> evm = fill_invalid(sf.evm, sf.valid);
  double frame_max = 0.0;
  for (int i = 0; i < sf.grid.sample_count(); ++i)
    if (sf.valid[i]) frame_max = std::max(frame_max, sf.evm[i]);
  const rgb_image overlay =
      overlay_evm(img, evm, sf.grid, frame_max, colormap);

  std::filesystem::create_directories(out_dir);
  lic_outputs out;
  out.pgm_path = out_dir / indexed_name("lic_f", frame, ".pgm");
  out.ppm_path = out_dir / indexed_name("lic_f", frame, ".ppm");
  write_file(out.pgm_path, encode_pgm(img));
  write_file(out.ppm_path, encode_ppm(overlay));
  return out;
}

}  // namespace strainflow
