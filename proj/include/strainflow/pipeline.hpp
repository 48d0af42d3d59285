#ifndef STRAINFLOW_PIPELINE_HPP
#define STRAINFLOW_PIPELINE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "strainflow/field_io.hpp"
#include "strainflow/lic.hpp"
#include "strainflow/sankey.hpp"
#include "strainflow/topo.hpp"
#include "strainflow/tracking.hpp"

namespace strainflow {

struct run_config {
  std::filesystem::path input_manifest;
  std::filesystem::path output_dir;
  int threshold_index = 2;    // i_t
  int persistence_index = 1;  // i_h
  layout_config layout;
  lic_config lic;
  bool dump_strain = false;
  bool dump_regions = false;
  bool dump_graph = false;
  bool dump_layout = false;
};

struct pipeline_summary {
  int frames = 0;
  int regions = 0;
  int births = 0;
  int merges = 0;
  int splits = 0;
  int deaths = 0;
  double p95 = 0.0;
  std::filesystem::path svg_path;

  std::string line() const;
};

// Precomputed per-sequence state shared across sweep cells: strain frames
// once, filtered fields and p95 once per persistence index.
struct pipeline_cache {
  sequence seq;
  std::vector<strain_frame> strain;
  // filtered[i_h][frame] -> filled + h-maxima field
  std::vector<std::vector<std::vector<double>>> filtered;
  std::vector<double> p95_by_ih;

  static pipeline_cache build(sequence seq);
  const std::vector<std::vector<double>>& fields_for(int persistence_index);
};

// load -> strain -> fill/h-maxima -> p95/tau -> components -> tracking ->
// layout -> SVG, writing sankey_it{i}_ih{j}.svg plus requested dumps.
pipeline_summary run_pipeline(const run_config& config);

// Same using an existing cache; used by sweeps.
pipeline_summary run_pipeline_cached(const run_config& config,
                                     pipeline_cache& cache);

struct sweep_result {
  std::vector<pipeline_summary> cells;   // successful cells
  std::vector<std::string> failures;     // per-cell error messages
  std::filesystem::path index_path;
};

// One run per (i_t, i_h) pair; upstream computation shared across cells.
// A valid only_threshold (1..4) or only_persistence (0..3) restricts that
// axis to the single value; out-of-range sentinels sweep the full range.
sweep_result run_sweep(const run_config& config, int only_threshold = 0,
                       int only_persistence = -1);

std::filesystem::path run_generate(const std::string& scenario,
                                   const grid_spec& grid, int n_frames,
                                   const scenario_params& params,
                                   const std::filesystem::path& out_dir);

// Renders PGM (LIC) and PPM (evm overlay) for one frame.
struct lic_outputs {
  std::filesystem::path pgm_path;
  std::filesystem::path ppm_path;
};
lic_outputs run_lic_frame(const sequence& seq, int frame,
                          const lic_config& config,
                          const std::vector<color_anchor>& colormap,
                          const std::filesystem::path& out_dir);

void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace strainflow

#endif
