#ifndef STRAINFLOW_TOPO_HPP
#define STRAINFLOW_TOPO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "strainflow/core.hpp"

namespace strainflow {

struct filter_params {
  int threshold_index = 2;    // i_t in 1..4
  int persistence_index = 1;  // i_h in 0..3
  double p95 = 0.0;           // dataset 95th-percentile evm, computed
};

// One 8-connected superlevel-set component of a single frame.
struct region {
  int id = 0;          // unique within the sequence
  int frame_index = 0;
  std::vector<coord> samples;  // sorted in raster order
  int area = 0;
  double max_evm = 0.0;
  int xmin = 0, ymin = 0, xmax = 0, ymax = 0;
};

// Every invalid sample takes the minimum over the frame's valid samples.
std::vector<double> fill_invalid(const std::vector<double>& field,
                                 const std::vector<std::uint8_t>& valid);

// Morphological reconstruction-by-dilation of (field - h) under field with
// 8-connectivity; suppresses regional maxima of depth < h. Hybrid
// raster/anti-raster sweep with a FIFO finish.
std::vector<double> h_maxima(const std::vector<double>& field,
                             const grid_spec& grid, double h);

// Nearest-rank 95th percentile over all valid samples of all frames:
// ascending sort, value at 1-based index ceil(0.95 * n).
double dataset_p95(const std::vector<std::vector<double>>& fields,
                   const std::vector<std::vector<std::uint8_t>>& masks);

// tau = i_t * p95 / 4, h = i_h * 0.125 / 3.
void thresholds(int threshold_index, int persistence_index, double p95,
                double& tau, double& h);

// Maximal 8-connected components of {field >= tau}. Ids are assigned from
// `first_id` in raster-scan order of each component's first sample.
std::vector<region> superlevel_components(const std::vector<double>& field,
                                          const grid_spec& grid, double tau,
                                          int frame_index, int first_id = 0);

// JSON lines dump, one region per line.
std::string regions_jsonl(const std::vector<region>& regions);

}  // namespace strainflow

#endif
