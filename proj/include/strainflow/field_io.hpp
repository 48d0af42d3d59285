#ifndef STRAINFLOW_FIELD_IO_HPP
#define STRAINFLOW_FIELD_IO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "strainflow/core.hpp"

namespace strainflow {

// One timestep of a DIC displacement measurement: a 2-vector per sample
// plus a validity mask. Displacements at invalid samples are retained but
// ignored downstream.
struct displacement_frame {
  grid_spec grid;
  int frame_index = 0;
  std::vector<vec2> u;
  std::vector<std::uint8_t> valid;

  bool is_valid(int x, int y) const { return valid[grid.index(x, y)] != 0; }
  const vec2& at(int x, int y) const { return u[grid.index(x, y)]; }
};

struct sequence {
  grid_spec grid;
  std::vector<displacement_frame> frames;
};

// Ground truth emitted next to generated scenarios (truth.json).
struct scenario_truth {
  std::string scenario;
  std::optional<int> merge_frame;  // two-blobs-merge only
  std::optional<int> threshold_index;
  std::optional<int> persistence_index;
};

struct scenario_params {
  double amplitude = 0.1;  // peak displacement/strain scale, grows with t
};

sequence load_sequence(const std::filesystem::path& manifest_path);

// Writes manifest.json plus one CSV per frame into `dir`. Returns the
// manifest path. Values round-trip bit-exactly through the CSV text.
std::filesystem::path save_sequence(const sequence& seq,
                                    const std::filesystem::path& dir,
                                    const scenario_truth* truth = nullptr);

scenario_truth load_truth(const std::filesystem::path& truth_path);

// Scenario names: uniaxial, rigid-rotation, simple-shear, two-blobs-merge,
// notch. The returned truth carries the merge frame for two-blobs-merge.
sequence generate_scenario(const std::string& name, const grid_spec& grid,
                           int n_frames, const scenario_params& params,
                           scenario_truth& truth);

}  // namespace strainflow

#endif
