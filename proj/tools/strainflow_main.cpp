#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "strainflow/pipeline.hpp"
#include "strainflow/strain.hpp"

namespace {

using namespace strainflow;

grid_spec parse_grid(const std::string& text, double spacing) {
  const auto x = text.find('x');
  bool ok_w = false, ok_h = false;
  grid_spec grid;
  if (x != std::string::npos) {
    grid.width = static_cast<int>(parse_double(text.substr(0, x), ok_w));
    grid.height = static_cast<int>(parse_double(text.substr(x + 1), ok_h));
  }
  if (!ok_w || !ok_h)
    throw error("--grid expects WxH, e.g. 120x80, got '" + text + "'");
  grid.spacing = spacing;
  grid.validate();
  return grid;
}

std::vector<int> parse_frames(const std::string& text, int frame_count) {
  if (text == "all") {
    std::vector<int> all(frame_count);
    for (int i = 0; i < frame_count; ++i) all[i] = i;
    return all;
  }
  bool ok = false;
  const double v = parse_double(text, ok);
  const int k = static_cast<int>(v);
  if (!ok || k != v)
    throw error("--frame expects an index or 'all', got '" + text + "'");
  return {k};
}

void add_generate(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "generate", "write a synthetic displacement sequence to disk");
  auto scenario = std::make_shared<std::string>();
  auto grid_text = std::make_shared<std::string>("96x64");
  auto frames = std::make_shared<int>(30);
  auto amplitude = std::make_shared<double>(0.1);
  auto spacing = std::make_shared<double>(1.0);
  auto out = std::make_shared<std::string>();
  cmd->add_option("scenario", *scenario,
                  "uniaxial | rigid-rotation | simple-shear | "
                  "two-blobs-merge | notch")
      ->required();
  cmd->add_option("--grid", *grid_text, "grid size WxH");
  cmd->add_option("--frames", *frames, "number of frames");
  cmd->add_option("--amplitude", *amplitude, "final displacement scale");
  cmd->add_option("--spacing", *spacing, "sample spacing");
  cmd->add_option("--out", *out, "output directory (default: ./<scenario>)");
  cmd->callback([=]() {
    scenario_params params;
    params.amplitude = *amplitude;
    const std::filesystem::path dir = out->empty() ? *scenario : *out;
    const auto manifest = run_generate(
        *scenario, parse_grid(*grid_text, *spacing), *frames, params, dir);
    std::cout << "wrote " << manifest.string() << "\n";
  });
}

void add_strain(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "strain", "dump per-frame strain fields as CSV");
  auto input = std::make_shared<std::string>();
  auto frame = std::make_shared<std::string>("all");
  auto out = std::make_shared<std::string>();
  cmd->add_option("--input", *input, "manifest path")->required();
  cmd->add_option("--frame,--frames", *frame, "frame index or 'all'");
  cmd->add_option("--out", *out, "output directory")->required();
  cmd->callback([=]() {
    const sequence seq = load_sequence(*input);
    const auto picks =
        parse_frames(*frame, static_cast<int>(seq.frames.size()));
    std::filesystem::create_directories(*out);
    for (int f : picks) {
      if (f < 0 || f >= static_cast<int>(seq.frames.size()))
        throw error("frame " + std::to_string(f) +
                    " out of range, sequence has " +
                    std::to_string(seq.frames.size()) + " frames");
      const strain_frame sf = compute_strain_frame(seq.frames[f]);
      char name[32];
      std::snprintf(name, sizeof(name), "strain_f%03d.csv", f);
      write_file(std::filesystem::path(*out) / name, strain_frame_csv(sf));
    }
    std::cout << "frames=" << picks.size() << " out=" << *out << "\n";
  });
}

void add_track(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "track", "build the tracking graph and write graph.json");
  auto input = std::make_shared<std::string>();
  auto it = std::make_shared<int>();
  auto ih = std::make_shared<int>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--input", *input, "manifest path")->required();
  cmd->add_option("--it", *it, "threshold index, 1..4")->required();
  cmd->add_option("--ih", *ih, "persistence index, 0..3")->required();
  cmd->add_option("--out", *out, "output directory")->required();
  cmd->callback([=]() {
    pipeline_cache cache = pipeline_cache::build(load_sequence(*input));
    const auto& fields = cache.fields_for(*ih);
    double tau, h;
    thresholds(*it, *ih, cache.p95_by_ih[*ih], tau, h);
    std::vector<std::vector<region>> by_frame;
    int next_id = 0;
    for (std::size_t f = 0; f < fields.size(); ++f) {
      by_frame.push_back(superlevel_components(
          fields[f], cache.seq.grid, tau, static_cast<int>(f), next_id));
      next_id += static_cast<int>(by_frame.back().size());
    }
    const tracking_graph graph = build_tracking_graph(by_frame);
    std::filesystem::create_directories(*out);
    write_file(std::filesystem::path(*out) / "graph.json",
               tracking_graph_json(graph));
    write_file(std::filesystem::path(*out) / "regions.jsonl",
               regions_jsonl(graph.regions));
    int births = 0, deaths = 0;
    for (auto b : graph.birth) births += b;
    for (auto d : graph.death) deaths += d;
    std::cout << "frames=" << graph.frame_count
              << " regions=" << graph.regions.size() << " births=" << births
              << " merges=" << graph.merge_event_count()
              << " splits=" << graph.split_event_count()
              << " deaths=" << deaths << "\n";
  });
}

void add_sankey(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "sankey", "render a tracking graph JSON as an SVG diagram");
  auto input = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--input", *input, "graph.json path")->required();
  cmd->add_option("--out", *out, "output SVG path")->required();
  cmd->callback([=]() {
    const tracking_graph graph =
        parse_tracking_graph_json(read_file(*input));
    const sankey_layout layout = layout_graph(graph, layout_config{});
    const std::filesystem::path path(*out);
    if (path.has_parent_path())
      std::filesystem::create_directories(path.parent_path());
    write_file(path, emit_svg(layout));
    std::cout << "wrote " << path.string() << "\n";
  });
}

void add_lic(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "lic", "render tensor LIC rasters for selected frames");
  auto input = std::make_shared<std::string>();
  auto frame = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto config = std::make_shared<lic_config>();
  cmd->add_option("--input", *input, "manifest path")->required();
  cmd->add_option("--frame,--frames", *frame, "frame index or 'all'")
      ->required();
  cmd->add_option("--out", *out, "output directory")->required();
  cmd->add_option("--seed", config->noise_seed, "noise seed");
  cmd->add_option("--kernel", config->kernel_half_length,
                  "kernel half length, px");
  cmd->add_option("--step", config->step, "integration step, px");
  cmd->add_option("--supersample", config->supersample,
                  "subsamples per pixel (square count)");
  cmd->add_option("--scale", config->output_scale, "output px per sample");
  cmd->callback([=]() {
    const sequence seq = load_sequence(*input);
    const auto picks =
        parse_frames(*frame, static_cast<int>(seq.frames.size()));
    const auto colormap = layout_config::default_colormap();
    for (int f : picks) {
      const lic_outputs files =
          run_lic_frame(seq, f, *config, colormap, *out);
      std::cout << "wrote " << files.pgm_path.string() << " "
                << files.ppm_path.string() << "\n";
    }
  });
}

void add_pipeline(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "pipeline", "run strain -> filter -> track -> sankey end to end");
  auto config = std::make_shared<run_config>();
  auto input = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--input", *input, "manifest path")->required();
  cmd->add_option("--it", config->threshold_index, "threshold index, 1..4")
      ->required();
  cmd->add_option("--ih", config->persistence_index,
                  "persistence index, 0..3")
      ->required();
  cmd->add_option("--out", *out, "output directory")->required();
  cmd->add_flag("--dump-strain", config->dump_strain,
                "write per-frame strain CSVs");
  cmd->add_flag("--dump-regions", config->dump_regions,
                "write regions.jsonl");
  cmd->add_flag("--dump-graph", config->dump_graph, "write graph.json");
  cmd->add_flag("--dump-layout", config->dump_layout, "write layout.json");
  cmd->callback([=]() {
    config->input_manifest = *input;
    config->output_dir = *out;
    std::cout << run_pipeline(*config).line() << "\n";
  });
}

void add_sweep(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "sweep", "run the pipeline over the threshold/persistence grid");
  auto input = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto it_only = std::make_shared<int>(0);
  auto ih_only = std::make_shared<int>(-1);
  cmd->add_option("--input", *input, "manifest path")->required();
  cmd->add_option("--out", *out, "output directory")->required();
  cmd->add_option("--it", *it_only, "restrict to one threshold index");
  cmd->add_option("--ih", *ih_only, "restrict to one persistence index");
  cmd->callback([=]() {
    run_config config;
    config.input_manifest = *input;
    config.output_dir = *out;
    const sweep_result result = run_sweep(config, *it_only, *ih_only);
    for (const pipeline_summary& cell : result.cells)
      std::cout << cell.line() << "\n";
    std::cout << "cells=" << result.cells.size()
              << " failures=" << result.failures.size()
              << " index=" << result.index_path.string() << "\n";
    if (!result.failures.empty()) {
      for (const std::string& f : result.failures)
        std::cerr << "error: " << f << "\n";
      throw error("sweep finished with " +
                  std::to_string(result.failures.size()) + " failed cells");
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"strainflow: strain field tracking and visualization"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "read option defaults from a TOML/INI file; flags win");
  add_generate(app);
  add_strain(app);
  add_track(app);
  add_sankey(app);
  add_lic(app);
  add_pipeline(app);
  add_sweep(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
