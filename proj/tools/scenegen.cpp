// scenegen generate|render|info|serve
#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "scenegen/batch.hpp"
#include "scenegen/render.hpp"

using namespace scenegen;

namespace {

void log_line(const std::string& msg) { std::cerr << msg << std::endl; }

struct GenerateArgs {
  std::string config;
  std::optional<double> duration;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> world;
  std::optional<int> captureEvery;
  std::optional<int> maxRejections;
  std::string actionSource;
  std::string profile;
  int jobs = 1;
  int timeoutMs = protocol::kDefaultTimeoutMs;
  bool skipExisting = false;
};

int cmd_generate(const GenerateArgs& a) {
  BatchConfig cfg;
  try {
    cfg = load_batch_config(a.config);
    if (a.duration) cfg.duration = *a.duration;
    if (a.runs) cfg.runsPerScenario = *a.runs;
    if (a.seed) cfg.baseSeed = *a.seed;
    if (a.out) cfg.out = *a.out;
    if (a.world) cfg.world = *a.world;
    if (a.captureEvery) cfg.captureEveryNSteps = *a.captureEvery;
    if (a.maxRejections) cfg.maxRejections = *a.maxRejections;
    if (a.profile == "test") cfg.apply_test_profile();
    else if (!a.profile.empty() && a.profile != "default") throw ConfigFileError("unknown profile '" + a.profile + "'");
    cfg.validate();
  } catch (const std::exception& e) {
    log_line(std::string("error: ") + e.what());
    return 1;
  }

  std::vector<dsl::CheckedProgram> progs;
  if (const std::string diags = check_scenarios(cfg, progs); !diags.empty()) {
    std::cerr << diags;
    return 1;
  }

  BatchOptions opts;
  opts.jobs = a.jobs;
  opts.skipExisting = a.skipExisting;
  opts.log = log_line;
  opts.run.timeoutMs = a.timeoutMs;
  BatchResult result;
  try {
    if (!a.actionSource.empty()) opts.run.actionSource = protocol::parse_endpoint(a.actionSource);
    fs::create_directories(cfg.out);
    result = run_batch(cfg, progs, opts);
  } catch (const std::exception& e) {
    log_line(std::string("error: ") + e.what());
    return 1;
  }
  std::cout << result.summary() << std::endl;
  return result.failed() == 0 ? 0 : 2;
}

int cmd_render(const std::string& run, int frame, const std::string& layerList, std::size_t camera,
               const std::string& out) {
  std::set<Layer> layers;
  std::stringstream ss(layerList);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) layers.insert(parse_layer(item));
  const RunReader reader(run);
  const Image img = render_frame(reader, frame, layers, camera);
  io::write_file(out, img.ppm());
  log_line("wrote " + out);
  return 0;
}

int cmd_info(const std::string& path) {
  std::cout << format_stats(dataset_stats(open_dataset(path)));
  return 0;
}

int cmd_serve(const std::string& scenario, const std::string& listen, const std::string& worldPath, int sessions,
              int timeoutMs) {
  std::vector<dsl::CheckedProgram> progs;
  BatchConfig cfg;
  cfg.scenarios = {scenario};
  if (const std::string diags = check_scenarios(cfg, progs); !diags.empty()) {
    std::cerr << diags;
    return 1;
  }
  const WorldModel world = world_for(progs.front(), scenario, worldPath);
  protocol::Listener listener(protocol::parse_endpoint(listen));
  std::cout << "listening " << listener.endpoint().str() << std::endl;
  protocol::ServerOptions opts;
  opts.timeoutMs = timeoutMs;
  opts.log = log_line;
  protocol::StepServer server(progs.front(), world, listener, opts);
  for (int n = 0; sessions <= 0 || n < sessions; ++n) {
    try {
      const auto sum = server.serve();
      log_line("session done: " + std::to_string(sum.steps) + " steps, bye " + sum.byeReason);
    } catch (const std::exception& e) {
      log_line(std::string("session failed: ") + e.what());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-driven synthetic driving dataset generator"};
  app.require_subcommand(1);

  GenerateArgs g;
  auto* gen = app.add_subcommand("generate", "Run every scenario of a batch config and write datasets");
  gen->add_option("config", g.config, "Batch config JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--duration", g.duration, "Seconds per run");
  gen->add_option("--runs", g.runs, "Runs per scenario");
  gen->add_option("--seed", g.seed, "Base seed");
  gen->add_option("--out", g.out, "Output dataset directory");
  gen->add_option("--world", g.world, "World JSON for every scenario");
  gen->add_option("--capture-every", g.captureEvery, "Capture every N simulation steps");
  gen->add_option("--max-rejections", g.maxRejections, "Rejection sampling budget per scene");
  gen->add_option("--action-source", g.actionSource, "Drive behaviors through a step server (tcp://host:port)");
  gen->add_option("--profile", g.profile, "'test' renders every camera at 160x90");
  gen->add_option("--jobs", g.jobs, "Parallel runs")->check(CLI::PositiveNumber);
  gen->add_option("--timeout-ms", g.timeoutMs, "Step server reply timeout");
  gen->add_flag("--skip-existing", g.skipExisting, "Keep complete runs already on disk");

  std::string renderRun, renderOut, layers = "boxes2d";
  int renderFrame = 0;
  std::size_t camera = 0;
  auto* ren = app.add_subcommand("render", "Render annotation layers of one frame to a PPM");
  ren->add_option("run", renderRun, "Run directory")->required()->check(CLI::ExistingDirectory);
  ren->add_option("frame", renderFrame, "Frame index")->required();
  ren->add_option("--layers", layers, "Comma list of boxes2d, boxes3d, depth, semseg, lidar-bev");
  ren->add_option("--camera", camera, "Camera index");
  ren->add_option("-o,--out", renderOut, "Output PPM")->required();

  std::string infoPath;
  auto* info = app.add_subcommand("info", "Summarize a dataset directory");
  info->add_option("dataset", infoPath, "Dataset directory")->required()->check(CLI::ExistingDirectory);

  std::string serveScenario, listen = "127.0.0.1:7878", serveWorld;
  int sessions = 0, serveTimeout = protocol::kDefaultTimeoutMs;
  auto* serve = app.add_subcommand("serve", "Serve behaviors of one scenario over the step protocol");
  serve->add_option("scenario", serveScenario, "Scenario file")->required()->check(CLI::ExistingFile);
  serve->add_option("--listen", listen, "host:port (port 0 picks a free port)");
  serve->add_option("--world", serveWorld, "World JSON overriding the scenario's own");
  serve->add_option("--sessions", sessions, "Exit after this many sessions (0 = never)");
  serve->add_option("--timeout-ms", serveTimeout, "Per-message timeout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(g);
    if (*ren) return cmd_render(renderRun, renderFrame, layers, camera, renderOut);
    if (*info) return cmd_info(infoPath);
    if (*serve) return cmd_serve(serveScenario, listen, serveWorld, sessions, serveTimeout);
  } catch (const std::exception& e) {
    log_line(std::string("error: ") + e.what());
    return 1;
  }
  return 0;
}
