#include <wmapf/wmapf.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

using namespace wmapf;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kInfeasible = 2;

fs::path output_dir()
{
  const char* env = std::getenv("WMAPF_OUTPUT_DIR");
  return env && *env ? fs::path(env) : fs::current_path();
}

/// Relative output names land in the default output directory.
fs::path resolve(const std::string& name)
{
  const fs::path p(name);
  return p.is_absolute() || p.has_parent_path() ? p : output_dir() / p;
}

void ensure_parent(const fs::path& p)
{
  if (p.has_parent_path())
    fs::create_directories(p.parent_path());
}

std::ofstream open_out(const fs::path& p)
{
  ensure_parent(p);
  std::ofstream os(p);
  if (!os)
    throw ModelError("cannot write " + p.string());
  return os;
}

Layout with_robots(Layout l, int robots)
{
  if (robots < 1 || robots > static_cast<int>(l.agents.size()))
    throw ModelError("--robots must be in [1, " + std::to_string(l.agents.size()) + "]");
  l.agents.resize(robots);
  return l;
}

std::vector<double> ttf_minutes(const fs::path& csv)
{
  std::ifstream is(csv);
  std::vector<double> out;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line))
  {
    if (line.empty() || line[0] == '#')
      continue;
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    const std::string v = line.substr(a + 1, b - a - 1);
    out.push_back(v == "inf" ? std::numeric_limits<double>::infinity() : std::stod(v));
  }
  return out;
}

struct Flags
{
  // generate-layout
  std::string tmpl = "1row";
  int shelves = 0;
  int positions = 0;
  int workstations = 0;
  int waiting = 0;
  // generate-scenario
  int orders = 10;
  std::uint64_t seed = 0;
  double mean_items = 2.5;
  int max_items = 4;
  // plan
  std::string layout, scenario;
  int robots = 0;
  bool no_penalty = false, two_criteria = false, exhaustive = false, sequential = false;
  bool no_waiting = false;
  double margin = 0.0;
  double tick = 0.1;
  std::string model = "dynamics";
  int cap = 0;
  // simulate
  std::string plan, noise = "pert", trace;
  std::optional<double> delta;
  int seeds = 100;
  double dt = 0.05;
  // report
  std::string runs;
  std::string out;
};

int generate_layout_cmd(const Flags& f)
{
  auto p = layout_template(f.tmpl);
  if (f.shelves)
    p.shelves = f.shelves;
  if (f.positions)
    p.positions = f.positions;
  if (f.workstations)
    p.workstations = f.workstations;
  if (f.waiting)
    p.waiting_places = f.waiting;
  const auto l = generate_layout(p);
  const auto out = resolve(f.out.empty() ? "layout.json" : f.out);
  ensure_parent(out);
  write_json_file(out, to_json(l));
  std::cout << "layout " << out.string() << ": " << l.graph.size() << " nodes, " << l.shelves().size()
            << " shelves, " << l.workstations.size() << " workstations, " << l.agents.size() << " agents\n";
  return kOk;
}

int generate_scenario_cmd(const Flags& f)
{
  const auto l = load_layout(f.layout);
  ScenarioParams sp;
  sp.mean_items = f.mean_items;
  sp.max_items = f.max_items;
  const auto orders = generate_scenario(l, f.orders, f.seed, sp);
  const auto out = resolve(f.out.empty() ? "scenario.json" : f.out);
  ensure_parent(out);
  write_json_file(out, to_json(orders, l));
  std::cout << "# seed " << f.seed << "\nscenario " << out.string() << ": " << orders.size() << " orders\n";
  return kOk;
}

int plan_cmd(const Flags& f)
{
  const auto base = load_layout(f.layout);
  const auto l = with_robots(base, f.robots ? f.robots : static_cast<int>(base.agents.size()));
  const auto orders = load_scenario(f.scenario, l);

  GraphOptions go;
  go.tick = from_seconds(f.tick);
  go.model = duration_model_from(f.model);
  PlannerOptions po;
  po.margin = from_seconds(f.margin);
  po.reserve_waiting = !f.no_waiting;
  po.sequential = f.sequential;
  po.search.penalty = !f.no_penalty;
  po.search.two_criteria = f.two_criteria;
  po.search.first_solution = !f.exhaustive;
  po.cap = f.cap;

  PlanningContext ctx(l, go);
  const auto p = plan(ctx, assign(orders, l, ctx.heuristic(), f.cap), po);
  const auto out = resolve(f.out.empty() ? "plan.json" : f.out);
  ensure_parent(out);
  write_json_file(out, p.to_json(l));

  const InstanceReport r = report_of(out.stem().string(), p);
  write_csv(std::cout, std::span<const InstanceReport>(&r, 1));
  if (!p.feasible)
  {
    std::cerr << "infeasible: " << p.failure << '\n';
    return kInfeasible;
  }
  return kOk;
}

int simulate_cmd(const Flags& f)
{
  const auto loaded = load_plan(f.plan);
  const auto& p = loaded.plan;
  if (!p.feasible)
    throw ModelError("cannot simulate an infeasible plan");
  if (f.delta && from_seconds(*f.delta) != p.options.margin)
    throw ModelError("plan was made with margin " + std::to_string(to_seconds(p.options.margin))
                     + " s; replan with --margin to simulate another one");
  NoiseModel noise;
  if (f.noise == "pert")
    noise.kind = NoiseModel::Kind::pert;
  else if (f.noise != "none")
    throw ModelError("unknown noise '" + f.noise + "'");
  ExecutionOptions eo;
  eo.dt = from_seconds(f.dt);

  const Simulator sim(loaded.layout, p.graph);
  const auto out = resolve(f.out.empty() ? "ttf.csv" : f.out);
  auto os = open_out(out);
  std::cout << "# seed " << f.seed << '\n';
  os << "seed,ttf_min,robot_a,robot_b\n";
  std::vector<double> ttf;
  for (int k = 0; k < f.seeds; ++k)
  {
    noise.seed = f.seed + static_cast<std::uint64_t>(k);
    const auto tr = sim.execute(p, noise, eo);
    const double m = tr.collision ? to_seconds(tr.collision->t) / 60.0 : std::numeric_limits<double>::infinity();
    ttf.push_back(m);
    os << noise.seed << ',';
    if (tr.collision)
      os << m << ',' << loaded.layout.agents[tr.collision->a].id << ',' << loaded.layout.agents[tr.collision->b].id;
    else
      os << "inf,,";
    os << '\n';
    if (k == 0 && !f.trace.empty())
    {
      auto ts = open_out(resolve(f.trace));
      sim.write_jsonl(ts, tr, std::chrono::seconds(1));
    }
  }
  int failed = 0;
  for (double x : ttf)
    failed += !std::isinf(x);
  std::cout << "simulated " << f.seeds << " runs, " << failed << " collided";
  if (!ttf.empty())
    std::cout << ", median ttf " << median(ttf) << " min";
  std::cout << '\n';
  return kOk;
}

/// Every plan file in the directory becomes a row; a sibling `<stem>.ttf.csv`
/// supplies the median time to failure and the seed whose run is drawn.
int report_cmd(const Flags& f)
{
  const fs::path dir(f.runs);
  if (!fs::is_directory(dir))
    throw ModelError("no such directory " + dir.string());
  const fs::path out = f.out.empty() ? dir : resolve(f.out);
  fs::create_directories(out);

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<InstanceReport> rows;
  for (const auto& file : files)
  {
    const json j = read_json_file(file);
    if (!j.is_object() || !j.contains("robots") || !j.contains("tasks"))
      continue;
    const auto loaded = plan_from_json(j);
    auto r = report_of(file.stem().string(), loaded.plan);
    const fs::path ttf = file.parent_path() / (file.stem().string() + ".ttf.csv");
    std::optional<ExecutionTrace> trace;
    const Simulator sim(loaded.layout, loaded.plan.graph);
    if (fs::exists(ttf))
    {
      const auto v = ttf_minutes(ttf);
      if (!v.empty())
        r.time_to_failure = median(v);
    }
    if (loaded.plan.feasible)
      trace = sim.execute(loaded.plan);
    rows.push_back(r);

    auto svg = open_out(out / (file.stem().string() + ".svg"));
    SvgMap(loaded.layout).write(svg, sim.graph(), loaded.plan, trace ? &sim : nullptr, trace ? &*trace : nullptr);
  }
  auto csv = open_out(out / "report.csv");
  write_csv(csv, rows);
  write_csv(std::cout, rows);
  return kOk;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Warehouse multi-robot planning toolkit"};
  app.require_subcommand(1);
  Flags f;

  auto* gl = app.add_subcommand("generate-layout", "Write a templated warehouse layout");
  gl->add_option("--template", f.tmpl)->check(CLI::IsMember({"1row", "2row", "3row", "large"}));
  gl->add_option("--shelves", f.shelves)->check(CLI::PositiveNumber);
  gl->add_option("--positions", f.positions, "Pick positions per aisle")->check(CLI::PositiveNumber);
  gl->add_option("--workstations", f.workstations)->check(CLI::PositiveNumber);
  gl->add_option("--waiting", f.waiting, "Waiting places, one robot each")->check(CLI::PositiveNumber);
  gl->add_option("--out", f.out);

  auto* gs = app.add_subcommand("generate-scenario", "Draw random orders for a layout");
  gs->add_option("--layout", f.layout)->required();
  gs->add_option("--orders", f.orders)->check(CLI::NonNegativeNumber);
  gs->add_option("--seed", f.seed);
  gs->add_option("--mean-items", f.mean_items);
  gs->add_option("--max-items", f.max_items);
  gs->add_option("--out", f.out);

  auto* pl = app.add_subcommand("plan", "Assign and plan a scenario");
  pl->add_option("--layout", f.layout)->required();
  pl->add_option("--scenario", f.scenario)->required();
  pl->add_option("--robots", f.robots, "Use the first N agents of the layout");
  pl->add_flag("--no-penalty", f.no_penalty);
  pl->add_flag("--two-criteria", f.two_criteria);
  pl->add_flag("--exhaustive", f.exhaustive, "Search until optimality is proven");
  pl->add_flag("--sequential", f.sequential, "Plan each leg on its own");
  pl->add_flag("--no-waiting-reservation", f.no_waiting, "Do not reserve the way back to waiting places");
  pl->add_option("--margin", f.margin, "Reservation time margin (s)")->check(CLI::NonNegativeNumber);
  pl->add_option("--tick", f.tick, "Arc duration grid (s)")->check(CLI::PositiveNumber);
  pl->add_option("--duration-model", f.model)->check(CLI::IsMember({"dynamics", "constant", "no-inertia"}));
  pl->add_option("--cap", f.cap, "Most robots per order, 0 for none")->check(CLI::NonNegativeNumber);
  pl->add_option("--out", f.out);

  auto* sm = app.add_subcommand("simulate", "Execute a plan under duration noise");
  sm->add_option("--plan", f.plan)->required();
  sm->add_option("--noise", f.noise)->check(CLI::IsMember({"none", "pert"}));
  sm->add_option("--delta", f.delta, "Expected planning margin (s)");
  sm->add_option("--seeds", f.seeds)->check(CLI::PositiveNumber);
  sm->add_option("--seed", f.seed, "First seed");
  sm->add_option("--dt", f.dt, "Collision check period (s)")->check(CLI::PositiveNumber);
  sm->add_option("--trace", f.trace, "JSON lines trace of the first run");
  sm->add_option("--out", f.out);

  auto* rp = app.add_subcommand("report", "Quartile table and maps for a run directory");
  rp->add_option("--runs", f.runs)->required();
  rp->add_option("--out", f.out, "Output directory, defaults to the run directory");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kError;
  }

  try
  {
    if (*gl)
      return generate_layout_cmd(f);
    if (*gs)
      return generate_scenario_cmd(f);
    if (*pl)
      return plan_cmd(f);
    if (*sm)
      return simulate_cmd(f);
    return report_cmd(f);
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
}
