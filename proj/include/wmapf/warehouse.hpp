#ifndef WMAPF__WAREHOUSE_HPP
#define WMAPF__WAREHOUSE_HPP

#include <wmapf/geometry.hpp>
#include <wmapf/kinematics.hpp>
#include <wmapf/time.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace wmapf {

using json = nlohmann::json;

//==============================================================================
class ModelError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ModelError
{
public:
  using ModelError::ModelError;
};

enum class NodeKind { shelf, workstation, waiting, charging, junction };

inline const char* to_string(NodeKind k)
{
  switch (k)
  {
    case NodeKind::shelf: return "shelf";
    case NodeKind::workstation: return "workstation";
    case NodeKind::waiting: return "waiting";
    case NodeKind::charging: return "charging";
    case NodeKind::junction: return "junction";
  }
  return "junction";
}

inline NodeKind node_kind_from(const std::string& s)
{
  if (s == "shelf") return NodeKind::shelf;
  if (s == "workstation") return NodeKind::workstation;
  if (s == "waiting") return NodeKind::waiting;
  if (s == "charging") return NodeKind::charging;
  if (s == "junction") return NodeKind::junction;
  throw ParseError("unknown node kind '" + s + "'");
}

struct WarehouseNode
{
  int id = 0;
  Vec2 position;
  NodeKind kind = NodeKind::junction;
  bool turnable = false;
  /// Heading the robot must have to pick up or drop off here.
  std::optional<double> action_yaw;
};

/// Directed segment between two nodes, referenced by node index.
struct WarehouseArc
{
  int from = 0;
  int to = 0;
  double length = 0.0;
  double speed_limit = 0.0;
};

//==============================================================================
class WarehouseGraph
{
public:
  WarehouseGraph() = default;

  WarehouseGraph(std::vector<WarehouseNode> nodes, std::vector<WarehouseArc> arcs)
  : _nodes(std::move(nodes)), _arcs(std::move(arcs))
  {
    reindex();
  }

  const std::vector<WarehouseNode>& nodes() const { return _nodes; }
  const std::vector<WarehouseArc>& arcs() const { return _arcs; }
  const WarehouseNode& node(int index) const { return _nodes.at(index); }
  std::size_t size() const { return _nodes.size(); }

  std::optional<int> index_of(int id) const
  {
    const auto it = _index.find(id);
    if (it == _index.end())
      return std::nullopt;
    return it->second;
  }

  int require_index(int id, const std::string& what) const
  {
    if (const auto i = index_of(id))
      return *i;
    throw ModelError(what + ": unknown node id " + std::to_string(id));
  }

  /// Indices of outgoing arcs of a node.
  const std::vector<int>& out_arcs(int node) const { return _out.at(node); }

  /// Nodes joined to `node` by an arc in either direction, sorted.
  const std::vector<int>& neighbors(int node) const { return _adjacent.at(node); }

  std::optional<int> find_arc(int from, int to) const
  {
    for (int a : _out.at(from))
      if (_arcs[a].to == to)
        return a;
    return std::nullopt;
  }

  std::vector<int> nodes_of_kind(NodeKind kind) const
  {
    std::vector<int> out;
    for (std::size_t i = 0; i < _nodes.size(); ++i)
      if (_nodes[i].kind == kind)
        out.push_back(static_cast<int>(i));
    return out;
  }

  /// Weak connectivity over all arcs.
  bool connected() const
  {
    if (_nodes.empty())
      return true;
    std::vector<char> seen(_nodes.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty())
    {
      const int u = stack.back();
      stack.pop_back();
      for (int w : _adjacent[u])
      {
        if (!seen[w])
        {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == _nodes.size();
  }

private:
  void reindex()
  {
    _index.clear();
    _out.assign(_nodes.size(), {});
    _adjacent.assign(_nodes.size(), {});
    for (std::size_t i = 0; i < _nodes.size(); ++i)
      _index[_nodes[i].id] = static_cast<int>(i);
    for (std::size_t a = 0; a < _arcs.size(); ++a)
    {
      const auto& arc = _arcs[a];
      if (arc.from < 0 || arc.to < 0
          || arc.from >= static_cast<int>(_nodes.size())
          || arc.to >= static_cast<int>(_nodes.size()))
        continue;
      _out[arc.from].push_back(static_cast<int>(a));
      _adjacent[arc.from].push_back(arc.to);
      _adjacent[arc.to].push_back(arc.from);
    }
    for (auto& adj : _adjacent)
    {
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
  }

  std::vector<WarehouseNode> _nodes;
  std::vector<WarehouseArc> _arcs;
  std::unordered_map<int, int> _index;
  std::vector<std::vector<int>> _out;
  std::vector<std::vector<int>> _adjacent;
};

//==============================================================================
struct AgentSpec
{
  int id = 0;
  int start = 0;    // node index
  int waiting = 0;  // node index
  std::optional<double> start_yaw;
  /// Convex CCW polygon in the robot frame, x pointing forward.
  Polygon footprint;
  double padding = 0.05;
  KinematicLimits limits;

  /// Footprint with padding applied, still in the robot frame.
  Polygon padded_footprint() const { return offset(footprint, padding); }
};

inline Polygon rectangle_footprint(double length, double width)
{
  const double hx = 0.5 * length;
  const double hy = 0.5 * width;
  return {{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}};
}

struct Layout
{
  WarehouseGraph graph;
  std::vector<AgentSpec> agents;
  std::vector<int> workstations;  // node indices
  KinematicLimits limits;

  std::vector<int> shelves() const { return graph.nodes_of_kind(NodeKind::shelf); }
};

//==============================================================================
enum class OrderDirection
{
  pickup,    // shelves -> workstation
  delivery,  // workstation -> shelves
};

struct OrderItem
{
  int node = 0;  // shelf node index
  Duration duration{0};
  Duration workstation_duration{0};
};

struct Order
{
  int id = 0;
  Duration release{0};
  OrderDirection direction = OrderDirection::pickup;
  std::vector<OrderItem> items;
};

/// One object moved between a shelf and the order's workstation.
struct Task
{
  int order = 0;  // order id
  int item = 0;
  int pickup = 0;    // node index
  int delivery = 0;  // node index
  Duration pickup_duration{0};
  Duration delivery_duration{0};
  bool workstation_is_pickup = false;
};

inline std::vector<Task> tasks_of(const Order& order, int workstation)
{
  std::vector<Task> out;
  for (std::size_t j = 0; j < order.items.size(); ++j)
  {
    const auto& it = order.items[j];
    Task t;
    t.order = order.id;
    t.item = static_cast<int>(j);
    if (order.direction == OrderDirection::pickup)
    {
      t.pickup = it.node;
      t.delivery = workstation;
      t.pickup_duration = it.duration;
      t.delivery_duration = it.workstation_duration;
    }
    else
    {
      t.pickup = workstation;
      t.delivery = it.node;
      t.pickup_duration = it.workstation_duration;
      t.delivery_duration = it.duration;
      t.workstation_is_pickup = true;
    }
    out.push_back(t);
  }
  return out;
}

//==============================================================================
// Validation

namespace detail {

inline void require(bool ok, const std::string& msg)
{
  if (!ok)
    throw ModelError(msg);
}

} // namespace detail

inline void validate(const WarehouseGraph& g)
{
  using detail::require;
  std::unordered_map<int, int> seen;
  for (std::size_t i = 0; i < g.nodes().size(); ++i)
  {
    const auto& n = g.nodes()[i];
    require(seen.emplace(n.id, static_cast<int>(i)).second,
      "duplicate node id " + std::to_string(n.id));
    require(std::isfinite(n.position.x) && std::isfinite(n.position.y),
      "node " + std::to_string(n.id) + " has a non-finite position");
  }
  for (const auto& a : g.arcs())
  {
    const int n = static_cast<int>(g.size());
    require(a.from >= 0 && a.from < n && a.to >= 0 && a.to < n,
      "arc references a missing node");
    const auto& from = g.node(a.from);
    const auto& to = g.node(a.to);
    const std::string name = "arc " + std::to_string(from.id) + "->" + std::to_string(to.id);
    require(a.from != a.to, name + " is a self-loop");
    require(a.length > 0.0, name + " has non-positive length");
    require(std::abs(a.length - distance(from.position, to.position)) <= 0.01,
      name + " length differs from endpoint distance by more than 1 cm");
    require(a.speed_limit > 0.0 && std::isfinite(a.speed_limit),
      name + " has non-positive speed limit");
  }
  require(g.connected(), "warehouse graph is disconnected");
}

inline void validate(const Layout& layout)
{
  using detail::require;
  validate(layout.graph);
  layout.limits.validate();
  std::vector<int> waiting;
  for (const auto& a : layout.agents)
  {
    const std::string name = "agent " + std::to_string(a.id);
    const int n = static_cast<int>(layout.graph.size());
    require(a.start >= 0 && a.start < n, name + ": start node missing");
    require(a.waiting >= 0 && a.waiting < n, name + ": waiting node missing");
    require(is_convex_ccw(a.footprint), name + ": footprint must be a convex CCW polygon");
    require(a.padding >= 0.0, name + ": negative padding");
    require(a.limits == layout.limits, name + ": all agents must share kinematic limits");
    waiting.push_back(a.waiting);
  }
  std::sort(waiting.begin(), waiting.end());
  require(std::adjacent_find(waiting.begin(), waiting.end()) == waiting.end(),
    "waiting nodes must be pairwise distinct across agents");
  std::vector<int> ids;
  for (const auto& a : layout.agents)
    ids.push_back(a.id);
  std::sort(ids.begin(), ids.end());
  require(std::adjacent_find(ids.begin(), ids.end()) == ids.end(), "duplicate agent id");
  for (int w : layout.workstations)
  {
    require(w >= 0 && w < static_cast<int>(layout.graph.size()), "workstation node missing");
    require(layout.graph.node(w).kind == NodeKind::workstation,
      "workstation " + std::to_string(layout.graph.node(w).id)
      + " is not a workstation node");
  }
}

inline void validate(const Order& order, const Layout& layout)
{
  using detail::require;
  const std::string name = "order " + std::to_string(order.id);
  require(!order.items.empty(), name + " has no items");
  require(order.release >= Duration::zero(), name + " has a negative release date");
  for (const auto& it : order.items)
  {
    require(it.node >= 0 && it.node < static_cast<int>(layout.graph.size()),
      name + " references a missing node");
    require(layout.graph.node(it.node).kind == NodeKind::shelf,
      name + " item location " + std::to_string(layout.graph.node(it.node).id)
      + " is not a shelf");
    require(it.duration >= Duration::zero() && it.workstation_duration >= Duration::zero(),
      name + " has a negative action duration");
  }
}

//==============================================================================
// JSON

inline json limits_to_json(const KinematicLimits& l)
{
  const auto load = [](const LoadLimits& x) {
    return json{{"accel", x.accel}, {"decel", x.decel},
                {"angular_accel", x.angular_accel}, {"angular_decel", x.angular_decel}};
  };
  return json{{"max_speed", l.max_speed}, {"max_angular_speed", l.max_angular_speed},
              {"unloaded", load(l.unloaded)}, {"loaded", load(l.loaded)}};
}

inline KinematicLimits limits_from_json(const json& j)
{
  KinematicLimits l;
  l.max_speed = j.value("max_speed", l.max_speed);
  l.max_angular_speed = j.value("max_angular_speed", l.max_angular_speed);
  const auto load = [](const json& x, LoadLimits d) {
    d.accel = x.value("accel", d.accel);
    d.decel = x.value("decel", d.decel);
    d.angular_accel = x.value("angular_accel", d.angular_accel);
    d.angular_decel = x.value("angular_decel", d.angular_decel);
    return d;
  };
  if (j.contains("unloaded"))
    l.unloaded = load(j.at("unloaded"), l.unloaded);
  if (j.contains("loaded"))
    l.loaded = load(j.at("loaded"), l.loaded);
  return l;
}

inline json to_json(const Layout& layout)
{
  const auto& g = layout.graph;
  json nodes = json::array();
  for (const auto& n : g.nodes())
  {
    json jn{{"id", n.id}, {"x", n.position.x}, {"y", n.position.y},
            {"kind", to_string(n.kind)}, {"turnable", n.turnable}};
    if (n.action_yaw)
      jn["action_yaw"] = *n.action_yaw;
    nodes.push_back(std::move(jn));
  }
  json arcs = json::array();
  for (const auto& a : g.arcs())
    arcs.push_back({{"from", g.node(a.from).id}, {"to", g.node(a.to).id},
                    {"speed_limit", a.speed_limit}});
  json agents = json::array();
  for (const auto& a : layout.agents)
  {
    json fp = json::array();
    for (const auto& p : a.footprint)
      fp.push_back({p.x, p.y});
    json ja{{"id", a.id}, {"start", g.node(a.start).id},
            {"waiting", g.node(a.waiting).id}, {"footprint", fp},
            {"padding", a.padding}, {"limits", limits_to_json(a.limits)}};
    if (a.start_yaw)
      ja["start_yaw"] = *a.start_yaw;
    agents.push_back(std::move(ja));
  }
  json ws = json::array();
  for (int w : layout.workstations)
    ws.push_back(g.node(w).id);
  return json{{"nodes", nodes}, {"arcs", arcs}, {"agents", agents},
              {"workstations", ws}, {"limits", limits_to_json(layout.limits)}};
}

/// Parse and validate a layout document. Arc lengths are derived from the
/// node coordinates; an explicit "length" is checked against them.
inline Layout layout_from_json(const json& j)
{
  Layout layout;
  std::vector<WarehouseNode> nodes;
  std::vector<WarehouseArc> arcs;
  try
  {
    for (const auto& jn : j.at("nodes"))
    {
      WarehouseNode n;
      n.id = jn.at("id").get<int>();
      n.position = {jn.at("x").get<double>(), jn.at("y").get<double>()};
      n.kind = node_kind_from(jn.value("kind", std::string("junction")));
      n.turnable = jn.value("turnable", false);
      if (jn.contains("action_yaw") && !jn.at("action_yaw").is_null())
        n.action_yaw = jn.at("action_yaw").get<double>();
      nodes.push_back(n);
    }
    std::unordered_map<int, int> index;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      index.emplace(nodes[i].id, static_cast<int>(i));
    const auto lookup = [&](int id, const char* what) {
      const auto it = index.find(id);
      if (it == index.end())
        throw ModelError(std::string(what) + " references unknown node " + std::to_string(id));
      return it->second;
    };

    for (const auto& ja : j.at("arcs"))
    {
      WarehouseArc a;
      a.from = lookup(ja.at("from").get<int>(), "arc");
      a.to = lookup(ja.at("to").get<int>(), "arc");
      const double d = distance(nodes[a.from].position, nodes[a.to].position);
      a.length = ja.contains("length") ? ja.at("length").get<double>() : d;
      a.speed_limit = ja.value("speed_limit", 1.0);
      arcs.push_back(a);
    }
    layout.graph = WarehouseGraph(std::move(nodes), std::move(arcs));

    if (j.contains("limits"))
      layout.limits = limits_from_json(j.at("limits"));

    if (j.contains("agents"))
    {
      for (const auto& ja : j.at("agents"))
      {
        AgentSpec a;
        a.id = ja.at("id").get<int>();
        a.start = lookup(ja.at("start").get<int>(), "agent start");
        a.waiting = lookup(ja.value("waiting", ja.at("start").get<int>()), "agent waiting");
        if (ja.contains("start_yaw"))
          a.start_yaw = ja.at("start_yaw").get<double>();
        if (ja.contains("footprint"))
        {
          for (const auto& p : ja.at("footprint"))
            a.footprint.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        }
        else
        {
          a.footprint = rectangle_footprint(
            ja.value("length", 0.9), ja.value("width", 0.6));
        }
        a.padding = ja.value("padding", 0.05);
        a.limits = ja.contains("limits") ? limits_from_json(ja.at("limits")) : layout.limits;
        layout.agents.push_back(std::move(a));
      }
    }
    if (j.contains("workstations"))
      for (const auto& w : j.at("workstations"))
        layout.workstations.push_back(lookup(w.get<int>(), "workstation"));
  }
  catch (const json::exception& e)
  {
    throw ParseError(std::string("layout: ") + e.what());
  }
  validate(layout);
  return layout;
}

inline json read_json_file(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open " + path.string());
  try
  {
    return json::parse(in);
  }
  catch (const json::exception& e)
  {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& j)
{
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw ModelError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline Layout load_layout(const std::filesystem::path& path)
{
  return layout_from_json(read_json_file(path));
}

inline const char* to_string(OrderDirection d)
{
  return d == OrderDirection::pickup ? "pickup" : "delivery";
}

inline json to_json(const std::vector<Order>& orders, const Layout& layout)
{
  json jo = json::array();
  for (const auto& o : orders)
  {
    json items = json::array();
    for (const auto& it : o.items)
    {
      json ji{{"node", layout.graph.node(it.node).id},
              {"duration", to_seconds(it.duration)}};
      if (it.workstation_duration > Duration::zero())
        ji["workstation_duration"] = to_seconds(it.workstation_duration);
      items.push_back(std::move(ji));
    }
    jo.push_back({{"id", o.id}, {"release", to_seconds(o.release)},
                  {"direction", to_string(o.direction)}, {"items", items}});
  }
  return json{{"orders", jo}};
}

inline std::vector<Order> orders_from_json(const json& j, const Layout& layout)
{
  std::vector<Order> out;
  try
  {
    for (const auto& jo : j.at("orders"))
    {
      Order o;
      o.id = jo.at("id").get<int>();
      o.release = from_seconds(jo.value("release", 0.0));
      const auto dir = jo.value("direction", std::string("pickup"));
      if (dir == "pickup")
        o.direction = OrderDirection::pickup;
      else if (dir == "delivery")
        o.direction = OrderDirection::delivery;
      else
        throw ParseError("order " + std::to_string(o.id) + ": unknown direction '" + dir + "'");
      for (const auto& ji : jo.at("items"))
      {
        OrderItem it;
        it.node = layout.graph.require_index(ji.at("node").get<int>(), "order item");
        it.duration = from_seconds(ji.value("duration", 0.0));
        it.workstation_duration = from_seconds(ji.value("workstation_duration", 0.0));
        o.items.push_back(it);
      }
      validate(o, layout);
      out.push_back(std::move(o));
    }
  }
  catch (const json::exception& e)
  {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  return out;
}

inline std::vector<Order> load_scenario(const std::filesystem::path& path, const Layout& layout)
{
  return orders_from_json(read_json_file(path), layout);
}

//==============================================================================
// Scenario generation

struct ScenarioParams
{
  double mean_items = 2.5;
  int max_items = 4;
  Duration item_duration = std::chrono::seconds(10);
  Duration workstation_duration{0};
  Duration release_spacing{0};
};

/// Continuation probability q of a geometric count on {1, 2, ...} such that
/// min(X, max) has the requested mean: E[min(X, m)] = sum_{j<m} q^j.
inline double inflated_geometric_continuation(double mean, int max)
{
  if (max < 1 || mean < 1.0 || mean > max)
    throw ModelError("item count distribution: need 1 <= mean <= max");
  const auto expected = [max](double q) {
    double s = 0.0, p = 1.0;
    for (int j = 0; j < max; ++j)
    {
      s += p;
      p *= q;
    }
    return s;
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 100; ++i)
  {
    const double mid = 0.5 * (lo + hi);
    (expected(mid) < mean ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Draw `n_orders` orders. Item counts follow a geometric law truncated at
/// `max_items` with the overflow mass placed on the maximum. Shelves and
/// directions are uniform. Pure function of (layout, n_orders, seed).
inline std::vector<Order> generate_scenario(
  const Layout& layout, int n_orders, std::uint64_t seed,
  const ScenarioParams& params = {})
{
  if (n_orders < 0)
    throw ModelError("generate_scenario: negative order count");
  const auto shelves = layout.shelves();
  if (n_orders > 0 && shelves.empty())
    throw ModelError("generate_scenario: layout has no shelf nodes");
  if (n_orders > 0 && layout.workstations.empty())
    throw ModelError("generate_scenario: layout has no workstations");

  const double q = inflated_geometric_continuation(params.mean_items, params.max_items);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, shelves.empty() ? 0 : shelves.size() - 1);

  std::vector<Order> out;
  for (int i = 0; i < n_orders; ++i)
  {
    Order o;
    o.id = i;
    o.release = params.release_spacing * i;
    o.direction = unit(rng) < 0.5 ? OrderDirection::pickup : OrderDirection::delivery;
    int count = 1;
    while (count < params.max_items && unit(rng) < q)
      ++count;
    for (int k = 0; k < count; ++k)
      o.items.push_back({shelves[pick(rng)], params.item_duration, params.workstation_duration});
    out.push_back(std::move(o));
  }
  return out;
}

//==============================================================================
// Layout templates

struct LayoutParams
{
  /// Number of shelf blocks stacked along the aisles; rows - 1 cross
  /// corridors separate them.
  int rows = 1;
  int shelves = 5;          // aisles, one per shelf rack
  int positions = 12;       // pick positions per aisle, split across rows
  int workstations = 2;
  int waiting_places = 4;
  double spacing = 1.2;     // node pitch along corridors and aisles (m)
  double spur = 1.5;        // distance of workstation / waiting spurs (m)
  double speed_limit = 0.2;
  double robot_length = 0.9;
  double robot_width = 0.6;
  double padding = 0.05;
  KinematicLimits limits;
};

/// Parameters of the named templates: "1row", "2row", "3row", "large".
inline LayoutParams layout_template(const std::string& name)
{
  LayoutParams p;
  if (name == "1row")
    p.rows = 1;
  else if (name == "2row")
    p.rows = 2;
  else if (name == "3row")
    p.rows = 3;
  else if (name == "large")
  {
    p.rows = 3;
    p.shelves = 10;
    p.workstations = 5;
    p.waiting_places = 10;
  }
  else
    throw ModelError("unknown layout template '" + name + "'");
  return p;
}

/// Corridor-and-aisle warehouse. A main corridor runs along x at y = 0 with
/// workstation and waiting spurs hanging below it; one single-lane aisle per
/// shelf rack runs north to a top corridor, crossed by rows - 1 intermediate
/// corridors. Shelf nodes come first in the node list, ordered by aisle and
/// then by position along the aisle, so scenarios drawn with the same seed
/// land on corresponding shelves for every row count.
inline Layout generate_layout(const LayoutParams& p)
{
  if (p.rows < 1 || p.shelves < 1 || p.positions < p.rows || p.workstations < 1
      || p.waiting_places < 0 || p.spacing <= 0.0 || p.spur <= 0.0)
    throw ModelError("generate_layout: invalid parameters");

  const double s = p.spacing;
  const double north = std::numbers::pi / 2.0;
  const double south = -std::numbers::pi / 2.0;

  std::vector<WarehouseNode> nodes;
  std::vector<WarehouseArc> arcs;
  const auto add_node = [&](Vec2 pos, NodeKind kind, bool turnable,
                            std::optional<double> yaw = std::nullopt) {
    WarehouseNode n;
    n.id = static_cast<int>(nodes.size());
    n.position = pos;
    n.kind = kind;
    n.turnable = turnable;
    n.action_yaw = yaw;
    nodes.push_back(n);
    return n.id;
  };
  const auto link = [&](int a, int b) {
    const double d = distance(nodes[a].position, nodes[b].position);
    arcs.push_back({a, b, d, p.speed_limit});
    arcs.push_back({b, a, d, p.speed_limit});
  };

  // Split the pick positions of an aisle into row blocks.
  std::vector<int> block(p.rows, p.positions / p.rows);
  for (int r = 0; r < p.positions % p.rows; ++r)
    ++block[r];

  // Aisle levels: y index of every pick position and of every corridor.
  // Level 0 is the main corridor.
  std::vector<int> pick_levels;
  std::vector<int> corridor_levels{0};
  int level = 0;
  for (int r = 0; r < p.rows; ++r)
  {
    for (int k = 0; k < block[r]; ++k)
      pick_levels.push_back(++level);
    corridor_levels.push_back(++level);
  }

  const double pitch = 2.0 * s;
  const auto aisle_x = [&](int i) { return i * pitch; };

  // Shelf nodes first, in canonical order.
  std::vector<std::vector<int>> column(p.shelves);
  for (int i = 0; i < p.shelves; ++i)
  {
    column[i].assign(level + 1, -1);
    for (int lv : pick_levels)
      column[i][lv] = add_node({aisle_x(i), lv * s}, NodeKind::shelf, false, north);
  }

  // Corridor rows. The main corridor extends sideways to host the spurs.
  const int left_ext = (p.waiting_places + 1) / 2;
  const int right_ext = p.waiting_places / 2;
  const int span = 2 * (p.shelves - 1) + 1;
  std::vector<int> main_corridor;
  for (int lv : corridor_levels)
  {
    const bool is_main = lv == 0;
    const int lo = is_main ? -left_ext : 0;
    const int hi = is_main ? span - 1 + right_ext : span - 1;
    int prev = -1;
    for (int j = lo; j <= hi; ++j)
    {
      const int id = add_node({j * s, lv * s}, NodeKind::junction, true);
      if (j >= 0 && j <= span - 1 && j % 2 == 0)
        column[j / 2][lv] = id;
      if (prev >= 0)
        link(prev, id);
      prev = id;
      if (is_main)
        main_corridor.push_back(id);
    }
  }

  // Aisles.
  for (int i = 0; i < p.shelves; ++i)
    for (int lv = 0; lv < level; ++lv)
      link(column[i][lv], column[i][lv + 1]);

  // Workstations sit below the aisle span, waiting places on the extensions.
  std::vector<int> workstations;
  for (int w = 0; w < p.workstations; ++w)
  {
    const int j = p.workstations == 1 ? span / 2 : (w * (span - 1)) / (p.workstations - 1);
    const int anchor = main_corridor[left_ext + j];
    const Vec2 at = nodes[anchor].position + Vec2{0.0, -p.spur};
    const int ws = add_node(at, NodeKind::workstation, false, south);
    link(anchor, ws);
    workstations.push_back(ws);
  }
  std::vector<int> waiting;
  for (int k = 0; k < p.waiting_places; ++k)
  {
    // Alternate left / right, nearest to the aisles first.
    const int side = k % 2;
    const int step = k / 2;
    const int anchor = side == 0
      ? main_corridor[left_ext - 1 - step]
      : main_corridor[left_ext + span + step];
    const Vec2 at = nodes[anchor].position + Vec2{0.0, -p.spur};
    const int wl = add_node(at, NodeKind::waiting, false);
    link(anchor, wl);
    waiting.push_back(wl);
  }

  Layout layout;
  layout.graph = WarehouseGraph(std::move(nodes), std::move(arcs));
  layout.workstations = workstations;
  layout.limits = p.limits;
  for (int k = 0; k < p.waiting_places; ++k)
  {
    AgentSpec a;
    a.id = k;
    a.start = waiting[k];
    a.waiting = waiting[k];
    a.start_yaw = north;
    a.footprint = rectangle_footprint(p.robot_length, p.robot_width);
    a.padding = p.padding;
    a.limits = p.limits;
    layout.agents.push_back(std::move(a));
  }
  validate(layout);
  return layout;
}

} // namespace wmapf

#endif // WMAPF__WAREHOUSE_HPP
