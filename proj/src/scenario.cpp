#include "coexist/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <set>

#include "binary_io.hpp"
#include "coexist/checksum.hpp"
#include "coexist/errors.hpp"

namespace coexist::scenario {

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::bs: return "bs";
    case NodeKind::ue: return "ue";
    case NodeKind::radar: return "radar";
  }
  return "?";
}

namespace {

bool is_zero(const Vec3& v) { return v.x == 0.0 && v.y == 0.0 && v.z == 0.0; }

bool finite(const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

std::string node_path(std::size_t i) { return "nodes[" + std::to_string(i) + "]"; }

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(field, "must be positive and finite");
}

}  // namespace

void Scenario::validate() const {
  require_positive(carrier_hz_cellular, "carrier_hz_cellular");
  require_positive(carrier_hz_radar, "carrier_hz_radar");
  require_positive(sample_rate_hz, "sample_rate_hz");
  require_positive(ship_speed_mps, "ship_speed_mps");
  if (!(noise_power >= 0.0) || !std::isfinite(noise_power)) {
    throw ValidationError("noise_power", "must be >= 0 and finite");
  }
  if (!(pathloss_exponent >= 0.0) || !std::isfinite(pathloss_exponent)) {
    throw ValidationError("pathloss_exponent", "must be >= 0 and finite");
  }

  std::set<std::string> ids;
  int n_bs = 0, n_radar = 0, n_ue = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    const auto path = node_path(i);
    if (n.id.empty()) throw ValidationError(path + ".id", "must not be empty");
    if (!ids.insert(n.id).second) {
      throw ValidationError(path + ".id", "duplicate node id '" + n.id + "'");
    }
    if (!finite(n.position0)) throw ValidationError(path + ".position", "must be finite");
    if (!finite(n.velocity)) throw ValidationError(path + ".velocity", "must be finite");
    if (!(n.position0.z > 0.0)) throw ValidationError(path + ".position.z", "must be above ground (> 0)");
    switch (n.kind) {
      case NodeKind::bs: ++n_bs; break;
      case NodeKind::ue: ++n_ue; break;
      case NodeKind::radar: ++n_radar; break;
    }
    if (n.kind != NodeKind::radar && !is_zero(n.velocity)) {
      throw ValidationError(path + ".velocity", "bs and ue nodes are static");
    }
    if (n.kind == NodeKind::radar &&
        std::abs(n.velocity.norm() - ship_speed_mps) > 1e-6 * ship_speed_mps) {
      throw ValidationError(path + ".velocity",
                            "radar speed must equal ship_speed_mps (" + std::to_string(ship_speed_mps) + ")");
    }
  }
  if (n_bs != 1) throw ValidationError("nodes", "exactly one bs node required, found " + std::to_string(n_bs));
  if (n_radar != 1) {
    throw ValidationError("nodes", "exactly one radar node required, found " + std::to_string(n_radar));
  }
  if (n_ue < 1) throw ValidationError("nodes", "at least one ue node required");
}

const Node& Scenario::bs() const {
  for (const auto& n : nodes)
    if (n.kind == NodeKind::bs) return n;
  throw ValidationError("nodes", "no bs node");
}

const Node& Scenario::radar() const {
  for (const auto& n : nodes)
    if (n.kind == NodeKind::radar) return n;
  throw ValidationError("nodes", "no radar node");
}

std::vector<const Node*> Scenario::ues() const {
  std::vector<const Node*> out;
  for (const auto& n : nodes)
    if (n.kind == NodeKind::ue) out.push_back(&n);
  return out;
}

const Node& Scenario::node(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return n;
  throw UsageError("scenario has no node '" + id + "'");
}

std::string Scenario::hash() const { return to_hex(sha256(to_yaml(*this))); }

Scenario default_scenario() {
  Scenario s;
  s.nodes.push_back({"bs", NodeKind::bs, {0.0, 0.0, 3.0}, {}});
  const double h = 86.60254037844386;
  const Vec3 ring[6] = {{100.0, 0.0, 1.0},  {50.0, h, 1.0},   {-50.0, h, 1.0},
                        {-100.0, 0.0, 1.0}, {-50.0, -h, 1.0}, {50.0, -h, 1.0}};
  for (int i = 0; i < 6; ++i) {
    s.nodes.push_back({"ue" + std::to_string(i + 1), NodeKind::ue, ring[i], {}});
  }
  s.nodes.push_back({"ship", NodeKind::radar, {500.0, 1000.0, 3.0}, {0.0, -kDefaultShipSpeedMps, 0.0}});
  return s;
}

namespace {

template <typename T>
T scalar_as(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ValidationError(path, "wrong type");
  }
}

Vec3 vec3_at(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence() || n.size() != 3) throw ValidationError(path, "expected [x, y, z]");
  return {scalar_as<double>(n[0], path + "[0]"), scalar_as<double>(n[1], path + "[1]"),
          scalar_as<double>(n[2], path + "[2]")};
}

NodeKind kind_from(const std::string& s, const std::string& path) {
  if (s == "bs") return NodeKind::bs;
  if (s == "ue") return NodeKind::ue;
  if (s == "radar") return NodeKind::radar;
  throw ValidationError(path, "unknown node kind '" + s + "' (expected bs, ue or radar)");
}

void read_optional(const YAML::Node& root, const char* key, double& out) {
  if (root[key]) out = scalar_as<double>(root[key], key);
}

}  // namespace

Scenario parse_scenario(const std::string& yaml_text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("scenario " + source + ": parse error: " + e.what());
  }
  if (!root.IsMap()) throw ConfigError("scenario " + source + ": top level must be a mapping");

  Scenario s;
  s.nodes.clear();
  if (root["name"]) s.name = scalar_as<std::string>(root["name"], "name");
  read_optional(root, "carrier_hz_cellular", s.carrier_hz_cellular);
  read_optional(root, "carrier_hz_radar", s.carrier_hz_radar);
  read_optional(root, "sample_rate_hz", s.sample_rate_hz);
  read_optional(root, "noise_power", s.noise_power);
  read_optional(root, "pathloss_exponent", s.pathloss_exponent);
  read_optional(root, "ship_speed_mps", s.ship_speed_mps);

  const auto nodes = root["nodes"];
  if (!nodes || !nodes.IsSequence()) throw ValidationError("nodes", "required sequence missing");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto path = node_path(i);
    const auto& n = nodes[i];
    if (!n.IsMap()) throw ValidationError(path, "expected a mapping");
    Node node;
    if (!n["id"]) throw ValidationError(path + ".id", "required");
    node.id = scalar_as<std::string>(n["id"], path + ".id");
    if (!n["kind"]) throw ValidationError(path + ".kind", "required");
    node.kind = kind_from(scalar_as<std::string>(n["kind"], path + ".kind"), path + ".kind");
    if (!n["position"]) throw ValidationError(path + ".position", "required");
    node.position0 = vec3_at(n["position"], path + ".position");
    if (n["velocity"]) {
      node.velocity = vec3_at(n["velocity"], path + ".velocity");
    } else if (node.kind == NodeKind::radar) {
      node.velocity = {0.0, -s.ship_speed_mps, 0.0};  // due south
    }
    s.nodes.push_back(std::move(node));
  }
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(e.field(), std::string("scenario ") + source + ": " +
                                         std::string(e.what()).substr(e.field().size() + 2));
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const IoError&) {
    throw ConfigError("scenario file not found or unreadable: " + path);
  }
  return parse_scenario(text, path);
}

namespace {

void emit_vec(YAML::Emitter& e, const Vec3& v) {
  e << YAML::Flow << YAML::BeginSeq << v.x << v.y << v.z << YAML::EndSeq;
}

}  // namespace

std::string to_yaml(const Scenario& s) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << s.name;
  e << YAML::Key << "carrier_hz_cellular" << YAML::Value << s.carrier_hz_cellular;
  e << YAML::Key << "carrier_hz_radar" << YAML::Value << s.carrier_hz_radar;
  e << YAML::Key << "sample_rate_hz" << YAML::Value << s.sample_rate_hz;
  e << YAML::Key << "noise_power" << YAML::Value << s.noise_power;
  e << YAML::Key << "pathloss_exponent" << YAML::Value << s.pathloss_exponent;
  e << YAML::Key << "ship_speed_mps" << YAML::Value << s.ship_speed_mps;
  e << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
  for (const auto& n : s.nodes) {
    e << YAML::BeginMap;
    e << YAML::Key << "id" << YAML::Value << n.id;
    e << YAML::Key << "kind" << YAML::Value << to_string(n.kind);
    e << YAML::Key << "position" << YAML::Value;
    emit_vec(e, n.position0);
    e << YAML::Key << "velocity" << YAML::Value;
    emit_vec(e, n.velocity);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

Vec3 position_at(const Node& node, double t_s) { return node.position0 + node.velocity * t_s; }

}  // namespace coexist::scenario
