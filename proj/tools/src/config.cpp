#include "quasiopt_cli/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "quasiopt_cli/output.hpp"

namespace quasiopt::cli {

namespace {

std::string describe(Position pos, const std::string& message) {
  std::ostringstream os;
  os << "config:" << pos.line << ":" << pos.column << ": " << message;
  return os.str();
}

struct Token {
  std::string text;
  Position pos;
};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double parse_double(const Token& tok) {
  double x = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  if (!tok.text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last || tok.text.empty())
    throw ConfigError(tok.pos, "expected a number, got '" + tok.text + "'");
  return x;
}

long parse_integer(const Token& tok) {
  long x = 0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last || tok.text.empty())
    throw ConfigError(tok.pos, "expected an integer, got '" + tok.text + "'");
  return x;
}

bool parse_bool(const Token& tok) {
  const std::string s = lower(tok.text);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigError(tok.pos, "expected true or false, got '" + tok.text + "'");
}

Vector parse_vector(const Token& tok) {
  std::string s = tok.text;
  int offset = 0;
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw ConfigError(tok.pos, "unterminated '['");
    s = s.substr(1, s.size() - 2);
    offset = 1;
  }
  std::vector<double> vals;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ',')) ++i;
    if (i >= s.size()) break;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != ',') ++i;
    vals.push_back(parse_double(
        Token{s.substr(start, i - start), Position{tok.pos.line, tok.pos.column + offset + static_cast<int>(start)}}));
  }
  Vector v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t k = 0; k < vals.size(); ++k) v(static_cast<Eigen::Index>(k)) = vals[k];
  return v;
}

std::string trim(const std::string& s, std::size_t& lead) {
  std::size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  std::size_t e = s.size();
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  lead = b;
  return s.substr(b, e - b);
}

using Handler = std::function<void(RunConfig&, const Token&)>;

const std::map<std::string, std::map<std::string, Handler>>& handlers() {
  static const std::map<std::string, std::map<std::string, Handler>> table = {
      {"system",
       {
           {"name", [](RunConfig& c, const Token& t) {
              const std::string s = lower(t.text);
              if (s != "planar-rigid-body" && s != "point-mass-lq")
                throw ConfigError(t.pos, "unknown system '" + t.text + "' (planar-rigid-body, point-mass-lq)");
              c.system.name = s;
            }},
           {"mass", [](RunConfig& c, const Token& t) { c.system.params.mass = parse_double(t); }},
           {"inertia", [](RunConfig& c, const Token& t) { c.system.params.inertia = parse_double(t); }},
           {"offset", [](RunConfig& c, const Token& t) { c.system.params.offset = parse_double(t); }},
           {"cost", [](RunConfig& c, const Token& t) {
              const std::string s = lower(t.text);
              if (s == "quadratic") c.system.cost.kind = CostSpec::Kind::quadratic;
              else if (s == "constant") c.system.cost.kind = CostSpec::Kind::constant;
              else throw ConfigError(t.pos, "cost must be quadratic or constant");
            }},
           {"cost_value", [](RunConfig& c, const Token& t) { c.system.cost.value = parse_double(t); }},
           {"frame_defect", [](RunConfig& c, const Token& t) { c.system.frame_defect = parse_bool(t); }},
           {"diff", [](RunConfig& c, const Token& t) {
              const std::string s = lower(t.text);
              if (s == "dual") c.system.diff = DiffScheme::dual;
              else if (s == "central") c.system.diff = DiffScheme::central;
              else throw ConfigError(t.pos, "diff must be dual or central");
            }},
       }},
      {"state",
       {
           {"q", [](RunConfig& c, const Token& t) { c.state.q = parse_vector(t); }},
           {"y", [](RunConfig& c, const Token& t) { c.state.y = parse_vector(t); }},
           {"ydot", [](RunConfig& c, const Token& t) { c.state.ydot = parse_vector(t); }},
           {"p", [](RunConfig& c, const Token& t) { c.state.p = parse_vector(t); }},
           {"ptilde", [](RunConfig& c, const Token& t) { c.state.ptilde = parse_vector(t); }},
       }},
      {"integrator",
       {
           {"method", [](RunConfig& c, const Token& t) {
              const std::string s = lower(t.text);
              if (s == "rk4") c.integrator.method = IntegratorMethod::rk4;
              else if (s == "rk45") c.integrator.method = IntegratorMethod::rk45;
              else throw ConfigError(t.pos, "method must be rk4 or rk45");
            }},
           {"dt", [](RunConfig& c, const Token& t) { c.integrator.dt = parse_double(t); }},
           {"rtol", [](RunConfig& c, const Token& t) { c.integrator.rtol = parse_double(t); }},
           {"atol", [](RunConfig& c, const Token& t) { c.integrator.atol = parse_double(t); }},
           {"t0", [](RunConfig& c, const Token& t) { c.integrator.t0 = parse_double(t); }},
           {"tf", [](RunConfig& c, const Token& t) { c.integrator.tf = parse_double(t); }},
           {"save_every", [](RunConfig& c, const Token& t) {
              const long k = parse_integer(t);
              if (k < 1) throw ConfigError(t.pos, "save_every must be >= 1");
              c.integrator.save_every = static_cast<int>(k);
            }},
       }},
      {"boundary",
       {
           {"q0", [](RunConfig& c, const Token& t) { c.boundary->q0 = parse_vector(t); }},
           {"y0", [](RunConfig& c, const Token& t) { c.boundary->y0 = parse_vector(t); }},
           {"qf", [](RunConfig& c, const Token& t) { c.boundary->qf = parse_vector(t); }},
           {"yf", [](RunConfig& c, const Token& t) { c.boundary->yf = parse_vector(t); }},
           {"guess", [](RunConfig& c, const Token& t) { c.boundary->guess = parse_vector(t); }},
           {"max_iter", [](RunConfig& c, const Token& t) {
              const long k = parse_integer(t);
              if (k < 0) throw ConfigError(t.pos, "max_iter must be >= 0");
              c.boundary->newton.max_iter = static_cast<int>(k);
            }},
           {"residual_tol", [](RunConfig& c, const Token& t) { c.boundary->newton.residual_tol = parse_double(t); }},
           {"fd_step", [](RunConfig& c, const Token& t) { c.boundary->newton.fd_step = parse_double(t); }},
       }},
      {"output",
       {
           {"path", [](RunConfig& c, const Token& t) { c.output.path = t.text; }},
           {"format", [](RunConfig& c, const Token& t) {
              const std::string s = lower(t.text);
              if (s == "csv") c.output.format = OutputFormat::csv;
              else if (s == "jsonl") c.output.format = OutputFormat::jsonl;
              else throw ConfigError(t.pos, "format must be csv or jsonl");
            }},
       }},
      {"run",
       {
           {"command", [](RunConfig& c, const Token& t) {
              const auto cmd = parse_command(lower(t.text));
              if (!cmd) throw ConfigError(t.pos, "unknown command '" + t.text + "'");
              c.command = cmd;
            }},
           {"seed", [](RunConfig& c, const Token& t) {
              std::uint64_t x = 0;
              const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), x);
              if (ec != std::errc() || ptr != t.text.data() + t.text.size() || t.text.empty())
                throw ConfigError(t.pos, "seed must be a non-negative integer");
              c.seed = x;
            }},
       }},
  };
  return table;
}

std::string join(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v(i));
  }
  return s;
}

bool same_vec(const Vector& a, const Vector& b) { return a.size() == b.size() && (a.array() == b.array()).all(); }
bool same_opt(const std::optional<Vector>& a, const std::optional<Vector>& b) {
  return a.has_value() == b.has_value() && (!a || same_vec(*a, *b));
}

Position where(const RunConfig& cfg, const std::string& key) {
  const auto it = cfg.positions.find(key);
  return it == cfg.positions.end() ? Position{} : it->second;
}

}  // namespace

ConfigError::ConfigError(Position pos, const std::string& message)
    : std::runtime_error(describe(pos, message)), pos_(pos), detail_(message) {}

std::string to_string(Command c) {
  switch (c) {
    case Command::derive: return "derive";
    case Command::simulate: return "simulate";
    case Command::solve: return "solve";
    case Command::check: return "check";
  }
  return "?";
}

std::optional<Command> parse_command(const std::string& s) {
  if (s == "derive") return Command::derive;
  if (s == "simulate") return Command::simulate;
  if (s == "solve") return Command::solve;
  if (s == "check") return Command::check;
  return std::nullopt;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  std::set<std::string> seen_sections;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::size_t cut = raw.size();
    for (std::size_t i = 0; i < raw.size(); ++i)
      if (raw[i] == '#' || raw[i] == ';') {
        cut = i;
        break;
      }
    std::size_t lead = 0;
    const std::string line = trim(raw.substr(0, cut), lead);
    if (line.empty()) continue;
    const int col = static_cast<int>(lead) + 1;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError({line_no, col}, "section header must end with ']'");
      std::size_t inner_lead = 0;
      section = lower(trim(line.substr(1, line.size() - 2), inner_lead));
      if (!handlers().count(section)) throw ConfigError({line_no, col + 1}, "unknown section [" + section + "]");
      if (!seen_sections.insert(section).second)
        throw ConfigError({line_no, col}, "duplicate section [" + section + "]");
      if (section == "boundary") cfg.boundary.emplace();
      cfg.positions[section] = {line_no, col};
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError({line_no, col}, "expected 'key = value'");
    if (section.empty()) throw ConfigError({line_no, col}, "key outside of any section");
    std::size_t key_lead = 0, val_lead = 0;
    const std::string key = lower(trim(line.substr(0, eq), key_lead));
    const std::string value = trim(line.substr(eq + 1), val_lead);
    if (key.empty()) throw ConfigError({line_no, col}, "missing key before '='");
    const auto& keys = handlers().at(section);
    const auto h = keys.find(key);
    if (h == keys.end()) throw ConfigError({line_no, col}, "unknown key '" + key + "' in [" + section + "]");
    const std::string full = section + "." + key;
    if (cfg.positions.count(full)) throw ConfigError({line_no, col}, "duplicate key '" + key + "'");
    const Position vpos{line_no, col + static_cast<int>(eq + 1 + val_lead)};
    if (value.empty()) throw ConfigError(vpos, "missing value for '" + key + "'");
    cfg.positions[full] = vpos;
    h->second(cfg, Token{value, vpos});
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError({0, 0}, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "[system]\n";
  os << "name = " << cfg.system.name << "\n";
  os << "mass = " << format_double(cfg.system.params.mass) << "\n";
  os << "inertia = " << format_double(cfg.system.params.inertia) << "\n";
  os << "offset = " << format_double(cfg.system.params.offset) << "\n";
  os << "cost = " << (cfg.system.cost.kind == CostSpec::Kind::constant ? "constant" : "quadratic") << "\n";
  os << "cost_value = " << format_double(cfg.system.cost.value) << "\n";
  os << "frame_defect = " << (cfg.system.frame_defect ? "true" : "false") << "\n";
  if (cfg.system.diff) os << "diff = " << (*cfg.system.diff == DiffScheme::dual ? "dual" : "central") << "\n";

  os << "\n[state]\n";
  const std::pair<const char*, const std::optional<Vector>*> state[] = {
      {"q", &cfg.state.q}, {"y", &cfg.state.y}, {"ydot", &cfg.state.ydot}, {"p", &cfg.state.p},
      {"ptilde", &cfg.state.ptilde}};
  for (const auto& [k, v] : state)
    if (*v) os << k << " = [" << join(**v) << "]\n";

  const IntegratorConfig& ic = cfg.integrator;
  os << "\n[integrator]\n";
  os << "method = " << (ic.method == IntegratorMethod::rk45 ? "rk45" : "rk4") << "\n";
  os << "dt = " << format_double(ic.dt) << "\n";
  os << "rtol = " << format_double(ic.rtol) << "\n";
  os << "atol = " << format_double(ic.atol) << "\n";
  os << "t0 = " << format_double(ic.t0) << "\n";
  os << "tf = " << format_double(ic.tf) << "\n";
  os << "save_every = " << ic.save_every << "\n";

  if (cfg.boundary) {
    const BoundaryConfig& b = *cfg.boundary;
    os << "\n[boundary]\n";
    os << "q0 = [" << join(b.q0) << "]\n";
    os << "y0 = [" << join(b.y0) << "]\n";
    os << "qf = [" << join(b.qf) << "]\n";
    os << "yf = [" << join(b.yf) << "]\n";
    if (b.guess.size()) os << "guess = [" << join(b.guess) << "]\n";
    os << "max_iter = " << b.newton.max_iter << "\n";
    os << "residual_tol = " << format_double(b.newton.residual_tol) << "\n";
    os << "fd_step = " << format_double(b.newton.fd_step) << "\n";
  }

  os << "\n[output]\n";
  if (!cfg.output.path.empty()) os << "path = " << cfg.output.path << "\n";
  os << "format = " << (cfg.output.format == OutputFormat::jsonl ? "jsonl" : "csv") << "\n";

  os << "\n[run]\n";
  if (cfg.command) os << "command = " << to_string(*cfg.command) << "\n";
  os << "seed = " << cfg.seed << "\n";
  return os.str();
}

bool same_config(const RunConfig& a, const RunConfig& b) {
  const auto& sa = a.system;
  const auto& sb = b.system;
  if (a.command != b.command || a.seed != b.seed) return false;
  if (sa.name != sb.name || sa.params.mass != sb.params.mass || sa.params.inertia != sb.params.inertia ||
      sa.params.offset != sb.params.offset || sa.cost.kind != sb.cost.kind || sa.cost.value != sb.cost.value ||
      sa.frame_defect != sb.frame_defect || sa.diff != sb.diff)
    return false;
  if (!same_opt(a.state.q, b.state.q) || !same_opt(a.state.y, b.state.y) || !same_opt(a.state.ydot, b.state.ydot) ||
      !same_opt(a.state.p, b.state.p) || !same_opt(a.state.ptilde, b.state.ptilde))
    return false;
  const auto& ia = a.integrator;
  const auto& ib = b.integrator;
  if (ia.method != ib.method || ia.dt != ib.dt || ia.rtol != ib.rtol || ia.atol != ib.atol || ia.t0 != ib.t0 ||
      ia.tf != ib.tf || ia.save_every != ib.save_every)
    return false;
  if (a.boundary.has_value() != b.boundary.has_value()) return false;
  if (a.boundary) {
    const auto& ba = *a.boundary;
    const auto& bb = *b.boundary;
    if (!same_vec(ba.q0, bb.q0) || !same_vec(ba.y0, bb.y0) || !same_vec(ba.qf, bb.qf) || !same_vec(ba.yf, bb.yf) ||
        !same_vec(ba.guess, bb.guess) || ba.newton.max_iter != bb.newton.max_iter ||
        ba.newton.residual_tol != bb.newton.residual_tol || ba.newton.fd_step != bb.newton.fd_step)
      return false;
  }
  return a.output.path == b.output.path && a.output.format == b.output.format;
}

MechanicalSystem build_system(const SystemConfig& cfg) {
  MechanicalSystem sys = cfg.name == "point-mass-lq"
                             ? point_mass_lq(cfg.cost)
                             : planar_rigid_body(cfg.params, RigidBodyOptions{cfg.cost, cfg.frame_defect});
  if (cfg.diff) {
    DiffConfig d = sys.diff();
    d.scheme = *cfg.diff;
    sys.set_diff(d);
  }
  return sys;
}

void validate(const RunConfig& cfg) {
  const bool solve = cfg.command == Command::solve;
  if (solve && !cfg.boundary) throw ConfigError({0, 0}, "command 'solve' needs a [boundary] section");
  if (!solve && cfg.boundary)
    throw ConfigError(where(cfg, "boundary"), "[boundary] is only allowed with command 'solve'");

  const SystemConfig& s = cfg.system;
  if (s.name == "planar-rigid-body") {
    if (!(s.params.mass > 0.0)) throw ConfigError(where(cfg, "system.mass"), "mass must be positive");
    if (!(s.params.inertia > 0.0)) throw ConfigError(where(cfg, "system.inertia"), "inertia must be positive");
    if (!std::isfinite(s.params.offset)) throw ConfigError(where(cfg, "system.offset"), "offset must be finite");
  }
  if (!std::isfinite(s.cost.value)) throw ConfigError(where(cfg, "system.cost_value"), "cost_value must be finite");

  const int n = s.name == "point-mass-lq" ? 2 : 3;
  const int m = s.name == "point-mass-lq" ? 1 : 2;
  auto check_len = [&](const std::optional<Vector>& v, const std::string& key, int len) {
    if (v && v->size() != len)
      throw ConfigError(where(cfg, key), key + " needs " + std::to_string(len) + " entries, got " +
                                             std::to_string(v->size()));
  };
  check_len(cfg.state.q, "state.q", n);
  check_len(cfg.state.y, "state.y", n);
  check_len(cfg.state.ydot, "state.ydot", m);
  check_len(cfg.state.p, "state.p", n);
  check_len(cfg.state.ptilde, "state.ptilde", n - m);
  if (cfg.boundary) {
    const BoundaryConfig& b = *cfg.boundary;
    const std::pair<const char*, const Vector*> req[] = {{"q0", &b.q0}, {"y0", &b.y0}, {"qf", &b.qf}, {"yf", &b.yf}};
    for (const auto& [k, v] : req) {
      const std::string key = std::string("boundary.") + k;
      if (!cfg.positions.count(key) && v->size() == 0)
        throw ConfigError(where(cfg, "boundary"), std::string("[boundary] is missing ") + k);
      check_len(*v, key, n);
    }
    if (b.guess.size() != 0) check_len(b.guess, "boundary.guess", 2 * n);
    if (!(b.newton.residual_tol > 0.0))
      throw ConfigError(where(cfg, "boundary.residual_tol"), "residual_tol must be positive");
    if (!(b.newton.fd_step > 0.0)) throw ConfigError(where(cfg, "boundary.fd_step"), "fd_step must be positive");
  }
  try {
    cfg.integrator.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(where(cfg, "integrator"), e.what());
  }
}

W1State<double> initial_state(const RunConfig& cfg, const MechanicalSystem& sys) {
  const int n = sys.n();
  const int m = sys.m();
  W1State<double> w{Vector::Zero(n), Vector::Zero(n), Vector::Zero(m), Vector::Zero(n), Vector::Zero(n - m)};
  if (sys.name() == "planar-rigid-body") w.y(0) = 1.0;
  if (cfg.state.q) w.q = *cfg.state.q;
  if (cfg.state.y) w.y = *cfg.state.y;
  if (cfg.state.ydot) w.ydot_a = *cfg.state.ydot;
  if (cfg.state.p) w.p = *cfg.state.p;
  if (cfg.state.ptilde) w.ptilde_alpha = *cfg.state.ptilde;
  return w;
}

}  // namespace quasiopt::cli
