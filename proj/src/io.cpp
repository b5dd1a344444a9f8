#include "ldg/io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#ifndef LDG_VERSION
#define LDG_VERSION "unknown"
#endif

namespace ldg {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return in;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s) {
  size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("not a number: '" + s + "'");
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used != s.size()) throw std::runtime_error("not a number: '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const double v = to_double(s);
  if (v != std::floor(v)) throw std::runtime_error("not an integer: '" + s + "'");
  return static_cast<int>(v);
}

std::string header(const MaterialParams& p) {
  std::ostringstream os;
  os << std::setprecision(17) << "k=" << p.k << " R=" << p.R << " a2=" << p.a2 << " b2=" << p.b2 << " c2=" << p.c2
     << " L=" << p.L << " M=" << p.M;
  return os.str();
}

// Parses "# key=value key=value ..." into a map.
std::map<std::string, std::string> parse_header(const std::string& line) {
  if (line.empty() || line[0] != '#') throw std::runtime_error("missing '#' header line");
  std::map<std::string, std::string> kv;
  std::stringstream ss(line.substr(1));
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

MaterialParams params_from_header(const std::map<std::string, std::string>& kv) {
  auto get = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error(std::string("header lacks ") + key);
    return it->second;
  };
  MaterialParams p;
  p.k = to_int(get("k"));
  p.R = to_double(get("R"));
  p.a2 = to_double(get("a2"));
  p.b2 = to_double(get("b2"));
  p.c2 = to_double(get("c2"));
  p.L = to_double(get("L"));
  p.M = to_double(get("M"));
  return p;
}

}  // namespace

void write_profile_csv(const std::string& path, const RadialProfile& p, const MaterialParams& params) {
  auto out = open_out(path);
  MaterialParams q = params;
  q.k = p.k;
  q.R = p.R;
  out << "# " << header(q) << " N=" << p.N() << "\n";
  out << "r,w0,w1,w2,w3,w4\n";
  for (int j = 0; j <= p.N(); ++j) {
    out << p.r[j];
    for (int i = 0; i < 5; ++i) out << ',' << p.w(i, j);
    out << '\n';
  }
}

RadialProfile read_profile_csv(const std::string& path, MaterialParams* params) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  const auto kv = parse_header(line);
  const MaterialParams p = params_from_header(kv);
  std::getline(in, line);
  if (line.rfind("r,w0", 0) != 0) throw std::runtime_error("unexpected column header in " + path);
  std::vector<std::array<double, 6>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 6) throw std::runtime_error("profile row with " + std::to_string(f.size()) + " fields");
    std::array<double, 6> row;
    for (int i = 0; i < 6; ++i) row[i] = to_double(f[i]);
    rows.push_back(row);
  }
  if (rows.size() < 2) throw std::runtime_error("profile has fewer than two rows");
  RadialProfile out = RadialProfile::zeros(static_cast<int>(rows.size()) - 1, p.R, p.k);
  for (size_t j = 0; j < rows.size(); ++j) {
    out.r[j] = rows[j][0];
    for (int i = 0; i < 5; ++i) out.w(i, j) = rows[j][i + 1];
  }
  if (params) *params = p;
  return out;
}

void write_perturbation_csv(const std::string& path, const PerturbationProfile& p, const MaterialParams& params) {
  auto out = open_out(path);
  MaterialParams q = params;
  q.k = p.k;
  q.R = p.R;
  out << "# " << header(q) << " N=" << p.N() << "\n";
  out << "r,a0,a1,b0,b1,b2\n";
  for (int j = 0; j <= p.N(); ++j) {
    out << p.r[j];
    for (int i = 0; i < 5; ++i) out << ',' << p.modes(i, j);
    out << '\n';
  }
}

void write_field_checkpoint(const std::string& path, const Field2D& f) {
  const auto& m = f.mesh();
  auto out = open_out(path);
  out << "# " << header(f.params()) << " nodes=" << m.num_nodes() << " triangles=" << m.num_triangles()
      << " h=" << m.h << " rings=" << m.rings << " grading=" << m.grading << "\n";
  out << "node,x,y,boundary,q11,q12,q13,q22,q23,q33\n";
  for (int i = 0; i < m.num_nodes(); ++i) {
    const Mat3 q = f.q(i).matrix();
    out << i << ',' << m.nodes[i].x() << ',' << m.nodes[i].y() << ',' << int(m.is_boundary[i]) << ',' << q(0, 0)
        << ',' << q(0, 1) << ',' << q(0, 2) << ',' << q(1, 1) << ',' << q(1, 2) << ',' << q(2, 2) << '\n';
  }
  out << "triangle,n0,n1,n2\n";
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    out << t << ',' << tr[0] << ',' << tr[1] << ',' << tr[2] << '\n';
  }
}

CheckpointData read_field_checkpoint(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  const auto kv = parse_header(line);
  const MaterialParams p = params_from_header(kv);
  auto count = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error(std::string("header lacks ") + key);
    return to_int(it->second);
  };
  const int nn = count("nodes"), nt = count("triangles");
  if (nn < 3 || nt < 1) throw std::runtime_error("checkpoint has an empty mesh");

  auto mesh = std::make_shared<DiskMesh>();
  mesh->R = p.R;
  if (kv.count("h")) mesh->h = to_double(kv.at("h"));
  if (kv.count("rings")) mesh->rings = to_int(kv.at("rings"));
  if (kv.count("grading")) mesh->grading = to_double(kv.at("grading"));
  mesh->nodes.resize(nn);
  mesh->is_boundary.assign(nn, 0);
  CheckpointData c;
  c.raw.resize(nn);

  std::getline(in, line);
  if (line.rfind("node,", 0) != 0) throw std::runtime_error("missing node block");
  for (int i = 0; i < nn; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated node block");
    const auto f = split(line);
    if (f.size() != 10) throw std::runtime_error("node row with " + std::to_string(f.size()) + " fields");
    if (to_int(f[0]) != i) throw std::runtime_error("node rows out of order");
    mesh->nodes[i] = Vec2(to_double(f[1]), to_double(f[2]));
    mesh->is_boundary[i] = static_cast<char>(to_int(f[3]) != 0);
    Mat3 q;
    q << to_double(f[4]), to_double(f[5]), to_double(f[6]), to_double(f[5]), to_double(f[7]), to_double(f[8]),
        to_double(f[6]), to_double(f[8]), to_double(f[9]);
    c.raw[i] = q;
  }
  std::getline(in, line);
  if (line.rfind("triangle,", 0) != 0) throw std::runtime_error("missing triangle block");
  mesh->triangles.resize(nt);
  for (int t = 0; t < nt; ++t) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated triangle block");
    const auto f = split(line);
    if (f.size() != 4) throw std::runtime_error("triangle row with " + std::to_string(f.size()) + " fields");
    for (int i = 0; i < 3; ++i) {
      const int v = to_int(f[i + 1]);
      if (v < 0 || v >= nn) throw std::runtime_error("triangle references a missing node");
      mesh->triangles[t][i] = v;
    }
  }
  for (int i = 0; i < nn; ++i)
    if (mesh->is_boundary[i]) {
      mesh->boundary_nodes.push_back(i);
      mesh->boundary_phi.push_back(std::atan2(mesh->nodes[i].y(), mesh->nodes[i].x()));
    }
  mesh->finalize();

  c.field = Field2D(mesh, p);
  for (int i = 0; i < nn; ++i) {
    if (!c.raw[i].allFinite()) throw std::runtime_error("non-finite tensor at node " + std::to_string(i));
    c.field.set_q(i, QTensor::project(c.raw[i]));
  }
  return c;
}

CheckReport check_checkpoint(const CheckpointData& c, double tol) {
  CheckReport rep;
  const auto& f = c.field;
  const auto& m = f.mesh();
  const MaterialParams& p = f.params();
  auto fail = [&](const std::string& s) {
    rep.ok = false;
    rep.failures.push_back(s);
  };
  try {
    p.validate();
  } catch (const std::exception& e) {
    fail(std::string("parameters: ") + e.what());
  }
  double max_asym = 0, max_trace = 0, max_bc = 0, beta_min = 1, beta_max = 0;
  for (int i = 0; i < m.num_nodes(); ++i) {
    const Mat3& q = c.raw[i];
    const double scale = 1.0 + q.norm();
    max_asym = std::max(max_asym, (q - q.transpose()).cwiseAbs().maxCoeff() / scale);
    max_trace = std::max(max_trace, std::abs(q.trace()) / scale);
    const double b = biaxiality(f.q(i));
    beta_min = std::min(beta_min, b);
    beta_max = std::max(beta_max, b);
  }
  for (size_t b = 0; b < m.boundary_nodes.size(); ++b) {
    const int i = m.boundary_nodes[b];
    max_bc = std::max(max_bc, (f.q(i) - boundary_data(m.boundary_phi[b], p)).norm());
  }
  const double sp = s_plus(p);
  if (max_asym > tol) fail("stored tensors are not symmetric");
  if (max_trace > tol) fail("stored tensors are not traceless");
  if (max_bc > tol * (1.0 + sp)) fail("boundary values differ from the k-radial data");
  if (m.boundary_nodes.empty()) fail("mesh has no boundary nodes");
  if (!(beta_min >= 0 && beta_max <= 1)) fail("biaxiality outside [0, 1]");
  rep.summary = {{"nodes", m.num_nodes()},       {"triangles", m.num_triangles()},
                 {"max_asymmetry", max_asym},    {"max_trace", max_trace},
                 {"max_boundary_error", max_bc}, {"beta_min", beta_min},
                 {"beta_max", beta_max},         {"energy", total_energy(f)}};
  return rep;
}

void write_glyph_csv(const std::string& path, const std::vector<Glyph>& glyphs) {
  auto out = open_out(path);
  out << "x,y,beta,l1,l2,l3,v1x,v1y,v1z,v2x,v2y,v2z,v3x,v3y,v3z\n";
  for (const auto& g : glyphs) {
    out << g.position.x() << ',' << g.position.y() << ',' << g.beta;
    for (int i = 0; i < 3; ++i) out << ',' << g.lengths[i];
    for (int c = 0; c < 3; ++c)
      for (int r = 0; r < 3; ++r) out << ',' << g.frame(r, c);
    out << '\n';
  }
}

void write_beta_csv(const std::string& path, const Field2D& f) {
  auto out = open_out(path);
  out << "x,y,beta\n";
  for (int i = 0; i < f.num_nodes(); ++i)
    out << f.mesh().nodes[i].x() << ',' << f.mesh().nodes[i].y() << ',' << biaxiality(f.q(i)) << '\n';
}

nlohmann::json params_json(const MaterialParams& p) {
  return {{"a2", p.a2}, {"b2", p.b2}, {"c2", p.c2}, {"L", p.L}, {"M", p.M}, {"k", p.k}, {"R", p.R}};
}

MaterialParams params_from_json(const nlohmann::json& j, MaterialParams p) {
  if (j.contains("a2")) p.a2 = j.at("a2").get<double>();
  if (j.contains("b2")) p.b2 = j.at("b2").get<double>();
  if (j.contains("c2")) p.c2 = j.at("c2").get<double>();
  if (j.contains("L")) p.L = j.at("L").get<double>();
  if (j.contains("M")) p.M = j.at("M").get<double>();
  if (j.contains("k")) p.k = j.at("k").get<int>();
  if (j.contains("R")) p.R = j.at("R").get<double>();
  return p;
}

std::string code_version() { return LDG_VERSION; }

void write_manifest(const std::string& path, nlohmann::json body) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ts;
  ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  body["version"] = code_version();
  body["timestamp"] = ts.str();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body.dump(2) << '\n';
}

}  // namespace ldg
