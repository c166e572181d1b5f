#include "choquard/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace choq {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void bad(int line, const std::string& what) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " + what);
}

double to_double(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) bad(line, "trailing characters in number '" + v + "'");
    return x;
  } catch (const std::invalid_argument&) {
    bad(line, "expected a number, got '" + v + "'");
  }
}

int to_int(const std::string& v, int line) {
  const double x = to_double(v, line);
  const int i = static_cast<int>(x);
  if (i != x) bad(line, "expected an integer, got '" + v + "'");
  return i;
}

bool to_bool(const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(line, "expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), line));
  if (out.empty()) bad(line, "empty list");
  return out;
}

Vec to_vec(const std::string& v, int line) {
  std::vector<double> xs = to_list(v, line);
  if (xs.size() > 3) bad(line, "at most 3 components");
  Vec out{0, 0, 0};
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i];
  return out;
}

PotentialKind kind_from(const std::string& v, int line) {
  if (v == "constant") return PotentialKind::constant;
  if (v == "gaussian_well") return PotentialKind::gaussian_well;
  if (v == "power_decay") return PotentialKind::power_decay;
  if (v == "compact_support") return PotentialKind::compact_support;
  bad(line, "unknown potential kind '" + v + "'");
}

const char* kind_name(PotentialKind k) {
  switch (k) {
    case PotentialKind::constant: return "constant";
    case PotentialKind::gaussian_well: return "gaussian_well";
    case PotentialKind::power_decay: return "power_decay";
    case PotentialKind::compact_support: return "compact_support";
    case PotentialKind::custom_table: return "custom_table";
  }
  return "?";
}

void set_region(RegionSpec& r, const std::string& key, const std::string& value, int line) {
  if (key == "shape") {
    if (value == "ball")
      r.shape = RegionSpec::Shape::ball;
    else if (value == "box")
      r.shape = RegionSpec::Shape::box;
    else
      bad(line, "region shape must be ball or box");
  } else if (key == "center") {
    r.center = to_vec(value, line);
  } else if (key == "radius") {
    r.halfwidths = Vec{to_double(value, line), 0, 0};
  } else if (key == "halfwidths") {
    r.halfwidths = to_vec(value, line);
  } else {
    bad(line, "unknown region key '" + key + "'");
  }
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_vec(const Vec& v) { return fmt(v[0]) + "," + fmt(v[1]) + "," + fmt(v[2]); }

}  // namespace

RunConfig RunConfig::parse_string(const std::string& text) {
  RunConfig c;
  c.lambda_region.halfwidths = Vec{1, 1, 1};
  c.outer_region.halfwidths = Vec{2, 2, 2};
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  bool eps_set = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const std::size_t hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') bad(line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      static const char* known[] = {"grid",         "problem",      "potential",
                                    "lambda_region", "outer_region", "penalization",
                                    "solver",       "output",       "probe"};
      bool ok = false;
      for (const char* k : known) ok = ok || section == k;
      if (!ok) bad(line, "unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) bad(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty()) bad(line, "key outside any section");
    if (key.empty() || value.empty()) bad(line, "empty key or value");

    if (section == "grid") {
      if (key == "dim") c.dim = to_int(value, line);
      else if (key == "n") c.n = to_int(value, line);
      else if (key == "half_extent") c.half_extent = to_double(value, line);
      else bad(line, "unknown [grid] key '" + key + "'");
    } else if (section == "problem") {
      if (key == "alpha") c.alpha = to_double(value, line);
      else if (key == "p") c.p = to_double(value, line);
      else if (key == "eps") { c.eps = to_double(value, line); eps_set = true; }
      else if (key == "eps_list") c.eps_list = to_list(value, line);
      else bad(line, "unknown [problem] key '" + key + "'");
    } else if (section == "potential") {
      PotentialSpec& P = c.potential;
      if (key == "kind") P.kind = kind_from(value, line);
      else if (key == "floor") P.floor = to_double(value, line);
      else if (key == "depth") P.depth = to_double(value, line);
      else if (key == "width") P.width = to_double(value, line);
      else if (key == "scale") P.scale = to_double(value, line);
      else if (key == "decay_gamma") P.decay_gamma = to_double(value, line);
      else if (key == "support_radius") P.support_radius = to_double(value, line);
      else if (key == "center") P.center = to_vec(value, line);
      else if (key == "zero") P.has_zero = to_bool(value, line);
      else if (key == "zero_center") P.zero_center = to_vec(value, line);
      else if (key == "zero_exponent") P.zero_exponent = to_double(value, line);
      else if (key == "zero_radius") P.zero_radius = to_double(value, line);
      else bad(line, "unknown [potential] key '" + key + "'");
    } else if (section == "lambda_region") {
      set_region(c.lambda_region, key, value, line);
    } else if (section == "outer_region") {
      set_region(c.outer_region, key, value, line);
    } else if (section == "penalization") {
      if (key == "case") {
        if (value == "none") c.pen_case = 0;
        else c.pen_case = to_int(value, line);
      } else if (key == "delta") c.delta = to_double(value, line);
      else if (key == "lam") c.lam = value == "auto" ? -1 : to_double(value, line);
      else bad(line, "unknown [penalization] key '" + key + "'");
    } else if (section == "solver") {
      if (key == "max_iters") c.solver.max_iters = to_int(value, line);
      else if (key == "residual_tol") c.solver.residual_tol = to_double(value, line);
      else if (key == "step_init") c.solver.step_init = to_double(value, line);
      else if (key == "armijo_c") c.solver.armijo_c = to_double(value, line);
      else if (key == "precondition_shift")
        c.solver.precondition_shift = value == "auto" ? -1 : to_double(value, line);
      else if (key == "strict_boundary") c.solver.strict_boundary = to_bool(value, line);
      else if (key == "seed") c.solver.seed = static_cast<std::uint64_t>(to_double(value, line));
      else bad(line, "unknown [solver] key '" + key + "'");
    } else if (section == "output") {
      if (key == "dir") c.out_dir = value;
      else if (key == "label") c.label = value;
      else bad(line, "unknown [output] key '" + key + "'");
    } else if (section == "probe") {
      if (key == "center") c.probe_center = to_vec(value, line);
      else if (key == "radius") c.probe_radius = to_double(value, line);
      else if (key == "rho") c.probe_rho = to_double(value, line);
      else if (key == "big_r") c.probe_big_r = to_double(value, line);
      else if (key == "bump_rho") c.probe_bump_rho = to_double(value, line);
      else bad(line, "unknown [probe] key '" + key + "'");
    }
  }
  if (!eps_set && !c.eps_list.empty()) c.eps = c.eps_list.front();
  return c;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

void RunConfig::apply_override(const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  const std::size_t dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw std::invalid_argument("override must look like section.key=value: " + assignment);
  const std::string section = assignment.substr(0, dot);
  const std::string rest = assignment.substr(dot + 1);
  // reuse the parser on a two-line snippet, then merge by re-parsing resolved text
  std::string text = resolved_text() + "\n[" + section + "]\n" + rest + "\n";
  *this = parse_string(text);
}

std::string RunConfig::resolved_text() const {
  std::ostringstream os;
  os << "[grid]\n"
     << "dim = " << dim << "\nn = " << n << "\nhalf_extent = " << fmt(half_extent) << "\n\n";
  os << "[problem]\nalpha = " << fmt(alpha) << "\np = " << fmt(p) << "\neps = " << fmt(eps)
     << "\n";
  if (!eps_list.empty()) {
    os << "eps_list = ";
    for (std::size_t i = 0; i < eps_list.size(); ++i) os << (i ? "," : "") << fmt(eps_list[i]);
    os << "\n";
  }
  os << "\n[potential]\nkind = " << kind_name(potential.kind) << "\nfloor = "
     << fmt(potential.floor) << "\ndepth = " << fmt(potential.depth) << "\nwidth = "
     << fmt(potential.width) << "\nscale = " << fmt(potential.scale) << "\ndecay_gamma = "
     << fmt(potential.decay_gamma) << "\nsupport_radius = " << fmt(potential.support_radius)
     << "\ncenter = " << fmt_vec(potential.center) << "\nzero = "
     << (potential.has_zero ? "true" : "false") << "\nzero_center = "
     << fmt_vec(potential.zero_center) << "\nzero_exponent = " << fmt(potential.zero_exponent)
     << "\nzero_radius = " << fmt(potential.zero_radius) << "\n\n";
  auto region = [&](const char* name, const RegionSpec& r) {
    os << "[" << name << "]\nshape = "
       << (r.shape == RegionSpec::Shape::ball ? "ball" : "box") << "\ncenter = "
       << fmt_vec(r.center) << "\n";
    if (r.shape == RegionSpec::Shape::ball)
      os << "radius = " << fmt(r.radius()) << "\n";
    else
      os << "halfwidths = " << fmt_vec(r.halfwidths) << "\n";
    os << "\n";
  };
  region("lambda_region", lambda_region);
  region("outer_region", outer_region);
  os << "[penalization]\ncase = " << pen_case << "\ndelta = " << fmt(delta) << "\nlam = ";
  if (lam < 0) os << "auto"; else os << fmt(lam);
  os << "\n\n[solver]\nmax_iters = " << solver.max_iters << "\nresidual_tol = "
     << fmt(solver.residual_tol) << "\nstep_init = " << fmt(solver.step_init) << "\narmijo_c = "
     << fmt(solver.armijo_c) << "\nprecondition_shift = ";
  if (solver.precondition_shift < 0) os << "auto"; else os << fmt(solver.precondition_shift);
  os << "\nstrict_boundary = " << (solver.strict_boundary ? "true" : "false") << "\nseed = "
     << solver.seed << "\n\n";
  os << "[output]\ndir = " << out_dir << "\nlabel = " << label << "\n\n";
  os << "[probe]\ncenter = " << fmt_vec(probe_center) << "\nradius = " << fmt(probe_radius)
     << "\nrho = " << fmt(probe_rho) << "\nbig_r = " << fmt(probe_big_r) << "\nbump_rho = "
     << fmt(probe_bump_rho) << "\n";
  return os.str();
}

std::vector<double> RunConfig::effective_eps_list() const {
  if (!eps_list.empty()) return eps_list;
  return {eps};
}

ProblemParams RunConfig::problem_params() const {
  ProblemParams p_;
  p_.grid = make_grid(dim, n, half_extent);
  p_.alpha = alpha;
  p_.p = p;
  p_.eps = eps;
  p_.potential = potential;
  p_.lambda_region = lambda_region;
  p_.outer_region = outer_region;
  p_.strict_boundary = solver.strict_boundary;
  return p_;
}

}  // namespace choq
