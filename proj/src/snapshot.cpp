#include "choquard/snapshot.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace choq {

static_assert(std::endian::native == std::endian::little,
              "snapshot payloads are little-endian");

void write_field_snapshot(const std::string& dir, const std::string& label, const Field& f,
                          const std::map<std::string, double>& params) {
  require_finite(f, "write_field_snapshot");
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  j["dim"] = f.grid.dim;
  j["n"] = f.grid.n;
  j["half_extent"] = f.grid.half_extent;
  j["label"] = label;
  j["params"] = params;  // std::map: deterministic key order
  {
    std::ofstream out(dir + "/" + label + ".json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write snapshot sidecar in " + dir);
    out << j.dump(2) << "\n";
  }
  std::ofstream out(dir + "/" + label + ".f64", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write snapshot payload in " + dir);
  out.write(reinterpret_cast<const char*>(f.v.data()),
            static_cast<std::streamsize>(f.v.size() * sizeof(double)));
}

Field read_field_snapshot(const std::string& dir, const std::string& label) {
  std::ifstream side(dir + "/" + label + ".json");
  if (!side) throw std::runtime_error("cannot read snapshot sidecar " + dir + "/" + label);
  nlohmann::json j;
  side >> j;
  GridSpec g = make_grid(j.at("dim").get<int>(), j.at("n").get<int>(),
                         j.at("half_extent").get<double>());
  Field f(g);
  std::ifstream in(dir + "/" + label + ".f64", std::ios::binary);
  if (!in) throw std::runtime_error("cannot read snapshot payload " + dir + "/" + label);
  in.read(reinterpret_cast<char*>(f.v.data()),
          static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(f.v.size() * sizeof(double)))
    throw std::runtime_error("snapshot payload truncated: " + dir + "/" + label);
  require_finite(f, "read_field_snapshot");
  return f;
}

}  // namespace choq
