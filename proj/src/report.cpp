#include "fidkit/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "fidkit/tensorio.hpp"
#include "fidkit/version.hpp"

namespace fidkit {

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ULL;
    }
    if (!in) break;
  }
  return h;
}

std::string file_digest(const std::string& path) {
  std::ostringstream ss;
  ss << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0')
     << fnv1a64_file(path);
  return ss.str();
}

json make_report(const std::string& subcommand, json config, json inputs,
                 json metrics, double duration_ms) {
  json r;
  r["schema"] = 1;
  r["tool"] = "eval";
  r["version"] = kVersion;
  r["subcommand"] = subcommand;
  r["config"] = std::move(config);
  r["inputs"] = std::move(inputs);
  r["metrics"] = std::move(metrics);
  r["meta"] = {{"duration_ms", duration_ms}};
  return r;
}

void write_report(const std::string& path, const json& report) {
  atomic_write(path, report.dump(2) + "\n");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

}  // namespace fidkit
