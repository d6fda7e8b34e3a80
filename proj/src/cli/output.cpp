#include <openssl/evp.h>

#include <fmt/format.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <unistd.h>

#include "captive/cli.hpp"

namespace captive::cli {

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::usage:
    case ErrorKind::domain:
      return 2;
    case ErrorKind::validation:
      return 3;
    case ErrorKind::numerical:
    case ErrorKind::state:
    case ErrorKind::statistical:
      return 4;
    case ErrorKind::io:
      return 5;
  }
  return 1;
}

int exit_code(const std::exception& e) noexcept {
  if (const auto* ce = dynamic_cast<const Error*>(&e)) return exit_code(ce->kind());
  if (dynamic_cast<const Json::exception*>(&e)) return 2;
  return 1;
}

Json error_json(const std::exception& e) {
  Json err;
  if (const auto* ce = dynamic_cast<const Error*>(&e)) {
    err["kind"] = to_string(ce->kind());
  } else if (dynamic_cast<const Json::exception*>(&e)) {
    err["kind"] = "config";
  } else {
    err["kind"] = "internal";
  }
  err["message"] = e.what();
  if (const auto* ve = dynamic_cast<const ValidationError*>(&e); ve && !ve->details().empty()) {
    try {
      err["details"] = Json::parse(ve->details());
    } catch (const Json::exception&) {
      err["details"] = ve->details();
    }
  }
  return Json{{"error", err}};
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp, ec);
      throw IoError("write to " + tmp.string() + " failed");
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 failed");
  }
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
  return out;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string path_csv(const PathSample& p, const std::vector<std::size_t>* corridor) {
  std::string out = corridor ? "k,t,x,jump,corridor_index\n" : "k,t,x,jump\n";
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    const std::size_t k = i < p.step_index.size() ? p.step_index[i] : i;
    const int jump = i < p.jump_flags.size() ? p.jump_flags[i] : 0;
    out += fmt::format("{},{:.17g},{:.17g},{}", k, p.times[i], p.values[i], jump);
    if (corridor) out += fmt::format(",{}", (*corridor)[i]);
    out += '\n';
  }
  return out;
}

PathSample read_path_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,t,x,jump", 0) != 0) {
    throw ConfigError(file.string() + ": expected a k,t,x,jump header");
  }
  PathSample p;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f[4];
    for (auto& s : f) {
      if (!std::getline(ls, s, ',')) throw ConfigError(file.string() + ": short row " + std::to_string(row));
    }
    try {
      p.step_index.push_back(std::stoull(f[0]));
      p.times.push_back(std::stod(f[1]));
      p.values.push_back(std::stod(f[2]));
      p.jump_flags.push_back(static_cast<std::uint8_t>(std::stoi(f[3]) != 0));
    } catch (const std::logic_error&) {
      throw ConfigError(file.string() + ": malformed row " + std::to_string(row));
    }
  }
  for (std::uint8_t j : p.jump_flags) p.jumps += j;
  return p;
}

}  // namespace captive::cli
