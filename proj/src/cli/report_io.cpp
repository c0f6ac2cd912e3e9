#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <system_error>

#include "curvlab/runner.hpp"

namespace curvlab::cli {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header.size()) {
    throw InvalidArgument("csv: row has " + std::to_string(row.size()) + " fields, header has " +
                          std::to_string(header.size()));
  }
  rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string report_text(const json& report) { return report.dump(2) + "\n"; }

std::string canonical_report(const json& report) {
  json copy = report;
  copy.erase("wall_time");
  return report_text(copy);
}

std::filesystem::path resolve_output_dir(const std::optional<std::filesystem::path>& cli_out,
                                         const Config& cfg) {
  if (cli_out) return *cli_out;
  if (cfg.output) {
    std::filesystem::path p(*cfg.output);
    return p.is_absolute() ? p : cfg.source_dir / p;
  }
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "curvlab-out";
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("output: cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InvalidArgument("output: write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InvalidArgument("output: cannot rename onto " + path.string());
  }
}

void write_outputs(const RunResult& result, const std::filesystem::path& dir,
                   const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InvalidArgument("output: cannot create directory " + dir.string());
  for (const auto& f : result.files) write_atomic(dir / (name + f.suffix), f.content);
  write_atomic(dir / (name + ".report.json"), report_text(result.report));
}

}  // namespace curvlab::cli
