#include "opscale/io.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace opscale {

using nlohmann::json;

json instance_to_json(const KrausCollection& a) {
  json mats = json::array();
  for (const auto& ai : a.matrices()) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < ai.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < ai.cols(); ++j) row.push_back(ai(i, j));
      rows.push_back(std::move(row));
    }
    mats.push_back(std::move(rows));
  }
  return {{"m", a.m()}, {"n", a.n()}, {"k", a.k()}, {"matrices", std::move(mats)},
          {"label", a.label()}};
}

KrausCollection instance_from_json(const json& j) {
  try {
    const auto m = j.at("m").get<Eigen::Index>();
    const auto n = j.at("n").get<Eigen::Index>();
    const auto k = j.at("k").get<std::size_t>();
    const json& mats = j.at("matrices");
    if (!mats.is_array() || mats.size() != k) {
      throw IoError("instance: 'matrices' must hold k = " + std::to_string(k) + " entries");
    }
    std::vector<Matrix> out;
    out.reserve(k);
    for (const auto& rows : mats) {
      if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != m) {
        throw IoError("instance: every matrix needs m = " + std::to_string(m) + " rows");
      }
      Matrix ai(m, n);
      for (Eigen::Index i = 0; i < m; ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
          throw IoError("instance: every row needs n = " + std::to_string(n) + " entries");
        }
        for (Eigen::Index c = 0; c < n; ++c) ai(i, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
      out.push_back(std::move(ai));
    }
    return KrausCollection(std::move(out), j.value("label", std::string{}));
  } catch (const json::exception& e) {
    throw IoError(std::string("instance: ") + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_instance(const KrausCollection& a, const std::filesystem::path& path) {
  write_text(path, instance_to_json(a).dump() + "\n");
}

KrausCollection read_instance(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError("instance '" + path.string() + "': " + e.what());
  }
  return instance_from_json(j);
}

std::string trace_to_csv(const IterationTrace& trace) {
  std::string out = "t,err,omega,wall_nanos\n";
  char buf[128];
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%lld\n", r.t, r.err, r.omega,
                  static_cast<long long>(r.wall_nanos));
    out += buf;
  }
  return out;
}

json config_to_json(const SolverConfig& cfg) {
  return {{"method", to_string(cfg.method)},
          {"omega", to_string(cfg.omega)},
          {"max_iter", cfg.max_iter},
          {"tol", cfg.tol},
          {"snapshot_every", cfg.snapshot_every},
          {"safeguard", cfg.safeguard}};
}

json trace_to_json(const IterationTrace& trace, const SolverConfig& cfg) {
  json j = {{"config", config_to_json(cfg)},
            {"status", to_string(trace.status)},
            {"iterations", trace.records.empty() ? 0 : trace.records.back().t},
            {"final_err", trace.final_err()},
            {"omega_hat", trace.omega_hat ? json(*trace.omega_hat) : json(nullptr)},
            {"beta_sq_hat", trace.beta_sq_hat ? json(*trace.beta_sq_hat) : json(nullptr)},
            {"beta_clamped", trace.beta_clamped}};
  if (!trace.message.empty()) j["message"] = trace.message;
  return j;
}

json report_to_json(const std::string& check, const GConvexityReport& r) {
  return {{"check", check},
          {"samples", r.samples},
          {"worst_slack", std::max(r.worst_slack_f, r.worst_slack_trace)},
          {"pass", r.pass}};
}

}  // namespace opscale
