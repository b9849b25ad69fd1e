#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hydroq/error.hpp"
#include "hydroq/qubo.hpp"
#include "hydroq/solvers.hpp"

namespace hydroq {

inline constexpr double kEnergyAuditTol = 1e-6;

/// Request body: {"n", "offset", "terms": [[i, j, value], ...], "num_reads"}.
/// "seed" and "num_sweeps" are optional extensions honoured by the loopback
/// server.
inline nlohmann::json sample_request(const QuboModel& q, const AnnealParams& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [ij, v] : q.coefficients) terms.push_back({ij.first, ij.second, v});
  return {{"n", q.n}, {"offset", q.offset}, {"terms", std::move(terms)}, {"num_reads", p.n_restarts},
          {"seed", p.seed}, {"num_sweeps", p.n_sweeps}};
}

inline QuboModel qubo_from_request(const nlohmann::json& j) {
  try {
    QuboModel q;
    q.n = j.at("n").get<int>();
    q.offset = j.at("offset").get<double>();
    for (const auto& t : j.at("terms")) {
      const int a = t.at(0).get<int>(), b = t.at(1).get<int>();
      if (a < 0 || b < 0 || a >= q.n || b >= q.n) throw ProtocolError("term index out of range");
      q.add(a, b, t.at(2).get<double>());
    }
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed sample request: ") + e.what());
  }
}

inline nlohmann::json sample_response(const SampleSet& s) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& smp : s.samples) samples.push_back({{"assignment", smp.assignment}, {"energy", smp.energy}});
  return {{"samples", std::move(samples)}, {"solver", s.solver_name}};
}

/// Parses a response and audits every reported energy against `q`.
inline SampleSet parse_sample_response(const std::string& body, const QuboModel& q) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("response is not JSON: ") + e.what());
  }
  SampleSet s;
  try {
    s.solver_name = j.at("solver").get<std::string>();
    for (const auto& item : j.at("samples")) {
      Sample smp;
      for (const auto& v : item.at("assignment")) {
        const int b = v.get<int>();
        if (b != 0 && b != 1) throw ProtocolError("assignment entries must be 0 or 1");
        smp.assignment.push_back(static_cast<std::uint8_t>(b));
      }
      if (smp.assignment.size() != static_cast<std::size_t>(q.n)) throw ProtocolError("assignment length differs from n");
      const double reported = item.at("energy").get<double>();
      smp.energy = energy(q, smp.assignment);
      if (std::abs(reported - smp.energy) > kEnergyAuditTol)
        throw EnergyMismatch("reported energy " + std::to_string(reported) + " but recomputed " + std::to_string(smp.energy));
      s.samples.push_back(std::move(smp));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed sample response: ") + e.what());
  }
  if (s.samples.empty()) throw ProtocolError("response carries no samples");
  s.select_best();
  return s;
}

/// POSTs `q` to `<endpoint>/v1/sample`.
inline SampleSet remote_sample(const std::string& endpoint, const QuboModel& q, const AnnealParams& p, double timeout_s = 30.0) {
  const auto t0 = std::chrono::steady_clock::now();
  httplib::Client cli(endpoint);
  if (!cli.is_valid()) throw RemoteUnavailable("invalid sampler endpoint '" + endpoint + "'");
  const auto sec = static_cast<time_t>(timeout_s);
  const auto usec = static_cast<time_t>((timeout_s - static_cast<double>(sec)) * 1e6);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
  const auto res = cli.Post("/v1/sample", sample_request(q, p).dump(), "application/json");
  if (!res) throw RemoteUnavailable("sampler at " + endpoint + " unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) throw ProtocolError("sampler returned HTTP " + std::to_string(res->status));
  SampleSet s = parse_sample_response(res->body, q);
  s.wall_time = std::chrono::steady_clock::now() - t0;
  return s;
}

inline RemoteSampler make_remote_sampler(std::string endpoint, double timeout_s) {
  return [endpoint = std::move(endpoint), timeout_s](const QuboModel& q, const AnnealParams& p) {
    return remote_sample(endpoint, q, p, timeout_s);
  };
}

/// HTTP sampler that answers with the local annealer. Used by tests and the
/// `serve` command.
class SamplerServer {
public:
  using Tamper = std::function<void(nlohmann::json&)>;

  explicit SamplerServer(AnnealParams base = {}, Tamper tamper = {}) : base_(base), tamper_(std::move(tamper)) {
    server_.Post("/v1/sample", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto j = nlohmann::json::parse(req.body);
        const QuboModel q = qubo_from_request(j);
        AnnealParams p = base_;
        p.n_restarts = j.value("num_reads", p.n_restarts);
        p.n_sweeps = j.value("num_sweeps", p.n_sweeps);
        p.seed = j.value("seed", p.seed);
        SampleSet s = q.n == 0 ? SampleSet{{Sample{{}, q.offset, true, {}}}, "anneal", {}, 0, {}} : anneal(to_ising(q), p);
        for (auto& smp : s.samples) smp.energy = energy(q, smp.assignment);
        auto out = sample_response(s);
        if (tamper_) tamper_(out);
        res.set_content(out.dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      }
    });
  }

  ~SamplerServer() { stop(); }
  SamplerServer(const SamplerServer&) = delete;
  SamplerServer& operator=(const SamplerServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0) {
    port_ = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (port_ < 0) throw RemoteUnavailable("cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  /// Serves on the calling thread until stopped.
  void run(const std::string& host, int port) {
    if (!server_.listen(host, port)) throw RemoteUnavailable("cannot listen on " + host + ":" + std::to_string(port));
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const noexcept { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
  AnnealParams base_;
  Tamper tamper_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

} // namespace hydroq
