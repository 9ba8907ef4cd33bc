#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "capscale/bounds.hpp"
#include "capscale/routing.hpp"
#include "capscale/schedule.hpp"
#include "capscale/stats.hpp"
#include "capscale/traffic.hpp"

namespace capscale {

/// Objects keep their keys sorted, so dumps are byte-stable.
using Json = nlohmann::json;

std::string_view artifact_version();

/// Shortest round-trip decimal form, '.' separator.
std::string format_number(double v);

/// FNV-1a over the compact dump.
std::uint64_t config_hash(const Json& config);
std::string hex64(std::uint64_t v);

/// "# capscale <version> config <hash> <compact config>".
std::string provenance_line(const Json& config);

/// Pretty dump with a trailing newline.
std::string dump(const Json& j);

Json to_json(const ChannelParams& p);
Json to_json(const BoundReport& rep);
Json to_json(const Route& route);
Json to_json(const NetworkInstance& inst);
Json to_json(const TrialSummary& t);
Json to_json(const ScalingFit& fit);
Json to_json(const FloorStats& fs);
Json to_json(const Throughput& t);
Json to_json(const ClaimFrequency& c);

/// RFC-4180 rows: fields quoted when they hold a comma, quote or newline.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void comment(std::string_view line);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& os_;
};

void write_hops_csv(std::ostream& os, std::span<const Route> routes, const NetworkInstance& inst,
                    const Json& config);
void write_transmissions_csv(std::ostream& os, std::span<const TransmissionRecord> records,
                             const Json& config);
void write_bounds_csv(std::ostream& os, std::span<const BoundReport> reports, const Json& config);
void write_trials_csv(std::ostream& os, std::span<const TrialSummary> trials, const Json& config);

}  // namespace capscale
