#include "seedsim/transport/lora.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "seedsim/error.hpp"

namespace seedsim::transport {

double lora_path_loss_db(const LoRaParams& p, double distance_m) {
  const double d = std::max(distance_m, 1.0);
  return p.reference_loss_db + 10.0 * p.path_loss_exponent * std::log10(d);
}

std::optional<double> lora_receive(const LoRaParams& p, const Vec3& tx, const Vec3& rx, double rx_heading_deg,
                                   const recovery::AntennaPattern& pattern, kernel::RngStream* noise) {
  const double off_boresight = wrap_deg(bearing_deg(rx, tx) - rx_heading_deg);
  double rssi = p.tx_power_dbm + pattern.gain_db(off_boresight) - lora_path_loss_db(p, distance(tx, rx));
  if (noise != nullptr && p.noise_sigma_db > 0.0) rssi += noise->normal(0.0, p.noise_sigma_db);
  if (rssi < p.sensitivity_dbm) return std::nullopt;
  return rssi;
}

double lora_airtime_s(const LoRaParams& p, std::size_t bytes) {
  return static_cast<double>(bytes) * 8.0 / p.data_rate_bps;
}

void validate_lora_duty(const LoRaParams& p, std::size_t beacon_bytes) {
  if (p.beacon_interval_s < 10.0 * lora_airtime_s(p, beacon_bytes)) {
    throw Error(Errc::ScenarioError,
                fmt::format("beacon interval {} s is not much longer than the {:.3f} s airtime", p.beacon_interval_s,
                            lora_airtime_s(p, beacon_bytes)));
  }
}

LoRaLink::LoRaLink(kernel::Simulator& sim, LinkId id, std::vector<NodeId> endpoints, LoRaParams params,
                   PositionFn position)
    : sim_(sim),
      id_(id),
      endpoints_(std::move(endpoints)),
      params_(params),
      position_(std::move(position)),
      rng_(sim.rng("lora." + sim.link_name(id))) {}

TxStatus LoRaLink::send(NodeId from, Bytes bytes) {
  const auto airtime = kernel::SimTime::from_seconds(lora_airtime_s(params_, bytes.size()));
  const auto omni = recovery::AntennaPattern::omni();
  for (const auto& to : endpoints_) {
    if (to == from) continue;
    const auto rssi = lora_receive(params_, position_(from), position_(to), 0.0, omni, &rng_);
    sim_.schedule(sim_.now() + airtime, id_, "lora.rx", [this, from, to, rssi, payload = bytes] {
      if (rssi_observer_) rssi_observer_(from, to, rssi);
      if (!rssi) {
        ++lost_;
        sim_.note(fmt::format("lost {}->{}", from.name(), to.name()));
        return;
      }
      ++received_;
      sim_.note(fmt::format("{}->{} rssi={:.1f}", from.name(), to.name(), *rssi));
      if (receiver_) receiver_(from, to, payload);
    });
  }
  return TxStatus::Queued;
}

}  // namespace seedsim::transport
