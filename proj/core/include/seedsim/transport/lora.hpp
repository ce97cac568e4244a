#pragma once

#include <functional>
#include <optional>

#include "seedsim/geometry.hpp"
#include "seedsim/kernel/simulator.hpp"
#include "seedsim/recovery/antenna.hpp"
#include "seedsim/transport/link.hpp"

namespace seedsim::transport {

using seedsim::Vec3;
using seedsim::bearing_deg;
using seedsim::distance;
using seedsim::wrap_deg;

struct LoRaParams {
  double tx_power_dbm = 14.0;
  double path_loss_exponent = 2.7;
  double reference_loss_db = 40.0;
  double noise_sigma_db = 2.0;
  double sensitivity_dbm = -137.0;
  double data_rate_bps = 293.0;  // SF12 / 125 kHz
  double beacon_interval_s = 5.0;
};

/// Log-distance path loss below 1 m is clamped to the reference distance.
double lora_path_loss_db(const LoRaParams& params, double distance_m);

/// RSSI = tx + gain(bearing - heading) - path loss + N(0, sigma); nullopt (Lost) below sensitivity.
/// Pass `noise = nullptr` for the zero-noise channel.
std::optional<double> lora_receive(const LoRaParams& params, const Vec3& tx, const Vec3& rx, double rx_heading_deg,
                                   const recovery::AntennaPattern& pattern, kernel::RngStream* noise);

double lora_airtime_s(const LoRaParams& params, std::size_t bytes);

/// ScenarioError unless the beacon interval is at least ten airtimes of a beacon.
void validate_lora_duty(const LoRaParams& params, std::size_t beacon_bytes);

/// Broadcast radio between seed transmitters and one omni ground receiver.
class LoRaLink final : public Transport {
 public:
  using PositionFn = std::function<Vec3(NodeId)>;
  using RssiObserver = std::function<void(NodeId from, NodeId to, std::optional<double> rssi_dbm)>;

  LoRaLink(kernel::Simulator& sim, LinkId id, std::vector<NodeId> endpoints, LoRaParams params, PositionFn position);

  LinkId id() const override { return id_; }
  const std::vector<NodeId>& endpoints() const override { return endpoints_; }
  void set_receiver(Receiver receiver) override { receiver_ = std::move(receiver); }
  TxStatus send(NodeId from, Bytes bytes) override;

  /// Called for every reception attempt, including lost ones.
  void set_rssi_observer(RssiObserver observer) { rssi_observer_ = std::move(observer); }

  std::uint64_t received() const { return received_; }
  std::uint64_t lost() const { return lost_; }

 private:
  kernel::Simulator& sim_;
  LinkId id_;
  std::vector<NodeId> endpoints_;
  LoRaParams params_;
  PositionFn position_;
  kernel::RngStream rng_;
  Receiver receiver_;
  RssiObserver rssi_observer_;
  std::uint64_t received_ = 0;
  std::uint64_t lost_ = 0;
};

}  // namespace seedsim::transport
