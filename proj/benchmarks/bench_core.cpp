#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "seedsim/analysis/fft.hpp"
#include "seedsim/kernel/simulator.hpp"
#include "seedsim/power/power_system.hpp"
#include "seedsim/protocol/crc.hpp"
#include "seedsim/protocol/frame.hpp"
#include "seedsim/protocol/sbd.hpp"

using namespace seedsim;

namespace {

protocol::Bytes random_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  protocol::Bytes b(n);
  for (auto& x : b) x = std::uint8_t(rng());
  return b;
}

void BM_Crc16(benchmark::State& state) {
  const auto data = random_bytes(std::size_t(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(protocol::crc16(data));
  state.SetBytesProcessed(std::int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Crc16)->Arg(24)->Arg(255)->Arg(4096);

void BM_FrameEncodeParse(benchmark::State& state) {
  const auto payload = random_bytes(std::size_t(state.range(0)), 2);
  const protocol::FrameHeader h{.seq = 1, .src = 0x11, .dst = 0xF0, .msg_id = 257};
  for (auto _ : state) {
    const auto bytes = protocol::encode_frame(h, payload);
    benchmark::DoNotOptimize(protocol::parse_frame(bytes));
  }
}
BENCHMARK(BM_FrameEncodeParse)->Arg(24)->Arg(255);

void BM_SignedFrameVerify(benchmark::State& state) {
  protocol::LinkKey key(32, 0x42);
  const protocol::FrameHeader h{.seq = 1, .src = 0xF0, .dst = 0x01, .msg_id = 513};
  const auto payload = random_bytes(8, 3);
  std::uint64_t counter = 0;
  protocol::FrameVerifier v(true);
  v.set_key(0xF0, key);
  for (auto _ : state) {
    const auto bytes = protocol::encode_frame(h, payload, protocol::SigningParams{key, ++counter});
    benchmark::DoNotOptimize(v.decode(bytes));
  }
}
BENCHMARK(BM_SignedFrameVerify);

void BM_SbdRoundTrip(benchmark::State& state) {
  protocol::SbdRecord r;
  r.seed_id = 1;
  r.lat_e7 = 678932000;
  for (auto _ : state) {
    ++r.counter;
    benchmark::DoNotOptimize(protocol::decode_sbd(protocol::encode_sbd(r)));
  }
}
BENCHMARK(BM_SbdRoundTrip);

void BM_FftMagnitude(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(0.3 * double(i)) + 0.5 * std::sin(1.7 * double(i));
  for (auto _ : state) benchmark::DoNotOptimize(analysis::fft_magnitude(x, 250.0, analysis::Window::Hann));
}
BENCHMARK(BM_FftMagnitude)->Arg(1024)->Arg(4096);

void BM_KernelEvents(benchmark::State& state) {
  const auto n = state.range(0);
  for (auto _ : state) {
    kernel::Simulator sim(1);
    sim.trace().set_keep_entries(false);
    std::int64_t fired = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      sim.schedule(kernel::SimTime::from_us(i * 4000), kernel::NodeId::rbc(), "tick", [&] { ++fired; });
    }
    sim.run_until(kernel::SimTime::max());
    benchmark::DoNotOptimize(fired);
  }
  state.SetItemsProcessed(std::int64_t(state.iterations()) * n);
}
BENCHMARK(BM_KernelEvents)->Arg(10000);

void BM_SolveBus(benchmark::State& state) {
  using power::Source;
  const power::SourceSet all{Source::Bat1, Source::Bat2, Source::Rxsm};
  double p = 3.0;
  for (auto _ : state) {
    p = p > 20.0 ? 3.0 : p + 0.01;
    benchmark::DoNotOptimize(power::solve_bus({8.3, 8.31, 0.0}, {0.1, 0.1, 0.09}, all, {p, 0.5}));
  }
}
BENCHMARK(BM_SolveBus);

void BM_PowerSystemStep(benchmark::State& state) {
  power::PowerSystem ps;
  ps.set_rxsm_voltage(0.0);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ps.step({3.0, 0.4}, t, 0.004));
    t += 0.004;
  }
}
BENCHMARK(BM_PowerSystemStep);

}  // namespace
BENCHMARK_MAIN();
