#pragma once

#include "csd/model.hpp"
#include "csd/sample_block.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace csd {

struct MeasurementDesign;

enum class Hypothesis { h0, h1 };

/// How the measurements are realized. `ambient` draws x[n] in R^K and an
/// independent N-vector w_m[n] per device and snapshot, then projects.
/// `projected` draws from the same joint law directly in the measurement
/// domain: Phi H x[n] as U S g[n] with Phi H = U S V^T (thin) and
/// g[n] ~ N(0, I_r), r = min(M, K), and phi_m^T w_m[n] as
/// N(0, sigma_02 ||phi_m||^2). Cost O(M) per snapshot instead of O(M N + K).
enum class NoiseModel { ambient, projected };

/// z[n] = Phi H x[n] (under H1) + w_phi[n], split into the Phi_s and Phi_o
/// channels. Draw order from `rng`: the signal coefficients for all
/// snapshots (H1 only, drawn even when sigma_x2 == 0), then the device noise
/// snapshot by snapshot, device by device.
SampleBlock sample_block(const MeasurementDesign& design, const Matrix& h, double sigma_x2,
                         double sigma_02, int nb, Hypothesis hyp, Rng& rng,
                         NoiseModel noise = NoiseModel::ambient);

SampleBlock sample_measurements(const SubspaceModel& model, const MeasurementDesign& design,
                                int nb, Hypothesis hyp, std::uint64_t seed,
                                NoiseModel noise = NoiseModel::ambient);

/// `replicas` blocks sharing one signal realization x[n] but with
/// independent device noise, as produced by L identical device banks.
std::vector<SampleBlock> sample_replicates(const MeasurementDesign& design, const Matrix& h,
                                           double sigma_x2, double sigma_02, int nb,
                                           Hypothesis hyp, int replicas, Rng& rng,
                                           NoiseModel noise = NoiseModel::ambient);

/// Adds N(0, 1/delta) to every entry of each replica and averages the
/// replicas entrywise. The replica count must equal cfg.L.
SampleBlock apply_imprecision(std::span<const SampleBlock> replicas, const ImpreciseConfig& cfg,
                              Rng& rng);
SampleBlock apply_imprecision(std::span<const SampleBlock> replicas, const ImpreciseConfig& cfg,
                              std::uint64_t seed);
SampleBlock apply_imprecision(const SampleBlock& block, const ImpreciseConfig& cfg,
                              std::uint64_t seed);

}  // namespace csd
