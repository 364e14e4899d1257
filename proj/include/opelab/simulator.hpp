#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opelab/pomdp.hpp"

namespace opelab {

struct Trajectory {
    std::vector<int> obs;
    std::vector<int> acts;
    std::vector<double> rews;
    std::vector<double> bprobs;  // logged pi_b(a_h | o_h)
    std::vector<int> latent;     // diagnostic only; empty when not retained
    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct TrajectoryDataset {
    std::uint64_t fingerprint = 0;
    std::uint64_t seed = 0;
    int horizon = 0;
    std::vector<Trajectory> trajectories;

    std::size_t size() const { return trajectories.size(); }
    friend bool operator==(const TrajectoryDataset&, const TrajectoryDataset&) = default;
};

/**
 * What estimators may read: observations, actions, rewards and logged
 * behavior probabilities. Latent states are not reachable through it.
 * A view can cover a prefix of the dataset.
 */
class ObservedView {
public:
    explicit ObservedView(const TrajectoryDataset& d) : ObservedView(d, d.size()) {}
    ObservedView(const TrajectoryDataset& d, std::size_t prefix);

    std::size_t size() const { return n_; }
    int horizon() const { return data_->horizon; }
    int obs(std::size_t i, int h) const { return data_->trajectories[i].obs[h]; }
    int act(std::size_t i, int h) const { return data_->trajectories[i].acts[h]; }
    double rew(std::size_t i, int h) const { return data_->trajectories[i].rews[h]; }
    double bprob(std::size_t i, int h) const { return data_->trajectories[i].bprobs[h]; }

private:
    const TrajectoryDataset* data_;
    std::size_t n_;
};

struct SampleOptions {
    bool keep_latent = true;
    int threads = 1;
};

/// Trajectory i draws from its own stream keyed by (root_seed, i), so the
/// output does not depend on the thread count.
TrajectoryDataset sample_dataset(const TabularPOMDP& model, const MemorylessPolicy& pi_b, std::size_t n,
                                 std::uint64_t root_seed, const SampleOptions& options = {});

/// JSONL: a header line {"format","fingerprint","seed","n","H"}, then one
/// {"obs","acts","rews","bprobs"[,"latent"]} object per trajectory.
void write_dataset(const std::string& path, const TrajectoryDataset& data);
std::string dataset_to_jsonl(const TrajectoryDataset& data);
/// ParseError naming the 1-based line for malformed or truncated input. With a
/// model, a fingerprint mismatch raises ModelError.
TrajectoryDataset read_dataset(const std::string& path, const TabularPOMDP* model = nullptr);
TrajectoryDataset dataset_from_jsonl(const std::string& text, const TabularPOMDP* model = nullptr);

}  // namespace opelab
