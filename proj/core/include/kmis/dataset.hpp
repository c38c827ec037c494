#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kmis/linalg.hpp"

namespace kmis {

/// Logged interaction data: states, taken actions, observed rewards, and the
/// (clipped) behavior density of each taken action. Row-major flat storage.
struct LoggedDataset {
    int state_dim = 0;
    int action_dim = 0;
    std::vector<double> states;
    std::vector<double> actions;
    Vec rewards;
    Vec behavior_density;

    std::size_t size() const { return rewards.size(); }

    std::span<const double> state(std::size_t i) const {
        return {states.data() + i * static_cast<std::size_t>(state_dim),
                static_cast<std::size_t>(state_dim)};
    }
    std::span<const double> action(std::size_t i) const {
        return {actions.data() + i * static_cast<std::size_t>(action_dim),
                static_cast<std::size_t>(action_dim)};
    }
    Vec state_vec(std::size_t i) const {
        auto s = state(i);
        return Vec(s.begin(), s.end());
    }
    Vec action_vec(std::size_t i) const {
        auto a = action(i);
        return Vec(a.begin(), a.end());
    }

    /// Throws std::invalid_argument if any row is non-finite, any density is
    /// not strictly positive, dims are inconsistent, or the set is empty.
    void validate() const;

    /// Subset by row indices, in the order given.
    LoggedDataset select(std::span<const std::size_t> idx) const;
};

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double x);
double parse_double(const std::string& token);

/// CSV with header s_1..s_<Ds>,a_1..a_<Da>,r,pb.
void save_dataset_csv(const LoggedDataset& ds, const std::string& path);
LoggedDataset load_dataset_csv(const std::string& path);

}  // namespace kmis
