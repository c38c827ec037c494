#include "kmis/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace kmis {

void LoggedDataset::validate() const {
    if (state_dim < 1 || action_dim < 1)
        throw std::invalid_argument("LoggedDataset: dimensions must be >= 1");
    const std::size_t n = rewards.size();
    if (n == 0) throw std::invalid_argument("LoggedDataset: empty");
    if (states.size() != n * static_cast<std::size_t>(state_dim) ||
        actions.size() != n * static_cast<std::size_t>(action_dim) ||
        behavior_density.size() != n)
        throw std::invalid_argument("LoggedDataset: inconsistent row counts");
    for (double x : states)
        if (!std::isfinite(x)) throw std::invalid_argument("LoggedDataset: non-finite state");
    for (double x : actions)
        if (!std::isfinite(x)) throw std::invalid_argument("LoggedDataset: non-finite action");
    for (double x : rewards)
        if (!std::isfinite(x)) throw std::invalid_argument("LoggedDataset: non-finite reward");
    for (double x : behavior_density)
        if (!(x > 0.0) || !std::isfinite(x))
            throw std::invalid_argument("LoggedDataset: behavior density must be positive");
}

LoggedDataset LoggedDataset::select(std::span<const std::size_t> idx) const {
    LoggedDataset out;
    out.state_dim = state_dim;
    out.action_dim = action_dim;
    out.states.reserve(idx.size() * state_dim);
    out.actions.reserve(idx.size() * action_dim);
    out.rewards.reserve(idx.size());
    out.behavior_density.reserve(idx.size());
    for (std::size_t i : idx) {
        auto s = state(i);
        auto a = action(i);
        out.states.insert(out.states.end(), s.begin(), s.end());
        out.actions.insert(out.actions.end(), a.begin(), a.end());
        out.rewards.push_back(rewards[i]);
        out.behavior_density.push_back(behavior_density[i]);
    }
    return out;
}

std::string format_double(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = first + token.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
        throw std::invalid_argument("not a number: '" + token + "'");
    return value;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void save_dataset_csv(const LoggedDataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    for (int d = 1; d <= ds.state_dim; ++d) f << "s_" << d << ",";
    for (int d = 1; d <= ds.action_dim; ++d) f << "a_" << d << ",";
    f << "r,pb\n";
    const std::size_t n = ds.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (double x : ds.state(i)) f << format_double(x) << ",";
        for (double x : ds.action(i)) f << format_double(x) << ",";
        f << format_double(ds.rewards[i]) << "," << format_double(ds.behavior_density[i])
          << "\n";
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

LoggedDataset load_dataset_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty file: " + path);

    const auto header = split_csv_line(line);
    int ds_dim = 0, da_dim = 0;
    std::size_t col = 0;
    while (col < header.size() && header[col] == "s_" + std::to_string(ds_dim + 1)) {
        ++ds_dim;
        ++col;
    }
    while (col < header.size() && header[col] == "a_" + std::to_string(da_dim + 1)) {
        ++da_dim;
        ++col;
    }
    if (ds_dim == 0 || da_dim == 0 || col + 2 != header.size() || header[col] != "r" ||
        header[col + 1] != "pb")
        throw std::runtime_error(path + ": bad header, want s_1..s_Ds,a_1..a_Da,r,pb");

    LoggedDataset ds;
    ds.state_dim = ds_dim;
    ds.action_dim = da_dim;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": wrong field count");
        try {
            std::size_t c = 0;
            for (int d = 0; d < ds_dim; ++d) ds.states.push_back(parse_double(cells[c++]));
            for (int d = 0; d < da_dim; ++d) ds.actions.push_back(parse_double(cells[c++]));
            ds.rewards.push_back(parse_double(cells[c++]));
            ds.behavior_density.push_back(parse_double(cells[c++]));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    ds.validate();
    return ds;
}

}  // namespace kmis
