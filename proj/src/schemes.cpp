// SPDX-License-Identifier: Apache-2.0
#include "slipt/schemes.hpp"
#include "slipt/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace slipt {

std::string to_string(Scheme scheme) {
    switch (scheme) {
    case Scheme::rsma: return "rsma";
    case Scheme::sdma: return "sdma";
    case Scheme::noma: return "noma";
    }
    throw ValidationError("to_string: unknown scheme");
}

Scheme parse_scheme(const std::string& text) {
    std::string lower;
    lower.reserve(text.size());
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "rsma") return Scheme::rsma;
    if (lower == "sdma") return Scheme::sdma;
    if (lower == "noma") return Scheme::noma;
    throw ParseError("parse_scheme: expected rsma, sdma, or noma, got '" + text + "'");
}

std::vector<int> default_noma_order(const ChannelMatrix& ch) {
    std::vector<int> order(static_cast<std::size_t>(ch.n_users()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&ch](int a, int b) {
        return ch.gains.row(a).norm() > ch.gains.row(b).norm();
    });
    return order;
}

void validate_noma_order(const std::vector<int>& order, int n_users) {
    if (static_cast<int>(order.size()) != n_users)
        throw ValidationError("noma_order: expected " + std::to_string(n_users) + " entries");
    std::vector<char> seen(static_cast<std::size_t>(n_users), 0);
    for (int u : order) {
        if (u < 0 || u >= n_users)
            throw ValidationError("noma_order: user index " + std::to_string(u) + " out of range");
        if (seen[static_cast<std::size_t>(u)]++)
            throw ValidationError("noma_order: user " + std::to_string(u) + " listed twice");
    }
}

std::vector<int> resolve_noma_order(const SchemeConfig& cfg, const ChannelMatrix& ch) {
    if (cfg.noma_order.empty()) return default_noma_order(ch);
    validate_noma_order(cfg.noma_order, ch.n_users());
    return cfg.noma_order;
}

double noma_pair_rate_lb(const ChannelMatrix& ch, const BeamformerSet& beams,
                         const Eigen::VectorXd& taus, const Eigen::VectorXd& eps_sigs,
                         double sigma2, const std::vector<int>& order, int layer, int pos) {
    const int n_layers = static_cast<int>(order.size());
    if (layer < 0 || pos > layer || pos < 0 || layer >= n_layers)
        throw ValidationError("noma_pair_rate_lb: need 0 <= pos <= layer < n_users");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const Eigen::VectorXd h = ch.user_row(order[static_cast<std::size_t>(pos)]);
    double num = two_pi * sigma2;
    double den = two_pi * sigma2;
    for (int l = 0; l <= layer; ++l) {
        const int stream = order[static_cast<std::size_t>(l)] + 1;
        const double g = h.dot(beams.private_beam(stream));
        num += taus(stream) * g * g;
        if (l < layer) den += two_pi * eps_sigs(stream) * g * g;
    }
    return 0.5 * std::log2(num / den);
}

double noma_layer_rate_lb(const ChannelMatrix& ch, const BeamformerSet& beams,
                          const Eigen::VectorXd& taus, const Eigen::VectorXd& eps_sigs,
                          double sigma2, const std::vector<int>& order, int layer) {
    double worst = std::numeric_limits<double>::infinity();
    for (int pos = 0; pos <= layer; ++pos)
        worst = std::min(worst,
                         noma_pair_rate_lb(ch, beams, taus, eps_sigs, sigma2, order, layer, pos));
    return worst;
}

} // namespace slipt
