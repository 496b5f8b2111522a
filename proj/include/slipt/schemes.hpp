// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slipt/channel.hpp"
#include "slipt/signal_model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace slipt {

/// Multiple-access scheme of the downlink. The rate-splitting scheme carries
/// a shared common stream on top of the private ones; the other two drop it,
/// space-division by treating all interference as noise and NOMA by
/// successive decoding under a fixed order.
enum class Scheme { rsma, sdma, noma };

std::string to_string(Scheme scheme);

/// Parses "rsma" | "sdma" | "noma", case-insensitive. Throws ParseError.
Scheme parse_scheme(const std::string& text);

/// Scheme selection plus, for NOMA, the successive-decoding order: order[i]
/// is the 0-based user whose stream occupies decoding position i. An empty
/// order defers to default_noma_order at build time.
struct SchemeConfig {
    Scheme kind = Scheme::rsma;
    std::vector<int> noma_order;
};

/// Users sorted by descending channel norm, ties broken by user index. The
/// user in position j decodes and cancels the streams of every later
/// position before its own, so the stream in position i sees interference
/// only from positions before i and must be decodable by its owner and by
/// every earlier-positioned (stronger) user.
std::vector<int> default_noma_order(const ChannelMatrix& ch);

/// Throws ValidationError unless order is a permutation of 0..n_users-1.
void validate_noma_order(const std::vector<int>& order, int n_users);

/// The config's explicit order when present (validated), else the default.
std::vector<int> resolve_noma_order(const SchemeConfig& cfg, const ChannelMatrix& ch);

/// Rate lower bound at which the user in decoding position pos <= layer can
/// decode the stream in position layer: the streams of positions after layer
/// are already cancelled when it is reached, those before it remain
/// interference. Beams use the usual layout with column 0 (the common
/// stream) ignored; taus and eps_sigs are indexed by stream.
double noma_pair_rate_lb(const ChannelMatrix& ch, const BeamformerSet& beams,
                         const Eigen::VectorXd& taus, const Eigen::VectorXd& eps_sigs,
                         double sigma2, const std::vector<int>& order, int layer, int pos);

/// Decodability bound of the stream in position layer: the minimum of
/// noma_pair_rate_lb over all positions pos <= layer that must decode it.
double noma_layer_rate_lb(const ChannelMatrix& ch, const BeamformerSet& beams,
                          const Eigen::VectorXd& taus, const Eigen::VectorXd& eps_sigs,
                          double sigma2, const std::vector<int>& order, int layer);

} // namespace slipt
