// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "channel.hpp"
#include "core.hpp"
#include "pairing.hpp"

namespace starnoma {

/// Per-cluster surface coefficients for both faces; |u_m| is the amplitude.
struct SurfaceProfile {
    Cvec reflect;
    Cvec transmit;

    const Cvec& row(Side s) const { return s == Side::reflect ? reflect : transmit; }
    Cvec& row(Side s) { return s == Side::reflect ? reflect : transmit; }
    Eigen::Index size() const { return reflect.size(); }
};

/// Uniform-phase profile with the given reflect amplitude share.
inline SurfaceProfile uniform_profile(int M, double reflect_amplitude) {
    return {Cvec::Constant(M, cd(reflect_amplitude, 0.0)), Cvec::Constant(M, cd(1.0 - reflect_amplitude, 0.0))};
}

/// Active beamformers and surface profiles, one of each per cluster.
struct BeamState {
    std::vector<Cvec> w;
    std::vector<SurfaceProfile> profile;
};

/// Power coefficients per user and time fractions per cluster.
struct ResourcePlan {
    std::vector<double> power;
    std::vector<double> time;
    int strongest_cluster = -1;
    bool feasible = true;
    double qos_scale = 1.0; // < 1 when targets were scaled down to fit the frame
    std::vector<std::string> diagnostics;
};

/// End-to-end channel of user k under cluster c's profile.
inline RowCvec user_channel(const ChannelSet& ch, const SurfaceProfile& prof, int k) {
    const auto ku = static_cast<std::size_t>(k);
    return compose_end_to_end(ch.surface_to_user[ku], prof.row(ch.user_state[ku]), ch.bs_to_surface);
}

/// End-to-end channels of every user under its own cluster's profile.
inline std::vector<RowCvec> clustered_channels(const ChannelSet& ch, const ClusterPlan& plan,
                                               const std::vector<SurfaceProfile>& profiles) {
    std::vector<RowCvec> h(static_cast<std::size_t>(ch.n_users()));
    const auto cl = plan.cluster_of();
    for (int k = 0; k < ch.n_users(); ++k) h[k] = user_channel(ch, profiles.at(static_cast<std::size_t>(cl[k])), k);
    return h;
}

/// End-to-end channels of every user under one shared profile.
inline std::vector<RowCvec> shared_channels(const ChannelSet& ch, const SurfaceProfile& prof) {
    std::vector<RowCvec> h(static_cast<std::size_t>(ch.n_users()));
    for (int k = 0; k < ch.n_users(); ++k) h[k] = user_channel(ch, prof, k);
    return h;
}

} // namespace starnoma
