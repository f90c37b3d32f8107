// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "config.hpp"
#include "core.hpp"
#include "random.hpp"
#include "units.hpp"

namespace starnoma {

/// Elevation/azimuth pair, both in [-pi/2, pi/2].
struct Angles {
    double elevation = 0.0;
    double azimuth = 0.0;
};

/// One channel realization. H is M x N_t; g[k] has M entries.
struct ChannelSet {
    Cmat bs_to_surface;
    std::vector<Cvec> surface_to_user;
    std::vector<Side> user_state;
    std::vector<Vec3> user_positions;

    int n_users() const { return static_cast<int>(surface_to_user.size()); }
    int n_elements() const { return static_cast<int>(bs_to_surface.rows()); }
    int n_antennas() const { return static_cast<int>(bs_to_surface.cols()); }
};

namespace detail {
inline void check_angle(double a, const char* what) {
    constexpr double lim = kPi / 2.0 + 1e-12;
    if (!(a >= -lim && a <= lim)) throw InvalidArgument(std::string("angle out of [-pi/2, pi/2]: ") + what);
}
} // namespace detail

/// UPA response, entry (m_y, m_z) at index m_y + rows*m_z, normalized to unit norm.
inline Cvec upa_steering(double elevation, double azimuth, int rows, int cols, double spacing) {
    detail::check_angle(elevation, "elevation");
    detail::check_angle(azimuth, "azimuth");
    if (rows <= 0 || cols <= 0) throw InvalidArgument("upa_steering: array dimensions must be positive");
    const double ky = 2.0 * kPi * spacing * std::cos(elevation) * std::sin(azimuth);
    const double kz = 2.0 * kPi * spacing * std::sin(elevation);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows) * cols);
    Cvec v(static_cast<Eigen::Index>(rows) * cols);
    for (int mz = 0; mz < cols; ++mz)
        for (int my = 0; my < rows; ++my) v(my + rows * mz) = std::polar(scale, ky * my + kz * mz);
    return v;
}

/// Surface-to-user response: unit-magnitude entries with a phase progression along y only.
inline Cvec user_steering(double elevation, double azimuth, int rows, int cols, double spacing) {
    detail::check_angle(elevation, "elevation");
    detail::check_angle(azimuth, "azimuth");
    if (rows <= 0 || cols <= 0) throw InvalidArgument("user_steering: array dimensions must be positive");
    const double ky = 2.0 * kPi * spacing * std::cos(elevation) * std::sin(azimuth);
    Cvec v(static_cast<Eigen::Index>(rows) * cols);
    for (int mz = 0; mz < cols; ++mz)
        for (int my = 0; my < rows; ++my) v(my + rows * mz) = std::polar(1.0, ky * my);
    return v;
}

/// Log-distance path loss in dB with a 1 m reference distance.
inline double path_loss_db(double distance, double ref_db, double exponent, double shadow_db) {
    if (!(distance > 0.0)) throw InvalidArgument("path_loss_db: distance must be positive");
    return ref_db + 10.0 * exponent * std::log10(distance) + shadow_db;
}

/// Direction angles of `to` seen from `from`, for an array in the y-z plane.
inline Angles direction_angles(const Vec3& from, const Vec3& to) {
    const Vec3 d = to - from;
    const double r = d.norm();
    if (r == 0.0) return {};
    return {std::asin(std::clamp(d.z() / r, -1.0, 1.0)), std::atan2(d.y(), std::abs(d.x()))};
}

/// A user is served by reflection when it lies on the BS side of the plane x = surface.x.
inline Side side_of(const Vec3& user, const Vec3& surface, const Vec3& bs) {
    const double u = user.x() - surface.x();
    const double b = bs.x() - surface.x();
    if (u == 0.0 || (u > 0.0) == (b > 0.0)) return Side::reflect;
    return Side::transmit;
}

/// Draws one realization. Draw order: user positions, LoS gains and shadowing, NLoS entries.
inline ChannelSet synthesize_channels(const SystemConfig& cfg, Rng& rng) {
    const int M = cfg.n_surface_elements;
    const int Nt = cfg.n_tx_antennas;
    const int K = cfg.n_users;
    const double spacing = 0.5;
    const double array_gain = std::sqrt(static_cast<double>(Nt) * M);

    ChannelSet ch;
    ch.user_positions.reserve(K);
    ch.user_state.reserve(K);
    for (int k = 0; k < K; ++k) {
        const double r = cfg.user_region_radius * std::sqrt(uniform01(rng));
        const double a = 2.0 * kPi * uniform01(rng);
        const Vec3 p = cfg.surface_position + Vec3(r * std::cos(a), r * std::sin(a), 0.0);
        ch.user_positions.push_back(p);
        ch.user_state.push_back(side_of(p, cfg.surface_position, cfg.bs_position));
    }

    auto los_gain = [&]() -> cd {
        return cfg.los_gain == GainLaw::unit ? cd(1.0, 0.0) : complex_gaussian(rng, 1.0);
    };
    auto shadow = [&]() -> double {
        return cfg.shadowing == ShadowingMode::fixed ? cfg.shadowing_db : cfg.shadowing_db * gaussian(rng);
    };

    const cd h_los = los_gain();
    const double pl_br = path_loss_db((cfg.surface_position - cfg.bs_position).norm(), cfg.pathloss_ref_db,
                                      cfg.pathloss_exp_bs_surface, shadow());
    std::vector<cd> g_los(K);
    std::vector<double> pl_ru(K);
    for (int k = 0; k < K; ++k) {
        g_los[k] = los_gain();
        const double d = std::max(cfg.min_user_distance, (ch.user_positions[k] - cfg.surface_position).norm());
        pl_ru[k] = path_loss_db(d, cfg.pathloss_ref_db, cfg.pathloss_exp_surface_user, shadow());
    }

    const Angles aoa = direction_angles(cfg.surface_position, cfg.bs_position);
    const Angles aod = direction_angles(cfg.bs_position, cfg.surface_position);
    const Cvec hr = upa_steering(aoa.elevation, aoa.azimuth, cfg.surface_rows, cfg.surface_cols, spacing);
    const Cvec ht = upa_steering(aod.elevation, aod.azimuth, cfg.n_tx_rows, cfg.n_tx_cols, spacing);
    const double gain_br = loss_db_to_gain(pl_br);
    ch.bs_to_surface = (std::sqrt(gain_br) * array_gain * h_los) * (hr * ht.adjoint());

    ch.surface_to_user.resize(K);
    for (int k = 0; k < K; ++k) {
        const Angles a = direction_angles(cfg.surface_position, ch.user_positions[k]);
        const Cvec gt = user_steering(a.elevation, a.azimuth, cfg.surface_rows, cfg.surface_cols, spacing);
        ch.surface_to_user[k] = (std::sqrt(loss_db_to_gain(pl_ru[k])) * array_gain * g_los[k]) * gt;
    }

    if (cfg.include_nlos) {
        for (Eigen::Index j = 0; j < ch.bs_to_surface.cols(); ++j)
            for (Eigen::Index i = 0; i < ch.bs_to_surface.rows(); ++i)
                ch.bs_to_surface(i, j) += complex_gaussian(rng, gain_br);
        for (int k = 0; k < K; ++k) {
            const double var = loss_db_to_gain(pl_ru[k]);
            for (Eigen::Index m = 0; m < ch.surface_to_user[k].size(); ++m)
                ch.surface_to_user[k](m) += complex_gaussian(rng, var);
        }
    }
    return ch;
}

/// Realization for one Monte Carlo trial of cfg.
inline ChannelSet synthesize_trial(const SystemConfig& cfg, std::uint64_t trial) {
    Rng rng = make_rng(cfg.seed, trial, Stream::channel);
    return synthesize_channels(cfg, rng);
}

/// g^H diag(u) H as a row vector.
inline RowCvec compose_end_to_end(const Cvec& g, const Cvec& profile_row, const Cmat& H) {
    if (g.size() != profile_row.size() || g.size() != H.rows())
        throw InvalidArgument("compose_end_to_end: dimension mismatch");
    const Cvec weights = g.conjugate().cwiseProduct(profile_row);
    return weights.transpose() * H;
}

/// Per-element cascade diag(g^H) H w, so that compose(g, u, H) w = sum_m u_m e_m.
inline Cvec element_cascade(const Cvec& g, const Cmat& H, const Cvec& w) {
    if (g.size() != H.rows() || w.size() != H.cols()) throw InvalidArgument("element_cascade: dimension mismatch");
    return g.conjugate().cwiseProduct(H * w);
}

/// Multiplies user k's surface channel by an amplitude factor (used for penetration loss).
inline void attenuate_user(ChannelSet& ch, int k, double loss_db) {
    ch.surface_to_user.at(static_cast<std::size_t>(k)) *= std::sqrt(loss_db_to_gain(loss_db));
}

} // namespace starnoma
