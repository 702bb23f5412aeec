#pragma once

#include <cstdint>
#include <optional>

#include "dense.hpp"

namespace wpcj {

// Downlink secure-transmission system: an M-antenna base station serves one
// destination while N single-antenna cooperative nodes (the first two fixed)
// jam an eavesdropper, each node capped by its harvested power.
struct SystemConfig {
    int m_antennas = 8;          // M
    int n_nodes = 4;             // N >= 2
    double p_bs_max_w = 10.0;    // BS power budget, watts
    VecXd p_harvested_w;         // per-node cap P_i, watts
    double sigma2_w = 1e-5;      // noise variance, watts
    double gamma_e = 0.1;        // eavesdropper SINR cap, linear
    double rs_min = 2.0;         // secrecy-rate target, bits/s/Hz (power-min designs)
    double rician_k = 3.0;       // linear Rician K-factor of the BS links
    std::uint64_t seed = 1;

    void validate() const; // throws InvalidConfig on violated invariants

    static SystemConfig make(int m, int n, double p_bs_w, double p_i_w, double sigma2_w = 1e-5,
                             double gamma_e = 0.1, double rs_min = 2.0, double rician_k = 3.0,
                             std::uint64_t seed = 1);
};

struct ChannelSet {
    VecXcd h_bd; // BS -> destination, length M
    VecXcd h_be; // BS -> eavesdropper, length M
    VecXcd h_cd; // nodes -> destination, length N
    VecXcd h_ce; // nodes -> eavesdropper, length N

    void check_dims(const SystemConfig& cfg) const;
};

struct TransmitDesign {
    VecXcd v;                     // BS beamforming vector, length M
    MatXcd q_cov;                 // jamming covariance Q, N x N Hermitian PSD
    std::optional<VecXcd> q_vec;  // weight vector q with Q = q q^H, when rank-1

    void validate() const;
};

struct RateReport {
    double r_d = 0.0;    // bits/s/Hz
    double r_e = 0.0;    // bits/s/Hz
    double r_s = 0.0;    // r_d - r_e, unclamped; report max(0, .) downstream
    double sinr_d = 0.0; // linear
    double sinr_e = 0.0; // linear
};

struct FeasibilityReport {
    bool bs_power_ok = false;
    bool node_power_ok = false;
    bool psd_ok = false;
    double bs_violation_w = 0.0; // max(0, |v|^2 - P_BS)
    VecXd node_violation_w;      // per node, max(0, Q_ii - P_i)
    double min_q_eigenvalue = 0.0;
    double tol_w = 0.0;

    bool feasible() const { return bs_power_ok && node_power_ok && psd_ok; }
};

// Channel draw for one Monte-Carlo trial. Entry k of each vector depends
// only on (seed, trial_index, vector, k), so growing M or N extends a draw
// without disturbing the existing entries (common random numbers across
// sweep points). BS links are Rician with the configured K-factor and unit
// second moment; node links are CN(0,1).
ChannelSet sample_channels(const SystemConfig& cfg, std::uint64_t trial_index);

RateReport rates(const TransmitDesign& design, const ChannelSet& ch, double sigma2_w);

FeasibilityReport check_feasibility(const TransmitDesign& design, const SystemConfig& cfg);

// SINR floor at the destination needed to reach a secrecy-rate target given
// the eavesdropper cap: gamma_d = 2^rs (1 + gamma_e) - 1.
double gamma_d_from(double rs_min, double gamma_e);

} // namespace wpcj
