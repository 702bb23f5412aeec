#include "model.hpp"

#include <cmath>

#include "errors.hpp"
#include "hermitian.hpp"

namespace wpcj {

namespace {

// Counter-based generator: every channel entry owns an independent stream
// keyed by (seed, trial, vector, index), which is what makes draws
// extendable across M/N sweep points.
struct EntryRng {
    std::uint64_t state;

    EntryRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t vec, std::uint64_t idx) {
        state = seed;
        absorb(trial + 0x517cc1b727220a95ULL);
        absorb(vec + 0x6c62272e07bb0142ULL);
        absorb(idx + 0x2545f4914f6cdd1dULL);
    }

    void absorb(std::uint64_t v) {
        state ^= v;
        next();
    }

    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // standard normal pair via Box-Muller (explicit, for reproducibility)
    std::pair<double, double> normal2() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
    }

    cxd circular_normal() {
        auto [a, b] = normal2();
        return cxd(a, b) / std::sqrt(2.0);
    }
};

constexpr std::uint64_t kVecBd = 0, kVecBe = 1, kVecCd = 2, kVecCe = 3;

cxd rician_entry(std::uint64_t seed, std::uint64_t trial, std::uint64_t vec, int idx, double k) {
    EntryRng rng(seed, trial, vec, static_cast<std::uint64_t>(idx));
    const cxd scatter = rng.circular_normal();
    const double phi = 2.0 * kPi * rng.uniform();
    const cxd los = std::sqrt(k) * cxd(std::cos(phi), std::sin(phi));
    return (los + scatter) / std::sqrt(1.0 + k);
}

cxd rayleigh_entry(std::uint64_t seed, std::uint64_t trial, std::uint64_t vec, int idx) {
    EntryRng rng(seed, trial, vec, static_cast<std::uint64_t>(idx));
    return rng.circular_normal();
}

} // namespace

void SystemConfig::validate() const {
    if (m_antennas < 1) throw InvalidConfig("M must be a positive integer");
    if (n_nodes < 2) throw InvalidConfig("at least two cooperative nodes are required");
    if (!(p_bs_max_w > 0.0)) throw InvalidConfig("BS power budget must be positive");
    if (p_harvested_w.size() != n_nodes) throw InvalidConfig("harvested power vector must have N entries");
    if (!(p_harvested_w.minCoeff() > 0.0)) throw InvalidConfig("harvested powers must be positive");
    if (!(sigma2_w > 0.0)) throw InvalidConfig("noise variance must be positive");
    if (gamma_e < 0.0) throw InvalidConfig("eavesdropper SINR cap must be nonnegative");
    if (rs_min < 0.0) throw InvalidConfig("secrecy-rate target must be nonnegative");
    if (rician_k < 0.0) throw InvalidConfig("Rician K-factor must be nonnegative");
}

SystemConfig SystemConfig::make(int m, int n, double p_bs_w, double p_i_w, double sigma2_w,
                                double gamma_e, double rs_min, double rician_k, std::uint64_t seed) {
    SystemConfig cfg;
    cfg.m_antennas = m;
    cfg.n_nodes = n;
    cfg.p_bs_max_w = p_bs_w;
    cfg.p_harvested_w = VecXd::Constant(n, p_i_w);
    cfg.sigma2_w = sigma2_w;
    cfg.gamma_e = gamma_e;
    cfg.rs_min = rs_min;
    cfg.rician_k = rician_k;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

void ChannelSet::check_dims(const SystemConfig& cfg) const {
    if (h_bd.size() != cfg.m_antennas || h_be.size() != cfg.m_antennas)
        throw DimensionMismatch("BS channel length must equal M");
    if (h_cd.size() != cfg.n_nodes || h_ce.size() != cfg.n_nodes)
        throw DimensionMismatch("node channel length must equal N");
}

void TransmitDesign::validate() const {
    const int n = static_cast<int>(q_cov.rows());
    if (q_cov.cols() != n) throw DimensionMismatch("Q must be square");
    if (!is_hermitian(q_cov, 1e-10)) throw DimensionMismatch("Q must be Hermitian");
    Eigen::SelfAdjointEigenSolver<MatXcd> eig(q_cov, Eigen::EigenvaluesOnly);
    const double lmax = std::max(0.0, eig.eigenvalues().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, lmax))
        throw InvalidConfig("Q must be positive semidefinite");
    if (q_vec) {
        if (q_vec->size() != n) throw DimensionMismatch("q must have length N");
        const double err = (q_cov - (*q_vec) * q_vec->adjoint()).norm();
        if (err > 1e-8 * (1.0 + q_cov.norm())) throw InvalidConfig("Q must equal q q^H when q is present");
    }
}

ChannelSet sample_channels(const SystemConfig& cfg, std::uint64_t trial_index) {
    cfg.validate();
    ChannelSet ch;
    ch.h_bd.resize(cfg.m_antennas);
    ch.h_be.resize(cfg.m_antennas);
    ch.h_cd.resize(cfg.n_nodes);
    ch.h_ce.resize(cfg.n_nodes);
    for (int i = 0; i < cfg.m_antennas; ++i) {
        ch.h_bd[i] = rician_entry(cfg.seed, trial_index, kVecBd, i, cfg.rician_k);
        ch.h_be[i] = rician_entry(cfg.seed, trial_index, kVecBe, i, cfg.rician_k);
    }
    for (int i = 0; i < cfg.n_nodes; ++i) {
        ch.h_cd[i] = rayleigh_entry(cfg.seed, trial_index, kVecCd, i);
        ch.h_ce[i] = rayleigh_entry(cfg.seed, trial_index, kVecCe, i);
    }
    return ch;
}

RateReport rates(const TransmitDesign& design, const ChannelSet& ch, double sigma2_w) {
    if (!(sigma2_w > 0.0)) throw InvalidConfig("noise variance must be positive");
    if (design.v.size() != ch.h_bd.size() || ch.h_bd.size() != ch.h_be.size())
        throw DimensionMismatch("beamformer and BS channels disagree");
    if (design.q_cov.rows() != ch.h_cd.size() || ch.h_cd.size() != ch.h_ce.size())
        throw DimensionMismatch("jamming covariance and node channels disagree");

    RateReport r;
    const double sig_d = std::norm(ch.h_bd.dot(design.v));
    const double sig_e = std::norm(ch.h_be.dot(design.v));
    const double int_d = (ch.h_cd.adjoint() * design.q_cov * ch.h_cd).value().real();
    const double int_e = (ch.h_ce.adjoint() * design.q_cov * ch.h_ce).value().real();
    r.sinr_d = sig_d / (int_d + sigma2_w);
    r.sinr_e = sig_e / (int_e + sigma2_w);
    r.r_d = std::log2(1.0 + r.sinr_d);
    r.r_e = std::log2(1.0 + r.sinr_e);
    r.r_s = r.r_d - r.r_e;
    return r;
}

FeasibilityReport check_feasibility(const TransmitDesign& design, const SystemConfig& cfg) {
    FeasibilityReport rep;
    rep.tol_w = 1e-7 * std::max(1.0, cfg.p_bs_max_w);
    const double vpow = design.v.squaredNorm();
    rep.bs_violation_w = std::max(0.0, vpow - cfg.p_bs_max_w);
    rep.bs_power_ok = vpow <= cfg.p_bs_max_w + rep.tol_w;

    rep.node_violation_w = VecXd::Zero(cfg.n_nodes);
    rep.node_power_ok = true;
    for (int i = 0; i < cfg.n_nodes; ++i) {
        const double qi = design.q_cov(i, i).real();
        rep.node_violation_w[i] = std::max(0.0, qi - cfg.p_harvested_w[i]);
        if (qi > cfg.p_harvested_w[i] + rep.tol_w) rep.node_power_ok = false;
    }

    Eigen::SelfAdjointEigenSolver<MatXcd> eig(design.q_cov, Eigen::EigenvaluesOnly);
    rep.min_q_eigenvalue = eig.eigenvalues().minCoeff();
    rep.psd_ok = rep.min_q_eigenvalue >= -rep.tol_w;
    return rep;
}

double gamma_d_from(double rs_min, double gamma_e) {
    if (rs_min < 0.0 || gamma_e < 0.0) throw InvalidConfig("rs_min and gamma_e must be nonnegative");
    return std::exp2(rs_min) * (1.0 + gamma_e) - 1.0;
}

} // namespace wpcj
