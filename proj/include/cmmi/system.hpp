#pragma once

// Secure spatial-modulation link with a full-duplex jammer: scenario
// configuration, channel realizations, transmit/receive signal generation
// for both protocol slots, and the ground-truth interference covariance.

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cmmi/matrix.hpp"
#include "cmmi/numerics.hpp"

namespace cmmi {

enum class JammerPrecoding {
  RandomSemiUnitary,  // Haar-random Nm x Nm' with orthonormal columns
  ReceiveNullSpace,   // basis of the left null space of G*S when large enough
};

struct SystemConfig {
  std::size_t nx = 16;        // transmit array at Alice
  std::size_t nt = 16;        // activated antennas, 2^floor(log2 nx)
  std::size_t nb = 8;         // Bob antennas
  std::size_t nm = 6;         // Mallory antennas
  std::size_t nm_prime = 3;   // jamming streams
  double beta = 0.5;          // power fraction on the confidential symbol
  double p = 10.0;            // Alice transmit power (W)
  double pm = 1.0;            // Mallory jamming power (W)
  double sigma_a2 = 1.0;      // AN variance
  double sigma_m2 = 1.0;      // jamming source variance
  double sigma_b2 = 0.01;     // Bob receiver noise
  double sigma_mrx2 = 0.01;   // Mallory receiver noise, equal to Bob's
  std::size_t mod_order = 4;  // constellation size M
  std::size_t samples = 8;    // L, jamming-slot samples for estimation
  JammerPrecoding precoding = JammerPrecoding::RandomSemiUnitary;

  static std::size_t activated_antennas(std::size_t nx) {
    return nx == 0 ? 0 : std::bit_floor(nx);
  }

  void validate() const {
    auto fail = [](const std::string& msg) {
      throw std::invalid_argument("SystemConfig: " + msg);
    };
    if (nx == 0 || nb == 0 || nm == 0 || nm_prime == 0) fail("antenna counts must be positive");
    if (nt != activated_antennas(nx)) {
      fail("nt = " + std::to_string(nt) + " but 2^floor(log2 nx) = " +
           std::to_string(activated_antennas(nx)));
    }
    if (nm_prime >= nm) fail("nm_prime must be smaller than nm");
    if (!(beta >= 0.0 && beta <= 1.0)) fail("beta must lie in [0, 1]");
    for (double v : {p, pm, sigma_a2, sigma_m2, sigma_b2, sigma_mrx2}) {
      if (!(v >= 0.0) || !std::isfinite(v)) fail("powers and variances must be finite and >= 0");
    }
    if (mod_order < 2 || !std::has_single_bit(mod_order)) fail("mod_order must be a power of two >= 2");
    if (samples == 0) fail("samples must be positive");
  }
};

/// Unit-average-energy M-PSK alphabet; M = 4 gives Gray QPSK (+-1 +-i)/sqrt(2).
inline CVector constellation(std::size_t m) {
  if (m < 2 || !std::has_single_bit(m)) {
    throw std::invalid_argument("constellation: order must be a power of two >= 2");
  }
  CVector pts(m);
  for (std::size_t k = 0; k < m; ++k) {
    // Position p around the circle carries label p ^ (p >> 1) (Gray order), so
    // label k sits at the inverse Gray position.
    std::size_t pos = k;
    for (std::size_t shift = 1; shift < 64; shift <<= 1) pos ^= pos >> shift;
    pts[k] = std::polar(1.0, std::numbers::pi * (2.0 * static_cast<double>(pos) + 1.0) /
                                 static_cast<double>(m));
  }
  return pts;
}

struct ChannelSet {
  ComplexMatrix h;       // Nb x Nx, Alice -> Bob
  ComplexMatrix g;       // Nm x Nt, Alice (activated) -> Mallory
  ComplexMatrix f;       // Nb x Nm, Mallory -> Bob
  ComplexMatrix m_self;  // Nm x Nm, Mallory self-interference
  RealMatrix s;          // Nx x Nt antenna selection
  ComplexMatrix t_an;    // Nt x Nt AN precoder, (H S) T_AN = 0
  ComplexMatrix p_j;     // Nm x Nm' jamming precoder, orthonormal columns

  ComplexMatrix hs;  // H S, Nb x Nt (cached)
  ComplexMatrix gs;  // G, already in activated-antenna coordinates
};

/// 0-based antenna and symbol indices.
struct TransmitSymbol {
  std::size_t antenna = 0;
  std::size_t symbol = 0;
};

inline void check_symbol(const SystemConfig& cfg, const TransmitSymbol& sym) {
  if (sym.antenna >= cfg.nt || sym.symbol >= cfg.mod_order) {
    throw std::out_of_range("TransmitSymbol: index outside alphabet");
  }
}

inline RealMatrix selection_matrix(std::size_t nx, std::size_t nt) {
  RealMatrix s(nx, nt);
  for (std::size_t k = 0; k < nt; ++k) s(k, k) = 1.0;
  return s;
}

/// AN precoder: null-space projector of H S scaled so E||T_AN n_A||^2 = 1.
inline ComplexMatrix an_precoder(const ComplexMatrix& hs, double sigma_a2) {
  const NullSpace ns = null_space_projector(hs);
  const std::size_t dim = ns.dimension();
  if (dim == 0 || sigma_a2 == 0.0) return ComplexMatrix(hs.cols(), hs.cols());
  return ns.projector * cplx(1.0 / std::sqrt(sigma_a2 * static_cast<double>(dim)), 0.0);
}

inline ComplexMatrix jammer_precoder(const SystemConfig& cfg, const ComplexMatrix& gs,
                                     Rng& rng) {
  if (cfg.precoding == JammerPrecoding::ReceiveNullSpace) {
    // Directions Mallory's own confidential-message reception cannot see.
    const NullSpace ns = null_space_projector(gs.adjoint());
    if (ns.dimension() >= cfg.nm_prime) {
      ComplexMatrix pj(cfg.nm, cfg.nm_prime);
      for (std::size_t i = 0; i < cfg.nm; ++i)
        for (std::size_t k = 0; k < cfg.nm_prime; ++k) pj(i, k) = ns.basis(i, k);
      return pj;
    }
  }
  return random_semi_unitary(cfg.nm, cfg.nm_prime, rng);
}

/// One channel realization. Entries of H, G, F, M are i.i.d. CN(0, 1).
inline ChannelSet draw_channels(const SystemConfig& cfg, Rng& rng) {
  cfg.validate();
  for (;;) {
    ChannelSet ch;
    ch.h = sample_complex_gaussian_matrix(cfg.nb, cfg.nx, 1.0, rng);
    ch.g = sample_complex_gaussian_matrix(cfg.nm, cfg.nt, 1.0, rng);
    ch.f = sample_complex_gaussian_matrix(cfg.nb, cfg.nm, 1.0, rng);
    ch.m_self = sample_complex_gaussian_matrix(cfg.nm, cfg.nm, 1.0, rng);
    ch.s = selection_matrix(cfg.nx, cfg.nt);
    ch.hs = ch.h * to_complex(ch.s);
    ch.gs = ch.g;
    const NullSpace ns = null_space_projector(ch.hs);
    if (ns.row_rank < std::min(cfg.nb, cfg.nt)) continue;  // degenerate draw
    ch.t_an = an_precoder(ch.hs, cfg.sigma_a2);
    ch.p_j = jammer_precoder(cfg, ch.gs, rng);
    return ch;
  }
}

namespace detail {

inline void axpy(CVector& y, cplx a, std::span<const cplx> x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace detail

/// x_a = sqrt(beta P) e_n s_m + sqrt((1 - beta) P) T_AN n_A, length Nt.
inline CVector alice_signal(const SystemConfig& cfg, const ChannelSet& ch,
                            const TransmitSymbol& sym, Rng& rng) {
  check_symbol(cfg, sym);
  const CVector n_a = sample_complex_gaussian(cfg.nt, cfg.sigma_a2, rng);
  CVector x = ch.t_an * n_a;
  const double an_gain = std::sqrt((1.0 - cfg.beta) * cfg.p);
  for (auto& v : x) v *= an_gain;
  x[sym.antenna] += std::sqrt(cfg.beta * cfg.p) * constellation(cfg.mod_order)[sym.symbol];
  return x;
}

/// x_m = sqrt(P_M) P_J n_m, length Nm.
inline CVector mallory_signal(const SystemConfig& cfg, const ChannelSet& ch, Rng& rng) {
  const CVector n_m = sample_complex_gaussian(cfg.nm_prime, cfg.sigma_m2, rng);
  CVector x = ch.p_j * n_m;
  for (auto& v : x) v *= std::sqrt(cfg.pm);
  return x;
}

/// Slot-1 observation at Bob (Alice silent): sqrt(P_M) F P_J n_m + n_B.
inline CVector jamming_only_sample(const SystemConfig& cfg, const ChannelSet& ch, Rng& rng) {
  const CVector x_m = mallory_signal(cfg, ch, rng);
  CVector y = ch.f * x_m;
  const CVector n_b = sample_complex_gaussian(cfg.nb, cfg.sigma_b2, rng);
  detail::axpy(y, 1.0, n_b);
  return y;
}

inline std::vector<CVector> jamming_only_samples(const SystemConfig& cfg, const ChannelSet& ch,
                                                 std::size_t count, Rng& rng) {
  std::vector<CVector> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(jamming_only_sample(cfg, ch, rng));
  return out;
}

/// Additive terms of a slot-2 observation, kept separate for auditing.
struct ReceivedTerms {
  CVector signal;
  CVector artificial_noise;
  CVector jamming;
  CVector noise;

  CVector total() const {
    CVector y = signal;
    detail::axpy(y, 1.0, artificial_noise);
    detail::axpy(y, 1.0, jamming);
    detail::axpy(y, 1.0, noise);
    return y;
  }
};

inline ReceivedTerms receive_bob_terms(const SystemConfig& cfg, const ChannelSet& ch,
                                       const TransmitSymbol& sym, Rng& rng) {
  check_symbol(cfg, sym);
  const CVector n_a = sample_complex_gaussian(cfg.nt, cfg.sigma_a2, rng);
  const CVector n_m = sample_complex_gaussian(cfg.nm_prime, cfg.sigma_m2, rng);
  const CVector n_b = sample_complex_gaussian(cfg.nb, cfg.sigma_b2, rng);

  ReceivedTerms t;
  t.signal = ch.hs.col(sym.antenna);
  const cplx amp = std::sqrt(cfg.beta * cfg.p) * constellation(cfg.mod_order)[sym.symbol];
  for (auto& v : t.signal) v *= amp;
  t.artificial_noise = ch.hs * (ch.t_an * n_a);
  for (auto& v : t.artificial_noise) v *= std::sqrt((1.0 - cfg.beta) * cfg.p);
  t.jamming = ch.f * (ch.p_j * n_m);
  for (auto& v : t.jamming) v *= std::sqrt(cfg.pm);
  t.noise = n_b;
  return t;
}

inline CVector receive_bob(const SystemConfig& cfg, const ChannelSet& ch,
                           const TransmitSymbol& sym, Rng& rng) {
  return receive_bob_terms(cfg, ch, sym, rng).total();
}

inline ReceivedTerms receive_mallory_terms(const SystemConfig& cfg, const ChannelSet& ch,
                                           const TransmitSymbol& sym, Rng& rng) {
  check_symbol(cfg, sym);
  const CVector n_a = sample_complex_gaussian(cfg.nt, cfg.sigma_a2, rng);
  const CVector n_m = sample_complex_gaussian(cfg.nm_prime, cfg.sigma_m2, rng);
  const CVector n_mrx = sample_complex_gaussian(cfg.nm, cfg.sigma_mrx2, rng);

  ReceivedTerms t;
  t.signal = ch.gs.col(sym.antenna);
  const cplx amp = std::sqrt(cfg.beta * cfg.p) * constellation(cfg.mod_order)[sym.symbol];
  for (auto& v : t.signal) v *= amp;
  t.artificial_noise = ch.gs * (ch.t_an * n_a);
  for (auto& v : t.artificial_noise) v *= std::sqrt((1.0 - cfg.beta) * cfg.p);
  t.jamming = ch.m_self * (ch.p_j * n_m);  // self-interference residual
  for (auto& v : t.jamming) v *= std::sqrt(cfg.pm);
  t.noise = n_mrx;
  return t;
}

inline CVector receive_mallory(const SystemConfig& cfg, const ChannelSet& ch,
                               const TransmitSymbol& sym, Rng& rng) {
  return receive_mallory_terms(cfg, ch, sym, rng).total();
}

/// R_JJ = P_M sigma_m^2 F P_J P_J^H F^H.
inline HermitianMatrix population_interference_cov(const SystemConfig& cfg,
                                                   const ChannelSet& ch) {
  const ComplexMatrix fp = ch.f * ch.p_j;
  return HermitianMatrix::symmetrized(fp * fp.adjoint() * cplx(cfg.pm * cfg.sigma_m2, 0.0));
}

/// Covariance of Mallory's observation excluding the confidential symbol:
/// AN + self-interference + thermal noise.
inline HermitianMatrix mallory_disturbance_cov(const SystemConfig& cfg, const ChannelSet& ch) {
  const ComplexMatrix an = ch.gs * ch.t_an;
  const ComplexMatrix si = ch.m_self * ch.p_j;
  ComplexMatrix c = an * an.adjoint() * cplx((1.0 - cfg.beta) * cfg.p * cfg.sigma_a2, 0.0);
  c += si * si.adjoint() * cplx(cfg.pm * cfg.sigma_m2, 0.0);
  for (std::size_t i = 0; i < cfg.nm; ++i) c(i, i) += cfg.sigma_mrx2;
  return HermitianMatrix::symmetrized(c);
}

/// How a swept "SINR" value in dB is turned into a jamming power.
enum class SinrConvention {
  // SINR = beta P / (P_M sigma_m^2 Nm' + sigma_B^2): desired power over
  // jamming-plus-noise at a receive antenna.
  DesiredToInterference,
  // SINR = P_M sigma_m^2 Nm' / sigma_B^2: per-antenna jamming-to-noise ratio
  // in the estimation slot.
  JammingToNoise,
};

/// Solves beta P / (P_M sigma_m^2 Nm' + sigma_B^2) = 10^(target/10) for P_M.
inline double sinr_to_jamming_power(const SystemConfig& cfg, double target_sinr_db) {
  if (!std::isfinite(target_sinr_db)) {
    throw std::invalid_argument("sinr_to_jamming_power: target must be finite");
  }
  const double target = std::pow(10.0, target_sinr_db / 10.0);
  const double signal = cfg.beta * cfg.p;
  const double budget = signal / target - cfg.sigma_b2;  // allowed jamming power
  const double scale = std::max(signal / target, cfg.sigma_b2);
  if (budget < -1e-12 * scale) {
    throw std::domain_error("sinr_to_jamming_power: target " + std::to_string(target_sinr_db) +
                            " dB exceeds beta*P/sigma_B^2 with no jamming");
  }
  if (budget <= 1e-12 * scale) return 0.0;
  const double per_unit = cfg.sigma_m2 * static_cast<double>(cfg.nm_prime);
  if (per_unit == 0.0) {
    throw std::domain_error("sinr_to_jamming_power: jamming has no effect (sigma_m^2 Nm' = 0)");
  }
  return budget / per_unit;
}

inline double sinr_of(const SystemConfig& cfg) {
  return cfg.beta * cfg.p /
         (cfg.pm * cfg.sigma_m2 * static_cast<double>(cfg.nm_prime) + cfg.sigma_b2);
}

inline double jnr_to_jamming_power(const SystemConfig& cfg, double jnr_db) {
  if (!std::isfinite(jnr_db)) throw std::invalid_argument("jnr_to_jamming_power: non-finite");
  const double per_unit = cfg.sigma_m2 * static_cast<double>(cfg.nm_prime);
  if (per_unit == 0.0) throw std::domain_error("jnr_to_jamming_power: sigma_m^2 Nm' = 0");
  return std::pow(10.0, jnr_db / 10.0) * cfg.sigma_b2 / per_unit;
}

inline double jamming_power_for(const SystemConfig& cfg, double sinr_db, SinrConvention conv) {
  return conv == SinrConvention::DesiredToInterference ? sinr_to_jamming_power(cfg, sinr_db)
                                                       : jnr_to_jamming_power(cfg, sinr_db);
}

}  // namespace cmmi
