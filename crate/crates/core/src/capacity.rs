//! Receiver SNR, Monte Carlo ergodic capacity, and the closed-form
//! approximation.
//!
//! Two capacity figures coexist by design:
//!
//! * the exact ergodic capacity `E{log2(1 + snr)}`, estimated by Monte Carlo
//!   over fading draws ([`mc_ergodic_capacity`]), and
//! * the statistical-CSI approximation, evaluated entirely in closed form
//!   from LoS components and Rician weights ([`approx_terms`],
//!   [`approx_capacity`]), with [`aligned_capacity`] as its specialization
//!   under phase alignment and a uniform amplification factor.
//!
//! All capacities are in bits/s/Hz.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{
    default_geometries, sample_realization, ChannelRealization, RngStream, StatisticalCsi,
};
use crate::params::{Allocation, SystemParams};
use crate::{Error, Result};

/// `log2(1 + x)` evaluated via `ln_1p` for accuracy at small SNR.
pub(crate) fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

// ---------------------------------------------------------------------------
// Reflection configuration
// ---------------------------------------------------------------------------

/// Per-element reflection coefficients of both sub-surfaces.
///
/// Active element `n` applies `alpha_n e^{j phase_act_n}`, passive element
/// `m` applies `e^{j phase_pas_m}` (unit amplitude). Phases are normalized
/// into `(0, 2 pi]` by the phase optimizer; the math itself accepts any real
/// phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionConfig {
    /// Phase shifts of the active elements, radians.
    pub phases_act: Vec<f64>,
    /// Phase shifts of the passive elements, radians.
    pub phases_pas: Vec<f64>,
    /// Amplitude amplification factors of the active elements.
    pub alphas: Vec<f64>,
}

impl ReflectionConfig {
    /// Builds a configuration with one shared amplification factor.
    pub fn with_uniform_alpha(
        phases_act: Vec<f64>,
        phases_pas: Vec<f64>,
        alpha: f64,
    ) -> ReflectionConfig {
        let alphas = vec![alpha; phases_act.len()];
        ReflectionConfig {
            phases_act,
            phases_pas,
            alphas,
        }
    }

    /// Active element count.
    pub fn n_act(&self) -> usize {
        self.phases_act.len()
    }

    /// Passive element count.
    pub fn n_pas(&self) -> usize {
        self.phases_pas.len()
    }

    /// Aggregate amplification power `sum(alpha_n²)`.
    pub fn a_sum(&self) -> f64 {
        self.alphas.iter().map(|a| a * a).sum()
    }

    /// Checks internal lengths and the per-element amplification bounds
    /// (with 1e-12 relative slack for clamped values).
    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        if self.phases_act.len() != self.alphas.len() {
            return Err(Error::LengthMismatch {
                what: "active phases vs amplification factors",
                left: self.phases_act.len(),
                right: self.alphas.len(),
            });
        }
        let slack = 1e-12 * params.alpha_max.abs().max(1.0);
        for &alpha in &self.alphas {
            if !alpha.is_finite()
                || alpha < params.alpha_min - slack
                || alpha > params.alpha_max + slack
            {
                return Err(Error::AlphaOutOfBounds {
                    alpha,
                    alpha_min: params.alpha_min,
                    alpha_max: params.alpha_max,
                });
            }
        }
        Ok(())
    }

    /// Reflection coefficient of active element `n`.
    fn psi_act(&self, n: usize) -> Complex64 {
        Complex64::from_polar(self.alphas[n], self.phases_act[n])
    }

    /// Reflection coefficient of passive element `m`.
    fn psi_pas(&self, m: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.phases_pas[m])
    }
}

// ---------------------------------------------------------------------------
// Exact SNR and Monte Carlo capacity
// ---------------------------------------------------------------------------

/// Monte Carlo estimate of the ergodic capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    /// Sample mean of `log2(1 + snr)`, bits/s/Hz.
    pub mean: f64,
    /// Standard error of the mean (0 for a single sample).
    pub std_error: f64,
    /// Number of fading draws.
    pub n_samples: u64,
}

fn check_link(what: &'static str, channel: usize, config: usize) -> Result<()> {
    if channel != config {
        return Err(Error::LengthMismatch {
            what,
            left: channel,
            right: config,
        });
    }
    Ok(())
}

/// Receiver SNR for one channel realization:
///
/// ```text
///         P_B |h_iu_act^H Psi_act h_bi_act + h_iu_pas^H Psi_pas h_bi_pas|²
/// snr = -----------------------------------------------------------------
///              sigma_I² ||h_iu_act^H Psi_act||² + sigma_0²
/// ```
///
/// The amplification-noise gain is `sum(alpha_n² |h_iu_act_n|²)`.
pub fn receiver_snr(
    real: &ChannelRealization,
    cfg: &ReflectionConfig,
    params: &SystemParams,
) -> Result<f64> {
    check_link("active channel vs config", real.bi_act.len(), cfg.n_act())?;
    check_link("active link pair", real.iu_act.len(), real.bi_act.len())?;
    check_link("passive channel vs config", real.bi_pas.len(), cfg.n_pas())?;
    check_link("passive link pair", real.iu_pas.len(), real.bi_pas.len())?;
    if cfg.alphas.len() != cfg.phases_act.len() {
        return Err(Error::LengthMismatch {
            what: "active phases vs amplification factors",
            left: cfg.phases_act.len(),
            right: cfg.alphas.len(),
        });
    }

    let mut signal = Complex64::new(0.0, 0.0);
    let mut amp_gain = 0.0;
    for n in 0..cfg.n_act() {
        signal += real.iu_act[n].conj() * cfg.psi_act(n) * real.bi_act[n];
        amp_gain += cfg.alphas[n] * cfg.alphas[n] * real.iu_act[n].norm_sqr();
    }
    for m in 0..cfg.n_pas() {
        signal += real.iu_pas[m].conj() * cfg.psi_pas(m) * real.bi_pas[m];
    }
    Ok(params.p_bs * signal.norm_sqr() / (params.sigma2_amp * amp_gain + params.sigma2_rx))
}

/// Monte Carlo ergodic capacity over `n_samples` independent fading draws
/// with the default sub-surface geometries.
///
/// Sample `i` draws its channels from stream `(seed, i)`, so the estimate is
/// bitwise reproducible for a given seed regardless of thread count: samples
/// are collected in index order and reduced sequentially.
pub fn mc_ergodic_capacity(
    params: &SystemParams,
    alloc: Allocation,
    cfg: &ReflectionConfig,
    n_samples: u64,
    seed: u64,
) -> Result<CapacityEstimate> {
    let geoms = default_geometries(alloc, params.wavelength);
    mc_ergodic_capacity_with(params, alloc, &geoms, cfg, n_samples, seed)
}

/// [`mc_ergodic_capacity`] with explicit sub-surface geometries.
pub fn mc_ergodic_capacity_with(
    params: &SystemParams,
    alloc: Allocation,
    geoms: &crate::channel::SubSurfaceGeometry,
    cfg: &ReflectionConfig,
    n_samples: u64,
    seed: u64,
) -> Result<CapacityEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidValue {
            key: "n_samples".to_string(),
            reason: "must be at least 1".to_string(),
        });
    }
    let samples: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let real = sample_realization(params, alloc, geoms, RngStream::new(seed, i))?;
            Ok(log2_1p(receiver_snr(&real, cfg, params)?))
        })
        .collect::<Result<Vec<f64>>>()?;

    // The arithmetic mean of identical samples is that sample exactly, but
    // a running sum cannot see this; short-circuit so degenerate fading
    // (pure-LoS channels draw the same capacity every time) reports an
    // exact estimate with zero error.
    if samples.windows(2).all(|w| w[0] == w[1]) {
        return Ok(CapacityEstimate {
            mean: samples[0],
            std_error: 0.0,
            n_samples,
        });
    }

    // Sequential two-pass reduction in index order keeps the result
    // independent of how the samples were computed above.
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0);
    let std_error = (var / n).sqrt();
    Ok(CapacityEstimate {
        mean,
        std_error,
        n_samples,
    })
}

// ---------------------------------------------------------------------------
// Closed-form approximation
// ---------------------------------------------------------------------------

/// The five signal/noise terms of the statistical-CSI capacity
/// approximation.
///
/// `x_*` terms belong to the numerator (signal), `z_*` to the denominator
/// (amplification noise); the receiver noise floor `sigma_0²` is added by
/// [`approx_capacity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxTerms {
    /// LoS-LoS beamforming term.
    pub x_l: f64,
    /// NLoS-bearing signal terms of the active sub-surface.
    pub x_nl_act: f64,
    /// NLoS-bearing signal terms of the passive sub-surface.
    pub x_nl_pas: f64,
    /// Amplification noise through the LoS IRS-user component.
    pub z_l_act: f64,
    /// Amplification noise through the NLoS IRS-user component
    /// (closed-form expectation).
    pub z_nl_act: f64,
}

impl ApproxTerms {
    /// Numerator total.
    pub fn signal(&self) -> f64 {
        self.x_l + self.x_nl_act + self.x_nl_pas
    }

    /// Denominator total excluding the receiver noise floor.
    pub fn amp_noise(&self) -> f64 {
        self.z_l_act + self.z_nl_act
    }
}

/// Computes the approximation terms from the statistical CSI.
///
/// With LoS weights `wl_i = K_i/(K_i+1)` and NLoS weights
/// `wn_i = 1/(K_i+1)` (link 1 = BS-IRS, link 2 = IRS-user):
///
/// ```text
/// x_l      = wl1 wl2 P_B |iu_act^H Psi bi_act + iu_pas^H pas-product|²
/// x_nl_act = P_B [ wl1 wn2 (beta/d²) ||Psi bi_act||²
///                + wn1 wl2 (beta/D²) ||iu_act^H Psi||²
///                + wn1 wn2 (beta²/(D² d²)) sum(alpha²) ]
/// z_l_act  = sigma_I² wl2 ||iu_act^H Psi||²
/// z_nl_act = sigma_I² wn2 (beta/d²) sum(alpha²)
/// ```
///
/// and `x_nl_pas` analogously with unit amplitudes. The sentinel weights
/// make the pure-LoS and Rayleigh limits exact.
pub fn approx_terms(
    params: &SystemParams,
    alloc: Allocation,
    cfg: &ReflectionConfig,
    csi: &StatisticalCsi,
) -> Result<ApproxTerms> {
    check_link("active CSI vs allocation", csi.los_bi_act.len(), alloc.n_act as usize)?;
    check_link("passive CSI vs allocation", csi.los_bi_pas.len(), alloc.n_pas as usize)?;
    check_link("active CSI vs config", csi.los_bi_act.len(), cfg.n_act())?;
    check_link("active CSI link pair", csi.los_iu_act.len(), csi.los_bi_act.len())?;
    check_link("passive CSI vs config", csi.los_bi_pas.len(), cfg.n_pas())?;
    check_link("passive CSI link pair", csi.los_iu_pas.len(), csi.los_bi_pas.len())?;

    let wl1 = csi.k1.los_weight();
    let wn1 = csi.k1.nlos_weight();
    let wl2 = csi.k2.los_weight();
    let wn2 = csi.k2.nlos_weight();

    let var_bi = params.beta / (params.d_bi * params.d_bi);
    let var_iu = params.beta / (params.d_iu * params.d_iu);

    let mut ll = Complex64::new(0.0, 0.0);
    let mut norm_psi_bi = 0.0; // ||Psi bi_act||²
    let mut norm_iu_psi = 0.0; // ||iu_act^H Psi||²
    let mut sum_a2 = 0.0;
    for n in 0..cfg.n_act() {
        let psi = cfg.psi_act(n);
        ll += csi.los_iu_act[n].conj() * psi * csi.los_bi_act[n];
        let a2 = cfg.alphas[n] * cfg.alphas[n];
        norm_psi_bi += a2 * csi.los_bi_act[n].norm_sqr();
        norm_iu_psi += a2 * csi.los_iu_act[n].norm_sqr();
        sum_a2 += a2;
    }
    let mut norm_bi_pas = 0.0;
    let mut norm_iu_pas = 0.0;
    for m in 0..cfg.n_pas() {
        ll += csi.los_iu_pas[m].conj() * cfg.psi_pas(m) * csi.los_bi_pas[m];
        norm_bi_pas += csi.los_bi_pas[m].norm_sqr();
        norm_iu_pas += csi.los_iu_pas[m].norm_sqr();
    }
    let n_pas = cfg.n_pas() as f64;

    Ok(ApproxTerms {
        x_l: wl1 * wl2 * params.p_bs * ll.norm_sqr(),
        x_nl_act: params.p_bs
            * (wl1 * wn2 * var_iu * norm_psi_bi
                + wn1 * wl2 * var_bi * norm_iu_psi
                + wn1 * wn2 * var_bi * var_iu * sum_a2),
        x_nl_pas: params.p_bs
            * (wl1 * wn2 * var_iu * norm_bi_pas
                + wn1 * wl2 * var_bi * norm_iu_pas
                + wn1 * wn2 * var_bi * var_iu * n_pas),
        z_l_act: params.sigma2_amp * wl2 * norm_iu_psi,
        z_nl_act: params.sigma2_amp * wn2 * var_iu * sum_a2,
    })
}

/// Capacity from the approximation terms:
/// `log2(1 + signal / (amp_noise + sigma_0²))`.
pub fn approx_capacity(terms: &ApproxTerms, params: &SystemParams) -> f64 {
    log2_1p(terms.signal() / (terms.amp_noise() + params.sigma2_rx))
}

/// Continuous-count aligned capacity shared by the integer entry point and
/// the closed-form allocation formulas.
pub(crate) fn aligned_capacity_f(
    params: &SystemParams,
    n_act: f64,
    n_pas: f64,
    alpha: f64,
) -> f64 {
    let wl1 = params.k1.los_weight();
    let wn1 = params.k1.nlos_weight();
    let wl2 = params.k2.los_weight();
    let wn2 = params.k2.nlos_weight();
    let g1 = wl1 * wl2;
    // Weight identity for gamma_2 (K_1 + K_2 + 1), safe at the sentinels.
    let sym = wl1 * wn2 + wn1 * wl2 + wn1 * wn2;

    let gain = params.p_bs * params.beta * params.beta
        / (params.d_bi * params.d_bi * params.d_iu * params.d_iu);
    let s1 = n_act * alpha + n_pas;
    let s2_act = n_act * alpha * alpha;
    let signal = g1 * s1 * s1 * gain + sym * (s2_act + n_pas) * gain;
    let noise = s2_act * params.sigma2_amp * params.beta / (params.d_iu * params.d_iu)
        + params.sigma2_rx;
    log2_1p(signal / noise)
}

/// Aligned-phase capacity with a uniform amplification factor:
///
/// ```text
/// x_l   = g1 (N_act alpha + N_pas)² P_B beta²/(D² d²)
/// x_nl  = g2 (K1+K2+1) (N_act alpha² + N_pas) P_B beta²/(D² d²)
/// noise = N_act alpha² sigma_I² beta/d² + sigma_0²
/// ```
///
/// `alpha` must respect the amplification bounds when `n_act > 0`; it is
/// ignored when `n_act = 0`.
pub fn aligned_capacity(
    params: &SystemParams,
    n_act: u64,
    n_pas: u64,
    alpha: f64,
) -> Result<f64> {
    if n_act > 0 {
        if !alpha.is_finite() {
            return Err(Error::NonFiniteInput {
                what: "amplification factor",
            });
        }
        let slack = 1e-12 * params.alpha_max.abs().max(1.0);
        if alpha < params.alpha_min - slack || alpha > params.alpha_max + slack {
            return Err(Error::AlphaOutOfBounds {
                alpha,
                alpha_min: params.alpha_min,
                alpha_max: params.alpha_max,
            });
        }
    }
    let alpha = if n_act == 0 { 0.0 } else { alpha };
    Ok(aligned_capacity_f(params, n_act as f64, n_pas as f64, alpha))
}

// ---------------------------------------------------------------------------
// Amplification power
// ---------------------------------------------------------------------------

/// Mean amplification power consumed by the active sub-surface:
///
/// ```text
/// P_B ( wl2 ||Psi bi_act||² + wn2 (beta/D²) sum(alpha²) )
///   + sigma_I² sum(alpha²)
/// ```
///
/// with the NLoS expectation in closed form. Zero when there are no active
/// elements.
pub fn mean_amplification_power(
    params: &SystemParams,
    alloc: Allocation,
    cfg: &ReflectionConfig,
    csi: &StatisticalCsi,
) -> Result<f64> {
    check_link("active CSI vs allocation", csi.los_bi_act.len(), alloc.n_act as usize)?;
    check_link("active CSI vs config", csi.los_bi_act.len(), cfg.n_act())?;
    if alloc.n_act == 0 {
        return Ok(0.0);
    }
    let wl2 = csi.k2.los_weight();
    let wn2 = csi.k2.nlos_weight();
    let var_bi = params.beta / (params.d_bi * params.d_bi);
    let mut norm_psi_bi = 0.0;
    let mut sum_a2 = 0.0;
    for n in 0..cfg.n_act() {
        let a2 = cfg.alphas[n] * cfg.alphas[n];
        norm_psi_bi += a2 * csi.los_bi_act[n].norm_sqr();
        sum_a2 += a2;
    }
    Ok(params.p_bs * (wl2 * norm_psi_bi + wn2 * var_bi * sum_a2) + params.sigma2_amp * sum_a2)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
