//! Optimal phase, amplification, and element-allocation design.
//!
//! Everything here is closed-form or a one-dimensional integer search; there
//! is no iterative solver. The chain of results:
//!
//! 1. phase alignment makes every reflected path combine coherently
//!    ([`optimal_phases`]);
//! 2. under alignment the amplification budget splits evenly,
//!    `alpha* = sqrt(A_sum / N_act)` ([`optimal_alpha`]), where
//!    `A_sum = P_I / Z` and `Z = P_B beta/D² + sigma_I²` is the mean power
//!    one unit of `alpha²` consumes;
//! 3. the remaining integer split of the deployment budget is found
//!    exhaustively ([`allocate_search`]) or in closed form for the pure-LoS
//!    ([`allocate_los`]) and Rayleigh ([`allocate_rayleigh`]) extremes;
//! 4. budget thresholds decide when an all-active, hybrid, or all-passive
//!    architecture wins under LoS ([`thresholds`], [`select_architecture`]).

use crate::capacity::{aligned_capacity, aligned_capacity_f, ReflectionConfig};
use crate::channel::{default_geometries, statistical_csi, StatisticalCsi, SubSurfaceGeometry};
use crate::params::{affordable_count, Allocation, SystemParams};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Phase alignment
// ---------------------------------------------------------------------------

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Normalizes a phase into `(0, 2 pi]`, representing "no shift" as `2 pi`.
fn normalize_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(TWO_PI);
    if r == 0.0 {
        TWO_PI
    } else {
        r
    }
}

/// Optimal phase shifts `phi_n = arg(iu_n) - arg(bi_n)`, normalized into
/// `(0, 2 pi]`, for both sub-surfaces.
///
/// Applying them makes every per-element product `conj(iu_n) psi_n bi_n`
/// real non-negative, so all reflected paths add coherently.
pub fn optimal_phases(csi: &StatisticalCsi) -> (Vec<f64>, Vec<f64>) {
    let align = |iu: &[num_complex::Complex64], bi: &[num_complex::Complex64]| {
        iu.iter()
            .zip(bi)
            .map(|(u, b)| normalize_phase(u.arg() - b.arg()))
            .collect()
    };
    (
        align(&csi.los_iu_act, &csi.los_bi_act),
        align(&csi.los_iu_pas, &csi.los_bi_pas),
    )
}

/// Optimally-phased reflection configuration for an allocation, with the
/// power-splitting amplification factor (clamped into bounds) on every
/// active element. Also returns the statistical CSI it was built from.
///
/// Fails with [`Error::PowerInfeasible`] when even the minimum amplification
/// exceeds the power budget for `alloc.n_act` elements.
pub fn optimal_reflection(
    params: &SystemParams,
    alloc: Allocation,
) -> Result<(ReflectionConfig, StatisticalCsi)> {
    let geoms = default_geometries(alloc, params.wavelength);
    optimal_reflection_with(params, alloc, &geoms)
}

/// [`optimal_reflection`] against explicit sub-surface geometries.
pub fn optimal_reflection_with(
    params: &SystemParams,
    alloc: Allocation,
    geoms: &SubSurfaceGeometry,
) -> Result<(ReflectionConfig, StatisticalCsi)> {
    let csi = statistical_csi(params, alloc, geoms)?;
    let (phases_act, phases_pas) = optimal_phases(&csi);
    let alpha = if alloc.n_act == 0 {
        0.0
    } else {
        let choice = optimal_alpha(params, alloc.n_act)?;
        if choice.unclamped < params.alpha_min {
            return Err(Error::PowerInfeasible {
                n_act: alloc.n_act,
                alpha: choice.unclamped,
            });
        }
        choice.alpha
    };
    Ok((
        ReflectionConfig::with_uniform_alpha(phases_act, phases_pas, alpha),
        csi,
    ))
}

// ---------------------------------------------------------------------------
// Amplification power regimes
// ---------------------------------------------------------------------------

/// Relation of the amplification power budget to the amplification bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerRegime {
    /// `P_I < alpha_min² Z`: not even one active element can run at its
    /// minimum amplification, so only passive elements make sense.
    PassiveOnly,
    /// The budget binds: the power constraint is active at the optimum and
    /// `alpha* = sqrt(A_sum / N_act)` applies (up to per-count clamping).
    Favorable,
    /// `P_I >= (W_0/W_act) alpha_max² Z`: every affordable active element
    /// saturates at `alpha_max` and the power constraint is slack.
    Saturated,
}

impl PowerRegime {
    /// Stable lowercase label for reports and CSV output.
    pub fn label(self) -> &'static str {
        match self {
            PowerRegime::PassiveOnly => "passive-only",
            PowerRegime::Favorable => "favorable",
            PowerRegime::Saturated => "saturated",
        }
    }
}

/// Classifies the amplification power budget. `PassiveOnly` takes priority,
/// then saturation, and everything between is `Favorable`.
pub fn power_regime(params: &SystemParams) -> PowerRegime {
    let z = params.amp_power_unit();
    if params.p_irs < params.alpha_min * params.alpha_min * z {
        PowerRegime::PassiveOnly
    } else if params.p_irs >= params.w0 / params.w_act * params.alpha_max * params.alpha_max * z
    {
        PowerRegime::Saturated
    } else {
        PowerRegime::Favorable
    }
}

/// Uniform amplification factor chosen for a given active-element count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplificationChoice {
    /// Factor actually applied, clamped into `[alpha_min, alpha_max]`.
    pub alpha: f64,
    /// True when the unclamped optimum fell outside the bounds.
    pub clamped: bool,
    /// Raw power-splitting value `sqrt(A_sum / n_act)`.
    pub unclamped: f64,
}

/// Evenly splits the amplification budget: `alpha* = sqrt(A_sum / n_act)`,
/// clamped into the amplification bounds with a flag.
pub fn optimal_alpha(params: &SystemParams, n_act: u64) -> Result<AmplificationChoice> {
    if n_act == 0 {
        return Err(Error::ZeroElementCount {
            what: "active elements for amplification",
        });
    }
    let unclamped = (params.a_sum_budget() / n_act as f64).sqrt();
    let alpha = unclamped.clamp(params.alpha_min, params.alpha_max);
    Ok(AmplificationChoice {
        alpha,
        clamped: alpha != unclamped,
        unclamped,
    })
}

/// Amplification noise reaching the receiver when the full power budget is
/// spent: `P_I sigma_I² (beta/d²) / Z`, independent of how many active
/// elements share it; zero when there are none.
pub fn amp_noise_power(params: &SystemParams, n_act: u64) -> f64 {
    if n_act == 0 {
        return 0.0;
    }
    params.p_irs * params.sigma2_amp * params.beta
        / (params.d_iu * params.d_iu * params.amp_power_unit())
}

// ---------------------------------------------------------------------------
// Capacity of one allocation and the exhaustive search
// ---------------------------------------------------------------------------

/// Capacity of an allocation under optimal phases and the power-splitting
/// amplification factor.
///
/// `alpha*` above `alpha_max` is clamped (power is then under-spent);
/// `alpha*` below `alpha_min` means the allocation cannot be powered at all
/// and is rejected with [`Error::PowerInfeasible`]. `n_act = 0` needs no
/// amplification and always works.
pub fn capacity_opt(params: &SystemParams, n_act: u64, n_pas: u64) -> Result<f64> {
    Allocation { n_act, n_pas }.check_budget(params)?;
    if n_act == 0 {
        return Ok(aligned_capacity_f(params, 0.0, n_pas as f64, 0.0));
    }
    let choice = optimal_alpha(params, n_act)?;
    if choice.unclamped < params.alpha_min {
        return Err(Error::PowerInfeasible {
            n_act,
            alpha: choice.unclamped,
        });
    }
    aligned_capacity(params, n_act, n_pas, choice.alpha)
}

/// Continuous relaxation attached to a closed-form design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousAllocation {
    /// Real-valued active element count.
    pub n_act: f64,
    /// Real-valued passive element count.
    pub n_pas: f64,
    /// Amplification factor at the continuous optimum.
    pub alpha: f64,
    /// Capacity of the continuous optimum, bits/s/Hz.
    pub capacity: f64,
}

/// A solved element allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalDesign {
    /// Integer element counts (budget-feasible).
    pub alloc: Allocation,
    /// Uniform amplification factor in use; `0.0` when `n_act = 0`.
    pub alpha: f64,
    /// True when `alpha` was clamped to a bound.
    pub alpha_clamped: bool,
    /// Capacity of the integer design, bits/s/Hz.
    pub capacity: f64,
    /// Amplification power regime of the parameters.
    pub regime: PowerRegime,
    /// Aggregate `n_act alpha²` actually applied; `0` when `n_act = 0`.
    pub a_sum: f64,
    /// Continuous optimum, for closed-form solvers; `None` for the search.
    pub continuous: Option<ContinuousAllocation>,
}

/// Packages a winning grid point into an [`OptimalDesign`].
fn design_from_point(
    params: &SystemParams,
    n_act: u64,
    n_pas: u64,
    capacity: f64,
    continuous: Option<ContinuousAllocation>,
) -> Result<OptimalDesign> {
    let (alpha, clamped) = if n_act == 0 {
        (0.0, false)
    } else {
        let choice = optimal_alpha(params, n_act)?;
        (choice.alpha, choice.clamped)
    };
    Ok(OptimalDesign {
        alloc: Allocation { n_act, n_pas },
        alpha,
        alpha_clamped: clamped,
        capacity,
        regime: power_regime(params),
        a_sum: n_act as f64 * alpha * alpha,
        continuous,
    })
}

/// Exhaustive one-dimensional search over
/// `n_act = 0 .. floor(W_0/W_act)` with
/// `n_pas = floor((W_0 - n_act W_act)/W_pas)`.
///
/// Power-infeasible points are skipped; ties break toward fewer active
/// elements. An empty budget yields `(0, 0)` with zero capacity.
pub fn allocate_search(params: &SystemParams) -> Result<OptimalDesign> {
    let params = params.clone().validate()?;
    let n_max = affordable_count(params.w0, params.w_act);
    let mut best: Option<(f64, u64, u64)> = None;
    for n_act in 0..=n_max {
        let n_pas = affordable_count(params.w0 - n_act as f64 * params.w_act, params.w_pas);
        match capacity_opt(&params, n_act, n_pas) {
            Ok(c) => {
                if best.map_or(true, |(b, _, _)| c > b) {
                    best = Some((c, n_act, n_pas));
                }
            }
            Err(Error::PowerInfeasible { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let (capacity, n_act, n_pas) = best.expect("n_act = 0 is always feasible");
    design_from_point(&params, n_act, n_pas, capacity, None)
}

// ---------------------------------------------------------------------------
// Closed-form LoS allocation
// ---------------------------------------------------------------------------

/// Coefficients of the equivalent scalar objective
/// `xi1 (-N + xi2 sqrt(N) + xi3)²` for the continuous LoS allocation in the
/// active count `N`:
///
/// ```text
/// xi1 = (P_B beta² W_act² / (D² d² W_pas²)) / (A_sum sigma_I² beta/d² + sigma_0²)
/// xi2 = sqrt(A_sum) W_pas / W_act
/// xi3 = W_0 / W_act
/// ```
pub fn xi_coefficients(params: &SystemParams) -> (f64, f64, f64) {
    let s = params.a_sum_budget();
    let noise = s * params.sigma2_amp * params.beta / (params.d_iu * params.d_iu)
        + params.sigma2_rx;
    let xi1 = params.p_bs * params.beta * params.beta * params.w_act * params.w_act
        / (params.d_bi
            * params.d_bi
            * params.d_iu
            * params.d_iu
            * params.w_pas
            * params.w_pas)
        / noise;
    let xi2 = s.sqrt() * params.w_pas / params.w_act;
    let xi3 = params.w0 / params.w_act;
    (xi1, xi2, xi3)
}

fn require_los(params: &SystemParams) -> Result<()> {
    if !(params.k1.is_infinite() && params.k2.is_infinite()) {
        return Err(Error::NotLosChannel);
    }
    Ok(())
}

fn require_favorable(params: &SystemParams) -> Result<()> {
    let regime = power_regime(params);
    if regime != PowerRegime::Favorable {
        return Err(Error::RegimeNotFavorable {
            regime: regime.label(),
        });
    }
    Ok(())
}

/// Rounds a continuous active count to the best budget-feasible integer
/// neighbor by [`capacity_opt`], ties toward fewer active elements.
fn round_active_count(params: &SystemParams, n_cont: f64) -> Result<(f64, u64, u64)> {
    let n_max = affordable_count(params.w0, params.w_act);
    let floor = n_cont.max(0.0).floor() as u64;
    let mut best: Option<(f64, u64, u64)> = None;
    for n_act in [floor, floor + 1] {
        if n_act > n_max {
            continue;
        }
        let n_pas = affordable_count(params.w0 - n_act as f64 * params.w_act, params.w_pas);
        match capacity_opt(params, n_act, n_pas) {
            Ok(c) => {
                if best.map_or(true, |(b, _, _)| c > b) {
                    best = Some((c, n_act, n_pas));
                }
            }
            Err(Error::PowerInfeasible { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    best.ok_or(Error::PowerInfeasible {
        n_act: floor.max(1),
        alpha: 0.0,
    })
    .map(|(c, a, p)| (c, a, p))
}

/// Closed-form LoS allocation (pure-LoS channels, favorable regime).
///
/// Below the all-active budget threshold `W_AH = A_sum W_pas²/(4 W_act)` the
/// whole budget goes to active elements. Above it the active count freezes
/// at the interior optimum `A_sum W_pas²/(4 W_act²)` — independent of `W_0`
/// — with per-element factor `2 W_act / W_pas`, and the rest buys passive
/// elements. The continuous optimum is reported alongside the best integer
/// rounding.
pub fn allocate_los(params: &SystemParams) -> Result<OptimalDesign> {
    let params = params.clone().validate()?;
    require_los(&params)?;
    require_favorable(&params)?;

    let s = params.a_sum_budget();
    let w_ah = s * params.w_pas * params.w_pas / (4.0 * params.w_act);
    let (n_act_cont, n_pas_cont) = if params.w0 < w_ah {
        (params.w0 / params.w_act, 0.0)
    } else {
        (
            s * params.w_pas * params.w_pas / (4.0 * params.w_act * params.w_act),
            params.w0 / params.w_pas - s * params.w_pas / (4.0 * params.w_act),
        )
    };
    // Continuous relaxation: amplification bounds are not applied here (the
    // rounded integer design below re-checks them).
    let alpha_cont = (s / n_act_cont).sqrt();
    let capacity_cont = aligned_capacity_f(&params, n_act_cont, n_pas_cont, alpha_cont);

    let (capacity, n_act, n_pas) = round_active_count(&params, n_act_cont)?;
    design_from_point(
        &params,
        n_act,
        n_pas,
        capacity,
        Some(ContinuousAllocation {
            n_act: n_act_cont,
            n_pas: n_pas_cont,
            alpha: alpha_cont,
            capacity: capacity_cont,
        }),
    )
}

/// Continuous closed-form LoS capacities of the three architectures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosVariants {
    /// All-passive: `log2(1 + (W_0/W_pas)² P_B beta²/(D² d² sigma_0²))`.
    pub c_pas: f64,
    /// Best hybrid split (including the all-active and all-passive ends).
    pub c_hyb: f64,
    /// All-active with the power constraint active.
    pub c_act: f64,
}

/// Evaluates the three continuous LoS capacity formulas at budget
/// `params.w0`.
///
/// The hybrid value takes the better of the branch formula (all-active
/// below `W_AH`, the interior optimum above) and the all-passive value,
/// since an empty active side is itself a feasible hybrid split; this makes
/// the boundary equalities of the architecture comparison exact.
pub fn capacity_los_variants(params: &SystemParams) -> Result<LosVariants> {
    let params = params.clone().validate()?;
    require_los(&params)?;
    if params.w0 == 0.0 {
        return Ok(LosVariants {
            c_pas: 0.0,
            c_hyb: 0.0,
            c_act: 0.0,
        });
    }
    let s = params.a_sum_budget();
    let c_pas = aligned_capacity_f(&params, 0.0, params.w0 / params.w_pas, 0.0);
    let n_all_act = params.w0 / params.w_act;
    let c_act = aligned_capacity_f(&params, n_all_act, 0.0, (s / n_all_act).sqrt());
    let w_ah = s * params.w_pas * params.w_pas / (4.0 * params.w_act);
    let branch = if params.w0 < w_ah {
        c_act
    } else {
        let n_act = s * params.w_pas * params.w_pas / (4.0 * params.w_act * params.w_act);
        let n_pas = params.w0 / params.w_pas - s * params.w_pas / (4.0 * params.w_act);
        aligned_capacity_f(&params, n_act, n_pas, 2.0 * params.w_act / params.w_pas)
    };
    Ok(LosVariants {
        c_pas,
        c_hyb: branch.max(c_pas),
        c_act,
    })
}

// ---------------------------------------------------------------------------
// Budget thresholds and architecture selection
// ---------------------------------------------------------------------------

/// The three LoS budget thresholds, in increasing order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Below this budget the optimal hybrid design is all-active.
    pub w_ah: f64,
    /// Crossing point of the all-active and all-passive capacities.
    pub w_ap: f64,
    /// Above this budget all-passive matches the best hybrid design.
    pub w_hp: f64,
}

/// Raw threshold values without the ordering check. With
/// `c = W_pas²/(4 W_act)`, `S = A_sum`, and `T = sigma_0² d²/(sigma_I² beta)`
/// (the ratio of receiver noise to per-`alpha²` amplification noise):
///
/// ```text
/// W_AH = c S
/// W_AP = 4 c S T / (S + T)
/// W_HP = c (T + sqrt(T² + T S))
/// ```
pub fn threshold_values(params: &SystemParams) -> (f64, f64, f64) {
    let c = params.w_pas * params.w_pas / (4.0 * params.w_act);
    let s = params.a_sum_budget();
    let t = params.sigma2_rx * params.d_iu * params.d_iu / (params.sigma2_amp * params.beta);
    let w_ah = c * s;
    let w_ap = 4.0 * c * s * t / (s + t);
    let w_hp = c * (t + (t * t + t * s).sqrt());
    (w_ah, w_ap, w_hp)
}

/// Computes the thresholds and enforces the ordering
/// `W_AH < W_AP < W_HP`, which holds exactly when `S < 3 T`, i.e. when the
/// amplification budget is small against the noise ratio. Larger budgets
/// flip the order and are reported as an inconsistency instead of being
/// silently accepted.
pub fn thresholds(params: &SystemParams) -> Result<Thresholds> {
    let params = params.clone().validate()?;
    let (w_ah, w_ap, w_hp) = threshold_values(&params);
    if !(w_ah < w_ap && w_ap < w_hp) {
        return Err(Error::ThresholdOrderingViolated { w_ah, w_ap, w_hp });
    }
    Ok(Thresholds { w_ah, w_ap, w_hp })
}

/// Architecture recommendation under pure-LoS channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    /// All-active IRS.
    Active,
    /// Mixed active/passive IRS.
    Hybrid,
    /// All-passive IRS.
    Passive,
}

impl Architecture {
    /// Stable lowercase label for reports.
    pub fn label(self) -> &'static str {
        match self {
            Architecture::Active => "active",
            Architecture::Hybrid => "hybrid",
            Architecture::Passive => "passive",
        }
    }
}

/// Picks the capacity-maximizing architecture for budget `w0` under
/// pure-LoS channels: active below `W_AH`, passive above `W_HP`, hybrid
/// between (first match wins on the raw threshold values).
pub fn select_architecture(params: &SystemParams, w0: f64) -> Result<Architecture> {
    require_los(params)?;
    let (w_ah, _, w_hp) = threshold_values(params);
    if w0 < w_ah {
        Ok(Architecture::Active)
    } else if w0 <= w_hp {
        Ok(Architecture::Hybrid)
    } else {
        Ok(Architecture::Passive)
    }
}

// ---------------------------------------------------------------------------
// Rayleigh allocation
// ---------------------------------------------------------------------------

/// Budget threshold below which a single active element beats spending its
/// cost on passive elements under Rayleigh fading:
///
/// ```text
/// W_ray = (A_sum W_pas - W_act) sigma_0² / (A_sum sigma_I² beta/d²)
/// ```
///
/// Negative when the amplification budget is too small to outweigh even
/// `W_act / W_pas` passive elements.
pub fn rayleigh_budget_threshold(params: &SystemParams) -> f64 {
    let s = params.a_sum_budget();
    (s * params.w_pas - params.w_act) * params.sigma2_rx
        / (s * params.sigma2_amp * params.beta / (params.d_iu * params.d_iu))
}

/// True when the hybrid `(1, ...)` split beats all-passive at the current
/// budget: `W_0 < W_ray`.
///
/// Without a LoS component there is no N² beamforming gain, so capacity is
/// linear in the element count and a lone amplified element contributes
/// `A_sum` signal units against `N_pas` passive ones — worthwhile only
/// while the affordable passive count is small and the amplification noise
/// penalty is not yet dominant. At large budgets all-passive wins.
pub fn rayleigh_prefers_hybrid(params: &SystemParams) -> bool {
    params.w0 < rayleigh_budget_threshold(params) && params.w0 >= params.w_act
}

/// Closed-form Rayleigh allocation (both links `K = 0`, favorable regime):
/// one active element when [`rayleigh_prefers_hybrid`], otherwise none,
/// with the rest of the budget on passive elements.
pub fn allocate_rayleigh(params: &SystemParams) -> Result<OptimalDesign> {
    let params = params.clone().validate()?;
    if !(params.k1.is_zero() && params.k2.is_zero()) {
        return Err(Error::NotRayleighChannel);
    }
    require_favorable(&params)?;

    let hybrid = rayleigh_prefers_hybrid(&params);
    let (n_act, n_pas) = if hybrid {
        (1, affordable_count(params.w0 - params.w_act, params.w_pas))
    } else {
        (0, affordable_count(params.w0, params.w_pas))
    };
    let capacity = capacity_opt(&params, n_act, n_pas)?;
    let s = params.a_sum_budget();
    let continuous = if hybrid {
        ContinuousAllocation {
            n_act: 1.0,
            n_pas: (params.w0 - params.w_act) / params.w_pas,
            alpha: s.sqrt().clamp(params.alpha_min, params.alpha_max),
            capacity: aligned_capacity_f(
                &params,
                1.0,
                (params.w0 - params.w_act) / params.w_pas,
                s.sqrt().clamp(params.alpha_min, params.alpha_max),
            ),
        }
    } else {
        ContinuousAllocation {
            n_act: 0.0,
            n_pas: params.w0 / params.w_pas,
            alpha: 0.0,
            capacity: aligned_capacity_f(&params, 0.0, params.w0 / params.w_pas, 0.0),
        }
    };
    design_from_point(&params, n_act, n_pas, capacity, Some(continuous))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
