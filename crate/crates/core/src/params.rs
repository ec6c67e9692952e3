//! System parameters, unit conversions, and validation.
//!
//! All internal math runs in linear SI units (watts, meters, linear ratios);
//! dB and dBm appear only at the config boundary via [`dbm_to_watt`] and
//! [`db_to_linear`]. This module also houses the IRS sub-surface geometry
//! ([`ArrayGeometry`]) and the active/passive element counts ([`Allocation`]).

use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Unit conversions
// ---------------------------------------------------------------------------

/// Which power of ten a dB figure maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbKind {
    /// Power ratio: `10^(x/10)`.
    Power,
    /// Amplitude ratio: `10^(x/20)`.
    Amplitude,
}

/// Converts a power in dBm to watts: `10^(x/10) * 1e-3`.
pub fn dbm_to_watt(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFiniteInput { what: "dBm value" });
    }
    Ok(10f64.powf(x / 10.0) * 1e-3)
}

/// Converts a dB ratio to a linear ratio.
///
/// `Power` uses `10^(x/10)`; `Amplitude` uses `10^(x/20)`.
pub fn db_to_linear(x: f64, kind: DbKind) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFiniteInput { what: "dB value" });
    }
    let divisor = match kind {
        DbKind::Power => 10.0,
        DbKind::Amplitude => 20.0,
    };
    Ok(10f64.powf(x / divisor))
}

/// Interpretation of the amplification-bound figures given in dB.
///
/// Hardware datasheets are ambiguous about whether "14 dB" bounds the
/// amplitude factor `alpha` directly (`10^(14/20)` ≈ 5.01) or its power gain
/// `alpha²` (`10^(14/10)` ≈ 25.12). The default is `Factor10` because the
/// cost-optimal per-element factor `2 W_act / W_pas` equals 10 under the
/// default costs and must be feasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaDbConvention {
    /// `alpha = 10^(dB/10)` — the dB figure bounds the power gain.
    #[default]
    Factor10,
    /// `alpha = 10^(dB/20)` — the dB figure bounds the amplitude.
    Factor20,
}

impl AlphaDbConvention {
    /// Converts an amplification bound in dB to a linear amplitude factor
    /// under this convention.
    pub fn to_linear(self, db: f64) -> Result<f64> {
        match self {
            AlphaDbConvention::Factor10 => db_to_linear(db, DbKind::Power),
            AlphaDbConvention::Factor20 => db_to_linear(db, DbKind::Amplitude),
        }
    }
}

// ---------------------------------------------------------------------------
// Rician factor
// ---------------------------------------------------------------------------

/// Rician fading factor `K >= 0`, with an explicit sentinel for the pure-LoS
/// limit `K -> infinity`.
///
/// Using a sentinel (instead of a huge float) lets every formula branch to
/// the exact limit values, e.g. LoS weight `K/(K+1) -> 1` and NLoS weight
/// `1/(K+1) -> 0`, with no `0 * inf` hazards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RicianFactor {
    /// Finite linear factor; `0.0` is Rayleigh fading.
    Finite(f64),
    /// Pure line-of-sight limit.
    Infinite,
}

impl RicianFactor {
    /// Validated constructor for a finite factor.
    pub fn finite(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFiniteInput {
                what: "Rician factor",
            });
        }
        if value < 0.0 {
            return Err(Error::NegativeRicianFactor { value });
        }
        Ok(RicianFactor::Finite(value))
    }

    /// Builds a finite factor from a dB power ratio.
    pub fn from_db(db: f64) -> Result<Self> {
        RicianFactor::finite(db_to_linear(db, DbKind::Power)?)
    }

    /// True for the pure-LoS sentinel.
    pub fn is_infinite(self) -> bool {
        matches!(self, RicianFactor::Infinite)
    }

    /// True for exactly `K = 0` (Rayleigh fading).
    pub fn is_zero(self) -> bool {
        matches!(self, RicianFactor::Finite(k) if k == 0.0)
    }

    /// LoS power weight `K / (K + 1)`; `1` for the infinite sentinel.
    pub fn los_weight(self) -> f64 {
        match self {
            RicianFactor::Finite(k) => k / (k + 1.0),
            RicianFactor::Infinite => 1.0,
        }
    }

    /// NLoS power weight `1 / (K + 1)`; `0` for the infinite sentinel.
    pub fn nlos_weight(self) -> f64 {
        match self {
            RicianFactor::Finite(k) => 1.0 / (k + 1.0),
            RicianFactor::Infinite => 0.0,
        }
    }
}

// ---------------------------------------------------------------------------
// System parameters
// ---------------------------------------------------------------------------

/// All scalar physical and cost parameters of the hybrid-IRS link.
///
/// Every field is in linear SI units. Use [`SystemParams::validate`] before
/// feeding a hand-built value into the math; the solver entry points insist
/// on validated parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// BS transmit power `P_B`, watts.
    pub p_bs: f64,
    /// IRS amplification power budget `P_I`, watts.
    pub p_irs: f64,
    /// Amplification noise power `sigma_I²`, watts.
    pub sigma2_amp: f64,
    /// Receiver noise power `sigma_0²`, watts.
    pub sigma2_rx: f64,
    /// Reference channel power gain at 1 m, `beta`, linear ratio.
    pub beta: f64,
    /// Carrier wavelength `lambda`, meters.
    pub wavelength: f64,
    /// BS-IRS distance `D_BI`, meters.
    pub d_bi: f64,
    /// IRS-user distance `d_IU`, meters.
    pub d_iu: f64,
    /// Rician factor of the BS-IRS link, `K_1`.
    pub k1: RicianFactor,
    /// Rician factor of the IRS-user link, `K_2`.
    pub k2: RicianFactor,
    /// Minimum amplitude amplification factor `alpha_min` (>= 1).
    pub alpha_min: f64,
    /// Maximum amplitude amplification factor `alpha_max`.
    pub alpha_max: f64,
    /// Deployment cost per active element `W_act`, budget units.
    pub w_act: f64,
    /// Deployment cost per passive element `W_pas`, budget units.
    pub w_pas: f64,
    /// Total deployment budget `W_0`, budget units.
    pub w0: f64,
}

impl SystemParams {
    /// The default simulation scenario: BS at (0,0) m, IRS at (60,0) m, user
    /// at (60,20) m, 6 GHz carrier, -30 dB reference gain, -80 dBm noise
    /// floors, `P_B` = 15 dBm, `P_I` = 5 dBm, costs `W_act` = 5 / `W_pas` = 1,
    /// amplification bounds [0, 14] dB (power-gain convention), budget 3000,
    /// and `K_1 = K_2` = 10 dB.
    pub fn default_scenario() -> SystemParams {
        SystemParams {
            p_bs: dbm_to_watt(15.0).expect("finite"),
            p_irs: dbm_to_watt(5.0).expect("finite"),
            sigma2_amp: dbm_to_watt(-80.0).expect("finite"),
            sigma2_rx: dbm_to_watt(-80.0).expect("finite"),
            beta: db_to_linear(-30.0, DbKind::Power).expect("finite"),
            wavelength: 0.05,
            d_bi: 60.0,
            d_iu: 20.0,
            k1: RicianFactor::from_db(10.0).expect("finite"),
            k2: RicianFactor::from_db(10.0).expect("finite"),
            alpha_min: 1.0,
            alpha_max: AlphaDbConvention::Factor10.to_linear(14.0).expect("finite"),
            w_act: 5.0,
            w_pas: 1.0,
            w0: 3000.0,
        }
    }

    /// Checks every type invariant, returning the parameters unchanged when
    /// they all hold. Idempotent by construction.
    pub fn validate(self) -> Result<SystemParams> {
        let positive = [
            ("p_bs", self.p_bs),
            ("p_irs", self.p_irs),
            ("sigma2_amp", self.sigma2_amp),
            ("sigma2_rx", self.sigma2_rx),
            ("beta", self.beta),
            ("wavelength", self.wavelength),
            ("d_bi", self.d_bi),
            ("d_iu", self.d_iu),
            ("w_act", self.w_act),
            ("w_pas", self.w_pas),
        ];
        for (name, value) in positive {
            if !value.is_finite() {
                return Err(Error::NonFiniteInput { what: name });
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveParameter { name, value });
            }
        }
        if let RicianFactor::Finite(k) = self.k1 {
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::NegativeRicianFactor { value: k });
            }
        }
        if let RicianFactor::Finite(k) = self.k2 {
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::NegativeRicianFactor { value: k });
            }
        }
        if !(self.alpha_min.is_finite() && self.alpha_max.is_finite()) {
            return Err(Error::NonFiniteInput {
                what: "alpha bounds",
            });
        }
        if self.alpha_min < 1.0 {
            return Err(Error::AlphaMinBelowOne {
                alpha_min: self.alpha_min,
            });
        }
        if self.alpha_min >= self.alpha_max {
            return Err(Error::AlphaBoundsInverted {
                alpha_min: self.alpha_min,
                alpha_max: self.alpha_max,
            });
        }
        if !self.w0.is_finite() {
            return Err(Error::NonFiniteInput { what: "w0" });
        }
        if self.w0 < 0.0 {
            return Err(Error::NegativeBudget { w0: self.w0 });
        }
        Ok(self)
    }

    /// Effective per-element amplification cost in watts,
    /// `Z = P_B beta / D_BI² + sigma_I²`.
    ///
    /// An active element with factor `alpha` consumes `alpha² Z` on average,
    /// so `Z` is the conversion between amplification power and the aggregate
    /// `A_sum = sum(alpha²)`.
    pub fn amp_power_unit(&self) -> f64 {
        self.p_bs * self.beta / (self.d_bi * self.d_bi) + self.sigma2_amp
    }

    /// Aggregate amplification budget `A_sum = P_I / Z` available once any
    /// active element is deployed.
    pub fn a_sum_budget(&self) -> f64 {
        self.p_irs / self.amp_power_unit()
    }
}

// ---------------------------------------------------------------------------
// Array geometry
// ---------------------------------------------------------------------------

/// Geometry of one rectangular IRS sub-surface plus the angle pairs of its
/// two links.
///
/// `azimuth_aoa`/`elevation_aoa` describe the arriving BS-IRS path and
/// `azimuth_aod`/`elevation_aod` the departing IRS-user path. A degenerate
/// sub-surface with zero elements is represented by `n_x = n_y = 0` (needed
/// for allocations with no active or no passive elements).
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    /// Spacing between adjacent elements `d_I`, meters.
    pub elem_spacing: f64,
    /// Element count along the x axis.
    pub n_x: usize,
    /// Element count along the y axis.
    pub n_y: usize,
    /// Azimuth angle of arrival (BS-IRS link), radians in [0, pi].
    pub azimuth_aoa: f64,
    /// Elevation angle of arrival (BS-IRS link), radians in [0, pi].
    pub elevation_aoa: f64,
    /// Azimuth angle of departure (IRS-user link), radians in [0, pi].
    pub azimuth_aod: f64,
    /// Elevation angle of departure (IRS-user link), radians in [0, pi].
    pub elevation_aod: f64,
}

/// Factors `n` elements into a near-square `(n_x, n_y)` grid.
///
/// Starts from `n_x = floor(sqrt(n))` and decreases until `n_x` divides `n`
/// (reaching `1 x n` for primes), so the grid has no unused slots. The phase
/// alignment cancels steering phases, so capacity does not depend on this
/// choice; any deterministic rule works.
pub fn factor_elements(n: usize) -> (usize, usize) {
    if n == 0 {
        return (0, 0);
    }
    let mut n_x = (n as f64).sqrt().floor() as usize;
    n_x = n_x.max(1);
    while n_x > 1 && n % n_x != 0 {
        n_x -= 1;
    }
    (n_x, n / n_x)
}

impl ArrayGeometry {
    /// Default angles derived from the scenario coordinates BS (0,0),
    /// IRS (60,0), user (60,20): azimuth pi toward the BS, pi/2 toward the
    /// user, both at elevation pi/2 (in-plane propagation).
    pub const DEFAULT_AZIMUTH_AOA: f64 = std::f64::consts::PI;
    /// See [`ArrayGeometry::DEFAULT_AZIMUTH_AOA`].
    pub const DEFAULT_AZIMUTH_AOD: f64 = std::f64::consts::FRAC_PI_2;
    /// See [`ArrayGeometry::DEFAULT_AZIMUTH_AOA`].
    pub const DEFAULT_ELEVATION: f64 = std::f64::consts::FRAC_PI_2;

    /// Builds the geometry for an `n`-element sub-surface with quarter-wave
    /// spacing and the default scenario angles.
    pub fn from_count(n: usize, wavelength: f64) -> ArrayGeometry {
        let (n_x, n_y) = factor_elements(n);
        ArrayGeometry {
            elem_spacing: wavelength / 4.0,
            n_x,
            n_y,
            azimuth_aoa: Self::DEFAULT_AZIMUTH_AOA,
            elevation_aoa: Self::DEFAULT_ELEVATION,
            azimuth_aod: Self::DEFAULT_AZIMUTH_AOD,
            elevation_aod: Self::DEFAULT_ELEVATION,
        }
    }

    /// Total element count `n_x * n_y`.
    pub fn elements(&self) -> usize {
        self.n_x * self.n_y
    }

    /// A copy whose arrival angles are replaced by the departure angles, for
    /// building the IRS-user response with the same steering machinery.
    pub fn departure_view(&self) -> ArrayGeometry {
        ArrayGeometry {
            azimuth_aoa: self.azimuth_aod,
            elevation_aoa: self.elevation_aod,
            ..self.clone()
        }
    }

    /// Checks spacing positivity and angle ranges.
    pub fn validate(self) -> Result<ArrayGeometry> {
        if !self.elem_spacing.is_finite() || self.elem_spacing <= 0.0 {
            return Err(Error::NonPositiveParameter {
                name: "elem_spacing",
                value: self.elem_spacing,
            });
        }
        let angles = [
            ("azimuth_aoa", self.azimuth_aoa),
            ("elevation_aoa", self.elevation_aoa),
            ("azimuth_aod", self.azimuth_aod),
            ("elevation_aod", self.elevation_aod),
        ];
        for (name, value) in angles {
            if !(0.0..=std::f64::consts::PI).contains(&value) {
                return Err(Error::AngleOutOfRange { name, value });
            }
        }
        Ok(self)
    }
}

// ---------------------------------------------------------------------------
// Allocation
// ---------------------------------------------------------------------------

/// Integer active/passive element counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Allocation {
    /// Number of active elements `N_act`.
    pub n_act: u64,
    /// Number of passive elements `N_pas`.
    pub n_pas: u64,
}

impl Allocation {
    /// Budget consumed by this allocation, `n_act W_act + n_pas W_pas`.
    pub fn cost(&self, params: &SystemParams) -> f64 {
        self.n_act as f64 * params.w_act + self.n_pas as f64 * params.w_pas
    }

    /// Checks the deployment-budget constraint against `params.w0`.
    ///
    /// A relative slack of 1e-9 absorbs floating-point noise in cost sums
    /// (budgets are real-valued units, typically integers in practice).
    pub fn check_budget(&self, params: &SystemParams) -> Result<()> {
        let cost = self.cost(params);
        if cost > params.w0 * (1.0 + 1e-9) + 1e-9 {
            return Err(Error::BudgetExceeded {
                cost,
                w0: params.w0,
            });
        }
        Ok(())
    }
}

/// Largest integer count affordable at unit cost `unit` within `budget`,
/// with a 1e-9 relative tolerance so exact multiples are not lost to
/// floating-point rounding.
pub fn affordable_count(budget: f64, unit: f64) -> u64 {
    if budget <= 0.0 || unit <= 0.0 {
        return 0;
    }
    (budget / unit + 1e-9).floor() as u64
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
