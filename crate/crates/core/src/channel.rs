//! Rician channel synthesis for the two IRS sub-surfaces.
//!
//! The BS-IRS and IRS-user links of each sub-surface decompose into a
//! deterministic LoS part (steering-vector geometry, product-distance path
//! loss) and a random NLoS part (i.i.d. circularly-symmetric Gaussians),
//! weighted by the Rician factor:
//!
//! ```text
//! h = sqrt(K/(K+1)) h_los + sqrt(1/(K+1)) h_nlos
//! ```
//!
//! Randomness is counter-based: every Monte Carlo sample index owns a
//! disjoint cipher stream, so draws are reproducible bit-for-bit regardless
//! of thread count or evaluation order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::params::{Allocation, ArrayGeometry, RicianFactor, SystemParams};
use crate::{Error, Result};

/// Channel coefficients of one link, one complex entry per element.
pub type ComplexVector = Vec<Complex64>;

// ---------------------------------------------------------------------------
// RNG streams
// ---------------------------------------------------------------------------

/// Handle to one deterministic random stream.
///
/// `(seed, stream_index)` fully determines the sequence. A channel
/// realization for sample `i` fans out to cipher streams `4i .. 4i+3`, one
/// per link, so realizations at different indices never share randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    /// Base seed shared by a whole experiment.
    pub seed: u64,
    /// Sub-stream selector, e.g. the Monte Carlo sample index.
    pub stream_index: u64,
}

/// Lane offsets for the four links of a realization.
const LANE_BI_ACT: u64 = 0;
const LANE_IU_ACT: u64 = 1;
const LANE_BI_PAS: u64 = 2;
const LANE_IU_PAS: u64 = 3;

impl RngStream {
    /// Creates the stream handle for `(seed, stream_index)`.
    pub fn new(seed: u64, stream_index: u64) -> RngStream {
        RngStream { seed, stream_index }
    }

    /// The generator positioned at this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Derived stream for one of the four links of this sample
    /// (`lane` in `0..4`), disjoint across samples.
    fn lane(&self, lane: u64) -> RngStream {
        RngStream {
            seed: self.seed,
            stream_index: self.stream_index.wrapping_mul(4).wrapping_add(lane),
        }
    }
}

// ---------------------------------------------------------------------------
// Deterministic LoS components
// ---------------------------------------------------------------------------

/// Steering vector `u(zeta, m) = [e^{-j pi k zeta}]`, `k = 0..m-1`.
///
/// `zeta` is the normalized spatial frequency; every entry has unit modulus.
pub fn steering_vector(zeta: f64, m: usize) -> Result<ComplexVector> {
    if m == 0 {
        return Err(Error::ZeroElementCount {
            what: "steering vector length",
        });
    }
    if !zeta.is_finite() {
        return Err(Error::NonFiniteInput {
            what: "spatial frequency",
        });
    }
    Ok((0..m)
        .map(|k| Complex64::from_polar(1.0, -std::f64::consts::PI * k as f64 * zeta))
        .collect())
}

/// Receive response of a rectangular sub-surface: the Kronecker product
/// `u(zeta_x, n_x) (x) u(zeta_y, n_y)` with spatial frequencies
///
/// ```text
/// zeta_x = (2 d_I / lambda) cos(azimuth) sin(elevation)
/// zeta_y = (2 d_I / lambda) sin(azimuth) sin(elevation)
/// ```
///
/// Entry `i * n_y + j` equals `u_x[i] * u_y[j]`.
pub fn receive_response(geom: &ArrayGeometry, wavelength: f64) -> Result<ComplexVector> {
    if !wavelength.is_finite() || wavelength <= 0.0 {
        return Err(Error::NonPositiveParameter {
            name: "wavelength",
            value: wavelength,
        });
    }
    if geom.elements() == 0 {
        return Err(Error::ZeroElementCount {
            what: "receive response geometry",
        });
    }
    let scale = 2.0 * geom.elem_spacing / wavelength;
    let zeta_x = scale * geom.azimuth_aoa.cos() * geom.elevation_aoa.sin();
    let zeta_y = scale * geom.azimuth_aoa.sin() * geom.elevation_aoa.sin();
    let ux = steering_vector(zeta_x, geom.n_x)?;
    let uy = steering_vector(zeta_y, geom.n_y)?;
    let mut out = Vec::with_capacity(geom.elements());
    for x in &ux {
        for y in &uy {
            out.push(x * y);
        }
    }
    Ok(out)
}

/// LoS channel of one link: `(sqrt(beta) / dist) e^{-j 2 pi dist / lambda}`
/// times the receive response, so every entry has modulus
/// `sqrt(beta) / dist`.
pub fn los_channel(
    beta: f64,
    dist: f64,
    wavelength: f64,
    geom: &ArrayGeometry,
) -> Result<ComplexVector> {
    if !dist.is_finite() || dist <= 0.0 {
        return Err(Error::NonPositiveParameter {
            name: "dist",
            value: dist,
        });
    }
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::NonPositiveParameter {
            name: "beta",
            value: beta,
        });
    }
    let gain = Complex64::from_polar(
        beta.sqrt() / dist,
        -2.0 * std::f64::consts::PI * dist / wavelength,
    );
    let mut response = receive_response(geom, wavelength)?;
    for entry in &mut response {
        *entry *= gain;
    }
    Ok(response)
}

// ---------------------------------------------------------------------------
// Random NLoS components
// ---------------------------------------------------------------------------

/// One draw from `CN(0, 1)`: independent real and imaginary parts of
/// variance 1/2 each.
fn complex_standard_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `n` i.i.d. NLoS coefficients `(sqrt(beta) / dist) * CN(0, 1)`, each with
/// second moment `beta / dist²`. Deterministic given `stream`.
pub fn sample_nlos(n: usize, beta: f64, dist: f64, stream: RngStream) -> ComplexVector {
    let scale = beta.sqrt() / dist;
    let mut rng = stream.rng();
    (0..n)
        .map(|_| complex_standard_normal(&mut rng) * scale)
        .collect()
}

/// Rician mixture `sqrt(K/(K+1)) los + sqrt(1/(K+1)) nlos`.
///
/// The `K = infinity` sentinel returns `los` bitwise, `K = 0` returns `nlos`
/// bitwise, so the limits are exact rather than merely close.
pub fn assemble_rician(
    k: RicianFactor,
    los: &[Complex64],
    nlos: &[Complex64],
) -> Result<ComplexVector> {
    if los.len() != nlos.len() {
        return Err(Error::LengthMismatch {
            what: "Rician LoS/NLoS parts",
            left: los.len(),
            right: nlos.len(),
        });
    }
    if k.is_infinite() {
        return Ok(los.to_vec());
    }
    if k.is_zero() {
        return Ok(nlos.to_vec());
    }
    let wl = k.los_weight().sqrt();
    let wn = k.nlos_weight().sqrt();
    Ok(los
        .iter()
        .zip(nlos)
        .map(|(l, n)| l * wl + n * wn)
        .collect())
}

// ---------------------------------------------------------------------------
// Full realizations
// ---------------------------------------------------------------------------

/// Geometries of the two co-located sub-surfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSurfaceGeometry {
    /// Active sub-surface layout and link angles.
    pub active: ArrayGeometry,
    /// Passive sub-surface layout and link angles.
    pub passive: ArrayGeometry,
}

/// Default geometries for an allocation: near-square grids at quarter-wave
/// spacing with the default scenario angles.
pub fn default_geometries(alloc: Allocation, wavelength: f64) -> SubSurfaceGeometry {
    SubSurfaceGeometry {
        active: ArrayGeometry::from_count(alloc.n_act as usize, wavelength),
        passive: ArrayGeometry::from_count(alloc.n_pas as usize, wavelength),
    }
}

/// LoS components known to the optimizer: the four link vectors plus the
/// Rician factors. This is the full "statistical CSI" — no fading draws.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticalCsi {
    /// LoS BS-IRS channel of the active sub-surface (length `n_act`).
    pub los_bi_act: ComplexVector,
    /// LoS IRS-user channel of the active sub-surface (length `n_act`).
    pub los_iu_act: ComplexVector,
    /// LoS BS-IRS channel of the passive sub-surface (length `n_pas`).
    pub los_bi_pas: ComplexVector,
    /// LoS IRS-user channel of the passive sub-surface (length `n_pas`).
    pub los_iu_pas: ComplexVector,
    /// Rician factor of the BS-IRS link.
    pub k1: RicianFactor,
    /// Rician factor of the IRS-user link.
    pub k2: RicianFactor,
}

/// One full fading draw: the four Rician link vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// BS-IRS channel of the active sub-surface.
    pub bi_act: ComplexVector,
    /// IRS-user channel of the active sub-surface.
    pub iu_act: ComplexVector,
    /// BS-IRS channel of the passive sub-surface.
    pub bi_pas: ComplexVector,
    /// IRS-user channel of the passive sub-surface.
    pub iu_pas: ComplexVector,
}

/// LoS pair (BS-IRS, IRS-user) for one sub-surface; empty vectors for an
/// empty sub-surface.
fn los_pair(
    params: &SystemParams,
    geom: &ArrayGeometry,
) -> Result<(ComplexVector, ComplexVector)> {
    if geom.elements() == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let bi = los_channel(params.beta, params.d_bi, params.wavelength, geom)?;
    let iu = los_channel(
        params.beta,
        params.d_iu,
        params.wavelength,
        &geom.departure_view(),
    )?;
    Ok((bi, iu))
}

fn check_count(what: &'static str, geom: &ArrayGeometry, expected: u64) -> Result<()> {
    if geom.elements() as u64 != expected {
        return Err(Error::LengthMismatch {
            what,
            left: geom.elements(),
            right: expected as usize,
        });
    }
    Ok(())
}

/// Builds the statistical CSI for an allocation: the four LoS vectors and
/// the Rician factors. Geometry element counts must match the allocation.
pub fn statistical_csi(
    params: &SystemParams,
    alloc: Allocation,
    geoms: &SubSurfaceGeometry,
) -> Result<StatisticalCsi> {
    check_count("active geometry vs allocation", &geoms.active, alloc.n_act)?;
    check_count("passive geometry vs allocation", &geoms.passive, alloc.n_pas)?;
    let (los_bi_act, los_iu_act) = los_pair(params, &geoms.active)?;
    let (los_bi_pas, los_iu_pas) = los_pair(params, &geoms.passive)?;
    Ok(StatisticalCsi {
        los_bi_act,
        los_iu_act,
        los_bi_pas,
        los_iu_pas,
        k1: params.k1,
        k2: params.k2,
    })
}

/// Draws one full channel realization: all four links assembled from the
/// deterministic LoS parts and independent NLoS draws on disjoint
/// sub-streams of `stream`.
pub fn sample_realization(
    params: &SystemParams,
    alloc: Allocation,
    geoms: &SubSurfaceGeometry,
    stream: RngStream,
) -> Result<ChannelRealization> {
    let csi = statistical_csi(params, alloc, geoms)?;
    let n_act = alloc.n_act as usize;
    let n_pas = alloc.n_pas as usize;
    let nlos_bi_act = sample_nlos(n_act, params.beta, params.d_bi, stream.lane(LANE_BI_ACT));
    let nlos_iu_act = sample_nlos(n_act, params.beta, params.d_iu, stream.lane(LANE_IU_ACT));
    let nlos_bi_pas = sample_nlos(n_pas, params.beta, params.d_bi, stream.lane(LANE_BI_PAS));
    let nlos_iu_pas = sample_nlos(n_pas, params.beta, params.d_iu, stream.lane(LANE_IU_PAS));
    Ok(ChannelRealization {
        bi_act: assemble_rician(params.k1, &csi.los_bi_act, &nlos_bi_act)?,
        iu_act: assemble_rician(params.k2, &csi.los_iu_act, &nlos_iu_act)?,
        bi_pas: assemble_rician(params.k1, &csi.los_bi_pas, &nlos_bi_pas)?,
        iu_pas: assemble_rician(params.k2, &csi.los_iu_pas, &nlos_iu_pas)?,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
