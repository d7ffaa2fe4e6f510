//! Warping functions `γ: [0,1] → [0,1]` under the Fisher–Rao distance,
//! computed through square-root velocity functions `ψ = √γ̇` on the unit
//! sphere of `L₂[0,1]`.
//!
//! Functions live on an equispaced grid of `T` nodes over `[0, 1]`; every
//! integral is a trapezoid sum on that grid. A [`WarpingFunction`] carries
//! both its grid values and the SRVF coordinates the metric uses. Built from
//! `γ`, the coordinates are [`srvf`] of it; built from an SRVF (solver
//! output, generated noise), they are kept as given and `γ` is
//! [`srvf_inverse`] of them.

use crate::error::{MrfError, Result};
use crate::metric::{weighted_medoid, MetricSpace, SolverCounter, WeightVector};
use crate::spaces::hypersphere::{self, InnerProduct, KarcherSettings, Weighted};
use crate::spaces::trapezoid_weights;

pub const DEFAULT_WARPING_GRID: usize = 100;

const ENDPOINT_TOLERANCE: f64 = 1e-9;
const NORM_TOLERANCE: f64 = 1e-6;
const KARCHER: KarcherSettings = KarcherSettings {
    name: "warping Karcher mean",
    tolerance: 1e-8,
    max_iterations: 200,
};

/// Square-root velocity function on the grid: positive, unit trapezoid norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SrvfPoint(Vec<f64>);

impl SrvfPoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(MrfError::invalid("srvf", "grid needs at least 2 nodes"));
        }
        if let Some(t) = values.iter().position(|v| *v <= 0.0 || !v.is_finite()) {
            return Err(MrfError::invalid(
                "srvf",
                format!("value at node {t} is not positive"),
            ));
        }
        let w = trapezoid_weights(values.len());
        let norm = Weighted(&w).norm(&values);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(MrfError::invalid("srvf", format!("L2 norm {norm} is not 1")));
        }
        Ok(Self(values))
    }

    /// Rescales positive values to unit trapezoid norm.
    pub fn normalized(mut values: Vec<f64>) -> Result<Self> {
        let w = trapezoid_weights(values.len());
        let norm = Weighted(&w).norm(&values);
        if norm <= 0.0 || !norm.is_finite() {
            return Err(MrfError::invalid("srvf", "zero norm"));
        }
        values.iter_mut().for_each(|v| *v /= norm);
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpingFunction {
    gamma: Vec<f64>,
    psi: SrvfPoint,
}

fn check_gamma(gamma: &[f64]) -> Result<()> {
    if gamma.len() < 3 {
        return Err(MrfError::invalid("warping", "grid needs at least 3 nodes"));
    }
    if gamma.iter().any(|g| !g.is_finite()) {
        return Err(MrfError::invalid("warping", "non-finite value"));
    }
    let last = gamma[gamma.len() - 1];
    if gamma[0].abs() > ENDPOINT_TOLERANCE || (last - 1.0).abs() > ENDPOINT_TOLERANCE {
        return Err(MrfError::invalid(
            "warping",
            format!("endpoints ({}, {last}) are not (0, 1)", gamma[0]),
        ));
    }
    if let Some(t) = gamma.windows(2).position(|w| w[0] >= w[1]) {
        return Err(MrfError::invalid(
            "warping",
            format!("not strictly increasing at node {t}"),
        ));
    }
    Ok(())
}

impl WarpingFunction {
    /// Validates grid values of `γ` and computes their SRVF.
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        check_gamma(&gamma)?;
        let psi = srvf_of_values(&gamma)?;
        Ok(Self { gamma, psi })
    }

    /// The warping whose SRVF is `psi`.
    pub fn from_srvf(psi: SrvfPoint) -> Self {
        let gamma = srvf_inverse(&psi).gamma;
        Self { gamma, psi }
    }

    /// Reassembles a warping from stored grid values and SRVF coordinates.
    pub fn from_parts(gamma: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        check_gamma(&gamma)?;
        let psi = SrvfPoint::new(psi)?;
        if psi.len() != gamma.len() {
            return Err(MrfError::LengthMismatch {
                expected: gamma.len(),
                found: psi.len(),
            });
        }
        Ok(Self { gamma, psi })
    }

    /// Identity warping `γ(u) = u`.
    pub fn identity(grid_size: usize) -> Result<Self> {
        Self::new(unit_grid(grid_size))
    }

    pub fn values(&self) -> &[f64] {
        &self.gamma
    }

    /// SRVF coordinates used by the metric.
    pub fn srvf_coords(&self) -> &SrvfPoint {
        &self.psi
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }
}

/// Equispaced grid of `size` nodes over `[0, 1]`.
pub(crate) fn unit_grid(size: usize) -> Vec<f64> {
    let h = 1.0 / (size - 1) as f64;
    (0..size).map(|t| t as f64 * h).collect()
}

fn srvf_of_values(gamma: &[f64]) -> Result<SrvfPoint> {
    let n = gamma.len();
    let h = 1.0 / (n - 1) as f64;
    let mut deriv = vec![0.0; n];
    for t in 1..n - 1 {
        deriv[t] = (gamma[t + 1] - gamma[t - 1]) / (2.0 * h);
    }
    // second-order one-sided stencils at the ends; first order if the
    // stencil loses positivity on a sharply curved boundary
    let head = (-3.0 * gamma[0] + 4.0 * gamma[1] - gamma[2]) / (2.0 * h);
    deriv[0] = if head > 0.0 { head } else { (gamma[1] - gamma[0]) / h };
    let tail = (3.0 * gamma[n - 1] - 4.0 * gamma[n - 2] + gamma[n - 3]) / (2.0 * h);
    deriv[n - 1] = if tail > 0.0 {
        tail
    } else {
        (gamma[n - 1] - gamma[n - 2]) / h
    };
    SrvfPoint::normalized(deriv.into_iter().map(f64::sqrt).collect())
}

/// `ψ = √γ̇` by finite differences, renormalized to unit `L₂` norm.
pub fn srvf(g: &WarpingFunction) -> SrvfPoint {
    srvf_of_values(&g.gamma).expect("valid warping has positive finite differences")
}

/// `γ(t) = ∫₀ᵗ ψ²` by cumulative trapezoid sums, rescaled so `γ(1) = 1`.
pub fn srvf_inverse(psi: &SrvfPoint) -> WarpingFunction {
    let v = &psi.0;
    let h = 1.0 / (v.len() - 1) as f64;
    let mut gamma = Vec::with_capacity(v.len());
    gamma.push(0.0);
    let mut acc = 0.0;
    for w in v.windows(2) {
        acc += 0.5 * h * (w[0] * w[0] + w[1] * w[1]);
        gamma.push(acc);
    }
    gamma.iter_mut().for_each(|g| *g /= acc);
    *gamma.last_mut().expect("nonempty") = 1.0;
    WarpingFunction {
        gamma,
        psi: psi.clone(),
    }
}

fn srvf_angle(a: &SrvfPoint, b: &SrvfPoint) -> f64 {
    let w = trapezoid_weights(a.len());
    hypersphere::angle(&Weighted(&w), &a.0, &b.0)
}

/// Fisher–Rao distance: the arc length between the two SRVFs.
pub fn warping_distance(g1: &WarpingFunction, g2: &WarpingFunction) -> Result<f64> {
    if g1.len() != g2.len() {
        return Err(MrfError::LengthMismatch {
            expected: g1.len(),
            found: g2.len(),
        });
    }
    Ok(srvf_angle(&g1.psi, &g2.psi))
}

fn karcher(
    space: &WarpingSpace,
    support: &[&WarpingFunction],
    weights: &[f64],
) -> Result<WarpingFunction> {
    let (start, _) = weighted_medoid(space, support, weights)?;
    let coords: Vec<&[f64]> = support.iter().map(|g| g.psi.0.as_slice()).collect();
    let w = trapezoid_weights(support[0].len());
    let mu = hypersphere::karcher_mean(
        &Weighted(&w),
        &coords,
        weights,
        &support[start].psi.0,
        &KARCHER,
    )?;
    Ok(WarpingFunction::from_srvf(SrvfPoint::new(mu)?))
}

/// Weighted Karcher mean in SRVF coordinates, mapped back to a warping.
/// Uncounted; [`WarpingSpace`] counts.
pub fn warping_karcher_mean(
    samples: &[WarpingFunction],
    weights: &WeightVector,
) -> Result<WarpingFunction> {
    if samples.len() != weights.len() {
        return Err(MrfError::LengthMismatch {
            expected: samples.len(),
            found: weights.len(),
        });
    }
    let (support, w): (Vec<&WarpingFunction>, Vec<f64>) =
        weights.support().map(|(i, w)| (&samples[i], w)).unzip();
    if support.is_empty() {
        return Err(MrfError::DegenerateWeights);
    }
    let space = WarpingSpace::new(support[0].len());
    karcher(&space, &support, &w)
}

#[derive(Debug)]
pub struct WarpingSpace {
    grid_size: usize,
    counter: SolverCounter,
}

impl Default for WarpingSpace {
    fn default() -> Self {
        Self::new(DEFAULT_WARPING_GRID)
    }
}

impl WarpingSpace {
    pub fn new(grid_size: usize) -> Self {
        Self {
            grid_size,
            counter: SolverCounter::new(),
        }
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    fn check_len(&self, g: &WarpingFunction) -> Result<()> {
        if g.len() != self.grid_size {
            return Err(MrfError::LengthMismatch {
                expected: self.grid_size,
                found: g.len(),
            });
        }
        Ok(())
    }
}

impl MetricSpace for WarpingSpace {
    type Point = WarpingFunction;

    fn name(&self) -> &'static str {
        "warping"
    }

    fn validate(&self, point: &WarpingFunction) -> Result<()> {
        self.check_len(point)?;
        check_gamma(&point.gamma)?;
        SrvfPoint::new(point.psi.0.clone()).map(|_| ())
    }

    fn distance(&self, a: &WarpingFunction, b: &WarpingFunction) -> Result<f64> {
        self.check_len(a)?;
        self.check_len(b)?;
        Ok(srvf_angle(&a.psi, &b.psi))
    }

    fn solve_frechet_mean(
        &self,
        support: &[&WarpingFunction],
        weights: &[f64],
    ) -> Result<WarpingFunction> {
        karcher(self, support, weights)
    }

    fn solver_counter(&self) -> &SolverCounter {
        &self.counter
    }

    /// `γ` followed by its SRVF coordinates.
    fn payload_width(&self) -> usize {
        2 * self.grid_size
    }

    fn encode(&self, point: &WarpingFunction) -> Vec<f64> {
        let mut out = point.gamma.clone();
        out.extend_from_slice(&point.psi.0);
        out
    }

    fn decode(&self, payload: &[f64]) -> Result<WarpingFunction> {
        if payload.len() != self.payload_width() {
            return Err(MrfError::LengthMismatch {
                expected: self.payload_width(),
                found: payload.len(),
            });
        }
        let (gamma, psi) = payload.split_at(self.grid_size);
        WarpingFunction::from_parts(gamma.to_vec(), psi.to_vec())
    }
}
