//! Exponential map, logarithm and Karcher iteration on a unit sphere of an
//! inner-product space. Shared by `S²` (dot product) and the SRVF sphere in
//! `L₂[0,1]` (trapezoid-rule inner product on a grid).

use crate::error::{MrfError, Result};

/// Logarithm is refused within this angle of the antipode.
const CUT_LOCUS_MARGIN: f64 = 1e-9;

pub(crate) trait InnerProduct {
    fn inner(&self, a: &[f64], b: &[f64]) -> f64;

    fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).sqrt()
    }
}

pub(crate) struct Dot;

impl InnerProduct for Dot {
    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

/// Quadrature-weighted inner product `Σ wₜ aₜ bₜ`.
#[derive(Debug, Clone)]
pub(crate) struct Weighted<'a>(pub &'a [f64]);

impl InnerProduct for Weighted<'_> {
    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }
}

/// Component of `v` orthogonal to `base`, and the removed normal part.
fn tangent_part<I: InnerProduct>(ip: &I, base: &[f64], v: &[f64]) -> (Vec<f64>, f64) {
    let c = ip.inner(base, v);
    (v.iter().zip(base).map(|(x, b)| x - c * b).collect(), c)
}

/// Geodesic angle between unit vectors. `atan2` of the normal and tangential
/// parts equals `arccos⟨a, b⟩` but stays accurate near 0 and π.
pub(crate) fn angle<I: InnerProduct>(ip: &I, a: &[f64], b: &[f64]) -> f64 {
    let (perp, c) = tangent_part(ip, a, b);
    ip.norm(&perp).atan2(c.clamp(-1.0, 1.0))
}

/// `cos(‖v‖) base + sin(‖v‖) v / ‖v‖`. Off-tangent components of `v` are
/// projected out first.
pub(crate) fn exp_map<I: InnerProduct>(ip: &I, base: &[f64], tangent: &[f64]) -> Vec<f64> {
    let (v, normal) = tangent_part(ip, base, tangent);
    if normal.abs() > 1e-9 * (1.0 + ip.norm(tangent)) {
        log::warn!("exponential map input not tangent (normal component {normal:e}); projecting");
    }
    let n = ip.norm(&v);
    if n == 0.0 {
        return base.to_vec();
    }
    let (s, c) = n.sin_cos();
    let mut out: Vec<f64> = base
        .iter()
        .zip(&v)
        .map(|(b, x)| c * b + s * x / n)
        .collect();
    let norm = ip.norm(&out);
    out.iter_mut().for_each(|x| *x /= norm);
    out
}

/// Tangent vector at `base` pointing to `target` with length equal to their
/// geodesic distance.
pub(crate) fn log_map<I: InnerProduct>(ip: &I, base: &[f64], target: &[f64]) -> Result<Vec<f64>> {
    let (perp, c) = tangent_part(ip, base, target);
    let n = ip.norm(&perp);
    let theta = n.atan2(c.clamp(-1.0, 1.0));
    if theta > std::f64::consts::PI - CUT_LOCUS_MARGIN {
        return Err(MrfError::CutLocus);
    }
    if n == 0.0 {
        return Ok(vec![0.0; base.len()]);
    }
    Ok(perp.into_iter().map(|x| x * theta / n).collect())
}

pub(crate) struct KarcherSettings {
    pub name: &'static str,
    pub tolerance: f64,
    pub max_iterations: usize,
}

/// Fixed-point iteration `μ ← exp_μ(Σ wᵢ log_μ(pᵢ))` from `start`. Stops
/// once the weighted tangent mean is shorter than `settings.tolerance`.
pub(crate) fn karcher_mean<I: InnerProduct>(
    ip: &I,
    support: &[&[f64]],
    weights: &[f64],
    start: &[f64],
    settings: &KarcherSettings,
) -> Result<Vec<f64>> {
    let mut mu = start.to_vec();
    let mut gradient_norm = f64::INFINITY;
    for iteration in 0..=settings.max_iterations {
        let mut step = vec![0.0; mu.len()];
        for (p, w) in support.iter().zip(weights) {
            let v = log_map(ip, &mu, p)?;
            step.iter_mut().zip(&v).for_each(|(s, x)| *s += w * x);
        }
        gradient_norm = ip.norm(&step);
        if gradient_norm < settings.tolerance {
            return Ok(mu);
        }
        if iteration == settings.max_iterations {
            break;
        }
        mu = exp_map(ip, &mu, &step);
    }
    Err(MrfError::NoConvergence {
        solver: settings.name,
        iterations: settings.max_iterations,
        gradient_norm,
    })
}
