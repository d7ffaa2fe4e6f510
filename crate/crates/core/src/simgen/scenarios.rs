use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{MrfError, Result};
use crate::simgen::{logistic, Scenario, SpaceKind};
use crate::spaces::hypersphere::{self, InnerProduct, Weighted};
use crate::spaces::{
    quantile_grid, sphere_exp, trapezoid_weights, EuclideanSpace, QuantileFunction, SpherePoint,
    SphereSpace, SrvfPoint, WarpingFunction, WarpingSpace, WassersteinSpace,
    DEFAULT_QUANTILE_GRID, DEFAULT_WARPING_GRID,
};

pub const WASSERSTEIN_SIGMA0: f64 = 1.0;
pub const WASSERSTEIN_GAMMA: f64 = 2.5;
pub const SPHERE_NOISE_VARIANCE: f64 = 0.1;

/// `m(x) = logistic(η)` plus Gaussian noise, clamped to `[-1, 2]`.
#[derive(Debug, Clone)]
pub struct EuclideanScenario {
    pub noise_sd: f64,
}

impl Default for EuclideanScenario {
    fn default() -> Self {
        Self { noise_sd: 0.1 }
    }
}

impl Scenario for EuclideanScenario {
    type Space = EuclideanSpace;

    fn kind(&self) -> SpaceKind {
        SpaceKind::Euclidean
    }

    fn space(&self) -> EuclideanSpace {
        EuclideanSpace::bounded(-1.0, 2.0)
    }

    fn mean(&self, eta: f64) -> Result<f64> {
        Ok(logistic(eta))
    }

    fn perturb<R: Rng + ?Sized>(&self, mean: &f64, rng: &mut R) -> Result<f64> {
        let z: f64 = rng.sample(StandardNormal);
        Ok((mean + self.noise_sd * z).clamp(-1.0, 2.0))
    }
}

/// Normal quantile functions `μ(η) + σ(η) Φ⁻¹(u)` with `μ(η) = η` and
/// `σ(η) = σ₀ + γ logistic(η)`, distorted by `ε(v) = v - sin(πkv)/|πk|`
/// for a random frequency `k ∈ {±1, …, ±4}`.
#[derive(Debug, Clone)]
pub struct WassersteinScenario {
    pub grid_size: usize,
    pub sigma0: f64,
    pub gamma: f64,
    /// When false the distortion is the identity.
    pub noise: bool,
    grid: Vec<f64>,
}

impl Default for WassersteinScenario {
    fn default() -> Self {
        Self::new(DEFAULT_QUANTILE_GRID)
    }
}

impl WassersteinScenario {
    pub fn new(grid_size: usize) -> Self {
        Self {
            grid_size,
            sigma0: WASSERSTEIN_SIGMA0,
            gamma: WASSERSTEIN_GAMMA,
            noise: true,
            grid: quantile_grid(grid_size),
        }
    }

    pub fn without_noise(mut self) -> Self {
        self.noise = false;
        self
    }

    pub fn sigma(&self, eta: f64) -> f64 {
        self.sigma0 + self.gamma * logistic(eta)
    }

    /// `ε(v) = v - sin(πkv) / |πk|`; nondecreasing for every integer `k`.
    pub fn distortion(k: i32, v: f64) -> f64 {
        let pk = PI * k as f64;
        v - (pk * v).sin() / pk.abs()
    }

    pub fn distort(&self, mean: &QuantileFunction, k: i32) -> Result<QuantileFunction> {
        let mut running = f64::NEG_INFINITY;
        let values = mean
            .values()
            .iter()
            .map(|&v| {
                // absorb rounding on flat stretches of ε
                running = running.max(Self::distortion(k, v));
                running
            })
            .collect();
        QuantileFunction::new(values)
    }
}

impl Scenario for WassersteinScenario {
    type Space = WassersteinSpace;

    fn kind(&self) -> SpaceKind {
        SpaceKind::Wasserstein
    }

    fn space(&self) -> WassersteinSpace {
        WassersteinSpace::new(self.grid_size)
    }

    fn mean(&self, eta: f64) -> Result<QuantileFunction> {
        QuantileFunction::normal(eta, self.sigma(eta), &self.grid)
    }

    fn perturb<R: Rng + ?Sized>(&self, mean: &QuantileFunction, rng: &mut R) -> Result<QuantileFunction> {
        let k = rng.random_range(1..=8);
        let k = if k <= 4 { k - 5 } else { k - 4 };
        if !self.noise {
            return Ok(mean.clone());
        }
        self.distort(mean, k)
    }
}

/// `g(η) = (√(1-ν²) cos πν, √(1-ν²) sin πν, ν)` with `ν = logistic(η)`.
pub fn sphere_mean(eta: f64) -> Result<SpherePoint> {
    let nu = logistic(eta);
    let r = (1.0 - nu * nu).max(0.0).sqrt();
    let (s, c) = (PI * nu).sin_cos();
    SpherePoint::normalize([r * c, r * s, nu])
}

/// Orthonormal basis of the tangent plane at `p`, by Gram–Schmidt against
/// the `z` axis (or `x` near the poles).
fn tangent_basis(p: &SpherePoint) -> ([f64; 3], [f64; 3]) {
    let m = p.coords();
    let axis = if m[2].abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let dot: f64 = axis.iter().zip(&m).map(|(a, b)| a * b).sum();
    let mut b1 = [axis[0] - dot * m[0], axis[1] - dot * m[1], axis[2] - dot * m[2]];
    let n = b1.iter().map(|v| v * v).sum::<f64>().sqrt();
    b1.iter_mut().for_each(|v| *v /= n);
    let b2 = [
        m[1] * b1[2] - m[2] * b1[1],
        m[2] * b1[0] - m[0] * b1[2],
        m[0] * b1[1] - m[1] * b1[0],
    ];
    (b1, b2)
}

/// Mean curve on `S²` with isotropic tangent Gaussian noise pushed through
/// the exponential map.
#[derive(Debug, Clone)]
pub struct SphereScenario {
    pub noise_variance: f64,
}

impl Default for SphereScenario {
    fn default() -> Self {
        Self {
            noise_variance: SPHERE_NOISE_VARIANCE,
        }
    }
}

impl SphereScenario {
    /// `Exp_p(U)`, `U ~ N(0, σ² I₂)` in the tangent plane at `p`.
    pub fn noisy_around<R: Rng + ?Sized>(&self, p: &SpherePoint, rng: &mut R) -> SpherePoint {
        let (b1, b2) = tangent_basis(p);
        let sd = self.noise_variance.sqrt();
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let u = [0, 1, 2].map(|i| sd * (z1 * b1[i] + z2 * b2[i]));
        sphere_exp(p, u)
    }
}

impl Scenario for SphereScenario {
    type Space = SphereSpace;

    fn kind(&self) -> SpaceKind {
        SpaceKind::Sphere
    }

    fn space(&self) -> SphereSpace {
        SphereSpace::new()
    }

    fn mean(&self, eta: f64) -> Result<SpherePoint> {
        sphere_mean(eta)
    }

    fn perturb<R: Rng + ?Sized>(&self, mean: &SpherePoint, rng: &mut R) -> Result<SpherePoint> {
        Ok(self.noisy_around(mean, rng))
    }
}

/// `γ(u) = (e^{4au} - 1) / (e^{4a} - 1)` on an equispaced grid, with its
/// analytic SRVF. `a = 0` is the identity.
pub fn warping_mean(a: f64, grid_size: usize) -> Result<WarpingFunction> {
    let h = 1.0 / (grid_size - 1) as f64;
    let grid = (0..grid_size).map(|t| t as f64 * h);
    let (gamma, deriv): (Vec<f64>, Vec<f64>) = if a.abs() < 1e-12 {
        grid.map(|u| (u, 1.0)).unzip()
    } else {
        let denom = (4.0 * a).exp_m1();
        grid.map(|u| {
            (
                (4.0 * a * u).exp_m1() / denom,
                4.0 * a * (4.0 * a * u).exp() / denom,
            )
        })
        .unzip()
    };
    let psi = SrvfPoint::normalized(deriv.into_iter().map(f64::sqrt).collect())?;
    WarpingFunction::from_parts(gamma, psi.values().to_vec())
}

/// Exponential warping family driven by `a = 3(logistic(η) - 0.5)`; noise is
/// a Gaussian process with exponential covariance `τ² exp(-|s-t|/ℓ)` in the
/// tangent space of the SRVF sphere, pushed through the exponential map.
#[derive(Debug, Clone)]
pub struct WarpingScenario {
    pub grid_size: usize,
    pub tau2: f64,
    pub length_scale: f64,
    pub max_resamples: usize,
}

impl Default for WarpingScenario {
    fn default() -> Self {
        Self {
            grid_size: DEFAULT_WARPING_GRID,
            tau2: 0.01,
            length_scale: 0.3,
            max_resamples: 100,
        }
    }
}

impl WarpingScenario {
    pub fn shape(eta: f64) -> f64 {
        3.0 * (logistic(eta) - 0.5)
    }

    /// Exact draw of the exponential-kernel process on the grid via its
    /// AR(1) representation.
    fn gaussian_process<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let t = self.grid_size;
        let h = 1.0 / (t - 1) as f64;
        let rho = (-h / self.length_scale).exp();
        let tau = self.tau2.sqrt();
        let innovation = tau * (1.0 - rho * rho).sqrt();
        let mut out = Vec::with_capacity(t);
        let mut prev = tau * rng.sample::<f64, _>(StandardNormal);
        out.push(prev);
        for _ in 1..t {
            prev = rho * prev + innovation * rng.sample::<f64, _>(StandardNormal);
            out.push(prev);
        }
        out
    }
}

impl Scenario for WarpingScenario {
    type Space = WarpingSpace;

    fn kind(&self) -> SpaceKind {
        SpaceKind::Warping
    }

    fn space(&self) -> WarpingSpace {
        WarpingSpace::new(self.grid_size)
    }

    fn mean(&self, eta: f64) -> Result<WarpingFunction> {
        warping_mean(Self::shape(eta), self.grid_size)
    }

    fn perturb<R: Rng + ?Sized>(&self, mean: &WarpingFunction, rng: &mut R) -> Result<WarpingFunction> {
        let weights = trapezoid_weights(self.grid_size);
        let ip = Weighted(&weights);
        let psi = mean.srvf_coords().values();
        for _ in 0..=self.max_resamples {
            let mut v = self.gaussian_process(rng);
            let c = ip.inner(psi, &v);
            v.iter_mut().zip(psi).for_each(|(vi, p)| *vi -= c * p);
            let moved = hypersphere::exp_map(&ip, psi, &v);
            if moved.iter().all(|x| *x > 0.0) {
                return Ok(WarpingFunction::from_srvf(SrvfPoint::new(moved)?));
            }
        }
        Err(MrfError::Generation(format!(
            "warping noise left the positive hemisphere {} times",
            self.max_resamples + 1
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricSpace;
    use crate::simgen::{generate_replicate, ScenarioConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wasserstein_sigma_at_zero() {
        assert_eq!(WassersteinScenario::default().sigma(0.0), 2.25);
    }

    #[test]
    fn every_distortion_frequency_is_monotone() {
        let s = WassersteinScenario::default();
        let mean = s.mean(0.3).unwrap();
        for k in (-4..=4).filter(|k| *k != 0) {
            let raw: Vec<f64> = mean
                .values()
                .iter()
                .map(|&v| WassersteinScenario::distortion(k, v))
                .collect();
            assert!(raw.windows(2).all(|w| w[0] <= w[1] + 1e-12), "k={k}");
            assert!(s.distort(&mean, k).is_ok());
        }
    }

    #[test]
    fn identity_noise_hook() {
        let s = WassersteinScenario::default().without_noise();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = s.mean(-0.4).unwrap();
        assert_eq!(s.perturb(&m, &mut rng).unwrap(), m);
    }

    #[test]
    fn sphere_mean_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let eta: f64 = 6.0 * rng.sample::<f64, _>(StandardNormal);
            let c = sphere_mean(eta).unwrap().coords();
            let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
        // ν → 1 as η → ∞
        let top = sphere_mean(50.0).unwrap().coords();
        assert!(top[0].abs() < 1e-9 && top[1].abs() < 1e-9 && (top[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_zero_noise_hook() {
        let s = SphereScenario {
            noise_variance: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = sphere_mean(0.2).unwrap();
        assert_eq!(s.perturb(&m, &mut rng).unwrap(), m);
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        for eta in [-3.0, 0.0, 2.0, 30.0] {
            let p = sphere_mean(eta).unwrap();
            let (b1, b2) = tangent_basis(&p);
            let m = p.coords();
            let dot = |a: [f64; 3], b: [f64; 3]| a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>();
            assert!(dot(b1, m).abs() < 1e-12 && dot(b2, m).abs() < 1e-12);
            assert!(dot(b1, b2).abs() < 1e-12);
            assert!((dot(b1, b1) - 1.0).abs() < 1e-12 && (dot(b2, b2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn warping_family_endpoints() {
        let id = warping_mean(0.0, 100).unwrap();
        for (g, t) in id.values().iter().zip(0..) {
            assert!((g - t as f64 / 99.0).abs() < 1e-15);
        }
        let tiny = warping_mean(1e-9, 100).unwrap();
        assert!((tiny.values()[50] - 50.0 / 99.0).abs() < 1e-6);
        for a in [-3.0, -0.2, 1.0, 3.0] {
            let g = warping_mean(a, 100).unwrap();
            assert_eq!(g.values()[0], 0.0);
            assert!((g.values()[99] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn warping_zero_noise_hook() {
        let s = WarpingScenario {
            tau2: 0.0,
            ..WarpingScenario::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = s.mean(0.8).unwrap();
        let y = s.perturb(&m, &mut rng).unwrap();
        assert_eq!(s.space().distance(&m, &y).unwrap(), 0.0);
        let err = m
            .values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3);
    }

    #[test]
    fn euclidean_noise_off() {
        let s = EuclideanScenario { noise_sd: 0.0 };
        let r = generate_replicate(&s, &ScenarioConfig::new(SpaceKind::Euclidean, 20, 3, 1)).unwrap();
        assert_eq!(r.train.y, r.train.truth);
    }
}
