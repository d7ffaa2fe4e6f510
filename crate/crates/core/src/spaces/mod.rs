//! Concrete metric spaces.

mod euclidean;
pub(crate) mod hypersphere;
mod pava;
mod sphere;
mod warping;
mod wasserstein;

pub use euclidean::EuclideanSpace;
pub use pava::pava_isotonic;
pub use sphere::{sphere_exp, sphere_karcher_mean, sphere_log, SpherePoint, SphereSpace};
pub use warping::{
    srvf, srvf_inverse, warping_distance, warping_karcher_mean, SrvfPoint, WarpingFunction,
    WarpingSpace, DEFAULT_WARPING_GRID,
};
pub use wasserstein::{
    quantile_grid, wasserstein_distance, wasserstein_mean, QuantileFunction, WassersteinSpace,
    DEFAULT_QUANTILE_GRID,
};

/// Trapezoid-rule weights for `n` equispaced nodes, scaled to sum to one.
///
/// On a grid spanning `[0, 1]` these are the plain trapezoid weights; on an
/// interior grid they average over the covered interval.
pub fn trapezoid_weights(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => {
            let h = 1.0 / (n - 1) as f64;
            let mut w = vec![h; n];
            w[0] = h / 2.0;
            w[n - 1] = h / 2.0;
            w
        }
    }
}
