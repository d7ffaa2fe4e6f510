use mrf_core::simgen::{sphere_mean, warping_mean, Scenario, SphereScenario, WarpingScenario};
use mrf_core::spaces::{sphere_exp, SpherePoint, SphereSpace, WarpingSpace};
use mrf_core::{distance_matrix, frechet_functional, frechet_medoid, MetricSpace, WeightVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Isotropic tangent noise is symmetric around `p`, so `p` is the
/// population Fréchet mean; the sample medoid should approach it.
#[test]
fn sphere_medoid_concentrates_with_sample_size() {
    let space = SphereSpace::new();
    let sc = SphereScenario::default();
    let truth = sphere_mean(0.4).unwrap();
    let medoid_error = |n: usize, seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ys: Vec<SpherePoint> = (0..n).map(|_| sc.noisy_around(&truth, &mut rng)).collect();
        let dm = distance_matrix(&space, &ys).unwrap();
        let all: Vec<usize> = (0..n).collect();
        space.distance(&ys[frechet_medoid(&dm, &all).unwrap()], &truth).unwrap()
    };
    let small = median((0..20).map(|r| medoid_error(50, r)).collect());
    let large = median((0..20).map(|r| medoid_error(400, 100 + r)).collect());
    assert!(large < small, "{large} !< {small}");
}

fn random_tangent(p: &SpherePoint, len: f64, rng: &mut ChaCha8Rng) -> [f64; 3] {
    let c = p.coords();
    let raw = [0; 3].map(|_| rng.sample::<f64, _>(StandardNormal));
    let dot: f64 = raw.iter().zip(&c).map(|(a, b)| a * b).sum();
    let v = [0, 1, 2].map(|i| raw[i] - dot * c[i]);
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.map(|x| x * len / n)
}

#[test]
fn sphere_solver_output_is_locally_optimal() {
    let space = SphereSpace::new();
    let sc = SphereScenario::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..20 {
        let center = sphere_mean(rng.random_range(-3.0..3.0)).unwrap();
        let ys: Vec<SpherePoint> = (0..15).map(|_| sc.noisy_around(&center, &mut rng)).collect();
        let raw: Vec<f64> = (0..15).map(|_| rng.random_range(0.0..1.0)).collect();
        let w = WeightVector::normalized(raw).unwrap();
        let mean = space.weighted_frechet_mean(&ys, &w).unwrap();
        let support: Vec<&SpherePoint> = ys.iter().collect();
        let at = frechet_functional(&space, &support, w.as_slice(), &mean).unwrap();
        for _ in 0..20 {
            let probe = sphere_exp(&mean, random_tangent(&mean, 1e-3, &mut rng));
            let f = frechet_functional(&space, &support, w.as_slice(), &probe).unwrap();
            assert!(f >= at - 1e-12, "trial {trial}: {f} < {at}");
        }
    }
}

#[test]
fn warping_solver_beats_every_sample() {
    let space = WarpingSpace::default();
    let sc = WarpingScenario::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let center = warping_mean(rng.random_range(-1.0..1.0), 100).unwrap();
        let ys: Vec<_> = (0..10).map(|_| sc.perturb(&center, &mut rng).unwrap()).collect();
        let w = WeightVector::uniform(10);
        let mean = space.weighted_frechet_mean(&ys, &w).unwrap();
        let support: Vec<_> = ys.iter().collect();
        let at = frechet_functional(&space, &support, w.as_slice(), &mean).unwrap();
        for y in &ys {
            assert!(at <= frechet_functional(&space, &support, w.as_slice(), y).unwrap() + 1e-12);
        }
    }
}
