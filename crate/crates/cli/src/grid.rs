//! The experiment grid: every `(n, d, replicate)` task generates one dataset
//! and fits each requested method on it.

use std::fs::File;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use anyhow::Context;
use mrf_core::simgen::{
    generate_replicate, EuclideanScenario, Replicate, Scenario, ScenarioConfig, SpaceKind,
    SphereScenario, WarpingScenario, WassersteinScenario, DEFAULT_TEST_SIZE,
};
use mrf_core::{fit, ForestConfig, MetricSpace, SplitRule};
use rayon::prelude::*;
use serde::Serialize;

/// Exact CSV header.
pub const CSV_HEADER: [&str; 12] = [
    "space",
    "method",
    "n",
    "d",
    "rep",
    "seed",
    "fit_seconds",
    "predict_seconds",
    "mse",
    "solver_calls_fit",
    "solver_calls_predict",
    "status",
];

/// One CSV row. Failed rows keep their identifying columns and leave the
/// measurements empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    #[serde(serialize_with = "as_display")]
    pub space: SpaceKind,
    #[serde(serialize_with = "as_display")]
    pub method: SplitRule,
    pub n: usize,
    pub d: usize,
    pub rep: usize,
    pub seed: u64,
    pub fit_seconds: Option<f64>,
    pub predict_seconds: Option<f64>,
    pub mse: Option<f64>,
    pub solver_calls_fit: Option<u64>,
    pub solver_calls_predict: Option<u64>,
    pub status: String,
}

fn as_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl ExperimentRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub space: SpaceKind,
    pub n: Vec<usize>,
    pub d: Vec<usize>,
    pub methods: Vec<SplitRule>,
    pub reps: usize,
    pub n_test: usize,
    pub seed: u64,
    /// Shared by every method; `split_rule` and `seed` are set per row.
    pub forest: ForestConfig,
}

impl GridConfig {
    pub fn new(space: SpaceKind) -> Self {
        Self {
            space,
            n: vec![100],
            d: vec![2],
            methods: vec![SplitRule::Medoid, SplitRule::TwoMeans],
            reps: 10,
            n_test: DEFAULT_TEST_SIZE,
            seed: 0,
            forest: ForestConfig::default(),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(!self.n.is_empty(), "empty list of sample sizes");
        anyhow::ensure!(!self.d.is_empty(), "empty list of dimensions");
        anyhow::ensure!(!self.methods.is_empty(), "empty list of methods");
        anyhow::ensure!(self.reps > 0, "reps must be positive");
        anyhow::ensure!(self.n_test > 0, "n_test must be positive");
        anyhow::ensure!(self.d.iter().all(|&d| d > 0), "dimensions must be positive");
        Ok(())
    }

    /// `(n, d, rep)` in row-major order.
    pub fn tasks(&self) -> Vec<Task> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &d in &self.d {
                for rep in 0..self.reps {
                    out.push(Task {
                        n,
                        d,
                        rep,
                        seed: derive_seed(self.seed, &[n as u64, d as u64, rep as u64]),
                    });
                }
            }
        }
        out
    }

    pub fn scenario_config(&self, task: &Task) -> ScenarioConfig {
        ScenarioConfig {
            space: self.space,
            n_train: task.n,
            d: task.d,
            n_test: self.n_test,
            seed: task.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Task {
    pub n: usize,
    pub d: usize,
    pub rep: usize,
    /// Dataset seed; the forest seed is derived from it.
    pub seed: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for a grid coordinate, independent of scheduling.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(splitmix(master), |acc, &c| splitmix(acc ^ splitmix(c)))
}

/// `(1/N) Σ d(predicted_i, truth_i)²`.
pub fn mse<S: MetricSpace>(space: &S, predicted: &[S::Point], truth: &[S::Point]) -> mrf_core::Result<f64> {
    if predicted.len() != truth.len() || truth.is_empty() {
        return Err(mrf_core::MrfError::LengthMismatch {
            expected: truth.len(),
            found: predicted.len(),
        });
    }
    let mut total = 0.0;
    for (p, t) in predicted.iter().zip(truth) {
        let d = space.distance(p, t)?;
        total += d * d;
    }
    Ok(total / truth.len() as f64)
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic".into())
}

struct Measured {
    fit_seconds: f64,
    predict_seconds: f64,
    mse: f64,
    calls_fit: u64,
    calls_predict: u64,
}

fn measure<Sc: Scenario>(
    scenario: &Sc,
    rep: &Replicate<<Sc::Space as MetricSpace>::Point>,
    config: &ForestConfig,
) -> mrf_core::Result<Measured> {
    let space = Arc::new(scenario.space());
    let start = Instant::now();
    let model = fit(space.clone(), rep.train.x.clone(), rep.train.y.clone(), config)?;
    let fit_seconds = start.elapsed().as_secs_f64();
    let calls_fit = space.solver_calls();

    let start = Instant::now();
    let predicted = model.predict_rows(&rep.test.x)?;
    let predict_seconds = start.elapsed().as_secs_f64();
    let calls_predict = space.solver_calls() - calls_fit;

    Ok(Measured {
        fit_seconds,
        predict_seconds,
        mse: mse(&*space, &predicted, &rep.test.truth)?,
        calls_fit,
        calls_predict,
    })
}

/// Records for one task, one per method, in method order.
pub fn run_task<Sc: Scenario>(scenario: &Sc, grid: &GridConfig, task: Task) -> Vec<ExperimentRecord> {
    let blank = |method: SplitRule, status: String| ExperimentRecord {
        space: grid.space,
        method,
        n: task.n,
        d: task.d,
        rep: task.rep,
        seed: task.seed,
        fit_seconds: None,
        predict_seconds: None,
        mse: None,
        solver_calls_fit: None,
        solver_calls_predict: None,
        status,
    };
    let cfg = grid.scenario_config(&task);
    let rep = match catch_unwind(AssertUnwindSafe(|| generate_replicate(scenario, &cfg))) {
        Ok(Ok(rep)) => rep,
        Ok(Err(e)) => {
            let msg = format!("error: data generation: {e}");
            return grid.methods.iter().map(|&m| blank(m, msg.clone())).collect();
        }
        Err(p) => {
            let msg = format!("error: data generation panicked: {}", panic_message(p));
            return grid.methods.iter().map(|&m| blank(m, msg.clone())).collect();
        }
    };
    grid.methods
        .iter()
        .map(|&method| {
            let config = ForestConfig {
                split_rule: method,
                seed: derive_seed(task.seed, &[1]),
                ..grid.forest.clone()
            };
            match catch_unwind(AssertUnwindSafe(|| measure(scenario, &rep, &config))) {
                Ok(Ok(m)) => ExperimentRecord {
                    fit_seconds: Some(m.fit_seconds),
                    predict_seconds: Some(m.predict_seconds),
                    mse: Some(m.mse),
                    solver_calls_fit: Some(m.calls_fit),
                    solver_calls_predict: Some(m.calls_predict),
                    status: "ok".into(),
                    ..blank(method, String::new())
                },
                Ok(Err(e)) => {
                    log::warn!("{} n={} d={} rep={}: {e}", method, task.n, task.d, task.rep);
                    blank(method, format!("error: {e}"))
                }
                Err(p) => blank(method, format!("error: panicked: {}", panic_message(p))),
            }
        })
        .collect()
}

/// Runs the grid and hands every finished row to `sink` as soon as its task
/// completes. Tasks run in parallel, so rows arrive in completion order.
pub fn run_grid_with<F>(grid: &GridConfig, sink: F) -> anyhow::Result<Vec<ExperimentRecord>>
where
    F: Fn(&ExperimentRecord) -> anyhow::Result<()> + Sync,
{
    grid.validate()?;
    fn go<Sc: Scenario, F>(sc: Sc, grid: &GridConfig, sink: &F) -> anyhow::Result<Vec<ExperimentRecord>>
    where
        F: Fn(&ExperimentRecord) -> anyhow::Result<()> + Sync,
    {
        let per_task = grid
            .tasks()
            .into_par_iter()
            .map(|task| {
                let rows = run_task(&sc, grid, task);
                for r in &rows {
                    sink(r)?;
                }
                Ok(rows)
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        Ok(per_task.into_iter().flatten().collect())
    }
    match grid.space {
        SpaceKind::Euclidean => go(EuclideanScenario::default(), grid, &sink),
        SpaceKind::Wasserstein => go(WassersteinScenario::default(), grid, &sink),
        SpaceKind::Sphere => go(SphereScenario::default(), grid, &sink),
        SpaceKind::Warping => go(WarpingScenario::default(), grid, &sink),
    }
}

/// Runs the grid, appending each row to the CSV at `out` and flushing after
/// every row. Returns all records in task order.
pub fn run_grid(grid: &GridConfig, out: &Path) -> anyhow::Result<Vec<ExperimentRecord>> {
    let file = File::create(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    writer.write_record(CSV_HEADER)?;
    writer.flush()?;
    let writer = Mutex::new(writer);
    let records = run_grid_with(grid, |row| {
        let mut w = writer.lock().expect("csv writer poisoned");
        w.serialize(row)?;
        w.flush()?;
        Ok(())
    })?;
    writer.into_inner().expect("csv writer poisoned").into_inner()?.flush()?;
    Ok(records)
}

/// Writes one dump per task of `grid` into `dir`; returns the file paths.
pub fn dump_grid(grid: &GridConfig, dir: &Path) -> anyhow::Result<Vec<std::path::PathBuf>> {
    grid.validate()?;
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    fn go<Sc: Scenario>(sc: Sc, grid: &GridConfig, dir: &Path) -> anyhow::Result<Vec<std::path::PathBuf>> {
        grid.tasks()
            .into_par_iter()
            .map(|task| {
                let rep = generate_replicate(&sc, &grid.scenario_config(&task))?;
                let path = dir.join(format!(
                    "{}_n{}_d{}_rep{}.txt",
                    grid.space, task.n, task.d, task.rep
                ));
                let mut file = std::io::BufWriter::new(File::create(&path)?);
                mrf_core::simgen::write_replicate(&mut file, &sc.space(), &rep)?;
                file.flush()?;
                Ok(path)
            })
            .collect()
    }
    match grid.space {
        SpaceKind::Euclidean => go(EuclideanScenario::default(), grid, dir),
        SpaceKind::Wasserstein => go(WassersteinScenario::default(), grid, dir),
        SpaceKind::Sphere => go(SphereScenario::default(), grid, dir),
        SpaceKind::Warping => go(WarpingScenario::default(), grid, dir),
    }
}
