//! Browser demo bindings. Every exported function takes plain numbers and
//! returns a JSON string: `{"ok": ...}` on success, `{"error": "..."}` otherwise.

use kgframe::constructions::{example1, example2, random_kg_system};
use kgframe::duals::{neumann_reconstruct, perturbed_dual};
use kgframe::random::{complex_gaussian_vector, rng};
use kgframe::redundancy::{brute_force_report, erasure_invertibility};
use kgframe::{BoundReport, FrameClass};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_DIM: usize = 24;
const MAX_BLOCKS: usize = 12;
const MAX_STEPS: usize = 60;

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NeumannCurve {
    pub defect: f64,
    pub errors: Vec<f64>,
    pub bound: Vec<f64>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExampleSummary {
    pub class: FrameClass,
    pub bounds: BoundReport,
    pub kstar_lower: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ErasureMap {
    pub blocks: usize,
    /// `survives[a][b]`: removal of `{a, b}` (`{a}` on the diagonal).
    pub survives: Vec<Vec<bool>>,
    /// Lower K-g bound of each reduced system, `None` when it breaks.
    pub reduced_bound: Vec<Vec<Option<f64>>>,
    /// Bound predicted by the invertibility criterion.
    pub predicted_bound: Vec<Vec<Option<f64>>>,
    pub full_bound: Option<f64>,
}

fn check(cond: bool, msg: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn random_dims(n: usize, m: usize, seed: u64) -> Vec<usize> {
    // deterministic mix of 1- and 2-dimensional blocks covering C^n
    let mut dims: Vec<usize> = (0..m).map(|j| 1 + ((seed as usize + j) % 2)).collect();
    while dims.iter().sum::<usize>() < n {
        let j = dims
            .iter()
            .enumerate()
            .min_by_key(|(_, d)| **d)
            .map(|(j, _)| j)
            .unwrap_or(0);
        dims[j] += 1;
    }
    dims
}

/// Error of the Neumann partial sums for a random system and a dual of defect `eps`.
pub fn neumann_curve(
    n: usize,
    rank: usize,
    eps: f64,
    steps: usize,
    seed: u64,
) -> Result<NeumannCurve, String> {
    check((2..=MAX_DIM).contains(&n), "n must lie in 2..=24")?;
    check((1..=n).contains(&rank), "rank must lie in 1..=n")?;
    check(
        eps.is_finite() && (0.0..1.0).contains(&eps),
        "defect must lie in [0, 1)",
    )?;
    check(steps <= MAX_STEPS, "at most 60 steps")?;
    let dims = random_dims(n, 4, seed);
    let ksys = random_kg_system(n, &dims, rank, seed).map_err(|e| e.to_string())?;
    let theta = perturbed_dual(&ksys, eps, seed.wrapping_add(1)).map_err(|e| e.to_string())?;
    let f = ksys.k() * complex_gaussian_vector(&mut rng(seed.wrapping_add(2)), n);
    let norm = f.norm();
    let trace = neumann_reconstruct(ksys.system(), &theta, ksys.k(), &f, steps)
        .map_err(|e| e.to_string())?;
    Ok(NeumannCurve {
        defect: trace.defect,
        errors: trace.errors.iter().map(|e| e / norm).collect(),
        bound: trace.predicted_bound.iter().map(|b| b / norm).collect(),
    })
}

/// Bounds and class of the two explicit constructions.
pub fn example_summary(which: u8, n: usize) -> Result<ExampleSummary, String> {
    check(n <= 96, "n must be at most 96")?;
    let ksys = match which {
        1 => example1(n),
        2 => example2(n),
        _ => return Err("example must be 1 or 2".into()),
    }
    .map_err(|e| e.to_string())?;
    let cls = ksys.classify(1e-8);
    Ok(ExampleSummary {
        class: cls.class,
        bounds: cls.bounds,
        kstar_lower: cls.kstar_lower,
    })
}

/// Survival of every single and pair removal for a random system with invertible frame operator.
pub fn erasure_map(n: usize, m: usize, seed: u64) -> Result<ErasureMap, String> {
    check((2..=8).contains(&n), "n must lie in 2..=8")?;
    check((2..=MAX_BLOCKS).contains(&m), "blocks must lie in 2..=12")?;
    let dims = random_dims(n, m, seed);
    let ksys = random_kg_system(n, &dims, n, seed).map_err(|e| e.to_string())?;
    let mut survives = vec![vec![false; m]; m];
    let mut reduced_bound = vec![vec![None; m]; m];
    let mut predicted_bound = vec![vec![None; m]; m];
    for a in 0..m {
        for b in a..m {
            let removed: Vec<usize> = if a == b { vec![a] } else { vec![a, b] };
            let truth = brute_force_report(&ksys, &removed).map_err(|e| e.to_string())?;
            let inv = erasure_invertibility(&ksys, &removed).map_err(|e| e.to_string())?;
            for (x, y) in [(a, b), (b, a)] {
                survives[x][y] = truth.survives;
                reduced_bound[x][y] = truth.actual_lower_bound;
                predicted_bound[x][y] = inv.predicted_lower_bound;
            }
        }
    }
    Ok(ErasureMap {
        blocks: m,
        survives,
        reduced_bound,
        predicted_bound,
        full_bound: ksys.optimal_bounds().kg_lower_opt,
    })
}

fn respond<T: Serialize>(result: Result<T, String>) -> String {
    let value = match result {
        Ok(v) => serde_json::json!({ "ok": v }),
        Err(e) => serde_json::json!({ "error": e }),
    };
    value.to_string()
}

#[wasm_bindgen(js_name = neumannCurve)]
pub fn neumann_curve_json(n: usize, rank: usize, eps: f64, steps: usize, seed: u32) -> String {
    respond(neumann_curve(n, rank, eps, steps, seed.into()))
}

#[wasm_bindgen(js_name = exampleSummary)]
pub fn example_summary_json(which: u8, n: usize) -> String {
    respond(example_summary(which, n))
}

#[wasm_bindgen(js_name = erasureMap)]
pub fn erasure_map_json(n: usize, m: usize, seed: u32) -> String {
    respond(erasure_map(n, m, seed.into()))
}
