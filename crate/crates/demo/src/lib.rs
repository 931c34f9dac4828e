//! Browser bindings: each export takes plain strings/numbers and returns a
//! JSON document for the page to render.

use epl_core::diagnostics::{compute_statistic, t_matrix, t_min, ChiSquareOptions, StatisticId};
use epl_core::inference::{fit_epl_mle, heuristic_rho, HeuristicMethod, MleOptions, MmOptions};
use epl_core::models::{epl_exact_marginal_table, epl_sample, EplParams};
use epl_core::perm::rank_vector;
use epl_core::{EplError, Permutation, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest K the page accepts; stage marginals enumerate all K! sequences.
pub const MAX_K: usize = 8;

/// Largest sample the page will draw.
pub const MAX_N: usize = 50_000;

pub fn parse_params(rho: &str, weights: &str) -> Result<EplParams> {
    let weights: Vec<f64> = weights
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| EplError::InvalidParameter(format!("weight '{s}' is not a number")))
        })
        .collect::<Result<_>>()?;
    let rho: Permutation = if rho.trim().is_empty() {
        Permutation::identity(weights.len())
    } else {
        rho.parse()?
    };
    if rho.len() > MAX_K || rho.len() < 2 {
        return Err(EplError::InvalidParameter(format!("K must lie in 2..={MAX_K}")));
    }
    EplParams::new(rho, weights)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(EplError::InvalidParameter(format!("N must lie in 1..={MAX_N}")));
    }
    Ok(())
}

/// Exact stage marginals with the first- and last-stage rank vectors.
pub fn stage_marginals_value(rho: &str, weights: &str) -> Result<Value> {
    let params = parse_params(rho, weights)?;
    let table = epl_exact_marginal_table(&params)?;
    let k = params.k();
    let first = rank_vector(&table[0], true)?.to_one_based();
    let last = rank_vector(&table[k - 1], true)?.to_one_based();
    let sums: Vec<usize> = first.iter().zip(&last).map(|(a, b)| a + b).collect();
    Ok(json!({
        "k": k,
        "rho": params.rho(),
        "stage_marginals": table,
        "first_stage_ranks": first,
        "last_stage_ranks": last,
        "rank_sums": sums,
    }))
}

/// Samples N orderings, then reports T, D, `T_m` and both heuristic estimates.
pub fn heuristic_value(rho: &str, weights: &str, n: usize, seed: u64) -> Result<Value> {
    let params = parse_params(rho, weights)?;
    check_n(n)?;
    let data = epl_sample(&params, n, seed)?;
    let tm = t_matrix(&data);
    let tmin = t_min(&tm)?;
    let mm = MmOptions::default();
    let pca = heuristic_rho(&data, HeuristicMethod::Pca, &mm)?;
    let mds = heuristic_rho(&data, HeuristicMethod::Mds, &mm)?;
    Ok(json!({
        "true_rho": params.rho(),
        "t": tm.t,
        "d": tm.d,
        "u_k": tm.u_k,
        "t_min": tmin.value,
        "argmin": tmin.argmin,
        "pca": { "rho_hat": pca.rho_hat, "scores": pca.scores, "recovered": &pca.rho_hat == params.rho() },
        "mds": { "rho_hat": mds.rho_hat, "scores": mds.scores, "recovered": &mds.rho_hat == params.rho() },
    }))
}

/// Samples N orderings, fits the EPL and evaluates every statistic at the fit.
pub fn diagnose_value(rho: &str, weights: &str, n: usize, seed: u64) -> Result<Value> {
    let params = parse_params(rho, weights)?;
    check_n(n)?;
    let data = epl_sample(&params, n, seed)?;
    let fit = fit_epl_mle(&data, &MleOptions { seed, ..Default::default() })?;
    let chi = ChiSquareOptions { mc_seed: seed, ..Default::default() };
    let stats = StatisticId::ALL
        .iter()
        .map(|&s| {
            compute_statistic(s, &data, &fit.params, &chi).map(|v| json!({ "statistic": s, "value": v.value, "cells_used": v.cells_used }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "fit": { "rho": fit.params.rho(), "weights": fit.params.normalized_weights(), "loglik": fit.loglik },
        "statistics": stats,
    }))
}

fn to_js(v: Result<Value>) -> std::result::Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn stage_marginals(rho: &str, weights: &str) -> std::result::Result<String, JsError> {
    to_js(stage_marginals_value(rho, weights))
}

#[wasm_bindgen]
pub fn heuristic(rho: &str, weights: &str, n: usize, seed: u64) -> std::result::Result<String, JsError> {
    to_js(heuristic_value(rho, weights, n, seed))
}

#[wasm_bindgen]
pub fn diagnose(rho: &str, weights: &str, n: usize, seed: u64) -> std::result::Result<String, JsError> {
    to_js(diagnose_value(rho, weights, n, seed))
}

#[wasm_bindgen]
pub fn version() -> String {
    epl_core::VERSION.to_string()
}
