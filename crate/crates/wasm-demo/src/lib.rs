//! Browser bindings. Every export takes plain numbers or strings and returns
//! a JSON string, so the page needs no generated type glue beyond `JSON.parse`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use schoolsafety::corpus::bundled_incidents;
use schoolsafety::forecast::{run_target, HarnessConfig, Target};
use schoolsafety::gametheory::{
    calibrate, simulate, DefenderPolicy, MillerCurve, Scenario, SimOutcome,
};
use schoolsafety::stats::per_school_probability;

fn to_js<T: Serialize>(value: &T) -> Result<String, JsError> {
    serde_json::to_string(value).map_err(|e| JsError::new(&e.to_string()))
}

fn js_err(e: schoolsafety::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[derive(Serialize)]
struct AttackRun {
    miller: MillerCurve,
    schedule: Vec<u32>,
    outcome: SimOutcome,
    casualties_per_minute: f64,
}

/// One attack with bullets spread evenly over the window. A positive
/// `target_rate` first calibrates `i_high` to that casualty rate.
#[wasm_bindgen]
pub fn simulate_attack(
    bullet_budget: u32,
    t_cop: u32,
    stop_rate: f64,
    i_high: f64,
    i_low_decay: f64,
    target_rate: f64,
) -> Result<String, JsError> {
    let mut scenario = Scenario {
        bullet_budget,
        t_cop,
        miller: MillerCurve::new(i_high, i_low_decay).map_err(js_err)?,
        ..Scenario::default()
    };
    scenario.check().map_err(js_err)?;
    let policy = DefenderPolicy {
        stop_rate,
        ..DefenderPolicy::default()
    };
    policy.check().map_err(js_err)?;
    let schedule = scenario.uniform_schedule();
    if target_rate > 0.0 {
        scenario.miller = calibrate(&scenario, &schedule, &policy, target_rate).map_err(js_err)?;
    }
    let outcome = simulate(&scenario, &schedule, &policy).map_err(js_err)?;
    let casualties_per_minute = outcome.loss_v / f64::from(outcome.active_minutes.max(1));
    to_js(&AttackRun {
        miller: scenario.miller,
        schedule,
        outcome,
        casualties_per_minute,
    })
}

#[derive(Serialize)]
struct ForecastLine {
    id: String,
    name: &'static str,
    training_data: String,
    predictions: [f64; 6],
    mse: f64,
    mae: f64,
}

/// 2025–2030 forecasts from the bundled corpus. `target` is "events" or
/// "casualties"; `holdout_percent` of 0 scores in-sample.
#[wasm_bindgen]
pub fn forecast(target: &str, holdout_percent: u32) -> Result<String, JsError> {
    let target: Target = target.parse().map_err(|e: String| JsError::new(&e))?;
    let cfg = HarnessConfig {
        test_percent: holdout_percent,
        ..HarnessConfig::default()
    };
    let out = run_target(&bundled_incidents(), target, &cfg).map_err(js_err)?;
    let lines: Vec<ForecastLine> = out
        .rows
        .into_iter()
        .map(|r| ForecastLine {
            id: r.model_id,
            name: r.model_name,
            training_data: r.training_data,
            predictions: r.predictions,
            mse: r.mse,
            mae: r.mae,
        })
        .collect();
    to_js(&lines)
}

/// Per-school annual and lifetime odds under a uniform rate.
#[wasm_bindgen]
pub fn school_odds(
    events: u32,
    years: u32,
    schools: u32,
    exposure_years: u32,
) -> Result<String, JsError> {
    let p = per_school_probability(u64::from(events), years, u64::from(schools))
        .and_then(|p| p.with_exposure(exposure_years))
        .map_err(js_err)?;
    to_js(&p)
}
