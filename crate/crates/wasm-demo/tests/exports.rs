use schoolsafety_wasm::{forecast, school_odds, simulate_attack};

#[test]
fn calibrated_attack_hits_rate() {
    let v: serde_json::Value =
        serde_json::from_str(&simulate_attack(78, 7, 0.0285, 1.0, 0.5, 0.639).unwrap()).unwrap();
    assert!((v["casualties_per_minute"].as_f64().unwrap() - 0.639).abs() < 1e-6);
    assert_eq!(v["schedule"].as_array().unwrap().len(), 31);
}

#[test]
fn forecast_lists_four_models_per_variant() {
    let v: serde_json::Value = serde_json::from_str(&forecast("events", 20).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let ols = rows.iter().find(|r| r["id"] == "2a").unwrap();
    assert!((ols["predictions"][0].as_f64().unwrap() - 2.13).abs() < 0.01);
}

#[test]
fn odds_round_trip() {
    let v: serde_json::Value =
        serde_json::from_str(&school_odds(43, 26, 130_930, 13).unwrap()).unwrap();
    assert!((v["per_school_annual"].as_f64().unwrap() - 43.0 / (26.0 * 130_930.0)).abs() < 1e-15);
}
