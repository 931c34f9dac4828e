use epl_demo::{diagnose_value, heuristic_value, parse_params, stage_marginals_value};

const RHO: &str = "1,5,2,4,3";
const W: &str = "0.15,0.4,0.12,0.08,0.25";

#[test]
fn stage_marginals_reproduce_expected_ranks() {
    let v = stage_marginals_value(RHO, W).unwrap();
    assert_eq!(v["first_stage_ranks"], serde_json::json!([3, 1, 4, 5, 2]));
    assert_eq!(v["last_stage_ranks"], serde_json::json!([3, 5, 2, 1, 4]));
    assert_eq!(v["rank_sums"], serde_json::json!([6, 6, 6, 6, 6]));
    for row in v["stage_marginals"].as_array().unwrap() {
        let s: f64 = row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn heuristic_payload() {
    let v = heuristic_value(RHO, W, 10_000, 2718).unwrap();
    assert_eq!(v["u_k"], 12);
    assert_eq!(v["argmin"], serde_json::json!([1, 3]));
    assert_eq!(v["pca"]["recovered"], true);
    assert_eq!(v["mds"]["rho_hat"], serde_json::json!([1, 5, 2, 4, 3]));
}

#[test]
fn diagnose_payload() {
    let v = diagnose_value(RHO, W, 500, 1).unwrap();
    assert_eq!(v["statistics"].as_array().unwrap().len(), 5);
    let w: f64 = v["fit"]["weights"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((w - 1.0).abs() < 1e-9);
}

#[test]
fn rejects_bad_input() {
    assert!(parse_params("1,2", "1,2,3").is_err());
    assert!(parse_params("", "1,x").is_err());
    assert!(parse_params("1,1,2", "1,2,3").is_err());
    assert!(parse_params("", "1").is_err());
    assert!(parse_params("", "1,2,3,4,5,6,7,8,9").is_err());
    assert!(heuristic_value(RHO, W, 0, 1).is_err());
    assert_eq!(parse_params("", "1,2,3").unwrap().rho().to_one_based(), vec![1, 2, 3]);
}
