//! Host-side checks of the demo API: every operation returns valid
//! JSON with the promised shape, respects the analytic orderings,
//! and is deterministic in its arguments.

use linksim_demo::{bits_sweep, subcarrier_profile, user_sweep};

fn floats(v: &serde_json::Value) -> Vec<f64> {
    v.as_array()
        .expect("array field")
        .iter()
        .map(|x| x.as_f64().expect("numeric entry"))
        .collect()
}

#[test]
fn profile_orders_quantized_below_exact_below_eigen() {
    let doc: serde_json::Value = serde_json::from_str(&subcarrier_profile(7, 10.0, 4)).unwrap();
    let rf_q = floats(&doc["rf_quantized"]);
    let rf_x = floats(&doc["rf_exact"]);
    let eb_x = floats(&doc["eb_exact"]);
    assert_eq!(rf_q.len(), 64);
    assert_eq!(rf_x.len(), 64);
    assert_eq!(eb_x.len(), 64);
    for q in 0..64 {
        assert!(rf_q[q] > 0.0);
        assert!(
            rf_q[q] <= rf_x[q] + 1e-9,
            "quantization must not beat exact feedback at q={q}"
        );
        assert!(
            rf_x[q] <= eb_x[q] + 1e-9,
            "joint factorization must not beat per-subcarrier eigen at q={q}"
        );
    }
}

#[test]
fn profile_clamps_out_of_range_requests() {
    let doc: serde_json::Value = serde_json::from_str(&subcarrier_profile(1, 99.0, 500)).unwrap();
    assert_eq!(doc["snr_db"], 30.0);
    assert_eq!(doc["bits"], 10);
}

#[test]
fn user_sweep_reports_monotone_curves_for_all_schemes() {
    let doc: serde_json::Value = serde_json::from_str(&user_sweep(3, 5, 8, 3)).unwrap();
    assert_eq!(doc["k"], serde_json::json!([1, 2, 3, 4, 5]));
    let schemes = doc["schemes"].as_object().unwrap();
    assert_eq!(schemes.len(), 4);
    for (name, values) in schemes {
        let means = floats(values);
        assert_eq!(means.len(), 5, "{name} curve length");
        for k in 1..means.len() {
            assert!(
                means[k] >= means[k - 1] - 1e-12,
                "{name} throughput dropped when a terminal joined"
            );
        }
    }
}

#[test]
fn bits_sweep_converges_toward_the_exact_ceiling() {
    let doc: serde_json::Value = serde_json::from_str(&bits_sweep(11, 6)).unwrap();
    let quantized = floats(&doc["quantized"]);
    let exact = doc["exact"].as_f64().unwrap();
    assert_eq!(quantized.len(), 8);
    for b in 1..quantized.len() {
        assert!(
            quantized[b] >= quantized[b - 1] - 1e-12,
            "larger codebook must not lose throughput"
        );
    }
    for (b, &mean) in quantized.iter().enumerate() {
        assert!(mean <= exact + 1e-9, "B={} beat the exact ceiling", b + 1);
    }
    assert!(
        exact - quantized[7] < exact - quantized[0],
        "gap must shrink"
    );
}

#[test]
fn operations_are_deterministic_in_their_arguments() {
    assert_eq!(
        subcarrier_profile(5, 12.5, 6),
        subcarrier_profile(5, 12.5, 6)
    );
    assert_eq!(user_sweep(2, 4, 5, 4), user_sweep(2, 4, 5, 4));
    assert_eq!(bits_sweep(2, 4), bits_sweep(2, 4));
    assert_ne!(
        subcarrier_profile(5, 12.5, 6),
        subcarrier_profile(6, 12.5, 6),
        "different seeds must draw different channels"
    );
}
