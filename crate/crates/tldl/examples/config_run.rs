//! Drives the config-file front end programmatically: writes a run
//! configuration with a parameter sweep, executes it, and reads back the
//! manifest with its output digests.
//!
//! Run with: cargo run --example config_run

use tldl::cli::run_from;

fn main() {
    let dir = std::env::temp_dir().join("tldl-config-run");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let out = dir.join("scatter.csv");
    let config = serde_json::json!({
        "scenario": "scatter",
        "field": {
            "epsilon": 0.5,
            "layout": "z-drive",
            "profile": { "kind": "sech", "f0": 0.8, "T": 1.0 }
        },
        "in_state": "lower",
        "output": out.display().to_string(),
        "sweep": { "parameter": "field.epsilon", "values": [0.2, 0.4, 0.6, 0.8] }
    });
    let config_path = dir.join("scatter.json");
    std::fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap())
        .expect("write config");

    run_from([
        "tldl",
        "--config",
        config_path.to_str().unwrap(),
        "--jobs",
        "4",
    ])
    .expect("sweep runs");

    println!("sweep of the detuning, one output file per value:");
    for k in 0..4 {
        let child = dir.join(format!("scatter_{k}.csv"));
        let body = std::fs::read_to_string(&child).expect("child output");
        let row = body.lines().nth(1).expect("data row");
        println!("  {}: {}", child.display(), row);
    }

    let manifest_path = format!("{}.manifest.json", out.display());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).expect("manifest"))
            .expect("valid json");
    println!();
    println!("parent manifest lists {} outputs:", manifest["outputs"].as_array().unwrap().len());
    for entry in manifest["outputs"].as_array().unwrap() {
        println!(
            "  {}  sha256 {}...",
            entry["path"].as_str().unwrap(),
            &entry["sha256"].as_str().unwrap()[..16]
        );
    }
}
