//! Builds the autonomous extension of a periodically driven classical spin
//! and samples its Poincare section. The integrable limit collapses onto a
//! single point of the section; turning the coupling on spreads it out.
//!
//! Run with: cargo run --example poincare_map

use tldl::classical::{Chart, ChartState, CouplingSplit, ExtendedState};
use tldl::fields::{DriveProfile, FieldConfiguration, Layout};

fn section_spread(epsilon: f64, n: usize) -> (Vec<(f64, f64)>, f64) {
    let cfg = FieldConfiguration {
        epsilon,
        layout: Layout::ZDrive,
        profile: DriveProfile::Periodic { omega: 1.0, coefficients: vec![(1, 1.0, 0.0)] },
    };
    let sys = tldl::classical::extend_howland(&cfg, Chart::Chart2, CouplingSplit::StrongCoupling)
        .expect("periodic drive extends");
    let base = ChartState::new(Chart::Chart2, 0.4, 0.9).expect("valid point");
    let s0 = ExtendedState::new(base, vec![0.0; sys.arity()]);
    let points = sys
        .poincare_section(&s0, n, 0, 1e-11)
        .expect("section samples");
    let qs: Vec<f64> = points.iter().map(|p| p.q).collect();
    let spread = qs.iter().cloned().fold(f64::MIN, f64::max)
        - qs.iter().cloned().fold(f64::MAX, f64::min);
    (points.iter().map(|p| (p.q, p.p)).collect(), spread)
}

fn main() {
    let n = 200;

    let (_, frozen) = section_spread(0.0, n);
    println!("integrable limit (epsilon = 0): q-spread over {n} crossings = {frozen:.3e}");

    let (points, spread) = section_spread(0.3, n);
    println!("driven case (epsilon = 0.3):    q-spread over {n} crossings = {spread:.3e}");
    println!();
    println!("first section points of the driven case:");
    println!("{:>5} {:>12} {:>12}", "k", "q", "p");
    for (k, (q, p)) in points.iter().take(12).enumerate() {
        println!("{k:>5} {q:>12.6} {p:>12.6}");
    }
    println!("...");
}
