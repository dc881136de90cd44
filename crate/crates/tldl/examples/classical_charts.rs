//! Runs the classical spin in both canonical chart conventions, checks that
//! they trace the same unit-sphere path, and demonstrates the automatic
//! switch to Cartesian integration near a pole.
//!
//! Run with: cargo run --example classical_charts

use tldl::classical::{
    chart_from_spin, hamilton_flow, hamiltonian_value, spin_from_chart, Chart, ChartState,
};
use tldl::fields::{DriveProfile, FieldConfiguration, Layout};

fn main() {
    let cfg = FieldConfiguration {
        epsilon: 0.9,
        layout: Layout::ZDrive,
        profile: DriveProfile::Tanh { f0: 0.6, f1: 0.2, t_scale: 2.0 },
    };

    let s1 = ChartState::new(Chart::Chart1, 0.5, 0.3).expect("valid chart point");
    let spin = spin_from_chart(&s1);
    let s2 = chart_from_spin(Chart::Chart2, spin);

    let t1 = hamilton_flow(&cfg, &s1, 0.0, 30.0, 1e-11).expect("chart1 flow");
    let t2 = hamilton_flow(&cfg, &s2, 0.0, 30.0, 1e-11).expect("chart2 flow");

    println!("same trajectory seen from both charts:");
    println!("{:>6} {:>34} {:>34} {:>10}", "t", "S (chart1)", "S (chart2)", "gap");
    for k in 0..=10 {
        let t = 3.0 * k as f64;
        let a = spin_from_chart(&t1.eval(t));
        let b = spin_from_chart(&t2.eval(t));
        let gap = (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0f64, f64::max);
        println!(
            "{:>6.1} ({:+.5} {:+.5} {:+.5}) ({:+.5} {:+.5} {:+.5}) {:>10.2e}",
            t, a[0], a[1], a[2], b[0], b[1], b[2], gap
        );
    }

    let h0 = hamiltonian_value(&t1.eval(0.0), cfg.field_at(0.0));
    let h_end = hamiltonian_value(&t1.eval(30.0), cfg.field_at(30.0));
    println!();
    println!("energy start {h0:+.6}, energy end {h_end:+.6} (field is time dependent)");

    let near_pole = ChartState::new(Chart::Chart1, 0.0, 0.999_999_95).expect("near the pole");
    let flow = hamilton_flow(&cfg, &near_pole, 0.0, 30.0, 1e-11).expect("pole flow");
    println!(
        "starting at S3 = {:.8}: {} pole crossings handled in Cartesian mode",
        near_pole.p, flow.pole_crossings
    );
    let s_end = spin_from_chart(&flow.eval(30.0));
    let radius = (s_end[0] * s_end[0] + s_end[1] * s_end[1] + s_end[2] * s_end[2]).sqrt();
    println!("final |S| = {radius:.12}");
}
