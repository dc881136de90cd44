//! Evaluates the closed-form solution for the tanh level sweep, compares it
//! against direct numerical integration, and checks the second-order
//! residual of the reduced equation along the way.
//!
//! Run with: cargo run --example tanh_pulse_exact

use num_complex::Complex64;
use tldl::exact::{tanh_match_initial, tanh_solution_with_derivatives, tanh_spinor};
use tldl::fields::{DriveProfile, FieldConfiguration, Layout};
use tldl::quantum::{evolve_schrodinger, second_order_residual, ComponentEq, ResidualProbe};

fn main() {
    let (f0, f1, t_scale, epsilon) = (1.0, 0.5, 1.0, 1.0);
    let cfg = FieldConfiguration {
        epsilon,
        layout: Layout::ZDrive,
        profile: DriveProfile::Tanh { f0, f1, t_scale },
    };

    let c_p = Complex64::new(1.0, 0.0);
    let c_q = Complex64::new(0.0, 0.0);
    let params =
        tanh_match_initial(f0, f1, t_scale, epsilon, c_p, c_q).expect("nondegenerate frequencies");

    let t_in = -15.0;
    let psi_in = tanh_spinor(&params, t_in).expect("closed form evaluates");
    let traj = evolve_schrodinger(&cfg, psi_in, t_in, 10.0, 1e-12).expect("integration");

    println!("closed form vs numerical integration, matched at t = {t_in}:");
    println!("{:>7} {:>24} {:>24} {:>10}", "t", "psi1 exact", "psi1 numeric", "gap");
    let mut worst = 0.0f64;
    let mut worst_res = 0.0f64;
    let probe = |t: f64| tanh_solution_with_derivatives(&params, t).expect("closed form");
    for k in 0..=20 {
        let t = -10.0 + k as f64;
        let exact = tanh_spinor(&params, t).expect("closed form").psi1;
        let numeric = traj.eval(t).psi1;
        let gap = (exact - numeric).norm();
        worst = worst.max(gap);
        let res = second_order_residual(
            &ResidualProbe::Analytic(&probe),
            &cfg,
            t,
            ComponentEq::First,
        );
        worst_res = worst_res.max(res.norm());
        if k % 4 == 0 {
            println!(
                "{:>7.1} {:>+11.6}{:+.6}i {:>+11.6}{:+.6}i {:>10.2e}",
                t, exact.re, exact.im, numeric.re, numeric.im, gap
            );
        }
    }
    println!();
    println!("largest |exact - numeric| on the grid: {worst:.3e}");
    println!("largest reduced-equation residual:     {worst_res:.3e}");
}
