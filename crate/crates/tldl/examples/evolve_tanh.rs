//! Integrates the Schrodinger equation through a tanh-shaped level sweep
//! and prints the spinor trajectory together with the norm drift.
//!
//! Run with: cargo run --example evolve_tanh

use num_complex::Complex64;
use tldl::fields::{DriveProfile, FieldConfiguration, Layout};
use tldl::quantum::{evolve_schrodinger, Spinor};

fn main() {
    let cfg = FieldConfiguration {
        epsilon: 1.0,
        layout: Layout::ZDrive,
        profile: DriveProfile::Tanh { f0: 1.0, f1: 0.5, t_scale: 1.0 },
    };
    let psi0 = Spinor::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let traj = evolve_schrodinger(&cfg, psi0, -8.0, 8.0, 1e-12).expect("integration succeeds");

    println!("{:>7} {:>24} {:>24} {:>12}", "t", "psi1", "psi2", "|psi|-1");
    for k in 0..=16 {
        let t = -8.0 + k as f64;
        let psi = traj.eval(t);
        println!(
            "{:>7.2} {:>+11.6}{:+.6}i {:>+11.6}{:+.6}i {:>12.2e}",
            t,
            psi.psi1.re,
            psi.psi1.im,
            psi.psi2.re,
            psi.psi2.im,
            psi.norm() - 1.0
        );
    }
    println!();
    println!("accepted steps: {}", traj.accepted_steps);
    println!("rejected steps: {}", traj.rejected_steps);
    println!("norm drift:     {:.3e}", traj.norm_drift);

    let psi_end = traj.eval(8.0);
    println!(
        "upper-level population after the sweep: {:.6}",
        psi_end.psi1.norm_sqr() / psi_end.norm_sqr()
    );
}
