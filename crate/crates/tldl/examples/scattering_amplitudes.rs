//! Tabulates transition probabilities for the two solvable pulses. The sech
//! pulse follows the pulse-area law p = sin^2(pi f0 T) sech^2(pi eps T), and
//! the tanh sweep interpolates between sudden and adiabatic behaviour.
//!
//! Run with: cargo run --example scattering_amplitudes

use tldl::exact::{scattering_outcome, InState, TransitionScenario};

fn main() {
    println!("sech pulse, in state = lower level:");
    println!("{:>6} {:>6} {:>14} {:>14} {:>12}", "f0*T", "eps*T", "p_transition", "p_survival", "area law");
    for &f0 in &[0.25, 0.5, 0.8, 1.0] {
        for &eps in &[0.2, 0.6] {
            let sc = TransitionScenario::Sech { f0, t_scale: 1.0, epsilon: eps };
            let (p, s) = scattering_outcome(&sc, InState::Lower).expect("solvable");
            let pi = std::f64::consts::PI;
            let law = (pi * f0).sin().powi(2) / (pi * eps).cosh().powi(2);
            println!("{f0:>6.2} {eps:>6.2} {p:>14.10} {s:>14.10} {law:>12.10}");
        }
    }

    println!();
    println!("tanh sweep f(t) = f0 tanh(t/T) + f1, in state = lower level:");
    println!("{:>6} {:>6} {:>6} {:>14} {:>14}", "f0*T", "f1*T", "eps*T", "p_transition", "p_survival");
    for &f0 in &[0.5, 1.0, 2.0] {
        for &eps in &[0.5, 1.0] {
            let sc = TransitionScenario::Tanh { f0, f1: 0.25, t_scale: 1.0, epsilon: eps };
            let (p, s) = scattering_outcome(&sc, InState::Lower).expect("solvable");
            println!("{f0:>6.2} {:>6.2} {eps:>6.2} {p:>14.10} {s:>14.10}", 0.25);
        }
    }

    println!();
    println!("slow passage is adiabatic: the transition dies as the sweep widens");
    println!("{:>8} {:>16}", "T", "p_transition");
    for &t_scale in &[0.5, 1.0, 2.0, 4.0, 8.0] {
        let sc = TransitionScenario::Tanh { f0: 1.0, f1: 0.0, t_scale, epsilon: 1.0 };
        let (p, _) = scattering_outcome(&sc, InState::Lower).expect("solvable");
        println!("{t_scale:>8.1} {p:>16.3e}");
    }
}
