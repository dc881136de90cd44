//! Exercises the special-function layer: Gauss hypergeometric values around
//! the complex plane, the connection between expansions at z and 1 - z, and
//! the log-gamma recurrence.
//!
//! Run with: cargo run --example hypergeometric_probe

use num_complex::Complex64;
use tldl::special::{hyp2f1, hyp2f1_derivative, lngamma, HypParams};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn main() {
    let params = HypParams::new(c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)).expect("valid parameters");
    let f = hyp2f1(&params, c(0.5, 0.0)).expect("converges");
    println!("F(1,1;2;1/2)        = {:.15}  (2 ln 2 = {:.15})", f.re, 2.0 * 2.0f64.ln());

    println!();
    println!("values across the plane for F(1/2 + i, 2 - i/3; 5/2; z):");
    let p = HypParams::new(c(0.5, 1.0), c(2.0, -1.0 / 3.0), c(2.5, 0.0)).expect("valid");
    for &z in &[
        c(0.25, 0.0),
        c(-3.0, 0.5),
        c(0.93, 0.0),
        c(0.4, 1.2),
        c(2.0, 0.7),
    ] {
        let f = hyp2f1(&p, z).expect("evaluates");
        println!("  z = {:>5.2}{:+.2}i  ->  {:+.12}{:+.12}i", z.re, z.im, f.re, f.im);
    }

    println!();
    println!("differential-equation residual z(1-z)F'' + (c-(a+b+1)z)F' - abF at z = 0.3 + 0.4i:");
    let z = c(0.3, 0.4);
    let f = hyp2f1(&p, z).expect("value");
    let df = hyp2f1_derivative(&p, z).expect("derivative");
    let h = 1e-5;
    let ddf = (hyp2f1_derivative(&p, z + c(h, 0.0)).unwrap()
        - hyp2f1_derivative(&p, z - c(h, 0.0)).unwrap())
        / c(2.0 * h, 0.0);
    let residual = z * (c(1.0, 0.0) - z) * ddf
        + (p.gamma - (p.alpha + p.beta + c(1.0, 0.0)) * z) * df
        - p.alpha * p.beta * f;
    println!("  |residual| = {:.3e} (second derivative by finite difference)", residual.norm());

    println!();
    println!("log-gamma obeys ln G(z+1) = ln G(z) + ln z:");
    for &z in &[c(0.7, 3.0), c(4.2, -1.5), c(12.0, 20.0)] {
        let lhs = lngamma(z + c(1.0, 0.0)).expect("value");
        let rhs = lngamma(z).expect("value") + z.ln();
        println!(
            "  z = {:>5.1}{:+.1}i  recurrence defect {:.3e}",
            z.re,
            z.im,
            (lhs - rhs).norm()
        );
    }
}
