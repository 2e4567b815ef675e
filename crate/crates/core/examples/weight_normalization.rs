//! Derives the normalizing constant of h(t) = c0 / (t ln^p(2/t)) on (0, 1).
//!
//! With t = 2 exp(-ln2 e^u) the mass int_0^1 dt / (t ln^p(2/t)) becomes
//! (ln 2)^{1-p} int_0^inf e^{(1-p) u} du, a smooth integrand handled by a
//! composite Simpson rule. The result is compared with the closed form
//! (p - 1) (ln 2)^{p-1} used by `WeightFunction`.
//!
//! Run with `cargo run --example weight_normalization -- 1.1`.

use combdim::gaussian_elton::WeightFunction;

fn mass(p: f64, upper: f64, steps: usize) -> f64 {
    let l2 = std::f64::consts::LN_2;
    let f = |u: f64| l2.powf(1.0 - p) * ((1.0 - p) * u).exp();
    let h = upper / steps as f64;
    let mut s = f(0.0) + f(upper);
    for i in 1..steps {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn main() {
    let p: f64 = std::env::args().nth(1).map_or(1.1, |a| a.parse().expect("exponent"));
    let w = WeightFunction::new(p).expect("exponent must exceed 1");
    let upper = 40.0 / (p - 1.0);
    let m = mass(p, upper, 2_000_000);
    println!("p            = {p}");
    println!("quadrature   = {:.15}", 1.0 / m);
    println!("closed form  = {:.15}", w.c0);
    println!("difference   = {:.3e}", (1.0 / m - w.c0).abs());
}
