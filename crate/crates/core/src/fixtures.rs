//! Synthetic co-oriented fronts used as reference shapes.
//!
//! Most are generated from a support function p(θ): the front is
//! (p cosθ − p′ sinθ, p sinθ + p′ cosθ) with signed radius p + p″.

use crate::curves::{front_from_polyline, front_from_support, FrontCurve, FrontSample};
use std::f64::consts::{FRAC_PI_4, TAU};

pub const DEFAULT_SAMPLES: usize = 4000;

/// p = a + b·cos(kθ)
fn harmonic(label: &str, m: usize, a: f64, b: f64, k: f64) -> FrontCurve {
    front_from_support(label, m, move |t| {
        let c = (k * t).cos();
        let s = (k * t).sin();
        (a + b * c, -b * k * s, -b * k * k * c)
    })
}

pub fn circle(radius: f64, center: [f64; 2], m: usize) -> FrontCurve {
    let samples = (0..m)
        .map(|j| {
            let t = (j as f64 + 0.5) * TAU / m as f64;
            FrontSample { theta: t, x: center[0] + radius * t.cos(), y: center[1] + radius * t.sin(), rho: radius }
        })
        .collect();
    FrontCurve::from_samples("circle", samples, true)
}

/// Ellipse with semi-axes a (along x) and b, from p = √(a²cos²θ + b²sin²θ).
pub fn ellipse(a: f64, b: f64, m: usize) -> FrontCurve {
    front_from_support("ellipse", m, move |t| {
        let q = (a * t.cos()).powi(2) + (b * t.sin()).powi(2);
        let p = q.sqrt();
        let dq = (b * b - a * a) * (2.0 * t).sin();
        let ddq = 2.0 * (b * b - a * a) * (2.0 * t).cos();
        (p, dq / (2.0 * p), ddq / (2.0 * p) - dq * dq / (4.0 * p * q))
    })
}

/// Lemniscate of Gerono (cos t, sin t cos t): one transversal self-crossing.
pub fn figure_eight(m: usize) -> FrontCurve {
    let pts: Vec<[f64; 2]> = (0..m)
        .map(|j| {
            let t = (j as f64 + 0.25) * TAU / m as f64;
            [t.cos(), t.sin() * t.cos()]
        })
        .collect();
    front_from_polyline("figure-eight", &pts)
}

/// Band λ(θ) = 1 − 0.55cos2θ; ρ = 1 + 1.65cos2θ gives 4 cusps and 2 tails.
pub fn synthetic_band(m: usize) -> FrontCurve {
    harmonic("synthetic band", m, 1.0, -0.55, 2.0)
}

/// Square-like front with a swallow tail on each of its four sides.
pub fn swallow_tailed_quadrangle(m: usize) -> FrontCurve {
    harmonic("swallow-tailed quadrangle", m, 1.0, 0.1, 4.0)
}

/// Triangle-like front with a swallow tail on each of its three sides.
pub fn swallow_tailed_triangle(m: usize) -> FrontCurve {
    harmonic("swallow-tailed triangle", m, 1.0, 0.2, 3.0)
}

/// Four-cusped star p = cos4θ with its arms reaching out to ideal vertices,
/// traversed against θ.
pub fn ideal_hyperbolic_quadrangle(m: usize) -> FrontCurve {
    let mut c = harmonic("ideal hyperbolic quadrangle", m, 0.0, 1.0, 4.0).reversed();
    c.label = "ideal hyperbolic quadrangle".into();
    c
}

/// Two fronts that never meet: concentric circles.
pub fn disjoint_pair(m: usize) -> (FrontCurve, FrontCurve) {
    (circle(1.0, [0.0, 0.0], m), circle(2.0, [0.0, 0.0], m))
}

/// Two smooth fronts crossing twice.
pub fn double_crossing_pair(m: usize) -> (FrontCurve, FrontCurve) {
    (circle(1.0, [0.0, 0.0], m), circle(1.0, [1.0, 0.0], m))
}

/// Astroid-like front p = cos2θ and a small circle around one of its cusps,
/// crossing both cusp branches once.
pub fn cusp_and_circle(m: usize) -> (FrontCurve, FrontCurve) {
    let star = harmonic("four-cusp front", m, 0.0, 1.0, 2.0);
    let cusp = [2.0 * FRAC_PI_4.sin(), -2.0 * FRAC_PI_4.cos()];
    (star, circle(0.3, cusp, m))
}
