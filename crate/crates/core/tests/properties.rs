use gapscope::curves::{self, FrontCurve};
use gapscope::fixtures;
use gapscope::hamiltonian::*;
use gapscope::io::ProblemFile;
use gapscope::linalg::{eigh, ComplexMatrix, HermitianMatrix, C64};
use gapscope::sweep::*;
use gapscope::topology::CROSSING_TOL;
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn hermitian_from(n: usize, raw: &[f64]) -> HermitianMatrix {
    let m = ComplexMatrix::from_fn(n, |i, j| C64::new(raw[2 * (i * n + j)], raw[2 * (i * n + j) + 1]));
    HermitianMatrix::symmetrized(&m)
}

fn arb_hermitian() -> impl Strategy<Value = HermitianMatrix> {
    (1usize..=10).prop_flat_map(|n| prop::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |raw| hermitian_from(n, &raw)))
}

fn band_fronts(sw: &SpectralSweep) -> Vec<FrontCurve> {
    (0..sw.n_bands()).map(|k| curves::front(sw, k).unwrap()).collect()
}

/// Largest |ρ_fd − ρ| / max|ρ| over every band, skipping flagged samples.
fn fd_error(pair: &HamiltonianPair, step: f64) -> f64 {
    let sw = sweep(pair, &ThetaGrid::full_circle(step).unwrap(), &SweepOptions::with_bands(pair.dim())).unwrap();
    let h = sw.grid.step;
    let m = sw.len();
    let mut worst = 0.0f64;
    for k in 0..sw.n_bands() {
        let s = sw.band(k);
        if !s.closed || s.wrap_ambiguous {
            continue;
        }
        let den = s.rho.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        for j in 0..m {
            let (a, b) = ((j + m - 1) % m, (j + 1) % m);
            if s.degenerate[a] || s.degenerate[j] || s.degenerate[b] || s.ambiguous_step[j] || s.ambiguous_step[b] {
                continue;
            }
            let fd = s.lambda[j] + (s.lambda[a] - 2.0 * s.lambda[j] + s.lambda[b]) / (h * h);
            worst = worst.max((fd - s.rho[j]).abs() / den);
        }
    }
    worst
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn eigh_residual_orthonormal_and_phase(a in arb_hermitian()) {
        let n = a.dim();
        let e = eigh(&a).unwrap();
        let scale = e.spectral_norm().max(1.0);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        for k in 0..n {
            let v = e.vector(k);
            let av = a.matrix().matvec(&v);
            let r = av.iter().zip(&v).map(|(x, y)| (x - y * e.values[k]).norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(r <= 1e-10 * n as f64 * scale, "residual {r}");
            for l in 0..n {
                let w = e.vector(l);
                let dot: C64 = v.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                let want = if k == l { 1.0 } else { 0.0 };
                prop_assert!((dot - want).norm() < 1e-10);
            }
            let big = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let pivot = v.iter().find(|z| z.norm() >= big * (1.0 - 1e-9)).unwrap();
            prop_assert!(pivot.re > 0.0 && pivot.im.abs() <= 1e-12);
        }
    }

    #[test]
    fn symmetrized_is_hermitian(n in 1usize..8, raw in prop::collection::vec(-1.0f64..1.0, 128)) {
        let h = hermitian_from(n, &raw);
        prop_assert_eq!(h.matrix().hermitian_defect(), 0.0);
        prop_assert!(HermitianMatrix::new(h.matrix().clone()).is_ok());
        if n > 1 {
            let mut bad = h.matrix().clone();
            bad[(0, 1)] += C64::new(0.5, 0.0);
            prop_assert!(HermitianMatrix::new(bad).is_err());
        }
    }

    #[test]
    fn spectrum_is_periodic_and_odd(seed in 0u64..1000, n in 2usize..8, t in 0.0f64..TAU) {
        let pair = random_pair(n, seed).unwrap();
        let a = eigh(&path_hamiltonian(&pair, t)).unwrap().values;
        let b = eigh(&path_hamiltonian(&pair, t + TAU)).unwrap().values;
        let c = eigh(&path_hamiltonian(&pair, t + PI)).unwrap().values;
        for k in 0..n {
            prop_assert!((a[k] - b[k]).abs() < 1e-12 * (1.0 + a[k].abs()) * 10.0);
            // H(θ+π) = −H(θ)
            prop_assert!((a[k] + c[n - 1 - k]).abs() < 1e-11);
        }
    }

    #[test]
    fn barrier_encodings_agree(n in 1usize..=7, l in 0usize..=7, w in 0usize..=7, h in 0.0f64..12.0) {
        let l = l.min(n);
        let u = (l + w).min(n);
        let spec = BarrierSpec::new(n, l, u, h).unwrap();
        let s = barrier_sign(&spec).unwrap();
        let g = barrier_lagrange(&spec, LagrangeMode::FullNodes).unwrap();
        let d = (s.matrix() - g.matrix.matrix()).max_abs();
        prop_assert!(d < 1e-9 * (1.0 + h), "sign vs Lagrange differ by {d}");
        for x in 0..1usize << n {
            prop_assert!((s.matrix()[(x, x)].re - spec.profile(x.count_ones() as usize)).abs() < 1e-9 * (1.0 + h));
        }
    }

    #[test]
    fn problem_file_round_trip(seed in 0u64..u64::MAX, n in 1usize..6) {
        let pair = random_pair(n, seed).unwrap();
        let text = serde_json::to_string(&ProblemFile::from_pair(&pair)).unwrap();
        let back: ProblemFile = serde_json::from_str(&text).unwrap();
        let back = back.into_pair().unwrap();
        prop_assert_eq!(back.h0, pair.h0);
        prop_assert_eq!(back.h1, pair.h1);
        prop_assert_eq!(back.spec, pair.spec);
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn front_support_identity_and_trace(seed in 0u64..10_000, n in 2usize..=6) {
        let pair = random_pair(n, seed).unwrap();
        let sw = sweep(&pair, &ThetaGrid::full_circle(0.005).unwrap(), &SweepOptions::with_bands(n)).unwrap();
        let scale = sw.scale();
        for f in band_fronts(&sw) {
            let k = match f.source { Some(BandSource::Tracked(k)) => k, other => panic!("unexpected source {other:?}") };
            for (j, s) in f.samples.iter().enumerate() {
                let (c, si) = (s.theta.cos(), s.theta.sin());
                prop_assert!((s.x * c + s.y * si - sw.bands[k][j]).abs() <= 1e-8 * scale);
                prop_assert!((-s.x * si + s.y * c - sw.dlambda[k][j]).abs() <= 1e-8 * scale);
            }
        }
        // Σρ_k = tr(H + H″) = 0 and Σλ_k = tr H(θ)
        let (t0, t1) = (pair.h0.matrix().trace().re, pair.h1.matrix().trace().re);
        for j in 0..sw.len() {
            let t = sw.theta(j);
            let rs: f64 = sw.level_rho[j].iter().sum();
            let ls: f64 = sw.levels[j].iter().sum();
            prop_assert!(rs.abs() <= 1e-8 * scale * n as f64, "Σρ = {rs}");
            prop_assert!((ls - t0 * t.cos() - t1 * t.sin()).abs() <= 1e-10 * scale * n as f64);
        }
    }

    #[test]
    fn fronts_tangent_and_arc_length(seed in 0u64..10_000, n in 2usize..=5) {
        let pair = random_pair(n, seed).unwrap();
        let sw = sweep(&pair, &ThetaGrid::full_circle(0.002).unwrap(), &SweepOptions::with_bands(n)).unwrap();
        let h = sw.grid.step;
        for f in band_fronts(&sw) {
            let s = &f.samples;
            let m = s.len();
            let rmax = s.iter().fold(0.0f64, |a, x| a.max(x.rho.abs()));
            let mut len = 0.0;
            let mut integral = 0.0;
            for j in 0..m {
                let (p, q) = (&s[(j + m - 1) % m], &s[(j + 1) % m]);
                let chord = [q.x - p.x, q.y - p.y];
                let norm = chord[0].hypot(chord[1]);
                // away from cusps the chord is tangent to O(δθ)
                if s[j].rho.abs() > 0.05 * rmax && p.rho.signum() == q.rho.signum() {
                    let nc = chord[0] * s[j].theta.cos() + chord[1] * s[j].theta.sin();
                    prop_assert!(nc.abs() <= 10.0 * h * norm, "normal component {nc:.3e} of chord {norm:.3e}");
                }
                let nx = &s[(j + 1) % m];
                len += (nx.x - s[j].x).hypot(nx.y - s[j].y);
                integral += 0.5 * (s[j].rho.abs() + nx.rho.abs()) * h;
            }
            prop_assert!((len - integral).abs() <= 1e-3 * integral.max(1e-12), "length {len} vs ∫|ρ| {integral}");
        }
    }

    #[test]
    fn cusp_parity_and_convex_boundary(seed in 0u64..10_000, n in 2usize..=6) {
        let pair = random_pair(n, seed).unwrap();
        let sw = sweep(&pair, &ThetaGrid::full_circle(0.005).unwrap(), &SweepOptions::with_bands(n)).unwrap();
        for f in band_fronts(&sw) {
            if f.closed && f.excluded_roots.is_empty() {
                prop_assert_eq!(f.cusps.len() % 2, 0, "{} has {} cusps", f.label, f.cusps.len());
            }
        }
        let b = curves::boundary(&sw).unwrap();
        prop_assert!(b.max_rho <= 1e-8 * sw.scale(), "max ρ₁ = {}", b.max_rho);
    }

    #[test]
    fn every_front_lies_in_the_numerical_range(seed in 0u64..10_000, n in 2usize..=5) {
        let pair = random_pair(n, seed).unwrap();
        let sw = sweep(&pair, &ThetaGrid::full_circle(0.01).unwrap(), &SweepOptions::with_bands(n)).unwrap();
        let tol = 1e-8 * sw.scale();
        for f in band_fronts(&sw) {
            for s in &f.samples {
                for j in 0..sw.len() {
                    let t = sw.theta(j);
                    let proj = s.x * t.cos() + s.y * t.sin();
                    prop_assert!(proj - sw.levels[j][0] >= -tol);
                    prop_assert!(sw.levels[j][n - 1] - proj >= -tol);
                }
            }
        }
    }
}

#[test]
fn second_difference_converges_at_second_order() {
    for seed in 0..4u64 {
        let pair = random_pair(4, seed).unwrap();
        let coarse = fd_error(&pair, 0.004);
        let fine = fd_error(&pair, 0.002);
        let ratio = coarse / fine;
        assert!(ratio > 3.5 && ratio < 4.5, "seed {seed}: {coarse:.3e} → {fine:.3e}, ratio {ratio:.2}");
    }
}

#[test]
fn unfolding_crossings_are_exact() {
    let pair = unfolding_family(&UnfoldingSpec::with_eps(0.0)).unwrap();
    let sw = sweep(&pair, &ThetaGrid::full_circle(0.002).unwrap(), &SweepOptions::with_bands(pair.dim())).unwrap();
    let x = sw.exact_crossings(CROSSING_TOL * sw.scale()).unwrap();
    assert!(x.points.len() >= 2);
    for &t in &x.points {
        let v = eigh(&path_hamiltonian(&pair, t)).unwrap().values;
        assert!(v[1] - v[0] < 1e-7 * sw.scale(), "levels {:?} at {t}", &v[..2]);
    }
    for k in 0..2 {
        let r = sw.level(k).rho.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        assert!(r < 1e-8, "level {k}: max |ρ| {r:.3e}");
    }
}

#[test]
fn fixture_fronts_satisfy_their_support_functions() {
    for f in [fixtures::ellipse(2.0, 1.0, 2000), fixtures::synthetic_band(2000), fixtures::swallow_tailed_triangle(2000)] {
        let m = f.len();
        let h = TAU / m as f64;
        let len: f64 = (0..m).map(|j| {
            let (a, b) = (&f.samples[j], &f.samples[(j + 1) % m]);
            (b.x - a.x).hypot(b.y - a.y)
        }).sum();
        let integral: f64 = (0..m).map(|j| 0.5 * (f.samples[j].rho.abs() + f.samples[(j + 1) % m].rho.abs()) * h).sum();
        assert!((len - integral).abs() < 1e-3 * integral, "{}: {len} vs {integral}", f.label);
    }
}
