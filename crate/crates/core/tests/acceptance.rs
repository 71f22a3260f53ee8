//! Acceptance checks. Prints one PASS/FAIL line per criterion, with the
//! individual checks underneath, and exits non-zero if any criterion fails.

use gapscope::curves::{self, scan_band, FrontCurve, RootKind};
use gapscope::fixtures;
use gapscope::hamiltonian::*;
use gapscope::linalg::eigh;
use gapscope::sweep::*;
use gapscope::topology::{self, invariants, isotopy_equal, linking, maslov, rho_root_invariant, Morphology};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::time::Instant;

struct Criterion {
    id: usize,
    title: &'static str,
    checks: Vec<(String, bool, String)>,
}

impl Criterion {
    fn new(id: usize, title: &'static str) -> Self {
        Self { id, title, checks: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push((name.into(), pass, detail.into()));
    }

    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.1)
    }

    fn print(&self) {
        println!("criterion {}: {} - {}", self.id, if self.passed() { "PASS" } else { "FAIL" }, self.title);
        for (name, ok, detail) in &self.checks {
            println!("    [{}] {name}: {detail}", if *ok { "ok" } else { "FAIL" });
        }
    }
}

fn full(step: f64) -> ThetaGrid {
    ThetaGrid::full_circle(step).unwrap()
}

fn no_barrier(n: usize) -> HamiltonianPair {
    hamming_plus_barrier(&BarrierSpec::new(n, 1, 1.min(n), 0.0).unwrap(), 0.0, 0).unwrap()
}

fn barrier(l: usize, u: usize, h: f64, eps: f64) -> HamiltonianPair {
    hamming_plus_barrier(&BarrierSpec::new(5, l, u, h).unwrap(), eps, 7).unwrap()
}

fn fronts_of(sw: &SpectralSweep) -> Vec<FrontCurve> {
    (0..sw.n_bands()).map(|k| curves::front(sw, k).unwrap()).collect()
}

fn concentric_circles() -> Criterion {
    let mut c = Criterion::new(1, "concentric circles of the barrier-free n = 5 instance");
    let t0 = Instant::now();
    let pair = no_barrier(5);
    let sw = sweep(&pair, &full(0.001), &SweepOptions::with_bands(32)).unwrap();
    let fronts = fronts_of(&sw);
    let elapsed = t0.elapsed().as_secs_f64();

    let center = [2.5, 2.5];
    let mut worst_dev = 0.0f64;
    let mut radii: Vec<f64> = Vec::new();
    for f in &fronts {
        let d: Vec<f64> = f.samples.iter().map(|s| (s.x - center[0]).hypot(s.y - center[1])).collect();
        let r = d.iter().sum::<f64>() / d.len() as f64;
        let nearest = [0.5, 1.5, 2.5].iter().fold(f64::INFINITY, |a, &q| a.min((q - r).abs()));
        worst_dev = worst_dev.max(d.iter().fold(0.0f64, |a, &x| a.max((x - r).abs())).max(nearest));
        if !radii.iter().any(|&q| (q - r).abs() < 1e-6) {
            radii.push(r);
        }
    }
    radii.sort_by(f64::total_cmp);
    c.check(
        "fronts are circles about 2.5+2.5i",
        worst_dev < 1e-6 && radii.len() == 3,
        format!("max center-distance deviation {worst_dev:.3e} (< 1e-6), radii {radii:.6?}"),
    );

    let mut worst_band = 0.0f64;
    for j in 0..sw.len() {
        let t = sw.theta(j);
        let mut expect: Vec<f64> = Vec::new();
        for k in 0..=5usize {
            let cval = 5.0 - 2.0 * k as f64;
            for _ in 0..binomial(5, k) {
                expect.push(0.5 * (5.0 * (t.cos() + t.sin()) + cval));
            }
        }
        expect.sort_by(f64::total_cmp);
        for (a, b) in sw.levels[j].iter().zip(&expect) {
            worst_band = worst_band.max((a - b).abs());
        }
    }
    c.check("bands equal ½(5(cosθ+sinθ)+c)", worst_band < 1e-8, format!("max error {worst_band:.3e} (< 1e-8)"));

    let g = sw.gap().unwrap();
    let gdev = g.values.iter().fold(0.0f64, |a, &v| a.max((v - 1.0).abs()));
    c.check("gap constant 1.0", gdev < 1e-9, format!("max |gap − 1| {gdev:.3e} (< 1e-9)"));
    c.check("runtime", elapsed < 30.0, format!("{elapsed:.2} s for sweep and 32 fronts at δθ = 0.001 (< 30 s)"));
    c
}

fn degeneracy() -> Criterion {
    let mut c = Criterion::new(2, "band multiplicities are binomial");
    for n in 1..=6usize {
        let pair = no_barrier(n);
        let t = 0.3f64;
        let e = eigh(&path_hamiltonian(&pair, t)).unwrap();
        let mut counts = vec![0u64; n + 1];
        let mut labelled = true;
        for &l in &e.values {
            let cval = 2.0 * l - n as f64 * (t.cos() + t.sin());
            let ci = cval.round();
            if (cval - ci).abs() > 1e-8 || (n as i64 + ci as i64) % 2 != 0 || ci.abs() > n as f64 {
                labelled = false;
                continue;
            }
            counts[((n as i64 + ci as i64) / 2) as usize] += 1;
        }
        let exact = (0..=n).all(|k| counts[k] == binomial(n, k));
        let total: u64 = counts.iter().sum();
        c.check(
            format!("n = {n}"),
            labelled && exact && total == 1u64 << n,
            format!("multiplicities {counts:?}, total {total} of {}", 1u64 << n),
        );
    }
    c
}

fn grover() -> Criterion {
    let mut c = Criterion::new(3, "Grover search, unperturbed and perturbed (N = 8)");
    let pair = grover_search(8, 1).unwrap();
    let t = 5.0 * PI / 4.0;
    let e = eigh(&path_hamiltonian(&pair, t)).unwrap();
    let err = (e.values[0] + SQRT_2).abs();
    c.check("λ₁(5π/4) = −√2", err < 1e-9, format!("λ₁ = {:.12}, error {err:.3e} (< 1e-9)", e.values[0]));
    let ab = 1.0 / 8f64.sqrt();
    for s in [1.0, -1.0] {
        let want = (1.0 + s * ab) * (-SQRT_2 / 2.0);
        let got = e.values.iter().fold(f64::INFINITY, |a, &v| a.min((v - want).abs()));
        c.check(format!("in-span eigenvalue (1{}⟨a|b⟩)(−√2/2)", if s > 0.0 { "+" } else { "−" }), got < 1e-9, format!("{want:.12}, nearest error {got:.3e} (< 1e-9)"));
    }
    let sw = sweep(&pair, &full(0.001), &SweepOptions::with_bands(4)).unwrap();
    let b = sw.level(0);
    let sharp = (0..sw.len())
        .filter(|&j| (sw.theta(j) - t).abs() <= 0.1)
        .map(|j| b.rho[j].abs())
        .fold(f64::INFINITY, f64::min);
    c.check("boundary sharpness near 5π/4", sharp < 1e-6, format!("min |ρ₁| = {sharp:.3e} (< 1e-6)"));

    let p = perturb(&pair, 1e-3, 0).unwrap();
    let sw = sweep(&p, &full(0.001), &SweepOptions::with_bands(4)).unwrap();
    let minrho = sw.level(0).rho.iter().fold(f64::INFINITY, |a, r| a.min(r.abs()));
    c.check("perturbed: min |ρ₁| > 0", minrho > 0.0, format!("min |ρ₁| = {minrho:.3e}"));
    let roots = rho_root_invariant(&sw, 1).unwrap();
    c.check("perturbed: ρ roots of band 2", roots >= 2, format!("{roots} (≥ 2)"));
    c
}

fn curvature_oracle() -> Criterion {
    let mut c = Criterion::new(4, "pseudo-inverse ρ against second differences (50 random N = 8 pairs)");
    let h = 0.001;
    let mut worst = 0.0f64;
    let mut bad_pairs = Vec::new();
    let mut tested = 0usize;
    for seed in 0..50u64 {
        let pair = random_pair(8, seed).unwrap();
        let sw = sweep(&pair, &full(h), &SweepOptions::with_bands(8)).unwrap();
        let step = sw.grid.step;
        let m = sw.len();
        let mut pair_worst = 0.0f64;
        for k in 0..8 {
            let s = sw.band(k);
            let idx = |j: isize| j.rem_euclid(m as isize) as usize;
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for j in 0..m {
                let (a, b) = (idx(j as isize - 1), idx(j as isize + 1));
                if !s.closed && (j == 0 || j == m - 1) {
                    continue;
                }
                let wrap_ok = !(j == 0 || j == m - 1) || !s.wrap_ambiguous;
                let flagged = s.degenerate[a] || s.degenerate[j] || s.degenerate[b] || s.ambiguous_step[j] || s.ambiguous_step[b];
                if flagged || !wrap_ok {
                    continue;
                }
                let fd = s.lambda[j] + (s.lambda[a] - 2.0 * s.lambda[j] + s.lambda[b]) / (step * step);
                num = num.max((fd - s.rho[j]).abs());
                den = den.max(s.rho[j].abs());
                tested += 1;
            }
            if den > 0.0 {
                pair_worst = pair_worst.max(num / den);
            }
        }
        worst = worst.max(pair_worst);
        if pair_worst >= 1e-4 {
            bad_pairs.push(seed);
        }
    }
    c.check(
        "relative sup-norm error per band < 1e-4",
        bad_pairs.is_empty(),
        format!("worst {worst:.3e}; {} of 50 pairs exceed 1e-4 {:?}; {tested} samples compared", bad_pairs.len(), bad_pairs),
    );
    c
}

fn unfolding() -> Criterion {
    let mut c = Criterion::new(5, "unfolding family at ε = 0 and ε = 0.1");
    let pair = unfolding_family(&UnfoldingSpec::with_eps(0.0)).unwrap();
    let sw = sweep(&pair, &full(0.001), &SweepOptions::with_bands(4)).unwrap();
    let x = sw.exact_crossings(topology::CROSSING_TOL * sw.scale()).unwrap();
    c.check("ε = 0: exact crossings", x.points.len() >= 2, format!("{} at {:.6?} (≥ 2)", x.points.len(), x.points));
    let r12 = [sw.level(0), sw.level(1)].iter().map(|s| s.rho.iter().fold(0.0f64, |a, r| a.max(r.abs()))).fold(0.0f64, f64::max);
    c.check("ε = 0: ρ₁ = ρ₂ = 0", r12 < 1e-8, format!("max |ρ| {r12:.3e} (< 1e-8)"));

    let pair = unfolding_family(&UnfoldingSpec::with_eps(0.1)).unwrap();
    let sw = sweep(&pair, &full(0.001), &SweepOptions::with_bands(4)).unwrap();
    let g = sw.gap().unwrap();
    c.check("ε = 0.1: min gap > 0", g.min > 0.0, format!("min gap {:.6e}", g.min));
    let (l1, l2) = (sw.level(0), sw.level(1));
    let (jw, sum) = l1.rho.iter().zip(&l2.rho).map(|(a, b)| (a + b).abs()).enumerate().fold((0, 0.0f64), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
    c.check("ε = 0.1: ρ̃₁ + ρ̃₂ = 0", sum < 1e-7, format!("max |ρ̃₁+ρ̃₂| = {sum:.3e} at θ = {:.4} (< 1e-7)", sw.theta(jw)));
    let roots = rho_root_invariant(&sw, 1).unwrap();
    c.check("ε = 0.1: roots of ρ̃₂", roots >= 2, format!("{roots} (≥ 2)"));
    c
}

fn barrier_series() -> Criterion {
    let mut c = Criterion::new(6, "barrier-series classification and tunneling (n = 5)");
    let fwd = ThetaGrid::forward_path(0.001).unwrap();
    let run = |l, u, h, eps| {
        let sw = sweep(&barrier(l, u, h, eps), &fwd, &SweepOptions::with_bands(4)).unwrap();
        topology::classify(&sw, topology::DEFAULT_WINDOW).unwrap()
    };
    for eps in [0.0, 0.05] {
        let r = run(1, 2, 0.0, eps);
        let ok = r.morphology == Morphology::Mild && (eps > 0.0 || r.constant_gap);
        c.check(format!("h = 0, ε = {eps}: mild/constant"), ok, format!("{} (constant gap: {})", r.morphology.as_str(), r.constant_gap));
        let r = run(1, 2, 0.95, eps);
        c.check(
            format!("h = 0.95, ε = {eps}: mild-to-steep boundary"),
            r.transitional,
            format!("{}, transitional {}, nearby tails {}", r.morphology.as_str(), r.transitional, r.nearby_swallow_tails),
        );
        let r = run(1, 2, 7.0, eps);
        c.check(
            format!("h = 7, ε = {eps}: steep"),
            r.morphology == Morphology::Steep,
            format!("{} with excited-band inflections {:.4?}", r.morphology.as_str(), r.excited_inflections),
        );
        let d = (r.theta_star - FRAC_PI_4).abs();
        c.check(format!("h = 7, ε = {eps}: |θ* − π/4| < 0.15"), d < 0.15, format!("θ* = {:.4}, |θ* − π/4| = {d:.4}", r.theta_star));
    }
    let r = run(3, 4, 10.0, 0.05);
    c.check(
        "ℓ = 3, u = 4, h = 10: mild, no nearby swallow tail",
        r.morphology == Morphology::Mild && r.nearby_swallow_tails == 0,
        format!("{}, {} nearby tails", r.morphology.as_str(), r.nearby_swallow_tails),
    );
    let t = r.tunneling.unwrap();
    c.check("ℓ = 3, u = 4, h = 10: no tunneling", !t.flag, format!("flag {}, ground max {:.4}", t.flag, t.ground_max));
    let t = run(1, 2, 10.0, 0.0).tunneling.unwrap();
    c.check(
        "ℓ = 1, u = 2, h = 10, ε = 0: tunneling",
        t.flag && t.ground_max > 2.0 && t.ground_max < 3.0,
        format!("flag {}, ground max {:.6} (in (2, 3)), ρ roots near gap {:.4?}", t.flag, t.ground_max, t.rho_roots_near_gap),
    );
    c
}

#[derive(Default)]
struct FrontTally {
    fronts: usize,
    failures: Vec<String>,
}

fn check_closed_fronts(sw: &SpectralSweep, name: &str, tally: &mut FrontTally) {
    let top = sw.level(0).rho.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if top > 1e-8 {
        tally.failures.push(format!("{name}: ρ₁ reaches {top:.3e}"));
    }
    for k in 0..sw.n_bands() {
        let f = curves::front(sw, k).unwrap();
        if !f.closed {
            continue;
        }
        tally.fronts += 1;
        let label = format!("{name} band {}", k + 1);
        let inv = invariants(&f).unwrap();
        let m = maslov(&f);
        if inv.winding != 1 {
            tally.failures.push(format!("{label}: winding {}", inv.winding));
        }
        if inv.maslov != 0 {
            tally.failures.push(format!("{label}: Maslov {}", inv.maslov));
        }
        if inv.cusps % 2 != 0 {
            tally.failures.push(format!("{label}: {} cusps", inv.cusps));
        }
        if !m.alternating {
            tally.failures.push(format!("{label}: cusp signs do not alternate"));
        }
        let infl = scan_band(sw, BandSource::Tracked(k), RootKind::SecondDerivative);
        let vanishing = infl.zero_arcs.iter().any(|&(a, b)| b - a >= sw.theta(sw.len() - 1) - sw.theta(0) - 1e-12);
        if infl.roots.len() < 2 && !vanishing {
            tally.failures.push(format!("{label}: {} inflections", infl.roots.len()));
        }
        let v = curves::vertices(&f);
        if f.cusps.is_empty() && f.excluded_roots.is_empty() && !v.constant_curvature && v.vertices.len() < 4 {
            tally.failures.push(format!("{label}: {} vertices", v.vertices.len()));
        }
    }
}

fn invariant_suite() -> Criterion {
    let mut c = Criterion::new(7, "Legendrian and curve invariants on every computed closed front");
    let grid = full(0.001);
    let mut fixed = FrontTally::default();
    let corpus: Vec<(&str, HamiltonianPair)> = vec![
        ("barrier-free n = 5", no_barrier(5)),
        ("barrier h = 0.95", barrier(1, 2, 0.95, 0.05)),
        ("barrier h = 7", barrier(1, 2, 7.0, 0.05)),
        ("barrier h = 10", barrier(1, 2, 10.0, 0.05)),
        ("high barrier", barrier(3, 4, 10.0, 0.05)),
        ("perturbed Grover", perturb(&grover_search(8, 1).unwrap(), 1e-3, 0).unwrap()),
        ("unfolding ε = 0.1", unfolding_family(&UnfoldingSpec::with_eps(0.1)).unwrap()),
    ];
    for (name, pair) in &corpus {
        let sw = sweep(pair, &grid, &SweepOptions::with_bands(4)).unwrap();
        check_closed_fronts(&sw, name, &mut fixed);
    }
    c.check(
        "named instances",
        fixed.failures.is_empty(),
        format!("{} closed fronts, failures: {:?}", fixed.fronts, fixed.failures),
    );

    let mut runner = TestRunner::new(Config { cases: 24, failure_persistence: None, ..Config::default() });
    let tally = std::cell::RefCell::new(FrontTally::default());
    let outcome = runner.run(&(3usize..=8, 0u64..10_000), |(n, seed)| {
        let sw = sweep(&random_pair(n, seed).unwrap(), &grid, &SweepOptions::with_bands(n)).unwrap();
        let mut t = tally.borrow_mut();
        let before = t.failures.len();
        check_closed_fronts(&sw, &format!("random N = {n}, seed {seed}"), &mut t);
        prop_assert_eq!(t.failures.len(), before);
        Ok(())
    });
    let t = tally.into_inner();
    c.check(
        "random pairs (property-based)",
        outcome.is_ok(),
        format!("{} closed fronts, failures: {:?}", t.fronts, t.failures),
    );
    c
}

fn table_fixtures() -> Criterion {
    let mut c = Criterion::new(8, "writhe and tb of the three canonical fronts");
    let m = fixtures::DEFAULT_SAMPLES;
    let cases = [
        (fixtures::swallow_tailed_quadrangle(m), (4, 0.0)),
        (fixtures::swallow_tailed_triangle(m), (-1, -4.0)),
        (fixtures::ideal_hyperbolic_quadrangle(m), (0, -4.0)),
    ];
    let mut inv = Vec::new();
    for (f, (w, tb)) in &cases {
        let i = invariants(f).unwrap();
        c.check(
            f.label.clone(),
            i.writhe == *w && i.tb == *tb,
            format!("writhe {} tb {} (cusps {}, crossings {}); expected ({w}, {tb})", i.writhe, i.tb, i.cusps, i.crossings),
        );
        inv.push(i);
    }
    let verdicts = [(0, 0, true), (0, 1, false), (1, 2, true)];
    for (a, b, want) in verdicts {
        let got = isotopy_equal(&inv[a], &inv[b]);
        c.check(
            format!("isotopy {} vs {}", inv[a].label, inv[b].label),
            got == want,
            format!("{got} (expected {want})"),
        );
    }
    c
}

fn linking_fixtures() -> Criterion {
    let mut c = Criterion::new(9, "linking numbers of fixture pairs");
    let m = fixtures::DEFAULT_SAMPLES;
    let (a, b) = fixtures::disjoint_pair(m);
    let lk = linking(&a, &b).unwrap();
    c.check("disjoint fronts", lk == 0.0, format!("lk = {lk}"));
    let (a, b) = fixtures::double_crossing_pair(m);
    let lk = linking(&a, &b).unwrap();
    c.check("two smooth fronts crossing twice", lk.abs() == 1.0, format!("lk = {lk}"));
    let (a, b) = fixtures::cusp_and_circle(m);
    let lk = linking(&a, &b).unwrap();
    c.check("smooth front across one cusp", lk == 0.0, format!("lk = {lk}"));
    c
}

fn main() {
    let runs: Vec<fn() -> Criterion> = vec![
        concentric_circles,
        degeneracy,
        grover,
        curvature_oracle,
        unfolding,
        barrier_series,
        invariant_suite,
        table_fixtures,
        linking_fixtures,
    ];
    let mut failed = Vec::new();
    for run in runs {
        let c = run();
        c.print();
        if !c.passed() {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
