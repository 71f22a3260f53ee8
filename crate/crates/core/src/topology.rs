//! Gap morphology, the ρ-root invariant, the tunneling indicator and the
//! Legendrian invariants of fronts (winding, Maslov, writhe, tb, linking).

use crate::curves::{
    self, front_from_series, mutual_intersections, scan_band, swallow_tails, wrap_angle, Crossing, FrontCurve,
    RootKind,
};
use crate::error::{Error, Result};
use crate::hamiltonian::BarrierSpec;
use crate::sweep::{BandSource, SpectralSweep};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};

/// Default half-width of the classification window, radians.
pub const DEFAULT_WINDOW: f64 = 0.1;
/// Relative (to ‖H‖) gap below which the gap counts as an exact crossing.
pub const CROSSING_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Morphology {
    Mild,
    Steep,
    Supersteep,
    ExactCrossing,
}

impl Morphology {
    pub fn as_str(&self) -> &'static str {
        match self {
            Morphology::Mild => "mild",
            Morphology::Steep => "steep",
            Morphology::Supersteep => "supersteep",
            Morphology::ExactCrossing => "exact-crossing",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Tunneling {
    pub flag: bool,
    pub ground_max: f64,
    pub ground_max_theta: f64,
    /// Energy at which the ground path enters the barrier interval (weight ℓ).
    pub barrier_bottom: f64,
    /// Plateau top u + h.
    pub barrier_top: f64,
    pub energy_condition: bool,
    /// ρ roots of the first excited band near the forward-path gap minimum.
    pub rho_roots_near_gap: Vec<f64>,
    pub rho_condition: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapReport {
    pub theta_star: f64,
    pub min_gap: f64,
    pub morphology: Morphology,
    /// Mild, but a swallow tail or a lone inflection of the excited band sits near θ*.
    pub transitional: bool,
    /// The gap is constant along the path.
    pub constant_gap: bool,
    pub window: f64,
    /// Inflections of the ground and first excited band inside the window.
    pub ground_inflections: Vec<f64>,
    pub excited_inflections: Vec<f64>,
    /// Sign-change roots of ρ for the ground ("1") and first excited ("2") band at θ*.
    pub rho_roots: BTreeMap<String, usize>,
    /// Swallow tails of the excited band near θ*.
    pub nearby_swallow_tails: usize,
    pub exact_crossings: Vec<f64>,
    pub tunneling: Option<Tunneling>,
}

fn in_window(sweep: &SpectralSweep, t: f64, center: f64, half: f64) -> bool {
    if sweep.grid.periodic {
        wrap_angle(t - center).abs() <= half
    } else {
        (t - center).abs() <= half
    }
}

/// Tracked band occupying sorted level `level` at sample j, or the sorted level itself.
fn source_at(sweep: &SpectralSweep, j: usize, level: usize) -> BandSource {
    (0..sweep.n_bands())
        .find(|&k| sweep.level_index[k][j] == level)
        .map(BandSource::Tracked)
        .unwrap_or(BandSource::Level(level))
}

/// Number of sign-change roots of ρ for tracked band k over the sweep.
pub fn rho_root_invariant(sweep: &SpectralSweep, k: usize) -> Result<usize> {
    if k >= sweep.n_bands() {
        return Err(Error::InvalidArgument(format!("band {} not tracked", k + 1)));
    }
    Ok(scan_band(sweep, BandSource::Tracked(k), RootKind::Rho).roots.len())
}

pub fn classify(sweep: &SpectralSweep, window: f64) -> Result<GapReport> {
    let g = sweep.gap()?;
    classify_at(sweep, g.argmin_index, window)
}

/// Classifies the local gap minimum found within `search` of `guess`.
pub fn classify_near(sweep: &SpectralSweep, guess: f64, search: f64, window: f64) -> Result<GapReport> {
    let g = sweep.gap()?;
    let j = (0..sweep.len())
        .filter(|&j| in_window(sweep, sweep.theta(j), guess, search))
        .min_by(|&a, &b| g.values[a].total_cmp(&g.values[b]))
        .ok_or_else(|| Error::InvalidArgument(format!("no samples within {search} of {guess}")))?;
    classify_at(sweep, j, window)
}

fn classify_at(sweep: &SpectralSweep, j_star: usize, window: f64) -> Result<GapReport> {
    if sweep.n_bands() < 2 {
        return Err(Error::InvalidArgument("classification needs two tracked bands".into()));
    }
    if !(window > 2.0 * sweep.grid.step) {
        return Err(Error::InvalidArgument(format!("window {window} must exceed two grid steps")));
    }
    let g = sweep.gap()?;
    let (theta_star, min_gap) = if j_star == g.argmin_index {
        (g.argmin, g.min)
    } else {
        (sweep.theta(j_star), g.values[j_star])
    };
    let scale = sweep.scale().max(f64::MIN_POSITIVE);
    let gmax = g.values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let gmin = g.values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let constant_gap = gmax - gmin <= 1e-9 * scale.max(1.0);

    let ground = source_at(sweep, j_star, 0);
    let excited = source_at(sweep, j_star, 1);
    let near = |ts: &[f64]| -> Vec<f64> {
        ts.iter().copied().filter(|&t| in_window(sweep, t, theta_star, window)).collect()
    };
    let ground_all = curves::inflections(sweep, ground)?;
    let excited_all = curves::inflections(sweep, excited)?;
    let ground_thetas: Vec<f64> = ground_all.roots.iter().map(|r| r.theta).collect();
    let excited_thetas: Vec<f64> = excited_all.roots.iter().map(|r| r.theta).collect();
    let ground_inflections = near(&ground_thetas);
    let excited_inflections = near(&excited_thetas);

    let exact = sweep.exact_crossings(CROSSING_TOL * scale)?;
    let morphology = if min_gap < CROSSING_TOL * scale {
        Morphology::ExactCrossing
    } else if excited_inflections.len() >= 2 && ground_inflections.len() >= 2 {
        Morphology::Supersteep
    } else if excited_inflections.len() >= 2 {
        Morphology::Steep
    } else {
        Morphology::Mild
    };

    let scan = curves::cusps(sweep, excited, curves::default_root_tol(sweep))?;
    let excited_front = front_from_series("excited", &sweep.series(excited), &scan);
    let tails = swallow_tails(&excited_front, None);
    let nearby_swallow_tails = tails
        .iter()
        .filter(|t| {
            t.spans(theta_star)
                || in_window(sweep, t.cusp_thetas.0, theta_star, window)
                || in_window(sweep, t.cusp_thetas.1, theta_star, window)
        })
        .count();
    let transitional = morphology == Morphology::Mild
        && !constant_gap
        && (nearby_swallow_tails > 0
            || excited_inflections.len() == 1
            || excited_thetas.iter().filter(|&&t| in_window(sweep, t, theta_star, 2.0 * window)).count() >= 2);

    let mut rho_roots = BTreeMap::new();
    for (label, src) in [("1", ground), ("2", excited)] {
        rho_roots.insert(label.to_string(), scan_band(sweep, src, RootKind::Rho).roots.len());
    }

    let tunneling = match sweep.pair.barrier() {
        Some(spec) if !sweep.grid.periodic || sweep.grid.end >= FRAC_PI_2 => {
            Some(tunneling_indicator(sweep, &spec, window)?)
        }
        _ => None,
    };

    Ok(GapReport {
        theta_star: if sweep.grid.periodic { theta_star.rem_euclid(TAU) } else { theta_star },
        min_gap,
        morphology,
        transitional,
        constant_gap,
        window,
        ground_inflections,
        excited_inflections,
        rho_roots,
        nearby_swallow_tails,
        exact_crossings: exact.points,
        tunneling,
    })
}

/// Tunneling through a Hamming-weight barrier along the forward path θ ∈ [0, π/2].
pub fn tunneling_indicator(sweep: &SpectralSweep, spec: &BarrierSpec, window: f64) -> Result<Tunneling> {
    if sweep.pair.barrier().is_none() {
        return Err(Error::InvalidArgument("tunneling needs a Hamming-weight-plus-barrier instance".into()));
    }
    spec.validate()?;
    let fwd: Vec<usize> = (0..sweep.len()).filter(|&j| sweep.theta(j) <= FRAC_PI_2 + 1e-12).collect();
    if fwd.len() < 3 || sweep.dim < 2 {
        return Err(Error::InvalidArgument("the sweep does not cover the forward path".into()));
    }
    let (jmax, ground_max) = fwd
        .iter()
        .map(|&j| (j, sweep.levels[j][0]))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let barrier_bottom = spec.l as f64;
    let barrier_top = spec.plateau_top();
    let energy_condition = spec.h > 0.0 && barrier_bottom < ground_max && ground_max < barrier_top;

    let j_star = *fwd
        .iter()
        .min_by(|&&a, &&b| {
            let ga = sweep.levels[a][1] - sweep.levels[a][0];
            let gb = sweep.levels[b][1] - sweep.levels[b][0];
            ga.total_cmp(&gb)
        })
        .unwrap();
    let theta_star = sweep.theta(j_star);
    let excited = source_at(sweep, j_star, 1);
    let scan = curves::cusps(sweep, excited, curves::default_root_tol(sweep))?;
    let roots: Vec<f64> = scan.roots.iter().map(|r| r.theta).filter(|&t| t <= FRAC_PI_2 + 1e-12).collect();
    let mut near: Vec<f64> = roots.iter().copied().filter(|&t| (t - theta_star).abs() <= window).collect();
    // A cusp pair straddling θ* belongs to the gap even if its cusps sit outside the window.
    if let Some(i) = roots.windows(2).position(|w| w[0] <= theta_star && theta_star <= w[1]) {
        for t in [roots[i], roots[i + 1]] {
            if !near.contains(&t) {
                near.push(t);
            }
        }
    }
    near.sort_by(f64::total_cmp);
    let rho_condition = near.len() >= 2;
    Ok(Tunneling {
        flag: energy_condition && rho_condition,
        ground_max,
        ground_max_theta: sweep.theta(jmax),
        barrier_bottom,
        barrier_top,
        energy_condition,
        rho_roots_near_gap: near,
        rho_condition,
    })
}

/// (1/2π)∮dθ of the co-orientation along the traversal.
pub fn winding_index(c: &FrontCurve) -> Result<i32> {
    if !c.closed {
        return Err(Error::OpenCurve(c.label.clone()));
    }
    let m = c.len();
    let total: f64 = (0..m).map(|j| wrap_angle(c.samples[(j + 1) % m].theta - c.samples[j].theta)).sum();
    Ok((total / TAU).round() as i32)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CuspSign {
    pub theta: f64,
    pub sign: i8,
    pub low_confidence: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaslovReport {
    pub index: i32,
    pub plus: usize,
    pub minus: usize,
    pub signs: Vec<CuspSign>,
    /// Consecutive cusps carry opposite signs.
    pub alternating: bool,
    pub low_confidence: usize,
}

/// Signs each cusp by whether the outgoing branch enters the co-orientation half-plane.
pub fn maslov(c: &FrontCurve) -> MaslovReport {
    let m = c.len();
    let nc = c.cusps.len();
    let scale = c.samples.iter().fold(0.0f64, |a, s| a.max(s.x.abs()).max(s.y.abs())).max(f64::MIN_POSITIVE);
    let mut signs = Vec::with_capacity(nc);
    const REACH: usize = 2;
    for (i, cu) in c.cusps.iter().enumerate() {
        let base = cu.param.floor() as isize;
        let before = base - REACH as isize;
        let after = base + 1 + REACH as isize;
        let idx = |k: isize| -> Option<usize> {
            if c.closed {
                Some(k.rem_euclid(m as isize) as usize)
            } else if k >= 0 && (k as usize) < m {
                Some(k as usize)
            } else {
                None
            }
        };
        let crowded = c.cusps.iter().enumerate().any(|(o, other)| {
            if o == i {
                return false;
            }
            let d = (other.param - cu.param).abs();
            let d = if c.closed { d.min(m as f64 - d) } else { d };
            d <= (REACH + 1) as f64
        });
        let (sign, low) = match (idx(before), idx(after)) {
            (Some(a), Some(b)) => {
                let (pa, pb) = (c.samples[a], c.samples[b]);
                let v = (pb.x - pa.x) * cu.theta.cos() + (pb.y - pa.y) * cu.theta.sin();
                let s = if v > 0.0 { 1 } else { -1 };
                (s, crowded || v.abs() <= 1e-13 * scale)
            }
            _ => (0, true),
        };
        signs.push(CuspSign { theta: cu.theta, sign: sign as i8, low_confidence: low });
    }
    let plus = signs.iter().filter(|s| s.sign > 0).count();
    let minus = signs.iter().filter(|s| s.sign < 0).count();
    let pairs = if c.closed { nc } else { nc.saturating_sub(1) };
    let alternating = nc < 2 || (0..pairs).all(|i| signs[i].sign != signs[(i + 1) % nc].sign);
    MaslovReport {
        index: plus as i32 - minus as i32,
        plus,
        minus,
        low_confidence: signs.iter().filter(|s| s.low_confidence).count(),
        signs,
        alternating,
    }
}

/// Crossing sign with the over-strand given by the larger θ lift (minimal angular
/// distance across the cut). None when the lifts coincide (a tangency in ℂ×S¹).
pub fn crossing_sign(x: &Crossing) -> Option<i8> {
    let d = wrap_angle(x.theta_b - x.theta_a);
    if d.abs() < 1e-12 {
        return None;
    }
    let (over, under) = if d > 0.0 { (x.dir_b, x.dir_a) } else { (x.dir_a, x.dir_b) };
    let det = over[0] * under[1] - over[1] * under[0];
    if det > 0.0 {
        Some(1)
    } else if det < 0.0 {
        Some(-1)
    } else {
        None
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WritheReport {
    pub writhe: i32,
    pub positive: usize,
    pub negative: usize,
    /// Near-tangential or unsigned crossings; they are left out of the sum.
    pub low_confidence: usize,
}

pub fn writhe(c: &FrontCurve) -> WritheReport {
    let mut r = WritheReport { writhe: 0, positive: 0, negative: 0, low_confidence: 0 };
    for x in &c.self_intersections {
        match crossing_sign(x) {
            Some(s) if !x.low_confidence => {
                r.writhe += s as i32;
                if s > 0 {
                    r.positive += 1;
                } else {
                    r.negative += 1;
                }
            }
            _ => r.low_confidence += 1,
        }
    }
    r
}

/// tb = writhe − |cusps|/2
pub fn tb(writhe: i32, cusps: usize) -> f64 {
    writhe as f64 - cusps as f64 / 2.0
}

/// Half the signed count of crossings between two closed fronts.
pub fn linking(a: &FrontCurve, b: &FrontCurve) -> Result<f64> {
    for c in [a, b] {
        if !c.closed {
            return Err(Error::OpenCurve(c.label.clone()));
        }
    }
    let mut sum = 0i32;
    for x in mutual_intersections(a, b) {
        match crossing_sign(&x) {
            Some(s) if !x.low_confidence => sum += s as i32,
            _ => {
                return Err(Error::Degenerate(format!(
                    "{} and {} touch tangentially near ({:.6}, {:.6})",
                    a.label, b.label, x.point[0], x.point[1]
                )))
            }
        }
    }
    Ok(sum as f64 / 2.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveInvariants {
    pub label: String,
    pub winding: i32,
    pub maslov: i32,
    pub cusps: usize,
    pub alternating: bool,
    pub writhe: i32,
    pub tb: f64,
    pub crossings: usize,
    pub low_confidence: usize,
}

pub fn invariants(c: &FrontCurve) -> Result<CurveInvariants> {
    let winding = winding_index(c)?;
    let m = maslov(c);
    let w = writhe(c);
    Ok(CurveInvariants {
        label: c.label.clone(),
        winding,
        maslov: m.index,
        cusps: c.cusps.len(),
        alternating: m.alternating,
        writhe: w.writhe,
        tb: tb(w.writhe, c.cusps.len()),
        crossings: c.self_intersections.len(),
        low_confidence: m.low_confidence + w.low_confidence,
    })
}

/// Legendrian isotopy test: equal Thurston–Bennequin numbers.
pub fn isotopy_equal(a: &CurveInvariants, b: &CurveInvariants) -> bool {
    (a.tb - b.tb).abs() < 1e-9
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TopologyReport {
    pub curves: Vec<CurveInvariants>,
    /// (k, l, lk); lk is None when the fronts touch tangentially.
    pub linking: Vec<(usize, usize, Option<f64>)>,
}

impl TopologyReport {
    pub fn from_fronts(fronts: &[FrontCurve]) -> Result<Self> {
        let mut r = TopologyReport::default();
        for f in fronts.iter().filter(|f| f.closed) {
            r.curves.push(invariants(f)?);
        }
        let closed: Vec<&FrontCurve> = fronts.iter().filter(|f| f.closed).collect();
        for i in 0..closed.len() {
            for j in i + 1..closed.len() {
                let lk = match linking(closed[i], closed[j]) {
                    Ok(v) => Some(v),
                    Err(Error::Degenerate(_)) => None,
                    Err(e) => return Err(e),
                };
                r.linking.push((i, j, lk));
            }
        }
        Ok(r)
    }

    /// Curve-by-curve tb comparison.
    pub fn isotopic(&self, other: &TopologyReport) -> Result<bool> {
        if self.curves.is_empty() || other.curves.is_empty() {
            return Err(Error::InvalidArgument("report has no invariants".into()));
        }
        if self.curves.len() != other.curves.len() {
            return Ok(false);
        }
        Ok(self.curves.iter().zip(&other.curves).all(|(a, b)| isotopy_equal(a, b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{front_from_support, FrontCurve, FrontSample};

    fn circle(r: f64, cx: f64, cy: f64, m: usize) -> FrontCurve {
        let s = (0..m)
            .map(|j| {
                let t = (j as f64 + 0.5) * TAU / m as f64;
                FrontSample { theta: t, x: cx + r * t.cos(), y: cy + r * t.sin(), rho: r }
            })
            .collect();
        FrontCurve::from_samples("circle", s, true)
    }

    #[test]
    fn circle_invariants() {
        let c = circle(1.0, 0.0, 0.0, 400);
        let inv = invariants(&c).unwrap();
        assert_eq!((inv.winding, inv.maslov, inv.writhe, inv.cusps), (1, 0, 0, 0));
        assert_eq!(inv.tb, 0.0);
        assert_eq!(winding_index(&c.reversed()).unwrap(), -1);
    }

    #[test]
    fn synthetic_band_cusps_alternate() {
        let c = front_from_support("s", 4000, |t| {
            (1.0 - 0.55 * (2.0 * t).cos(), 1.1 * (2.0 * t).sin(), 2.2 * (2.0 * t).cos())
        });
        let m = maslov(&c);
        assert_eq!(m.index, 0);
        assert!(m.alternating);
        assert_eq!(m.low_confidence, 0);
        // Signs follow −sign(ρ′) at each cusp.
        for s in &m.signs {
            let drho = -3.3 * (2.0 * s.theta).sin();
            assert_eq!(s.sign as f64, -drho.signum());
        }
    }

    #[test]
    fn crossing_sign_wraps_across_the_cut() {
        let x = Crossing {
            theta_a: 6.2,
            theta_b: 0.1,
            param_a: 0.0,
            param_b: 1.0,
            point: [0.0, 0.0],
            dir_a: [1.0, 1.0],
            dir_b: [1.0, -1.0],
            angle: 1.0,
            low_confidence: false,
        };
        // b is over (0.1 sits just above 6.2 across the cut); det((1,−1),(1,1)) = 2.
        assert_eq!(crossing_sign(&x), Some(1));
        let y = Crossing { theta_a: 0.1, theta_b: 6.2, dir_a: [1.0, -1.0], dir_b: [1.0, 1.0], ..x };
        assert_eq!(crossing_sign(&y), Some(1));
    }

    #[test]
    fn linking_of_circles() {
        let a = circle(1.0, 0.0, 0.0, 800);
        let b = circle(1.0, 1.0, 0.0, 800);
        assert_eq!(linking(&a, &b).unwrap().abs(), 1.0);
        let c = circle(3.0, 0.0, 0.0, 800);
        assert_eq!(linking(&a, &c).unwrap(), 0.0);
    }
}
