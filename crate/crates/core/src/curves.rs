//! Critical-value curves (fronts) x = λcosθ − λ′sinθ, y = λsinθ + λ′cosθ and
//! their singular features: cusps (ρ = 0), inflections (λ″ = 0),
//! self-intersections, swallow tails and vertices.

use crate::error::{Error, Result};
use crate::sweep::{bisect, BandSeries, BandSource, SpectralSweep};
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Root {
    pub theta: f64,
    /// Last sample before the root.
    pub left: usize,
    /// First sample after the root (may wrap to 0).
    pub right: usize,
    /// The function goes from negative to positive.
    pub rising: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RootScan {
    pub roots: Vec<Root>,
    /// Sign changes across degenerate or ambiguously tracked samples.
    pub excluded: Vec<f64>,
    /// |f| ≤ tol without a sign change.
    pub tangential: Vec<f64>,
    /// Stretches where |f| ≤ tol over more than two samples.
    pub zero_arcs: Vec<(f64, f64)>,
}

/// Sign-change scan of sampled values. `blocked[j]` marks unusable samples,
/// `step_blocked[j]` an unusable step into sample j, and `wrap` (when the
/// samples are periodic) says whether the closing step is usable.
pub fn scan_roots(
    theta: &[f64],
    f: &[f64],
    blocked: &[bool],
    step_blocked: &[bool],
    wrap: Option<bool>,
    tol: f64,
) -> RootScan {
    let m = f.len();
    let mut out = RootScan::default();
    if m < 2 {
        return out;
    }
    let sign = |v: f64| if v > tol { 1 } else if v < -tol { -1 } else { 0 };
    let nz: Vec<usize> = (0..m).filter(|&j| sign(f[j]) != 0).collect();
    if nz.is_empty() {
        out.zero_arcs.push((theta[0], theta[m - 1]));
        return out;
    }
    let periodic = wrap.is_some();
    let wrap_ok = wrap.unwrap_or(false);
    let period_theta = |j: usize, base: usize| if j < base { theta[j] + TAU } else { theta[j] };

    let mut pairs: Vec<(usize, usize)> = nz.windows(2).map(|w| (w[0], w[1])).collect();
    if periodic {
        pairs.push((*nz.last().unwrap(), nz[0]));
    }
    for (p, q) in pairs {
        let wraps = q <= p;
        let between: Vec<usize> = if wraps { (p + 1..m).chain(0..q).collect() } else { (p + 1..q).collect() };
        let tq = if wraps { period_theta(q, p + 1) } else { theta[q] };
        if between.len() > 2 {
            let a = theta[between[0]];
            let b = theta[*between.last().unwrap()];
            out.zero_arcs.push((a, b));
            continue;
        }
        let sp = sign(f[p]);
        let sq = sign(f[q]);
        if sp == sq {
            if !between.is_empty() {
                out.tangential.push(theta[between[between.len() / 2]].rem_euclid(TAU));
            }
            continue;
        }
        let root_theta = if between.is_empty() {
            let t = f[p] / (f[p] - f[q]);
            theta[p] + t * (tq - theta[p])
        } else {
            theta[between[between.len() / 2]]
        };
        let mut bad = blocked[p] || blocked[q] || between.iter().any(|&i| blocked[i]);
        let steps: Vec<usize> = between.iter().copied().chain(std::iter::once(q)).collect();
        for &s in &steps {
            if s == 0 && wraps {
                bad |= !wrap_ok;
            } else {
                bad |= step_blocked[s];
            }
        }
        let root_theta = if periodic { root_theta.rem_euclid(TAU) } else { root_theta };
        if bad {
            out.excluded.push(root_theta);
        } else {
            out.roots.push(Root { theta: root_theta, left: p, right: q, rising: sp < 0 });
        }
    }
    out.roots.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootKind {
    /// ρ = λ + λ″ (cusps).
    Rho,
    /// λ″ = ρ − λ (inflections).
    SecondDerivative,
}

fn series_scan(series: &BandSeries, kind: RootKind, tol: f64) -> RootScan {
    let f = match kind {
        RootKind::Rho => series.rho.clone(),
        RootKind::SecondDerivative => series.second_derivative(),
    };
    let wrap = if series.periodic && series.closed { Some(!series.wrap_ambiguous) } else { None };
    scan_roots(&series.theta, &f, &series.degenerate, &series.ambiguous_step, wrap, tol)
}

/// Refines bracketed roots by bisection on freshly evaluated eigen-data.
fn refine(sweep: &SpectralSweep, source: BandSource, scan: &mut RootScan, kind: RootKind) -> Result<()> {
    let m = sweep.len();
    for r in scan.roots.iter_mut() {
        let adjacent = r.right == r.left + 1 || (r.left == m - 1 && r.right == 0);
        if !adjacent {
            continue;
        }
        let a = sweep.theta(r.left);
        let b = if r.right == 0 && r.left == m - 1 { sweep.theta(0) + TAU } else { sweep.theta(r.right) };
        let left = r.left;
        let f = |t: f64| -> Result<f64> {
            let (l, _, rho) = sweep.evaluate(source, left, t)?;
            Ok(match kind {
                RootKind::Rho => rho,
                RootKind::SecondDerivative => rho - l,
            })
        };
        let t = bisect(f, a, b, 1e-10)?;
        r.theta = if sweep.grid.periodic { t.rem_euclid(TAU) } else { t };
    }
    scan.roots.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    Ok(())
}

/// Default root tolerance, 1e-9·‖H‖.
pub fn default_root_tol(sweep: &SpectralSweep) -> f64 {
    1e-9 * sweep.scale().max(f64::MIN_POSITIVE)
}

/// Unrefined sign-change scan of ρ or λ″ for one band, enough for counting.
pub fn scan_band(sweep: &SpectralSweep, source: BandSource, kind: RootKind) -> RootScan {
    series_scan(&sweep.series(source), kind, default_root_tol(sweep))
}

/// Cusps of a band: roots of ρ, refined to |Δθ| < 1e-10.
pub fn cusps(sweep: &SpectralSweep, source: BandSource, root_tol: f64) -> Result<RootScan> {
    let series = sweep.series(source);
    let mut scan = series_scan(&series, RootKind::Rho, root_tol);
    refine(sweep, source, &mut scan, RootKind::Rho)?;
    Ok(scan)
}

/// Inflections of a band: roots of λ″.
pub fn inflections(sweep: &SpectralSweep, source: BandSource) -> Result<RootScan> {
    let series = sweep.series(source);
    let mut scan = series_scan(&series, RootKind::SecondDerivative, default_root_tol(sweep));
    refine(sweep, source, &mut scan, RootKind::SecondDerivative)?;
    Ok(scan)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrontSample {
    /// Co-orientation angle, unwrapped along the traversal.
    pub theta: f64,
    pub x: f64,
    pub y: f64,
    /// Signed radius: dγ/dθ = ρ·(−sinθ, cosθ).
    pub rho: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Cusp {
    pub theta: f64,
    /// Position along the traversal in segment units (segment index + fraction).
    pub param: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Crossing {
    /// Co-orientation lifts of the earlier and later strand, in [0, 2π).
    pub theta_a: f64,
    pub theta_b: f64,
    /// Positions along the traversal in segment units.
    pub param_a: f64,
    pub param_b: f64,
    pub point: [f64; 2],
    pub dir_a: [f64; 2],
    pub dir_b: [f64; 2],
    /// Acute angle between the strands.
    pub angle: f64,
    pub low_confidence: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrontCurve {
    pub label: String,
    #[serde(skip)]
    pub source: Option<BandSource>,
    pub samples: Vec<FrontSample>,
    pub closed: bool,
    pub cusps: Vec<Cusp>,
    /// Roots of ρ that fall on flagged samples (band switches), not counted as cusps.
    pub excluded_roots: Vec<f64>,
    pub tangential_roots: Vec<f64>,
    pub self_intersections: Vec<Crossing>,
}

impl FrontCurve {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.samples.iter().map(|s| [s.x, s.y]).collect()
    }

    fn n_segments(&self) -> usize {
        if self.closed {
            self.samples.len()
        } else {
            self.samples.len().saturating_sub(1)
        }
    }

    fn segment(&self, i: usize) -> ([f64; 2], [f64; 2], f64, f64) {
        let m = self.samples.len();
        let a = self.samples[i];
        let b = self.samples[(i + 1) % m];
        let tb = a.theta + wrap_angle(b.theta - a.theta);
        ([a.x, a.y], [b.x, b.y], a.theta, tb)
    }

    /// Point at a traversal parameter (segment index + fraction).
    pub fn point_at(&self, param: f64) -> [f64; 2] {
        let nseg = self.n_segments().max(1);
        let i = (param.floor() as usize).min(nseg - 1);
        let t = param - i as f64;
        let (p, q, _, _) = self.segment(i);
        [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
    }

    /// Builds a front from samples, locating cusps as sign changes of ρ.
    pub fn from_samples(label: &str, samples: Vec<FrontSample>, closed: bool) -> Self {
        let mut c = FrontCurve {
            label: label.to_string(),
            source: None,
            samples,
            closed,
            cusps: Vec::new(),
            excluded_roots: Vec::new(),
            tangential_roots: Vec::new(),
            self_intersections: Vec::new(),
        };
        let theta: Vec<f64> = (0..c.len()).map(|j| j as f64).collect();
        let rho: Vec<f64> = c.samples.iter().map(|s| s.rho).collect();
        let scale = rho.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        let no = vec![false; c.len()];
        let scan = scan_roots(&theta, &rho, &no, &no, if closed { Some(true) } else { None }, 1e-12 * scale);
        let m = c.len() as f64;
        for r in &scan.roots {
            let left = r.left as f64;
            let t = c.samples[r.left].rho / (c.samples[r.left].rho - c.samples[r.right].rho);
            let param = (left + t).rem_euclid(m);
            let [x, y] = c.point_at(param);
            let th = c.samples[r.left].theta
                + t * wrap_angle(c.samples[r.right].theta - c.samples[r.left].theta);
            c.cusps.push(Cusp { theta: th.rem_euclid(TAU), param, x, y });
        }
        c.cusps.sort_by(|a, b| a.param.total_cmp(&b.param));
        c.self_intersections = self_intersections(&c);
        c
    }

    /// Same curve traversed backwards; co-orientation is kept, so the winding flips.
    pub fn reversed(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        for s in samples.iter_mut() {
            s.rho = -s.rho;
        }
        FrontCurve::from_samples(&format!("{} (reversed)", self.label), samples, self.closed)
    }
}

/// Front of a series, with cusps taken from an already refined root scan.
pub fn front_from_series(label: &str, series: &BandSeries, scan: &RootScan) -> FrontCurve {
    let samples: Vec<FrontSample> = (0..series.len())
        .map(|j| {
            let (t, l, d) = (series.theta[j], series.lambda[j], series.dlambda[j]);
            FrontSample { theta: t, x: l * t.cos() - d * t.sin(), y: l * t.sin() + d * t.cos(), rho: series.rho[j] }
        })
        .collect();
    let closed = series.periodic && series.closed;
    let mut c = FrontCurve {
        label: label.to_string(),
        source: Some(series.source),
        samples,
        closed,
        cusps: Vec::new(),
        excluded_roots: scan.excluded.clone(),
        tangential_roots: scan.tangential.clone(),
        self_intersections: Vec::new(),
    };
    let m = series.len();
    for r in &scan.roots {
        let wraps = r.right < r.left;
        let ta = series.theta[r.left];
        let tb = if wraps { series.theta[r.right] + TAU } else { series.theta[r.right] };
        let mut th = r.theta;
        if wraps && th < ta {
            th += TAU;
        }
        let frac = if tb > ta { ((th - ta) / (tb - ta)).clamp(0.0, 1.0) } else { 0.0 };
        let span = if wraps { m - r.left } else { r.right - r.left };
        let param = (r.left as f64 + frac * span as f64).rem_euclid(m as f64);
        let [x, y] = c.point_at(param);
        c.cusps.push(Cusp { theta: r.theta, param, x, y });
    }
    c.cusps.sort_by(|a, b| a.param.total_cmp(&b.param));
    c.self_intersections = self_intersections(&c);
    c
}

pub fn front(sweep: &SpectralSweep, k: usize) -> Result<FrontCurve> {
    if k >= sweep.n_bands() {
        return Err(Error::InvalidArgument(format!("band {} not tracked", k + 1)));
    }
    let scan = cusps(sweep, BandSource::Tracked(k), default_root_tol(sweep))?;
    Ok(front_from_series(&format!("band {}", k + 1), &sweep.band(k), &scan))
}

#[derive(Clone, Debug, Serialize)]
pub struct Boundary {
    pub front: FrontCurve,
    /// max ρ₁; ≤ tolerance for a convex boundary.
    pub max_rho: f64,
    pub convex: bool,
    /// min |ρ₁| and where it occurs; near zero at corners.
    pub sharpness: f64,
    pub sharpness_theta: f64,
}

/// Front of the lowest sorted level, the boundary of the numerical range.
pub fn boundary(sweep: &SpectralSweep) -> Result<Boundary> {
    let series = sweep.level(0);
    let tol = default_root_tol(sweep);
    let scan = cusps(sweep, BandSource::Level(0), tol)?;
    let front = front_from_series("boundary", &series, &scan);
    let max_rho = series.rho.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let (jmin, sharpness) = series
        .rho
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (j, r)| if r.abs() < acc.1 { (j, r.abs()) } else { acc });
    Ok(Boundary { front, max_rho, convex: max_rho <= 1e-8 * sweep.scale().max(1.0), sharpness, sharpness_theta: series.theta[jmin] })
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Parameters (u, v) ∈ [0,1)² of a proper crossing of segments pq and rs.
fn segment_crossing(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2]) -> Option<(f64, f64)> {
    let d1 = sub(q, p);
    let d2 = sub(s, r);
    let den = cross(d1, d2);
    let scale = norm(d1) * norm(d2);
    if den.abs() <= 1e-14 * scale || scale == 0.0 {
        return None;
    }
    let w = sub(r, p);
    let u = cross(w, d2) / den;
    let v = cross(w, d1) / den;
    if (0.0..1.0).contains(&u) && (0.0..1.0).contains(&v) {
        Some((u, v))
    } else {
        None
    }
}

struct SegmentSet {
    a: Vec<[f64; 2]>,
    b: Vec<[f64; 2]>,
}

/// Candidate segment pairs whose bounding boxes share a cell of a uniform grid.
fn candidate_pairs(left: &SegmentSet, right: &SegmentSet) -> Vec<(usize, usize)> {
    let all = left.a.iter().chain(&left.b).chain(&right.a).chain(&right.b);
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p[0]);
        y0 = y0.min(p[1]);
        x1 = x1.max(p[0]);
        y1 = y1.max(p[1]);
    }
    let count = (left.a.len() + right.a.len()).max(1);
    let cells = ((count as f64).sqrt().ceil() as usize).clamp(1, 1024);
    let w = ((x1 - x0).max(y1 - y0)).max(1e-300) / cells as f64;
    let cell_range = |p: [f64; 2], q: [f64; 2]| {
        let cx0 = (((p[0].min(q[0]) - x0) / w).floor() as isize).clamp(0, cells as isize - 1) as usize;
        let cx1 = (((p[0].max(q[0]) - x0) / w).floor() as isize).clamp(0, cells as isize - 1) as usize;
        let cy0 = (((p[1].min(q[1]) - y0) / w).floor() as isize).clamp(0, cells as isize - 1) as usize;
        let cy1 = (((p[1].max(q[1]) - y0) / w).floor() as isize).clamp(0, cells as isize - 1) as usize;
        (cx0, cx1, cy0, cy1)
    };
    let mut buckets: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for i in 0..right.a.len() {
        let (cx0, cx1, cy0, cy1) = cell_range(right.a[i], right.b[i]);
        for cx in cx0..=cx1 {
            for cy in cy0..=cy1 {
                buckets.entry((cx, cy)).or_default().push(i);
            }
        }
    }
    let mut pairs = Vec::new();
    for i in 0..left.a.len() {
        let (cx0, cx1, cy0, cy1) = cell_range(left.a[i], left.b[i]);
        for cx in cx0..=cx1 {
            for cy in cy0..=cy1 {
                if let Some(list) = buckets.get(&(cx, cy)) {
                    pairs.extend(list.iter().map(|&j| (i, j)));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

fn segments(c: &FrontCurve) -> SegmentSet {
    let n = c.n_segments();
    let mut s = SegmentSet { a: Vec::with_capacity(n), b: Vec::with_capacity(n) };
    for i in 0..n {
        let (p, q, _, _) = c.segment(i);
        s.a.push(p);
        s.b.push(q);
    }
    s
}

const LOW_CONFIDENCE_ANGLE: f64 = 1e-4;

fn make_crossing(ca: &FrontCurve, i: usize, u: f64, cb: &FrontCurve, j: usize, v: f64) -> Crossing {
    let (p, q, ta0, ta1) = ca.segment(i);
    let (r, s, tb0, tb1) = cb.segment(j);
    let da = sub(q, p);
    let db = sub(s, r);
    let sin = (cross(da, db) / (norm(da) * norm(db))).abs().min(1.0);
    Crossing {
        theta_a: (ta0 + u * (ta1 - ta0)).rem_euclid(TAU),
        theta_b: (tb0 + v * (tb1 - tb0)).rem_euclid(TAU),
        param_a: i as f64 + u,
        param_b: j as f64 + v,
        point: [p[0] + u * da[0], p[1] + u * da[1]],
        dir_a: da,
        dir_b: db,
        angle: sin.asin(),
        low_confidence: sin.asin() < LOW_CONFIDENCE_ANGLE,
    }
}

/// Transversal self-crossings of the polyline, excluding adjacent segments.
pub fn self_intersections(c: &FrontCurve) -> Vec<Crossing> {
    let segs = segments(c);
    let n = segs.a.len();
    let mut out = Vec::new();
    for (i, j) in candidate_pairs(&segs, &segs) {
        if j <= i + 1 || (c.closed && i == 0 && j == n - 1) {
            continue;
        }
        if let Some((u, v)) = segment_crossing(segs.a[i], segs.b[i], segs.a[j], segs.b[j]) {
            out.push(make_crossing(c, i, u, c, j, v));
        }
    }
    out.sort_by(|a, b| a.param_a.total_cmp(&b.param_a));
    out
}

/// Crossings between two different curves; strand a lies on `a`, strand b on `b`.
pub fn mutual_intersections(a: &FrontCurve, b: &FrontCurve) -> Vec<Crossing> {
    let sa = segments(a);
    let sb = segments(b);
    let mut out = Vec::new();
    for (i, j) in candidate_pairs(&sa, &sb) {
        if let Some((u, v)) = segment_crossing(sa.a[i], sa.b[i], sb.a[j], sb.b[j]) {
            out.push(make_crossing(a, i, u, b, j, v));
        }
    }
    out.sort_by(|x, y| x.param_a.total_cmp(&y.param_a));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SwallowTail {
    pub cusp_thetas: (f64, f64),
    pub cusp_params: (f64, f64),
    /// Sign of ρ on the connecting arc (opposite to the ambient sign).
    pub arc_sign: i8,
    pub arc: Vec<[f64; 2]>,
    pub crossing: Option<Crossing>,
    /// Smallest distance from the arc to the boundary front, when known.
    pub boundary_distance: Option<f64>,
}

impl SwallowTail {
    /// The θ-interval between the cusps contains `theta` (cyclically).
    pub fn spans(&self, theta: f64) -> bool {
        let (a, b) = self.cusp_thetas;
        let len = (b - a).rem_euclid(TAU);
        (theta - a).rem_euclid(TAU) <= len
    }
}

fn arc_length_forward(from: f64, to: f64, total: f64, closed: bool) -> Option<f64> {
    if closed {
        Some((to - from).rem_euclid(total))
    } else if to >= from {
        Some(to - from)
    } else {
        None
    }
}

/// Tails are maximal arcs between consecutive cusps on which ρ has the sign
/// opposite to its ambient (θ-measure majority) sign.
pub fn swallow_tails(c: &FrontCurve, boundary: Option<&FrontCurve>) -> Vec<SwallowTail> {
    let m = c.len();
    if c.cusps.len() < 2 || m < 3 {
        return Vec::new();
    }
    let ambient: f64 = c.samples.iter().map(|s| s.rho.signum()).sum::<f64>().signum();
    let total = c.n_segments() as f64;
    let mut pairs: Vec<(usize, usize)> = (0..c.cusps.len() - 1).map(|i| (i, i + 1)).collect();
    if c.closed {
        pairs.push((c.cusps.len() - 1, 0));
    }
    let mut out = Vec::new();
    for (i1, i2) in pairs {
        let (c1, c2) = (c.cusps[i1], c.cusps[i2]);
        let Some(len) = arc_length_forward(c1.param, c2.param, total, c.closed) else { continue };
        let steps = len.floor() as usize;
        let first = c1.param.floor() as usize + 1;
        let inside: Vec<usize> = (0..=steps)
            .map(|s| (first + s) % m)
            .filter(|&j| {
                arc_length_forward(c1.param, j as f64, total, c.closed).map(|p| p > 0.0 && p < len).unwrap_or(false)
            })
            .collect();
        if inside.is_empty() {
            continue;
        }
        let arc_sign: f64 = inside.iter().map(|&j| c.samples[j].rho.signum()).sum::<f64>().signum();
        if arc_sign == 0.0 || arc_sign == ambient {
            continue;
        }
        if c.excluded_roots.iter().any(|&t| cyc_between(t, c1.theta, c2.theta)) {
            continue;
        }
        let mut best: Option<(f64, Crossing)> = None;
        for x in &c.self_intersections {
            let (pa, pb) = (x.param_a, x.param_b);
            let span = |from: f64, to: f64| arc_length_forward(from, to, total, c.closed);
            for (s, e) in [(pa, pb), (pb, pa)] {
                let Some(full) = span(s, e) else { continue };
                let d1 = span(s, c1.param);
                let d2 = span(s, c2.param);
                let (Some(d1), Some(d2)) = (d1, d2) else { continue };
                if !(d1 < d2 && d2 < full) {
                    continue;
                }
                let others = c.cusps.iter().enumerate().any(|(ci, cu)| {
                    ci != i1 && ci != i2 && span(s, cu.param).map(|d| d < full).unwrap_or(false)
                });
                if others {
                    continue;
                }
                if best.as_ref().map(|b| full < b.0).unwrap_or(true) {
                    best = Some((full, *x));
                }
            }
        }
        let arc: Vec<[f64; 2]> = inside.iter().map(|&j| [c.samples[j].x, c.samples[j].y]).collect();
        let boundary_distance = boundary.map(|b| {
            arc.iter()
                .map(|p| b.samples.iter().map(|s| (s.x - p[0]).hypot(s.y - p[1])).fold(f64::INFINITY, f64::min))
                .fold(f64::INFINITY, f64::min)
        });
        out.push(SwallowTail {
            cusp_thetas: (c1.theta, c2.theta),
            cusp_params: (c1.param, c2.param),
            arc_sign: arc_sign as i8,
            arc,
            crossing: best.map(|b| b.1),
            boundary_distance,
        });
    }
    out
}

fn cyc_between(t: f64, a: f64, b: f64) -> bool {
    (t - a).rem_euclid(TAU) < (b - a).rem_euclid(TAU)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Vertex {
    pub theta: f64,
    pub curvature: f64,
    pub maximum: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexReport {
    pub vertices: Vec<Vertex>,
    /// ρ is constant: every point is a vertex of a circle.
    pub constant_curvature: bool,
    /// Cusped curve: vertices are only reported on smooth arcs and the count is not meaningful.
    pub cusped: bool,
}

/// Local extrema of |κ| = 1/|ρ| along the front.
pub fn vertices(c: &FrontCurve) -> VertexReport {
    let m = c.len();
    let a: Vec<f64> = c.samples.iter().map(|s| s.rho.abs()).collect();
    let scale = a.iter().fold(0.0f64, |x, &y| x.max(y)).max(f64::MIN_POSITIVE);
    let min = a.iter().fold(f64::INFINITY, |x, &y| x.min(y));
    let cusped = !c.cusps.is_empty();
    if m < 3 || scale - min <= 1e-9 * scale {
        return VertexReport { vertices: Vec::new(), constant_curvature: m >= 3, cusped };
    }
    let n = if c.closed { m } else { m - 1 };
    let tol = 1e-12 * scale;
    let d: Vec<f64> = (0..n).map(|j| a[(j + 1) % m] - a[j]).collect();
    let nz: Vec<usize> = (0..n).filter(|&j| d[j].abs() > tol).collect();
    let mut out = Vec::new();
    let mut pairs: Vec<(usize, usize)> = nz.windows(2).map(|w| (w[0], w[1])).collect();
    if c.closed && nz.len() > 1 {
        pairs.push((*nz.last().unwrap(), nz[0]));
    }
    for (p, q) in pairs {
        if (d[p] > 0.0) == (d[q] > 0.0) {
            continue;
        }
        let j = (p + 1) % m;
        if cusped && c.samples[j].rho.abs() <= 1e-9 * scale {
            continue;
        }
        let near_cusp = c.cusps.iter().any(|cu| (cu.param - j as f64).abs() < 2.0 || (cu.param - j as f64).abs() > m as f64 - 2.0);
        if near_cusp {
            continue;
        }
        // |ρ| at a minimum means |κ| at a maximum.
        out.push(Vertex { theta: c.samples[j].theta.rem_euclid(TAU), curvature: 1.0 / c.samples[j].rho, maximum: d[p] < 0.0 });
    }
    VertexReport { vertices: out, constant_curvature: false, cusped }
}

#[derive(Clone, Debug, Serialize)]
pub struct PolarPlot {
    /// (θ, λcosθ, λsinθ)
    pub points: Vec<[f64; 3]>,
    /// The coordinate differentials never vanish together on the grid.
    pub smooth: bool,
}

/// Γ: θ ↦ λ(θ)e^{iθ}
pub fn polar_plot(series: &BandSeries) -> PolarPlot {
    let points: Vec<[f64; 3]> =
        series.theta.iter().zip(&series.lambda).map(|(&t, &l)| [t, l * t.cos(), l * t.sin()]).collect();
    let scale = series.lambda.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    let smooth = points.windows(2).all(|w| (w[1][1] - w[0][1]).abs() + (w[1][2] - w[0][2]).abs() > 1e-14 * scale);
    PolarPlot { points, smooth }
}

/// Front sampled from a support function p with its first two derivatives.
pub fn front_from_support(label: &str, samples: usize, p: impl Fn(f64) -> (f64, f64, f64)) -> FrontCurve {
    let h = TAU / samples as f64;
    let s: Vec<FrontSample> = (0..samples)
        .map(|j| {
            let t = (j as f64 + 0.5) * h;
            let (v, d, dd) = p(t);
            FrontSample { theta: t, x: v * t.cos() - d * t.sin(), y: v * t.sin() + d * t.cos(), rho: v + dd }
        })
        .collect();
    FrontCurve::from_samples(label, s, true)
}

/// Front from a plain closed polyline, co-oriented by the right-hand normal of each chord.
pub fn front_from_polyline(label: &str, points: &[[f64; 2]]) -> FrontCurve {
    let m = points.len();
    let mut samples = Vec::with_capacity(m);
    let mut prev: Option<f64> = None;
    for j in 0..m {
        let a = points[(j + m - 1) % m];
        let b = points[(j + 1) % m];
        let tangent = sub(b, a);
        let raw = tangent[1].atan2(tangent[0]) - PI / 2.0;
        let th = match prev {
            Some(p) => p + wrap_angle(raw - p),
            None => raw,
        };
        prev = Some(th);
        samples.push(FrontSample { theta: th, x: points[j][0], y: points[j][1], rho: 1.0 });
    }
    FrontCurve::from_samples(label, samples, true)
}
