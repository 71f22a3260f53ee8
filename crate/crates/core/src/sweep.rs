//! θ-sweeps of H(θ) = H₀cosθ + H₁sinθ with band tracking, first derivatives
//! and the curvature radius ρ = λ + λ″ from the pseudo-inverse formula.

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianPair;
use crate::linalg::{default_rank_tol, eigh, inner, ComplexMatrix, EigenDecomposition, HermitianMatrix, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};

pub fn path_hamiltonian(pair: &HamiltonianPair, theta: f64) -> HermitianMatrix {
    HermitianMatrix::combine(theta.cos(), &pair.h0, theta.sin(), &pair.h1)
}

/// dH/dθ = −H₀sinθ + H₁cosθ
pub fn path_derivative(pair: &HamiltonianPair, theta: f64) -> HermitianMatrix {
    HermitianMatrix::combine(-theta.sin(), &pair.h0, theta.cos(), &pair.h1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaGrid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
    pub samples: Vec<f64>,
    /// Samples cover one full period and the last sample wraps to the first.
    pub periodic: bool,
}

impl ThetaGrid {
    /// M = ⌈2π/δθ⌉ samples at (j + ½)·2π/M. The half-step offset keeps θ = 0, π/2, π, 3π/2 off the grid.
    pub fn full_circle(step: f64) -> Result<Self> {
        check_step(step)?;
        let m = ((TAU / step) - 1e-9).ceil() as usize;
        let h = TAU / m as f64;
        Ok(Self { start: 0.0, end: TAU, step: h, samples: (0..m).map(|j| (j as f64 + 0.5) * h).collect(), periodic: true })
    }

    /// Inclusive uniform grid on [start, end] with spacing at most `step`.
    pub fn interval(start: f64, end: f64, step: f64) -> Result<Self> {
        check_step(step)?;
        if !(end > start) || end - start > TAU + 1e-12 {
            return Err(Error::InvalidArgument(format!("interval [{start}, {end}] must be non-empty and at most 2π long")));
        }
        let m = (((end - start) / step) - 1e-9).ceil().max(1.0) as usize;
        let h = (end - start) / m as f64;
        Ok(Self { start, end, step: h, samples: (0..=m).map(|j| start + j as f64 * h).collect(), periodic: false })
    }

    /// The forward annealing path θ ∈ [0, π/2].
    pub fn forward_path(step: f64) -> Result<Self> {
        Self::interval(0.0, FRAC_PI_2, step)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step <= 0.01 + 1e-15) {
        return Err(Error::InvalidArgument(format!("grid step {step} must lie in (0, 0.01]")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub bands: usize,
    /// Eigenvalues closer than this times ‖H(θ)‖ form a multiplet.
    pub degeneracy_tol: f64,
    /// Absolute pseudo-inverse threshold; None means 1e-9·N·‖H(θ)‖.
    pub rank_tol: Option<f64>,
    /// Overlap below which a tracking step is ambiguous.
    pub min_overlap: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { bands: 4, degeneracy_tol: 1e-8, rank_tol: None, min_overlap: 0.5 }
    }
}

impl SweepOptions {
    pub fn with_bands(bands: usize) -> Self {
        Self { bands, ..Self::default() }
    }
}

/// Eigen-data of one H(θ), with λ′ and ρ for every level.
#[derive(Clone, Debug)]
pub struct PointData {
    pub theta: f64,
    pub values: Vec<f64>,
    pub dlambda: Vec<f64>,
    pub rho: Vec<f64>,
    pub cluster: Vec<usize>,
    pub degenerate: Vec<bool>,
    pub vectors: ComplexMatrix,
    pub norm: f64,
}

impl PointData {
    pub fn compute(pair: &HamiltonianPair, theta: f64, opts: &SweepOptions) -> Result<Self> {
        let h = path_hamiltonian(pair, theta);
        let hp = path_derivative(pair, theta);
        let eig = eigh(&h)?;
        Ok(Self::from_eigen(theta, eig, &hp, opts))
    }

    fn from_eigen(theta: f64, eig: EigenDecomposition, hp: &HermitianMatrix, opts: &SweepOptions) -> Self {
        let n = eig.dim();
        let norm = eig.spectral_norm();
        let v = &eig.vectors;
        // A = V*·H′·V
        let a = &(&v.adjoint() * hp.matrix()) * v;
        let rank_tol = opts.rank_tol.unwrap_or_else(|| default_rank_tol(n, norm));
        let values = eig.values.clone();
        let dlambda: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        let rho: Vec<f64> = (0..n).map(|i| curvature_radius(&values, i, |j| a[(j, i)], rank_tol)).collect();
        let (cluster, degenerate) = clusters(&values, opts.degeneracy_tol * norm.max(f64::MIN_POSITIVE));
        Self { theta, values, dlambda, rho, cluster, degenerate, vectors: eig.vectors, norm }
    }

    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.vectors.column(i)
    }
}

/// 2 Σ_j |⟨z_j|H′|z_i⟩|² / (λ_i − λ_j) over |λ_i − λ_j| > rank_tol.
fn curvature_radius(values: &[f64], i: usize, coupling: impl Fn(usize) -> C64, rank_tol: f64) -> f64 {
    let mut s = 0.0;
    for (j, &lj) in values.iter().enumerate() {
        let d = values[i] - lj;
        if j == i || d.abs() <= rank_tol {
            continue;
        }
        s += coupling(j).norm_sqr() / d;
    }
    2.0 * s
}

fn clusters(values: &[f64], tol: f64) -> (Vec<usize>, Vec<bool>) {
    let n = values.len();
    let mut cluster = vec![0; n];
    for i in 1..n {
        cluster[i] = if values[i] - values[i - 1] < tol { cluster[i - 1] } else { cluster[i - 1] + 1 };
    }
    let degenerate = (0..n)
        .map(|i| (i > 0 && cluster[i - 1] == cluster[i]) || (i + 1 < n && cluster[i + 1] == cluster[i]))
        .collect();
    (cluster, degenerate)
}

struct StepMatch {
    map: Vec<usize>,
    ambiguous: Vec<bool>,
}

/// Greedy matching of tracked vectors onto the eigenframe of `pd`, scored by
/// overlap with whole multiplets first and single vectors second.
fn match_step(prev: &[Vec<C64>], prev_map: &[usize], pd: &PointData, min_overlap: f64) -> StepMatch {
    let n = pd.values.len();
    let k = prev.len();
    let ncl = pd.cluster.last().map(|c| c + 1).unwrap_or(0);
    let cols: Vec<Vec<C64>> = (0..n).map(|i| pd.vector(i)).collect();
    let mut ov = vec![vec![0.0; n]; k];
    let mut cov = vec![vec![0.0; ncl]; k];
    for b in 0..k {
        for i in 0..n {
            let o = inner(&prev[b], &cols[i]).norm_sqr();
            ov[b][i] = o;
            cov[b][pd.cluster[i]] += o;
        }
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(k * n);
    for b in 0..k {
        for i in 0..n {
            pairs.push((cov[b][pd.cluster[i]] + 1e-3 * ov[b][i], b, i));
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut map = vec![usize::MAX; k];
    let mut taken = vec![false; n];
    for &(_, b, i) in &pairs {
        if map[b] == usize::MAX && !taken[i] {
            map[b] = i;
            taken[i] = true;
        }
    }
    let ambiguous: Vec<bool> = (0..k).map(|b| cov[b][pd.cluster[map[b]]] < min_overlap).collect();
    if ambiguous.iter().any(|&a| a) {
        // Fall back to sorted order for ambiguous bands.
        for b in 0..k {
            if ambiguous[b] {
                taken[map[b]] = false;
            }
        }
        for b in 0..k {
            if ambiguous[b] {
                let choice = if !taken[prev_map[b]] { prev_map[b] } else { (0..n).find(|&i| !taken[i]).unwrap() };
                map[b] = choice;
                taken[choice] = true;
            }
        }
    }
    StepMatch { map, ambiguous }
}

/// Which curve of a sweep to use: a tracked band or a sorted level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandSource {
    Tracked(usize),
    Level(usize),
}

/// Samples of one band with flags, ready for root finding and front construction.
#[derive(Clone, Debug)]
pub struct BandSeries {
    pub source: BandSource,
    pub theta: Vec<f64>,
    pub lambda: Vec<f64>,
    pub dlambda: Vec<f64>,
    pub rho: Vec<f64>,
    /// Degenerate multiplet at the sample.
    pub degenerate: Vec<bool>,
    /// The tracking step into the sample was ambiguous.
    pub ambiguous_step: Vec<bool>,
    /// Sampled over a full period.
    pub periodic: bool,
    /// Periodic and the band maps onto itself across the wrap.
    pub closed: bool,
    /// The wrap step was ambiguous.
    pub wrap_ambiguous: bool,
    /// max ‖H(θ)‖ over the grid.
    pub scale: f64,
}

impl BandSeries {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// λ″ = ρ − λ
    pub fn second_derivative(&self) -> Vec<f64> {
        self.rho.iter().zip(&self.lambda).map(|(r, l)| r - l).collect()
    }
}

#[derive(Clone, Debug)]
pub struct SpectralSweep {
    pub grid: ThetaGrid,
    pub options: SweepOptions,
    pub pair: HamiltonianPair,
    pub dim: usize,
    /// Tracked bands, K × M.
    pub bands: Vec<Vec<f64>>,
    pub dlambda: Vec<Vec<f64>>,
    pub rho: Vec<Vec<f64>>,
    pub degenerate: Vec<Vec<bool>>,
    pub ambiguous: Vec<Vec<bool>>,
    /// Sorted level index of each tracked band at each sample.
    pub level_index: Vec<Vec<usize>>,
    /// Sorted levels, M × N.
    pub levels: Vec<Vec<f64>>,
    pub level_dlambda: Vec<Vec<f64>>,
    pub level_rho: Vec<Vec<f64>>,
    pub level_degenerate: Vec<Vec<bool>>,
    /// ‖H(θ_j)‖
    pub norms: Vec<f64>,
    pub closed: Vec<bool>,
    pub wrap_ambiguous: Vec<bool>,
    vectors: Vec<Vec<C64>>,
}

const CHUNK: usize = 256;

pub fn sweep(pair: &HamiltonianPair, grid: &ThetaGrid, opts: &SweepOptions) -> Result<SpectralSweep> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty θ grid".into()));
    }
    let n = pair.dim();
    let k = opts.bands;
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("requested {k} bands of a {n}-level problem")));
    }
    let m = grid.len();
    let mut out = SpectralSweep {
        grid: grid.clone(),
        options: *opts,
        pair: pair.clone(),
        dim: n,
        bands: vec![Vec::with_capacity(m); k],
        dlambda: vec![Vec::with_capacity(m); k],
        rho: vec![Vec::with_capacity(m); k],
        degenerate: vec![Vec::with_capacity(m); k],
        ambiguous: vec![Vec::with_capacity(m); k],
        level_index: vec![Vec::with_capacity(m); k],
        levels: Vec::with_capacity(m),
        level_dlambda: Vec::with_capacity(m),
        level_rho: Vec::with_capacity(m),
        level_degenerate: Vec::with_capacity(m),
        norms: Vec::with_capacity(m),
        closed: vec![false; k],
        wrap_ambiguous: vec![false; k],
        vectors: vec![Vec::with_capacity(m * n); k],
    };

    let mut first: Option<PointData> = None;
    let mut map: Vec<usize> = (0..k).collect();
    let mut tracked: Vec<Vec<C64>> = Vec::new();

    for chunk in grid.samples.chunks(CHUNK) {
        let points: Vec<Result<PointData>> = chunk.par_iter().map(|&t| PointData::compute(pair, t, opts)).collect();
        for pd in points {
            let pd = pd?;
            let ambiguous = if tracked.is_empty() {
                vec![false; k]
            } else {
                let step = match_step(&tracked, &map, &pd, opts.min_overlap);
                map = step.map;
                step.ambiguous
            };
            tracked = map.iter().map(|&i| pd.vector(i)).collect();
            for b in 0..k {
                let i = map[b];
                out.bands[b].push(pd.values[i]);
                out.dlambda[b].push(pd.dlambda[i]);
                out.rho[b].push(pd.rho[i]);
                out.degenerate[b].push(pd.degenerate[i]);
                out.ambiguous[b].push(ambiguous[b]);
                out.level_index[b].push(i);
                out.vectors[b].extend_from_slice(&tracked[b]);
            }
            out.levels.push(pd.values.clone());
            out.level_dlambda.push(pd.dlambda.clone());
            out.level_rho.push(pd.rho.clone());
            out.level_degenerate.push(pd.degenerate.clone());
            out.norms.push(pd.norm);
            if first.is_none() {
                first = Some(pd);
            }
        }
    }
    if grid.periodic && m > 1 {
        let first = first.expect("non-empty grid");
        let step = match_step(&tracked, &map, &first, opts.min_overlap);
        for b in 0..k {
            out.wrap_ambiguous[b] = step.ambiguous[b];
            out.closed[b] = !step.ambiguous[b] && step.map[b] == out.level_index[b][0];
        }
    }
    Ok(out)
}

impl SpectralSweep {
    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.grid.samples[j]
    }

    /// max over the grid of ‖H(θ)‖.
    pub fn scale(&self) -> f64 {
        self.norms.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    pub fn vector(&self, k: usize, j: usize) -> &[C64] {
        &self.vectors[k][j * self.dim..(j + 1) * self.dim]
    }

    /// λ′ of tracked band k at sample j.
    pub fn band_derivative(&self, k: usize, j: usize) -> f64 {
        self.dlambda[k][j]
    }

    /// ρ = λ + λ″ of tracked band k at sample j.
    pub fn rho(&self, k: usize, j: usize) -> f64 {
        self.rho[k][j]
    }

    /// ρ of tracked band k at sample j recomputed with an explicit pseudo-inverse threshold.
    pub fn rho_with_tol(&self, k: usize, j: usize, rank_tol: f64) -> Result<f64> {
        let opts = SweepOptions { rank_tol: Some(rank_tol), ..self.options };
        let pd = PointData::compute(&self.pair, self.theta(j), &opts)?;
        Ok(pd.rho[self.level_index[k][j]])
    }

    pub fn band(&self, k: usize) -> BandSeries {
        BandSeries {
            source: BandSource::Tracked(k),
            theta: self.grid.samples.clone(),
            lambda: self.bands[k].clone(),
            dlambda: self.dlambda[k].clone(),
            rho: self.rho[k].clone(),
            degenerate: self.degenerate[k].clone(),
            ambiguous_step: self.ambiguous[k].clone(),
            periodic: self.grid.periodic,
            closed: self.closed[k],
            wrap_ambiguous: self.wrap_ambiguous[k],
            scale: self.scale(),
        }
    }

    /// Sorted level i (0 = ground) as a series.
    pub fn level(&self, i: usize) -> BandSeries {
        BandSeries {
            source: BandSource::Level(i),
            theta: self.grid.samples.clone(),
            lambda: self.levels.iter().map(|v| v[i]).collect(),
            dlambda: self.level_dlambda.iter().map(|v| v[i]).collect(),
            rho: self.level_rho.iter().map(|v| v[i]).collect(),
            degenerate: self.level_degenerate.iter().map(|v| v[i]).collect(),
            ambiguous_step: vec![false; self.len()],
            periodic: self.grid.periodic,
            closed: self.grid.periodic,
            wrap_ambiguous: false,
            scale: self.scale(),
        }
    }

    pub fn series(&self, source: BandSource) -> BandSeries {
        match source {
            BandSource::Tracked(k) => self.band(k),
            BandSource::Level(i) => self.level(i),
        }
    }

    /// (λ, λ′, ρ) of `source` at an arbitrary θ, following the band from sample `j`.
    pub fn evaluate(&self, source: BandSource, j: usize, theta: f64) -> Result<(f64, f64, f64)> {
        let pd = PointData::compute(&self.pair, theta, &self.options)?;
        let i = match source {
            BandSource::Level(i) => i,
            BandSource::Tracked(k) => {
                let z = self.vector(k, j);
                let n = self.dim;
                let ncl = pd.cluster.last().map(|c| c + 1).unwrap_or(0);
                let mut cov = vec![0.0; ncl];
                let mut ov = vec![0.0; n];
                for i in 0..n {
                    ov[i] = inner(z, &pd.vector(i)).norm_sqr();
                    cov[pd.cluster[i]] += ov[i];
                }
                (0..n)
                    .max_by(|&a, &b| (cov[pd.cluster[a]] + 1e-3 * ov[a]).total_cmp(&(cov[pd.cluster[b]] + 1e-3 * ov[b])))
                    .unwrap()
            }
        };
        Ok((pd.values[i], pd.dlambda[i], pd.rho[i]))
    }

    pub fn gap(&self) -> Result<GapFunction> {
        if self.dim < 2 {
            return Err(Error::InvalidArgument("the gap needs at least two levels".into()));
        }
        let values: Vec<f64> = self.levels.iter().map(|v| v[1] - v[0]).collect();
        let m = values.len();
        let (jmin, _) = values.iter().enumerate().fold((0, f64::INFINITY), |acc, (j, &g)| if g < acc.1 { (j, g) } else { acc });
        let mut min = values[jmin];
        let mut argmin = self.theta(jmin);
        let neighbours = if self.grid.periodic {
            Some(((jmin + m - 1) % m, (jmin + 1) % m))
        } else if jmin > 0 && jmin + 1 < m {
            Some((jmin - 1, jmin + 1))
        } else {
            None
        };
        if let Some((a, b)) = neighbours {
            let (gm, g0, gp) = (values[a], values[jmin], values[b]);
            let curv = gm - 2.0 * g0 + gp;
            if curv > 0.0 {
                let h = self.grid.step;
                let offset = (0.5 * h * (gm - gp) / curv).clamp(-h, h);
                let refined = g0 - (gm - gp) * (gm - gp) / (8.0 * curv);
                if refined.is_finite() && refined <= g0 {
                    min = refined.max(0.0);
                    argmin = self.theta(jmin) + offset;
                }
            }
        }
        Ok(GapFunction { theta: self.grid.samples.clone(), values, min, argmin, argmin_index: jmin })
    }

    fn gap_at(&self, theta: f64) -> Result<f64> {
        let e = eigh(&path_hamiltonian(&self.pair, theta))?;
        Ok(e.values[1] - e.values[0])
    }

    /// Points where the gap closes below `tol`, found from grid minima by
    /// golden-section refinement and bracketed with bisection of g − tol.
    pub fn exact_crossings(&self, tol: f64) -> Result<ExactCrossings> {
        let g = self.gap()?;
        let v = &g.values;
        let m = v.len();
        let h = self.grid.step;
        let periodic = self.grid.periodic;
        let mut out = ExactCrossings::default();

        let below: Vec<bool> = v.iter().map(|&x| x < tol).collect();
        // Long runs below tolerance are degenerate intervals rather than crossings.
        let mut j = 0;
        let mut in_interval = vec![false; m];
        while j < m {
            if below[j] {
                let start = j;
                while j < m && below[j] {
                    j += 1;
                }
                if j - start >= 3 {
                    out.degenerate_intervals.push((self.theta(start), self.theta(j - 1)));
                    in_interval[start..j].iter_mut().for_each(|x| *x = true);
                }
            } else {
                j += 1;
            }
        }

        for j in 0..m {
            if in_interval[j] {
                continue;
            }
            let (a, b) = match (periodic, j) {
                (true, _) => ((j + m - 1) % m, (j + 1) % m),
                (false, 0) => (0, 1.min(m - 1)),
                (false, _) if j + 1 == m => (j - 1, j),
                (false, _) => (j - 1, j + 1),
            };
            if v[j] > v[a] || v[j] > v[b] {
                continue;
            }
            let slope = (v[a] - v[j]).abs().max((v[b] - v[j]).abs());
            if v[j] > slope + tol {
                continue;
            }
            let t0 = self.theta(j);
            let lo = if periodic || j > 0 { t0 - h } else { t0 };
            let hi = if periodic || j + 1 < m { t0 + h } else { t0 };
            let (tmin, gmin) = golden_min(|t| self.gap_at(t), lo, hi, 1e-13)?;
            if gmin >= tol {
                continue;
            }
            let enter = bisect(|t| Ok(self.gap_at(t)? - tol), lo, tmin, 1e-12)?;
            let exit = bisect(|t| Ok(self.gap_at(t)? - tol), tmin, hi, 1e-12)?;
            let theta = tmin.rem_euclid(TAU);
            if !out.points.iter().any(|&p: &f64| (p - theta).abs() < 2.0 * h) {
                out.points.push(theta);
                out.brackets.push((enter, exit));
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapFunction {
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
    pub min: f64,
    pub argmin: f64,
    pub argmin_index: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ExactCrossings {
    pub points: Vec<f64>,
    pub brackets: Vec<(f64, f64)>,
    /// Ranges where the two lowest levels stay within tolerance of each other.
    pub degenerate_intervals: Vec<(f64, f64)>,
}

impl ExactCrossings {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.degenerate_intervals.is_empty()
    }
}

fn golden_min(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() < tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Bisection for a sign change of f on [a, b]; returns the midpoint of the final bracket.
pub fn bisect(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a)?;
    for _ in 0..80 {
        if (b - a).abs() < tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
