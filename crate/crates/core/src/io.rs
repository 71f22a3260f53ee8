//! Run configuration, problem files, the analysis pipeline and its exports
//! (CSV sweep table, JSON report, SVG figure).

use crate::curves::{self, Boundary, FrontCurve, SwallowTail, VertexReport};
use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianPair, ProblemSpec};
use crate::linalg::{ComplexMatrix, HermitianMatrix};
use crate::sweep::{sweep, SpectralSweep, SweepOptions, ThetaGrid};
use crate::topology::{self, GapReport, TopologyReport, DEFAULT_WINDOW};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Problem file: the recipe (when known) plus the dense endpoint matrices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemFile {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ProblemSpec>,
    pub h0: ComplexMatrix,
    pub h1: ComplexMatrix,
}

impl ProblemFile {
    pub fn from_pair(pair: &HamiltonianPair) -> Self {
        Self {
            family: pair.family().to_string(),
            spec: pair.spec.clone(),
            h0: pair.h0.matrix().clone(),
            h1: pair.h1.matrix().clone(),
        }
    }

    /// The stored matrices are authoritative; the recipe is kept as metadata.
    pub fn into_pair(self) -> Result<HamiltonianPair> {
        HamiltonianPair::new(HermitianMatrix::new(self.h0)?, HermitianMatrix::new(self.h1)?, self.spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemSource {
    Spec(ProblemSpec),
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl GridConfig {
    pub fn full_circle(step: f64) -> Self {
        Self { start: 0.0, end: TAU, step }
    }

    pub fn forward_path(step: f64) -> Self {
        Self { start: 0.0, end: PI / 2.0, step }
    }

    /// [0, 2π) becomes the periodic grid, anything else an inclusive interval.
    pub fn build(&self) -> Result<ThetaGrid> {
        if self.start == 0.0 && (self.end - TAU).abs() < 1e-12 {
            ThetaGrid::full_circle(self.step)
        } else {
            ThetaGrid::interval(self.start, self.end, self.step)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub degeneracy: f64,
    pub rank: Option<f64>,
    pub min_overlap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let o = SweepOptions::default();
        Self { degeneracy: o.degeneracy_tol, rank: o.rank_tol, min_overlap: o.min_overlap }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub grid: GridConfig,
    #[serde(default = "default_bands")]
    pub bands: usize,
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_bands() -> usize {
    4
}

fn default_window() -> f64 {
    DEFAULT_WINDOW
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Svg]
}

impl RunConfig {
    pub fn new(problem: ProblemSource, grid: GridConfig) -> Self {
        Self {
            problem,
            grid,
            bands: default_bands(),
            window: default_window(),
            tolerances: Tolerances::default(),
            output_dir: default_output(),
            formats: default_formats(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands == 0 {
            return Err(Error::InvalidArgument("at least one band must be requested".into()));
        }
        if !(self.window > 0.0) {
            return Err(Error::InvalidArgument("the window must be positive".into()));
        }
        self.grid.build().map(|_| ())
    }

    pub fn options(&self) -> SweepOptions {
        SweepOptions {
            bands: self.bands,
            degeneracy_tol: self.tolerances.degeneracy,
            rank_tol: self.tolerances.rank,
            min_overlap: self.tolerances.min_overlap,
        }
    }

    /// Relative paths in a file source are taken relative to `base`.
    pub fn pair(&self, base: Option<&Path>) -> Result<HamiltonianPair> {
        match &self.problem {
            ProblemSource::Spec(s) => s.build(),
            ProblemSource::File(p) => {
                let p = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                ProblemFile::load(&p)?.into_pair()
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TunnelingSummary {
    pub flag: bool,
    pub ground_max: f64,
    pub barrier_top: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandInvariants {
    pub winding: i32,
    pub maslov: i32,
    pub writhe: i32,
    pub tb: f64,
}

/// The JSON report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub problem: String,
    pub theta_star: Option<f64>,
    pub min_gap: Option<f64>,
    pub morphology: Option<String>,
    pub rho_roots: BTreeMap<String, usize>,
    pub tunneling: Option<TunnelingSummary>,
    pub invariants: BTreeMap<String, BandInvariants>,
    pub linking: Vec<(usize, usize, Option<f64>)>,
    #[serde(default)]
    pub gap: Option<GapReport>,
    #[serde(default)]
    pub warnings: Vec<String>,
    /// Set when a numerical failure cut the analysis short.
    #[serde(default)]
    pub partial: bool,
}

impl Report {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Legendrian isotopy verdict: tb agrees band by band.
    pub fn isotopic(&self, other: &Report) -> Result<bool> {
        if self.invariants.is_empty() || other.invariants.is_empty() {
            return Err(Error::InvalidArgument("a report has no curve invariants".into()));
        }
        if self.invariants.len() != other.invariants.len() {
            return Ok(false);
        }
        Ok(self
            .invariants
            .iter()
            .all(|(k, a)| other.invariants.get(k).map(|b| (a.tb - b.tb).abs() < 1e-9).unwrap_or(false)))
    }

    /// Report for free-standing fronts (no Hamiltonian behind them).
    pub fn for_fronts(problem: &str, fronts: &[FrontCurve]) -> Result<Self> {
        let topo = TopologyReport::from_fronts(fronts)?;
        Ok(Self {
            problem: problem.to_string(),
            theta_star: None,
            min_gap: None,
            morphology: None,
            rho_roots: BTreeMap::new(),
            tunneling: None,
            invariants: invariants_map(&topo),
            linking: topo.linking.clone(),
            gap: None,
            warnings: low_confidence_warnings(&topo),
            partial: false,
        })
    }
}

fn invariants_map(t: &TopologyReport) -> BTreeMap<String, BandInvariants> {
    t.curves
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let key = c.label.strip_prefix("band ").map(str::to_string).unwrap_or_else(|| (i + 1).to_string());
            (key, BandInvariants { winding: c.winding, maslov: c.maslov, writhe: c.writhe, tb: c.tb })
        })
        .collect()
}

fn low_confidence_warnings(t: &TopologyReport) -> Vec<String> {
    t.curves
        .iter()
        .filter(|c| c.low_confidence > 0)
        .map(|c| format!("{}: {} low-confidence cusp or crossing signs", c.label, c.low_confidence))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FrontTables {
    pub label: String,
    pub closed: bool,
    pub cusps: Vec<curves::Cusp>,
    pub crossings: Vec<curves::Crossing>,
    pub swallow_tails: Vec<SwallowTail>,
    pub vertices: VertexReport,
}

/// Everything computed for one configuration.
pub struct Analysis {
    pub sweep: SpectralSweep,
    pub gap: Option<GapReport>,
    pub fronts: Vec<FrontCurve>,
    pub boundary: Option<Boundary>,
    pub topology: Option<TopologyReport>,
    pub report: Report,
}

impl Analysis {
    pub fn tables(&self) -> Vec<FrontTables> {
        let bfront = self.boundary.as_ref().map(|b| &b.front);
        self.fronts
            .iter()
            .chain(bfront)
            .map(|f| FrontTables {
                label: f.label.clone(),
                closed: f.closed,
                cusps: f.cusps.clone(),
                crossings: f.self_intersections.clone(),
                swallow_tails: curves::swallow_tails(f, bfront),
                vertices: curves::vertices(f),
            })
            .collect()
    }
}

/// Sweep, fronts, classification and invariants. Numerical failures after the
/// sweep are recorded in a partial report instead of aborting.
pub fn analyze(pair: &HamiltonianPair, cfg: &RunConfig) -> Result<Analysis> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let mut opts = cfg.options();
    opts.bands = opts.bands.min(pair.dim());
    let sw = sweep(pair, &grid, &opts)?;
    let mut warnings = Vec::new();
    let mut partial = false;

    let gap = if sw.dim >= 2 && sw.n_bands() >= 2 {
        match topology::classify(&sw, cfg.window) {
            Ok(g) => Some(g),
            Err(e) if e.is_numerical() => {
                warnings.push(format!("classification failed: {e}"));
                partial = true;
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        warnings.push("fewer than two bands: no gap analysis".into());
        None
    };

    let mut fronts = Vec::new();
    for k in 0..sw.n_bands() {
        match curves::front(&sw, k) {
            Ok(f) => fronts.push(f),
            Err(e) if e.is_numerical() => {
                warnings.push(format!("front of band {} failed: {e}", k + 1));
                partial = true;
            }
            Err(e) => return Err(e),
        }
    }
    for f in &fronts {
        if !f.excluded_roots.is_empty() {
            warnings.push(format!("{}: {} band switches at flagged samples", f.label, f.excluded_roots.len()));
        }
        if grid.periodic && !f.closed {
            warnings.push(format!("{} does not close over the period", f.label));
        }
    }
    let boundary = if grid.periodic { Some(curves::boundary(&sw)?) } else { None };
    let topology = if grid.periodic { Some(TopologyReport::from_fronts(&fronts)?) } else { None };

    let report = Report {
        problem: pair.family().to_string(),
        theta_star: gap.as_ref().map(|g| g.theta_star),
        min_gap: gap.as_ref().map(|g| g.min_gap),
        morphology: gap.as_ref().map(|g| g.morphology.as_str().to_string()),
        rho_roots: gap.as_ref().map(|g| g.rho_roots.clone()).unwrap_or_default(),
        tunneling: gap.as_ref().and_then(|g| g.tunneling.as_ref()).map(|t| TunnelingSummary {
            flag: t.flag,
            ground_max: t.ground_max,
            barrier_top: t.barrier_top,
        }),
        invariants: topology.as_ref().map(invariants_map).unwrap_or_default(),
        linking: topology.as_ref().map(|t| t.linking.clone()).unwrap_or_default(),
        gap: gap.clone(),
        warnings: {
            if let Some(t) = &topology {
                warnings.extend(low_confidence_warnings(t));
            }
            warnings
        },
        partial,
    };
    Ok(Analysis { sweep: sw, gap, fronts, boundary, topology, report })
}

pub fn report_json(r: &Report) -> Result<String> {
    Ok(serde_json::to_string_pretty(r)? + "\n")
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Sweep table: θ, then λ, λ′, ρ and the sorted level of every tracked band, then the gap.
pub fn write_sweep_csv<W: std::io::Write>(sw: &SpectralSweep, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["theta".to_string()];
    for k in 1..=sw.n_bands() {
        header.extend([format!("lambda_{k}"), format!("dlambda_{k}"), format!("rho_{k}"), format!("level_{k}")]);
    }
    header.push("gap".into());
    w.write_record(&header).map_err(csv_err)?;
    for j in 0..sw.len() {
        let mut rec = vec![num(sw.theta(j))];
        for k in 0..sw.n_bands() {
            rec.extend([num(sw.bands[k][j]), num(sw.dlambda[k][j]), num(sw.rho[k][j]), sw.level_index[k][j].to_string()]);
        }
        let gap = if sw.dim >= 2 { num(sw.levels[j][1] - sw.levels[j][0]) } else { String::new() };
        rec.push(gap);
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
    left: f64,
    top: f64,
    h: f64,
}

impl Frame {
    fn new(xr: (f64, f64), yr: (f64, f64), left: f64, top: f64, w: f64, h: f64, equal: bool) -> Self {
        let pad = |r: (f64, f64)| {
            let d = (r.1 - r.0).max(1e-9);
            (r.0 - 0.05 * d, r.1 + 0.05 * d)
        };
        let (xr, yr) = (pad(xr), pad(yr));
        let mut sx = w / (xr.1 - xr.0);
        let mut sy = h / (yr.1 - yr.0);
        if equal {
            sx = sx.min(sy);
            sy = sx;
        }
        Self { x0: xr.0, y0: yr.0, sx, sy, left, top, h }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        (self.left + (x - self.x0) * self.sx, self.top + self.h - (y - self.y0) * self.sy)
    }

    fn path(&self, pts: &[[f64; 2]], closed: bool) -> String {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.px(p[0], p[1]);
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, x, y);
        }
        if closed {
            d.push_str(" Z");
        }
        d
    }
}

fn bounds(pts: impl Iterator<Item = [f64; 2]>) -> ((f64, f64), (f64, f64)) {
    let mut b = ((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY));
    for p in pts.filter(|p| p[0].is_finite() && p[1].is_finite()) {
        b.0 .0 = b.0 .0.min(p[0]);
        b.0 .1 = b.0 .1.max(p[0]);
        b.1 .0 = b.1 .0.min(p[1]);
        b.1 .1 = b.1 .1.max(p[1]);
    }
    if !b.0 .0.is_finite() {
        return ((-1.0, 1.0), (-1.0, 1.0));
    }
    b
}

const PI_LABELS: [&str; 9] = ["0", "π/4", "π/2", "3π/4", "π", "5π/4", "3π/2", "7π/4", "2π"];

/// Two panels: fronts in the plane (boundary, interior fronts, cusps, tail
/// crossings) and the bands against θ with ticks at multiples of π/4.
pub fn render_svg(a: &Analysis) -> String {
    let (w, h) = (1000.0, 480.0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let mut all: Vec<[f64; 2]> = a.fronts.iter().flat_map(|f| f.points()).collect();
    if let Some(b) = &a.boundary {
        all.extend(b.front.points());
    }
    let (xr, yr) = bounds(all.into_iter());
    let fr = Frame::new(xr, yr, 30.0, 30.0, 420.0, 420.0, true);
    let _ = writeln!(s, r#"<text x="30" y="20">fronts</text>"#);
    for f in &a.fronts {
        let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#4477aa" stroke-width="0.8"/>"##, fr.path(&f.points(), f.closed));
    }
    if let Some(b) = &a.boundary {
        let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#000000" stroke-width="1.6"/>"##, fr.path(&b.front.points(), true));
    }
    for f in &a.fronts {
        for c in &f.cusps {
            let (x, y) = fr.px(c.x, c.y);
            let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="#cc3311"/>"##);
        }
        for t in curves::swallow_tails(f, None) {
            if let Some(c) = t.crossing {
                let (x, y) = fr.px(c.point[0], c.point[1]);
                let _ = writeln!(
                    s,
                    r##"<path d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}" stroke="#009988" stroke-width="1.4"/>"##,
                    x - 4.0, y - 4.0, x + 4.0, y + 4.0, x - 4.0, y + 4.0, x + 4.0, y - 4.0
                );
            }
        }
    }

    let sw = &a.sweep;
    let th: Vec<f64> = sw.grid.samples.clone();
    let trange = (sw.grid.start, sw.grid.end);
    let (_, lr) = bounds(sw.bands.iter().flat_map(|b| b.iter().map(|&v| [0.0, v])));
    let fb = Frame::new(trange, lr, 540.0, 30.0, 430.0, 400.0, false);
    let _ = writeln!(s, r#"<text x="540" y="20">bands</text>"#);
    for b in &sw.bands {
        let pts: Vec<[f64; 2]> = th.iter().zip(b).map(|(&t, &v)| [t, v]).collect();
        let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#4477aa" stroke-width="0.8"/>"##, fb.path(&pts, false));
    }
    let (_, ybase) = fb.px(trange.0, fb.y0);
    for (i, label) in PI_LABELS.iter().enumerate() {
        let t = i as f64 * PI / 4.0;
        if t < trange.0 - 1e-9 || t > trange.1 + 1e-9 {
            continue;
        }
        let (x, _) = fb.px(t, 0.0);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{ybase:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000000"/>"##, ybase + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, ybase + 18.0);
    }
    if let Some(g) = &a.gap {
        let (x, _) = fb.px(g.theta_star, 0.0);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="30" x2="{x:.2}" y2="{ybase:.2}" stroke="#ee7733" stroke-dasharray="4 3"/>"##);
        let _ = writeln!(s, r#"<text x="{:.2}" y="44">θ* ({})</text>"#, x + 4.0, g.morphology.as_str());
    }
    s.push_str("</svg>\n");
    s
}

/// SVG of free-standing fronts (fixtures), same styling as the analysis figure.
pub fn render_fronts_svg(fronts: &[FrontCurve]) -> String {
    let (w, h) = (480.0, 480.0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (xr, yr) = bounds(fronts.iter().flat_map(|f| f.points()));
    let fr = Frame::new(xr, yr, 30.0, 30.0, 420.0, 420.0, true);
    for f in fronts {
        let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#4477aa" stroke-width="1"/>"##, fr.path(&f.points(), f.closed));
        for c in &f.cusps {
            let (x, y) = fr.px(c.x, c.y);
            let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="#cc3311"/>"##);
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Writes the requested formats into the output directory and returns the paths.
pub fn write_outputs(a: &Analysis, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in formats {
        match f {
            Format::Csv => {
                let p = dir.join("sweep.csv");
                write_sweep_csv(&a.sweep, fs::File::create(&p)?)?;
                written.push(p);
            }
            Format::Json => {
                let p = dir.join("report.json");
                fs::write(&p, report_json(&a.report)?)?;
                written.push(p);
                let p = dir.join("fronts.json");
                fs::write(&p, serde_json::to_string_pretty(&a.tables())? + "\n")?;
                written.push(p);
            }
            Format::Svg => {
                let p = dir.join("figure.svg");
                fs::write(&p, render_svg(a))?;
                written.push(p);
            }
        }
    }
    Ok(written)
}
