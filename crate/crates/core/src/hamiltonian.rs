//! Problem families: transverse field, Hamming weight with a rectangular
//! barrier, y-field perturbation, Grover pair, diagonal pair, unfolding
//! family and random pairs.

use crate::error::{Error, Result};
use crate::linalg::{kron_embed, random_hermitian, ComplexMatrix, HermitianMatrix, UniformStream, C64};
use serde::{Deserialize, Serialize};

pub const MAX_SITES: usize = 12;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// ½(I − σˣ)
pub fn sx() -> HermitianMatrix {
    HermitianMatrix::symmetrized(
        &ComplexMatrix::from_rows(&[vec![c(0.5, 0.0), c(-0.5, 0.0)], vec![c(-0.5, 0.0), c(0.5, 0.0)]]).unwrap(),
    )
}

/// ½(I − σᶻ)
pub fn sz() -> HermitianMatrix {
    HermitianMatrix::from_real_diag(&[0.0, 1.0])
}

/// ½(I − σʸ)
pub fn sy() -> HermitianMatrix {
    HermitianMatrix::symmetrized(
        &ComplexMatrix::from_rows(&[vec![c(0.5, 0.0), c(0.0, 0.5)], vec![c(0.0, -0.5), c(0.5, 0.0)]]).unwrap(),
    )
}

fn check_sites(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SITES {
        return Err(Error::InvalidArgument(format!("site count {n} outside 1..={MAX_SITES}")));
    }
    Ok(())
}

fn site_sum(op: &HermitianMatrix, n: usize) -> Result<HermitianMatrix> {
    check_sites(n)?;
    let mut acc = HermitianMatrix::zeros(1 << n);
    for i in 1..=n {
        acc = acc.add(&kron_embed(op, i, n)?);
    }
    Ok(acc)
}

/// Σᵢ Sˣᵢ
pub fn transverse_field(n: usize) -> Result<HermitianMatrix> {
    site_sum(&sx(), n)
}

/// Σᵢ Sᶻᵢ: diagonal with the Hamming weight of each basis state.
pub fn hamming_weight(n: usize) -> Result<HermitianMatrix> {
    check_sites(n)?;
    let d: Vec<f64> = (0..1usize << n).map(|x| x.count_ones() as f64).collect();
    Ok(HermitianMatrix::from_real_diag(&d))
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n - i) as u64 / (i + 1) as u64;
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub n: usize,
    pub l: usize,
    pub u: usize,
    pub h: f64,
}

impl BarrierSpec {
    pub fn new(n: usize, l: usize, u: usize, h: f64) -> Result<Self> {
        let s = Self { n, l, u, h };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_sites(self.n)?;
        if !(self.l <= self.u && self.u <= self.n) {
            return Err(Error::InvalidArgument(format!(
                "barrier bounds need 0 ≤ l ≤ u ≤ n, got l={}, u={}, n={}",
                self.l, self.u, self.n
            )));
        }
        if !(self.h >= 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidArgument(format!("barrier height {} must be finite and ≥ 0", self.h)));
        }
        Ok(())
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.l + self.u) as f64
    }

    /// p(w): h on the plateau ℓ ≤ w ≤ u, zero elsewhere.
    pub fn profile(&self, w: usize) -> f64 {
        if self.l <= w && w <= self.u {
            self.h
        } else {
            0.0
        }
    }

    /// Top of the plateau in objective energy, u + h.
    pub fn plateau_top(&self) -> f64 {
        self.u as f64 + self.h
    }
}

/// h·½(sign(H_w − (ℓ−½)I) − sign(H_w − (u+½)I)), which is h exactly on weights ℓ..=u.
pub fn barrier_sign(spec: &BarrierSpec) -> Result<HermitianMatrix> {
    spec.validate()?;
    let hw = hamming_weight(spec.n)?;
    let lo = crate::linalg::matrix_sign(&hw.shift(-(spec.l as f64 - 0.5)), crate::linalg::SignMethod::Spectral)?;
    let hi = crate::linalg::matrix_sign(&hw.shift(-(spec.u as f64 + 0.5)), crate::linalg::SignMethod::Spectral)?;
    Ok(HermitianMatrix::combine(0.5 * spec.h, &lo, -0.5 * spec.h, &hi))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LagrangeMode {
    /// Interpolates p at every weight 0..=n.
    #[default]
    FullNodes,
    /// Zero at every weight outside [ℓ, u], h at the midpoint m = (ℓ+u)/2.
    Midpoint,
}

#[derive(Clone, Debug)]
pub struct LagrangeBarrier {
    pub matrix: HermitianMatrix,
    /// p̃(w) for w = 0..=n.
    pub values: Vec<f64>,
    /// max over plateau weights of |p̃(w) − h|.
    pub eps_poly: f64,
}

fn lagrange_eval(nodes: &[(f64, f64)], x: f64) -> f64 {
    let mut total = 0.0;
    for (i, &(xi, yi)) in nodes.iter().enumerate() {
        if yi == 0.0 {
            continue;
        }
        let mut basis = 1.0;
        for (j, &(xj, _)) in nodes.iter().enumerate() {
            if i != j {
                basis *= (x - xj) / (xi - xj);
            }
        }
        total += yi * basis;
    }
    total
}

pub fn barrier_lagrange(spec: &BarrierSpec, mode: LagrangeMode) -> Result<LagrangeBarrier> {
    spec.validate()?;
    let n = spec.n;
    let nodes: Vec<(f64, f64)> = match mode {
        LagrangeMode::FullNodes => (0..=n).map(|w| (w as f64, spec.profile(w))).collect(),
        LagrangeMode::Midpoint => {
            let mut v: Vec<(f64, f64)> =
                (0..=n).filter(|&w| w < spec.l || w > spec.u).map(|w| (w as f64, 0.0)).collect();
            v.push((spec.midpoint(), spec.h));
            v
        }
    };
    for (i, a) in nodes.iter().enumerate() {
        if nodes[..i].iter().any(|b| b.0 == a.0) {
            return Err(Error::Degenerate(format!("repeated interpolation node {}", a.0)));
        }
    }
    let values: Vec<f64> = (0..=n).map(|w| lagrange_eval(&nodes, w as f64)).collect();
    let eps_poly = (spec.l..=spec.u).map(|w| (values[w] - spec.h).abs()).fold(0.0, f64::max);
    let diag: Vec<f64> = (0..1usize << n).map(|x| values[x.count_ones() as usize]).collect();
    Ok(LagrangeBarrier { matrix: HermitianMatrix::from_real_diag(&diag), values, eps_poly })
}

/// ε Σᵢ rᵢ Sʸᵢ with rᵢ uniform on [−1, 1) from the seeded stream, drawn in site order.
pub fn y_perturbation(n: usize, eps: f64, seed: u64) -> Result<HermitianMatrix> {
    check_sites(n)?;
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("ε = {eps} must be ≥ 0")));
    }
    let mut acc = HermitianMatrix::zeros(1 << n);
    if eps == 0.0 {
        return Ok(acc);
    }
    let mut stream = UniformStream::new(seed);
    let s = sy();
    for i in 1..=n {
        let r = stream.next();
        acc = HermitianMatrix::combine(1.0, &acc, eps * r, &kron_embed(&s, i, n)?);
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct HamiltonianPair {
    pub h0: HermitianMatrix,
    pub h1: HermitianMatrix,
    /// The recipe this pair was built from, if any.
    pub spec: Option<ProblemSpec>,
}

impl HamiltonianPair {
    pub fn new(h0: HermitianMatrix, h1: HermitianMatrix, spec: Option<ProblemSpec>) -> Result<Self> {
        if h0.dim() != h1.dim() {
            return Err(Error::DimensionMismatch(format!("H0 is {}, H1 is {}", h0.dim(), h1.dim())));
        }
        Ok(Self { h0, h1, spec })
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn family(&self) -> &'static str {
        self.spec.as_ref().map(|s| s.family()).unwrap_or("explicit")
    }

    pub fn barrier(&self) -> Option<BarrierSpec> {
        match &self.spec {
            Some(ProblemSpec::HammingBarrier { n, l, u, h, .. }) => Some(BarrierSpec { n: *n, l: *l, u: *u, h: *h }),
            _ => None,
        }
    }
}

pub fn hamming_plus_barrier(spec: &BarrierSpec, eps: f64, seed: u64) -> Result<HamiltonianPair> {
    spec.validate()?;
    let h0 = transverse_field(spec.n)?;
    let h1 = hamming_weight(spec.n)?.add(&barrier_sign(spec)?).add(&y_perturbation(spec.n, eps, seed)?);
    let recipe = ProblemSpec::HammingBarrier { n: spec.n, l: spec.l, u: spec.u, h: spec.h, eps, seed };
    HamiltonianPair::new(h0, h1, Some(recipe))
}

/// H₀ = I − |a⟩⟨a|, H₁ = I − |b⟩⟨b|.
pub fn grover_pair(a: &[C64], b: &[C64]) -> Result<HamiltonianPair> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!("|a| has {} entries, |b| has {}", n, b.len())));
    }
    if n < 3 {
        return Err(Error::InvalidArgument("Grover pair needs N ≥ 3".into()));
    }
    for (name, v) in [("a", a), ("b", b)] {
        let norm = crate::linalg::vec_norm(v);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("|{name}| has norm {norm}, expected 1")));
        }
    }
    if crate::linalg::inner(a, b).norm() > 1.0 - 1e-12 {
        return Err(Error::InvalidArgument("a and b must not be parallel".into()));
    }
    let proj_complement = |v: &[C64]| {
        HermitianMatrix::symmetrized(&ComplexMatrix::from_fn(n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            c(delta, 0.0) - v[i] * v[j].conj()
        }))
    };
    HamiltonianPair::new(proj_complement(a), proj_complement(b), None)
}

/// Grover search instance: |a⟩ uniform superposition, |b⟩ a marked basis state.
pub fn grover_search(dim: usize, marked: usize) -> Result<HamiltonianPair> {
    if marked >= dim {
        return Err(Error::InvalidArgument(format!("marked state {marked} outside 0..{dim}")));
    }
    let a = vec![c(1.0 / (dim as f64).sqrt(), 0.0); dim];
    let mut b = vec![c(0.0, 0.0); dim];
    b[marked] = c(1.0, 0.0);
    let mut pair = grover_pair(&a, &b)?;
    pair.spec = Some(ProblemSpec::Grover { dim, marked });
    Ok(pair)
}

pub fn diagonal_pair(a: &[f64], b: &[f64]) -> Result<HamiltonianPair> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} diagonal entries", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("empty diagonal".into()));
    }
    HamiltonianPair::new(
        HermitianMatrix::from_real_diag(a),
        HermitianMatrix::from_real_diag(b),
        Some(ProblemSpec::Diagonal { a: a.to_vec(), b: b.to_vec() }),
    )
}

/// Two independent random Hermitian matrices derived from one seed.
pub fn random_pair(dim: usize, seed: u64) -> Result<HamiltonianPair> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let h0 = random_hermitian(dim, seed.wrapping_mul(2));
    let h1 = random_hermitian(dim, seed.wrapping_mul(2).wrapping_add(1));
    HamiltonianPair::new(h0, h1, Some(ProblemSpec::Random { dim, seed }))
}

/// Adds ε·R₀ and ε·R₁ to the endpoints, with Rᵢ random Hermitian of unit Frobenius norm.
pub fn perturb(pair: &HamiltonianPair, eps: f64, seed: u64) -> Result<HamiltonianPair> {
    let n = pair.dim();
    let r0 = random_hermitian(n, seed.wrapping_mul(2).wrapping_add(1000));
    let r1 = random_hermitian(n, seed.wrapping_mul(2).wrapping_add(1001));
    let h0 = HermitianMatrix::combine(1.0, &pair.h0, eps / r0.norm_fro(), &r0);
    let h1 = HermitianMatrix::combine(1.0, &pair.h1, eps / r1.norm_fro(), &r1);
    HamiltonianPair::new(h0, h1, None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnfoldingSpec {
    pub mu1: [f64; 2],
    pub mu2: [f64; 2],
    pub mu12: [f64; 2],
    /// First-row coupling to the S₃₃ block, one entry per column of S₃₃.
    pub s13: Vec<[f64; 2]>,
    /// Second-row coupling to the S₃₃ block.
    pub s23: Vec<[f64; 2]>,
    /// Upper-triangular block, row-major.
    pub s33: Vec<Vec<[f64; 2]>>,
    pub eps: f64,
}

impl Default for UnfoldingSpec {
    fn default() -> Self {
        Self {
            mu1: [0.0, 0.0],
            mu2: [0.0, 1.0],
            mu12: [1.0, 0.0],
            s13: vec![[1.0, 0.0]; 2],
            s23: vec![[1.0, 0.0]; 2],
            s33: vec![vec![[0.5, 0.5], [0.0, 0.0]], vec![[0.0, 0.0], [0.7, 0.3]]],
            eps: 0.0,
        }
    }
}

impl UnfoldingSpec {
    pub fn with_eps(eps: f64) -> Self {
        Self { eps, ..Self::default() }
    }

    /// The upper-triangular S̃.
    pub fn schur_matrix(&self) -> Result<ComplexMatrix> {
        let k = self.s33.len();
        if self.s13.len() != k || self.s23.len() != k || self.s33.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch("coupling blocks must match S33".into()));
        }
        if self.mu1 == self.mu2 {
            return Err(Error::InvalidArgument("μ1 and μ2 must differ".into()));
        }
        if !(self.eps >= 0.0) {
            return Err(Error::InvalidArgument(format!("ε = {} must be ≥ 0", self.eps)));
        }
        for i in 0..k {
            for j in 0..i {
                if self.s33[i][j] != [0.0, 0.0] {
                    return Err(Error::InvalidArgument("S33 must be upper triangular".into()));
                }
            }
        }
        let z = |p: [f64; 2]| c(p[0], p[1]);
        let n = k + 2;
        let mut s = ComplexMatrix::zeros(n);
        s[(0, 0)] = z(self.mu1);
        s[(1, 1)] = z(self.mu2);
        s[(0, 1)] = z(self.mu12) * self.eps;
        for j in 0..k {
            s[(0, 2 + j)] = z(self.s13[j]) * self.eps;
            s[(1, 2 + j)] = z(self.s23[j]) * self.eps;
            for i in 0..k {
                s[(2 + i, 2 + j)] = z(self.s33[i][j]);
            }
        }
        Ok(s)
    }
}

/// H₀ = (S̃ + S̃*)/2, H₁ = (S̃ − S̃*)/(2i), so that H₀ + iH₁ = S̃.
pub fn unfolding_family(spec: &UnfoldingSpec) -> Result<HamiltonianPair> {
    let s = spec.schur_matrix()?;
    let sa = s.adjoint();
    let h0 = HermitianMatrix::symmetrized(&(&s + &sa).scale_real(0.5));
    let h1 = HermitianMatrix::symmetrized(&(&s - &sa).scale(c(0.0, -0.5)));
    HamiltonianPair::new(h0, h1, Some(ProblemSpec::Unfolding(spec.clone())))
}

/// Serializable recipe for every supported family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ProblemSpec {
    HammingBarrier {
        n: usize,
        l: usize,
        u: usize,
        h: f64,
        eps: f64,
        seed: u64,
    },
    Grover {
        dim: usize,
        marked: usize,
    },
    Unfolding(UnfoldingSpec),
    Diagonal {
        a: Vec<f64>,
        b: Vec<f64>,
    },
    Random {
        dim: usize,
        seed: u64,
    },
}

impl ProblemSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ProblemSpec::HammingBarrier { .. } => "hamming-barrier",
            ProblemSpec::Grover { .. } => "grover",
            ProblemSpec::Unfolding(_) => "unfolding",
            ProblemSpec::Diagonal { .. } => "diagonal",
            ProblemSpec::Random { .. } => "random",
        }
    }

    pub fn build(&self) -> Result<HamiltonianPair> {
        match self {
            ProblemSpec::HammingBarrier { n, l, u, h, eps, seed } => {
                hamming_plus_barrier(&BarrierSpec::new(*n, *l, *u, *h)?, *eps, *seed)
            }
            ProblemSpec::Grover { dim, marked } => grover_search(*dim, *marked),
            ProblemSpec::Unfolding(s) => unfolding_family(s),
            ProblemSpec::Diagonal { a, b } => diagonal_pair(a, b),
            ProblemSpec::Random { dim, seed } => random_pair(*dim, *seed),
        }
    }
}
