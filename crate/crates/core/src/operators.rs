//! Annealing Hamiltonians
//!
//! `H(τ) = a(τ)·H_B + b(τ)·H_I + c(τ)·H_P` with `H_B = Σ σˣ_i`,
//! `H_I = Σ_{i<j} s_ij σˣ_i σˣ_j` and `H_P` the diagonal Ising cost. The
//! schedule is `a = 1 − τ`, `b = λ τ (1 − τ)`, `c = τ`; the plain
//! transverse-field annealer has no `H_I` term.
//!
//! Two application routes are provided. [`AnnealingHamiltonian::apply`]
//! rotates into the `σˣ` eigenbasis with a Walsh–Hadamard transform, where
//! both driver terms are diagonal, and costs `O(n·2^n)`.
//! [`AnnealingHamiltonian::apply_bitflip`] walks the single and pair flips
//! directly in `O(n²·2^n)` and serves as the reference.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AnnealError, Result};
use crate::instance::{pair_count, pairs, ProblemInstance};
use crate::rng::DisorderStream;

pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_TOTAL_TIME: f64 = 100.0;

/// Largest spin count for dense materialization.
pub const MAX_DENSE_SPINS: usize = 12;

/// Off-diagonal entries at or below this value count as non-positive.
pub const STOQUASTIC_TOL: f64 = 1e-14;

/// Label of an annealing Hamiltonian family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DriverKind {
    /// Transverse field only.
    #[serde(rename = "0")]
    None,
    #[serde(rename = "F")]
    Ferro,
    #[serde(rename = "A")]
    Antiferro,
    #[serde(rename = "M")]
    Mixed,
}

impl DriverKind {
    pub const ALL: [DriverKind; 4] = [
        DriverKind::None,
        DriverKind::Ferro,
        DriverKind::Antiferro,
        DriverKind::Mixed,
    ];

    /// The three drivers with coupled `σˣσˣ` terms, in tie-break priority.
    pub const COUPLED: [DriverKind; 3] = [DriverKind::Ferro, DriverKind::Antiferro, DriverKind::Mixed];

    pub fn label(self) -> &'static str {
        match self {
            DriverKind::None => "0",
            DriverKind::Ferro => "F",
            DriverKind::Antiferro => "A",
            DriverKind::Mixed => "M",
        }
    }
}

impl fmt::Display for DriverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DriverKind {
    type Err = AnnealError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" | "none" | "None" => Ok(DriverKind::None),
            "F" | "f" | "ferro" => Ok(DriverKind::Ferro),
            "A" | "a" | "antiferro" => Ok(DriverKind::Antiferro),
            "M" | "m" | "mixed" => Ok(DriverKind::Mixed),
            other => Err(AnnealError::InvalidArgument(format!("unknown driver `{other}`"))),
        }
    }
}

/// Random `r_ij ∈ {−1, +1}` signs of the mixed driver, one per pair in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedSigns {
    n: usize,
    seed: u64,
    signs: Vec<i8>,
}

impl MixedSigns {
    pub fn generate(n: usize, seed: u64) -> Self {
        let mut stream = DisorderStream::new(seed);
        let signs = (0..pair_count(n)).map(|_| stream.next_sign()).collect();
        Self { n, seed, signs }
    }

    pub fn from_signs(n: usize, seed: u64, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != pair_count(n) {
            return Err(AnnealError::InvalidArgument(format!(
                "mixed driver on {n} spins needs {} signs, got {}",
                pair_count(n),
                signs.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(AnnealError::InvalidArgument("mixed signs must be ±1".into()));
        }
        Ok(Self { n, seed, signs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn positive_count(&self) -> usize {
        self.signs.iter().filter(|&&s| s > 0).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Driver {
    None,
    Ferro,
    Antiferro,
    Mixed(MixedSigns),
}

impl Driver {
    pub fn kind(&self) -> DriverKind {
        match self {
            Driver::None => DriverKind::None,
            Driver::Ferro => DriverKind::Ferro,
            Driver::Antiferro => DriverKind::Antiferro,
            Driver::Mixed(_) => DriverKind::Mixed,
        }
    }

    /// Builds the driver for `kind`; the mixed driver draws its signs from
    /// `mixed_seed`.
    pub fn from_kind(kind: DriverKind, n: usize, mixed_seed: u64) -> Self {
        match kind {
            DriverKind::None => Driver::None,
            DriverKind::Ferro => Driver::Ferro,
            DriverKind::Antiferro => Driver::Antiferro,
            DriverKind::Mixed => Driver::Mixed(MixedSigns::generate(n, mixed_seed)),
        }
    }

    /// Pair signs `s_ij` of `H_I`, empty for the transverse-field annealer.
    pub fn pair_signs(&self, n: usize) -> Result<Vec<f64>> {
        Ok(match self {
            Driver::None => Vec::new(),
            Driver::Ferro => vec![-1.0; pair_count(n)],
            Driver::Antiferro => vec![1.0; pair_count(n)],
            Driver::Mixed(m) => {
                if m.n != n {
                    return Err(AnnealError::InvalidArgument(format!(
                        "mixed signs drawn for {} spins used with {n}",
                        m.n
                    )));
                }
                m.signs.iter().map(|&s| s as f64).collect()
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnealSpec {
    pub driver: Driver,
    pub lambda: f64,
    pub total_time: f64,
}

impl AnnealSpec {
    pub fn new(driver: Driver, lambda: f64, total_time: f64) -> Result<Self> {
        let spec = Self {
            driver,
            lambda,
            total_time,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `λ = 1`, `T = 100`.
    pub fn with_driver(driver: Driver) -> Self {
        Self {
            driver,
            lambda: DEFAULT_LAMBDA,
            total_time: DEFAULT_TOTAL_TIME,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(AnnealError::InvalidArgument(format!(
                "total annealing time must be positive, got {}",
                self.total_time
            )));
        }
        if !self.lambda.is_finite() {
            return Err(AnnealError::InvalidArgument("lambda must be finite".into()));
        }
        Ok(())
    }
}

/// Coefficients of `H_B`, `H_I` and `H_P` at one schedule point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleCoeffs {
    pub transverse: f64,
    pub coupled: f64,
    pub problem: f64,
}

pub fn schedule_coeffs(tau: f64, spec: &AnnealSpec) -> Result<ScheduleCoeffs> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(AnnealError::InvalidArgument(format!("tau = {tau} outside [0, 1]")));
    }
    let coupled = match spec.driver {
        Driver::None => 0.0,
        _ => spec.lambda * tau * (1.0 - tau),
    };
    Ok(ScheduleCoeffs {
        transverse: 1.0 - tau,
        coupled,
        problem: tau,
    })
}

/// State of `n` spins as `2^n` complex amplitudes over the `σᶻ` basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1usize << n {
            return Err(AnnealError::InvalidArgument(format!(
                "state on {n} spins needs {} amplitudes, got {}",
                1usize << n,
                amplitudes.len()
            )));
        }
        Ok(Self { n, amplitudes })
    }

    pub fn basis(n: usize, config: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[config] = Complex64::new(1.0, 0.0);
        Self { n, amplitudes }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// In-place unnormalized Walsh–Hadamard transform; applying it twice
/// multiplies by the length.
pub(crate) fn walsh_hadamard<T>(v: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let len = v.len();
    let mut half = 1;
    while half < len {
        for block in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        half *= 2;
    }
}

/// Matrix-free `H(τ)` for one instance and annealing spec.
///
/// Holds the classical energy table of `H_P` and the `σˣ`-basis spectra of
/// `H_B` and `H_I`, each of length `2^n`.
#[derive(Clone, Debug)]
pub struct AnnealingHamiltonian {
    n: usize,
    spec: AnnealSpec,
    problem_diag: Vec<f64>,
    /// `Σ_i x_i` with `x_i = ±1` in the `σˣ` basis.
    transverse_x: Vec<f64>,
    /// `Σ_{i<j} s_ij x_i x_j` in the `σˣ` basis; empty without coupled terms.
    coupled_x: Vec<f64>,
    pair_signs: Vec<f64>,
}

impl AnnealingHamiltonian {
    pub fn new(inst: &ProblemInstance, spec: &AnnealSpec) -> Result<Self> {
        spec.validate()?;
        let n = inst.n();
        let dim = inst.dim();
        let pair_signs = spec.driver.pair_signs(n)?;
        let transverse_x = (0..dim).map(|k| n as f64 - 2.0 * k.count_ones() as f64).collect();
        let coupled_x = match spec.driver {
            Driver::None => Vec::new(),
            Driver::Ferro | Driver::Antiferro => {
                // Σ_{i<j} x_i x_j = ((Σ x_i)² − n) / 2
                let sign = pair_signs.first().copied().unwrap_or(1.0);
                (0..dim)
                    .map(|k| {
                        let m = n as f64 - 2.0 * k.count_ones() as f64;
                        sign * (m * m - n as f64) / 2.0
                    })
                    .collect()
            }
            Driver::Mixed(_) => (0..dim)
                .map(|k| {
                    pairs(n)
                        .zip(&pair_signs)
                        .map(|((i, j), &s)| if (k >> i ^ k >> j) & 1 == 0 { s } else { -s })
                        .sum()
                })
                .collect(),
        };
        Ok(Self {
            n,
            spec: spec.clone(),
            problem_diag: inst.energy_table(),
            transverse_x,
            coupled_x,
            pair_signs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn spec(&self) -> &AnnealSpec {
        &self.spec
    }

    /// Classical energies indexed by configuration.
    pub fn problem_diagonal(&self) -> &[f64] {
        &self.problem_diag
    }

    pub fn coeffs(&self, tau: f64) -> Result<ScheduleCoeffs> {
        schedule_coeffs(tau, &self.spec)
    }

    fn check_dims(&self, input: usize, output: usize) -> Result<()> {
        if input != self.dim() || output != self.dim() {
            return Err(AnnealError::InvalidArgument(format!(
                "vector length {input}/{output} does not match dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// `out = (H(τ) − shift)·input` through the Walsh–Hadamard route.
    /// `scratch` must have the same length as the state.
    pub fn apply_shifted<T>(
        &self,
        coeffs: ScheduleCoeffs,
        shift: f64,
        input: &[T],
        out: &mut [T],
        scratch: &mut [T],
    ) -> Result<()>
    where
        T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        self.check_dims(input.len(), out.len())?;
        self.check_dims(scratch.len(), scratch.len())?;
        let inv_dim = 1.0 / self.dim() as f64;
        scratch.copy_from_slice(input);
        walsh_hadamard(scratch);
        let a = coeffs.transverse * inv_dim;
        let b = coeffs.coupled * inv_dim;
        if self.coupled_x.is_empty() || coeffs.coupled == 0.0 {
            for (x, &d) in scratch.iter_mut().zip(&self.transverse_x) {
                *x = *x * (a * d);
            }
        } else {
            for ((x, &d), &e) in scratch.iter_mut().zip(&self.transverse_x).zip(&self.coupled_x) {
                *x = *x * (a * d + b * e);
            }
        }
        walsh_hadamard(scratch);
        let c = coeffs.problem;
        for ((o, &x), (&s, &p)) in out
            .iter_mut()
            .zip(input.iter())
            .zip(scratch.iter().zip(&self.problem_diag))
        {
            *o = s + x * (c * p - shift);
        }
        Ok(())
    }

    /// `H(τ)·ψ` through the Walsh–Hadamard route.
    pub fn apply(&self, tau: f64, psi: &StateVector) -> Result<StateVector> {
        let coeffs = self.coeffs(tau)?;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; psi.dim()];
        let mut scratch = vec![zero; psi.dim()];
        self.apply_shifted(coeffs, 0.0, psi.amplitudes(), &mut out, &mut scratch)?;
        StateVector::new(self.n, out)
    }

    /// `H(τ)·ψ` by explicit single and pair spin flips.
    pub fn apply_bitflip(&self, tau: f64, psi: &StateVector) -> Result<StateVector> {
        let coeffs = self.coeffs(tau)?;
        self.check_dims(psi.dim(), psi.dim())?;
        let input = psi.amplitudes();
        let mut out: Vec<Complex64> = input
            .iter()
            .zip(&self.problem_diag)
            .map(|(&x, &e)| x * (coeffs.problem * e))
            .collect();
        if coeffs.transverse != 0.0 {
            for i in 0..self.n {
                let mask = 1usize << i;
                for (k, o) in out.iter_mut().enumerate() {
                    *o += input[k ^ mask] * coeffs.transverse;
                }
            }
        }
        if coeffs.coupled != 0.0 {
            for ((i, j), &s) in pairs(self.n).zip(&self.pair_signs) {
                let mask = (1usize << i) | (1usize << j);
                let w = coeffs.coupled * s;
                for (k, o) in out.iter_mut().enumerate() {
                    *o += input[k ^ mask] * w;
                }
            }
        }
        StateVector::new(self.n, out)
    }

    /// Dense real symmetric matrix of `H(τ)`, built entry by entry.
    pub fn dense(&self, tau: f64) -> Result<DMatrix<f64>> {
        if self.n > MAX_DENSE_SPINS {
            return Err(AnnealError::Capacity {
                what: "dense Hamiltonian",
                limit: MAX_DENSE_SPINS,
                n: self.n,
            });
        }
        let coeffs = self.coeffs(tau)?;
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            m[(k, k)] = coeffs.problem * self.problem_diag[k];
            for i in 0..self.n {
                m[(k ^ (1 << i), k)] += coeffs.transverse;
            }
            if coeffs.coupled != 0.0 {
                for ((i, j), &s) in pairs(self.n).zip(&self.pair_signs) {
                    m[(k ^ (1 << i) ^ (1 << j), k)] += coeffs.coupled * s;
                }
            }
        }
        Ok(m)
    }
}

/// `H(τ)·ψ` for one instance and spec.
pub fn apply_hamiltonian(
    psi: &StateVector,
    tau: f64,
    inst: &ProblemInstance,
    spec: &AnnealSpec,
) -> Result<StateVector> {
    if psi.n() != inst.n() {
        return Err(AnnealError::InvalidArgument(format!(
            "state has {} spins, instance has {}",
            psi.n(),
            inst.n()
        )));
    }
    AnnealingHamiltonian::new(inst, spec)?.apply(tau, psi)
}

pub fn build_dense(tau: f64, inst: &ProblemInstance, spec: &AnnealSpec) -> Result<DMatrix<f64>> {
    if inst.n() > MAX_DENSE_SPINS {
        return Err(AnnealError::Capacity {
            what: "dense Hamiltonian",
            limit: MAX_DENSE_SPINS,
            n: inst.n(),
        });
    }
    AnnealingHamiltonian::new(inst, spec)?.dense(tau)
}

/// Per-site signs `g_i = ±1` of a diagonal gauge transformation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gauge(Vec<i8>);

impl Gauge {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(AnnealError::InvalidArgument("gauge entries must be ±1".into()));
        }
        Ok(Self(signs))
    }

    pub fn uniform(n: usize, sign: i8) -> Self {
        Self(vec![if sign < 0 { -1 } else { 1 }; n])
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    /// Diagonal entry `Π_i g_i^{bit_i(config)}` of the gauge matrix.
    pub fn phase(&self, config: usize) -> f64 {
        let negative = self
            .0
            .iter()
            .enumerate()
            .filter(|&(i, &g)| g < 0 && config >> i & 1 == 1)
            .count();
        if negative % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl FromStr for Gauge {
    type Err = AnnealError;

    /// Accepts one `+` or `-` per site, e.g. `"--+-"`.
    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' | '−' => Ok(-1),
                other => Err(AnnealError::InvalidArgument(format!("invalid gauge character `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Gauge)
    }
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &g in &self.0 {
            f.write_str(if g > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StoquasticVerdict {
    pub stoquastic: bool,
    /// A positive off-diagonal entry `(row, col, value)` when the check fails.
    pub witness: Option<(usize, usize, f64)>,
}

/// `D·M·D` for the diagonal gauge matrix `D`.
pub fn conjugate_by_gauge(matrix: &DMatrix<f64>, gauge: &Gauge) -> DMatrix<f64> {
    let phases: Vec<f64> = (0..matrix.nrows()).map(|k| gauge.phase(k)).collect();
    DMatrix::from_fn(matrix.nrows(), matrix.ncols(), |r, c| phases[r] * matrix[(r, c)] * phases[c])
}

/// Sign check on a dense matrix with no gauge applied.
///
/// Among positive off-diagonal entries the witness is the one whose row and
/// column configurations differ in the most spins, first in row-major order.
/// Multi-spin-flip entries cannot all be removed by a gauge alongside the
/// single flips, so they are the more informative witnesses.
pub fn check_offdiagonal_signs(matrix: &DMatrix<f64>) -> StoquasticVerdict {
    let mut witness: Option<(usize, usize, f64)> = None;
    for r in 0..matrix.nrows() {
        for c in 0..matrix.ncols() {
            let v = matrix[(r, c)];
            if r == c || v <= STOQUASTIC_TOL {
                continue;
            }
            let better = match witness {
                None => true,
                Some((wr, wc, _)) => (r ^ c).count_ones() > (wr ^ wc).count_ones(),
            };
            if better {
                witness = Some((r, c, v));
            }
        }
    }
    StoquasticVerdict {
        stoquastic: witness.is_none(),
        witness,
    }
}

/// Whether every off-diagonal entry of `D·H(τ)·D` is non-positive.
pub fn is_stoquastic(
    tau: f64,
    inst: &ProblemInstance,
    spec: &AnnealSpec,
    gauge: &Gauge,
) -> Result<StoquasticVerdict> {
    if gauge.signs().len() != inst.n() {
        return Err(AnnealError::InvalidArgument(format!(
            "gauge has {} sites, instance has {}",
            gauge.signs().len(),
            inst.n()
        )));
    }
    let dense = build_dense(tau, inst, spec)?;
    Ok(check_offdiagonal_signs(&conjugate_by_gauge(&dense, gauge)))
}

/// Tries the two uniform gauges followed by `extra`, returning the first
/// gauge that certifies the sign condition and every verdict checked.
pub fn find_stoquastic_gauge(
    tau: f64,
    inst: &ProblemInstance,
    spec: &AnnealSpec,
    extra: &[Gauge],
) -> Result<(Option<Gauge>, Vec<(Gauge, StoquasticVerdict)>)> {
    let n = inst.n();
    let dense = build_dense(tau, inst, spec)?;
    let mut verdicts = Vec::new();
    for gauge in [Gauge::uniform(n, 1), Gauge::uniform(n, -1)]
        .into_iter()
        .chain(extra.iter().cloned())
    {
        if gauge.signs().len() != n {
            return Err(AnnealError::InvalidArgument(format!("gauge `{gauge}` has wrong length")));
        }
        let verdict = check_offdiagonal_signs(&conjugate_by_gauge(&dense, &gauge));
        let ok = verdict.stoquastic;
        verdicts.push((gauge.clone(), verdict));
        if ok {
            return Ok((Some(gauge), verdicts));
        }
    }
    Ok((None, verdicts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{classical_energy, generate_instance};

    fn spec(driver: Driver) -> AnnealSpec {
        AnnealSpec::with_driver(driver)
    }

    #[test]
    fn schedule_examples() {
        let s = spec(Driver::Ferro);
        let at = |t| schedule_coeffs(t, &s).unwrap();
        assert_eq!(at(0.0), ScheduleCoeffs { transverse: 1.0, coupled: 0.0, problem: 0.0 });
        assert_eq!(at(1.0), ScheduleCoeffs { transverse: 0.0, coupled: 0.0, problem: 1.0 });
        assert_eq!(at(0.5), ScheduleCoeffs { transverse: 0.5, coupled: 0.25, problem: 0.5 });
        assert_eq!(schedule_coeffs(0.5, &spec(Driver::None)).unwrap().coupled, 0.0);
        assert!(schedule_coeffs(1.5, &s).is_err());
        assert!(schedule_coeffs(-0.1, &s).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(AnnealSpec::new(Driver::None, 1.0, 0.0).is_err());
        assert!(AnnealSpec::new(Driver::None, f64::NAN, 10.0).is_err());
        assert!(AnnealSpec::new(Driver::None, 2.0, 10.0).is_ok());
    }

    #[test]
    fn problem_endpoint_is_diagonal() {
        let inst = generate_instance(5, 3).unwrap();
        let h = AnnealingHamiltonian::new(&inst, &spec(Driver::Antiferro)).unwrap();
        for config in [0, 7, 19, 31] {
            let out = h.apply(1.0, &StateVector::basis(5, config)).unwrap();
            let e = classical_energy(&inst, config);
            for (k, amp) in out.amplitudes().iter().enumerate() {
                let expect = if k == config { e } else { 0.0 };
                assert!((amp - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn routes_agree() {
        for (seed, driver) in [
            (1, Driver::None),
            (2, Driver::Ferro),
            (3, Driver::Antiferro),
            (4, Driver::Mixed(MixedSigns::generate(6, 11))),
        ] {
            let inst = generate_instance(6, seed).unwrap();
            let h = AnnealingHamiltonian::new(&inst, &spec(driver)).unwrap();
            let mut stream = DisorderStream::new(seed + 100);
            let amps = (0..64)
                .map(|_| Complex64::new(stream.next_gaussian(), stream.next_gaussian()))
                .collect();
            let psi = StateVector::new(6, amps).unwrap();
            for tau in [0.0, 0.3, 0.77, 1.0] {
                let fast = h.apply(tau, &psi).unwrap();
                let slow = h.apply_bitflip(tau, &psi).unwrap();
                for (a, b) in fast.amplitudes().iter().zip(slow.amplitudes()) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let inst = generate_instance(3, 1).unwrap();
        let psi = StateVector::basis(2, 0);
        assert!(apply_hamiltonian(&psi, 0.5, &inst, &spec(Driver::None)).is_err());
        assert!(StateVector::new(2, vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn mixed_signs_wrong_size() {
        let inst = generate_instance(4, 1).unwrap();
        let m = MixedSigns::generate(3, 9);
        assert!(AnnealingHamiltonian::new(&inst, &spec(Driver::Mixed(m))).is_err());
        assert!(MixedSigns::from_signs(3, 0, vec![1, -1]).is_err());
        assert!(MixedSigns::from_signs(3, 0, vec![1, -1, 0]).is_err());
    }

    #[test]
    fn dense_capacity_and_symmetry() {
        let inst = generate_instance(13, 1).unwrap();
        assert!(matches!(
            build_dense(0.5, &inst, &spec(Driver::None)),
            Err(AnnealError::Capacity { limit: 12, .. })
        ));
        let inst = generate_instance(4, 1).unwrap();
        let m = build_dense(0.4, &inst, &spec(Driver::Mixed(MixedSigns::generate(4, 2)))).unwrap();
        assert!((&m - m.transpose()).amax() < 1e-14);
    }

    #[test]
    fn gauge_parsing() {
        let g: Gauge = "+-−+".parse().unwrap();
        assert_eq!(g.signs(), &[1, -1, -1, 1]);
        assert_eq!(g.to_string(), "+--+");
        assert!("+x".parse::<Gauge>().is_err());
        assert_eq!(g.phase(0b0110), 1.0);
        assert_eq!(g.phase(0b0010), -1.0);
    }

    #[test]
    fn transverse_only_needs_flipped_gauge() {
        let inst = generate_instance(3, 8).unwrap();
        let s = spec(Driver::None);
        let raw = is_stoquastic(0.5, &inst, &s, &Gauge::uniform(3, 1)).unwrap();
        assert!(!raw.stoquastic);
        let flipped = is_stoquastic(0.5, &inst, &s, &Gauge::uniform(3, -1)).unwrap();
        assert!(flipped.stoquastic && flipped.witness.is_none());
        let (found, tried) = find_stoquastic_gauge(0.5, &inst, &s, &[]).unwrap();
        assert_eq!(found, Some(Gauge::uniform(3, -1)));
        assert_eq!(tried.len(), 2);
    }

    #[test]
    fn antiferro_witness_is_pair_flip() {
        let inst = generate_instance(3, 2).unwrap();
        for sign in [1, -1] {
            let v = is_stoquastic(0.5, &inst, &spec(Driver::Antiferro), &Gauge::uniform(3, sign)).unwrap();
            assert!(!v.stoquastic);
            let (r, c, value) = v.witness.unwrap();
            assert_eq!((r ^ c).count_ones(), 2);
            assert!((value - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_endpoint_is_stoquastic() {
        let inst = generate_instance(4, 5).unwrap();
        for kind in DriverKind::ALL {
            let s = spec(Driver::from_kind(kind, 4, 1));
            let v = is_stoquastic(1.0, &inst, &s, &Gauge::uniform(4, 1)).unwrap();
            assert!(v.stoquastic);
        }
    }

    #[test]
    fn driver_labels_round_trip() {
        for kind in DriverKind::ALL {
            assert_eq!(kind.label().parse::<DriverKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.label()));
        }
        assert!("X".parse::<DriverKind>().is_err());
    }
}
