//! Low-lying instantaneous spectrum of `H(τ)`, minimum gaps and
//! anticrossing counts.
//!
//! Levels are tracked by sorted order only; crossings between the tracked
//! levels and higher, untracked ones are not disambiguated.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{AnnealError, Result};
use crate::instance::ProblemInstance;
use crate::lanczos::{lowest_eigenpairs, LanczosOptions};
use crate::linalg::symmetric_eigenvalues;
use crate::operators::{AnnealSpec, AnnealingHamiltonian};

pub const DEFAULT_COARSE_POINTS: usize = 201;
pub const DEFAULT_LEVELS: usize = 2;
/// Grid spacing reached around every gap minimum by refinement.
pub const DEFAULT_REFINE_SPACING: f64 = 1e-4;
/// Spin counts up to this use dense diagonalization under
/// [`SolverChoice::Auto`].
pub const DEFAULT_DENSE_MAX_SPINS: usize = 6;
/// Residual bound `‖H·v − E·v‖` for iteratively computed pairs.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;
/// Gap values below `−GAP_NOISE_TOL` indicate a broken solver.
pub const GAP_NOISE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    /// Dense up to the configured spin count, Lanczos above it.
    Auto,
    Dense,
    Iterative,
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    pub solver: SolverChoice,
    pub dense_max_spins: usize,
    pub lanczos: LanczosOptions,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            solver: SolverChoice::Auto,
            dense_max_spins: DEFAULT_DENSE_MAX_SPINS,
            lanczos: LanczosOptions {
                max_basis: 32,
                tol: EIGEN_RESIDUAL_TOL,
                ..LanczosOptions::default()
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Diagonal,
    Dense,
    Lanczos,
}

#[derive(Clone, Debug)]
pub struct LowSpectrum {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors when the method produces them.
    pub vectors: Option<Vec<Vec<f64>>>,
    /// Residual norms for iterative results.
    pub residuals: Option<Vec<f64>>,
    pub method: Method,
}

/// Solves for the lowest levels of one Hamiltonian at successive `τ`,
/// warm-starting each iterative solve from the previous eigenvectors.
pub struct SpectrumSolver<'a> {
    ham: &'a AnnealingHamiltonian,
    options: EigenOptions,
    warm: Option<Vec<f64>>,
    scratch: Vec<f64>,
}

impl<'a> SpectrumSolver<'a> {
    pub fn new(ham: &'a AnnealingHamiltonian, options: EigenOptions) -> Self {
        Self {
            ham,
            options,
            warm: None,
            scratch: vec![0.0; ham.dim()],
        }
    }

    pub fn solve(&mut self, tau: f64, k: usize) -> Result<LowSpectrum> {
        let dim = self.ham.dim();
        if k == 0 || k > dim {
            return Err(AnnealError::InvalidArgument(format!(
                "level count {k} outside 1..={dim}"
            )));
        }
        let coeffs = self.ham.coeffs(tau)?;
        let use_dense = match self.options.solver {
            SolverChoice::Dense => true,
            SolverChoice::Iterative => false,
            SolverChoice::Auto => self.ham.n() <= self.options.dense_max_spins,
        };
        if use_dense {
            let dense = self.ham.dense(tau)?;
            let mut values = symmetric_eigenvalues(&dense);
            values.truncate(k);
            return Ok(LowSpectrum {
                values,
                vectors: None,
                residuals: None,
                method: Method::Dense,
            });
        }
        if coeffs.transverse == 0.0 && coeffs.coupled == 0.0 {
            let mut order: Vec<usize> = (0..dim).collect();
            let diag = self.ham.problem_diagonal();
            order.sort_by(|&a, &b| (coeffs.problem * diag[a]).total_cmp(&(coeffs.problem * diag[b])));
            let values = order[..k].iter().map(|&c| coeffs.problem * diag[c]).collect();
            return Ok(LowSpectrum {
                values,
                vectors: None,
                residuals: Some(vec![0.0; k]),
                method: Method::Diagonal,
            });
        }

        let ham = self.ham;
        let scratch = &mut self.scratch;
        let matvec = |x: &[f64], y: &mut [f64]| {
            ham.apply_shifted(coeffs, 0.0, x, y, scratch)
                .expect("buffers match the Hamiltonian dimension");
        };
        let pairs = lowest_eigenpairs(dim, k, matvec, self.warm.as_deref(), &self.options.lanczos)
            .map_err(|e| AnnealError::Solver {
                tau,
                residual: e.residual,
                iterations: e.matvecs,
            })?;
        let mut warm = vec![0.0; dim];
        for v in &pairs.vectors {
            warm.iter_mut().zip(v).for_each(|(w, &x)| *w += x);
        }
        self.warm = Some(warm);
        Ok(LowSpectrum {
            values: pairs.values,
            vectors: Some(pairs.vectors),
            residuals: Some(pairs.residuals),
            method: Method::Lanczos,
        })
    }
}

/// `k` lowest eigenvalues of `H(τ)`.
pub fn lowest_eigs(tau: f64, inst: &ProblemInstance, spec: &AnnealSpec, k: usize) -> Result<Vec<f64>> {
    let ham = AnnealingHamiltonian::new(inst, spec)?;
    Ok(SpectrumSolver::new(&ham, EigenOptions::default()).solve(tau, k)?.values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrace {
    /// Ascending schedule points, always including 0 and 1.
    pub taus: Vec<f64>,
    /// Ascending lowest levels at each point.
    pub energies: Vec<Vec<f64>>,
    pub levels: usize,
    pub refined: bool,
}

impl SpectrumTrace {
    /// Builds a trace from precomputed levels, sorting each row.
    pub fn from_levels(taus: Vec<f64>, mut energies: Vec<Vec<f64>>, refined: bool) -> Result<Self> {
        if taus.len() != energies.len() || taus.is_empty() {
            return Err(AnnealError::InvalidArgument("trace needs one level row per point".into()));
        }
        if taus.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AnnealError::InvalidArgument("trace points must be strictly ascending".into()));
        }
        let levels = energies[0].len();
        if levels == 0 || energies.iter().any(|e| e.len() != levels) {
            return Err(AnnealError::InvalidArgument("every point needs the same level count".into()));
        }
        energies.iter_mut().for_each(|e| e.sort_by(f64::total_cmp));
        Ok(Self {
            taus,
            energies,
            levels,
            refined,
        })
    }

    /// `E₁ − E₀` per point.
    pub fn gaps(&self) -> Result<Vec<f64>> {
        if self.levels < 2 {
            return Err(AnnealError::InvalidArgument("gap needs at least two levels".into()));
        }
        Ok(self.energies.iter().map(|e| e[1] - e[0]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.levels).map(|l| format!("E{l}")).collect();
        writeln!(out, "tau,{}", header.join(","))?;
        for (tau, row) in self.taus.iter().zip(&self.energies) {
            let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            writeln!(out, "{tau},{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TraceOptions {
    pub coarse_points: usize,
    pub levels: usize,
    pub refine_spacing: f64,
    pub max_refine_rounds: usize,
    pub eigen: EigenOptions,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            coarse_points: DEFAULT_COARSE_POINTS,
            levels: DEFAULT_LEVELS,
            refine_spacing: DEFAULT_REFINE_SPACING,
            max_refine_rounds: 64,
            eigen: EigenOptions::default(),
        }
    }
}

/// Indices of local minima of `gaps`, endpoints included. On plateaus only
/// the first point qualifies.
fn gap_minima(gaps: &[f64]) -> Vec<usize> {
    let last = gaps.len() - 1;
    (0..gaps.len())
        .filter(|&i| {
            let left = i == 0 || gaps[i] < gaps[i - 1];
            let right = i == last || gaps[i] <= gaps[i + 1];
            left && right && gaps.len() > 1
        })
        .collect()
}

/// Evaluates the levels on a uniform grid, then repeatedly bisects the
/// intervals next to every gap minimum until they are no wider than
/// `refine_spacing`.
pub fn trace_spectrum_with(ham: &AnnealingHamiltonian, options: &TraceOptions) -> Result<SpectrumTrace> {
    if options.coarse_points < 3 {
        return Err(AnnealError::InvalidArgument("need at least 3 coarse points".into()));
    }
    if !(options.refine_spacing > 0.0) {
        return Err(AnnealError::InvalidArgument("refinement spacing must be positive".into()));
    }
    let k = options.levels;
    let mut solver = SpectrumSolver::new(ham, options.eigen.clone());
    let last = options.coarse_points - 1;
    let mut taus: Vec<f64> = (0..=last).map(|i| i as f64 / last as f64).collect();
    let mut energies = taus
        .iter()
        .map(|&tau| solver.solve(tau, k).map(|s| s.values))
        .collect::<Result<Vec<_>>>()?;
    if k < 2 {
        return SpectrumTrace::from_levels(taus, energies, false);
    }

    for _ in 0..options.max_refine_rounds {
        let gaps: Vec<f64> = energies.iter().map(|e| e[1] - e[0]).collect();
        let mut fresh: Vec<f64> = Vec::new();
        for i in gap_minima(&gaps) {
            for j in [i.checked_sub(1), Some(i + 1)].into_iter().flatten() {
                if j < taus.len() && (taus[j] - taus[i]).abs() > options.refine_spacing {
                    fresh.push(0.5 * (taus[i] + taus[j]));
                }
            }
        }
        fresh.sort_by(f64::total_cmp);
        fresh.dedup();
        fresh.retain(|t| taus.binary_search_by(|x| x.total_cmp(t)).is_err());
        if fresh.is_empty() {
            break;
        }
        for tau in fresh {
            let values = solver.solve(tau, k)?.values;
            let at = taus.partition_point(|&x| x < tau);
            taus.insert(at, tau);
            energies.insert(at, values);
        }
    }
    SpectrumTrace::from_levels(taus, energies, true)
}

pub fn trace_spectrum(
    inst: &ProblemInstance,
    spec: &AnnealSpec,
    coarse_points: usize,
    k: usize,
) -> Result<SpectrumTrace> {
    let ham = AnnealingHamiltonian::new(inst, spec)?;
    let options = TraceOptions {
        coarse_points,
        levels: k,
        ..TraceOptions::default()
    };
    trace_spectrum_with(&ham, &options)
}

/// Smallest `E₁ − E₀` on the trace and its first location.
pub fn min_gap(trace: &SpectrumTrace) -> Result<(f64, f64)> {
    let gaps = trace.gaps()?;
    let mut best = (gaps[0], trace.taus[0]);
    for (&g, &tau) in gaps.iter().zip(&trace.taus) {
        if g < best.0 {
            best = (g, tau);
        }
    }
    Ok(best)
}

/// Number of strict interior local minima of the gap whose depth below the
/// lower of the two flanking maxima exceeds `prominence`. The flanking
/// maximum on each side is the largest gap between the minimum and the
/// neighbouring strict minimum (or the trace end).
pub fn count_anticrossings(trace: &SpectrumTrace, prominence: f64) -> Result<usize> {
    if !trace.refined {
        return Err(AnnealError::InvalidState("anticrossing count needs a refined trace".into()));
    }
    if !(prominence >= 0.0) {
        return Err(AnnealError::InvalidArgument("prominence must be non-negative".into()));
    }
    let gaps = trace.gaps()?;
    if gaps.len() < 3 {
        return Ok(0);
    }
    let minima: Vec<usize> = (1..gaps.len() - 1)
        .filter(|&i| gaps[i] < gaps[i - 1] && gaps[i] < gaps[i + 1])
        .collect();
    let peak = |lo: usize, hi: usize| gaps[lo..=hi].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let count = minima
        .iter()
        .enumerate()
        .filter(|&(m, &i)| {
            let left_bound = if m == 0 { 0 } else { minima[m - 1] };
            let right_bound = minima.get(m + 1).copied().unwrap_or(gaps.len() - 1);
            let depth = peak(left_bound, i).min(peak(i, right_bound)) - gaps[i];
            depth > prominence
        })
        .count();
    Ok(count)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapStats {
    pub min_gap: f64,
    pub tau_star: f64,
    pub anticrossings: usize,
}

pub fn gap_stats(trace: &SpectrumTrace, prominence: f64) -> Result<GapStats> {
    let (min_gap, tau_star) = min_gap(trace)?;
    Ok(GapStats {
        min_gap,
        tau_star,
        anticrossings: count_anticrossings(trace, prominence)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{brute_force_ground, generate_instance, DEFAULT_DEGENERACY_TOL};
    use crate::operators::{build_dense, Driver, DriverKind};

    fn synthetic(gaps: &[(f64, f64)], refined: bool) -> SpectrumTrace {
        let taus = gaps.iter().map(|g| g.0).collect();
        let energies = gaps.iter().map(|g| vec![0.0, g.1]).collect();
        SpectrumTrace::from_levels(taus, energies, refined).unwrap()
    }

    #[test]
    fn transverse_endpoint_levels() {
        for n in [3, 5, 8] {
            let inst = generate_instance(n, 4).unwrap();
            let e = lowest_eigs(0.0, &inst, &AnnealSpec::with_driver(Driver::None), 2).unwrap();
            assert!((e[0] + n as f64).abs() < 1e-9);
            assert!((e[1] + n as f64 - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn problem_endpoint_matches_enumeration() {
        for n in [4, 9] {
            let inst = generate_instance(n, 17).unwrap();
            let ground = brute_force_ground(&inst, DEFAULT_DEGENERACY_TOL).unwrap();
            for kind in DriverKind::ALL {
                let spec = AnnealSpec::with_driver(Driver::from_kind(kind, n, 3));
                let e = lowest_eigs(1.0, &inst, &spec, 2).unwrap();
                assert!((e[0] - ground.energy).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn iterative_matches_dense() {
        let inst = generate_instance(7, 2).unwrap();
        let spec = AnnealSpec::with_driver(Driver::Antiferro);
        let ham = AnnealingHamiltonian::new(&inst, &spec).unwrap();
        let opts = EigenOptions {
            solver: SolverChoice::Iterative,
            ..EigenOptions::default()
        };
        let mut solver = SpectrumSolver::new(&ham, opts);
        for tau in [0.13, 0.5, 0.81] {
            let it = solver.solve(tau, 3).unwrap();
            assert_eq!(it.method, Method::Lanczos);
            assert!(it.residuals.unwrap().iter().all(|&r| r <= EIGEN_RESIDUAL_TOL));
            let dense = symmetric_eigenvalues(&build_dense(tau, &inst, &spec).unwrap());
            for (a, b) in it.values.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        assert!(solver.solve(0.5, 0).is_err());
        assert!(solver.solve(1.2, 2).is_err());
    }

    #[test]
    fn min_gap_fixtures() {
        let mono = synthetic(&[(0.0, 3.0), (0.5, 2.0), (1.0, 1.0)], true);
        assert_eq!(min_gap(&mono).unwrap(), (1.0, 1.0));
        assert_eq!(count_anticrossings(&mono, 0.0).unwrap(), 0);

        let dip = synthetic(&[(0.0, 1.0), (0.2, 0.8), (0.4, 0.5), (0.6, 0.01), (0.8, 0.3), (1.0, 0.9)], true);
        assert_eq!(min_gap(&dip).unwrap(), (0.01, 0.6));

        let ties = synthetic(&[(0.0, 1.0), (0.3, 0.2), (0.6, 0.2), (1.0, 1.0)], true);
        assert_eq!(min_gap(&ties).unwrap(), (0.2, 0.3));

        let single = SpectrumTrace::from_levels(vec![0.0, 1.0], vec![vec![0.0], vec![1.0]], true).unwrap();
        assert!(min_gap(&single).is_err());
    }

    #[test]
    fn anticrossing_fixtures() {
        let two = synthetic(
            &[(0.0, 1.0), (0.2, 0.3), (0.4, 0.9), (0.6, 0.1), (0.8, 0.7), (1.0, 0.8)],
            true,
        );
        assert_eq!(count_anticrossings(&two, 0.0).unwrap(), 2);
        // Depths are 0.6 and 0.7 below the lower flank.
        assert_eq!(count_anticrossings(&two, 0.5).unwrap(), 2);
        assert_eq!(count_anticrossings(&two, 0.65).unwrap(), 1);
        assert_eq!(count_anticrossings(&two, 0.75).unwrap(), 0);

        let shallow = synthetic(
            &[(0.0, 1.0), (0.2, 0.5), (0.4, 0.52), (0.6, 0.51), (0.8, 0.6), (1.0, 0.2)],
            true,
        );
        assert_eq!(count_anticrossings(&shallow, 0.0).unwrap(), 2);
        assert_eq!(count_anticrossings(&shallow, 0.05).unwrap(), 0);

        let unrefined = synthetic(&[(0.0, 1.0), (0.5, 0.2), (1.0, 1.0)], false);
        assert!(matches!(count_anticrossings(&unrefined, 0.0), Err(AnnealError::InvalidState(_))));
        assert!(count_anticrossings(&two, -1.0).is_err());
    }

    #[test]
    fn trace_contains_endpoints_and_refines() {
        let inst = generate_instance(5, 8).unwrap();
        let spec = AnnealSpec::with_driver(Driver::Ferro);
        let trace = trace_spectrum(&inst, &spec, 21, 2).unwrap();
        assert_eq!(trace.taus[0], 0.0);
        assert_eq!(*trace.taus.last().unwrap(), 1.0);
        assert!(trace.refined);
        assert!(trace.taus.len() > 21);
        let gaps = trace.gaps().unwrap();
        assert!(gaps.iter().all(|&g| g >= -GAP_NOISE_TOL));
        let (_, tau_star) = min_gap(&trace).unwrap();
        let at = trace.taus.iter().position(|&t| t == tau_star).unwrap();
        if at > 0 {
            assert!(tau_star - trace.taus[at - 1] <= DEFAULT_REFINE_SPACING);
        }
        if at + 1 < trace.taus.len() {
            assert!(trace.taus[at + 1] - tau_star <= DEFAULT_REFINE_SPACING);
        }
        assert!(trace_spectrum(&inst, &spec, 2, 2).is_err());
    }

    #[test]
    fn csv_layout() {
        let trace = synthetic(&[(0.0, 1.0), (0.5, 0.25), (1.0, 2.0)], true);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "tau,E0,E1\n0,0,1\n0.5,0,0.25\n1,0,2\n");
    }
}
