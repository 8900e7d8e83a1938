//! Random long-range Ising spin-glass instances.
//!
//! An instance on `n` spins carries a coupling for every pair `i < j` and a
//! local field for every spin, all drawn from the standard normal
//! distribution. Basis configurations are `usize` bit patterns: bit `i`
//! clear means spin `i` has `σᶻ = +1`, bit `i` set means `σᶻ = −1`.

use serde::{Deserialize, Serialize};

use crate::error::{AnnealError, Result};
use crate::rng::DisorderStream;

/// Largest spin count accepted by exhaustive enumeration.
pub const MAX_ENUMERATION_SPINS: usize = 24;

/// Relative energy window used to collect degenerate classical ground states.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-12;

/// Spin value (`±1`) of site `i` in configuration `config`.
#[inline]
pub fn spin(config: usize, i: usize) -> f64 {
    if config >> i & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Position of pair `(i, j)`, `i < j`, in lexicographic pair order.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Iterator over `(i, j)` pairs with `i < j` in lexicographic order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    n: usize,
    seed: u64,
    fields: Vec<f64>,
    /// Upper-triangle couplings in lexicographic `(i, j)` order.
    couplings: Vec<f64>,
}

impl PartialEq for ProblemInstance {
    /// Bitwise equality of every coupling and field.
    fn eq(&self, other: &Self) -> bool {
        let same_bits = |a: &[f64], b: &[f64]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        };
        self.n == other.n
            && self.seed == other.seed
            && same_bits(&self.fields, &other.fields)
            && same_bits(&self.couplings, &other.couplings)
    }
}

impl ProblemInstance {
    /// Builds an instance from explicit parameters. `couplings` is the packed
    /// upper triangle in lexicographic pair order.
    pub fn from_parts(n: usize, seed: u64, fields: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(AnnealError::InvalidArgument("spin count must be at least 1".into()));
        }
        if fields.len() != n {
            return Err(AnnealError::InvalidArgument(format!(
                "expected {n} fields, got {}",
                fields.len()
            )));
        }
        if couplings.len() != pair_count(n) {
            return Err(AnnealError::InvalidArgument(format!(
                "expected {} couplings, got {}",
                pair_count(n),
                couplings.len()
            )));
        }
        if fields.iter().chain(&couplings).any(|v| !v.is_finite()) {
            return Err(AnnealError::InvalidArgument("parameters must be finite".into()));
        }
        Ok(Self {
            n,
            seed,
            fields,
            couplings,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.couplings[pair_index(self.n, i, j)]
    }

    /// Couplings as `(i, j, J_ij)` triples in lexicographic order.
    pub fn coupling_triples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        pairs(self.n).zip(&self.couplings).map(|((i, j), &v)| (i, j, v))
    }

    /// Energy change when spin `k` is flipped in a configuration with the
    /// given spins.
    fn flip_delta(&self, spins: &[f64], k: usize) -> f64 {
        let mut local = self.fields[k];
        for (j, &s) in spins.iter().enumerate() {
            if j != k {
                local += self.coupling(k, j) * s;
            }
        }
        -2.0 * spins[k] * local
    }

    /// Walks all `2^n` configurations in Gray-code order, calling `visit`
    /// with each configuration and its classical energy.
    fn for_each_energy(&self, mut visit: impl FnMut(usize, f64)) {
        let n = self.n;
        let mut spins = vec![1.0; n];
        let mut energy = classical_energy(self, 0);
        visit(0, energy);
        for step in 1usize..(1usize << n) {
            let k = step.trailing_zeros() as usize;
            energy += self.flip_delta(&spins, k);
            spins[k] = -spins[k];
            let gray = step ^ (step >> 1);
            visit(gray, energy);
        }
    }

    /// Classical energies of every basis state, indexed by configuration.
    pub fn energy_table(&self) -> Vec<f64> {
        let mut table = vec![0.0; self.dim()];
        self.for_each_energy(|config, e| table[config] = e);
        table
    }
}

/// Draws an instance with i.i.d. standard-normal parameters. Fields
/// `h_0..h_{n-1}` are drawn first, then couplings in lexicographic order.
pub fn generate_instance(n: usize, seed: u64) -> Result<ProblemInstance> {
    if n == 0 {
        return Err(AnnealError::InvalidArgument("spin count must be at least 1".into()));
    }
    let mut stream = DisorderStream::new(seed);
    let fields = (0..n).map(|_| stream.next_gaussian()).collect();
    let couplings = (0..pair_count(n)).map(|_| stream.next_gaussian()).collect();
    ProblemInstance::from_parts(n, seed, fields, couplings)
}

/// `Σ_{i<j} J_ij s_i s_j + Σ_i h_i s_i` for the configuration's spins.
pub fn classical_energy(inst: &ProblemInstance, config: usize) -> f64 {
    let n = inst.n;
    let mut energy = 0.0;
    for i in 0..n {
        let si = spin(config, i);
        energy += inst.fields[i] * si;
        for j in i + 1..n {
            energy += inst.couplings[pair_index(n, i, j)] * si * spin(config, j);
        }
    }
    energy
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSolution {
    pub energy: f64,
    /// Ground configurations in ascending order.
    pub states: Vec<usize>,
}

impl ClassicalSolution {
    pub fn degeneracy(&self) -> usize {
        self.states.len()
    }
}

/// Exhaustive ground-state search. Configurations within
/// `tol * max(1, |E_min|)` of the minimum are reported as degenerate.
pub fn brute_force_ground(inst: &ProblemInstance, tol: f64) -> Result<ClassicalSolution> {
    if inst.n > MAX_ENUMERATION_SPINS {
        return Err(AnnealError::Capacity {
            what: "exhaustive enumeration",
            limit: MAX_ENUMERATION_SPINS,
            n: inst.n,
        });
    }
    let mut min = f64::INFINITY;
    inst.for_each_energy(|_, e| min = min.min(e));
    let window = degeneracy_window(min, tol);
    let mut states = Vec::new();
    inst.for_each_energy(|config, e| {
        if e - min <= window {
            states.push(config);
        }
    });
    states.sort_unstable();
    Ok(ClassicalSolution { energy: min, states })
}

/// Same as [`brute_force_ground`] but reads energies from a precomputed table.
pub fn ground_from_table(table: &[f64], tol: f64) -> ClassicalSolution {
    let min = table.iter().copied().fold(f64::INFINITY, f64::min);
    let window = degeneracy_window(min, tol);
    let states = (0..table.len()).filter(|&c| table[c] - min <= window).collect();
    ClassicalSolution { energy: min, states }
}

fn degeneracy_window(min: f64, tol: f64) -> f64 {
    tol * min.abs().max(1.0)
}

#[derive(Serialize, Deserialize)]
struct InstanceDocument {
    n: usize,
    seed: u64,
    h: Vec<f64>,
    #[serde(rename = "J")]
    j: Vec<(usize, usize, f64)>,
}

/// Renders the instance as a single-line JSON document.
pub fn serialize_instance(inst: &ProblemInstance) -> String {
    let doc = InstanceDocument {
        n: inst.n,
        seed: inst.seed,
        h: inst.fields.clone(),
        j: inst.coupling_triples().collect(),
    };
    serde_json::to_string(&doc).expect("instance documents always serialize")
}

/// Parses one JSON instance document.
pub fn parse_instance(text: &str) -> Result<ProblemInstance> {
    parse_with_context(text, "document")
}

/// Parses a JSON-lines stream of instances; blank lines are skipped.
pub fn parse_instances(text: &str) -> Result<Vec<ProblemInstance>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(idx, line)| parse_with_context(line, &format!("line {}", idx + 1)))
        .collect()
}

fn parse_with_context(text: &str, context: &str) -> Result<ProblemInstance> {
    let err = |message: String| AnnealError::Parse {
        context: context.to_string(),
        message,
    };
    let doc: InstanceDocument = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    let n = doc.n;
    if n == 0 {
        return Err(err("field `n` must be at least 1".into()));
    }
    if doc.h.len() != n {
        return Err(err(format!("field `h` has {} entries, expected {n}", doc.h.len())));
    }
    let mut couplings = vec![None; pair_count(n)];
    for (k, &(i, j, v)) in doc.j.iter().enumerate() {
        if !(i < j && j < n) {
            return Err(err(format!("field `J[{k}]` has invalid pair ({i}, {j})")));
        }
        let slot = &mut couplings[pair_index(n, i, j)];
        if slot.is_some() {
            return Err(err(format!("field `J` repeats pair ({i}, {j})")));
        }
        *slot = Some(v);
    }
    let couplings = pairs(n)
        .zip(couplings)
        .map(|((i, j), v)| v.ok_or_else(|| err(format!("field `J` is missing pair ({i}, {j})"))))
        .collect::<Result<Vec<_>>>()?;
    ProblemInstance::from_parts(n, doc.seed, doc.h, couplings).map_err(|e| err(e.to_string()))
}
