//! The symmetric group: permutations, their tensor representation on
//! `(C^d)^{⊗n}`, the generalised swap trick and the cycle-count identities
//! used by the moment bounds.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::{check_entries, ComplexMatrix, C64, ONE};
use super::rng::{SeededRng, StreamTag};
use crate::error::{Error, Result};

/// Element of `S_n`. Positions are 0-based internally; the serialised and
/// displayed forms are 1-based.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
    cycles: Vec<Vec<usize>>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self::from_zero_based((0..n).collect()).expect("identity is a bijection")
    }

    pub fn from_zero_based(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(Error::InvalidDimension("permutation of degree 0".into()));
        }
        let mut seen = vec![false; n];
        for &x in &map {
            if x >= n || seen[x] {
                return Err(Error::Domain(format!("mapping {map:?} is not a bijection")));
            }
            seen[x] = true;
        }
        let cycles = cycle_decomposition(&map);
        Ok(Self { map, cycles })
    }

    /// `mapping[i-1] = π(i)`.
    pub fn from_one_based(mapping: &[usize]) -> Result<Self> {
        if mapping.contains(&0) {
            return Err(Error::Domain("1-based mapping contains 0".into()));
        }
        Self::from_zero_based(mapping.iter().map(|&x| x - 1).collect())
    }

    /// Builds a permutation of degree `n` from 1-based cycles; unlisted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (pos, &x) in cycle.iter().enumerate() {
                if x == 0 || x > n || touched[x - 1] {
                    return Err(Error::Domain(format!("invalid or repeated point {x} in cycles")));
                }
                touched[x - 1] = true;
                let next = cycle[(pos + 1) % cycle.len()];
                if next == 0 || next > n {
                    return Err(Error::Domain(format!("invalid point {next} in cycles")));
                }
                map[x - 1] = next - 1;
            }
        }
        Self::from_zero_based(map)
    }

    pub fn degree(&self) -> usize {
        self.map.len()
    }

    /// `π(i)` for 0-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn zero_based(&self) -> &[usize] {
        &self.map
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.map.iter().map(|x| x + 1).collect()
    }

    /// Cycles as 0-based lists `(c, π(c), π²(c), …)`, each starting at its
    /// smallest element, ordered by that element.
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    /// `#π`.
    pub fn num_cycles(&self) -> usize {
        self.cycles.len()
    }

    /// `Fix(π)`.
    pub fn fixed_points(&self) -> usize {
        self.cycles.iter().filter(|c| c.len() == 1).count()
    }

    /// `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.degree() != other.degree() {
            return Err(Error::Shape(format!(
                "composing permutations of degree {} and {}",
                self.degree(),
                other.degree()
            )));
        }
        Self::from_zero_based(other.map.iter().map(|&i| self.map[i]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.degree()];
        for (i, &p) in self.map.iter().enumerate() {
            inv[p] = i;
        }
        Self::from_zero_based(inv).expect("inverse of a bijection")
    }

    /// Membership in the parity-alternating subset: with 1-based labels,
    /// `i` and `π(i)` always have opposite parity.
    pub fn is_parity_alternating(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &p)| (i + p) % 2 == 1)
    }

    /// Every element of `S_n` in lexicographic order of the mapping.
    pub fn all(n: usize) -> Result<Vec<Self>> {
        if n == 0 {
            return Err(Error::InvalidDimension("S_0".into()));
        }
        if n > MAX_ENUMERATION_DEGREE {
            return Err(Error::SizeLimit {
                what: format!("enumeration of S_{n}"),
                entries: (1..=n as u128).product(),
                limit: (1..=MAX_ENUMERATION_DEGREE as u128).product(),
            });
        }
        let mut current: Vec<usize> = (0..n).collect();
        let mut out = Vec::new();
        loop {
            out.push(Self::from_zero_based(current.clone())?);
            if !next_permutation(&mut current) {
                break;
            }
        }
        Ok(out)
    }

    /// Basis-index action of `V(π)` on `(C^d)^{⊗n}`: entry `a` holds the index
    /// `b` with `V(π)|a⟩ = |b⟩`. Factor 1 is the most significant digit.
    pub fn tensor_index_map(&self, d: usize) -> Result<Vec<usize>> {
        if d == 0 {
            return Err(Error::InvalidDimension("local dimension 0".into()));
        }
        let n = self.degree();
        let dim = tensor_dim(d, n)?;
        let inv = self.inverse();
        let mut digits = vec![0usize; n];
        let mut out = Vec::with_capacity(dim);
        for a in 0..dim {
            let mut rest = a;
            for k in (0..n).rev() {
                digits[k] = rest % d;
                rest /= d;
            }
            // Output factor k carries input factor π⁻¹(k).
            let b = (0..n).fold(0usize, |acc, k| acc * d + digits[inv.map[k]]);
            out.push(b);
        }
        Ok(out)
    }
}

/// `S_n` enumeration is capped at this degree (`9! = 362880` elements).
pub const MAX_ENUMERATION_DEGREE: usize = 9;

fn tensor_dim(d: usize, n: usize) -> Result<usize> {
    let dim = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > super::matrix::MAX_ENTRIES as u128 {
        return Err(Error::SizeLimit {
            what: format!("tensor power ({d})^{n}"),
            entries: dim,
            limit: super::matrix::MAX_ENTRIES as u128,
        });
    }
    Ok(dim as usize)
}

fn cycle_decomposition(map: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; map.len()];
    let mut cycles = Vec::new();
    for start in 0..map.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            cycle.push(x);
            x = map[x];
        }
        cycles.push(cycle);
    }
    cycles
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nontrivial: Vec<&Vec<usize>> = self.cycles.iter().filter(|c| c.len() > 1).collect();
        if nontrivial.is_empty() {
            return write!(f, "id");
        }
        for c in nontrivial {
            let labels: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "({})", labels.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.one_based())
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let mapping = Vec::<usize>::deserialize(deserializer)?;
        Permutation::from_one_based(&mapping).map_err(serde::de::Error::custom)
    }
}

/// Dense `V(π)` on `(C^d)^{⊗n}` with
/// `V(π)(v₁⊗…⊗vₙ) = v_{π⁻¹(1)}⊗…⊗v_{π⁻¹(n)}`.
pub fn tensor_permutation_operator(pi: &Permutation, d: usize) -> Result<ComplexMatrix> {
    let dim = tensor_dim(d, pi.degree())?;
    check_entries("tensor permutation operator", dim, dim)?;
    let map = pi.tensor_index_map(d)?;
    let mut v = ComplexMatrix::zeros(dim, dim)?;
    for (a, &b) in map.iter().enumerate() {
        v.set(b, a, ONE);
    }
    Ok(v)
}

/// `Tr[(M₁⊗…⊗Mₙ)·V(π)]` evaluated cycle by cycle, never forming the tensor
/// product. Around a cycle the factors are multiplied in `π⁻¹` order:
/// `Tr[M_c · M_{π⁻¹(c)} · M_{π⁻²(c)} ⋯]`.
pub fn trace_permuted_product(pi: &Permutation, mats: &[ComplexMatrix]) -> Result<C64> {
    if mats.len() != pi.degree() {
        return Err(Error::Shape(format!(
            "{} operands for a permutation of degree {}",
            mats.len(),
            pi.degree()
        )));
    }
    let d = mats[0].rows();
    if let Some(bad) = mats.iter().find(|m| !m.is_square() || m.rows() != d) {
        return Err(Error::Shape(format!(
            "operands must all be {d}x{d}, found {}x{}",
            bad.rows(),
            bad.cols()
        )));
    }
    let mut total = ONE;
    for cycle in pi.cycles() {
        let mut prod = mats[cycle[0]].clone();
        for &idx in cycle[1..].iter().rev() {
            prod = prod.matmul(&mats[idx])?;
        }
        total *= prod.trace();
    }
    Ok(total)
}

/// `Tr[V(π)⁻¹ · M]` for an arbitrary operator on `(C^d)^{⊗n}`.
pub fn trace_with_inverse_permutation(pi: &Permutation, m: &ComplexMatrix, d: usize) -> Result<C64> {
    let map = pi.tensor_index_map(d)?;
    if !m.is_square() || m.rows() != map.len() {
        return Err(Error::Shape(format!(
            "operator is {}x{}, expected {}x{}",
            m.rows(),
            m.cols(),
            map.len(),
            map.len()
        )));
    }
    // V(π)⁻¹ = V(π)ᵀ has ones at (a, map[a]); Tr[Vᵀ M] = Σ_a M[map[a], a].
    Ok(map.iter().enumerate().map(|(a, &b)| m.get(b, a)).sum())
}

/// Unsigned Stirling numbers of the first kind, `table[n][k]` for `n ≤ n_max`.
pub fn stirling_first_unsigned(n_max: usize) -> Vec<Vec<u128>> {
    let mut table = vec![vec![0u128; n_max + 1]; n_max + 1];
    table[0][0] = 1;
    for n in 0..n_max {
        for k in 0..=n {
            let here = table[n][k];
            table[n + 1][k] += n as u128 * here;
            table[n + 1][k + 1] += here;
        }
    }
    table
}

/// `x (x+1) ⋯ (x+n−1)`.
pub fn rising_factorial(x: u128, n: usize) -> u128 {
    (0..n as u128).map(|i| x + i).product()
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Largest `n_max` accepted by [`combinatorics_suite`].
pub const COMBINATORICS_MAX: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedPointCheck {
    pub n: usize,
    pub permutations: usize,
    pub violations: usize,
    /// Smallest slack `Fix(π) − (2#π − 2n)` over `S_n`.
    pub min_slack: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParityAlternatingCheck {
    pub n: usize,
    pub x: u128,
    pub subset_size: usize,
    pub enumerated_sum: u128,
    pub closed_form: u128,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StirlingCheck {
    pub n: usize,
    pub x: u128,
    pub stirling_sum: u128,
    pub rising: u128,
    /// Cycle-count histogram of `S_n` agrees with the Stirling row.
    pub histogram_matches: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CombinatoricsReport {
    pub n_max: usize,
    pub fixed_points: Vec<FixedPointCheck>,
    pub parity_alternating: Vec<ParityAlternatingCheck>,
    pub stirling: Vec<StirlingCheck>,
    pub passed: bool,
}

/// Exhaustively checks `Fix(π) ≥ 2#π − 2n` on `S_n` (`n ≤ n_max`), the
/// parity-alternating identity `Σ_{π∈S̃_{2n}} x^{#π} = n!·x^{(n)}` for
/// `2n ≤ n_max`, and `Σ_k c(n,k) x^k = x^{(n)}`, each for `x ∈ {1,2,3}`.
pub fn combinatorics_suite(n_max: usize) -> Result<CombinatoricsReport> {
    if n_max == 0 {
        return Err(Error::InvalidDimension("n_max must be positive".into()));
    }
    if n_max > COMBINATORICS_MAX {
        return Err(Error::SizeLimit {
            what: format!("exhaustive enumeration up to S_{n_max}"),
            entries: factorial(n_max),
            limit: factorial(COMBINATORICS_MAX),
        });
    }
    let stirling = stirling_first_unsigned(n_max);
    let xs: [u128; 3] = [1, 2, 3];

    let mut fixed_points = Vec::new();
    let mut stirling_checks = Vec::new();
    let mut parity = Vec::new();

    for n in 1..=n_max {
        let group = Permutation::all(n)?;
        let mut violations = 0;
        let mut min_slack = i64::MAX;
        let mut histogram = vec![0u128; n + 1];
        for pi in &group {
            let slack = pi.fixed_points() as i64 - (2 * pi.num_cycles() as i64 - 2 * n as i64);
            if slack < 0 {
                violations += 1;
            }
            min_slack = min_slack.min(slack);
            histogram[pi.num_cycles()] += 1;
        }
        fixed_points.push(FixedPointCheck {
            n,
            permutations: group.len(),
            violations,
            min_slack,
        });
        let histogram_matches = histogram[..] == stirling[n][..=n];
        for &x in &xs {
            let stirling_sum: u128 = (0..=n).map(|k| stirling[n][k] * x.pow(k as u32)).sum();
            let rising = rising_factorial(x, n);
            stirling_checks.push(StirlingCheck {
                n,
                x,
                stirling_sum,
                rising,
                histogram_matches,
                holds: histogram_matches && stirling_sum == rising,
            });
        }
    }

    for n in 1..=n_max / 2 {
        let subset: Vec<Permutation> = Permutation::all(2 * n)?
            .into_iter()
            .filter(Permutation::is_parity_alternating)
            .collect();
        for &x in &xs {
            let enumerated_sum: u128 = subset.iter().map(|pi| x.pow(pi.num_cycles() as u32)).sum();
            let closed_form = factorial(n) * rising_factorial(x, n);
            parity.push(ParityAlternatingCheck {
                n,
                x,
                subset_size: subset.len(),
                enumerated_sum,
                closed_form,
                holds: enumerated_sum == closed_form,
            });
        }
    }

    let passed = fixed_points.iter().all(|c| c.violations == 0)
        && parity.iter().all(|c| c.holds)
        && stirling_checks.iter().all(|c| c.holds);
    Ok(CombinatoricsReport {
        n_max,
        fixed_points,
        parity_alternating: parity,
        stirling: stirling_checks,
        passed,
    })
}

/// Largest operand count and dimension drawn by [`swap_trick_check`].
pub const SWAP_CHECK_MAX_N: usize = 4;
pub const SWAP_CHECK_MAX_D: usize = 4;
pub const SWAP_CHECK_REL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapTrickReport {
    pub instances: usize,
    pub master_seed: u64,
    /// Largest `|dense − cycles| / max(|dense|, 1)`.
    pub max_relative_error: f64,
    pub passed: bool,
}

/// Compares [`trace_permuted_product`] with the dense trace
/// `Tr[(M₁⊗…⊗Mₙ)·V(π)]` on random instances (`n ≤ 4`, `d ≤ 4`, complex
/// Gaussian operands, uniform `π`); instance `i` uses stream `Fixture/i`.
pub fn swap_trick_check(instances: usize, master_seed: u64) -> Result<SwapTrickReport> {
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let mut rng = SeededRng::for_purpose(master_seed, StreamTag::Fixture, i as u64);
        let n = 1 + rng.below(SWAP_CHECK_MAX_N);
        let d = 1 + rng.below(SWAP_CHECK_MAX_D);
        let mats = (0..n)
            .map(|_| ComplexMatrix::from_fn(d, d, |_, _| rng.complex_normal()))
            .collect::<Result<Vec<_>>>()?;
        let mut map: Vec<usize> = (0..n).collect();
        for j in (1..n).rev() {
            map.swap(j, rng.below(j + 1));
        }
        let pi = Permutation::from_zero_based(map)?;
        let mut kron = mats[0].clone();
        for m in &mats[1..] {
            kron = kron.kron(m)?;
        }
        let dense = kron.matmul(&tensor_permutation_operator(&pi, d)?)?.trace();
        let fast = trace_permuted_product(&pi, &mats)?;
        worst = worst.max((dense - fast).norm() / dense.norm().max(1.0));
    }
    Ok(SwapTrickReport {
        instances,
        master_seed,
        max_relative_error: worst,
        passed: worst <= SWAP_CHECK_REL_TOL,
    })
}
