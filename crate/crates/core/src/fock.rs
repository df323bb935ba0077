//! Truncated two-mode Fock space.
//!
//! States `|m1, m2>` with `m1 + m2 <= n_max` are grouped into blocks of fixed
//! total quanta `N = m1 + m2`. Block `N` holds the `N + 1` states
//! `(N,0), (N-1,1), ..., (0,N)` in that order (descending `m1`), and blocks are
//! laid out contiguously by increasing `N`. The flat index of `(m1, m2)` is
//! therefore `N(N+1)/2 + m2`. This ordering is part of the external contract:
//! CSV columns and golden values depend on it.
//!
//! Number-conserving operators are stored per block ([`BlockOperator`]), so
//! they cannot couple different `N` by construction.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cutoff used when none is given: the `N <= 2` sector needed for two-magnon
/// interference.
pub const DEFAULT_N_MAX: usize = 2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Occupation pair `|m1, m2>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockIndex {
    pub m1: usize,
    pub m2: usize,
}

impl FockIndex {
    pub const fn new(m1: usize, m2: usize) -> Self {
        Self { m1, m2 }
    }

    /// Total number of quanta, i.e. the block this state belongs to.
    pub const fn total(self) -> usize {
        self.m1 + self.m2
    }
}

impl fmt::Display for FockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}>", self.m1, self.m2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Lowering,
    Raising,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_max: usize,
    states: Vec<FockIndex>,
}

/// Builds the basis for cutoff `n_max`, shared behind an `Arc` so states and
/// operators can refer to it cheaply.
pub fn build_basis(n_max: usize) -> Arc<FockBasis> {
    Arc::new(FockBasis::new(n_max))
}

impl FockBasis {
    pub fn new(n_max: usize) -> Self {
        let states = (0..=n_max)
            .flat_map(|n| (0..=n).map(move |m2| FockIndex::new(n - m2, m2)))
            .collect();
        Self { n_max, states }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `(n_max + 1)(n_max + 2) / 2`
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.n_max + 1
    }

    pub fn block_size(&self, n: usize) -> usize {
        n + 1
    }

    /// Flat index range occupied by block `n`.
    pub fn block_range(&self, n: usize) -> Range<usize> {
        assert!(n <= self.n_max, "block {n} exceeds n_max = {}", self.n_max);
        let start = n * (n + 1) / 2;
        start..start + n + 1
    }

    pub fn block_states(&self, n: usize) -> &[FockIndex] {
        &self.states[self.block_range(n)]
    }

    pub fn states(&self) -> &[FockIndex] {
        &self.states
    }

    pub fn state(&self, flat: usize) -> FockIndex {
        self.states[flat]
    }

    pub fn contains(&self, index: FockIndex) -> bool {
        index.total() <= self.n_max
    }

    pub fn index_of(&self, index: FockIndex) -> Option<usize> {
        let n = index.total();
        (n <= self.n_max).then(|| n * (n + 1) / 2 + index.m2)
    }

    fn checked_index(&self, index: FockIndex) -> Result<usize> {
        self.index_of(index).ok_or(Error::IndexOutOfRange {
            index,
            n_max: self.n_max,
        })
    }
}

/// Sparse matrix of a single-mode ladder operator over flat basis indices.
///
/// Elements whose image would exceed the cutoff are dropped; `dropped` counts
/// them so that misuse (e.g. a non-number-conserving construction) can be
/// detected.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderOperator {
    pub mode: Mode,
    pub ladder: Ladder,
    dim: usize,
    /// `(row, col, value)` triples.
    entries: Vec<(usize, usize, f64)>,
    dropped: usize,
}

impl LadderOperator {
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn dropped(&self) -> usize {
        self.dropped
    }

    /// Matrix element `<row| op |col>`.
    pub fn element(&self, basis: &FockBasis, row: FockIndex, col: FockIndex) -> f64 {
        match (basis.index_of(row), basis.index_of(col)) {
            (Some(r), Some(c)) => self
                .entries
                .iter()
                .filter(|&&(er, ec, _)| er == r && ec == c)
                .map(|&(_, _, v)| v)
                .sum(),
            _ => 0.0,
        }
    }

    pub fn apply(&self, amplitudes: &DVector<Complex64>) -> DVector<Complex64> {
        assert_eq!(
            amplitudes.len(),
            self.dim,
            "amplitude vector does not match the basis"
        );
        let mut out = DVector::from_element(self.dim, ZERO);
        for &(r, c, v) in &self.entries {
            out[r] += amplitudes[c] * v;
        }
        out
    }
}

/// Ladder operator `which`/`kind` restricted to `basis`.
pub fn mode_operator_elements(basis: &FockBasis, which: Mode, kind: Ladder) -> LadderOperator {
    let mut entries = Vec::new();
    let mut dropped = 0;
    for (col, &state) in basis.states().iter().enumerate() {
        let m = match which {
            Mode::First => state.m1,
            Mode::Second => state.m2,
        };
        let (target_m, value) = match kind {
            Ladder::Lowering if m == 0 => continue,
            Ladder::Lowering => (m - 1, (m as f64).sqrt()),
            Ladder::Raising => (m + 1, ((m + 1) as f64).sqrt()),
        };
        let target = match which {
            Mode::First => FockIndex::new(target_m, state.m2),
            Mode::Second => FockIndex::new(state.m1, target_m),
        };
        match basis.index_of(target) {
            Some(row) => entries.push((row, col, value)),
            None => dropped += 1,
        }
    }
    LadderOperator {
        mode: which,
        ladder: kind,
        dim: basis.dim(),
        entries,
        dropped,
    }
}

/// Complex amplitudes over a [`FockBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Wraps raw amplitudes without normalizing.
    ///
    /// Panics if the length does not match the basis dimension.
    pub fn from_amplitudes(basis: Arc<FockBasis>, amplitudes: DVector<Complex64>) -> Self {
        assert_eq!(
            amplitudes.len(),
            basis.dim(),
            "amplitude vector length must equal the basis dimension"
        );
        Self { basis, amplitudes }
    }

    pub fn basis_state(basis: &Arc<FockBasis>, index: FockIndex) -> Result<Self> {
        make_state(basis, &[(index, ONE)])
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amplitudes
    }

    /// Amplitude of `index`, or `None` if it lies above the cutoff.
    pub fn amplitude(&self, index: FockIndex) -> Option<Complex64> {
        self.basis.index_of(index).map(|i| self.amplitudes[i])
    }

    /// Amplitude of `index`, treating states above the cutoff as empty.
    pub fn amplitude_or_zero(&self, index: FockIndex) -> Complex64 {
        self.amplitude(index).unwrap_or(ZERO)
    }

    pub fn probability(&self, index: FockIndex) -> f64 {
        self.amplitude_or_zero(index).norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Total probability carried by block `n`.
    pub fn block_weight(&self, n: usize) -> f64 {
        self.amplitudes.as_slice()[self.basis.block_range(n)]
            .iter()
            .map(|c| c.norm_sqr())
            .sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        ensure_same_basis(&self.basis, &other.basis)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn populations(&self) -> Vec<(FockIndex, f64)> {
        populations(self)
    }
}

/// Normalized state from `(index, amplitude)` terms. Repeated indices add.
pub fn make_state(basis: &Arc<FockBasis>, terms: &[(FockIndex, Complex64)]) -> Result<StateVector> {
    let mut amplitudes = DVector::from_element(basis.dim(), ZERO);
    for &(index, c) in terms {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite("state amplitude"));
        }
        amplitudes[basis.checked_index(index)?] += c;
    }
    let norm = amplitudes.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateState);
    }
    amplitudes.unscale_mut(norm);
    Ok(StateVector {
        basis: Arc::clone(basis),
        amplitudes,
    })
}

/// `|c_j|^2` for every basis state, in basis order.
pub fn populations(state: &StateVector) -> Vec<(FockIndex, f64)> {
    state
        .basis
        .states()
        .iter()
        .zip(state.amplitudes.iter())
        .map(|(&idx, c)| (idx, c.norm_sqr()))
        .collect()
}

pub(crate) fn ensure_same_basis(a: &FockBasis, b: &FockBasis) -> Result<()> {
    if a.n_max() == b.n_max() {
        Ok(())
    } else {
        Err(Error::BasisMismatch {
            left: a.n_max(),
            right: b.n_max(),
        })
    }
}

/// Block-diagonal operator: block `N` is an `(N+1) x (N+1)` matrix over the
/// states of that block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    basis: Arc<FockBasis>,
    blocks: Vec<DMatrix<Complex64>>,
    hermitian: bool,
}

impl BlockOperator {
    /// Builds an operator from per-block matrix elements `f(N, row, col)`,
    /// with `row`/`col` local to block `N`.
    pub fn from_fn(
        basis: &Arc<FockBasis>,
        hermitian: bool,
        mut f: impl FnMut(usize, usize, usize) -> Complex64,
    ) -> Self {
        let blocks = (0..basis.num_blocks())
            .map(|n| DMatrix::from_fn(n + 1, n + 1, |r, c| f(n, r, c)))
            .collect();
        Self {
            basis: Arc::clone(basis),
            blocks,
            hermitian,
        }
    }

    /// Panics if the block shapes do not match the basis.
    pub fn from_blocks(
        basis: &Arc<FockBasis>,
        blocks: Vec<DMatrix<Complex64>>,
        hermitian: bool,
    ) -> Self {
        assert_eq!(
            blocks.len(),
            basis.num_blocks(),
            "one block per total quanta N is required"
        );
        for (n, b) in blocks.iter().enumerate() {
            assert_eq!(b.shape(), (n + 1, n + 1), "block {n} has the wrong shape");
        }
        Self {
            basis: Arc::clone(basis),
            blocks,
            hermitian,
        }
    }

    pub fn zeros(basis: &Arc<FockBasis>) -> Self {
        Self::from_fn(basis, true, |_, _, _| ZERO)
    }

    pub fn identity(basis: &Arc<FockBasis>) -> Self {
        Self::from_fn(basis, true, |_, r, c| if r == c { ONE } else { ZERO })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn block(&self, n: usize) -> &DMatrix<Complex64> {
        &self.blocks[n]
    }

    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Matrix element between two basis states; zero across blocks.
    pub fn element(&self, row: FockIndex, col: FockIndex) -> Complex64 {
        if row.total() != col.total() || !self.basis.contains(row) {
            return ZERO;
        }
        self.blocks[row.total()][(row.m2, col.m2)]
    }

    /// `max |A - A^dagger|` over all blocks.
    pub fn hermiticity_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| max_abs(&(b - b.adjoint())))
            .fold(0.0, f64::max)
    }

    /// `max |U^dagger U - I|` over all blocks.
    pub fn unitarity_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let n = b.nrows();
                max_abs(&(b.adjoint() * b - DMatrix::identity(n, n)))
            })
            .fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: Arc::clone(&self.basis),
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
            hermitian: self.hermitian,
        }
    }

    /// `self * rhs`, i.e. `rhs` acts first.
    pub fn compose(&self, rhs: &BlockOperator) -> Result<Self> {
        ensure_same_basis(&self.basis, &rhs.basis)?;
        Ok(Self {
            basis: Arc::clone(&self.basis),
            blocks: self
                .blocks
                .iter()
                .zip(&rhs.blocks)
                .map(|(a, b)| a * b)
                .collect(),
            hermitian: false,
        })
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        ensure_same_basis(&self.basis, &state.basis)?;
        let mut out = DVector::from_element(self.basis.dim(), ZERO);
        for (n, block) in self.blocks.iter().enumerate() {
            let range = self.basis.block_range(n);
            let image = block * state.amplitudes.rows(range.start, range.len());
            out.rows_mut(range.start, range.len()).copy_from(&image);
        }
        Ok(StateVector {
            basis: Arc::clone(&self.basis),
            amplitudes: out,
        })
    }

    /// Full `dim x dim` matrix over flat indices.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = self.basis.dim();
        let mut out = DMatrix::from_element(dim, dim, ZERO);
        for (n, block) in self.blocks.iter().enumerate() {
            let start = self.basis.block_range(n).start;
            out.view_mut((start, start), (n + 1, n + 1))
                .copy_from(block);
        }
        out
    }
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// The two halves of the mode-exchange term, kept apart so that a complex
/// coupling `g` can weight them as `g * forward + conj(g) * backward`.
#[derive(Debug, Clone, PartialEq)]
pub struct HopOperator {
    /// `m1^dagger m2`: moves one quantum from mode 2 into mode 1.
    pub forward: BlockOperator,
    /// `m2^dagger m1`: moves one quantum from mode 1 into mode 2.
    pub backward: BlockOperator,
}

impl HopOperator {
    /// `forward + backward`
    pub fn hermitian_sum(&self) -> BlockOperator {
        self.weighted(ONE)
    }

    /// `g * forward + conj(g) * backward`
    pub fn weighted(&self, g: Complex64) -> BlockOperator {
        let blocks = self
            .forward
            .blocks
            .iter()
            .zip(&self.backward.blocks)
            .map(|(f, b)| f * g + b * g.conj())
            .collect();
        BlockOperator {
            basis: Arc::clone(&self.forward.basis),
            blocks,
            hermitian: true,
        }
    }
}

pub fn hop_operator(basis: &Arc<FockBasis>) -> HopOperator {
    // Local index within block N is m2, so m1^dagger m2 maps column k to row
    // k - 1 with amplitude sqrt((m1 + 1) m2) = sqrt((N - k + 1) k).
    let forward = BlockOperator::from_fn(basis, false, |n, r, c| {
        if c >= 1 && r == c - 1 {
            Complex64::from(((n - c + 1) as f64 * c as f64).sqrt())
        } else {
            ZERO
        }
    });
    let backward = forward.adjoint();
    HopOperator { forward, backward }
}
