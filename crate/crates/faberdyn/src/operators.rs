//! Sparse operators and lattice models.
//!
//! Everything downstream — the propagator kernel, the Gaussian and many-body
//! layers, the trajectory unravelling — consumes operators through the CSR
//! type defined here. The module also owns the lattice conventions:
//!
//! * **Single-particle chains** act on site amplitudes, index `0 .. L-1`.
//! * **Spin-1/2 / hard-core boson chains** act on bitstring words: bit `l`
//!   (with site 0 the least significant bit) set means spin up at site `l`,
//!   and `S^z` eigenvalues are `±1/2`. Sector-restricted operators use a
//!   [`SectorBasis`] that lists the words of fixed total magnetization in
//!   ascending order.
//!
//! The models implemented are the non-reciprocal hopping chain
//! (`(J ± gamma)/2` asymmetric hopping, the Hatano–Nelson model in its
//! zero-disorder limit), its interacting spin analogue with an exchange
//! anisotropy `Delta`, and two families of jump operators whose Lindblad
//! dynamics reproduces that non-reciprocity on average: a local one-
//! and two-site family (`model A`, magnetization-lossy) and a
//! magnetization-conserving bond family (`model B`).
//!
//! [`gershgorin_bounds`] supplies the spectral bounding boxes the propagator
//! needs. It bounds the *numerical range*, not just the spectrum: for
//! non-normal operators transient growth is governed by the numerical range,
//! and a box that merely contained the eigenvalues could sit far inside it.

use std::io::{BufRead, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::faber::{LinearOp, SpectralBounds};
use crate::{Error, Result};

const I: C64 = C64::new(0.0, 1.0);

/// Largest chain length for which full-space (2^L-dimensional) operators may
/// be built. Keeps accidental exponential blow-ups from getting far.
pub const MAX_FULL_SPACE_SITES: usize = 24;

// ─────────────────────────────────────────────────────────────────────────────
// Sparse matrices
// ─────────────────────────────────────────────────────────────────────────────

/// Square sparse matrix in compressed-sparse-row form with complex entries.
/// Column indices are strictly increasing within each row and every stored
/// value is nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    /// Matrix dimension (operators are square).
    pub dim: usize,
    /// Row start offsets into `col_idx` / `values`, length `dim + 1`.
    pub row_ptr: Vec<usize>,
    /// Column index of each stored entry.
    pub col_idx: Vec<usize>,
    /// Value of each stored entry.
    pub values: Vec<C64>,
}

impl SparseOperator {
    /// Builds a CSR matrix from `(row, col, value)` triplets. Duplicate
    /// coordinates are summed; entries that are exactly zero after merging
    /// are dropped. Indices at or beyond `dim` are rejected.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, C64)]) -> Result<Self> {
        let mut entries: Vec<(usize, usize, C64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::InvalidParameter(format!(
                    "triplet ({r}, {c}) outside a {dim}-dimensional operator"
                )));
            }
            entries.push((r, c, v));
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        // Sorted, so duplicates are adjacent: merge them in one pass.
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some((lr, lc, lv)) if *lr == r && *lc == c => *lv += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(merged.len());
        let mut values = Vec::with_capacity(merged.len());
        let mut row = 0usize;
        for (r, c, v) in merged {
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            while row < r {
                row += 1;
                row_ptr[row] = col_idx.len();
            }
            col_idx.push(c);
            values.push(v);
        }
        while row < dim {
            row += 1;
            row_ptr[row] = col_idx.len();
        }
        Ok(SparseOperator {
            dim,
            row_ptr,
            col_idx,
            values,
        })
    }

    fn drop_zeros(&mut self) {
        if !self.values.iter().any(|v| v.re == 0.0 && v.im == 0.0) {
            return;
        }
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.dim {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                let v = self.values[idx];
                if v.re != 0.0 || v.im != 0.0 {
                    col_idx.push(self.col_idx[idx]);
                    values.push(v);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> Self {
        SparseOperator {
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: vec![C64::from(1.0); dim],
        }
    }

    /// All-zero operator of the given dimension.
    pub fn zero(dim: usize) -> Self {
        SparseOperator {
            dim,
            row_ptr: vec![0; dim + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[C64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    /// `y = A x`. Panics on slice-length mismatch (callers that cannot
    /// guarantee dimensions go through [`crate::faber::faber_apply`], which
    /// checks and reports).
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim, "matvec input length");
        assert_eq!(y.len(), self.dim, "matvec output length");
        for r in 0..self.dim {
            let mut acc = C64::default();
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[idx] * x[self.col_idx[idx]];
            }
            y[r] = acc;
        }
    }

    /// Convenience allocating form of [`SparseOperator::matvec`].
    pub fn apply_to(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::default(); self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// Dense copy of the operator.
    pub fn to_dense(&self) -> Array2<C64> {
        let mut a = Array2::zeros((self.dim, self.dim));
        for r in 0..self.dim {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                a[[r, self.col_idx[idx]]] = self.values[idx];
            }
        }
        a
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> SparseOperator {
        let mut trip = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                trip.push((self.col_idx[idx], r, self.values[idx].conj()));
            }
        }
        SparseOperator::from_triplets(self.dim, &trip).expect("indices already validated")
    }

    /// `self * c` with a scalar.
    pub fn scaled(&self, c: C64) -> SparseOperator {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= c;
        }
        out.drop_zeros();
        out
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: C64, other: &SparseOperator) -> Result<SparseOperator> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut trip = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.dim {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                trip.push((r, self.col_idx[idx], self.values[idx]));
            }
            for idx in other.row_ptr[r]..other.row_ptr[r + 1] {
                trip.push((r, other.col_idx[idx], c * other.values[idx]));
            }
        }
        SparseOperator::from_triplets(self.dim, &trip)
    }

    /// Sparse matrix product `self * other`.
    pub fn matmul(&self, other: &SparseOperator) -> Result<SparseOperator> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut scratch: Vec<C64> = vec![C64::default(); self.dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut trip: Vec<(usize, usize, C64)> = Vec::new();
        for r in 0..self.dim {
            touched.clear();
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                let a = self.values[idx];
                let j = self.col_idx[idx];
                for k in other.row_ptr[j]..other.row_ptr[j + 1] {
                    let c = other.col_idx[k];
                    if scratch[c] == C64::default() && !touched.contains(&c) {
                        touched.push(c);
                    }
                    scratch[c] += a * other.values[k];
                }
            }
            for &c in touched.iter() {
                trip.push((r, c, scratch[c]));
                scratch[c] = C64::default();
            }
        }
        SparseOperator::from_triplets(self.dim, &trip)
    }
}

impl LinearOp for SparseOperator {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.matvec(x, y);
    }
}

// ─────────────────────────────────────────────────────────────────────────────
// Plain-text operator files
// ─────────────────────────────────────────────────────────────────────────────

/// Writes an operator as plain text: a `dim N` line followed by one
/// whitespace-separated `row col re im` line per stored entry. Floats are
/// printed with Rust's shortest-roundtrip formatting, so a save/load cycle
/// reproduces the operator bit for bit. Lines starting with `#` are comments.
pub fn save_operator(op: &SparseOperator, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# sparse operator, entries: row col re im")?;
    writeln!(f, "dim {}", op.dim)?;
    for r in 0..op.dim {
        for idx in op.row_ptr[r]..op.row_ptr[r + 1] {
            let v = op.values[idx];
            writeln!(f, "{} {} {} {}", r, op.col_idx[idx], v.re, v.im)?;
        }
    }
    Ok(())
}

/// Reads an operator written by [`save_operator`]. Malformed lines are
/// reported with their line number.
pub fn load_operator(path: &Path) -> Result<SparseOperator> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut dim: Option<usize> = None;
    let mut trip: Vec<(usize, usize, C64)> = Vec::new();
    for (lineno, line) in f.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut parts = text.split_whitespace();
        let bad = |what: &str| Error::Parse(format!("line {}: {what}: {text:?}", lineno + 1));
        if dim.is_none() {
            if parts.next() != Some("dim") {
                return Err(bad("expected `dim N` header"));
            }
            let n = parts
                .next()
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| bad("bad dimension"))?;
            dim = Some(n);
            continue;
        }
        let mut field = |what: &str| -> Result<f64> {
            parts
                .next()
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| bad(what))
        };
        let r = field("bad row")? as usize;
        let c = field("bad col")? as usize;
        let re = field("bad real part")?;
        let im = field("bad imaginary part")?;
        trip.push((r, c, C64::new(re, im)));
    }
    let dim = dim.ok_or_else(|| Error::Parse("missing `dim N` header".into()))?;
    SparseOperator::from_triplets(dim, &trip)
}

// ─────────────────────────────────────────────────────────────────────────────
// Model parameters
// ─────────────────────────────────────────────────────────────────────────────

/// Chain boundary condition. Periodic boundaries are supported only for the
/// single-particle hopping chain; every interacting builder is open-chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Parameters of the non-reciprocal chain models: `L` sites, symmetric
/// hopping `J`, hopping asymmetry `gamma` (left/right amplitudes
/// `(J ± gamma)/2`), and interaction anisotropy `delta` (ignored by the
/// single-particle builders).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of lattice sites `L`.
    pub n_sites: usize,
    /// Symmetric hopping amplitude `J > 0`; sets the unit of energy.
    pub j: f64,
    /// Non-reciprocity `gamma`: right-moving amplitude `(J + gamma)/2`,
    /// left-moving `(J - gamma)/2`.
    pub gamma: f64,
    /// Ising anisotropy `Delta` of the interacting chain.
    pub delta: f64,
    /// Boundary condition.
    pub boundary: Boundary,
}

impl ModelParams {
    /// Open-boundary parameter set.
    pub fn open(n_sites: usize, j: f64, gamma: f64, delta: f64) -> Self {
        ModelParams {
            n_sites,
            j,
            gamma,
            delta,
            boundary: Boundary::Open,
        }
    }

    /// Validates ranges: at least two sites, `J > 0`, everything finite.
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 sites, got {}",
                self.n_sites
            )));
        }
        if !(self.j.is_finite() && self.j > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hopping J must be positive and finite, got {}",
                self.j
            )));
        }
        if !self.gamma.is_finite() || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(
                "gamma and delta must be finite".into(),
            ));
        }
        Ok(())
    }
}

// ─────────────────────────────────────────────────────────────────────────────
// Fixed-magnetization sector basis
// ─────────────────────────────────────────────────────────────────────────────

/// Basis of the fixed-magnetization sector: all length-`n_sites` bitstring
/// words with exactly `n_up` set bits, in strictly ascending numeric order.
/// Site 0 is the least significant bit; a set bit is spin up.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    /// Chain length.
    pub n_sites: usize,
    /// Number of up spins in the sector.
    pub n_up: usize,
    /// Sector words, ascending.
    pub states: Vec<u64>,
}

impl SectorBasis {
    /// Enumerates the sector. Words are generated in ascending order with
    /// the constant-popcount successor (Gosper's hack).
    pub fn new(n_sites: usize, n_up: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_FULL_SPACE_SITES {
            return Err(Error::InvalidParameter(format!(
                "sector basis supports 1..={MAX_FULL_SPACE_SITES} sites, got {n_sites}"
            )));
        }
        if n_up > n_sites {
            return Err(Error::InvalidParameter(format!(
                "cannot place {n_up} up spins on {n_sites} sites"
            )));
        }
        let mut states = Vec::new();
        if n_up == 0 {
            states.push(0);
        } else {
            let limit = 1u64 << n_sites;
            let mut w = (1u64 << n_up) - 1;
            while w < limit {
                states.push(w);
                let c = w & w.wrapping_neg();
                let r = w + c;
                w = (((r ^ w) >> 2) / c) | r;
            }
        }
        Ok(SectorBasis {
            n_sites,
            n_up,
            states,
        })
    }

    /// Sector dimension.
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Position of a word in the basis, `None` if it lies outside the
    /// sector. Inverse of indexing into [`SectorBasis::states`].
    pub fn index_of(&self, word: u64) -> Option<usize> {
        self.states.binary_search(&word).ok()
    }
}

// ─────────────────────────────────────────────────────────────────────────────
// Model builders
// ─────────────────────────────────────────────────────────────────────────────

/// Single-particle non-reciprocal hopping chain on `L` sites:
/// `H[l, l+1] = -(J + gamma)/2`, `H[l+1, l] = -(J - gamma)/2`
/// (plus the wrap-around pair for periodic boundaries, which need `L >= 3`).
pub fn build_hn_single_particle(params: &ModelParams) -> Result<SparseOperator> {
    params.validate()?;
    let l = params.n_sites;
    let right = C64::from(-(params.j + params.gamma) / 2.0);
    let left = C64::from(-(params.j - params.gamma) / 2.0);
    let mut trip = Vec::with_capacity(2 * l);
    for s in 0..l - 1 {
        trip.push((s, s + 1, right));
        trip.push((s + 1, s, left));
    }
    if params.boundary == Boundary::Periodic {
        if l < 3 {
            return Err(Error::InvalidParameter(
                "periodic boundaries need at least 3 sites".into(),
            ));
        }
        trip.push((l - 1, 0, right));
        trip.push((0, l - 1, left));
    }
    SparseOperator::from_triplets(l, &trip)
}

/// Shared body of the interacting-chain builders: walks the bonds of a word
/// and hands hop targets / Ising weights to the caller through closures.
fn xxz_triplets(
    params: &ModelParams,
    words: &[u64],
    index_of: impl Fn(u64) -> usize,
) -> Vec<(usize, usize, C64)> {
    let l = params.n_sites;
    let right = C64::from(-(params.j + params.gamma) / 2.0); // S+_l S-_{l+1}
    let left = C64::from(-(params.j - params.gamma) / 2.0); // S+_{l+1} S-_l
    let mut trip = Vec::new();
    for (a, &s) in words.iter().enumerate() {
        let mut diag = 0.0;
        for bond in 0..l - 1 {
            let lo = 1u64 << bond;
            let hi = 1u64 << (bond + 1);
            let (bl, bh) = (s & lo != 0, s & hi != 0);
            // S^z S^z is +1/4 on aligned bonds, -1/4 on anti-aligned ones.
            diag += -params.delta * if bl == bh { 0.25 } else { -0.25 };
            if !bl && bh {
                // S+_bond S-_{bond+1}: move the up spin one site left.
                trip.push((index_of((s | lo) & !hi), a, right));
            } else if bl && !bh {
                // S+_{bond+1} S-_bond: move it one site right.
                trip.push((index_of((s & !lo) | hi), a, left));
            }
        }
        if diag != 0.0 {
            trip.push((a, a, C64::from(diag)));
        }
    }
    trip
}

/// Interacting non-reciprocal chain restricted to a magnetization sector:
///
/// ```text
/// H = -sum_l [ (J+gamma)/2 S+_l S-_{l+1} + (J-gamma)/2 S+_{l+1} S-_l
///              + Delta S^z_l S^z_{l+1} ]
/// ```
///
/// on the words of `basis` (the Hamiltonian conserves total magnetization,
/// so the block is exact). Open boundaries only.
pub fn build_xxz_nonreciprocal(params: &ModelParams, basis: &SectorBasis) -> Result<SparseOperator> {
    params.validate()?;
    if params.boundary != Boundary::Open {
        return Err(Error::InvalidParameter(
            "interacting chains are open-boundary only".into(),
        ));
    }
    if basis.n_sites != params.n_sites {
        return Err(Error::DimensionMismatch {
            expected: params.n_sites,
            got: basis.n_sites,
        });
    }
    let trip = xxz_triplets(params, &basis.states, |w| {
        basis
            .index_of(w)
            .expect("hopping conserves magnetization, target word is in the sector")
    });
    SparseOperator::from_triplets(basis.dim(), &trip)
}

/// Same Hamiltonian as [`build_xxz_nonreciprocal`] on the full
/// `2^L`-dimensional space (the state index *is* the word).
pub fn build_xxz_full(params: &ModelParams) -> Result<SparseOperator> {
    params.validate()?;
    if params.boundary != Boundary::Open {
        return Err(Error::InvalidParameter(
            "interacting chains are open-boundary only".into(),
        ));
    }
    let l = params.n_sites;
    if l > MAX_FULL_SPACE_SITES {
        return Err(Error::DimensionCap {
            routine: "build_xxz_full",
            dim: l,
            cap: MAX_FULL_SPACE_SITES,
        });
    }
    let words: Vec<u64> = (0..1u64 << l).collect();
    let trip = xxz_triplets(params, &words, |w| w as usize);
    SparseOperator::from_triplets(1 << l, &trip)
}

/// Full-space spin lowering operator `S-_site` (amplitude 1 from every word
/// with the bit set to the word with it cleared).
fn lowering_full(n_sites: usize, site: usize) -> Vec<(usize, usize, C64)> {
    let bit = 1u64 << site;
    (0..1u64 << n_sites)
        .filter(|w| w & bit != 0)
        .map(|w| ((w & !bit) as usize, w as usize, C64::from(1.0)))
        .collect()
}

/// Jump operators of the local (magnetization-lossy) unravelling, `L + 1`
/// operators on the full `2^L` space:
///
/// ```text
/// L_0     = sqrt|gamma|  S-_0
/// L_{1+l} = sqrt|gamma| (S-_l - i sign(gamma) S-_{l+1}),   l = 0 .. L-2
/// L_L     = sqrt|gamma|  S-_{L-1}
/// ```
///
/// Their dissipator reproduces the non-reciprocal hopping on average: the
/// anti-commutator part of `sum L^t L` is exactly the `gamma` asymmetry of
/// the interacting chain plus a uniform loss `i |gamma| sum_l n_l` (see the
/// identity test below). `gamma = 0` yields all-zero operators.
pub fn build_model_a_jumps(params: &ModelParams) -> Result<Vec<SparseOperator>> {
    params.validate()?;
    let l = params.n_sites;
    if l > MAX_FULL_SPACE_SITES {
        return Err(Error::DimensionCap {
            routine: "build_model_a_jumps",
            dim: l,
            cap: MAX_FULL_SPACE_SITES,
        });
    }
    let dim = 1usize << l;
    let g = params.gamma;
    if g == 0.0 {
        return Ok(vec![SparseOperator::zero(dim); l + 1]);
    }
    let amp = C64::from(g.abs().sqrt());
    let cross = -I * g.signum() * amp;
    let mut ops = Vec::with_capacity(l + 1);
    let scaled = |site: usize, c: C64| -> Vec<(usize, usize, C64)> {
        lowering_full(l, site)
            .into_iter()
            .map(|(r, cidx, v)| (r, cidx, c * v))
            .collect()
    };
    ops.push(SparseOperator::from_triplets(dim, &scaled(0, amp))?);
    for bond in 0..l - 1 {
        let mut trip = scaled(bond, amp);
        trip.extend(scaled(bond + 1, cross));
        ops.push(SparseOperator::from_triplets(dim, &trip)?);
    }
    ops.push(SparseOperator::from_triplets(dim, &scaled(l - 1, amp))?);
    Ok(ops)
}

fn model_b_bond_triplets(
    words: &[u64],
    index_of: impl Fn(u64) -> usize,
    bond: usize,
    amp: C64,
) -> Vec<(usize, usize, C64)> {
    let lo = 1u64 << bond;
    let hi = 1u64 << (bond + 1);
    words
        .iter()
        .enumerate()
        .filter(|&(_, &w)| w & lo == 0 && w & hi != 0)
        .map(|(a, &w)| (index_of((w | lo) & !hi), a, amp))
        .collect()
}

/// Jump operators of the magnetization-conserving unravelling: `L - 1` bond
/// operators `L_l = sqrt(gamma) S+_l S-_{l+1}` on the full space. The rate
/// must be non-negative, so `gamma >= 0` is required.
pub fn build_model_b_jumps(params: &ModelParams) -> Result<Vec<SparseOperator>> {
    params.validate()?;
    if params.gamma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bond-jump rates need gamma >= 0, got {}",
            params.gamma
        )));
    }
    let l = params.n_sites;
    if l > MAX_FULL_SPACE_SITES {
        return Err(Error::DimensionCap {
            routine: "build_model_b_jumps",
            dim: l,
            cap: MAX_FULL_SPACE_SITES,
        });
    }
    let dim = 1usize << l;
    let words: Vec<u64> = (0..1u64 << l).collect();
    let amp = C64::from(params.gamma.sqrt());
    (0..l - 1)
        .map(|bond| {
            SparseOperator::from_triplets(
                dim,
                &model_b_bond_triplets(&words, |w| w as usize, bond, amp),
            )
        })
        .collect()
}

/// [`build_model_b_jumps`] restricted to a magnetization sector (the bond
/// operators conserve magnetization, so the restriction is exact).
pub fn build_model_b_jumps_sector(
    params: &ModelParams,
    basis: &SectorBasis,
) -> Result<Vec<SparseOperator>> {
    params.validate()?;
    if params.gamma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bond-jump rates need gamma >= 0, got {}",
            params.gamma
        )));
    }
    if basis.n_sites != params.n_sites {
        return Err(Error::DimensionMismatch {
            expected: params.n_sites,
            got: basis.n_sites,
        });
    }
    let amp = C64::from(params.gamma.sqrt());
    (0..params.n_sites - 1)
        .map(|bond| {
            SparseOperator::from_triplets(
                basis.dim(),
                &model_b_bond_triplets(
                    &basis.states,
                    |w| basis.index_of(w).expect("bond jumps conserve magnetization"),
                    bond,
                    amp,
                ),
            )
        })
        .collect()
}

/// Non-Hermitian effective Hamiltonian of a jump unravelling:
/// `H_eff = H - (i/2) sum_mu L_mu^t L_mu`. Its anti-Hermitian part is
/// negative semidefinite, so norms decay monotonically between jumps.
pub fn effective_hamiltonian(h: &SparseOperator, jumps: &[SparseOperator]) -> Result<SparseOperator> {
    let mut acc = h.clone();
    for l in jumps {
        if l.dim != h.dim {
            return Err(Error::DimensionMismatch {
                expected: h.dim,
                got: l.dim,
            });
        }
        let ltl = l.dagger().matmul(l)?;
        acc = acc.add_scaled(C64::new(0.0, -0.5), &ltl)?;
    }
    Ok(acc)
}

// ─────────────────────────────────────────────────────────────────────────────
// Spectral bounding boxes
// ─────────────────────────────────────────────────────────────────────────────

/// Gershgorin bounding box of the *numerical range* of `op` (and therefore
/// of its spectrum).
///
/// The projections of the numerical range onto the axes are the numerical
/// ranges of the Hermitian part `(A + A^t)/2` and anti-Hermitian part
/// `(A - A^t)/2i`, both Hermitian matrices whose eigenvalue ranges
/// Gershgorin's theorem bounds directly. This is sharper and safer than
/// applying Gershgorin to `A` itself: for a Hermitian input the imaginary
/// extent comes out exactly zero, and for strongly non-normal inputs the box
/// still covers the transient growth region, not just the eigenvalues.
pub fn gershgorin_bounds(op: &SparseOperator) -> Result<SpectralBounds> {
    if op.dim == 0 {
        return Err(Error::InvalidParameter("empty operator".into()));
    }
    let adj = op.dagger();
    let (mut re_min, mut re_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut im_min, mut im_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in 0..op.dim {
        let (ac, av) = op.row(r);
        let (bc, bv) = adj.row(r);
        let mut h_centre = 0.0;
        let mut k_centre = 0.0;
        let mut h_rad = 0.0;
        let mut k_rad = 0.0;
        // Merge the sorted rows of A and A^t.
        let (mut i, mut j) = (0usize, 0usize);
        while i < ac.len() || j < bc.len() {
            let (col, a, b) = match (ac.get(i), bc.get(j)) {
                (Some(&ca), Some(&cb)) if ca == cb => {
                    let e = (ca, av[i], bv[j]);
                    i += 1;
                    j += 1;
                    e
                }
                (Some(&ca), Some(&cb)) if ca < cb => {
                    let e = (ca, av[i], C64::default());
                    i += 1;
                    e
                }
                (Some(_), Some(&cb)) => {
                    let e = (cb, C64::default(), bv[j]);
                    j += 1;
                    e
                }
                (Some(&ca), None) => {
                    let e = (ca, av[i], C64::default());
                    i += 1;
                    e
                }
                (None, Some(&cb)) => {
                    let e = (cb, C64::default(), bv[j]);
                    j += 1;
                    e
                }
                (None, None) => unreachable!(),
            };
            let herm = 0.5 * (a + b);
            let anti = (a - b) / (2.0 * I);
            if col == r {
                h_centre = herm.re; // hermitian part has real diagonal
                k_centre = anti.re;
            } else {
                h_rad += herm.norm();
                k_rad += anti.norm();
            }
        }
        re_min = re_min.min(h_centre - h_rad);
        re_max = re_max.max(h_centre + h_rad);
        im_min = im_min.min(k_centre - k_rad);
        im_max = im_max.max(k_centre + k_rad);
    }
    SpectralBounds::new(re_min, re_max, im_min, im_max)
}

/// Analytic numerical-range box of the single-particle non-reciprocal chain:
/// splitting `H = -J S - gamma D` into its Hermitian hopping part `S` (norm
/// below 1) and anti-Hermitian asymmetry `D` (norm below 1) gives
/// `Re W in [-J, J]`, `Im W in [-|gamma|, |gamma|]` for either boundary
/// condition. Matches the Gershgorin box here, but is exact in `L`.
pub fn hn_spectral_bounds(params: &ModelParams) -> Result<SpectralBounds> {
    params.validate()?;
    let g = params.gamma.abs();
    SpectralBounds::new(-params.j, params.j, -g, g)
}

/// Analytic numerical-range box of the interacting chain: each bond
/// contributes at most `J/2 + |Delta|/4` to the Hermitian part and
/// `|gamma|/2` to the anti-Hermitian part, so the `L-1` bonds give
/// `Re W in ±(L-1)(J/2 + |Delta|/4)`, `Im W in ±(L-1)|gamma|/2`.
pub fn xxz_spectral_bounds(params: &ModelParams) -> Result<SpectralBounds> {
    params.validate()?;
    let nb = (params.n_sites - 1) as f64;
    let re = nb * (params.j / 2.0 + params.delta.abs() / 4.0);
    let im = nb * params.gamma.abs() / 2.0;
    SpectralBounds::new(-re, re, -im, im)
}

// ─────────────────────────────────────────────────────────────────────────────
// Tests
// ─────────────────────────────────────────────────────────────────────────────
