//! Full state-vector dynamics in a fixed-magnetization sector.
//!
//! The interacting non-reciprocal chain conserves total S^z, so a state
//! started from a product configuration lives forever inside one
//! [`SectorBasis`]. Amplitudes are stored over that basis; evolution is the
//! polynomial propagator followed by renormalisation (the dynamics is
//! non-unitary, so the norm genuinely decays and the normalised state is
//! the physical one). Bit `l` of a basis word is site `l`; a set bit means
//! spin up, and `S^z = +1/2` on set bits.

use std::sync::Arc;

use ndarray::Array2;
use ndarray_linalg::SVD;
use num_complex::Complex64 as C64;

use crate::faber::{faber_apply, FaberCoefficients, LinearOp};
use crate::operators::SectorBasis;
use crate::{Error, Result};

/// Amplitudes over a fixed-magnetization sector.
#[derive(Clone, Debug)]
pub struct ManyBodyState {
    /// The sector the amplitudes are indexed by.
    pub basis: Arc<SectorBasis>,
    /// One complex amplitude per basis word.
    pub amplitudes: Vec<C64>,
}

/// Word of the Néel configuration with up spins on even sites
/// (`|up, down, up, down, ...>` reading from site 0).
pub fn neel_word(n_sites: usize) -> u64 {
    let mask = if n_sites == 64 {
        u64::MAX
    } else {
        (1u64 << n_sites) - 1
    };
    0x5555_5555_5555_5555u64 & mask
}

impl ManyBodyState {
    /// Basis state for a single configuration word.
    pub fn from_word(basis: Arc<SectorBasis>, word: u64) -> Result<Self> {
        let index = basis.index_of(word).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "word {word:#b} has {} up spins, sector holds {}",
                word.count_ones(),
                basis.n_up
            ))
        })?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); basis.dim()];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(ManyBodyState { basis, amplitudes })
    }

    /// Néel state, up spins on even sites. The basis must be the matching
    /// sector.
    pub fn neel_state(basis: Arc<SectorBasis>) -> Result<Self> {
        let word = neel_word(basis.n_sites);
        Self::from_word(basis, word)
    }

    /// Domain wall: the leftmost `n_up` sites (lowest bits) are up.
    pub fn dw_state(basis: Arc<SectorBasis>) -> Result<Self> {
        let word = if basis.n_up == 0 {
            0
        } else {
            (1u64 << basis.n_up) - 1
        };
        Self::from_word(basis, word)
    }

    /// 2-norm of the amplitude vector.
    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Rescales to unit norm, returning the norm it had. A state annihilated
    /// to machine zero cannot be normalised and errors out.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if n < 1e-300 || !n.is_finite() {
            return Err(Error::Numerical(format!(
                "cannot normalise state with norm {n:e}"
            )));
        }
        for a in &mut self.amplitudes {
            *a /= n;
        }
        Ok(n)
    }

    /// Propagates by one step of the coefficient table and renormalises.
    /// Returns the norm the propagated state had before renormalisation —
    /// exactly 1 (to roundoff) for Hermitian generators, decaying otherwise.
    pub fn evolve_step<A: LinearOp + ?Sized>(
        &mut self,
        op: &A,
        table: &FaberCoefficients,
    ) -> Result<f64> {
        if op.dim() != self.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                got: op.dim(),
            });
        }
        self.amplitudes = faber_apply(op, table, &self.amplitudes)?;
        self.normalize()
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &Self) -> Result<C64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                got: other.amplitudes.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Site-resolved magnetization `<S^z_l>`, values in `[-1/2, 1/2]`.
    pub fn magnetization_profile(&self) -> Vec<f64> {
        let l = self.basis.n_sites;
        let mut profile = vec![0.0f64; l];
        for (word, amp) in self.basis.states.iter().zip(self.amplitudes.iter()) {
            let w = amp.norm_sqr();
            for (site, value) in profile.iter_mut().enumerate() {
                *value += if word >> site & 1 == 1 { 0.5 * w } else { -0.5 * w };
            }
        }
        profile
    }

    /// Bond-resolved spin current `I_l = J Im <S^+_l S^-_{l+1}>`, positive
    /// for rightward transport of up spins; `L-1` entries.
    pub fn spin_current_profile(&self, j: f64) -> Vec<f64> {
        let l = self.basis.n_sites;
        let mut profile = vec![0.0f64; l - 1];
        for (word, amp) in self.basis.states.iter().zip(self.amplitudes.iter()) {
            for (bond, value) in profile.iter_mut().enumerate() {
                // S^+_l S^-_{l+1} needs down at l, up at l+1; the image word
                // has the two bits swapped.
                if word >> bond & 1 == 0 && word >> (bond + 1) & 1 == 1 {
                    let image = word ^ (0b11 << bond);
                    let target = self.basis.index_of(image).expect("sector is closed");
                    *value += j * (self.amplitudes[target].conj() * amp).im;
                }
            }
        }
        profile
    }

    /// Von Neumann entropy of the leftmost `cut` sites. The amplitude vector
    /// is reshaped into one (left-configurations x right-configurations)
    /// matrix per left-magnetization block — the sector structure makes the
    /// full matrix block-diagonal — and the squared singular values of all
    /// blocks are the Schmidt weights: `S = -sum p ln p`.
    pub fn bipartite_entropy(&self, cut: usize) -> Result<f64> {
        let l = self.basis.n_sites;
        if cut > l {
            return Err(Error::InvalidBounds(format!(
                "cut {cut} outside the {l}-site chain"
            )));
        }
        if cut == 0 || cut == l {
            return Ok(0.0);
        }
        let n_up = self.basis.n_up;
        let right_sites = l - cut;
        let mut entropy = 0.0;
        let k_min = n_up.saturating_sub(right_sites);
        let k_max = cut.min(n_up);
        for k in k_min..=k_max {
            let left = SectorBasis::new(cut, k)?;
            let right = SectorBasis::new(right_sites, n_up - k)?;
            let mut block: Array2<C64> = Array2::zeros((left.dim(), right.dim()));
            for (i, &lw) in left.states.iter().enumerate() {
                for (m, &rw) in right.states.iter().enumerate() {
                    let word = lw | (rw << cut);
                    if let Some(idx) = self.basis.index_of(word) {
                        block[[i, m]] = self.amplitudes[idx];
                    }
                }
            }
            entropy += schmidt_entropy(&block)?;
        }
        Ok(entropy)
    }
}

/// Sum of `-p ln p` over the squared singular values of one Schmidt block.
/// Blocks with a single row or column have exactly one singular value — the
/// vector 2-norm — which sidesteps LAPACK for the very common tiny blocks.
/// Weights outside `[eps, 1 - eps]` contribute exactly zero (the continuous
/// limit), so product states report exactly 0 despite roundoff.
fn schmidt_entropy(block: &Array2<C64>) -> Result<f64> {
    const EPS: f64 = 1e-12;
    let contribution = |p: f64| if p <= EPS || p >= 1.0 - EPS { 0.0 } else { -p * p.ln() };
    if block.nrows() == 1 || block.ncols() == 1 {
        let p = block.iter().map(|z| z.norm_sqr()).sum::<f64>();
        return Ok(contribution(p));
    }
    let (_, sigma, _) = block.svd(false, false)?;
    Ok(sigma.iter().map(|&s| contribution(s * s)).sum())
}

/// First time the series `values(times)` settles at its late plateau: the
/// plateau is the mean over the final fifth of the samples, and the settling
/// time is the first crossing of 95% of the swing from the initial value to
/// that plateau. `None` when there are too few samples or no crossing.
pub fn estimate_tau_star(times: &[f64], values: &[f64]) -> Option<f64> {
    if times.len() != values.len() || times.len() < 5 {
        return None;
    }
    let tail = values.len() - values.len() / 5;
    let plateau = values[tail..].iter().sum::<f64>() / (values.len() - tail) as f64;
    let swing = plateau - values[0];
    if swing.abs() < 1e-12 {
        return Some(times[0]);
    }
    let target = values[0] + 0.95 * swing;
    times
        .iter()
        .zip(values.iter())
        .find(|(_, &v)| (v - target) * swing.signum() >= 0.0)
        .map(|(&t, _)| t)
}

/// Late-time average of a profile series: the pointwise mean of all
/// snapshots taken at `t >= tau_star`.
pub fn time_averaged_profile(
    times: &[f64],
    profiles: &[Vec<f64>],
    tau_star: f64,
) -> Result<Vec<f64>> {
    if times.len() != profiles.len() || profiles.is_empty() {
        return Err(Error::InvalidParameter(
            "need matching, non-empty times and profiles".into(),
        ));
    }
    let width = profiles[0].len();
    if profiles.iter().any(|p| p.len() != width) {
        return Err(Error::InvalidParameter(
            "profiles have inconsistent lengths".into(),
        ));
    }
    let mut mean = vec![0.0f64; width];
    let mut count = 0usize;
    for (t, profile) in times.iter().zip(profiles.iter()) {
        if *t >= tau_star - 1e-12 {
            for (m, v) in mean.iter_mut().zip(profile.iter()) {
                *m += v;
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InvalidParameter(format!(
            "no snapshots at or after tau_star = {tau_star}"
        )));
    }
    for m in &mut mean {
        *m /= count as f64;
    }
    Ok(mean)
}
