//! Quantum-jump unravelling of Lindblad dynamics.
//!
//! Each trajectory alternates deterministic non-unitary propagation under
//! the effective Hamiltonian `H_eff = H - (i/2) Σ_μ L†_μ L_μ` with stochastic
//! jumps. The waiting time until the next jump is sampled by norm decay: draw
//! `r` uniform in (0, 1) and evolve the (unnormalised) state until its squared
//! norm crosses `1 - r` — the squared norm is monotone non-increasing because
//! the anti-Hermitian part of `H_eff` is negative semidefinite. The jump
//! channel is selected with probability `⟨L†_μ L_μ⟩ / Σ_ν ⟨L†_ν L_ν⟩` on the
//! pre-jump state, and the chosen `L_μ` is applied and the state renormalised.
//! Averaging the conditional states over trajectories recovers the Lindblad
//! evolution of every observable.
//!
//! Reproducibility: trajectories draw from a counter-based ChaCha12 generator
//! seeded with the configured seed; ensemble member `i` uses stream `i`, so
//! ensembles are bit-identical for a fixed seed regardless of thread count.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use ndarray_linalg::SVD;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::faber::{
    ellipse_from_bounds, faber_apply, faber_coefficients_bessel, faber_coefficients_contour_auto,
    EllipseParams, FaberCoefficients, BOUNDS_INFLATION, DEFAULT_THRESHOLD,
};
use crate::operators::{effective_hamiltonian, gershgorin_bounds, SparseOperator};
use crate::{Error, Result};

/// Per-trajectory integration settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    /// Base seed of the ensemble; member `i` uses RNG stream `i`.
    pub seed: u64,
    /// Largest deterministic propagation substep.
    pub dt_max: f64,
    /// Root-finder tolerance on the squared-norm target `1 - r`.
    pub norm_tol: f64,
    /// End of the trajectory.
    pub t_final: f64,
    /// Times at which observables are recorded, ascending, within
    /// `[0, t_final]`. A jump landing exactly on a snapshot time is applied
    /// first; the snapshot sees the post-jump state.
    pub snapshot_times: Vec<f64>,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt_max must be positive, got {}",
                self.dt_max
            )));
        }
        if !(self.norm_tol > 0.0 && self.norm_tol <= 1e-6) {
            return Err(Error::InvalidParameter(format!(
                "norm_tol must lie in (0, 1e-6], got {}",
                self.norm_tol
            )));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_final must be non-negative, got {}",
                self.t_final
            )));
        }
        let ts = &self.snapshot_times;
        if ts.iter().any(|t| !t.is_finite() || *t < 0.0 || *t > self.t_final) {
            return Err(Error::InvalidParameter(
                "snapshot times must lie in [0, t_final]".into(),
            ));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "snapshot times must be strictly ascending".into(),
            ));
        }
        Ok(())
    }
}

/// One recorded jump: when and through which channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub channel: usize,
}

/// Observable values on the normalised conditional state at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub values: Vec<f64>,
}

/// Everything one trajectory produced. Jump times are strictly increasing
/// within `[0, t_final]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub stream: u64,
    pub jump_events: Vec<JumpEvent>,
    pub snapshots: Vec<Snapshot>,
}

/// Observable extractor evaluated on the normalised conditional state.
pub type Observer<'a> = &'a (dyn Fn(f64, &[C64]) -> Vec<f64> + Sync);

/// The sampled waiting time (none if the norm never crossed the target by
/// `t_max`) together with the unnormalised state at that time.
#[derive(Clone, Debug)]
pub struct WaitingOutcome {
    pub time: Option<f64>,
    pub state: Vec<C64>,
}

/// Shared, read-only propagation context for an ensemble: the effective
/// Hamiltonian, the jump operators, and one coefficient table for the
/// standard substep. Partial substeps (snapshot alignment, bisection) build
/// contour-method tables on demand.
pub struct JumpModel {
    pub h_eff: SparseOperator,
    pub jumps: Vec<SparseOperator>,
    ellipse: EllipseParams,
    table: FaberCoefficients,
    dt_max: f64,
}

impl JumpModel {
    /// Builds `H_eff = H - (i/2) Σ L†L`, fits the spectral ellipse to its
    /// numerical-range box (with the standard safety inflation), and
    /// tabulates coefficients for steps of `dt_max`.
    pub fn new(h: &SparseOperator, jumps: Vec<SparseOperator>, dt_max: f64) -> Result<Self> {
        if !(dt_max.is_finite() && dt_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt_max must be positive, got {dt_max}"
            )));
        }
        for l in &jumps {
            if l.dim != h.dim {
                return Err(Error::DimensionMismatch {
                    expected: h.dim,
                    got: l.dim,
                });
            }
        }
        let h_eff = effective_hamiltonian(h, &jumps)?;
        let bounds = gershgorin_bounds(&h_eff)?.inflated(BOUNDS_INFLATION);
        let ellipse = ellipse_from_bounds(&bounds)?;
        let table = faber_coefficients_bessel(&ellipse, dt_max, DEFAULT_THRESHOLD)?;
        Ok(JumpModel {
            h_eff,
            jumps,
            ellipse,
            table,
            dt_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.h_eff.dim
    }

    /// Polynomial order of the precomputed full-step coefficient table.
    pub fn table_order(&self) -> usize {
        self.table.order()
    }

    /// `e^{-i H_eff dt} psi`, unnormalised. Uses the precomputed table for
    /// full substeps and a contour table for arbitrary remainders.
    fn propagate(&self, psi: &[C64], dt: f64) -> Result<Vec<C64>> {
        if dt <= 0.0 {
            return Ok(psi.to_vec());
        }
        if (dt - self.dt_max).abs() <= 1e-14 * self.dt_max {
            faber_apply(&self.h_eff, &self.table, psi)
        } else {
            let table = faber_coefficients_contour_auto(&self.ellipse, dt, DEFAULT_THRESHOLD)?;
            faber_apply(&self.h_eff, &table, psi)
        }
    }
}

/// The deterministic generator for trajectory `stream` of ensemble `seed`.
pub fn trajectory_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn norm_sqr_of(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn normalized_copy(v: &[C64]) -> Result<Vec<C64>> {
    let n = norm_sqr_of(v).sqrt();
    if n < 1e-300 || !n.is_finite() {
        return Err(Error::Numerical(format!(
            "cannot normalise state with norm {n:e}"
        )));
    }
    Ok(v.iter().map(|z| z / n).collect())
}

/// Squared-norm monotonicity guard between jumps; a violation beyond slack
/// means the effective Hamiltonian's decay structure is broken.
fn check_monotone(prev: f64, next: f64) -> Result<()> {
    if next > prev + 1e-12 {
        return Err(Error::Numerical(format!(
            "squared norm increased between jumps: {prev} -> {next}"
        )));
    }
    Ok(())
}

/// Evolves the normalised `psi0` from `t0` until the squared norm crosses
/// `1 - r`, stepping in `dt_max` increments and bisecting (at most 60
/// iterations) inside the bracketing substep; the squared norm is monotone
/// non-increasing, so the bracket is correct. Returns the crossing time and
/// the unnormalised state there, or `time: None` with the state at `t_max`
/// if the norm never crosses — a state with zero total jump rate (dark
/// state) is reported this way, not as an error.
pub fn sample_waiting_time(
    model: &JumpModel,
    psi0: &[C64],
    r: f64,
    t0: f64,
    t_max: f64,
    norm_tol: f64,
) -> Result<WaitingOutcome> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "uniform draw must lie in [0, 1), got {r}"
        )));
    }
    if (norm_sqr_of(psi0) - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(
            "waiting-time sampling requires a normalised state".into(),
        ));
    }
    let target = 1.0 - r;
    let mut t = t0;
    let mut psi = psi0.to_vec();
    let mut prev_n2 = norm_sqr_of(&psi);
    if prev_n2 <= target {
        // r -> 0+ degenerates to an immediate crossing at t0.
        return Ok(WaitingOutcome {
            time: Some(t0),
            state: psi,
        });
    }
    while t < t_max - 1e-15 {
        let h = (t_max - t).min(model.dt_max);
        let saved = psi.clone();
        psi = model.propagate(&psi, h)?;
        let n2 = norm_sqr_of(&psi);
        check_monotone(prev_n2, n2)?;
        if n2 <= target {
            let (tau, state) = bisect_crossing(model, &saved, t, h, target, norm_tol, psi)?;
            return Ok(WaitingOutcome {
                time: Some(tau),
                state,
            });
        }
        prev_n2 = n2;
        t += h;
    }
    Ok(WaitingOutcome { time: None, state: psi })
}

/// Bisection for the norm crossing inside `[t, t + h]`, given the state at
/// the bracket start and the already-propagated state at the bracket end.
fn bisect_crossing(
    model: &JumpModel,
    start: &[C64],
    t: f64,
    h: f64,
    target: f64,
    norm_tol: f64,
    end_state: Vec<C64>,
) -> Result<(f64, Vec<C64>)> {
    let mut lo = 0.0f64;
    let mut hi = h;
    let mut lo_state = start.to_vec();
    let mut best = (h, end_state);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let mid_state = model.propagate(&lo_state, mid - lo)?;
        let n2 = norm_sqr_of(&mid_state);
        if (n2 - target).abs() <= norm_tol {
            return Ok((t + mid, mid_state));
        }
        if n2 > target {
            lo = mid;
            lo_state = mid_state;
        } else {
            hi = mid;
            best = (mid, mid_state);
        }
    }
    Ok((t + best.0, best.1))
}

/// Samples the jump channel with probability `⟨L†_μ L_μ⟩ / Σ_ν ⟨L†_ν L_ν⟩`
/// on the (normalised) pre-jump state. Channels with zero rate are never
/// selected; all rates zero is an error — the waiting-time sampler cannot
/// deliver a crossing for such a state.
pub fn select_channel(
    state: &[C64],
    jumps: &[SparseOperator],
    rng: &mut impl Rng,
) -> Result<usize> {
    let weights: Vec<f64> = jumps
        .iter()
        .map(|l| norm_sqr_of(&l.apply_to(state)))
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Numerical(format!(
            "no active jump channel (total rate {total})"
        )));
    }
    let draw = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_active = None;
    for (idx, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_active = Some(idx);
            if draw < acc {
                return Ok(idx);
            }
        }
    }
    Ok(last_active.expect("total > 0 implies an active channel"))
}

/// `L|psi> / ||L|psi>||`. A zero-norm image is a hard error: channel
/// selection must make it unreachable.
pub fn apply_jump(state: &[C64], l: &SparseOperator) -> Result<Vec<C64>> {
    let image = l.apply_to(state);
    let n = norm_sqr_of(&image).sqrt();
    if n < 1e-150 {
        return Err(Error::Numerical(
            "jump image has zero norm; channel selection should have excluded it".into(),
        ));
    }
    Ok(image.iter().map(|z| z / n).collect())
}

/// Runs one trajectory: deterministic decay segments, norm-triggered jumps,
/// snapshots of `observer` on the normalised conditional state at the
/// configured times. `stream` selects the RNG stream (ensemble member
/// index); the record is bit-reproducible for fixed `(seed, stream)`.
pub fn run_trajectory(
    model: &JumpModel,
    config: &TrajectoryConfig,
    stream: u64,
    initial: &[C64],
    observer: Observer,
) -> Result<TrajectoryRecord> {
    config.validate()?;
    if initial.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: initial.len(),
        });
    }
    let mut rng = trajectory_rng(config.seed, stream);
    let mut psi = normalized_copy(initial)?; // unnormalised between jumps
    let mut prev_n2 = 1.0f64;
    let mut target = 1.0 - rng.random::<f64>();
    let mut t = 0.0f64;
    let mut jump_events: Vec<JumpEvent> = Vec::new();
    let mut snapshots = Vec::with_capacity(config.snapshot_times.len());

    // Stop points: every snapshot, then the final time.
    let mut stops: Vec<(f64, bool)> = config.snapshot_times.iter().map(|&s| (s, true)).collect();
    if stops.last().is_none_or(|&(s, _)| s < config.t_final) {
        stops.push((config.t_final, false));
    }

    for (stop, is_snapshot) in stops {
        while t < stop - 1e-12 {
            let h = (stop - t).min(config.dt_max.min(model.dt_max));
            let saved = psi.clone();
            let next = model.propagate(&psi, h)?;
            let n2 = norm_sqr_of(&next);
            check_monotone(prev_n2, n2)?;
            if !model.jumps.is_empty() && n2 <= target {
                let (tau, state) =
                    bisect_crossing(model, &saved, t, h, target, config.norm_tol, next)?;
                let pre_jump = normalized_copy(&state)?;
                let channel = select_channel(&pre_jump, &model.jumps, &mut rng)?;
                psi = apply_jump(&pre_jump, &model.jumps[channel])?;
                let time = match jump_events.last() {
                    Some(prev) if tau <= prev.time => prev.time.next_up(),
                    _ => tau,
                };
                jump_events.push(JumpEvent { time, channel });
                t = tau;
                prev_n2 = 1.0;
                target = 1.0 - rng.random::<f64>();
            } else {
                psi = next;
                prev_n2 = n2;
                t += h;
            }
        }
        if is_snapshot {
            let conditional = normalized_copy(&psi)?;
            snapshots.push(Snapshot {
                time: stop,
                values: observer(stop, &conditional),
            });
        }
    }

    Ok(TrajectoryRecord {
        seed: config.seed,
        stream,
        jump_events,
        snapshots,
    })
}

/// Runs `n_traj` independent trajectories (streams `0..n_traj`) in parallel.
/// The result order and every record are independent of the thread count.
pub fn run_ensemble(
    model: &JumpModel,
    config: &TrajectoryConfig,
    n_traj: usize,
    initial: &[C64],
    observer: Observer,
) -> Result<Vec<TrajectoryRecord>> {
    (0..n_traj as u64)
        .into_par_iter()
        .map(|stream| run_trajectory(model, config, stream, initial, observer))
        .collect()
}

/// Compensated (Kahan) accumulator for order-stable ensemble reductions.
#[derive(Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
    fn value(self) -> f64 {
        self.sum
    }
}

/// Ensemble mean and standard error of every observable component at every
/// snapshot time.
#[derive(Clone, Debug)]
pub struct EnsembleCurves {
    pub times: Vec<f64>,
    /// `mean[k][j]`: component `j` at snapshot `k`.
    pub mean: Vec<Vec<f64>>,
    /// Standard error of the mean, same layout.
    pub stderr: Vec<Vec<f64>>,
}

/// Averages the snapshot values across records. All records must share the
/// snapshot layout (same times, same component count). Standard error is the
/// sample estimate `sqrt(Σ(x - mean)² / (N(N-1)))`; zero for a single record
/// or identical records.
pub fn ensemble_average(records: &[TrajectoryRecord]) -> Result<EnsembleCurves> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty ensemble".into()))?;
    let times: Vec<f64> = first.snapshots.iter().map(|s| s.time).collect();
    let widths: Vec<usize> = first.snapshots.iter().map(|s| s.values.len()).collect();
    for r in records {
        let ok = r.snapshots.len() == times.len()
            && r
                .snapshots
                .iter()
                .zip(times.iter().zip(widths.iter()))
                .all(|(s, (&t, &w))| s.time == t && s.values.len() == w);
        if !ok {
            return Err(Error::InvalidParameter(
                "records have inconsistent snapshot layouts".into(),
            ));
        }
    }
    let n = records.len() as f64;
    let mut mean = Vec::with_capacity(times.len());
    let mut stderr = Vec::with_capacity(times.len());
    for (k, &w) in widths.iter().enumerate() {
        let mut sums = vec![KahanSum::default(); w];
        for r in records {
            for (s, v) in sums.iter_mut().zip(r.snapshots[k].values.iter()) {
                s.add(*v);
            }
        }
        let m: Vec<f64> = sums.into_iter().map(|s| s.value() / n).collect();
        let mut devs = vec![KahanSum::default(); w];
        for r in records {
            for ((d, v), mu) in devs.iter_mut().zip(r.snapshots[k].values.iter()).zip(m.iter()) {
                let e = v - mu;
                d.add(e * e);
            }
        }
        let se: Vec<f64> = devs
            .into_iter()
            .map(|d| {
                if records.len() < 2 {
                    0.0
                } else {
                    (d.value() / (n * (n - 1.0))).sqrt()
                }
            })
            .collect();
        mean.push(m);
        stderr.push(se);
    }
    Ok(EnsembleCurves {
        times,
        mean,
        stderr,
    })
}

/// Mean and standard error of a single observable component over the
/// ensemble, as `(time, mean, stderr)` rows — the trajectory-averaged
/// conditional entanglement entropy when `component` indexes an entropy
/// value in the snapshot layout.
pub fn conditional_entropy_average(
    records: &[TrajectoryRecord],
    component: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    let curves = ensemble_average(records)?;
    curves
        .times
        .iter()
        .zip(curves.mean.iter().zip(curves.stderr.iter()))
        .map(|(&t, (m, s))| {
            let v = m.get(component).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "component {component} outside the snapshot width {}",
                    m.len()
                ))
            })?;
            Ok((t, *v, s[component]))
        })
        .collect()
}

/// Two-sided Kolmogorov–Smirnov statistic `D = sup |F_emp - F|`. For an
/// ensemble of `n` samples the 1% critical value is `1.628 / sqrt(n)`
/// (asymptotic). Samples need not be pre-sorted.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

// ─────────────────────────────────────────────────────────────────────────────
// Full-space spin observables
// ─────────────────────────────────────────────────────────────────────────────

/// `⟨S^z_l⟩` per site on a full `2^n_sites` state (bit `l` set = up).
pub fn full_magnetization(amplitudes: &[C64], n_sites: usize) -> Vec<f64> {
    let mut profile = vec![0.0f64; n_sites];
    for (word, amp) in amplitudes.iter().enumerate() {
        let w = amp.norm_sqr();
        for (site, value) in profile.iter_mut().enumerate() {
            *value += if word >> site & 1 == 1 { 0.5 * w } else { -0.5 * w };
        }
    }
    profile
}

/// Von Neumann entropy of the leftmost `cut` sites of a full-space state:
/// reshape into a `2^cut x 2^(n-cut)` matrix, Schmidt weights from its
/// singular values, `S = -Σ σ² ln σ²` (weights below 1e-12 contribute 0).
pub fn full_bipartite_entropy(amplitudes: &[C64], n_sites: usize, cut: usize) -> Result<f64> {
    if amplitudes.len() != 1usize << n_sites {
        return Err(Error::DimensionMismatch {
            expected: 1usize << n_sites,
            got: amplitudes.len(),
        });
    }
    if cut > n_sites {
        return Err(Error::InvalidBounds(format!(
            "cut {cut} outside the {n_sites}-site chain"
        )));
    }
    if cut == 0 || cut == n_sites {
        return Ok(0.0);
    }
    // Weights outside [eps, 1 - eps] contribute exactly zero — the
    // continuous limit of -p ln p — so product states report exactly 0
    // instead of accumulating roundoff floors.
    const EPS: f64 = 1e-12;
    let contribution = |p: f64| if p <= EPS || p >= 1.0 - EPS { 0.0 } else { -p * p.ln() };
    let rows = 1usize << cut;
    let cols = 1usize << (n_sites - cut);
    let mut m: Array2<C64> = Array2::zeros((rows, cols));
    for (word, &amp) in amplitudes.iter().enumerate() {
        m[[word & (rows - 1), word >> cut]] = amp;
    }
    if rows == 1 || cols == 1 {
        return Ok(contribution(norm_sqr_of(amplitudes)));
    }
    let (_, sigma, _) = m.svd(false, false)?;
    Ok(sigma.iter().map(|&s| contribution(s * s)).sum())
}

/// Standard spin-chain observer: the magnetization profile (`n_sites`
/// values) followed by the half-chain entanglement entropy (one value at
/// component index `n_sites`).
pub fn standard_spin_observer(n_sites: usize) -> impl Fn(f64, &[C64]) -> Vec<f64> + Sync {
    move |_t, state| {
        let mut values = full_magnetization(state, n_sites);
        values.push(
            full_bipartite_entropy(state, n_sites, n_sites / 2)
                .expect("observer state has full-space dimension"),
        );
        values
    }
}

// ─────────────────────────────────────────────────────────────────────────────
// Serialization
// ─────────────────────────────────────────────────────────────────────────────

/// Writes records as JSON lines, one trajectory per line.
pub fn write_records_jsonl(path: &Path, records: &[TrajectoryRecord]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::Parse(e.to_string()))?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a JSON-lines trajectory file written by [`write_records_jsonl`].
pub fn read_records_jsonl(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(|e| Error::Parse(e.to_string()))?);
    }
    Ok(records)
}

/// Renders ensemble curves as CSV: `t,mean_0,..,stderr_0,..` with plain
/// shortest-roundtrip float formatting — byte-identical across reruns.
pub fn ensemble_to_csv(curves: &EnsembleCurves) -> String {
    let width = curves.mean.first().map_or(0, |m| m.len());
    let mut out = String::from("t");
    for j in 0..width {
        out.push_str(&format!(",mean_{j}"));
    }
    for j in 0..width {
        out.push_str(&format!(",stderr_{j}"));
    }
    out.push('\n');
    for (k, &t) in curves.times.iter().enumerate() {
        out.push_str(&format!("{t}"));
        for v in &curves.mean[k] {
            out.push_str(&format!(",{v}"));
        }
        for v in &curves.stderr[k] {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}
