//! Slow, independent reference implementations.
//!
//! Everything here exists to check the fast paths, so the algorithms are
//! deliberately different from the ones in [`crate::faber`] and the layers
//! above it: the dense propagator uses Padé approximation with scaling and
//! squaring (no polynomial expansions), the Lindblad reference integrates
//! the full density matrix with a classical fixed-step fourth-order rule (no
//! stochastic unravelling), and the hopping-chain spectra and hydrodynamic
//! profiles are closed forms. None of these scale — caps on the dimension
//! keep them honest — but inside their caps they are authoritative.

use ndarray::Array2;
use ndarray_linalg::Inverse;
use num_complex::Complex64 as C64;

use crate::operators::{ModelParams, SparseOperator};
use crate::{Error, Result};

const I: C64 = C64::new(0.0, 1.0);

/// Dimension cap for [`dense_expm`].
pub const DENSE_EXPM_CAP: usize = 4096;

/// Dimension cap for [`rk4_lindblad`].
pub const RK4_CAP: usize = 64;

/// Internal time step of [`rk4_lindblad`], in the energy units of the
/// Hamiltonian (so `1e-3 / J` when `J = 1` sets the scale).
pub const RK4_MAX_STEP: f64 = 1e-3;

// ─────────────────────────────────────────────────────────────────────────────
// Dense propagator
// ─────────────────────────────────────────────────────────────────────────────

fn one_norm(a: &Array2<C64>) -> f64 {
    let mut best = 0.0f64;
    for col in a.columns() {
        best = best.max(col.iter().map(|z| z.norm()).sum());
    }
    best
}

/// Matrix exponential by the degree-13 Padé approximant with scaling and
/// squaring (Higham's method; the constant 5.372 is the largest scaled norm
/// at which the approximant stays at double precision).
fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    const THETA13: f64 = 5.371_920_351_148_152;
    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let norm1 = one_norm(a);
    let s = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.mapv(|z| z / 2f64.powi(s));
    let id: Array2<C64> = Array2::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let u_poly = a6.mapv(|z| z * B[13]) + &a4.mapv(|z| z * B[11]) + &a2.mapv(|z| z * B[9]);
    let u = a.dot(
        &(a6.dot(&u_poly)
            + &a6.mapv(|z| z * B[7])
            + &a4.mapv(|z| z * B[5])
            + &a2.mapv(|z| z * B[3])
            + &id.mapv(|z| z * B[1])),
    );
    let v_poly = a6.mapv(|z| z * B[12]) + &a4.mapv(|z| z * B[10]) + &a2.mapv(|z| z * B[8]);
    let v = a6.dot(&v_poly)
        + &a6.mapv(|z| z * B[6])
        + &a4.mapv(|z| z * B[4])
        + &a2.mapv(|z| z * B[2])
        + &id.mapv(|z| z * B[0]);
    let num = &v + &u;
    let den = &v - &u;
    let mut f = den.inv()?.dot(&num);
    for _ in 0..s {
        f = f.dot(&f);
    }
    Ok(f)
}

/// Dense propagator `exp(-i H t)` of a sparse operator, built by Padé
/// scaling-and-squaring — an algorithm with no overlap with the polynomial
/// expansion it is used to check. Dimension is capped at
/// [`DENSE_EXPM_CAP`]; `t = 0` returns the identity, a diagonal operator
/// exponentiates elementwise, and a nilpotent one terminates its series.
pub fn dense_expm(op: &SparseOperator, t: f64) -> Result<Array2<C64>> {
    if op.dim > DENSE_EXPM_CAP {
        return Err(Error::DimensionCap {
            routine: "dense_expm",
            dim: op.dim,
            cap: DENSE_EXPM_CAP,
        });
    }
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite time {t}")));
    }
    let a = op.to_dense().mapv(|z| -I * t * z);
    expm(&a)
}

/// Full eigenvalue set of a sparse operator via a dense general (non-symmetric)
/// eigensolver, subject to the [`DENSE_EXPM_CAP`] dimension cap. The values
/// come back in LAPACK order, which is not stable across backends — pair them
/// with reference values by nearest-neighbour matching, not by index.
pub fn dense_eigenvalues(op: &SparseOperator) -> Result<Vec<C64>> {
    use ndarray_linalg::Eig;
    if op.dim > DENSE_EXPM_CAP {
        return Err(Error::DimensionCap {
            routine: "dense_eigenvalues",
            dim: op.dim,
            cap: DENSE_EXPM_CAP,
        });
    }
    let (vals, _) = op.to_dense().eig()?;
    Ok(vals.to_vec())
}

// ─────────────────────────────────────────────────────────────────────────────
// Dense Lindblad integration
// ─────────────────────────────────────────────────────────────────────────────

/// Result of [`rk4_lindblad`]: the density matrix at each requested time and
/// the worst trace drift seen along the way. The drift is recorded rather
/// than silently renormalised — it is the integrator's own error meter.
pub struct LindbladSolution {
    /// Density matrices at the requested grid times, in order.
    pub states: Vec<Array2<C64>>,
    /// Maximum of `|tr rho - 1|` over all internal steps.
    pub max_trace_drift: f64,
}

/// Integrates the Lindblad master equation
///
/// ```text
/// d rho/dt = -i [H, rho] + sum_mu ( L rho L^t - {L^t L, rho} / 2 )
/// ```
///
/// with a classical fixed-step fourth-order Runge–Kutta rule, recording
/// `rho(t)` at each point of the ascending `t_grid` (which must start at or
/// after 0; `rho0` is the state at time 0 and must have unit trace). The
/// internal step never exceeds [`RK4_MAX_STEP`]; if the trace drifts by more
/// than 1e-6 the integration aborts with a diagnostic instead of returning
/// polluted data. Dimension is capped at [`RK4_CAP`].
pub fn rk4_lindblad(
    h: &SparseOperator,
    jumps: &[SparseOperator],
    rho0: &Array2<C64>,
    t_grid: &[f64],
) -> Result<LindbladSolution> {
    let dim = h.dim;
    if dim > RK4_CAP {
        return Err(Error::DimensionCap {
            routine: "rk4_lindblad",
            dim,
            cap: RK4_CAP,
        });
    }
    if rho0.nrows() != dim || rho0.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: rho0.nrows().max(rho0.ncols()),
        });
    }
    let trace0: C64 = (0..dim).map(|i| rho0[[i, i]]).sum();
    if (trace0 - C64::from(1.0)).norm() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "initial state must have unit trace, got {trace0}"
        )));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter(
            "time grid must be ascending and non-negative".into(),
        ));
    }
    let hd = h.to_dense();
    let ls: Vec<Array2<C64>> = jumps.iter().map(|l| l.to_dense()).collect();
    let lts: Vec<Array2<C64>> = ls.iter().map(|l| l.t().mapv(|z| z.conj())).collect();
    let ltls: Vec<Array2<C64>> = lts.iter().zip(ls.iter()).map(|(lt, l)| lt.dot(l)).collect();

    let rhs = |rho: &Array2<C64>| -> Array2<C64> {
        let mut d = (hd.dot(rho) - rho.dot(&hd)).mapv(|z| -I * z);
        for ((l, lt), ltl) in ls.iter().zip(lts.iter()).zip(ltls.iter()) {
            d = d + l.dot(rho).dot(lt) - (ltl.dot(rho) + rho.dot(ltl)).mapv(|z| 0.5 * z);
        }
        d
    };

    let mut rho = rho0.clone();
    let mut t = 0.0f64;
    let mut max_drift = 0.0f64;
    let mut states = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        while t < target - 1e-15 {
            let span = target - t;
            let n_sub = (span / RK4_MAX_STEP).ceil().max(1.0);
            let dt = span / n_sub;
            let k1 = rhs(&rho);
            let k2 = rhs(&(&rho + &k1.mapv(|z| 0.5 * dt * z)));
            let k3 = rhs(&(&rho + &k2.mapv(|z| 0.5 * dt * z)));
            let k4 = rhs(&(&rho + &k3.mapv(|z| dt * z)));
            rho = &rho
                + &(k1 + k2.mapv(|z| 2.0 * z) + k3.mapv(|z| 2.0 * z) + k4)
                    .mapv(|z| z * (dt / 6.0));
            t += dt;
            let trace: C64 = (0..dim).map(|i| rho[[i, i]]).sum();
            let drift = (trace - C64::from(1.0)).norm();
            max_drift = max_drift.max(drift);
            if drift > 1e-6 {
                return Err(Error::Numerical(format!(
                    "trace drift {drift:e} at t = {t}; reduce the step or the problem"
                )));
            }
        }
        states.push(rho.clone());
    }
    Ok(LindbladSolution {
        states,
        max_trace_drift: max_drift,
    })
}

// ─────────────────────────────────────────────────────────────────────────────
// Closed-form spectra of the non-reciprocal hopping chain
// ─────────────────────────────────────────────────────────────────────────────

/// Closed-form eigensystem of the open non-reciprocal hopping chain.
/// Columns of `right` / `left` are the right and left eigenvectors of the
/// `n`-th eigenvalue, normalised so that `left^t * right = 1` pairwise.
pub struct HnSpectrum {
    /// Eigenvalues `-sqrt(J^2 - gamma^2) cos(pi n / (L+1))`, `n = 1..L`
    /// (purely imaginary when `|gamma| > J`).
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors: `sqrt(2/(L+1)) e^(l theta) sin(k_n (l+1))` with
    /// `theta = ln((J-gamma)/(J+gamma)) / 2`. For `gamma > 0` the envelope
    /// decays with `l`: right eigenstates pile up at the left edge.
    pub right: Array2<C64>,
    /// Left eigenvectors, the same profile with `theta -> -theta`
    /// (conjugated so the biorthogonality pairing is the plain inner
    /// product).
    pub left: Array2<C64>,
}

/// Closed-form spectrum and eigenvectors of the open-boundary chain via the
/// similarity transform that rescales site `l` by `e^(l theta)`: the
/// transform maps the chain onto a Hermitian one with hopping
/// `sqrt(J^2 - gamma^2)/2`, whose standing-wave spectrum is classical.
pub fn hn_obc_spectrum(params: &ModelParams) -> Result<HnSpectrum> {
    params.validate()?;
    let l = params.n_sites;
    let (j, g) = (params.j, params.gamma);
    if (j + g).abs() < 1e-300 {
        return Err(Error::InvalidParameter(
            "gamma = -J makes the chain one-way; the closed form degenerates".into(),
        ));
    }
    let beta = C64::from(j * j - g * g).sqrt();
    let theta = C64::from((j - g) / (j + g)).ln() * 0.5;
    let norm = (2.0 / (l as f64 + 1.0)).sqrt();
    let mut eigenvalues = Vec::with_capacity(l);
    let mut right = Array2::zeros((l, l));
    let mut left = Array2::zeros((l, l));
    for n in 1..=l {
        let k = std::f64::consts::PI * n as f64 / (l as f64 + 1.0);
        eigenvalues.push(-beta * k.cos());
        for site in 0..l {
            let wave = norm * (k * (site as f64 + 1.0)).sin();
            right[[site, n - 1]] = (theta * site as f64).exp() * wave;
            left[[site, n - 1]] = ((-theta * site as f64).exp()).conj() * wave;
        }
    }
    Ok(HnSpectrum {
        eigenvalues,
        right,
        left,
    })
}

/// Closed-form spectrum of the periodic chain:
/// `E(k_n) = -J cos k_n - i gamma sin k_n`, `k_n = 2 pi n / L` — an ellipse
/// in the complex plane, in sharp contrast to the real (or purely imaginary)
/// open-boundary spectrum.
pub fn hn_pbc_spectrum(params: &ModelParams) -> Result<Vec<C64>> {
    params.validate()?;
    let l = params.n_sites as f64;
    Ok((0..params.n_sites)
        .map(|n| {
            let k = 2.0 * std::f64::consts::PI * n as f64 / l;
            C64::new(-params.j * k.cos(), -params.gamma * k.sin())
        })
        .collect())
}

/// Signed inverse decay rate `1/theta` of the open-chain eigenvector
/// envelopes `|psi_l| ~ e^(l theta)`, `theta = ln((J-gamma)/(J+gamma))/2`.
/// Negative for `gamma > 0` (right eigenvectors localise at the *left*
/// edge), positive for `gamma < 0`, divergent as `gamma -> 0` (extended
/// states). Requires `|gamma| < J`; beyond that the envelopes acquire phases
/// and a single real length no longer describes them.
pub fn localization_length(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if params.gamma.abs() >= params.j {
        return Err(Error::InvalidParameter(format!(
            "localization length needs |gamma| < J, got gamma = {}",
            params.gamma
        )));
    }
    let theta = 0.5 * ((params.j - params.gamma) / (params.j + params.gamma)).ln();
    Ok(1.0 / theta)
}

/// Number of sites that remain dynamically active when boundary accumulation
/// freezes the rest: `L* = L (J - |gamma|) / (J + |gamma|)`, measured from
/// the edge the skin effect piles onto (left for `gamma > 0`, right for
/// `gamma < 0`). Requires `|gamma| < J`.
pub fn effective_length(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if params.gamma.abs() >= params.j {
        return Err(Error::InvalidParameter(format!(
            "effective length needs |gamma| < J, got gamma = {}",
            params.gamma
        )));
    }
    Ok(params.n_sites as f64 * (params.j - params.gamma.abs()) / (params.j + params.gamma.abs()))
}

// ─────────────────────────────────────────────────────────────────────────────
// Hydrodynamic closed forms for domain-wall melting
// ─────────────────────────────────────────────────────────────────────────────

/// Hydrodynamic predictions for the melting of a sharp domain wall on the
/// non-reciprocal chain: inside the ballistic cone `|x| < v_eff t` (with `x`
/// the signed site offset from the wall centre),
///
/// ```text
/// n(x, t) = arccos(x / (v_eff t)) / pi
/// I(x, t) = (J / pi) sqrt(1 - (x / (v_eff t))^2)
/// S(x, t) = (1/6) ln[ v_eff t (1 - (x / (v_eff t))^2)^(3/2) ] + c1
/// ```
///
/// where `v_eff = J - gamma` is the drift-renormalised front velocity and
/// `c1 ~ 0.4785` is the known constant of the Hermitian half-filled chain
/// (Jin–Korepin). Outside the cone the density is the unmelted 1 or 0, the
/// current vanishes, and the entropy formula does not apply (NaN).
pub struct GhdPrediction {
    /// Front velocity `J - gamma`.
    pub v_eff: f64,
    /// Hopping amplitude, which sets the current scale.
    pub j: f64,
    /// Additive entropy constant.
    pub c1: f64,
}

/// Entropy constant of the half-filled free-fermion chain.
pub const ENTROPY_CONSTANT_C1: f64 = 0.4785;

impl GhdPrediction {
    /// Builds the prediction set; requires `gamma < J` so the cone exists.
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        if params.gamma >= params.j {
            return Err(Error::InvalidParameter(format!(
                "hydrodynamic cone needs gamma < J, got gamma = {}",
                params.gamma
            )));
        }
        Ok(GhdPrediction {
            v_eff: params.j - params.gamma,
            j: params.j,
            c1: ENTROPY_CONSTANT_C1,
        })
    }

    fn xi(&self, x: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return if x < 0.0 {
                f64::NEG_INFINITY
            } else if x > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
        }
        x / (self.v_eff * t)
    }

    /// Density profile; 1 (0) on the filled (empty) side outside the cone.
    pub fn density(&self, x: f64, t: f64) -> f64 {
        let xi = self.xi(x, t);
        if xi <= -1.0 {
            1.0
        } else if xi >= 1.0 {
            0.0
        } else {
            xi.acos() / std::f64::consts::PI
        }
    }

    /// Particle current; zero outside the cone.
    pub fn current(&self, x: f64, t: f64) -> f64 {
        let xi = self.xi(x, t);
        if xi.abs() >= 1.0 {
            0.0
        } else {
            self.j / std::f64::consts::PI * (1.0 - xi * xi).sqrt()
        }
    }

    /// Entanglement entropy of a cut at offset `x`; NaN outside the cone
    /// where the formula has no meaning.
    pub fn entropy(&self, x: f64, t: f64) -> f64 {
        let xi = self.xi(x, t);
        if xi.abs() >= 1.0 || t <= 0.0 {
            return f64::NAN;
        }
        (self.v_eff * t * (1.0 - xi * xi).powf(1.5)).ln() / 6.0 + self.c1
    }
}

/// Convenience evaluation of all three hydrodynamic profiles at offset `x`
/// and time `t`: returns `(density, current, entropy)`.
pub fn ghd_predict(params: &ModelParams, t: f64, x: f64) -> Result<(f64, f64, f64)> {
    let g = GhdPrediction::new(params)?;
    Ok((g.density(x, t), g.current(x, t), g.entropy(x, t)))
}

// ─────────────────────────────────────────────────────────────────────────────
// Front tracking
// ─────────────────────────────────────────────────────────────────────────────

/// Position (as a signed offset from `centre`, in sites) where a melting
/// density profile crosses `level`, scanning from the right end and
/// interpolating linearly between the bracketing sites. Returns `None` when
/// the profile never reaches the level.
pub fn front_position(density: &[f64], centre: f64, level: f64) -> Option<f64> {
    let n = density.len();
    for i in (0..n - 1).rev() {
        if density[i] >= level && density[i + 1] < level {
            let frac = (density[i] - level) / (density[i] - density[i + 1]);
            return Some(i as f64 + frac - centre);
        }
    }
    None
}

/// Front velocity from tracked level-contour positions: the least-squares
/// slope of `position(t)`, divided by `cos(pi * level)` — in the arccos
/// melting profile the contour of density `level` moves at
/// `v_eff cos(pi * level)`, so the division converts the tracked speed into
/// the cone-edge velocity. Use a small `level` (e.g. 0.05) so the correction
/// stays a few percent.
pub fn fit_front_velocity(times: &[f64], positions: &[f64], level: f64) -> Result<f64> {
    if times.len() != positions.len() || times.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two (time, position) samples".into(),
        ));
    }
    let n = times.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let pm = positions.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&t, &p) in times.iter().zip(positions.iter()) {
        num += (t - tm) * (p - pm);
        den += (t - tm) * (t - tm);
    }
    if den == 0.0 {
        return Err(Error::InvalidParameter("times are all equal".into()));
    }
    Ok(num / den / (std::f64::consts::PI * level).cos())
}

// ─────────────────────────────────────────────────────────────────────────────
// Tests
// ─────────────────────────────────────────────────────────────────────────────
