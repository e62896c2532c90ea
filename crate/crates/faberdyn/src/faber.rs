//! Faber-polynomial propagator kernel.
//!
//! Approximates `exp(-iHt)|psi>` for a square operator `H` that need not be
//! Hermitian. The only spectral information required is an axis-aligned box
//! in the complex plane that contains the numerical range of `H`:
//!
//! 1. [`ellipse_from_bounds`] maps the box to the smallest member of a
//!    one-parameter family of ellipses passing through the box corners,
//!    encoded as [`EllipseParams`] (a scale `lambda`, a centre `gamma0`, and
//!    an eccentricity-like capacity parameter `gamma1`).
//! 2. [`faber_coefficients_bessel`] / [`faber_coefficients_contour`] expand
//!    the exponential in the Faber polynomials of that ellipse. For a real
//!    ellipse the coefficients have a Bessel-function closed form; the
//!    contour route evaluates the defining Cauchy integral by quadrature on
//!    the unit circle and works in every case (including purely imaginary
//!    spectra, handled by a 90-degree rotation of the complex plane).
//! 3. [`faber_apply`] sums the series with a three-term recurrence that
//!    needs only two auxiliary vectors, so the cost is one operator
//!    application per polynomial order.
//!
//! Faber polynomials of an ellipse are uniformly bounded by 2 on the domain,
//! so the recurrence is numerically benign as long as the bounding box really
//! contains the numerical range; [`crate::operators::gershgorin_bounds`]
//! produces such a box for arbitrary sparse operators.
//!
//! The Hermitian special case (`gamma1 == 1`, spectrum on a real segment)
//! reduces to the classical Chebyshev propagator, provided here as
//! [`chebyshev_coefficients`] / [`chebyshev_apply`] both as a fast path and
//! as an independent cross-check of the general machinery.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::{Error, Result};

/// Default truncation threshold: the expansion is cut once the coefficient
/// magnitude falls below this value, which puts the series remainder at the
/// level of double-precision roundoff.
pub const DEFAULT_THRESHOLD: f64 = 1e-16;

/// Relative margin by which spectral bounding boxes are inflated before an
/// ellipse is built from them. Covers estimation slop in the bounds and keeps
/// the numerical range strictly inside the ellipse rather than on its rim.
pub const BOUNDS_INFLATION: f64 = 0.05;

const I: C64 = C64::new(0.0, 1.0);

// ─────────────────────────────────────────────────────────────────────────────
// Spectral bounding boxes
// ─────────────────────────────────────────────────────────────────────────────

/// Axis-aligned box in the complex plane enclosing the numerical range (and
/// therefore the spectrum) of an operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralBounds {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SpectralBounds {
    /// Builds a box after validating that it is finite and non-inverted.
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let b = SpectralBounds {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        b.validate()?;
        Ok(b)
    }

    /// Checks that all four edges are finite and the box is not inverted.
    pub fn validate(&self) -> Result<()> {
        let vals = [self.re_min, self.re_max, self.im_min, self.im_max];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBounds(format!("non-finite edge in {self:?}")));
        }
        if self.re_min > self.re_max || self.im_min > self.im_max {
            return Err(Error::InvalidBounds(format!("inverted box {self:?}")));
        }
        Ok(())
    }

    /// Box centre.
    pub fn centre(&self) -> C64 {
        C64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    /// Half-widths `(p, ell)` along the real and imaginary axes.
    pub fn half_widths(&self) -> (f64, f64) {
        (
            0.5 * (self.re_max - self.re_min),
            0.5 * (self.im_max - self.im_min),
        )
    }

    /// Returns the box with both half-widths scaled by `1 + frac` about the
    /// (unchanged) centre. A degenerate direction of zero width stays exactly
    /// degenerate, which preserves e.g. the realness of Hermitian spectra.
    pub fn inflated(&self, frac: f64) -> SpectralBounds {
        let c = self.centre();
        let (p, ell) = self.half_widths();
        SpectralBounds {
            re_min: c.re - p * (1.0 + frac),
            re_max: c.re + p * (1.0 + frac),
            im_min: c.im - ell * (1.0 + frac),
            im_max: c.im + ell * (1.0 + frac),
        }
    }

    /// True if `z` lies inside the box (edges included).
    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

// ─────────────────────────────────────────────────────────────────────────────
// Bounding ellipse
// ─────────────────────────────────────────────────────────────────────────────

/// Parameters of the bounding ellipse and of the affine rescaling that maps
/// the physical operator `H` onto the expansion variable `H/lambda`.
///
/// The ellipse is the image of the unit circle under
/// `xi(w) = w + gamma0 + gamma1 / w`: centre `gamma0`, real semi-axis
/// `1 + gamma1`, imaginary semi-axis `1 - gamma1`, all in rescaled units.
/// `gamma1` always lands in `[-1, 1]`; the endpoints are the degenerate
/// segments (purely real / purely imaginary spectra) and `gamma1 = 0` is a
/// circle. The scale `lambda` is chosen so that the ellipse passes exactly
/// through the rescaled corners of the bounding box.
#[derive(Clone, Copy, Debug)]
pub struct EllipseParams {
    /// Rescaling factor: the expansion acts on `H / lambda`.
    pub lambda: f64,
    /// Ellipse centre in rescaled units (bounding-box centre over `lambda`).
    pub gamma0: C64,
    /// Shape parameter of the conformal map `w + gamma0 + gamma1/w`.
    pub gamma1: f64,
    /// True if the complex plane was rotated by 90 degrees (`z -> i z`)
    /// before fitting, used for boxes of zero real width where the standard
    /// parametrisation degenerates. [`faber_apply`] compensates by applying
    /// `iH` in place of `H` and the coefficient routines by using an
    /// effective complex time.
    pub rotated: bool,
}

/// Fits the bounding ellipse to a spectral box.
///
/// The half-widths `p` (real) and `ell` (imaginary) determine
///
/// ```text
/// lambda = ((ell^(2/3) + p^(2/3))^(3/2)) / 2
/// gamma1 = (pt^(2/3) + lt^(2/3)) * (pt^(4/3) - lt^(4/3)) / 4,   pt = p/lambda, lt = ell/lambda
/// gamma0 = centre / lambda
/// ```
///
/// With this normalisation `pt^(2/3) + lt^(2/3) = 2^(2/3)` identically, the
/// rescaled corners `(±pt, ±lt)` lie exactly on the ellipse, and the limits
/// come out right: a real segment gives `lambda = p/2, gamma1 = 1`
/// (Chebyshev), a square box gives `gamma1 = 0` (Taylor on a circle), and a
/// taller-than-wide box gives `gamma1 < 0` (ellipse with long imaginary
/// axis). A box of zero real width is first rotated by 90 degrees (see
/// [`EllipseParams::rotated`]); a box degenerate in both directions is
/// rejected.
pub fn ellipse_from_bounds(bounds: &SpectralBounds) -> Result<EllipseParams> {
    bounds.validate()?;
    let (mut p, mut ell) = bounds.half_widths();
    let mut centre = bounds.centre();
    if p == 0.0 && ell == 0.0 {
        return Err(Error::ZeroSpectralBox);
    }

    // Zero real width: rotate spectrum by i so the long axis becomes real.
    let rotated = p == 0.0;
    if rotated {
        centre *= I;
        (p, ell) = (ell, 0.0);
    }

    let lambda = 0.5 * (ell.powf(2.0 / 3.0) + p.powf(2.0 / 3.0)).powf(1.5);
    let pt = p / lambda;
    let lt = ell / lambda;
    let gamma1 = (pt.powf(2.0 / 3.0) + lt.powf(2.0 / 3.0))
        * (pt.powf(4.0 / 3.0) - lt.powf(4.0 / 3.0))
        / 4.0;
    Ok(EllipseParams {
        lambda,
        gamma0: centre / lambda,
        gamma1,
        rotated,
    })
}

impl EllipseParams {
    /// Point on the ellipse rim at circle angle `phi`, in rescaled units.
    pub fn rim(&self, phi: f64) -> C64 {
        let w = C64::from_polar(1.0, phi);
        w + self.gamma0 + self.gamma1 / w
    }
}

// ─────────────────────────────────────────────────────────────────────────────
// Operator-application interface
// ─────────────────────────────────────────────────────────────────────────────

/// Minimal interface the propagator needs from an operator: its dimension and
/// the action on a vector. Implemented by
/// [`crate::operators::SparseOperator`]; dense matrices or matrix-free
/// closures can implement it too.
pub trait LinearOp {
    /// Vector-space dimension (operators are square).
    fn dim(&self) -> usize;
    /// Computes `y = A x`. Both slices have length [`LinearOp::dim`].
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

// ─────────────────────────────────────────────────────────────────────────────
// Expansion coefficients
// ─────────────────────────────────────────────────────────────────────────────

/// Truncated Faber expansion of `exp(-iH dt)`: the propagator is
/// `sum_n coeffs[n] F_n(H/lambda)` with `F_n` the Faber polynomials of the
/// ellipse described by `params`.
#[derive(Clone, Debug)]
pub struct FaberCoefficients {
    /// Physical time step the table was built for.
    pub dt: f64,
    /// Expansion coefficients `c_0 .. c_{N_p - 1}`.
    pub coeffs: Vec<C64>,
    /// Ellipse the polynomials belong to.
    pub params: EllipseParams,
}

impl FaberCoefficients {
    /// Number of polynomials `N_p` in the truncated expansion.
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }
}

fn validate_step(dt: f64, threshold: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive and finite, got {dt}"
        )));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "truncation threshold must lie in (0, 1), got {threshold}"
        )));
    }
    Ok(())
}

/// Smallest order `N` (at least 2) such that the analytic envelope
/// `pref * (a)^n / n!` drops below `cut` at `n = N - 1`, plus a small margin.
/// The envelope bounds `|c_n|` for every coefficient route, so it is a safe
/// a-priori order estimate.
fn envelope_order(a: f64, ln_pref: f64, cut: f64) -> Result<usize> {
    let ln_cut = cut.ln();
    let mut ln_term = ln_pref; // ln of envelope at n = 0
    let mut n = 0usize;
    loop {
        if n as f64 >= a && ln_term < ln_cut {
            return Ok((n + 2).max(2));
        }
        n += 1;
        if n > 100_000 {
            return Err(Error::InvalidParameter(
                "expansion order exceeds 100000; reduce the time step".into(),
            ));
        }
        ln_term += a.ln() - (n as f64).ln();
    }
}

/// Regular Bessel functions `J_0(x) .. J_{n_max}(x)` for `x >= 0` by Miller's
/// backward recurrence: start the downward sweep `J_{n-1} = (2n/x) J_n -
/// J_{n+1}` well above `n_max` with an arbitrary seed and normalise at the
/// end with the identity `J_0 + 2 J_2 + 2 J_4 + ... = 1`. Values are
/// rescaled on the fly when they grow past 1e250 so the sweep cannot
/// overflow.
fn bessel_j_sequence(x: f64, n_max: usize) -> Vec<f64> {
    let mut vals = vec![0.0; n_max + 1];
    if x == 0.0 {
        vals[0] = 1.0;
        return vals;
    }
    // Starting index: twice (n_max + x) puts the seed deep in the regime
    // where J decays faster than any geometric rate, so the seed error has
    // damped out completely by the time the sweep reaches n_max.
    let start = 2 * (n_max + x.ceil() as usize) + 16;
    let mut above = 0.0f64; // J_{n+1} estimate
    let mut here = 1e-280f64; // J_n estimate (arbitrary seed)
    let mut norm = 0.0f64;
    for n in (0..=start).rev() {
        if n <= n_max {
            vals[n] = here;
        }
        if n % 2 == 0 {
            norm += if n == 0 { here } else { 2.0 * here };
        }
        let below = (2.0 * (n as f64) / x) * here - above;
        above = here;
        here = below;
        if above.abs() > 1e250 {
            let s = 1e-250;
            above *= s;
            here *= s;
            norm *= s;
            for v in vals.iter_mut() {
                *v *= s;
            }
        }
    }
    for v in vals.iter_mut() {
        *v /= norm;
    }
    vals
}

/// Truncates a coefficient table: keeps everything up to the last entry at or
/// above `threshold`, plus one trailing sub-threshold entry so that the
/// emitted table always ends below the threshold. The search for the cut is
/// restricted to `n >= monotone_from`, past the oscillatory region of the
/// Bessel envelope, so an accidental small value inside the bulk cannot
/// trigger a premature cut.
fn truncate_tail(coeffs: &mut Vec<C64>, threshold: f64, monotone_from: usize) {
    let mut cut = coeffs.len();
    for n in (0..coeffs.len()).rev() {
        if n < monotone_from || coeffs[n].norm() >= threshold {
            break;
        }
        cut = n + 1;
    }
    coeffs.truncate(cut.max(2));
}

/// Faber coefficients of `exp(-iH dt)` from the Bessel-function closed form
///
/// ```text
/// c_n = exp(-i lambda dt gamma0) * (-i / sqrt(gamma1))^n * J_n(2 sqrt(gamma1) lambda dt)
/// ```
///
/// truncated at the first coefficient below `threshold` (the search is
/// restricted to the monotonically decaying tail `n >= 2 sqrt(gamma1) lambda
/// dt`). The closed form requires a real ellipse with `gamma1 > 0`; the
/// degenerate circle `gamma1 ~ 0` is served by the Taylor closed form
/// `c_n = exp(-i lambda dt gamma0) (-i lambda dt)^n / n!`, and boxes with
/// `gamma1 < 0` or a rotated fit fall back to the contour route, which
/// handles them uniformly.
///
/// The emitted table always has at least two entries and its last entry is
/// below `threshold`; the magnitude envelope `|c_n| <= (lambda dt)^n / n!`
/// (times the centre factor) decays superexponentially past
/// `n ~ lambda dt`, which is what makes the expansion practical.
pub fn faber_coefficients_bessel(
    params: &EllipseParams,
    dt: f64,
    threshold: f64,
) -> Result<FaberCoefficients> {
    validate_step(dt, threshold)?;
    // The closed form needs the un-rotated, gamma1 > 0 geometry.
    if params.rotated || params.gamma1 < -1e-14 {
        return faber_coefficients_contour_auto(params, dt, threshold);
    }
    let a = params.lambda * dt;
    let pref = (-I * a * params.gamma0).exp();
    if params.gamma1.abs() <= 1e-14 {
        // Circle limit: plain Taylor series in (H/lambda - gamma0).
        let order = envelope_order(a, pref.norm().ln(), threshold * 0.1)?;
        let mut coeffs = Vec::with_capacity(order);
        let mut term = pref;
        for n in 0..order {
            coeffs.push(term);
            term *= -I * a / (n as f64 + 1.0);
        }
        truncate_tail(&mut coeffs, threshold, a.ceil() as usize);
        return Ok(FaberCoefficients {
            dt,
            coeffs,
            params: *params,
        });
    }

    let sqrt_g1 = params.gamma1.sqrt();
    let x = 2.0 * sqrt_g1 * a;
    let order = envelope_order(a, pref.norm().ln(), threshold * 0.1)?;
    let bessel = bessel_j_sequence(x, order - 1);
    let mut coeffs = Vec::with_capacity(order);
    let mut phase = pref; // pref * (-i / sqrt(gamma1))^n
    for &jn in bessel.iter() {
        coeffs.push(phase * jn);
        phase *= -I / sqrt_g1;
    }
    truncate_tail(&mut coeffs, threshold, x.ceil() as usize);
    Ok(FaberCoefficients {
        dt,
        coeffs,
        params: *params,
    })
}

/// Faber coefficients of `exp(-iH dt)` from the defining Cauchy integral
///
/// ```text
/// c_n = (1 / 2 pi i) ∮_{|w|=1} f(xi(w)) / w^(n+1) dw,   f(z) = exp(-i lambda tau z)
/// ```
///
/// evaluated by uniform quadrature on the unit circle (a DFT of the boundary
/// samples; the sample count is the next power of two above `4 * order`, so
/// aliased contributions sit far below the truncation tail). The effective
/// time `tau` equals `dt`, or `-i dt` when the ellipse was fitted to a
/// rotated spectrum — that is what lets this route serve purely imaginary
/// spectra and any `gamma1 < 0` geometry where the Bessel closed form does
/// not apply.
///
/// Emits exactly `order` coefficients; callers that want threshold-based
/// truncation use [`faber_coefficients_contour_auto`].
pub fn faber_coefficients_contour(
    params: &EllipseParams,
    dt: f64,
    order: usize,
) -> Result<FaberCoefficients> {
    validate_step(dt, DEFAULT_THRESHOLD)?;
    if order < 2 {
        return Err(Error::InvalidParameter(format!(
            "contour rule needs order >= 2, got {order}"
        )));
    }
    let tau = if params.rotated {
        C64::new(0.0, -dt)
    } else {
        C64::from(dt)
    };
    let k = (4 * order).max(64).next_power_of_two();
    let mut samples: Vec<C64> = (0..k)
        .map(|j| {
            let phi = 2.0 * std::f64::consts::PI * (j as f64) / (k as f64);
            let xi = params.rim(phi);
            (-I * params.lambda * tau * xi).exp()
        })
        .collect();
    FftPlanner::new().plan_fft_forward(k).process(&mut samples);
    let coeffs = samples
        .iter()
        .take(order)
        .map(|c| c / k as f64)
        .collect();
    Ok(FaberCoefficients {
        dt,
        coeffs,
        params: *params,
    })
}

/// Contour-route coefficients with the order chosen from the analytic
/// envelope `|c_n| <= C (lambda |tau|)^n / n!` and the tail truncated at
/// `threshold`, mirroring the contract of [`faber_coefficients_bessel`].
pub fn faber_coefficients_contour_auto(
    params: &EllipseParams,
    dt: f64,
    threshold: f64,
) -> Result<FaberCoefficients> {
    validate_step(dt, threshold)?;
    let a = params.lambda * dt;
    // Envelope prefactor: centre phase times the worst-case Bessel-argument
    // factor exp(|Im(2 sqrt(gamma1) lambda tau)|) <= exp(2 sqrt|gamma1| a).
    let ln_pref = a * params.gamma0.im.abs() + 2.0 * params.gamma1.abs().sqrt() * a;
    let order = envelope_order(a, ln_pref, threshold * 0.1)?;
    let mut table = faber_coefficients_contour(params, dt, order)?;
    truncate_tail(&mut table.coeffs, threshold, a.ceil() as usize);
    Ok(table)
}

// ─────────────────────────────────────────────────────────────────────────────
// Series summation
// ─────────────────────────────────────────────────────────────────────────────

/// Applies the truncated Faber propagator to `state`:
/// `sum_n c_n F_n(H/lambda) |state>`, one operator application per order.
///
/// The Faber polynomials of the ellipse obey the three-term recurrence
///
/// ```text
/// P_0 = psi
/// P_1 = (Ht - gamma0) P_0
/// P_2 = (Ht - gamma0) P_1 - 2 gamma1 P_0
/// P_{n+1} = (Ht - gamma0) P_n - gamma1 P_{n-1},   n >= 2
/// ```
///
/// (note the factor 2 on the single `n = 1 -> 2` step), where
/// `Ht = H / lambda`, or `Ht = iH / lambda` for a rotated fit — the caller
/// always passes the physical operator and the rotation is compensated here
/// and in the coefficient table. Two auxiliary vectors are kept besides the
/// accumulator; nothing is normalised, since for non-unitary evolution the
/// norm decay carries physics.
pub fn faber_apply<A: LinearOp + ?Sized>(
    op: &A,
    table: &FaberCoefficients,
    state: &[C64],
) -> Result<Vec<C64>> {
    let n = op.dim();
    if state.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: state.len(),
        });
    }
    let p = &table.params;
    let scale = if p.rotated {
        I / p.lambda
    } else {
        C64::from(1.0 / p.lambda)
    };
    let g0 = p.gamma0;
    let g1 = C64::from(p.gamma1);
    let mut buf = vec![C64::default(); n];
    // shifted(x) = (Ht - gamma0) x, written into `out`
    let shifted = |x: &[C64], out: &mut [C64], buf: &mut [C64]| {
        op.apply(x, buf);
        for ((o, &b), &xi) in out.iter_mut().zip(buf.iter()).zip(x.iter()) {
            *o = scale * b - g0 * xi;
        }
    };

    let mut acc: Vec<C64> = state.iter().map(|&s| table.coeffs[0] * s).collect();
    if table.coeffs.len() == 1 {
        return Ok(acc);
    }
    let mut prev = state.to_vec(); // P_0
    let mut cur = vec![C64::default(); n];
    shifted(&prev, &mut cur, &mut buf); // P_1
    for (a, &c) in acc.iter_mut().zip(cur.iter()) {
        *a += table.coeffs[1] * c;
    }
    let mut next = vec![C64::default(); n];
    for (m, &cm) in table.coeffs.iter().enumerate().skip(2) {
        // Building P_m from P_{m-1} (cur) and P_{m-2} (prev).
        let back = if m == 2 { 2.0 * g1 } else { g1 };
        shifted(&cur, &mut next, &mut buf);
        for (nx, &pv) in next.iter_mut().zip(prev.iter()) {
            *nx -= back * pv;
        }
        for (a, &nx) in acc.iter_mut().zip(next.iter()) {
            *a += cm * nx;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(acc)
}

// ─────────────────────────────────────────────────────────────────────────────
// Chebyshev fast path (Hermitian operators)
// ─────────────────────────────────────────────────────────────────────────────

/// Truncated Chebyshev expansion of `exp(-iH dt)` for Hermitian `H` with
/// spectrum inside `(-lambda, lambda)`.
#[derive(Clone, Debug)]
pub struct ChebyshevCoefficients {
    /// Physical time step.
    pub dt: f64,
    /// Spectral half-width the operator is rescaled by.
    pub lambda: f64,
    /// Expansion coefficients `c_0 .. c_{N_p - 1}`.
    pub coeffs: Vec<C64>,
}

impl ChebyshevCoefficients {
    /// Number of polynomials in the truncated expansion.
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }
}

/// Chebyshev coefficients `c_n = (2 - delta_{n0}) (-i)^n J_n(lambda dt)` of
/// `exp(-iH dt)`, truncated like the Faber tables.
pub fn chebyshev_coefficients(
    lambda: f64,
    dt: f64,
    threshold: f64,
) -> Result<ChebyshevCoefficients> {
    validate_step(dt, threshold)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spectral half-width must be positive, got {lambda}"
        )));
    }
    let x = lambda * dt;
    let order = envelope_order(x, std::f64::consts::LN_2, threshold * 0.1)?;
    let bessel = bessel_j_sequence(x, order - 1);
    let mut coeffs = Vec::with_capacity(order);
    let mut phase = C64::from(1.0);
    for (n, &jn) in bessel.iter().enumerate() {
        let w = if n == 0 { 1.0 } else { 2.0 };
        coeffs.push(phase * (w * jn));
        phase *= -I;
    }
    truncate_tail(&mut coeffs, threshold, x.ceil() as usize);
    Ok(ChebyshevCoefficients { dt, lambda, coeffs })
}

/// Applies the Chebyshev propagator: `sum_n c_n T_n(H/lambda) |state>` via
/// the recurrence `T_{n+1} = 2 (H/lambda) T_n - T_{n-1}`. The operator must
/// be Hermitian with spectrum inside `(-lambda, lambda)`; no check is
/// possible here, so violations show up as norm blow-up.
pub fn chebyshev_apply<A: LinearOp + ?Sized>(
    op: &A,
    table: &ChebyshevCoefficients,
    state: &[C64],
) -> Result<Vec<C64>> {
    let n = op.dim();
    if state.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: state.len(),
        });
    }
    let inv = 1.0 / table.lambda;
    let mut buf = vec![C64::default(); n];
    let mut acc: Vec<C64> = state.iter().map(|&s| table.coeffs[0] * s).collect();
    if table.coeffs.len() == 1 {
        return Ok(acc);
    }
    let mut prev = state.to_vec();
    let mut cur = vec![C64::default(); n];
    op.apply(&prev, &mut buf);
    for (c, &b) in cur.iter_mut().zip(buf.iter()) {
        *c = inv * b;
    }
    for (a, &c) in acc.iter_mut().zip(cur.iter()) {
        *a += table.coeffs[1] * c;
    }
    let mut next = vec![C64::default(); n];
    for &cm in table.coeffs.iter().skip(2) {
        op.apply(&cur, &mut buf);
        for ((nx, &b), &pv) in next.iter_mut().zip(buf.iter()).zip(prev.iter()) {
            *nx = 2.0 * inv * b - pv;
        }
        for (a, &nx) in acc.iter_mut().zip(next.iter()) {
            *a += cm * nx;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(acc)
}

// ─────────────────────────────────────────────────────────────────────────────
// Tests
// ─────────────────────────────────────────────────────────────────────────────
