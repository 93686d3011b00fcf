//! Scalar kernel: the convex rate function behind the scan thresholds, the
//! Bernoulli exponential-family quantities behind the likelihood ratios, a
//! Bennett-type tail bound, exact binomial coefficients, and the moment-ratio
//! bound used by the size analysis of densest subsets.
//!
//! Everything here is deterministic scalar arithmetic; the statistical
//! machinery sits on top of these nine functions, so their contracts are
//! deliberately strict (domain violations are errors, not NaNs).

use crate::error::{Error, Result};

/// Rate function `h(x) = (x + 1) ln(x + 1) - x`.
///
/// Strictly convex on its domain `x > -1`, minimum `h(0) = 0`, and
/// `h(x) >= x^2 / (2 + 2x/3)` for `x >= 0`. The whole branch `x > -1` is
/// accepted, not just `x >= 0`: thresholded arguments like `zeta/rho - 1`
/// land in `(-1, 0)` when the boost exceeds the threshold ratio.
pub fn h(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= -1.0 {
        return Err(Error::domain("h", format!("x = {x} not in (-1, inf)")));
    }
    Ok(h_raw(x))
}

/// `h` without the domain check, for hot loops that guarantee `x > -1`.
#[inline]
pub(crate) fn h_raw(x: f64) -> f64 {
    (x + 1.0) * x.ln_1p() - x
}

/// Inverse of `h` on `[0, inf)`.
///
/// `h` is strictly increasing there, so the inverse is well defined;
/// computed by doubling a bracket and bisecting to absolute tolerance
/// `1e-12`. Useful identity: `h_inverse(y) >= sqrt(y)` for `y >= 0`, since
/// `h(x) <= x^2` on the positive branch.
pub fn h_inverse(y: f64) -> Result<f64> {
    if !y.is_finite() || y < 0.0 {
        return Err(Error::domain("h_inverse", format!("y = {y} not in [0, inf)")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while h_raw(hi) < y {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::domain("h_inverse", format!("y = {y} too large")));
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-12 {
            return Ok(mid);
        }
        if h_raw(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Kullback-Leibler divergence between Bernoulli(q) and Bernoulli(p),
/// `H_p(q) = q ln(q/p) + (1-q) ln((1-q)/(1-p))`.
///
/// Both rates must be interior, `p, q in (0, 1)`; the divergence is infinite
/// or degenerate at the endpoints and callers that need those cases handle
/// them before dividing by this quantity.
pub fn kl_bernoulli(q: f64, p: f64) -> Result<f64> {
    for (name, v) in [("q", q), ("p", p)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::domain(
                "kl_bernoulli",
                format!("{name} = {v} not in (0, 1)"),
            ));
        }
    }
    Ok(q * (q / p).ln() + (1.0 - q) * ((1.0 - q) / (1.0 - p)).ln())
}

/// Log odds-ratio tilt `theta(p, q) = ln(q(1-p) / (p(1-q)))`.
///
/// This is the natural-parameter shift moving a Bernoulli(p) to a
/// Bernoulli(q); zero exactly when `q = p`.
pub fn theta(p: f64, q: f64) -> Result<f64> {
    for (name, v) in [("p", p), ("q", q)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::domain("theta", format!("{name} = {v} not in (0, 1)")));
        }
    }
    // Evaluated as a difference of logs so theta(p, p) is exactly 0.
    Ok((q * (1.0 - p)).ln() - (p * (1.0 - q)).ln())
}

/// Bernoulli log moment generating function `Lambda(p, t) = ln(1 - p + p e^t)`.
///
/// Stable for any finite `t`: the positive branch factors out `e^t` before
/// taking the log. Satisfies `Lambda(p, theta(p, q)) = ln((1-p)/(1-q))`.
pub fn lambda_mgf(p: f64, t: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("lambda_mgf", format!("p = {p} not in (0, 1)")));
    }
    if !t.is_finite() {
        return Err(Error::domain("lambda_mgf", format!("t = {t} not finite")));
    }
    if t <= 0.0 {
        // 1 - p + p e^t = 1 + p (e^t - 1), and p (e^t - 1) in (-p, 0].
        Ok((p * t.exp_m1()).ln_1p())
    } else {
        // ln(e^t (p + (1-p) e^{-t})) = t + ln(1 + (1-p)(e^{-t} - 1)).
        Ok(t + ((1.0 - p) * (-t).exp_m1()).ln_1p())
    }
}

/// Bennett tail bound `exp(-mu h(t / mu))` for a sum with mean `mu` exceeding
/// it by `t >= 0`. At `t = 0` the bound is 1 (vacuous).
pub fn bennett_tail(mu: f64, t: f64) -> Result<f64> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::domain("bennett_tail", format!("mu = {mu} not in (0, inf)")));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain("bennett_tail", format!("t = {t} not in [0, inf)")));
    }
    Ok((-mu * h_raw(t / mu)).exp())
}

/// Exact binomial coefficient `C(n, k)` in 64 bits.
///
/// `k > n` yields 0. Intermediate products run in 128 bits; a result that
/// does not fit `u64` is an overflow error, never a silent wrap.
pub fn binom(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - k + 1 + i) is always divisible by (i + 1): it is
        // C(n-k+1+i, i+1) * (i+1)! / i!-fold cancellation in disguise.
        acc = acc
            .checked_mul((n - k + 1 + i) as u128)
            .ok_or_else(|| Error::Overflow {
                op: "binom",
                detail: format!("C({n}, {k}) exceeds 128-bit intermediates"),
            })?;
        acc /= (i + 1) as u128;
    }
    u64::try_from(acc).map_err(|_| Error::Overflow {
        op: "binom",
        detail: format!("C({n}, {k}) exceeds u64"),
    })
}

/// `ln C(n, k)`, computed termwise in floating point for ranges where the
/// exact coefficient overflows. `k > n` gives negative infinity.
pub fn ln_binom(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    let mut acc = 0.0_f64;
    for i in 0..k {
        acc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    acc
}

/// `C(n, k)` as a float: exact while the integer fits, log-space otherwise.
pub(crate) fn binom_f64(n: u64, k: u64) -> f64 {
    match binom(n, k) {
        Ok(v) => v as f64,
        Err(_) => ln_binom(n, k).exp(),
    }
}

/// `C(n, k)` in 128 bits, saturating on overflow. Budget checks only: a
/// saturated value still compares correctly against any 64-bit budget.
pub(crate) fn binom_u128(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - k + 1 + i) / (i + 1);
    }
    acc
}

/// Moment-ratio bound for weight vectors with entries in `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRatio {
    /// Upper bound `(1 / ((k-1) n^{k-1})) sum_{t=1}^{k-1} (b/a)^t` on the
    /// power-sum ratio `sum_i w_i^k / (sum_i w_i)^k`.
    pub bound: f64,
    /// Value of the interior candidate `g(x0)` when the stationary point of
    /// the one-variable reduction is admissible (`a < b`); `None` when
    /// `a = b` and the ratio is the constant `n^{1-k}` exactly.
    pub interior: Option<f64>,
}

/// Bounds `sum_i w_i^k / (sum_i w_i)^k` over `w in [a, b]^n`.
///
/// Requires `n >= 2`, `2 <= k <= n`, `0 < a <= b < 1`. At `a = b` the bound
/// collapses to `n^{1-k}` exactly and every constant vector attains it.
pub fn moment_ratio_bound(n: u32, k: u32, a: f64, b: f64) -> Result<MomentRatio> {
    if n < 2 || k < 2 || k > n {
        return Err(Error::domain(
            "moment_ratio_bound",
            format!("need 2 <= k <= n, got n = {n}, k = {k}"),
        ));
    }
    if !a.is_finite() || !b.is_finite() || a <= 0.0 || b >= 1.0 || a > b {
        return Err(Error::domain(
            "moment_ratio_bound",
            format!("need 0 < a <= b < 1, got a = {a}, b = {b}"),
        ));
    }
    let nf = n as f64;
    let kf = k as f64;
    let ratio = b / a;
    let mut geom = 0.0_f64;
    let mut term = 1.0_f64;
    for _ in 1..k {
        term *= ratio;
        geom += term;
    }
    let bound = geom / ((kf - 1.0) * nf.powi(k as i32 - 1));
    let interior = if a < b {
        // One-variable reduction: x entries at a contribute like the affine
        // map below; g is the ratio along that segment and x0 its stationary
        // point. Reported for diagnostics, not part of the bound.
        let ak = a.powi(k as i32);
        let bk = b.powi(k as i32);
        let x0 = ((ak - bk) * nf * b - kf * nf * (a - b) * bk)
            / ((kf - 1.0) * (a - b) * (ak - bk));
        let g = |x: f64| (x * (ak - bk) + nf * bk) / (x * (a - b) + nf * b).powi(k as i32);
        Some(g(x0))
    } else {
        None
    };
    Ok(MomentRatio { bound, interior })
}
