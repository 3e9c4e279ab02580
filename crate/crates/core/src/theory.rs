//! Large-population limit of `Z_n`.
//!
//! The rescaled process follows the dynamical system
//!
//! ```text
//! y' = s y (1-y) / (y + (1+s)(1-y))
//! u' = u/2 + (u+v) y/2     - u / (y + (1+s)(1-y))
//! v' = v/2 + (u+v) (1-y)/2 - (1+s) v / (y + (1+s)(1-y))
//! ```
//!
//! started at `(a, a, 0)`, whose solution is explicit:
//!
//! ```text
//! y_t = F^{-1}( a^{1+s}/(1-a) e^{st} ),   F(x) = x^{1+s}/(1-x)
//! u_t = y_t K [ (1-y_t)^β / y_t^α + C(y_t) ]
//! v_t = (1-y_t) K C(y_t)
//! ```
//!
//! with `α = (1+s)/(2s)`, `β = 1/(2s)`, `K = a^α / (1-a)^β` and
//! `C(y) = ∫_a^y (1-x)^β / x^α [1/2 + β/(1-x)] dx`. Along the solution
//! `u/y - v/(1-y) = e^{-t/2}`.

use crate::error::{Error, Result};
use crate::io::Table;
use crate::quadrature::{integrate_with_breaks, QuadratureOptions};

/// Initial advantaged fraction `a` and selection strength `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    a: f64,
    s: f64,
}

impl TheoryParams {
    pub fn new(a: f64, s: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::invalid("a", a, "must lie in (0, 1)"));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid("s", s, "must be finite and > 0"));
        }
        Ok(TheoryParams { a, s })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `(1+s)/(2s)`
    fn alpha(&self) -> f64 {
        (1.0 + self.s) / (2.0 * self.s)
    }

    /// `1/(2s)`
    fn beta(&self) -> f64 {
        0.5 / self.s
    }

    /// `ln K = α ln a - β ln(1-a)`
    fn ln_prefactor(&self) -> f64 {
        self.alpha() * self.a.ln() - self.beta() * (-self.a).ln_1p()
    }

    /// `ln F(a)`
    fn ln_f_initial(&self) -> f64 {
        (1.0 + self.s) * self.a.ln() - (-self.a).ln_1p()
    }
}

/// A point of the limiting trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryPoint {
    pub t: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
    /// `1 - y`, computed directly so it keeps full precision near fixation.
    pub y_complement: f64,
    /// `v / (1 - y) = K C(y)`, kept apart because `1 - y` may underflow.
    pub v_ratio: f64,
}

impl TheoryPoint {
    pub fn as_array(&self) -> [f64; 3] {
        [self.y, self.u, self.v]
    }

    /// `u/y - v/(1-y)`; equals `e^{-t/2}` along the solution.
    pub fn conserved_ratio(&self) -> f64 {
        self.u / self.y - self.v_ratio
    }

    pub fn total_weight(&self) -> f64 {
        self.u + self.v
    }
}

/// `F(x) = x^{1+s} / (1-x)` on `[0, 1)`.
pub fn f_map(x: f64, s: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::invalid("x", x, "F is defined on [0, 1)"));
    }
    check_selection(s)?;
    Ok(x.powf(1.0 + s) / (1.0 - x))
}

/// Inverse of [`f_map`].
pub fn f_inv(q: f64, s: f64) -> Result<f64> {
    if q.is_nan() || q < 0.0 || q.is_infinite() {
        return Err(Error::invalid("q", q, "F^-1 is defined on [0, inf)"));
    }
    check_selection(s)?;
    if q == 0.0 {
        return Ok(0.0);
    }
    Ok(solve_level(q.ln(), s).y)
}

fn check_selection(s: f64) -> Result<()> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::invalid("s", s, "must be finite and >= 0"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Level {
    y: f64,
    ybar: f64,
    /// `ln(1-y)`, finite even where `1-y` underflows
    ln_ybar: f64,
}

impl Level {
    fn at(y: f64) -> Self {
        Level {
            y,
            ybar: 1.0 - y,
            ln_ybar: (-y).ln_1p(),
        }
    }
}

/// Solves `ln F(y) = target`.
///
/// Below `y = 1/2` the unknown is `ln y`, above it `ln(1-y)`; in both
/// coordinates the equation is close to linear, so Newton converges in a
/// few steps, and `1-y` never loses precision to cancellation. Newton steps
/// that leave the current bracket are replaced by bisection.
fn solve_level(target: f64, s: f64) -> Level {
    let ln_half = -std::f64::consts::LN_2;
    if target <= -s * std::f64::consts::LN_2 {
        // φ(ℓ) = (1+s) ℓ - ln(1 - e^ℓ), increasing
        let lo = (target - std::f64::consts::LN_2) / (1.0 + s);
        let hi = (target / (1.0 + s)).min(ln_half);
        let phi = |l: f64| (1.0 + s) * l - (-l.exp()).ln_1p() - target;
        let dphi = |l: f64| {
            let y = l.exp();
            (1.0 + s) + y / (1.0 - y)
        };
        let l = safeguarded_newton(phi, dphi, lo, hi);
        let y = l.exp();
        Level {
            y,
            ybar: -l.exp_m1(),
            ln_ybar: (-y).ln_1p(),
        }
    } else {
        // ψ(m) = (1+s) ln(1 - e^m) - m, decreasing
        let lo = (1.0 + s) * ln_half - target;
        let hi = (-target).min(ln_half);
        let psi = |m: f64| (1.0 + s) * (-m.exp()).ln_1p() - m - target;
        let dpsi = |m: f64| {
            let yb = m.exp();
            -(1.0 + s) * yb / (1.0 - yb) - 1.0
        };
        let m = safeguarded_newton(psi, dpsi, lo, hi);
        let ybar = m.exp();
        Level {
            y: -m.exp_m1(),
            ybar,
            ln_ybar: m,
        }
    }
}

/// Root of a monotone `f` on `[lo, hi]`.
fn safeguarded_newton<F, D>(f: F, df: D, mut lo: f64, mut hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let increasing = f(hi) >= f(lo);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - fx / df(x);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

fn level_at(p: &TheoryParams, t: f64) -> Level {
    if t == 0.0 {
        return Level::at(p.a);
    }
    solve_level(p.ln_f_initial() + p.s * t, p.s)
}

/// `y_t`.
pub fn y_of_t(p: &TheoryParams, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::invalid("t", t, "must be >= 0"));
    }
    Ok(level_at(p, t).y)
}

/// Time at which `y_t` reaches `b`; infinite for `b = 1`.
pub fn level_hitting_time(p: &TheoryParams, b: f64) -> Result<f64> {
    check_level(p, b)?;
    if b == 1.0 {
        return Ok(f64::INFINITY);
    }
    let ln_f_b = (1.0 + p.s) * b.ln() - (-b).ln_1p();
    Ok((ln_f_b - p.ln_f_initial()) / p.s)
}

fn check_level(p: &TheoryParams, b: f64) -> Result<()> {
    if !(b >= p.a && b <= 1.0) {
        return Err(Error::invalid("b", b, "level must lie in [a, 1]"));
    }
    Ok(())
}

/// Integrand of `C` in the original variable.
pub fn c_integrand(x: f64, s: f64) -> f64 {
    let alpha = (1.0 + s) / (2.0 * s);
    let beta = 0.5 / s;
    let ln_1mx = (-x).ln_1p();
    (beta * ln_1mx - alpha * x.ln()).exp() * (0.5 + beta / (1.0 - x))
}

// Split point between the plain panel and the substituted right panel.
const RIGHT_PANEL_START: f64 = 0.5;

/// `C(y) = ∫_a^y (1-x)^β / x^α [1/2 + β/(1-x)] dx` for `a <= y <= 1`.
pub fn c_integral(p: &TheoryParams, y_upper: f64) -> Result<f64> {
    if y_upper > 1.0 {
        return Err(Error::invalid("y_upper", y_upper, "must be <= 1"));
    }
    if y_upper.is_nan() || y_upper < p.a {
        return Err(Error::invalid("y_upper", y_upper, "must be >= a"));
    }
    c_integral_level(p, Level::at(y_upper))
}

/// The integrand behaves like `(1-x)^{β-1}` at `x = 1`. On `[1/2, y]` the
/// substitution `q = 1 - (1-x)^β` turns it into the smooth
/// `x^{-α} (1 + s (1-x))` with `1 - x = (1-q)^{2s}`.
fn c_integral_level(p: &TheoryParams, level: Level) -> Result<f64> {
    let (a, s) = (p.a, p.s);
    if level.y <= a {
        return Ok(0.0);
    }
    let alpha = p.alpha();
    let beta = p.beta();
    let opts = QuadratureOptions {
        abs_tol: 0.5e-10,
        ..Default::default()
    };
    let mut total = 0.0;
    if a < RIGHT_PANEL_START {
        let upper = level.y.min(RIGHT_PANEL_START);
        // x^{-α} varies on the scale of a itself
        let breaks = geometric_breaks(a, a, upper);
        total += integrate_with_breaks(|x| c_integrand(x, s), &breaks, opts)?.value;
    }
    if level.y > RIGHT_PANEL_START {
        let start = a.max(RIGHT_PANEL_START);
        let q_lo = -(beta * (-start).ln_1p()).exp_m1();
        let q_hi = -(beta * level.ln_ybar).exp_m1();
        let g = |q: f64| {
            let one_minus_x = (2.0 * s * (-q).ln_1p()).exp();
            let x = -(2.0 * s * (-q).ln_1p()).exp_m1();
            (-alpha * x.ln()).exp() * (1.0 + s * one_minus_x)
        };
        // for large s the mass near q_lo sits within ~1/(2s) of it
        let breaks = geometric_breaks(q_lo, 0.5 / s, q_hi);
        total += integrate_with_breaks(g, &breaks, opts)?.value;
    }
    Ok(total)
}

/// `lo, lo + w, lo + 2w, lo + 4w, ...` capped by `hi`.
fn geometric_breaks(lo: f64, width: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut step = width;
    while lo + step < hi {
        pts.push(lo + step);
        step *= 2.0;
    }
    pts.push(hi);
    pts
}

fn assemble(p: &TheoryParams, t: f64, level: Level) -> Result<TheoryPoint> {
    let c = c_integral_level(p, level)?;
    let k = p.ln_prefactor().exp();
    let leading = (p.beta() * level.ln_ybar - p.alpha() * level.y.ln()).exp();
    Ok(TheoryPoint {
        t,
        y: level.y,
        u: level.y * k * (leading + c),
        v: level.ybar * k * c,
        y_complement: level.ybar,
        v_ratio: k * c,
    })
}

/// `z_t = (y_t, u_t, v_t)`.
pub fn z_of_t(p: &TheoryParams, t: f64) -> Result<TheoryPoint> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::invalid("t", t, "must be >= 0"));
    }
    if t.is_infinite() {
        return z_infinity(p);
    }
    assemble(p, t, level_at(p, t))
}

/// `z` at the time `y` reaches `b`. For `b = 1` this is [`z_infinity`].
pub fn z_at_level(p: &TheoryParams, b: f64) -> Result<TheoryPoint> {
    check_level(p, b)?;
    if b == 1.0 {
        return z_infinity(p);
    }
    let t = level_hitting_time(p, b)?;
    assemble(p, t, Level::at(b))
}

/// `lim_{t→∞} z_t = (1, K C(1), 0)`.
pub fn z_infinity(p: &TheoryParams) -> Result<TheoryPoint> {
    assemble(p, f64::INFINITY, Level::at(1.0))
}

/// Limit of the asymptotic weight as `s → ∞`: `2 sqrt(a) - a`.
pub fn infinite_selection_weight(a: f64) -> f64 {
    2.0 * a.sqrt() - a
}

/// Right-hand side `g(y, u, v)` of the limiting system. `s = 0` is allowed.
pub fn g_increment(z: [f64; 3], s: f64) -> [f64; 3] {
    let [y, u, v] = z;
    let death = y + (1.0 + s) * (1.0 - y);
    [
        s * y * (1.0 - y) / death,
        u / 2.0 + (u + v) / 2.0 * y - u / death,
        v / 2.0 + (u + v) / 2.0 * (1.0 - y) - (1.0 + s) * v / death,
    ]
}

/// Drift of the clonal (monoparental) Moran model, `s y (1-y)`.
pub fn monoparental_drift(y: f64, s: f64) -> f64 {
    s * y * (1.0 - y)
}

/// Classic fixed-step RK4 for `z' = f(z)`. Calls `observe(t, z)` at `t = 0`
/// and after each step; stops at the first step reaching `t_end`.
pub fn rk4<F, O>(f: F, z0: [f64; 3], t_end: f64, h: f64, mut observe: O)
where
    F: Fn([f64; 3]) -> [f64; 3],
    O: FnMut(f64, [f64; 3]),
{
    let axpy = |z: [f64; 3], k: [f64; 3], c: f64| [z[0] + c * k[0], z[1] + c * k[1], z[2] + c * k[2]];
    let steps = (t_end / h).round() as u64;
    let mut z = z0;
    observe(0.0, z);
    for i in 1..=steps {
        let k1 = f(z);
        let k2 = f(axpy(z, k1, h / 2.0));
        let k3 = f(axpy(z, k2, h / 2.0));
        let k4 = f(axpy(z, k3, h));
        for j in 0..3 {
            z[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        observe(i as f64 * h, z);
    }
}

/// Integrates the limiting system from `(a, a, 0)` with RK4.
pub fn integrate_limit_system<O>(p: &TheoryParams, t_end: f64, h: f64, observe: O)
where
    O: FnMut(f64, [f64; 3]),
{
    let s = p.s;
    rk4(|z| g_increment(z, s), [p.a, p.a, 0.0], t_end, h, observe);
}

/// Table with columns `t,y,u,v` over `times`.
pub fn trajectory_table(p: &TheoryParams, times: &[f64]) -> Result<Table> {
    let mut table = Table::new(&["t", "y", "u", "v"]);
    for &t in times {
        let z = z_of_t(p, t)?;
        table.push(vec![t.into(), z.y.into(), z.u.into(), z.v.into()]);
    }
    Ok(table)
}

/// Table with columns `b,u_level,v_level` over `levels`.
pub fn level_table(p: &TheoryParams, levels: &[f64]) -> Result<Table> {
    let mut table = Table::new(&["b", "u_level", "v_level"]);
    for &b in levels {
        let z = z_at_level(p, b)?;
        table.push(vec![b.into(), z.u.into(), z.v.into()]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, s: f64) -> TheoryParams {
        TheoryParams::new(a, s).unwrap()
    }

    #[test]
    fn params_validate() {
        assert!(TheoryParams::new(0.0, 1.0).is_err());
        assert!(TheoryParams::new(1.0, 1.0).is_err());
        assert!(TheoryParams::new(0.5, 0.0).is_err());
        assert!(TheoryParams::new(0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn f_basics() {
        assert_eq!(f_map(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(f_inv(0.0, 1.0).unwrap(), 0.0);
        assert!((f_map(0.5, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(f_map(1.0, 1.0).is_err());
        assert!(f_map(-0.1, 1.0).is_err());
        assert!(f_inv(-1.0, 1.0).is_err());
    }

    #[test]
    fn f_roundtrip() {
        for &x in &[0.01, 0.5, 0.99] {
            for &s in &[0.1, 1.0, 10.0] {
                let q = f_map(x, s).unwrap();
                let back = f_inv(q, s).unwrap();
                assert!((back - x).abs() < 1e-10, "x={x} s={s} back={back}");
            }
        }
    }

    #[test]
    fn y_starts_at_a_and_increases() {
        let p = params(0.2, 1.5);
        assert_eq!(y_of_t(&p, 0.0).unwrap(), 0.2);
        let mut last = 0.2;
        for i in 1..200 {
            let y = y_of_t(&p, i as f64 * 0.1).unwrap();
            assert!(y > last);
            last = y;
        }
        assert!(last > 0.999_999);
        assert!(y_of_t(&p, -1.0).is_err());
    }

    #[test]
    fn y_identity_exp_half_t() {
        let p = params(0.1, 2.0);
        let (a, s) = (p.a(), p.s());
        for &t in &[0.5, 3.0, 12.0] {
            let y = y_of_t(&p, t).unwrap();
            let rhs = y.powf((1.0 + s) / (2.0 * s)) / (1.0 - y).powf(0.5 / s)
                * (1.0 - a).powf(0.5 / s)
                / a.powf((1.0 + s) / (2.0 * s));
            assert!((rhs / (t / 2.0).exp() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn initial_slope_by_finite_differences() {
        for &(a, s) in &[(0.1, 1.0), (0.3, 0.5), (0.01, 10.0)] {
            let p = params(a, s);
            let h = 1e-4;
            let y0 = y_of_t(&p, 0.0).unwrap();
            let y1 = y_of_t(&p, h).unwrap();
            let y2 = y_of_t(&p, 2.0 * h).unwrap();
            let fd = (-3.0 * y0 + 4.0 * y1 - y2) / (2.0 * h);
            let exact = s * a * (1.0 - a) / (1.0 + s * (1.0 - a));
            assert!((fd / exact - 1.0).abs() < 1e-6, "a={a} s={s}");
        }
    }

    #[test]
    fn c_integral_empty_and_bounds() {
        let p = params(0.3, 1.0);
        assert_eq!(c_integral(&p, 0.3).unwrap(), 0.0);
        assert!(c_integral(&p, 1.1).is_err());
        assert!(c_integral(&p, 0.2).is_err());
        for &s in &[0.05, 0.5, 1.0, 10.0, 1e4] {
            let c = c_integral(&params(0.3, s), 1.0).unwrap();
            assert!(c.is_finite() && c > 0.0, "s={s}");
        }
    }

    #[test]
    fn c_integral_antiderivative_half() {
        // s = 1/2: integrand (3/2) x^{-3/2} - (1/2) x^{-1/2}
        let anti = |x: f64| -3.0 / x.sqrt() - x.sqrt();
        let p = params(0.25, 0.5);
        let c = c_integral(&p, 0.75).unwrap();
        assert!((c - (anti(0.75) - anti(0.25))).abs() < 1e-9);
        let c1 = c_integral(&p, 1.0).unwrap();
        assert!((c1 - (anti(1.0) - anti(0.25))).abs() < 1e-9);
    }

    #[test]
    fn z_infinity_reference_values() {
        // a = 0.01, from the regularized incomplete beta form of C(1),
        // evaluated at 40 digits
        let reference = [
            (1.0, 0.050_166_042_997_096_37),
            (10.0, 0.159_587_154_824_488_01),
            (100.0, 0.186_630_326_736_130_12),
            (1e4, 0.189_965_909_055_972_93),
        ];
        for (s, expected) in reference {
            let u = z_infinity(&params(0.01, s)).unwrap().u;
            assert!((u - expected).abs() < 1e-12, "s={s} u={u}");
        }
    }

    #[test]
    fn z_initial_point() {
        let p = params(0.2, 3.0);
        let z = z_of_t(&p, 0.0).unwrap();
        assert!((z.y - 0.2).abs() < 1e-15);
        assert!((z.u - 0.2).abs() < 1e-14);
        assert_eq!(z.v, 0.0);
        let zb = z_at_level(&p, 0.2).unwrap();
        assert!((zb.u - 0.2).abs() < 1e-14);
        assert_eq!(zb.t, 0.0);
    }

    #[test]
    fn conserved_quantity() {
        for &(a, s) in &[(0.01, 0.2), (0.3, 1.0), (0.7, 10.0)] {
            let p = params(a, s);
            for i in 0..=40 {
                let t = i as f64 * 0.5;
                let z = z_of_t(&p, t).unwrap();
                assert!((z.conserved_ratio() - (-t / 2.0).exp()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn level_time_matches_trajectory() {
        let p = params(0.05, 1.0);
        let t = level_hitting_time(&p, 0.5).unwrap();
        assert!((y_of_t(&p, t).unwrap() - 0.5).abs() < 1e-12);
        let a = z_at_level(&p, 0.5).unwrap();
        let b = z_of_t(&p, t).unwrap();
        assert!((a.u - b.u).abs() < 1e-10 && (a.v - b.v).abs() < 1e-10);
        assert!(level_hitting_time(&p, 1.0).unwrap().is_infinite());
        assert!(z_at_level(&p, 0.01).is_err());
    }

    #[test]
    fn g_boundaries() {
        let g = g_increment([1.0, 0.4, 0.0], 2.0);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[2], 0.0);
        let a = 0.3;
        let g = g_increment([a, a, 0.0], 1.0);
        assert!((g[0] - a * (1.0 - a) / (2.0 - a)).abs() < 1e-15);
        assert_eq!(g_increment([0.4, 0.2, 0.1], 0.0)[0], 0.0);
    }

    #[test]
    fn slower_than_monoparental() {
        for i in 1..100 {
            let y = i as f64 / 100.0;
            for &s in &[0.1, 1.0, 10.0] {
                assert!(g_increment([y, 0.0, 0.0], s)[0] < monoparental_drift(y, s));
            }
        }
    }

    #[test]
    fn rk4_exponential() {
        let mut last = [0.0; 3];
        rk4(|z| [z[0], -z[1], 0.0], [1.0, 1.0, 2.0], 1.0, 1e-3, |_, z| last = z);
        assert!((last[0] - 1f64.exp()).abs() < 1e-12);
        assert!((last[1] - (-1f64).exp()).abs() < 1e-12);
        assert_eq!(last[2], 2.0);
    }
}
