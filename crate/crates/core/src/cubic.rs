//! The two characteristic cubics whose roots in `(0, mu - lambda_p)` give the
//! revenue-optimal secondary arrival rates: `G` for finite priority ratios
//! and `G~` for static priority to the secondary class.

use crate::error::{Error, Result};
use crate::queue::QueueParams;

/// Grid resolution used to assert that a bracket holds exactly one root.
pub const UNIQUENESS_GRID: usize = 1024;
/// Bracket width at termination, relative to the initial bracket.
pub const X_TOL: f64 = 1e-12;
/// Residual bound in units of `|leading coefficient| * hi^3`.
pub const F_TOL: f64 = 1e-8;
/// Roots this close to a bracket endpoint are flagged as boundary roots.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubicKind {
    G,
    GTilde,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicSpec {
    kind: CubicKind,
    queue: QueueParams,
    a: f64,
    c: f64,
    /// Highest degree first.
    coeffs: [f64; 4],
}

impl CubicSpec {
    pub fn new(kind: CubicKind, queue: QueueParams, a: f64, c: f64) -> Self {
        let mu = queue.mu();
        let psi = queue.psi();
        let lp = queue.lambda_p();
        let phi0 = mu - lp;
        let cpsi = c * psi;
        let coeffs = match kind {
            CubicKind::G => [
                2.0 * mu,
                -(cpsi + mu * (a + 4.0 * phi0)),
                2.0 * phi0 * (cpsi + mu * (a + phi0)),
                -a * mu * phi0 * phi0 + cpsi * lp * (mu + phi0),
            ],
            CubicKind::GTilde => [
                2.0 * mu,
                -(a * mu + cpsi + 4.0 * mu * mu),
                2.0 * mu * (a * mu + cpsi + mu * mu),
                -mu * (a * mu * mu - cpsi * lp),
            ],
        };
        Self {
            kind,
            queue,
            a,
            c,
            coeffs,
        }
    }

    pub fn g(queue: QueueParams, a: f64, c: f64) -> Self {
        Self::new(CubicKind::G, queue, a, c)
    }

    pub fn g_tilde(queue: QueueParams, a: f64, c: f64) -> Self {
        Self::new(CubicKind::GTilde, queue, a, c)
    }

    pub fn kind(&self) -> CubicKind {
        self.kind
    }

    pub fn queue(&self) -> &QueueParams {
        &self.queue
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn phi0(&self) -> f64 {
        self.queue.spare_capacity()
    }

    pub fn coefficients(&self) -> [f64; 4] {
        self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        let [c3, c2, c1, c0] = self.coeffs;
        ((c3 * x + c2) * x + c1) * x + c0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let [c3, c2, c1, _] = self.coeffs;
        (3.0 * c3 * x + 2.0 * c2) * x + c1
    }

    /// Root of the cubic in `(0, mu - lambda_p)`.
    pub fn root_in_spare_capacity(&self) -> Result<BracketedRoot> {
        root_in_interval(self, 0.0, self.phi0())
    }
}

/// Evaluates `G` (Horner form).
pub fn eval_g(spec: &CubicSpec, lambda_s: f64) -> f64 {
    debug_assert_eq!(spec.kind, CubicKind::G);
    spec.eval(lambda_s)
}

/// Evaluates `G~` (Horner form).
pub fn eval_g_tilde(spec: &CubicSpec, lambda_s: f64) -> f64 {
    debug_assert_eq!(spec.kind, CubicKind::GTilde);
    spec.eval(lambda_s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketedRoot {
    pub value: f64,
    pub residual: f64,
    pub iterations: u32,
    /// Root sits within `BOUNDARY_TOL` of one of the bracket endpoints.
    pub boundary: bool,
}

/// Locates the unique root of `spec` in `(lo, hi)` by bisection followed by a
/// Newton polish. Uniqueness is checked on a `UNIQUENESS_GRID`-point grid.
pub fn root_in_interval(spec: &CubicSpec, lo: f64, hi: f64) -> Result<BracketedRoot> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::DegenerateBracket { lo, hi });
    }
    let f_tol = F_TOL * spec.coeffs[0].abs() * hi.abs().max(lo.abs()).powi(3).max(1.0);

    let step = (hi - lo) / UNIQUENESS_GRID as f64;
    let grid: Vec<(f64, f64)> = (0..=UNIQUENESS_GRID)
        .map(|i| {
            let x = if i == UNIQUENESS_GRID { hi } else { lo + step * i as f64 };
            (x, spec.eval(x))
        })
        .collect();

    // Endpoint values within tolerance count as zeros (boundary roots).
    let sign = |v: f64| {
        if v.abs() <= f_tol {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };
    let mut cells = Vec::new();
    let mut last_sign = sign(grid[0].1);
    let mut last_idx = 0;
    for (i, &(_, v)) in grid.iter().enumerate().skip(1) {
        let s = sign(v);
        if s != 0 {
            if last_sign != 0 && s != last_sign {
                cells.push((last_idx, i));
            }
            last_sign = s;
            last_idx = i;
        }
    }

    let lo_zero = sign(grid[0].1) == 0;
    let hi_zero = sign(grid[UNIQUENESS_GRID].1) == 0;
    match (cells.len(), lo_zero, hi_zero) {
        (0, true, false) => return Ok(boundary_root(lo, grid[0].1)),
        (0, false, true) => return Ok(boundary_root(hi, grid[UNIQUENESS_GRID].1)),
        (0, false, false) => return Err(Error::NoRootInBracket { lo, hi }),
        (1, false, false) => {}
        (n, lz, hz) => {
            return Err(Error::AmbiguousRoot {
                lo,
                hi,
                sign_changes: n + lz as usize + hz as usize,
            })
        }
    }

    let (i0, i1) = cells[0];
    let (mut a, mut fa) = grid[i0];
    let (mut b, _) = grid[i1];
    let width_tol = X_TOL * (hi - lo);
    let mut iterations = 0u32;
    while b - a > width_tol && iterations < 200 {
        let m = 0.5 * (a + b);
        let fm = spec.eval(m);
        iterations += 1;
        if fm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }

    let mut x = 0.5 * (a + b);
    let mut fx = spec.eval(x);
    let d = spec.derivative(x);
    if d != 0.0 {
        let polished = x - fx / d;
        let fp = spec.eval(polished);
        if polished >= a - width_tol && polished <= b + width_tol && fp.abs() < fx.abs() {
            x = polished;
            fx = fp;
        }
    }
    iterations += 1;

    if fx.abs() > f_tol {
        return Err(Error::NoRootInBracket { lo, hi });
    }
    Ok(BracketedRoot {
        value: x,
        residual: fx,
        iterations,
        boundary: (x - lo).abs() <= BOUNDARY_TOL || (hi - x).abs() <= BOUNDARY_TOL,
    })
}

fn boundary_root(x: f64, fx: f64) -> BracketedRoot {
    BracketedRoot {
        value: x,
        residual: fx,
        iterations: 0,
        boundary: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> QueueParams {
        QueueParams::new(6.0, 12.0, 0.2).unwrap()
    }

    /// Expanded power-basis value computed independently of the Horner form.
    fn g_direct(q: &QueueParams, a: f64, c: f64, x: f64) -> f64 {
        let (mu, psi, lp) = (q.mu(), q.psi(), q.lambda_p());
        let phi0 = mu - lp;
        2.0 * mu * x.powi(3) - (c * psi + mu * (a + 4.0 * phi0)) * x.powi(2)
            + 2.0 * phi0 * (c * psi + mu * (a + phi0)) * x
            - a * mu * phi0.powi(2)
            + c * psi * lp * (mu + phi0)
    }

    #[test]
    fn g_matches_expanded_form() {
        let q = table1();
        let g = CubicSpec::g(q, 120.0, 0.3);
        for x in [0.0, 1.0, 2.5, 5.6655, 6.0] {
            let direct = g_direct(&q, 120.0, 0.3, x);
            assert!((eval_g(&g, x) - direct).abs() <= 1e-9 * direct.abs().max(1.0));
        }
        let g0 = -120.0 * 12.0 * 36.0 + 0.3 * 3.38 * 6.0 * 18.0;
        assert!((eval_g(&g, 0.0) - g0).abs() < 1e-9);
    }

    #[test]
    fn g_vanishes_at_zero_for_lower_threshold() {
        let q = table1();
        let c = 0.3;
        let a_l = 6.0 * (24.0 - 6.0) * c * q.psi() / (12.0 * 36.0);
        assert!(eval_g(&CubicSpec::g(q, a_l, c), 0.0).abs() < 1e-10);
        let at_l = 6.0 * c * q.psi() / 144.0;
        assert!(eval_g_tilde(&CubicSpec::g_tilde(q, at_l, c), 0.0).abs() < 1e-10);
    }

    #[test]
    fn g_tilde_signs_table1() {
        let gt = CubicSpec::g_tilde(table1(), 120.0, 0.3);
        assert!(eval_g_tilde(&gt, 0.0) < 0.0);
        // both endpoints negative: the root lies beyond the spare capacity
        assert!(eval_g_tilde(&gt, 6.0) < 0.0);
        assert!(matches!(gt.root_in_spare_capacity(), Err(Error::NoRootInBracket { .. })));
        let root = root_in_interval(&gt, 0.0, 11.99).unwrap();
        let g = CubicSpec::g(table1(), 120.0, 0.3).root_in_spare_capacity().unwrap();
        assert!(root.value > g.value);
        assert!(root.value > 6.0);
    }

    #[test]
    fn lambda1_table1() {
        let q = table1();
        let g = CubicSpec::g(q, 120.0, 0.3);
        let root = g.root_in_spare_capacity().unwrap();
        assert!((root.value - 5.6655).abs() < 1e-3);
        assert!(root.residual.abs() <= F_TOL * 24.0 * 216.0);
        assert!(!root.boundary);
        assert!(g_direct(&q, 120.0, 0.3, root.value).abs() < 1e-6 * 24.0 * 216.0);
    }

    #[test]
    fn bracket_errors() {
        let g = CubicSpec::g(table1(), 120.0, 0.3);
        assert!(matches!(root_in_interval(&g, 3.0, 3.0), Err(Error::DegenerateBracket { .. })));
        assert!(matches!(root_in_interval(&g, 4.0, 3.0), Err(Error::DegenerateBracket { .. })));
        assert!(matches!(root_in_interval(&g, 0.0, 5.0), Err(Error::NoRootInBracket { .. })));
    }

    #[test]
    fn multiple_sign_changes_are_ambiguous() {
        let mut three = CubicSpec::g(table1(), 120.0, 0.3);
        three.coeffs = [1.0, 0.0, -1.0, 0.0]; // roots -1, 0, 1
        assert!(matches!(
            root_in_interval(&three, -2.0, 2.0),
            Err(Error::AmbiguousRoot { sign_changes: 3, .. })
        ));
        let one = root_in_interval(&three, 0.5, 2.0).unwrap();
        assert!((one.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_root_at_lower_threshold() {
        let q = table1();
        let c = 0.3;
        let a_l = 6.0 * 18.0 * c * q.psi() / (12.0 * 36.0);
        let root = CubicSpec::g(q, a_l, c).root_in_spare_capacity().unwrap();
        assert!(root.boundary);
        assert!(root.value.abs() < 1e-9);
    }
}
